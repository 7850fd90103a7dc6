use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::diag::Diagnostic;
use crate::layout::{NeedleAddress, TimeNeedleBed};
use crate::pattern::{PatternOp, Selection};
use crate::shapegen::{Side, StitchGraph, StitchId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum View {
    #[default]
    Full,
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Face {
    Front,
    Back,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Zoom {
    /// One filled cell per stitch.
    Grid,
    /// One glyph per stitch, shaped by its operation.
    #[default]
    Glyph,
    /// Glyphs plus the yarn path and wale links.
    Yarn,
}

/// Stitches to outline. `marked` get the `issue` class (or `sel` for a
/// plain selection), `conflicts` the `conflict` class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Highlight {
    pub marked: BTreeSet<StitchId>,
    pub conflicts: BTreeSet<StitchId>,
    pub selection: bool,
}

impl Highlight {
    pub fn selection(sel: &Selection) -> Self {
        Highlight {
            marked: sel.ids().collect(),
            conflicts: BTreeSet::new(),
            selection: true,
        }
    }

    pub fn diagnostics<'a>(diags: impl IntoIterator<Item = &'a Diagnostic>) -> Self {
        let mut h = Highlight::default();
        for d in diags {
            h.marked.extend(&d.stitches);
            h.conflicts.extend(&d.conflicts);
        }
        h
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub view: View,
    pub face: Face,
    pub zoom: Zoom,
    pub highlight: Option<Highlight>,
}

const STYLE: &str = "\
.held{fill:#e4e4e4}
.st{fill:none;stroke:#333;stroke-width:1.5}
rect.st{fill:#6a8caf;stroke:none}
.purl{stroke:#b5523b}
rect.purl{fill:#b5523b}
.tuck{stroke:#3b8b5a}
rect.tuck{fill:#3b8b5a}
.miss{stroke:#999;stroke-dasharray:2 1}
rect.miss{fill:#cccccc}
.move-l,.move-r{stroke:#7a4fb0}
rect.move-l,rect.move-r{fill:#7a4fb0}
.cross-over,.cross-under{stroke:#c08a1e}
rect.cross-over,rect.cross-under{fill:#c08a1e}
.cont{stroke:#aaa}
rect.cont{fill:#dddddd}
.sel{stroke:#1f6fd1;stroke-width:2.5}
.issue{stroke:#d11f1f;stroke-width:2.5}
.conflict{stroke:#f08c00;stroke-width:2.5}
rect.sel,rect.issue,rect.conflict{stroke-width:1.5}
.yarn{fill:none;stroke:#5a5a5a;stroke-width:0.6}
.wale{stroke:#9bb7d4;stroke-width:0.6}
.label{font:10px monospace;fill:#555}
";

/// Element class of a stitch glyph.
pub fn glyph_class(op: PatternOp, continuity: bool) -> &'static str {
    if continuity {
        return "cont";
    }
    match op {
        PatternOp::Knit => "knit",
        PatternOp::Purl => "purl",
        PatternOp::Tuck => "tuck",
        PatternOp::Miss => "miss",
        PatternOp::Move(k) if k < 0 => "move-l",
        PatternOp::Move(_) => "move-r",
        PatternOp::Cross { over: true, .. } => "cross-over",
        PatternOp::Cross { over: false, .. } => "cross-under",
    }
}

/// Glyph outline inside a `c`-sized cell at `(x, y)`, in twelfths of the cell.
fn glyph_path(class: &str, x: i64, y: i64, c: i64) -> String {
    let pts: &[&[(i64, i64)]] = match class {
        "knit" => &[&[(2, 2), (6, 10), (10, 2)]],
        "purl" => &[&[(2, 6), (10, 6)]],
        "tuck" => &[&[(3, 3), (3, 9), (9, 9), (9, 3)]],
        "miss" => &[&[(1, 9), (11, 9)]],
        "move-r" => &[&[(2, 6), (10, 6)], &[(7, 3), (10, 6), (7, 9)]],
        "move-l" => &[&[(10, 6), (2, 6)], &[(5, 3), (2, 6), (5, 9)]],
        "cross-over" => &[&[(2, 10), (10, 2)]],
        "cross-under" => &[&[(2, 2), (10, 10)]],
        _ => &[&[(5, 6), (7, 6)]],
    };
    let mut d = String::new();
    for stroke in pts {
        for (k, (px, py)) in stroke.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{} {}", x + px * c / 12, y + py * c / 12).unwrap();
        }
    }
    d
}

struct Frame {
    cell: i64,
    lo: i64,
    cols: i64,
    rows: i64,
    margin: i64,
    faces: Vec<Side>,
}

impl Frame {
    fn panel_x(&self, k: usize) -> i64 {
        self.margin + k as i64 * (self.cols + 2) * self.cell
    }

    /// Top-left corner of the cell of `a` at `step`, if `a` is on a shown face.
    fn cell_at(&self, a: NeedleAddress, step: usize) -> Option<(i64, i64)> {
        let k = self.faces.iter().position(|f| *f == a.side)?;
        let col = a.needle as i64 - self.lo;
        // the back is seen from behind
        let col = if a.side == Side::Back {
            self.cols - 1 - col
        } else {
            col
        };
        let y = self.margin + (self.rows - 1 - step as i64) * self.cell;
        Some((self.panel_x(k) + col * self.cell, y))
    }
}

/// Draws the time-needle bed: time runs upward, needles left to right (the
/// back panel mirrored, as seen from behind). Held loops are shaded cells;
/// every stitch formed in a step is one element with class `st` plus its
/// glyph class.
pub fn render_svg(bed: &TimeNeedleBed, graph: &StitchGraph, options: &RenderOptions) -> String {
    let cell = match options.zoom {
        Zoom::Grid => 6,
        Zoom::Glyph | Zoom::Yarn => 12,
    };
    let used: Vec<u32> = bed
        .steps
        .iter()
        .flat_map(|s| s.active.iter().chain(&s.suspended).map(|(a, _)| a.needle))
        .collect();
    let lo = used.iter().min().copied().unwrap_or(0) as i64;
    let hi = used.iter().max().copied().unwrap_or(0) as i64;
    let faces = match options.face {
        Face::Front => vec![Side::Front],
        Face::Back => vec![Side::Back],
        Face::Both => vec![Side::Front, Side::Back],
    };
    let f = Frame {
        cell,
        lo,
        cols: hi - lo + 1,
        rows: bed.steps.len() as i64,
        margin: 16,
        faces,
    };
    let width = 2 * f.margin + f.faces.len() as i64 * (f.cols + 2) * cell - 2 * cell;
    let height = 2 * f.margin + f.rows * cell;

    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    let view = match options.view {
        View::Full => "full",
        View::Compact => "compact",
    };
    writeln!(
        s,
        "<title>time-needle bed, {view} view, {} steps</title>",
        bed.steps.len()
    )
    .unwrap();
    writeln!(s, "<style>\n{STYLE}</style>").unwrap();
    for (k, side) in f.faces.iter().enumerate() {
        let name = if *side == Side::Front {
            "front"
        } else {
            "back"
        };
        writeln!(
            s,
            "<text class=\"label\" x=\"{}\" y=\"12\">{name}</text>",
            f.panel_x(k)
        )
        .unwrap();
    }

    s.push_str("<g class=\"held\">\n");
    for (t, step) in bed.steps.iter().enumerate() {
        for (a, _) in &step.suspended {
            if let Some((x, y)) = f.cell_at(*a, t) {
                writeln!(
                    s,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\"/>"
                )
                .unwrap();
            }
        }
    }
    s.push_str("</g>\n");

    let mut placed: BTreeMap<StitchId, (i64, i64)> = BTreeMap::new();
    for (t, step) in bed.steps.iter().enumerate() {
        for (a, id) in &step.active {
            if let Some(p) = f.cell_at(*a, t) {
                placed.insert(*id, p);
            }
        }
    }

    if options.zoom == Zoom::Yarn {
        let half = cell / 2;
        s.push_str("<g class=\"links\">\n");
        for (id, (x, y)) in &placed {
            for c in &graph.stitch(*id).children {
                if let Some((cx, cy)) = placed.get(c) {
                    writeln!(
                        s,
                        "<line class=\"wale\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                        x + half,
                        y + half,
                        cx + half,
                        cy + half
                    )
                    .unwrap();
                }
            }
        }
        for step in &bed.steps {
            let mut d = String::new();
            for (_, id) in &step.active {
                if let Some((x, y)) = placed.get(id) {
                    let cmd = if d.is_empty() { 'M' } else { 'L' };
                    write!(d, "{cmd}{} {}", x + half, y + half).unwrap();
                }
            }
            if d.contains('L') {
                writeln!(s, "<path class=\"yarn\" d=\"{d}\"/>").unwrap();
            }
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g class=\"stitches\">\n");
    for step in &bed.steps {
        for (_, id) in &step.active {
            let Some(&(x, y)) = placed.get(id) else {
                continue;
            };
            let st = graph.stitch(*id);
            let mut class = format!("st {}", glyph_class(st.op, st.is_continuity()));
            if let Some(h) = &options.highlight {
                if h.marked.contains(id) {
                    class.push_str(if h.selection { " sel" } else { " issue" });
                }
                if h.conflicts.contains(id) {
                    class.push_str(" conflict");
                }
            }
            match options.zoom {
                Zoom::Grid => writeln!(
                    s,
                    "<rect class=\"{class}\" id=\"s{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                    x + 1,
                    y + 1,
                    cell - 2,
                    cell - 2
                ),
                Zoom::Glyph | Zoom::Yarn => {
                    let d = glyph_path(glyph_class(st.op, st.is_continuity()), x, y, cell);
                    writeln!(s, "<path class=\"{class}\" id=\"s{id}\" d=\"{d}\"/>")
                }
            }
            .unwrap();
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
