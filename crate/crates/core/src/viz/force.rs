use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pattern::PatternOp;
use crate::shapegen::{Side, StitchGraph, StitchId};

/// Vertical spacing of courses in the starting embedding.
pub const COURSE_PITCH: f64 = 0.5;
/// Rest length of a course edge between a knit and a purl stitch; the
/// face change folds the fabric, so ribs pull in.
pub const RIB_REST: f64 = 0.4;
const SPRING: f64 = 1.0;
const REPULSION: f64 = 0.02;
const CUTOFF: f64 = 1.5;
const JITTER: f64 = 1e-3;

/// Relaxed 2D positions of the design stitches.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutPreview {
    pub ids: Vec<StitchId>,
    pub positions: Vec<[f64; 2]>,
    /// Energy before the first iteration, then after each one.
    pub energy: Vec<f64>,
    /// Spring edges as index pairs into `ids`, with rest lengths.
    pub edges: Vec<(usize, usize, f64)>,
}

impl LayoutPreview {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("stitch_id,x,y\n");
        for (id, p) in self.ids.iter().zip(&self.positions) {
            writeln!(s, "{id},{:.4},{:.4}", p[0], p[1]).unwrap();
        }
        s
    }

    /// Horizontal span of the positions.
    pub fn width(&self) -> f64 {
        let xs = self.positions.iter().map(|p| p[0]);
        let lo = xs.clone().fold(f64::INFINITY, f64::min);
        let hi = xs.fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// Root mean square of `length - 1` over all edges.
    pub fn edge_deviation(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .edges
            .iter()
            .map(|&(a, b, _)| (dist(self.positions[a], self.positions[b]) - 1.0).powi(2))
            .sum();
        (sum / self.edges.len() as f64).sqrt()
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn face(op: PatternOp) -> bool {
    op == PatternOp::Purl
}

struct System {
    edges: Vec<(usize, usize, f64)>,
    linked: HashSet<(usize, usize)>,
}

impl System {
    fn cells(pos: &[[f64; 2]]) -> HashMap<(i64, i64), Vec<usize>> {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in pos.iter().enumerate() {
            let key = (
                (p[0] / CUTOFF).floor() as i64,
                (p[1] / CUTOFF).floor() as i64,
            );
            cells.entry(key).or_default().push(i);
        }
        cells
    }

    /// Repulsing pairs `(i, j)` with `i < j` closer than the cutoff.
    fn near_pairs(&self, pos: &[[f64; 2]]) -> Vec<(usize, usize, f64)> {
        let cells = Self::cells(pos);
        let mut keys: Vec<&(i64, i64)> = cells.keys().collect();
        keys.sort_unstable();
        let mut out = Vec::new();
        for &(cx, cy) in keys {
            for i in &cells[&(cx, cy)] {
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(other) = cells.get(&(cx + dx, cy + dy)) else {
                            continue;
                        };
                        for j in other {
                            if j <= i || self.linked.contains(&(*i, *j)) {
                                continue;
                            }
                            let d = dist(pos[*i], pos[*j]);
                            if d < CUTOFF {
                                out.push((*i, *j, d));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn energy(&self, pos: &[[f64; 2]]) -> f64 {
        let springs: f64 = self
            .edges
            .iter()
            .map(|&(a, b, r)| 0.5 * SPRING * (dist(pos[a], pos[b]) - r).powi(2))
            .sum();
        let repulse: f64 = self
            .near_pairs(pos)
            .iter()
            .map(|&(_, _, d)| REPULSION * (1.0 / d.max(1e-6) - 1.0 / CUTOFF))
            .sum();
        springs + repulse
    }

    fn forces(&self, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut f = vec![[0.0; 2]; pos.len()];
        let mut push = |a: usize, b: usize, mag: f64, d: f64| {
            let u = [(pos[b][0] - pos[a][0]) / d, (pos[b][1] - pos[a][1]) / d];
            f[a][0] += mag * u[0];
            f[a][1] += mag * u[1];
            f[b][0] -= mag * u[0];
            f[b][1] -= mag * u[1];
        };
        for &(a, b, r) in &self.edges {
            let d = dist(pos[a], pos[b]).max(1e-9);
            push(a, b, SPRING * (d - r), d);
        }
        for (a, b, d) in self.near_pairs(pos) {
            let d = d.max(1e-6);
            push(a, b, -REPULSION / (d * d), d);
        }
        f
    }
}

/// Starting positions: stitches at their lateral position, tubes unrolled
/// with the back after the front, and rows stacked by wale depth.
fn grid_embedding(g: &StitchGraph, ids: &[StitchId]) -> Vec<[f64; 2]> {
    let mut depth = vec![0u32; g.stitches.len()];
    let mut pending: Vec<usize> = g.stitches.iter().map(|s| s.parents.len()).collect();
    let mut ready: Vec<StitchId> = g
        .stitches
        .iter()
        .filter(|s| s.parents.is_empty())
        .map(|s| s.id)
        .collect();
    while let Some(s) = ready.pop() {
        for &c in &g.stitch(s).children {
            depth[c as usize] = depth[c as usize].max(depth[s as usize] + 1);
            pending[c as usize] -= 1;
            if pending[c as usize] == 0 {
                ready.push(c);
            }
        }
    }
    ids.iter()
        .map(|&id| {
            let st = g.stitch(id);
            let course = g.course(st.course);
            let x = if course.circular && st.side == Side::Back {
                course.stitches.len() as i32 - 1 - st.x
            } else {
                st.x
            };
            [x as f64, depth[id as usize] as f64 * COURSE_PITCH]
        })
        .collect()
}

/// Mass-spring relaxation of the stitch graph. Course and wale edges are
/// springs with unit rest length (shorter across a knit/purl change);
/// unlinked stitches closer than a cutoff repel weakly. Each iteration is a
/// damped gradient step that is retried with a smaller step until the
/// energy does not rise. `seed` only breaks ties between coincident points.
pub fn force_layout(g: &StitchGraph, iterations: usize, seed: u64) -> LayoutPreview {
    let ids: Vec<StitchId> = g
        .stitches
        .iter()
        .filter(|s| !s.is_continuity())
        .map(|s| s.id)
        .collect();
    let mut index = vec![usize::MAX; g.stitches.len()];
    for (k, id) in ids.iter().enumerate() {
        index[*id as usize] = k;
    }
    let mut edges = Vec::new();
    for course in &g.courses {
        let members: Vec<StitchId> = course
            .stitches
            .iter()
            .copied()
            .filter(|s| index[*s as usize] != usize::MAX)
            .collect();
        let mut pairs: Vec<(StitchId, StitchId)> =
            members.windows(2).map(|w| (w[0], w[1])).collect();
        if course.circular && members.len() > 2 {
            pairs.push((members[members.len() - 1], members[0]));
        }
        for (a, b) in pairs {
            let rest = if face(g.stitch(a).op) != face(g.stitch(b).op) {
                RIB_REST
            } else {
                1.0
            };
            edges.push((index[a as usize], index[b as usize], rest));
        }
    }
    for st in &g.stitches {
        for c in &st.children {
            let (a, b) = (index[st.id as usize], index[*c as usize]);
            if a != usize::MAX && b != usize::MAX {
                edges.push((a, b, 1.0));
            }
        }
    }
    let linked: HashSet<(usize, usize)> = edges
        .iter()
        .map(|&(a, b, _)| (a.min(b), a.max(b)))
        .collect();
    let sys = System { edges, linked };

    let mut pos = grid_embedding(g, &ids);
    let mut energy = vec![sys.energy(&pos)];
    if iterations > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in &mut pos {
            p[0] += rng.gen_range(-JITTER..JITTER);
            p[1] += rng.gen_range(-JITTER..JITTER);
        }
        energy[0] = sys.energy(&pos);
    }
    let mut step = 0.1;
    for _ in 0..iterations {
        let current = *energy.last().unwrap();
        let f = sys.forces(&pos);
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<[f64; 2]> = pos
                .iter()
                .zip(&f)
                .map(|(p, d)| {
                    let (dx, dy) = (step * d[0], step * d[1]);
                    // cap each move so one stiff spring cannot fling a stitch
                    let len = (dx * dx + dy * dy).sqrt();
                    let k = if len > 0.5 { 0.5 / len } else { 1.0 };
                    [p[0] + k * dx, p[1] + k * dy]
                })
                .collect();
            let e = sys.energy(&trial);
            if e <= current {
                accepted = Some((trial, e));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, e)) => {
                pos = trial;
                energy.push(e);
                step = (step * 1.2).min(0.5);
            }
            None => energy.push(current),
        }
    }
    LayoutPreview {
        ids,
        positions: pos,
        energy,
        edges: sys.edges,
    }
}
