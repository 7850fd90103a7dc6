use super::graph::{CourseId, CourseKind, Side, StitchGraph, StitchId};
use super::shaper::run_shaper;
use super::ShapeError;
use crate::skeleton::{
    Alignment, InterfaceId, InterfaceState, Orientation, ResolvedNode, ResolvedShape,
    ResolvedSkeleton, Shaping, SheetType,
};

/// Stitches of a course (or course segment) exposed at an interface, in
/// lateral course order.
#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub stitches: Vec<StitchId>,
    pub circular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCourses {
    pub courses: Vec<CourseId>,
    pub ports: Vec<(InterfaceId, Port)>,
}

pub(crate) fn positions(width: u32, circular: bool, offset: i32) -> Vec<(i32, Side)> {
    let w = width as i32;
    let front = (0..w).map(|k| (offset + k, Side::Front));
    if circular {
        front
            .chain((0..w).map(|k| (offset + w - 1 - k, Side::Back)))
            .collect()
    } else {
        front.collect()
    }
}

fn bind_flat(
    g: &mut StitchGraph,
    from: &[StitchId],
    to: &[StitchId],
    shaping: &Shaping,
) -> Result<(), String> {
    let (a, b) = (from.len(), to.len());
    if a <= b {
        let map = run_shaper(shaping, a, b).map_err(|e| e.to_string())?;
        for (i, j) in map.pairs {
            g.link(from[i], to[j]);
        }
    } else {
        let map = run_shaper(shaping, b, a).map_err(|e| e.to_string())?;
        for (i, j) in map.pairs {
            g.link(from[j], to[i]);
        }
    }
    Ok(())
}

/// Wale-binds two consecutive courses. Circular courses are shaped per side
/// in lateral order.
pub(crate) fn bind(
    g: &mut StitchGraph,
    from: &[StitchId],
    to: &[StitchId],
    circular: bool,
    shaping: &Shaping,
) -> Result<(), String> {
    if !circular {
        return bind_flat(g, from, to, shaping);
    }
    let (ha, hb) = (from.len() / 2, to.len() / 2);
    bind_flat(g, &from[..ha], &to[..hb], shaping)?;
    let back_from: Vec<StitchId> = from[ha..].iter().rev().copied().collect();
    let back_to: Vec<StitchId> = to[hb..].iter().rev().copied().collect();
    bind_flat(g, &back_from, &back_to, shaping)
}

fn align_offset(frame: u32, width: u32, alignment: Alignment) -> i32 {
    match alignment {
        Alignment::Left => 0,
        Alignment::Right => (frame - width) as i32,
        Alignment::Center => ((frame - width) / 2) as i32,
    }
}

/// Per-side widths of a closing cascade starting from `width`.
fn closing_widths(width: u32, circular: bool) -> Vec<u32> {
    let mut out = Vec::new();
    let mut w = width;
    if circular {
        while w > 1 {
            w -= 1;
            out.push(w);
        }
    } else {
        while w > 2 {
            w = (w - 2).max(w.div_ceil(2));
            out.push(w);
        }
    }
    out
}

struct Builder<'a> {
    g: &'a mut StitchGraph,
    node: &'a ResolvedNode,
    courses: Vec<CourseId>,
}

impl Builder<'_> {
    fn course(
        &mut self,
        kind: CourseKind,
        circular: bool,
        pos: &[(i32, Side)],
        row: i32,
    ) -> CourseId {
        let seq = self.courses.len() as u32;
        let c = self
            .g
            .add_course(self.node.id, kind, circular, seq, pos, row);
        self.courses.push(c);
        c
    }

    fn stitches(&self, c: CourseId) -> Vec<StitchId> {
        self.g.course(c).stitches.clone()
    }

    fn err(&self, message: String) -> ShapeError {
        ShapeError::Node {
            node: self.node.name.clone(),
            message,
        }
    }
}

fn interface_closed(skel: &ResolvedSkeleton, id: InterfaceId) -> bool {
    skel.interface(id).state == InterfaceState::Closed
}

/// Expands one resolved node into courses with intra-node wale links.
pub fn generate_node_courses(
    g: &mut StitchGraph,
    skel: &ResolvedSkeleton,
    node: &ResolvedNode,
) -> Result<NodeCourses, ShapeError> {
    let itfs = skel.graph.node(node.id).interfaces.clone();
    let mut b = Builder {
        g,
        node,
        courses: Vec::new(),
    };
    let mut ports = Vec::new();

    match &node.shape {
        ResolvedShape::Sheet {
            sheet_type,
            course_widths,
            shaping,
            alignment,
            ..
        } => {
            let circular = *sheet_type == SheetType::Tubular;
            let frame = *course_widths.iter().max().expect("length >= 1");
            let len = course_widths.len() as i32;
            let (rows, dir): (Vec<i32>, i32) = match node.orientation {
                Orientation::Forward => ((0..len).collect(), 1),
                Orientation::Reverse => ((0..len).rev().collect(), -1),
            };
            let (in_itf, out_itf) = match node.orientation {
                Orientation::Forward => (itfs[0], itfs[1]),
                Orientation::Reverse => (itfs[1], itfs[0]),
            };
            let width_at = |r: i32| course_widths[r as usize];
            let offset_at = |r: i32| align_offset(frame, width_at(r), *alignment);

            let mut prev: Option<Vec<StitchId>> = None;
            if interface_closed(skel, in_itf) {
                let first = rows[0];
                let mut widths = closing_widths(width_at(first), circular);
                widths.reverse();
                let n = widths.len() as i32;
                for (k, w) in widths.into_iter().enumerate() {
                    let off = offset_at(first) + ((width_at(first) - w) / 2) as i32;
                    let row = first - dir * (n - k as i32);
                    let c = b.course(
                        CourseKind::Cascade,
                        circular,
                        &positions(w, circular, off),
                        row,
                    );
                    let cur = b.stitches(c);
                    if let Some(p) = &prev {
                        bind(b.g, p, &cur, circular, &Shaping::Center).map_err(|e| b.err(e))?;
                    }
                    prev = Some(cur);
                }
            }
            let mut entry = None;
            for &r in &rows {
                let c = b.course(
                    CourseKind::Regular,
                    circular,
                    &positions(width_at(r), circular, offset_at(r)),
                    r,
                );
                let cur = b.stitches(c);
                if let Some(p) = &prev {
                    bind(b.g, p, &cur, circular, shaping).map_err(|e| b.err(e))?;
                }
                entry.get_or_insert_with(|| cur.clone());
                prev = Some(cur);
            }
            let last = *rows.last().unwrap();
            if interface_closed(skel, out_itf) {
                for (k, w) in closing_widths(width_at(last), circular)
                    .into_iter()
                    .enumerate()
                {
                    let off = offset_at(last) + ((width_at(last) - w) / 2) as i32;
                    let row = last + dir * (k as i32 + 1);
                    let c = b.course(
                        CourseKind::Cascade,
                        circular,
                        &positions(w, circular, off),
                        row,
                    );
                    let cur = b.stitches(c);
                    bind(
                        b.g,
                        prev.as_ref().unwrap(),
                        &cur,
                        circular,
                        &Shaping::Center,
                    )
                    .map_err(|e| b.err(e))?;
                    prev = Some(cur);
                }
            }
            let exit = prev.unwrap();
            ports.push((
                in_itf,
                Port {
                    stitches: entry.unwrap(),
                    circular,
                },
            ));
            ports.push((
                out_itf,
                Port {
                    stitches: exit,
                    circular,
                },
            ));
        }
        ResolvedShape::Joint {
            rows,
            short_widths,
            layout,
            alignment,
            course_width,
            circular,
        } => {
            let circular = *circular;
            let count = if circular {
                2 * course_width
            } else {
                *course_width
            };
            let pos = positions(*course_width, circular, 0);
            let (in_itf, out_itf) = match node.orientation {
                Orientation::Forward => (itfs[0], itfs[1]),
                Orientation::Reverse => (itfs[1], itfs[0]),
            };
            let row_of = |k: u32| match node.orientation {
                Orientation::Forward => k as i32,
                Orientation::Reverse => (rows + 1 - k) as i32,
            };
            let entry_c = b.course(CourseKind::Regular, circular, &pos, row_of(0));
            let entry = b.stitches(entry_c);
            let mut latest = entry.clone();
            let widths: Vec<u32> = match node.orientation {
                Orientation::Forward => short_widths.clone(),
                Orientation::Reverse => short_widths.iter().rev().copied().collect(),
            };
            for (k, s) in widths.iter().enumerate() {
                if *s >= count {
                    return Err(b.err(format!("short row width {s} not below course size {count}")));
                }
                let start = match layout {
                    Some(f) => ((f * (count - s) as f64) + 0.5).floor() as u32,
                    None => align_offset(count, *s, *alignment) as u32,
                } as usize;
                let seg = &pos[start..start + *s as usize];
                let c = b.course(CourseKind::ShortRow, false, seg, row_of(k as u32 + 1));
                let cur = b.stitches(c);
                for (m, id) in cur.iter().enumerate() {
                    b.g.link(latest[start + m], *id);
                    latest[start + m] = *id;
                }
            }
            let exit_c = b.course(CourseKind::Regular, circular, &pos, row_of(rows + 1));
            let exit = b.stitches(exit_c);
            for (m, id) in exit.iter().enumerate() {
                b.g.link(latest[m], *id);
            }
            ports.push((
                in_itf,
                Port {
                    stitches: entry,
                    circular,
                },
            ));
            ports.push((
                out_itf,
                Port {
                    stitches: exit,
                    circular,
                },
            ));
        }
        ResolvedShape::Split {
            base_width,
            circular,
            folded,
            branches,
            ..
        } => {
            let circular = *circular;
            let c = b.course(
                CourseKind::Split,
                circular,
                &positions(*base_width, circular, 0),
                0,
            );
            let all = b.stitches(c);
            ports.push((
                itfs[0],
                Port {
                    stitches: all.clone(),
                    circular,
                },
            ));
            let w = *base_width as usize;
            for (k, (start, bw)) in branches.iter().enumerate() {
                let (s, n) = (*start as usize, *bw as usize);
                let port = if *folded && circular {
                    let mut seg: Vec<StitchId> = all[s..s + n].to_vec();
                    // back stitches of x in [s, s+n), descending x
                    seg.extend_from_slice(&all[w + (w - s - n)..w + (w - s)]);
                    Port {
                        stitches: seg,
                        circular: true,
                    }
                } else {
                    Port {
                        stitches: all[s..s + n].to_vec(),
                        circular: false,
                    }
                };
                ports.push((itfs[k + 1], port));
            }
        }
    }
    Ok(NodeCourses {
        courses: b.courses,
        ports,
    })
}
