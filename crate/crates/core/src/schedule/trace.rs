use std::collections::{BTreeMap, VecDeque};

use super::CourseSchedule;
use crate::shapegen::{CourseId, CourseKind, StitchGraph, StitchId};
use crate::skeleton::ResolvedSkeleton;

/// Yarn path per carrier. Only one carrier is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YarnTrace {
    pub carriers: Vec<Vec<StitchId>>,
    pub continuity: Vec<StitchId>,
}

/// Lateral offset of every node frame, aligning the centers of mass of
/// wale-linked stitches across nodes.
pub fn provisional_offsets(g: &StitchGraph, skel: &ResolvedSkeleton) -> Vec<i32> {
    let n = skel.nodes.len();
    // (a, b) -> (sum of x_a - x_b, count)
    let mut pairs: BTreeMap<(u32, u32), (i64, i64)> = BTreeMap::new();
    for (p, c) in g.wale_links() {
        let (sp, sc) = (g.stitch(p), g.stitch(c));
        if sp.node != sc.node {
            let d = (sp.x - sc.x) as i64;
            let e = pairs.entry((sp.node.0, sc.node.0)).or_default();
            e.0 += d;
            e.1 += 1;
            let e = pairs.entry((sc.node.0, sp.node.0)).or_default();
            e.0 -= d;
            e.1 += 1;
        }
    }
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for ((a, b), (sum, count)) in pairs {
        adj[a as usize].push((b, sum as f64 / count as f64));
    }
    let mut offsets: Vec<Option<i32>> = vec![None; n];
    let start = skel.interface(skel.graph.start).node.0 as usize;
    for seed in std::iter::once(start).chain(0..n) {
        if offsets[seed].is_some() {
            continue;
        }
        offsets[seed] = Some(0);
        let mut queue = VecDeque::from([seed]);
        while let Some(a) = queue.pop_front() {
            let oa = offsets[a].unwrap();
            for (b, mean) in &adj[a] {
                if offsets[*b as usize].is_none() {
                    // x_a + o_a = x_b + o_b on average
                    offsets[*b as usize] = Some(oa + mean.round() as i32);
                    queue.push_back(*b as usize);
                }
            }
        }
    }
    offsets.into_iter().map(|o| o.unwrap_or(0)).collect()
}

/// Walks the yarn through the scheduled courses, inserting continuity tucks
/// across lateral jumps wider than `gap`. Returns the schedule including the
/// continuity courses.
pub fn trace_yarn(
    g: &mut StitchGraph,
    skel: &ResolvedSkeleton,
    schedule: &CourseSchedule,
    gap: u32,
) -> (CourseSchedule, YarnTrace) {
    let offsets = provisional_offsets(g, skel);
    let gap = gap.max(1) as i32;
    let pos = |g: &StitchGraph, s: StitchId| {
        let st = g.stitch(s);
        offsets[st.node.0 as usize] + st.x
    };
    let mut path: Vec<StitchId> = Vec::with_capacity(g.stitches.len());
    let mut continuity = Vec::new();
    let mut order = Vec::with_capacity(schedule.order.len());
    let mut component = schedule.component.clone();
    let mut next_seq: BTreeMap<u32, u32> = BTreeMap::new();
    for c in &g.courses {
        let e = next_seq.entry(c.node.0).or_default();
        *e = (*e).max(c.seq + 1);
    }
    let mut reversed_last = true;

    for &c in &schedule.order {
        let course = g.course(c);
        let mut stitches = course.stitches.clone();
        if !course.circular {
            let reverse = match path.last() {
                Some(&last) => {
                    let p = pos(g, last);
                    let d_first = (pos(g, stitches[0]) - p).abs();
                    let d_end = (pos(g, *stitches.last().unwrap()) - p).abs();
                    d_end < d_first || (d_end == d_first && !reversed_last)
                }
                None => false,
            };
            if reverse {
                stitches.reverse();
            }
            reversed_last = reverse;
        }
        if let Some(&last) = path.last() {
            let (a, b) = (pos(g, last), pos(g, stitches[0]));
            let d = (b - a).abs();
            if d > gap {
                let n = (d + gap - 1) / gap - 1;
                let target = g.stitch(stitches[0]);
                let (node, side, row) = (target.node, target.side, target.row);
                let off = offsets[node.0 as usize];
                let positions: Vec<(i32, _)> = (1..=n)
                    .map(|k| {
                        let p = a + ((k * (b - a)) as f64 / (n + 1) as f64).round() as i32;
                        (p - off, side)
                    })
                    .collect();
                let seq = next_seq.entry(node.0).or_default();
                let cc = g.add_course(node, CourseKind::Continuity, false, *seq, &positions, row);
                *seq += 1;
                component.push(schedule.component[c as usize]);
                order.push(cc);
                for s in g.course(cc).stitches.clone() {
                    continuity.push(s);
                    path.push(s);
                }
            }
        }
        order.push(c);
        path.extend(stitches);
    }

    for w in path.windows(2) {
        g.stitch_mut(w[0]).next = Some(w[1]);
        g.stitch_mut(w[1]).prev = Some(w[0]);
    }
    let sched = CourseSchedule::from_order(order, component);
    (
        sched,
        YarnTrace {
            carriers: vec![path],
            continuity,
        },
    )
}

/// Courses of each node including continuity courses, in schedule order.
pub fn courses_by_node(
    g: &StitchGraph,
    schedule: &CourseSchedule,
    nodes: usize,
) -> Vec<Vec<CourseId>> {
    let mut out = vec![Vec::new(); nodes];
    for &c in &schedule.order {
        out[g.course(c).node.0 as usize].push(c);
    }
    out
}
