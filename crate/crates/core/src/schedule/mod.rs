//! Course ordering and yarn tracing.

mod trace;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

pub use trace::{courses_by_node, provisional_offsets, trace_yarn, YarnTrace};

use crate::shapegen::{CourseId, StitchGraph};
use crate::skeleton::ResolvedSkeleton;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("cyclic wale dependency through courses {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

/// Knitting order of courses; `order[t]` is knitted at time step `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CourseSchedule {
    pub order: Vec<CourseId>,
    /// Time step of every course, indexed by course id.
    pub time: Vec<u32>,
    /// Connected component of every course, indexed by course id.
    pub component: Vec<u32>,
}

impl CourseSchedule {
    pub fn from_order(order: Vec<CourseId>, component: Vec<u32>) -> Self {
        let mut time = vec![0; component.len()];
        for (t, c) in order.iter().enumerate() {
            time[*c as usize] = t as u32;
        }
        CourseSchedule {
            order,
            time,
            component,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub(crate) fn course_label(g: &StitchGraph, skel: &ResolvedSkeleton, c: CourseId) -> String {
    let course = g.course(c);
    format!("{}#{}", skel.node(course.node).name, course.seq)
}

/// Course dependency edges: cross-course wale links plus node-local order.
fn course_edges(g: &StitchGraph, node_courses: &[Vec<CourseId>]) -> Vec<BTreeSet<CourseId>> {
    let mut succ = vec![BTreeSet::new(); g.courses.len()];
    for (p, c) in g.wale_links() {
        let (cp, cc) = (g.stitch(p).course, g.stitch(c).course);
        if cp != cc {
            succ[cp as usize].insert(cc);
        }
    }
    for courses in node_courses {
        for w in courses.windows(2) {
            succ[w[0] as usize].insert(w[1]);
        }
    }
    succ
}

fn components(succ: &[BTreeSet<CourseId>]) -> Vec<u32> {
    let n = succ.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for (a, s) in succ.iter().enumerate() {
        for b in s {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, *b as usize));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut ids = vec![u32::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|x| {
            let r = find(&mut parent, x);
            if ids[r] == u32::MAX {
                ids[r] = next;
                next += 1;
            }
            ids[r]
        })
        .collect()
}

/// Topologically sorts courses. Ties go to the start node first, then by
/// node name and node-local course order.
pub fn schedule_courses(
    g: &StitchGraph,
    skel: &ResolvedSkeleton,
    node_courses: &[Vec<CourseId>],
) -> Result<CourseSchedule, ScheduleError> {
    let succ = course_edges(g, node_courses);
    let mut indeg = vec![0u32; g.courses.len()];
    for s in &succ {
        for c in s {
            indeg[*c as usize] += 1;
        }
    }
    let start_node = skel.interface(skel.graph.start).node;
    let key = |c: CourseId| {
        let course = g.course(c);
        (
            course.node != start_node,
            skel.node(course.node).name.clone(),
            course.seq,
            c,
        )
    };
    let mut heap: BinaryHeap<Reverse<(bool, String, u32, CourseId)>> = (0..g.courses.len() as u32)
        .filter(|c| indeg[*c as usize] == 0)
        .map(|c| Reverse(key(c)))
        .collect();
    let mut order = Vec::with_capacity(g.courses.len());
    while let Some(Reverse((_, _, _, c))) = heap.pop() {
        order.push(c);
        for s in &succ[c as usize] {
            indeg[*s as usize] -= 1;
            if indeg[*s as usize] == 0 {
                heap.push(Reverse(key(*s)));
            }
        }
    }
    if order.len() < g.courses.len() {
        let cycle = find_cycle(&succ, &indeg);
        return Err(ScheduleError::Cycle(
            cycle
                .into_iter()
                .map(|c| course_label(g, skel, c))
                .collect(),
        ));
    }
    Ok(CourseSchedule::from_order(order, components(&succ)))
}

/// Walks backwards along unscheduled courses until one repeats.
fn find_cycle(succ: &[BTreeSet<CourseId>], indeg: &[u32]) -> Vec<CourseId> {
    let mut pred: Vec<Option<CourseId>> = vec![None; succ.len()];
    for (a, s) in succ.iter().enumerate() {
        if indeg[a] == 0 {
            continue;
        }
        for b in s {
            if indeg[*b as usize] > 0 {
                pred[*b as usize] = Some(a as CourseId);
            }
        }
    }
    let Some(mut cur) = (0..succ.len()).find(|c| indeg[*c] > 0 && pred[*c].is_some()) else {
        return Vec::new();
    };
    let mut seen = vec![false; succ.len()];
    while !seen[cur] {
        seen[cur] = true;
        cur = pred[cur].expect("every remaining course has a remaining predecessor") as usize;
    }
    let mut cycle = vec![cur as CourseId];
    let mut x = pred[cur].unwrap();
    while x as usize != cur {
        cycle.push(x);
        x = pred[x as usize].unwrap();
    }
    cycle.reverse();
    let min = (0..cycle.len()).min_by_key(|k| cycle[*k]).unwrap_or(0);
    cycle.rotate_left(min);
    cycle
}

#[cfg(test)]
mod tests;
