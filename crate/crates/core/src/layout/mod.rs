//! Needle bed layout: fixed per-node groups placed by stress descent, gauge
//! mapping, and the time-needle bed.

mod bed;
mod optimize;

use std::collections::BTreeMap;

use thiserror::Error;

pub use bed::{build_bed, compact_bed, spread_continuity, BedStep, TimeNeedleBed};
pub use optimize::{brute_force_stress, optimize_layout, Optimization};

use crate::schedule::CourseSchedule;
use crate::shapegen::{CourseId, Side, StitchGraph, StitchId};
use crate::skeleton::{Gauge, NodeId, ResolvedSkeleton};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("node {node}: course needs {needles} needles but the bed has {bed}")]
    CourseTooWide {
        node: String,
        needles: u32,
        bed: u32,
    },
    #[error("layout needs {needles} needles but the bed has {bed}")]
    BedOverflow { needles: u32, bed: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeedleAddress {
    pub side: Side,
    pub needle: u32,
}

impl std::fmt::Display for NeedleAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.side.letter(), self.needle)
    }
}

/// Needle of logical wale `x` within a frame: full gauge keeps `x` on both
/// beds, half gauge interleaves front `2x` and back `2x + 1`.
pub fn map_gauge(gauge: Gauge, x: i32, side: Side) -> i32 {
    match (gauge, side) {
        (Gauge::Full, _) => x,
        (Gauge::Half, Side::Front) => 2 * x,
        (Gauge::Half, Side::Back) => 2 * x + 1,
    }
}

/// Time a stitch's loop sits on its needle: from its own step until the
/// step of its first child. Loops without children are cast off after the
/// next step's transfers, so they hold their needle for two steps.
pub(crate) fn live_interval(g: &StitchGraph, schedule: &CourseSchedule, s: StitchId) -> (u32, u32) {
    let st = g.stitch(s);
    let t0 = schedule.time[st.course as usize];
    let t1 = st
        .children
        .iter()
        .map(|c| schedule.time[g.stitch(*c).course as usize])
        .min()
        .unwrap_or(t0 + 2);
    (t0, t1.max(t0 + 1))
}

/// Occupied cell of a group, relative to its offset: `(side, needle)` and
/// merged live intervals.
pub(crate) type Cells = Vec<((Side, i32), Vec<(u32, u32)>)>;

/// Courses of one node with their fixed internal addresses.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutGroup {
    pub node: NodeId,
    pub courses: Vec<CourseId>,
    /// Member stitches with their logical wale and side in the node frame.
    pub members: Vec<(StitchId, i32, Side)>,
    /// Logical frame width.
    pub width: i32,
    pub gauge: Gauge,
    pub offset: i32,
    pub flipped: bool,
    /// Occupancy per flip state.
    pub(crate) cells: [Cells; 2],
    /// First and last step holding a loop of this group.
    pub(crate) span_time: (u32, u32),
}

impl LayoutGroup {
    /// Needles covered by the frame.
    pub fn span(&self) -> i32 {
        match self.gauge {
            Gauge::Full => self.width,
            Gauge::Half => 2 * self.width,
        }
    }

    /// Needle relative to the offset for a logical position.
    pub fn relative(&self, x: i32, side: Side, flipped: bool) -> (Side, i32) {
        if flipped {
            let side = side.opposite();
            (side, map_gauge(self.gauge, self.width - 1 - x, side))
        } else {
            (side, map_gauge(self.gauge, x, side))
        }
    }

    pub fn address(&self, x: i32, side: Side) -> (Side, i32) {
        let (side, n) = self.relative(x, side, self.flipped);
        (side, n + self.offset)
    }
}

/// One group per node holding every course of the node, continuity courses
/// included. Internal addresses are the node-frame positions.
pub fn build_groups(
    g: &StitchGraph,
    skel: &ResolvedSkeleton,
    schedule: &CourseSchedule,
    bed_width: u32,
) -> Result<Vec<LayoutGroup>, LayoutError> {
    let mut by_node: BTreeMap<NodeId, Vec<CourseId>> = BTreeMap::new();
    for &c in &schedule.order {
        by_node.entry(g.course(c).node).or_default().push(c);
    }
    let mut groups = Vec::new();
    for (node, courses) in by_node {
        let gauge = skel.node(node).gauge;
        let mut members = Vec::new();
        let mut width = 0;
        for &c in &courses {
            for &s in &g.course(c).stitches {
                let st = g.stitch(s);
                members.push((s, st.x, st.side));
                if !st.is_continuity() {
                    width = width.max(st.x + 1);
                }
            }
        }
        let mut group = LayoutGroup {
            node,
            courses,
            members,
            width,
            gauge,
            offset: 0,
            flipped: false,
            cells: [Vec::new(), Vec::new()],
            span_time: (u32::MAX, 0),
        };
        if group.span() as u32 > bed_width {
            return Err(LayoutError::CourseTooWide {
                node: skel.node(node).name.clone(),
                needles: group.span() as u32,
                bed: bed_width,
            });
        }
        for flip in [false, true] {
            let mut cells: BTreeMap<(Side, i32), Vec<(u32, u32)>> = BTreeMap::new();
            for &(s, x, side) in &group.members {
                if g.stitch(s).is_continuity() {
                    continue;
                }
                let iv = live_interval(g, schedule, s);
                group.span_time = (group.span_time.0.min(iv.0), group.span_time.1.max(iv.1));
                cells
                    .entry(group.relative(x, side, flip))
                    .or_default()
                    .push(iv);
            }
            group.cells[flip as usize] = cells
                .into_iter()
                .map(|(k, v)| (k, merge_intervals(v)))
                .collect();
        }
        groups.push(group);
    }
    Ok(groups)
}

fn merge_intervals(mut v: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    v.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}
