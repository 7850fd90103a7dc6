use super::{live_interval, LayoutGroup, NeedleAddress};
use crate::schedule::{CourseSchedule, YarnTrace};
use crate::shapegen::{CourseId, CourseKind, StitchGraph, StitchId};

/// One row of the time-needle bed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BedStep {
    /// Courses knitted in this step; more than one only after compaction.
    pub courses: Vec<CourseId>,
    /// Stitches formed in this step, in course order.
    pub active: Vec<(NeedleAddress, StitchId)>,
    /// Earlier loops still waiting on their needles.
    pub suspended: Vec<(NeedleAddress, StitchId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeNeedleBed {
    pub width: u32,
    pub steps: Vec<BedStep>,
    /// Needle of every stitch, indexed by stitch id.
    pub address: Vec<Option<NeedleAddress>>,
}

impl TimeNeedleBed {
    pub fn address(&self, s: StitchId) -> NeedleAddress {
        self.address[s as usize].expect("every scheduled stitch has an address")
    }
}

/// Places every stitch of the laid-out groups on the bed and lists, per
/// scheduled course, the formed and the suspended loops.
pub fn build_bed(
    g: &StitchGraph,
    schedule: &CourseSchedule,
    groups: &[LayoutGroup],
    bed_width: u32,
) -> TimeNeedleBed {
    let mut address = vec![None; g.stitches.len()];
    for grp in groups {
        for &(s, x, side) in &grp.members {
            let (side, n) = grp.address(x, side);
            let needle = n.clamp(0, bed_width as i32 - 1) as u32;
            address[s as usize] = Some(NeedleAddress { side, needle });
        }
    }
    let mut steps: Vec<BedStep> = schedule
        .order
        .iter()
        .map(|&c| BedStep {
            courses: vec![c],
            active: g
                .course(c)
                .stitches
                .iter()
                .filter_map(|s| Some((address[*s as usize]?, *s)))
                .collect(),
            suspended: Vec::new(),
        })
        .collect();
    let n = steps.len();
    for st in g.stitches.iter().filter(|s| !s.is_continuity()) {
        let Some(a) = address[st.id as usize] else {
            continue;
        };
        let (t0, t1) = live_interval(g, schedule, st.id);
        for step in &mut steps[(t0 as usize + 1).min(n)..(t1 as usize).min(n)] {
            step.suspended.push((a, st.id));
        }
    }
    for step in &mut steps {
        step.suspended.sort_unstable();
    }
    TimeNeedleBed {
        width: bed_width,
        steps,
        address,
    }
}

/// Re-spaces every run of continuity tucks evenly between the needles of
/// the design stitches around it on the yarn path, once those are final.
pub fn spread_continuity(bed: &mut TimeNeedleBed, g: &StitchGraph, trace: &YarnTrace) {
    for path in &trace.carriers {
        let mut i = 0;
        while i < path.len() {
            if !g.stitch(path[i]).is_continuity() {
                i += 1;
                continue;
            }
            let start = i;
            while i < path.len() && g.stitch(path[i]).is_continuity() {
                i += 1;
            }
            let (Some(prev), Some(&next)) = (start.checked_sub(1).map(|k| path[k]), path.get(i))
            else {
                continue;
            };
            let (Some(a), Some(b)) = (bed.address[prev as usize], bed.address[next as usize])
            else {
                continue;
            };
            let m = (i - start) as i64;
            let (a, b) = (a.needle as i64, b.needle as i64);
            for (k, &s) in path[start..i].iter().enumerate() {
                let k = k as i64 + 1;
                let needle = a + ((b - a) * k + (m + 1) / 2 * (b - a).signum()) / (m + 1);
                if let Some(addr) = bed.address[s as usize].as_mut() {
                    addr.needle = needle as u32;
                }
            }
        }
    }
    let address = &bed.address;
    for step in &mut bed.steps {
        for (a, s) in &mut step.active {
            *a = address[*s as usize].expect("placed");
        }
    }
}

/// Folds steps that form no design stitch (yarn continuity tucks only) into
/// the following step, or the preceding one at the end. For display only.
pub fn compact_bed(bed: &TimeNeedleBed, g: &StitchGraph) -> TimeNeedleBed {
    let transit = |s: &BedStep| {
        s.courses
            .iter()
            .all(|c| g.course(*c).kind == CourseKind::Continuity)
    };
    let mut steps: Vec<BedStep> = Vec::with_capacity(bed.steps.len());
    let mut pending: Option<BedStep> = None;
    for step in &bed.steps {
        if transit(step) {
            match &mut pending {
                Some(p) => {
                    p.courses.extend(&step.courses);
                    p.active.extend(&step.active);
                }
                None => pending = Some(step.clone()),
            }
            continue;
        }
        let mut step = step.clone();
        if let Some(p) = pending.take() {
            let mut courses = p.courses;
            courses.extend(step.courses);
            step.courses = courses;
            let mut active = p.active;
            active.extend(step.active);
            step.active = active;
        }
        steps.push(step);
    }
    if let Some(p) = pending {
        match steps.last_mut() {
            Some(last) => {
                last.courses.extend(p.courses);
                last.active.extend(p.active);
            }
            None => steps.push(p),
        }
    }
    TimeNeedleBed {
        width: bed.width,
        steps,
        address: bed.address.clone(),
    }
}
