use std::collections::{BTreeSet, HashSet};

use super::route::Emitter;
use super::state::MachineState;
use super::{BedPass, Dir, Entry, Instr, Loc, MachineError, NeedleAction, PassKind, Program};
use crate::constants::MachineConstants;
use crate::layout::TimeNeedleBed;
use crate::pattern::PatternOp;
use crate::schedule::{CourseSchedule, YarnTrace};
use crate::shapegen::{StitchGraph, StitchId};

struct Interp<'a> {
    g: &'a StitchGraph,
    bed: &'a TimeNeedleBed,
    consts: &'a MachineConstants,
    /// Carrier and position along its path, per stitch.
    path: Vec<Option<(u32, usize)>>,
    state: MachineState,
    split: HashSet<StitchId>,
    carriers_in: BTreeSet<u32>,
    program: Program,
}

fn directions(needles: &[i32]) -> Vec<Dir> {
    (0..needles.len())
        .map(|i| {
            if i + 1 < needles.len() {
                Dir::toward(needles[i], needles[i + 1])
            } else if i > 0 {
                Dir::toward(needles[i - 1], needles[i])
            } else {
                Dir::Plus
            }
        })
        .collect()
}

impl<'a> Interp<'a> {
    /// Where a stitch is formed: its address, across the bed for purls.
    fn act(&self, s: StitchId) -> Loc {
        let a = self.bed.address(s);
        let loc = Loc::needle(a.side, a.needle as i32);
        if self.g.stitch(s).op == PatternOp::Purl {
            loc.across()
        } else {
            loc
        }
    }

    fn carrier(&self, s: StitchId) -> u32 {
        self.path[s as usize].map_or(1, |(c, _)| c)
    }

    /// Stitches of a course in yarn order.
    fn yarn_order(&self, stitches: &[StitchId]) -> Vec<StitchId> {
        let mut v = stitches.to_vec();
        v.sort_by_key(|s| (self.path[*s as usize], *s));
        v
    }

    /// Slot of `p`'s loops that `child` consumes.
    fn slot(&self, p: StitchId, child: StitchId) -> u8 {
        let kids = &self.g.stitch(p).children;
        u8::from(self.split.contains(&p) && kids.len() == 2 && kids[1] == child)
    }

    fn yarn(&mut self, em: &mut Emitter, entry: Entry) {
        let carrier = match entry.instr {
            Instr::Knit { carrier, .. }
            | Instr::Tuck { carrier, .. }
            | Instr::Miss { carrier, .. }
            | Instr::Split { carrier, .. } => carrier,
            _ => unreachable!("only yarn instructions need a carrier"),
        };
        if self.carriers_in.insert(carrier) {
            em.emit(Entry::plain(Instr::In(carrier)));
        }
        em.emit(entry);
    }

    fn push(&mut self, kind: PassKind, step: u32, entries: Vec<Entry>) {
        if !entries.is_empty() {
            self.program.passes.push(BedPass {
                kind,
                step,
                entries,
            });
        }
    }

    fn cast_on(&mut self, step: u32, stitches: &[StitchId]) {
        let cast: Vec<StitchId> = stitches
            .iter()
            .copied()
            .filter(|s| {
                let st = self.g.stitch(*s);
                !st.is_continuity() && st.op != PatternOp::Miss && st.parents.is_empty()
            })
            .collect();
        if cast.is_empty() {
            return;
        }
        let mut state = std::mem::take(&mut self.state);
        let mut em = Emitter::new(&mut state);
        let evens: Vec<StitchId> = cast.iter().copied().step_by(2).collect();
        let odds: Vec<StitchId> = cast.iter().copied().skip(1).step_by(2).rev().collect();
        for half in [evens, odds] {
            let needles: Vec<i32> = half.iter().map(|s| self.act(*s).needle).collect();
            for (s, dir) in half.iter().zip(directions(&needles)) {
                let instr = Instr::Tuck {
                    dir,
                    loc: self.act(*s),
                    carrier: self.carrier(*s),
                };
                self.yarn(
                    &mut em,
                    Entry {
                        instr,
                        stitch: Some(*s),
                        action: Some(NeedleAction::Tuck),
                    },
                );
            }
        }
        let entries = em.entries;
        self.state = state;
        self.push(PassKind::CastOn, step, entries);
    }

    fn actions(&mut self, step: u32, stitches: &[StitchId]) {
        let mut state = std::mem::take(&mut self.state);
        let mut em = Emitter::new(&mut state);
        let needles: Vec<i32> = stitches.iter().map(|s| self.act(*s).needle).collect();
        let dirs = directions(&needles);
        for (k, (&s, dir)) in stitches.iter().zip(dirs).enumerate() {
            let st = self.g.stitch(s);
            let loc = self.act(s);
            let carrier = self.carrier(s);
            let empty = em.state.is_empty_at(loc);
            let (instr, action) = if st.is_continuity() || st.op == PatternOp::Tuck || empty {
                (Instr::Tuck { dir, loc, carrier }, NeedleAction::Tuck)
            } else if st.op == PatternOp::Miss {
                (Instr::Miss { dir, loc, carrier }, NeedleAction::Miss)
            } else if st.children.len() == 2 && em.state.is_empty_at(loc.across()) {
                self.split.insert(s);
                (
                    Instr::Split {
                        dir,
                        from: loc,
                        to: loc.across(),
                        carrier,
                    },
                    NeedleAction::SplitKnit,
                )
            } else if st.op == PatternOp::Purl {
                (Instr::Knit { dir, loc, carrier }, NeedleAction::Purl)
            } else if self.consts.kickback
                && stitches
                    .get(k + 1)
                    .is_some_and(|n| self.g.stitch(*n).children.len() == 2)
            {
                (
                    Instr::Knit { dir, loc, carrier },
                    NeedleAction::KickbackKnit,
                )
            } else {
                (Instr::Knit { dir, loc, carrier }, NeedleAction::Knit)
            };
            if st.op == PatternOp::Miss && empty {
                continue;
            }
            self.yarn(
                &mut em,
                Entry {
                    instr,
                    stitch: Some(s),
                    action: Some(action),
                },
            );
        }
        let entries = em.entries;
        self.state = state;
        self.push(PassKind::Actions, step, entries);
    }

    /// Brings every loop consumed by the next course onto its needle.
    fn transfers(&mut self, step: u32, next: &[StitchId]) -> Result<(), MachineError> {
        let mut moves: Vec<(u8, Loc, Loc, Option<StitchId>)> = Vec::new();
        let mut sources = HashSet::new();
        for &c in next {
            let dest = self.act(c);
            for &p in &self.g.stitch(c).parents {
                let Some(at) = self.state.find((p, self.slot(p, c))) else {
                    continue;
                };
                if at != dest && sources.insert(at) {
                    let rank = match self.g.stitch(p).op {
                        PatternOp::Cross { over: false, .. } => 1,
                        PatternOp::Cross { over: true, .. } => 2,
                        _ => 0,
                    };
                    moves.push((rank, at, dest, Some(p)));
                }
            }
        }
        if moves.is_empty() {
            return Ok(());
        }
        moves.sort_by_key(|m| m.0);
        let list: Vec<(Loc, Loc, Option<StitchId>)> =
            moves.into_iter().map(|(_, a, b, s)| (a, b, s)).collect();
        let mut state = std::mem::take(&mut self.state);
        let mut em = Emitter::new(&mut state);
        let r = em.transfer(&list, self.consts.racking_bound);
        let entries = em.entries;
        self.state = state;
        r?;
        self.push(PassKind::Transfers, step, entries);
        Ok(())
    }

    /// Chain bind-off of loops without children, and removal of continuity
    /// tucks left alone on their needle.
    fn cast_off(&mut self, step: u32, stitches: &[StitchId]) -> Result<(), MachineError> {
        let offs: Vec<StitchId> = stitches
            .iter()
            .copied()
            .filter(|s| {
                let st = self.g.stitch(*s);
                !st.is_continuity() && st.op != PatternOp::Miss && st.children.is_empty()
            })
            .filter(|s| self.state.find((*s, 0)).is_some())
            .collect();
        let mut state = std::mem::take(&mut self.state);
        let mut em = Emitter::new(&mut state);
        let mut result = Ok(());
        for w in offs.windows(2) {
            let (Some(la), Some(lb)) = (em.state.find((w[0], 0)), em.state.find((w[1], 0))) else {
                continue;
            };
            if let Err(e) = em.transfer(&[(la, lb, Some(w[0]))], self.consts.racking_bound) {
                result = Err(e);
                break;
            }
            let instr = Instr::Knit {
                dir: Dir::toward(la.needle, lb.needle),
                loc: lb,
                carrier: self.carrier(w[1]),
            };
            self.yarn(
                &mut em,
                Entry {
                    instr,
                    stitch: Some(w[1]),
                    action: Some(NeedleAction::Knit),
                },
            );
        }
        if let Some(loc) = offs.last().and_then(|s| em.state.find((*s, 0))) {
            em.emit(Entry {
                instr: Instr::Drop(loc),
                stitch: offs.last().copied(),
                action: None,
            });
        }
        for &s in stitches
            .iter()
            .filter(|s| self.g.stitch(**s).is_continuity())
        {
            let Some(loc) = em.state.find((s, 0)) else {
                continue;
            };
            if em.state.stack(loc).iter().all(|(o, _)| {
                self.g
                    .stitches
                    .get(*o as usize)
                    .is_some_and(|t| t.is_continuity())
            }) {
                em.emit(Entry {
                    instr: Instr::Drop(loc),
                    stitch: Some(s),
                    action: None,
                });
            }
        }
        let entries = em.entries;
        self.state = state;
        self.push(PassKind::CastOff, step, entries);
        result
    }

    fn finish(&mut self, step: u32) {
        let mut state = std::mem::take(&mut self.state);
        let mut em = Emitter::new(&mut state);
        let left: Vec<Loc> = em.state.occupied().map(|(l, _)| l).collect();
        for loc in left {
            em.emit(Entry::plain(Instr::Drop(loc)));
        }
        for c in self.carriers_in.clone() {
            em.emit(Entry::plain(Instr::Out(c)));
        }
        let entries = em.entries;
        self.state = state;
        match self.program.passes.last_mut() {
            Some(p) if p.kind == PassKind::CastOff && p.step == step => p.entries.extend(entries),
            _ => self.push(PassKind::CastOff, step, entries),
        }
    }
}

/// Turns the laid-out, traced graph into per-step bed passes.
pub fn interpret(
    g: &StitchGraph,
    schedule: &CourseSchedule,
    trace: &YarnTrace,
    bed: &TimeNeedleBed,
    consts: &MachineConstants,
) -> Result<Program, MachineError> {
    let mut path = vec![None; g.stitches.len()];
    for (c, p) in trace.carriers.iter().enumerate() {
        for (i, s) in p.iter().enumerate() {
            path[*s as usize] = Some((c as u32 + 1, i));
        }
    }
    let mut it = Interp {
        g,
        bed,
        consts,
        path,
        state: MachineState::default(),
        split: HashSet::new(),
        carriers_in: BTreeSet::new(),
        program: Program {
            carriers: (1..=trace.carriers.len().max(1) as u32).collect(),
            passes: Vec::new(),
        },
    };
    let courses: Vec<Vec<StitchId>> = schedule
        .order
        .iter()
        .map(|c| it.yarn_order(&g.course(*c).stitches))
        .collect();
    for (t, stitches) in courses.iter().enumerate() {
        let step = t as u32;
        it.cast_on(step, stitches);
        it.actions(step, stitches);
        if let Some(next) = courses.get(t + 1) {
            it.transfers(step, next)?;
        }
        it.cast_off(step, stitches)?;
    }
    it.finish(courses.len().saturating_sub(1) as u32);
    Ok(it.program)
}
