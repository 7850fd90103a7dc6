use super::state::MachineState;
use super::{racking_between, Entry, Instr, Loc, MachineError};
use crate::shapegen::StitchId;

const MAX_HOPS: usize = 10_000;

/// Emits instructions into a pass while keeping the machine state current.
pub(crate) struct Emitter<'a> {
    pub state: &'a mut MachineState,
    pub entries: Vec<Entry>,
}

impl<'a> Emitter<'a> {
    pub fn new(state: &'a mut MachineState) -> Self {
        Emitter {
            state,
            entries: Vec::new(),
        }
    }

    pub fn emit(&mut self, entry: Entry) {
        self.state.apply(&entry.instr, entry.stitch);
        self.entries.push(entry);
    }

    pub fn rack(&mut self, r: i32) {
        if self.state.racking != r {
            self.emit(Entry::plain(Instr::Rack(r)));
        }
    }

    fn xfer(&mut self, from: Loc, to: Loc, stitch: Option<StitchId>) {
        self.rack(racking_between(from, to));
        self.emit(Entry {
            instr: Instr::Xfer { from, to },
            stitch,
            action: None,
        });
    }

    /// Moves whole loop stacks between needles. A stack leaves only after
    /// the stack sitting on its target has left; stacks that wait on each
    /// other in a cycle are parked on the slider across first. Each stack
    /// hops between sliders of the two beds, at most `bound` needles per
    /// racking, until it can drop onto its target.
    pub fn transfer(
        &mut self,
        moves: &[(Loc, Loc, Option<StitchId>)],
        bound: i32,
    ) -> Result<(), MachineError> {
        // (current position, target, stitch, parked)
        let mut pending: Vec<(Loc, Loc, Option<StitchId>, bool)> = moves
            .iter()
            .map(|&(from, to, s)| (from, to, s, false))
            .collect();
        while !pending.is_empty() {
            let blocked = |k: usize, p: &[(Loc, Loc, Option<StitchId>, bool)]| {
                p.iter()
                    .enumerate()
                    .any(|(j, m)| j != k && !m.3 && m.0 == p[k].1)
            };
            match (0..pending.len()).find(|k| !blocked(*k, &pending)) {
                Some(k) => {
                    let (at, to, stitch, _) = pending.remove(k);
                    self.route(at, to, stitch, bound)?;
                }
                None => {
                    let m = &mut pending[0];
                    let park = Loc::slider(m.0.side.opposite(), m.0.needle);
                    let (from, stitch) = (m.0, m.2);
                    m.0 = park;
                    m.3 = true;
                    self.xfer(from, park, stitch);
                }
            }
        }
        self.rack(0);
        Ok(())
    }

    fn route(
        &mut self,
        start: Loc,
        to: Loc,
        stitch: Option<StitchId>,
        bound: i32,
    ) -> Result<(), MachineError> {
        let mut pos = start;
        let mut visited = vec![start];
        for _ in 0..MAX_HOPS {
            if pos.side != to.side && (pos.needle - to.needle).abs() <= bound {
                self.xfer(pos, to, stitch);
                return Ok(());
            }
            let other = pos.side.opposite();
            let next = (pos.needle - bound..=pos.needle + bound)
                .map(|k| Loc::slider(other, k))
                .filter(|l| self.state.is_empty_at(*l) && !visited.contains(l))
                .min_by_key(|l| ((l.needle - to.needle).abs(), l.needle));
            let Some(next) = next else { break };
            self.xfer(pos, next, stitch);
            visited.push(next);
            pos = next;
        }
        Err(MachineError::Route {
            from: start,
            to,
            bound,
        })
    }
}
