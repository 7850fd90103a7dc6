use std::collections::{BTreeMap, HashMap};

use super::{Instr, Loc};
use crate::shapegen::StitchId;

/// A loop on the machine: the stitch that made it and a slot (0 for the
/// stitch's own loop, 1 for the old loops kept by a split).
pub type Token = (StitchId, u8);

/// Loop stacks per needle and slider, plus the current racking.
#[derive(Debug, Clone, Default)]
pub struct MachineState {
    stacks: BTreeMap<Loc, Vec<Token>>,
    at: HashMap<Token, Loc>,
    pub racking: i32,
}

impl MachineState {
    pub fn stack(&self, loc: Loc) -> &[Token] {
        self.stacks.get(&loc).map_or(&[], |v| v.as_slice())
    }

    pub fn is_empty_at(&self, loc: Loc) -> bool {
        self.stack(loc).is_empty()
    }

    pub fn find(&self, t: Token) -> Option<Loc> {
        self.at.get(&t).copied()
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Loc, &[Token])> {
        self.stacks
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(l, v)| (*l, v.as_slice()))
    }

    pub fn loop_count(&self) -> usize {
        self.stacks.values().map(Vec::len).sum()
    }

    fn take(&mut self, loc: Loc) -> Vec<Token> {
        let v = self.stacks.remove(&loc).unwrap_or_default();
        for t in &v {
            self.at.remove(t);
        }
        v
    }

    fn put(&mut self, loc: Loc, tokens: impl IntoIterator<Item = Token>) {
        let stack = self.stacks.entry(loc).or_default();
        for t in tokens {
            stack.push(t);
            self.at.insert(t, loc);
        }
    }

    /// Applies an instruction; `owner` is the stitch a new loop belongs to.
    /// Returns the loops knitted off or dropped.
    pub fn apply(&mut self, instr: &Instr, owner: Option<StitchId>) -> Vec<Token> {
        let fresh = |slot| (owner.unwrap_or(StitchId::MAX), slot);
        match *instr {
            Instr::In(_) | Instr::Out(_) | Instr::Miss { .. } => Vec::new(),
            Instr::Rack(r) => {
                self.racking = r;
                Vec::new()
            }
            Instr::Knit { loc, .. } => {
                let old = self.take(loc);
                self.put(loc, [fresh(0)]);
                old
            }
            Instr::Tuck { loc, .. } => {
                self.put(loc, [fresh(0)]);
                Vec::new()
            }
            Instr::Split { from, to, .. } => {
                let old = self.take(from);
                let n = old.len();
                self.put(to, std::iter::repeat_n(fresh(1), n));
                self.put(from, [fresh(0)]);
                Vec::new()
            }
            Instr::Xfer { from, to } => {
                let moved = self.take(from);
                self.put(to, moved);
                Vec::new()
            }
            Instr::Drop(loc) => self.take(loc),
        }
    }
}
