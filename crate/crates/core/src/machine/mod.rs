//! Machine passes: interpretation of the laid-out graph, simulation,
//! instruction text, and an independent replay check of that text.

mod codegen;
mod interpret;
mod replay;
mod route;
mod simulate;
mod state;

use std::fmt;

use thiserror::Error;

pub use codegen::generate_code;
pub use interpret::interpret;
pub use replay::{replay_validate, ReplayReport, Violation};
pub use simulate::simulate;
pub use state::{MachineState, Token};

use crate::shapegen::{Side, StitchId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("no transfer route from {from} to {to} within racking {bound}")]
    Route { from: Loc, to: Loc, bound: i32 },
    #[error("{0} error diagnostics in strict mode")]
    Strict(usize),
}

/// A needle or slider position on one bed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc {
    pub side: Side,
    pub slider: bool,
    pub needle: i32,
}

impl Loc {
    pub fn needle(side: Side, needle: i32) -> Self {
        Loc {
            side,
            slider: false,
            needle,
        }
    }

    pub fn slider(side: Side, needle: i32) -> Self {
        Loc {
            side,
            slider: true,
            needle,
        }
    }

    /// The needle straight across on the other bed.
    pub fn across(self) -> Self {
        Loc {
            side: self.side.opposite(),
            ..self
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.slider { "s" } else { "" };
        write!(f, "{}{}{}", self.side.letter(), s, self.needle)
    }
}

/// Racking that aligns `a` and `b` across the beds: front index minus back index.
pub(crate) fn racking_between(a: Loc, b: Loc) -> i32 {
    match a.side {
        Side::Front => a.needle - b.needle,
        Side::Back => b.needle - a.needle,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Plus,
    Minus,
}

impl Dir {
    pub fn symbol(self) -> char {
        match self {
            Dir::Plus => '+',
            Dir::Minus => '-',
        }
    }

    pub fn toward(from: i32, to: i32) -> Dir {
        if to < from {
            Dir::Minus
        } else {
            Dir::Plus
        }
    }
}

/// One machine instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    In(u32),
    Out(u32),
    Rack(i32),
    Knit {
        dir: Dir,
        loc: Loc,
        carrier: u32,
    },
    Tuck {
        dir: Dir,
        loc: Loc,
        carrier: u32,
    },
    Miss {
        dir: Dir,
        loc: Loc,
        carrier: u32,
    },
    /// Knit at `from`, handing the old loops to `to` instead of dropping them.
    Split {
        dir: Dir,
        from: Loc,
        to: Loc,
        carrier: u32,
    },
    Xfer {
        from: Loc,
        to: Loc,
    },
    Drop(Loc),
}

/// What a needle does for a stitch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeedleAction {
    Knit,
    /// Knit on the opposite bed.
    Purl,
    Tuck,
    Miss,
    /// Named by the action set; not produced.
    KnitFrontBack,
    /// Knit next to an imminent increase; only with the `kickback` constant.
    KickbackKnit,
    /// Increase: a new loop plus the old loops kept on the opposite needle.
    SplitKnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PassKind {
    CastOn,
    Actions,
    Transfers,
    CastOff,
}

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::CastOn => "caston",
            PassKind::Actions => "actions",
            PassKind::Transfers => "transfers",
            PassKind::CastOff => "castoff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub instr: Instr,
    /// Stitch the instruction serves, if any.
    pub stitch: Option<StitchId>,
    pub action: Option<NeedleAction>,
}

impl Entry {
    pub fn plain(instr: Instr) -> Self {
        Entry {
            instr,
            stitch: None,
            action: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BedPass {
    pub kind: PassKind,
    pub step: u32,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub carriers: Vec<u32>,
    pub passes: Vec<BedPass>,
}

impl Program {
    pub fn instructions(&self) -> impl Iterator<Item = &Entry> {
        self.passes.iter().flat_map(|p| &p.entries)
    }
}

#[cfg(test)]
mod tests;
