use serde::Serialize;

use crate::pattern::PatternOp;
use crate::skeleton::{InterfaceId, NodeId};

pub type StitchId = u32;
pub type CourseId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Front,
    Back,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Front => Side::Back,
            Side::Back => Side::Front,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Side::Front => 'f',
            Side::Back => 'b',
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StitchFlags(u8);

impl StitchFlags {
    pub const INCREASE: StitchFlags = StitchFlags(1);
    pub const DECREASE: StitchFlags = StitchFlags(2);
    pub const SHORT_ROW: StitchFlags = StitchFlags(4);
    pub const INTERFACE: StitchFlags = StitchFlags(8);
    pub const CONTINUITY: StitchFlags = StitchFlags(16);
    pub const CASCADE: StitchFlags = StitchFlags(32);

    pub fn contains(self, other: StitchFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: StitchFlags) {
        self.0 |= other.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stitch {
    pub id: StitchId,
    pub node: NodeId,
    pub course: CourseId,
    /// Position within the course's lateral order.
    pub index: u32,
    /// Node-local row, bottom to top; closing cascades extend past the node.
    pub row: i32,
    /// Node-local lateral position.
    pub x: i32,
    pub side: Side,
    pub prev: Option<StitchId>,
    pub next: Option<StitchId>,
    pub parents: Vec<StitchId>,
    pub children: Vec<StitchId>,
    pub op: PatternOp,
    pub flags: StitchFlags,
}

impl Stitch {
    pub fn is_continuity(&self) -> bool {
        self.flags.contains(StitchFlags::CONTINUITY)
    }

    /// Regular stitches can carry moves and crosses.
    pub fn is_regular(&self) -> bool {
        !self.flags.contains(StitchFlags::INCREASE) && !self.flags.contains(StitchFlags::DECREASE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CourseKind {
    Regular,
    ShortRow,
    Split,
    Cascade,
    Continuity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Course {
    pub id: CourseId,
    pub node: NodeId,
    pub stitches: Vec<StitchId>,
    pub circular: bool,
    pub interface: Option<InterfaceId>,
    pub kind: CourseKind,
    /// Position of the course within its node's knitting order.
    pub seq: u32,
}

/// Stitch units with course and wale connectivity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StitchGraph {
    pub stitches: Vec<Stitch>,
    pub courses: Vec<Course>,
}

impl StitchGraph {
    pub fn stitch(&self, id: StitchId) -> &Stitch {
        &self.stitches[id as usize]
    }

    pub fn stitch_mut(&mut self, id: StitchId) -> &mut Stitch {
        &mut self.stitches[id as usize]
    }

    pub fn course(&self, id: CourseId) -> &Course {
        &self.courses[id as usize]
    }

    /// Number of design stitches (continuity stitches excluded).
    pub fn design_stitch_count(&self) -> usize {
        self.stitches.iter().filter(|s| !s.is_continuity()).count()
    }

    pub fn add_course(
        &mut self,
        node: NodeId,
        kind: CourseKind,
        circular: bool,
        seq: u32,
        positions: &[(i32, Side)],
        row: i32,
    ) -> CourseId {
        let course = self.courses.len() as CourseId;
        let mut ids = Vec::with_capacity(positions.len());
        for (k, (x, side)) in positions.iter().enumerate() {
            let id = self.stitches.len() as StitchId;
            let mut flags = StitchFlags::default();
            if kind == CourseKind::ShortRow {
                flags.insert(StitchFlags::SHORT_ROW);
            }
            if kind == CourseKind::Cascade {
                flags.insert(StitchFlags::CASCADE);
            }
            if kind == CourseKind::Continuity {
                flags.insert(StitchFlags::CONTINUITY);
            }
            self.stitches.push(Stitch {
                id,
                node,
                course,
                index: k as u32,
                row,
                x: *x,
                side: *side,
                prev: None,
                next: None,
                parents: Vec::new(),
                children: Vec::new(),
                op: if kind == CourseKind::Continuity {
                    PatternOp::Tuck
                } else {
                    PatternOp::Knit
                },
                flags,
            });
            ids.push(id);
        }
        self.courses.push(Course {
            id: course,
            node,
            stitches: ids,
            circular,
            interface: None,
            kind,
            seq,
        });
        course
    }

    pub fn link(&mut self, parent: StitchId, child: StitchId) {
        self.stitches[parent as usize].children.push(child);
        self.stitches[child as usize].parents.push(parent);
    }

    /// Sets increase/decrease flags from wale degrees.
    pub fn refresh_flags(&mut self) {
        for s in &mut self.stitches {
            if s.children.len() > 1 {
                s.flags.insert(StitchFlags::INCREASE);
            }
            if s.parents.len() > 1 {
                s.flags.insert(StitchFlags::DECREASE);
            }
        }
    }

    /// Wale links as `(parent, child)` pairs in parent order.
    pub fn wale_links(&self) -> impl Iterator<Item = (StitchId, StitchId)> + '_ {
        self.stitches
            .iter()
            .flat_map(|s| s.children.iter().map(move |c| (s.id, *c)))
    }
}
