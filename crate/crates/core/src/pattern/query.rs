use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};

use super::parser::{Grid, GridMode, Query, RangeSpec};
use crate::expr::{self, Env, Value};
use crate::shapegen::{Port, Side, StitchFlags, StitchGraph, StitchId};
use crate::skeleton::{Alignment, InterfaceId, NodeId, ResolvedShape, ResolvedSkeleton};

/// A set of stitches, stored as a membership mask over stitch ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    bits: Vec<bool>,
}

impl Selection {
    pub fn empty(n: usize) -> Self {
        Selection {
            bits: vec![false; n],
        }
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = StitchId>) -> Self {
        let mut s = Selection::empty(n);
        for id in ids {
            s.bits[id as usize] = true;
        }
        s
    }

    pub fn contains(&self, id: StitchId) -> bool {
        self.bits.get(id as usize).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, id: StitchId) {
        self.bits[id as usize] = true;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn ids(&self) -> impl Iterator<Item = StitchId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i as StitchId)
    }

    fn zip(&self, other: &Selection, f: impl Fn(bool, bool) -> bool) -> Selection {
        Selection {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Selection) -> Selection {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &Selection) -> Selection {
        self.zip(other, |a, b| a && b)
    }

    pub fn minus(&self, other: &Selection) -> Selection {
        self.zip(other, |a, b| a && !b)
    }
}

/// Grid embedding and lookups shared by all queries on one stitch graph.
pub struct PatternContext<'a> {
    pub graph: &'a StitchGraph,
    pub skel: &'a ResolvedSkeleton,
    pub ports: &'a BTreeMap<InterfaceId, Port>,
    pub base_dir: PathBuf,
    /// `(course, wale)` of every stitch in its node's grid.
    coords: Vec<(i64, i64)>,
    /// `(rows, wales)` per node.
    extents: Vec<(i64, i64)>,
    adjacency: Vec<Vec<StitchId>>,
}

impl<'a> PatternContext<'a> {
    pub fn new(
        graph: &'a StitchGraph,
        skel: &'a ResolvedSkeleton,
        ports: &'a BTreeMap<InterfaceId, Port>,
        base_dir: &Path,
    ) -> Self {
        let n_nodes = skel.nodes.len();
        let mut frame = vec![0i64; n_nodes];
        let mut rows = vec![0i64; n_nodes];
        let mut tubular = vec![false; n_nodes];
        for s in graph.stitches.iter().filter(|s| !s.is_continuity()) {
            let k = s.node.0 as usize;
            frame[k] = frame[k].max(s.x as i64 + 1);
            rows[k] = rows[k].max(s.row as i64 + 1);
            tubular[k] |= s.side == Side::Back;
        }
        let coords = graph
            .stitches
            .iter()
            .map(|s| {
                let f = frame[s.node.0 as usize];
                let w = match s.side {
                    Side::Front => s.x as i64,
                    Side::Back => 2 * f - 1 - s.x as i64,
                };
                (s.row as i64, w)
            })
            .collect();
        let extents = (0..n_nodes)
            .map(|k| (rows[k], if tubular[k] { 2 * frame[k] } else { frame[k] }))
            .collect();
        let mut adjacency = vec![Vec::new(); graph.stitches.len()];
        for c in &graph.courses {
            let n = c.stitches.len();
            for k in 0..n {
                let a = c.stitches[k];
                if k + 1 < n {
                    adjacency[a as usize].push(c.stitches[k + 1]);
                    adjacency[c.stitches[k + 1] as usize].push(a);
                } else if c.circular && n > 2 {
                    adjacency[a as usize].push(c.stitches[0]);
                    adjacency[c.stitches[0] as usize].push(a);
                }
            }
        }
        for (p, ch) in graph.wale_links() {
            adjacency[p as usize].push(ch);
            adjacency[ch as usize].push(p);
        }
        PatternContext {
            graph,
            skel,
            ports,
            base_dir: base_dir.to_path_buf(),
            coords,
            extents,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.graph.stitches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.stitches.is_empty()
    }

    pub fn coords(&self, s: StitchId) -> (i64, i64) {
        self.coords[s as usize]
    }

    pub fn extent(&self, node: NodeId) -> (i64, i64) {
        self.extents[node.0 as usize]
    }

    /// Design stitches of a node, or of the whole garment.
    pub fn domain(&self, node: Option<NodeId>) -> Selection {
        Selection {
            bits: self
                .graph
                .stitches
                .iter()
                .map(|s| !s.is_continuity() && node.is_none_or(|n| s.node == n))
                .collect(),
        }
    }

    fn matching(&self, domain: &Selection, f: impl Fn(StitchId) -> bool) -> Selection {
        Selection {
            bits: domain
                .bits
                .iter()
                .enumerate()
                .map(|(i, d)| *d && f(i as StitchId))
                .collect(),
        }
    }

    fn node_named(&self, name: &str) -> Result<NodeId, String> {
        self.skel
            .nodes
            .iter()
            .find(|n| n.name == name)
            .map(|n| n.id)
            .ok_or_else(|| format!("unknown shape {name:?}"))
    }

    fn interface_named(&self, name: &str, context: Option<NodeId>) -> Result<InterfaceId, String> {
        let path = match (name.contains('.'), context) {
            (false, Some(n)) => format!("{}.{name}", self.skel.node(n).name),
            _ => name.to_string(),
        };
        self.skel
            .graph
            .find_interface(&path)
            .ok_or_else(|| format!("unknown interface {name:?}"))
    }

    fn grid_mask(
        &self,
        domain: &Selection,
        mode: GridMode,
        grid: &Grid,
        cell: Option<super::PatternOp>,
    ) -> Selection {
        let (gr, gc) = (grid.rows() as i64, grid.cols() as i64);
        if gr == 0 || gc == 0 {
            return Selection::empty(self.len());
        }
        self.matching(domain, |s| {
            let st = self.graph.stitch(s);
            let (c, w) = self.coords(s);
            let (rows, wales) = self.extent(st.node);
            let at = match mode {
                GridMode::Stretch => {
                    if c < 0 || c >= rows || w < 0 || w >= wales {
                        return false;
                    }
                    (c * gr / rows, w * gc / wales)
                }
                GridMode::Tile => (c.rem_euclid(gr), w.rem_euclid(gc)),
                GridMode::Place => {
                    let oc = (rows - gr).div_euclid(2);
                    let ow = match self.alignment(st.node) {
                        Alignment::Left => 0,
                        Alignment::Right => wales - gc,
                        Alignment::Center => (wales - gc).div_euclid(2),
                    };
                    (c - oc, w - ow)
                }
            };
            if at.0 < 0 || at.1 < 0 {
                return false;
            }
            match grid.get(at.0 as usize, at.1 as usize) {
                Some(op) => cell.is_none_or(|want| want == op),
                None => false,
            }
        })
    }

    fn alignment(&self, node: NodeId) -> Alignment {
        match &self.skel.node(node).shape {
            ResolvedShape::Sheet { alignment, .. } | ResolvedShape::Joint { alignment, .. } => {
                *alignment
            }
            ResolvedShape::Split { .. } => Alignment::Center,
        }
    }

    fn image_mask(&self, domain: &Selection, src: &str) -> Result<Selection, String> {
        let path = self.base_dir.join(src);
        let img = image::open(&path)
            .map_err(|e| format!("cannot read image {}: {e}", path.display()))?
            .to_luma8();
        let (iw, ih) = (img.width() as i64, img.height() as i64);
        if iw == 0 || ih == 0 {
            return Ok(Selection::empty(self.len()));
        }
        Ok(self.matching(domain, |s| {
            let (c, w) = self.coords(s);
            let (rows, wales) = self.extent(self.graph.stitch(s).node);
            if c < 0 || c >= rows || w < 0 || w >= wales {
                return false;
            }
            let px = w * iw / wales;
            let py = ih - 1 - c * ih / rows;
            img.get_pixel(px as u32, py as u32).0[0] < 128
        }))
    }

    fn neighbors(&self, domain: &Selection, seeds: &Selection, range: &RangeSpec) -> Selection {
        let (lo, hi) = if range.single {
            (0, range.lo.unwrap_or(0) + 1)
        } else {
            (range.lo.unwrap_or(0).max(0), range.hi.unwrap_or(i64::MAX))
        };
        let mut dist = vec![i64::MAX; self.len()];
        let mut queue = VecDeque::new();
        for s in seeds.ids() {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
        while let Some(s) = queue.pop_front() {
            let d = dist[s as usize];
            if d + 1 >= hi {
                continue;
            }
            for n in &self.adjacency[s as usize] {
                if domain.contains(*n) && dist[*n as usize] == i64::MAX {
                    dist[*n as usize] = d + 1;
                    queue.push_back(*n);
                }
            }
        }
        self.matching(domain, |s| {
            let d = dist[s as usize];
            d != i64::MAX && d >= lo && d < hi
        })
    }

    /// Evaluates `q` within `domain`; `context` is the node of a node layer.
    pub fn eval(
        &self,
        q: &Query,
        domain: &Selection,
        context: Option<NodeId>,
    ) -> Result<Selection, String> {
        Ok(match q {
            Query::All => domain.clone(),
            Query::Filter(pred) => {
                let mut out = Selection::empty(self.len());
                for s in domain.ids() {
                    let env = StitchEnv { ctx: self, id: s };
                    if expr::eval(pred, &env)?.truthy()? {
                        out.insert(s);
                    }
                }
                out
            }
            Query::Wales(r) => self.matching(domain, |s| r.contains(self.coords(s).1)),
            Query::Courses(r) => self.matching(domain, |s| r.contains(self.coords(s).0)),
            Query::Select(cr, wr) => self.matching(domain, |s| {
                let (c, w) = self.coords(s);
                cr.contains(c) && wr.contains(w)
            }),
            Query::Named(name) => {
                if let Ok(node) = self.node_named(name) {
                    self.matching(domain, |s| self.graph.stitch(s).node == node)
                } else if let Ok(itf) = self.interface_named(name, context) {
                    self.port(domain, itf)
                } else {
                    return Err(format!("unknown name {name:?}"));
                }
            }
            Query::Shape(name) => {
                let node = self.node_named(name)?;
                self.matching(domain, |s| self.graph.stitch(s).node == node)
            }
            Query::Itf(name) => self.port(domain, self.interface_named(name, context)?),
            Query::Grid(mode, grid, cell) => self.grid_mask(domain, *mode, grid, *cell),
            Query::Img(src) => self.image_mask(domain, src)?,
            Query::Or(a, b) => self
                .eval(a, domain, context)?
                .union(&self.eval(b, domain, context)?),
            Query::And(a, b) => self
                .eval(a, domain, context)?
                .intersect(&self.eval(b, domain, context)?),
            Query::Minus(a, b) => self
                .eval(a, domain, context)?
                .minus(&self.eval(b, domain, context)?),
            Query::Inverse(a) => domain.minus(&self.eval(a, domain, context)?),
            Query::Neighbors(a, r) => {
                let seeds = self.eval(a, domain, context)?;
                self.neighbors(domain, &seeds, r)
            }
            Query::Boundaries(a) => {
                let sel = self.eval(a, domain, context)?;
                self.matching(&sel, |s| {
                    self.adjacency[s as usize].iter().any(|n| !sel.contains(*n))
                })
            }
        })
    }

    fn port(&self, domain: &Selection, itf: InterfaceId) -> Selection {
        let ids = self
            .ports
            .get(&itf)
            .map(|p| p.stitches.clone())
            .unwrap_or_default();
        Selection::from_ids(self.len(), ids).intersect(domain)
    }
}

struct StitchEnv<'a, 'b> {
    ctx: &'a PatternContext<'b>,
    id: StitchId,
}

impl Env for StitchEnv<'_, '_> {
    fn var(&self, name: &str) -> Result<Value, String> {
        let s = self.ctx.graph.stitch(self.id);
        let (c, w) = self.ctx.coords(self.id);
        let (rows, wales) = self.ctx.extent(s.node);
        let num = |v: i64| Ok(Value::Num(v as f64));
        let flag = |f: StitchFlags| Ok(Value::Bool(s.flags.contains(f)));
        match name {
            "course" => num(c),
            "wale" => num(w),
            "x" => num(s.x as i64),
            "id" => num(s.id as i64),
            "height" => num(rows),
            "width" => num(wales),
            "node" => Ok(Value::Str(self.ctx.skel.node(s.node).name.clone())),
            "side" => Ok(Value::Str(match s.side {
                Side::Front => "front".into(),
                Side::Back => "back".into(),
            })),
            "increase" => flag(StitchFlags::INCREASE),
            "decrease" => flag(StitchFlags::DECREASE),
            "shortrow" => flag(StitchFlags::SHORT_ROW),
            "interface" => flag(StitchFlags::INTERFACE),
            _ => Err(format!("unknown stitch attribute {name}")),
        }
    }
}
