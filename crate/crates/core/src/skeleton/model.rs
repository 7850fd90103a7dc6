use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{self, Expr};
use crate::skeleton::SkeletonError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterfaceId(pub u32);

/// A numeric field that may reference design parameters (`#name`) and
/// properties of its own node (`@prop`).
#[derive(Debug, Clone)]
pub struct ParamExpr {
    source: String,
    expr: Expr,
}

impl PartialEq for ParamExpr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl ParamExpr {
    pub fn parse(source: &str) -> Result<Self, expr::ExprError> {
        Ok(Self {
            source: source.to_string(),
            expr: expr::parse(source)?,
        })
    }

    pub fn number(v: f64) -> Self {
        Self {
            source: format_number(v),
            expr: Expr::Num(v),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn params(&self) -> BTreeSet<String> {
        let (mut p, mut q) = (BTreeSet::new(), BTreeSet::new());
        self.expr.references(&mut p, &mut q);
        p
    }

    pub fn props(&self) -> BTreeSet<String> {
        let (mut p, mut q) = (BTreeSet::new(), BTreeSet::new());
        self.expr.references(&mut p, &mut q);
        q
    }

    fn to_raw(&self) -> NumOrExpr {
        match self.expr {
            Expr::Num(v) if self.source == format_number(v) => NumOrExpr::Num(v),
            _ => NumOrExpr::Expr(self.source.clone()),
        }
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SheetType {
    #[default]
    Flat,
    Tubular,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shaping {
    #[default]
    Uniform,
    Sides,
    Left,
    Right,
    Center,
    /// Program text mapping `(M, N, i)` to a list of target indices.
    Custom(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Left,
    Right,
    #[default]
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitAlignment {
    #[default]
    Uniform,
    Left,
    Right,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    #[default]
    Full,
    Half,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WidthSpec {
    Constant(ParamExpr),
    /// Piecewise-linear control points `(t, w)` over `[0, 1]`.
    Profile(Vec<(f64, ParamExpr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetNode {
    pub sheet_type: SheetType,
    pub length: ParamExpr,
    pub width: WidthSpec,
    pub shaping: Shaping,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointNode {
    pub rows: ParamExpr,
    pub width: WidthSpec,
    /// `None` is automatic placement.
    pub layout: Option<f64>,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitNode {
    pub degree: u32,
    /// Branch start fractions along the base; `None` is automatic.
    pub layout: Option<Vec<f64>>,
    pub alignment: SplitAlignment,
    pub folded: bool,
    /// Declared base type, used when it cannot be inferred from a peer.
    pub base_type: Option<SheetType>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Sheet(SheetNode),
    Joint(JointNode),
    Split(SplitNode),
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Sheet(_) => "sheet",
            NodeKind::Joint(_) => "joint",
            NodeKind::Split(_) => "split",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub gauge: Gauge,
    pub kind: NodeKind,
    pub interfaces: Vec<InterfaceId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceState {
    Open,
    Closed,
    Connected(InterfaceId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub id: InterfaceId,
    pub node: NodeId,
    pub name: String,
    pub state: InterfaceState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    pub nodes: Vec<Node>,
    pub interfaces: Vec<Interface>,
    pub parameters: BTreeMap<String, f64>,
    pub start: InterfaceId,
}

impl SkeletonGraph {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn interface(&self, id: InterfaceId) -> &Interface {
        &self.interfaces[id.0 as usize]
    }

    pub fn node_by_name(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Looks up `node.interface`, accepting `branch1` for `branch[1]`.
    pub fn find_interface(&self, path: &str) -> Option<InterfaceId> {
        let (node, itf) = path.split_once('.')?;
        let node = self.node_by_name(node)?;
        let itf = normalize_interface_name(itf);
        node.interfaces
            .iter()
            .copied()
            .find(|i| self.interface(*i).name == itf)
    }

    pub fn interface_path(&self, id: InterfaceId) -> String {
        let itf = self.interface(id);
        format!("{}.{}", self.node(itf.node).name, itf.name)
    }

    /// Connected interface pairs, each reported once (lower id first).
    pub fn connections(&self) -> Vec<(InterfaceId, InterfaceId)> {
        self.interfaces
            .iter()
            .filter_map(|i| match i.state {
                InterfaceState::Connected(peer) if i.id < peer => Some((i.id, peer)),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let raw = RawDoc {
            version: 1,
            parameters: self.parameters.clone(),
            start: self.interface_path(self.start),
            nodes: self.nodes.iter().map(|n| self.raw_node(n)).collect(),
            connections: self
                .connections()
                .into_iter()
                .map(|(a, b)| [self.interface_path(a), self.interface_path(b)])
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("skeleton serializes");
        s.push('\n');
        s
    }

    fn raw_node(&self, n: &Node) -> RawNode {
        let closed: Vec<String> = n
            .interfaces
            .iter()
            .map(|i| self.interface(*i))
            .filter(|i| i.state == InterfaceState::Closed)
            .map(|i| i.name.clone())
            .collect();
        match &n.kind {
            NodeKind::Sheet(s) => RawNode::Sheet {
                name: n.name.clone(),
                sheet_type: s.sheet_type,
                length: s.length.to_raw(),
                width: width_to_raw(&s.width),
                shaping: s.shaping.clone(),
                alignment: s.alignment,
                gauge: n.gauge,
                closed,
            },
            NodeKind::Joint(j) => RawNode::Joint {
                name: n.name.clone(),
                rows: j.rows.to_raw(),
                width: width_to_raw(&j.width),
                layout: match j.layout {
                    Some(v) => NumOrExpr::Num(v),
                    None => NumOrExpr::Expr("auto".into()),
                },
                alignment: j.alignment,
                gauge: n.gauge,
                closed,
            },
            NodeKind::Split(s) => RawNode::Split {
                name: n.name.clone(),
                degree: s.degree,
                layout: match &s.layout {
                    Some(v) => RawSplitLayout::Fixed(v.clone()),
                    None => RawSplitLayout::Auto(AutoTag::Auto),
                },
                alignment: s.alignment,
                folded: s.folded,
                base_type: s.base_type,
                gauge: n.gauge,
                closed,
            },
        }
    }
}

pub fn normalize_interface_name(name: &str) -> String {
    match name.strip_prefix("branch") {
        Some(rest) if !rest.is_empty() && !rest.starts_with('[') => format!("branch[{rest}]"),
        _ => name.to_string(),
    }
}

pub fn branch_name(k: u32) -> String {
    format!("branch[{k}]")
}

fn width_to_raw(w: &WidthSpec) -> RawWidth {
    match w {
        WidthSpec::Constant(e) => RawWidth::Const(e.to_raw()),
        WidthSpec::Profile(points) => {
            RawWidth::Profile(points.iter().map(|(t, e)| (*t, e.to_raw())).collect())
        }
    }
}

// Document-level raw representation.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    version: u32,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
    start: String,
    nodes: Vec<RawNode>,
    #[serde(default)]
    connections: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrExpr {
    Num(f64),
    Expr(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawWidth {
    Const(NumOrExpr),
    Profile(Vec<(f64, NumOrExpr)>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSplitLayout {
    Auto(AutoTag),
    Fixed(Vec<f64>),
}

fn default_auto() -> NumOrExpr {
    NumOrExpr::Expr("auto".into())
}

fn default_split_layout() -> RawSplitLayout {
    RawSplitLayout::Auto(AutoTag::Auto)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawNode {
    Sheet {
        name: String,
        #[serde(rename = "type", default)]
        sheet_type: SheetType,
        length: NumOrExpr,
        width: RawWidth,
        #[serde(default)]
        shaping: Shaping,
        #[serde(default)]
        alignment: Alignment,
        #[serde(default)]
        gauge: Gauge,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        closed: Vec<String>,
    },
    Joint {
        name: String,
        rows: NumOrExpr,
        width: RawWidth,
        #[serde(default = "default_auto")]
        layout: NumOrExpr,
        #[serde(default)]
        alignment: Alignment,
        #[serde(default)]
        gauge: Gauge,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        closed: Vec<String>,
    },
    Split {
        name: String,
        degree: u32,
        #[serde(default = "default_split_layout")]
        layout: RawSplitLayout,
        #[serde(default)]
        alignment: SplitAlignment,
        #[serde(default)]
        folded: bool,
        #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
        base_type: Option<SheetType>,
        #[serde(default)]
        gauge: Gauge,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        closed: Vec<String>,
    },
}

fn param_expr(raw: &NumOrExpr, node: &str, field: &str) -> Result<ParamExpr, SkeletonError> {
    match raw {
        NumOrExpr::Num(v) => Ok(ParamExpr::number(*v)),
        NumOrExpr::Expr(s) => ParamExpr::parse(s).map_err(|e| SkeletonError::Expression {
            node: node.to_string(),
            field: field.to_string(),
            message: e.to_string(),
        }),
    }
}

fn width_spec(raw: &RawWidth, node: &str) -> Result<WidthSpec, SkeletonError> {
    match raw {
        RawWidth::Const(e) => Ok(WidthSpec::Constant(param_expr(e, node, "width")?)),
        RawWidth::Profile(points) => {
            let pts = points
                .iter()
                .map(|(t, e)| Ok((*t, param_expr(e, node, "width")?)))
                .collect::<Result<Vec<_>, SkeletonError>>()?;
            let bad = |msg: &str| SkeletonError::Invalid(format!("{node}: width profile {msg}"));
            if pts.is_empty() {
                return Err(bad("is empty"));
            }
            if pts[0].0 != 0.0 || pts[pts.len() - 1].0 != 1.0 {
                return Err(bad("must start at t=0 and end at t=1"));
            }
            if pts.len() > 1 && pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(bad("t values must be strictly increasing"));
            }
            if pts.len() == 1 {
                return Err(bad("needs at least two control points"));
            }
            Ok(WidthSpec::Profile(pts))
        }
    }
}

/// Parses a skeleton document.
pub fn parse_skeleton(document: &str) -> Result<SkeletonGraph, SkeletonError> {
    let raw: RawDoc = serde_json::from_str(document).map_err(|e| SkeletonError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.version != 1 {
        return Err(SkeletonError::Invalid(format!(
            "unsupported version {}",
            raw.version
        )));
    }

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    let mut interfaces: Vec<Interface> = Vec::new();
    let mut seen = HashMap::new();
    let mut closed_lists = Vec::new();
    for (idx, rn) in raw.nodes.iter().enumerate() {
        let id = NodeId(idx as u32);
        let (name, gauge, kind, itf_names, closed) = match rn {
            RawNode::Sheet {
                name,
                sheet_type,
                length,
                width,
                shaping,
                alignment,
                gauge,
                closed,
            } => {
                if let Shaping::Custom(prog) = shaping {
                    crate::shapegen::shaper::CustomShaper::compile(prog).map_err(|e| {
                        SkeletonError::Expression {
                            node: name.clone(),
                            field: "shaping".into(),
                            message: e,
                        }
                    })?;
                }
                let kind = NodeKind::Sheet(SheetNode {
                    sheet_type: *sheet_type,
                    length: param_expr(length, name, "length")?,
                    width: width_spec(width, name)?,
                    shaping: shaping.clone(),
                    alignment: *alignment,
                });
                (
                    name,
                    *gauge,
                    kind,
                    vec!["bottom".to_string(), "top".to_string()],
                    closed,
                )
            }
            RawNode::Joint {
                name,
                rows,
                width,
                layout,
                alignment,
                gauge,
                closed,
            } => {
                let layout = match layout {
                    NumOrExpr::Num(v) if (0.0..=1.0).contains(v) => Some(*v),
                    NumOrExpr::Expr(s) if s == "auto" => None,
                    _ => {
                        return Err(SkeletonError::Invalid(format!(
                            "{name}: joint layout must be in [0, 1] or \"auto\""
                        )))
                    }
                };
                let kind = NodeKind::Joint(JointNode {
                    rows: param_expr(rows, name, "rows")?,
                    width: width_spec(width, name)?,
                    layout,
                    alignment: *alignment,
                });
                (
                    name,
                    *gauge,
                    kind,
                    vec!["bottom".to_string(), "top".to_string()],
                    closed,
                )
            }
            RawNode::Split {
                name,
                degree,
                layout,
                alignment,
                folded,
                base_type,
                gauge,
                closed,
            } => {
                if *degree < 2 {
                    return Err(SkeletonError::Invalid(format!(
                        "{name}: split degree must be >= 2"
                    )));
                }
                let layout = match layout {
                    RawSplitLayout::Auto(_) => None,
                    RawSplitLayout::Fixed(v) => {
                        if v.len() != *degree as usize
                            || v.iter().any(|f| !(0.0..=1.0).contains(f))
                            || v.windows(2).any(|w| w[1] < w[0])
                        {
                            return Err(SkeletonError::Invalid(format!(
                                "{name}: split layout needs {degree} non-decreasing fractions in [0, 1]"
                            )));
                        }
                        Some(v.clone())
                    }
                };
                let kind = NodeKind::Split(SplitNode {
                    degree: *degree,
                    layout,
                    alignment: *alignment,
                    folded: *folded,
                    base_type: *base_type,
                });
                let mut names = vec!["base".to_string()];
                names.extend((0..*degree).map(branch_name));
                (name, *gauge, kind, names, closed)
            }
        };
        if seen.insert(name.clone(), id).is_some() {
            return Err(SkeletonError::DuplicateNode(name.clone()));
        }
        if name.is_empty() || name.contains('.') {
            return Err(SkeletonError::Invalid(format!(
                "invalid node name {name:?}"
            )));
        }
        let mut ids = Vec::new();
        for itf in itf_names {
            let iid = InterfaceId(interfaces.len() as u32);
            interfaces.push(Interface {
                id: iid,
                node: id,
                name: itf,
                state: InterfaceState::Open,
            });
            ids.push(iid);
        }
        closed_lists.push(closed.clone());
        nodes.push(Node {
            id,
            name: name.clone(),
            gauge,
            kind,
            interfaces: ids,
        });
    }

    let mut graph = SkeletonGraph {
        nodes,
        interfaces,
        parameters: raw.parameters.clone(),
        start: InterfaceId(0),
    };

    for (node, closed) in closed_lists.iter().enumerate() {
        for itf in closed {
            let path = format!("{}.{}", graph.nodes[node].name, itf);
            let id = graph
                .find_interface(&path)
                .ok_or(SkeletonError::DanglingReference(path))?;
            graph.interfaces[id.0 as usize].state = InterfaceState::Closed;
        }
    }

    for [a, b] in &raw.connections {
        let ia = graph
            .find_interface(a)
            .ok_or_else(|| SkeletonError::DanglingReference(a.clone()))?;
        let ib = graph
            .find_interface(b)
            .ok_or_else(|| SkeletonError::DanglingReference(b.clone()))?;
        if ia == ib {
            return Err(SkeletonError::Invalid(format!("{a} connected to itself")));
        }
        for (x, path) in [(ia, a), (ib, b)] {
            if graph.interface(x).state != InterfaceState::Open {
                return Err(SkeletonError::Invalid(format!(
                    "{path} is already connected or closed"
                )));
            }
        }
        graph.interfaces[ia.0 as usize].state = InterfaceState::Connected(ib);
        graph.interfaces[ib.0 as usize].state = InterfaceState::Connected(ia);
    }

    graph.start = graph
        .find_interface(&raw.start)
        .ok_or_else(|| SkeletonError::DanglingReference(raw.start.clone()))?;
    if matches!(
        graph.interface(graph.start).state,
        InterfaceState::Connected(_)
    ) {
        return Err(SkeletonError::Invalid(format!(
            "start interface {} must not be connected",
            raw.start
        )));
    }
    Ok(graph)
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}
