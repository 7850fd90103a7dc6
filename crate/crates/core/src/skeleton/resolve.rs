use std::collections::{BTreeMap, VecDeque};

use super::model::*;
use super::SkeletonError;
use crate::diag::{Diagnostic, DiagnosticClass};
use crate::expr::{self, Env, Value};

/// Knitting direction of a node relative to its declared interfaces.
/// For splits, `Forward` enters through the base (branching) and `Reverse`
/// enters through the branches (merging).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reverse,
}

/// Whether yarn flows into or out of a node through an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    In,
    Out,
}

impl Role {
    fn flip(self) -> Role {
        match self {
            Role::In => Role::Out,
            Role::Out => Role::In,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedShape {
    Sheet {
        sheet_type: SheetType,
        length: u32,
        profile: Vec<(f64, f64)>,
        course_widths: Vec<u32>,
        shaping: Shaping,
        alignment: Alignment,
    },
    Joint {
        rows: u32,
        short_widths: Vec<u32>,
        layout: Option<f64>,
        alignment: Alignment,
        course_width: u32,
        circular: bool,
    },
    Split {
        degree: u32,
        base_width: u32,
        circular: bool,
        folded: bool,
        /// `(start, width)` of every branch, in base positions.
        branches: Vec<(u32, u32)>,
        alignment: SplitAlignment,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedNode {
    pub id: NodeId,
    pub name: String,
    pub gauge: Gauge,
    pub orientation: Orientation,
    pub shape: ResolvedShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedInterface {
    pub id: InterfaceId,
    pub node: NodeId,
    pub name: String,
    pub state: InterfaceState,
    /// Stitches per side for circular interfaces, stitches otherwise.
    pub width: u32,
    pub circular: bool,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSkeleton {
    pub graph: SkeletonGraph,
    pub parameters: BTreeMap<String, f64>,
    pub nodes: Vec<ResolvedNode>,
    pub interfaces: Vec<ResolvedInterface>,
    /// Structural findings made while resolving (reported by `validate`).
    pub issues: Vec<Diagnostic>,
}

impl ResolvedSkeleton {
    pub fn node(&self, id: NodeId) -> &ResolvedNode {
        &self.nodes[id.0 as usize]
    }

    pub fn interface(&self, id: InterfaceId) -> &ResolvedInterface {
        &self.interfaces[id.0 as usize]
    }

    pub fn interface_path(&self, id: InterfaceId) -> String {
        self.graph.interface_path(id)
    }
}

/// Samples a piecewise-linear profile at course midpoints and rounds half-up.
pub fn sample_widths(profile: &[(f64, f64)], count: u32, min: u32) -> Vec<u32> {
    (0..count)
        .map(|r| {
            let t = (r as f64 + 0.5) / count as f64;
            let w = interpolate(profile, t);
            ((w + 0.5).floor() as u32).max(min)
        })
        .collect()
}

fn interpolate(profile: &[(f64, f64)], t: f64) -> f64 {
    if profile.len() == 1 {
        return profile[0].1;
    }
    for w in profile.windows(2) {
        let ((t0, w0), (t1, w1)) = (w[0], w[1]);
        if t <= t1 {
            let a = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            return w0 + a * (w1 - w0);
        }
    }
    profile[profile.len() - 1].1
}

/// Places `degree` branches over `total` base positions. Returns
/// `(start, width)` per branch.
pub fn allocate_branches(
    total: u32,
    degree: u32,
    layout: Option<&[f64]>,
    alignment: SplitAlignment,
    peer_widths: &[Option<u32>],
) -> Vec<(u32, u32)> {
    let d = degree as usize;
    if let Some(fracs) = layout {
        let starts: Vec<u32> = fracs
            .iter()
            .map(|f| ((f * total as f64 + 0.5).floor() as u32).min(total))
            .collect();
        return (0..d)
            .map(|k| {
                let end = if k + 1 < d { starts[k + 1] } else { total };
                (starts[k], end.saturating_sub(starts[k]))
            })
            .collect();
    }
    let known: Option<Vec<u32>> = peer_widths.iter().copied().collect();
    if let Some(widths) = known.filter(|w| w.len() == d && w.iter().sum::<u32>() <= total) {
        let slack = total - widths.iter().sum::<u32>();
        // gaps[k] is the free space before branch k; gaps[d] trails.
        let mut gaps = vec![0u32; d + 1];
        match alignment {
            SplitAlignment::Left => gaps[d] = slack,
            SplitAlignment::Right => gaps[0] = slack,
            SplitAlignment::Center => {
                gaps[0] = slack / 2;
                gaps[d] = slack - slack / 2;
            }
            SplitAlignment::Uniform => {
                for (k, g) in gaps.iter_mut().enumerate() {
                    *g = slack / (d as u32 + 1) + u32::from((k as u32) < slack % (d as u32 + 1));
                }
            }
        }
        let mut pos = 0;
        return widths
            .iter()
            .enumerate()
            .map(|(k, w)| {
                pos += gaps[k];
                let s = pos;
                pos += w;
                (s, *w)
            })
            .collect();
    }
    let base = total / degree;
    let extra = total % degree;
    let mut pos = 0;
    (0..degree)
        .map(|k| {
            let w = base + u32::from(k < extra);
            let s = pos;
            pos += w;
            (s, w)
        })
        .collect()
}

struct NodeEnv<'a> {
    params: &'a BTreeMap<String, f64>,
    node: &'a Node,
}

fn node_prop<'a>(node: &'a Node, name: &str) -> Option<&'a ParamExpr> {
    match (&node.kind, name) {
        (NodeKind::Sheet(s), "length") => Some(&s.length),
        (NodeKind::Joint(j), "rows") => Some(&j.rows),
        (_, "width") => prop_width(node),
        _ => None,
    }
}

fn prop_width(node: &Node) -> Option<&ParamExpr> {
    match &node.kind {
        NodeKind::Sheet(SheetNode {
            width: WidthSpec::Constant(e),
            ..
        })
        | NodeKind::Joint(JointNode {
            width: WidthSpec::Constant(e),
            ..
        }) => Some(e),
        _ => None,
    }
}

impl Env for NodeEnv<'_> {
    fn param(&self, name: &str) -> Result<Value, String> {
        self.params
            .get(name)
            .map(|v| Value::Num(*v))
            .ok_or_else(|| format!("unbound parameter #{name}"))
    }

    fn prop(&self, name: &str) -> Result<Value, String> {
        if name == "degree" {
            if let NodeKind::Split(s) = &self.node.kind {
                return Ok(Value::Num(s.degree as f64));
            }
        }
        let e = node_prop(self.node, name)
            .ok_or_else(|| format!("{} has no property @{name}", self.node.name))?;
        expr::eval(e.expr(), self)
    }
}

fn check_props_acyclic(node: &Node) -> Result<(), SkeletonError> {
    fn visit(node: &Node, prop: &str, stack: &mut Vec<String>) -> Result<(), SkeletonError> {
        if let Some(pos) = stack.iter().position(|p| p == prop) {
            let mut cycle: Vec<String> = stack[pos..].iter().map(|p| format!("@{p}")).collect();
            cycle.push(format!("@{prop}"));
            return Err(SkeletonError::CyclicReference {
                node: node.name.clone(),
                cycle: cycle.join(" -> "),
            });
        }
        let Some(e) = node_prop(node, prop) else {
            return Ok(());
        };
        stack.push(prop.to_string());
        for p in e.props() {
            visit(node, &p, stack)?;
        }
        stack.pop();
        Ok(())
    }
    for prop in ["length", "width", "rows"] {
        visit(node, prop, &mut Vec::new())?;
    }
    Ok(())
}

fn width_exprs(w: &WidthSpec) -> Vec<&ParamExpr> {
    match w {
        WidthSpec::Constant(e) => vec![e],
        WidthSpec::Profile(p) => p.iter().map(|(_, e)| e).collect(),
    }
}

fn all_exprs(node: &Node) -> Vec<&ParamExpr> {
    match &node.kind {
        NodeKind::Sheet(s) => {
            let mut out = vec![&s.length];
            out.extend(width_exprs(&s.width));
            out
        }
        NodeKind::Joint(j) => {
            let mut out = vec![&j.rows];
            out.extend(width_exprs(&j.width));
            out
        }
        NodeKind::Split(_) => Vec::new(),
    }
}

fn eval_num(env: &NodeEnv, e: &ParamExpr, field: &str) -> Result<f64, SkeletonError> {
    let v = expr::eval(e.expr(), env)
        .and_then(|v| v.as_num())
        .map_err(|message| SkeletonError::Expression {
            node: env.node.name.clone(),
            field: field.to_string(),
            message,
        })?;
    if !v.is_finite() {
        return Err(SkeletonError::NonFinite {
            node: env.node.name.clone(),
            field: field.into(),
        });
    }
    Ok(v)
}

fn eval_count(env: &NodeEnv, e: &ParamExpr, field: &str) -> Result<u32, SkeletonError> {
    let v = eval_num(env, e, field)?;
    let r = (v + 0.5).floor();
    if r < 1.0 {
        return Err(SkeletonError::Invalid(format!(
            "{}.{field} must be >= 1, got {v}",
            env.node.name
        )));
    }
    Ok(r as u32)
}

fn eval_profile(env: &NodeEnv, w: &WidthSpec, min: u32) -> Result<Vec<(f64, f64)>, SkeletonError> {
    let points = match w {
        WidthSpec::Constant(e) => {
            let v = eval_num(env, e, "width")?;
            vec![(0.0, v), (1.0, v)]
        }
        WidthSpec::Profile(p) => p
            .iter()
            .map(|(t, e)| Ok((*t, eval_num(env, e, "width")?)))
            .collect::<Result<Vec<_>, SkeletonError>>()?,
    };
    if let Some((_, w)) = points.iter().find(|(_, w)| *w < min as f64) {
        return Err(SkeletonError::WidthBelowMinimum {
            node: env.node.name.clone(),
            width: *w,
            min,
        });
    }
    Ok(points)
}

/// Binds every expression to concrete values. `overrides` win over the
/// document's parameter defaults.
pub fn evaluate_parameters(
    graph: &SkeletonGraph,
    overrides: &BTreeMap<String, f64>,
) -> Result<ResolvedSkeleton, SkeletonError> {
    let mut params = graph.parameters.clone();
    params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));

    for node in &graph.nodes {
        for e in all_exprs(node) {
            if let Some(name) = e.params().into_iter().find(|p| !params.contains_key(p)) {
                return Err(SkeletonError::UnboundParameter {
                    name,
                    node: node.name.clone(),
                });
            }
        }
        check_props_acyclic(node)?;
    }

    let orientation = orient(graph);
    let mut issues = orientation.issues;

    // Per-node evaluation; split widths are filled in by propagation.
    let mut known: Vec<Option<(u32, bool)>> = vec![None; graph.interfaces.len()];
    let mut partial: Vec<Option<ResolvedShape>> = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let env = NodeEnv {
            params: &params,
            node,
        };
        let shape = match &node.kind {
            NodeKind::Sheet(s) => {
                let tubular = s.sheet_type == SheetType::Tubular;
                let min = if tubular { 2 } else { 1 };
                let length = eval_count(&env, &s.length, "length")?;
                let profile = eval_profile(&env, &s.width, min)?;
                let course_widths = sample_widths(&profile, length, min);
                known[node.interfaces[0].0 as usize] = Some((course_widths[0], tubular));
                known[node.interfaces[1].0 as usize] =
                    Some((*course_widths.last().expect("length >= 1"), tubular));
                Some(ResolvedShape::Sheet {
                    sheet_type: s.sheet_type,
                    length,
                    profile,
                    course_widths,
                    shaping: s.shaping.clone(),
                    alignment: s.alignment,
                })
            }
            NodeKind::Joint(j) => {
                let rows = eval_count(&env, &j.rows, "rows")?;
                let profile = eval_profile(&env, &j.width, 1)?;
                let short_widths = sample_widths(&profile, rows, 1);
                Some(ResolvedShape::Joint {
                    rows,
                    short_widths,
                    layout: j.layout,
                    alignment: j.alignment,
                    course_width: 0,
                    circular: false,
                })
            }
            NodeKind::Split(_) => None,
        };
        partial.push(shape);
    }

    let peer_of = |i: InterfaceId| match graph.interface(i).state {
        InterfaceState::Connected(p) => Some(p),
        _ => None,
    };

    // Joints copy their width from a peer; splits take theirs from the base
    // peer or the sum of branch peers.
    let mut changed = true;
    while changed {
        changed = false;
        for node in &graph.nodes {
            match &node.kind {
                NodeKind::Joint(_) => {
                    let (b, t) = (node.interfaces[0], node.interfaces[1]);
                    if known[b.0 as usize].is_some() {
                        continue;
                    }
                    let from = [b, t]
                        .into_iter()
                        .filter_map(peer_of)
                        .find_map(|p| known[p.0 as usize]);
                    if let Some(v) = from {
                        known[b.0 as usize] = Some(v);
                        known[t.0 as usize] = Some(v);
                        changed = true;
                    }
                }
                NodeKind::Split(s) => {
                    let base = node.interfaces[0];
                    if known[base.0 as usize].is_some() {
                        continue;
                    }
                    let branch_peers: Vec<Option<(u32, bool)>> = node.interfaces[1..]
                        .iter()
                        .map(|i| peer_of(*i).and_then(|p| known[p.0 as usize]))
                        .collect();
                    let base_val = peer_of(base).and_then(|p| known[p.0 as usize]).or_else(|| {
                        let all: Option<Vec<(u32, bool)>> = branch_peers.iter().copied().collect();
                        all.map(|bs| {
                            let sum: u32 = bs.iter().map(|b| b.0).sum();
                            let circular = s.folded || s.base_type == Some(SheetType::Tubular);
                            if circular && !s.folded {
                                (sum.div_ceil(2), true)
                            } else {
                                (sum, circular)
                            }
                        })
                    });
                    if let Some(v) = base_val {
                        known[base.0 as usize] = Some(v);
                        changed = true;
                    }
                }
                NodeKind::Sheet(_) => {}
            }
        }
    }

    let mut nodes = Vec::with_capacity(graph.nodes.len());
    for (node, shape) in graph.nodes.iter().zip(partial) {
        let base_known = known[node.interfaces[0].0 as usize];
        let shape = match (&node.kind, shape) {
            (
                NodeKind::Joint(_),
                Some(ResolvedShape::Joint {
                    rows,
                    short_widths,
                    layout,
                    alignment,
                    ..
                }),
            ) => {
                let (w, circ) =
                    base_known.ok_or_else(|| SkeletonError::UnknownWidth(node.name.clone()))?;
                ResolvedShape::Joint {
                    rows,
                    short_widths,
                    layout,
                    alignment,
                    course_width: w,
                    circular: circ,
                }
            }
            (NodeKind::Split(s), None) => {
                let (w, circ) = base_known.ok_or_else(|| {
                    SkeletonError::UnknownWidth(graph.interface_path(node.interfaces[0]))
                })?;
                let total = if circ && !s.folded { 2 * w } else { w };
                let peers: Vec<Option<u32>> = node.interfaces[1..]
                    .iter()
                    .map(|i| peer_of(*i).and_then(|p| known[p.0 as usize]).map(|v| v.0))
                    .collect();
                let branches =
                    allocate_branches(total, s.degree, s.layout.as_deref(), s.alignment, &peers);
                let branch_circ = circ && s.folded;
                for (k, (_, bw)) in branches.iter().enumerate() {
                    known[node.interfaces[k + 1].0 as usize] = Some((*bw, branch_circ));
                }
                if let Some(k) = branches.iter().position(|(_, bw)| *bw == 0) {
                    return Err(SkeletonError::Invalid(format!(
                        "{}: branch[{k}] has zero width",
                        node.name
                    )));
                }
                ResolvedShape::Split {
                    degree: s.degree,
                    base_width: w,
                    circular: circ,
                    folded: s.folded,
                    branches,
                    alignment: s.alignment,
                }
            }
            (_, Some(shape)) => shape,
            _ => unreachable!("sheet and joint shapes are always evaluated"),
        };
        if let ResolvedShape::Joint {
            course_width,
            circular,
            ..
        } = &shape
        {
            known[node.interfaces[1].0 as usize] = Some((*course_width, *circular));
        }
        nodes.push(ResolvedNode {
            id: node.id,
            name: node.name.clone(),
            gauge: node.gauge,
            orientation: orientation.nodes[node.id.0 as usize],
            shape,
        });
    }

    let interfaces = graph
        .interfaces
        .iter()
        .map(|i| {
            let (width, circular) = known[i.id.0 as usize]
                .ok_or_else(|| SkeletonError::UnknownWidth(graph.interface_path(i.id)))?;
            Ok(ResolvedInterface {
                id: i.id,
                node: i.node,
                name: i.name.clone(),
                state: i.state,
                width,
                circular,
                role: orientation.roles[i.id.0 as usize],
            })
        })
        .collect::<Result<Vec<_>, SkeletonError>>()?;

    for node in &nodes {
        if let ResolvedShape::Joint {
            short_widths,
            course_width,
            circular,
            ..
        } = &node.shape
        {
            let stitches = if *circular {
                2 * course_width
            } else {
                *course_width
            };
            if let Some(w) = short_widths.iter().find(|w| **w >= stitches) {
                issues.push(Diagnostic::error(
                    DiagnosticClass::Structure,
                    format!(
                        "{}: short row width {w} must be smaller than the course ({stitches} stitches)",
                        node.name
                    ),
                ));
            }
        }
    }

    Ok(ResolvedSkeleton {
        graph: graph.clone(),
        parameters: params,
        nodes,
        interfaces,
        issues,
    })
}

struct Orient {
    nodes: Vec<Orientation>,
    roles: Vec<Role>,
    issues: Vec<Diagnostic>,
}

fn node_roles(node: &Node, orientation: Orientation) -> Vec<Role> {
    match (&node.kind, orientation) {
        (NodeKind::Split(_), Orientation::Forward) => std::iter::once(Role::In)
            .chain(std::iter::repeat(Role::Out))
            .take(node.interfaces.len())
            .collect(),
        (NodeKind::Split(_), Orientation::Reverse) => std::iter::once(Role::Out)
            .chain(std::iter::repeat(Role::In))
            .take(node.interfaces.len())
            .collect(),
        (_, Orientation::Forward) => vec![Role::In, Role::Out],
        (_, Orientation::Reverse) => vec![Role::Out, Role::In],
    }
}

fn orientation_for(node: &Node, itf_index: usize, role: Role) -> Orientation {
    let forward_role = node_roles(node, Orientation::Forward)[itf_index];
    if forward_role == role {
        Orientation::Forward
    } else {
        Orientation::Reverse
    }
}

/// Propagates yarn flow from the start interface through every connection.
fn orient(graph: &SkeletonGraph) -> Orient {
    let mut nodes: Vec<Option<Orientation>> = vec![None; graph.nodes.len()];
    let mut issues = Vec::new();
    let mut queue = VecDeque::new();

    let seeds = std::iter::once(graph.start).chain(graph.nodes.iter().map(|n| n.interfaces[0]));
    for seed in seeds {
        let itf = graph.interface(seed);
        if nodes[itf.node.0 as usize].is_some() {
            continue;
        }
        let node = graph.node(itf.node);
        let idx = node.interfaces.iter().position(|i| *i == seed).unwrap();
        nodes[itf.node.0 as usize] = Some(orientation_for(node, idx, Role::In));
        queue.push_back(itf.node);
        while let Some(nid) = queue.pop_front() {
            let node = graph.node(nid);
            let roles = node_roles(node, nodes[nid.0 as usize].unwrap());
            for (k, iid) in node.interfaces.iter().enumerate() {
                let InterfaceState::Connected(peer) = graph.interface(*iid).state else {
                    continue;
                };
                let pnode_id = graph.interface(peer).node;
                let pnode = graph.node(pnode_id);
                let pidx = pnode.interfaces.iter().position(|i| *i == peer).unwrap();
                let want = orientation_for(pnode, pidx, roles[k].flip());
                match nodes[pnode_id.0 as usize] {
                    None => {
                        nodes[pnode_id.0 as usize] = Some(want);
                        queue.push_back(pnode_id);
                    }
                    Some(o) if o != want && nid < pnode_id => issues.push(Diagnostic::error(
                        DiagnosticClass::Structure,
                        format!(
                            "yarn flow conflict across {} <-> {}",
                            graph.interface_path(*iid),
                            graph.interface_path(peer)
                        ),
                    )),
                    _ => {}
                }
            }
        }
    }
    let nodes: Vec<Orientation> = nodes
        .into_iter()
        .map(|o| o.unwrap_or(Orientation::Forward))
        .collect();
    let mut roles = vec![Role::In; graph.interfaces.len()];
    for node in &graph.nodes {
        for (k, r) in node_roles(node, nodes[node.id.0 as usize])
            .into_iter()
            .enumerate()
        {
            roles[node.interfaces[k].0 as usize] = r;
        }
    }
    Orient {
        nodes,
        roles,
        issues,
    }
}
