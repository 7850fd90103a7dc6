use serde::Deserialize;

use super::apply::{apply_cross, apply_op, realize, unpaired_crosses};
use super::op::PatternOp;
use super::parser::{parse_program, Grid, GridMode, OpSpec, PatternError, Query, Scope, Statement};
use super::query::PatternContext;
use crate::shapegen::{StitchGraph, StitchId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrawingMode {
    Singular,
    Scalable,
    Tileable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerBody {
    Program(Vec<Statement>),
    Drawing { mode: DrawingMode, grid: Grid },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub scope: Scope,
    pub body: LayerBody,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrawing {
    mode: DrawingMode,
    grid: Vec<Vec<Option<String>>>,
    #[serde(default)]
    node: Option<String>,
}

fn whole_file_error(message: String) -> PatternError {
    PatternError {
        line: 1,
        column: 1,
        message,
    }
}

impl Layer {
    /// Program layers of a DSL file, one per scope directive.
    pub fn from_program(name: &str, text: &str) -> Result<Vec<Layer>, PatternError> {
        Ok(parse_program(text)?
            .into_iter()
            .enumerate()
            .map(|(k, l)| Layer {
                name: if k == 0 {
                    name.to_string()
                } else {
                    format!("{name}#{k}")
                },
                scope: l.scope,
                body: LayerBody::Program(l.statements),
            })
            .collect())
    }

    /// A drawing layer: `{"mode": ..., "grid": [[opcode|null, ...], ...], "node": ...}`.
    pub fn from_drawing(name: &str, text: &str) -> Result<Layer, PatternError> {
        let raw: RawDrawing = serde_json::from_str(text).map_err(|e| PatternError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let cells = raw
            .grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.as_deref().map(PatternOp::from_opcode).transpose())
                    .collect::<Result<Vec<_>, String>>()
            })
            .collect::<Result<Vec<_>, String>>()
            .map_err(whole_file_error)?;
        let grid = Grid { cells };
        if raw.mode == DrawingMode::Scalable && grid.has_cross() {
            return Err(whole_file_error(
                "scalable drawings cannot contain cross operations".into(),
            ));
        }
        Ok(Layer {
            name: name.to_string(),
            scope: raw.node.map_or(Scope::Pre, Scope::Node),
            body: LayerBody::Drawing {
                mode: raw.mode,
                grid,
            },
        })
    }

    /// Equivalent program statements of a drawing.
    fn statements(&self) -> Vec<Statement> {
        match &self.body {
            LayerBody::Program(st) => st.clone(),
            LayerBody::Drawing { mode, grid } => {
                let gm = match mode {
                    DrawingMode::Singular => GridMode::Place,
                    DrawingMode::Scalable => GridMode::Stretch,
                    DrawingMode::Tileable => GridMode::Tile,
                };
                grid.ops()
                    .into_iter()
                    .map(|op| Statement {
                        line: 0,
                        query: Query::Grid(gm, grid.clone(), Some(op)),
                        op: OpSpec::Op(op),
                    })
                    .collect()
            }
        }
    }
}

fn scope_rank(s: &Scope) -> u8 {
    match s {
        Scope::Pre => 0,
        Scope::Node(_) => 1,
        Scope::Post => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DevelopError {
    #[error("layer {layer}: {error}")]
    Statement { layer: String, error: PatternError },
    #[error("layer {layer}: unknown node {node:?}")]
    UnknownNode { layer: String, node: String },
    #[error("unpaired cross operations on stitches {0:?}")]
    UnpairedCross(Vec<StitchId>),
}

/// Per-layer application counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DevelopReport {
    pub applied: Vec<(String, usize)>,
}

/// Runs all layers (pre, node layers in order, post) and returns the final
/// op of every stitch. Later layers overwrite earlier ones.
pub fn develop_layers(
    layers: &[Layer],
    ctx: &PatternContext,
    max_move: u32,
) -> Result<(Vec<PatternOp>, DevelopReport), DevelopError> {
    let g = ctx.graph;
    let mut ops: Vec<PatternOp> = g.stitches.iter().map(|s| s.op).collect();
    let mut order: Vec<&Layer> = layers.iter().collect();
    order.sort_by_key(|l| scope_rank(&l.scope));
    let mut report = DevelopReport::default();
    for layer in order {
        let node = match &layer.scope {
            Scope::Node(name) => Some(
                ctx.skel
                    .nodes
                    .iter()
                    .find(|n| &n.name == name)
                    .map(|n| n.id)
                    .ok_or_else(|| DevelopError::UnknownNode {
                        layer: layer.name.clone(),
                        node: name.clone(),
                    })?,
            ),
            _ => None,
        };
        let domain = ctx.domain(node);
        let mut applied = 0;
        for st in layer.statements() {
            let sel =
                ctx.eval(&st.query, &domain, node)
                    .map_err(|message| DevelopError::Statement {
                        layer: layer.name.clone(),
                        error: PatternError {
                            line: st.line,
                            column: 1,
                            message,
                        },
                    })?;
            applied += match st.op {
                OpSpec::Op(op) => apply_op(g, &mut ops, &sel, op, max_move),
                OpSpec::Cross(k) => apply_cross(g, &mut ops, &sel, k, max_move),
            };
        }
        report.applied.push((layer.name.clone(), applied));
    }
    let bad = unpaired_crosses(g, &ops);
    if !bad.is_empty() {
        return Err(DevelopError::UnpairedCross(bad));
    }
    Ok((ops, report))
}

/// Commits developed ops to the graph.
pub fn commit(graph: &mut StitchGraph, ops: &[PatternOp], course_order: &[u32]) {
    realize(graph, ops, course_order);
}
