//! Garment skeletons: shape-primitive nodes connected through interfaces.

mod model;
mod resolve;
mod validate;

use thiserror::Error;

pub use model::{
    branch_name, normalize_interface_name, parse_skeleton, Alignment, Gauge, Interface,
    InterfaceId, InterfaceState, JointNode, Node, NodeId, NodeKind, ParamExpr, Shaping, SheetNode,
    SheetType, SkeletonGraph, SplitAlignment, SplitNode, WidthSpec,
};
pub use resolve::{
    allocate_branches, evaluate_parameters, sample_widths, Orientation, ResolvedInterface,
    ResolvedNode, ResolvedShape, ResolvedSkeleton, Role,
};
pub use validate::validate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkeletonError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate node name {0:?}")]
    DuplicateNode(String),
    #[error("dangling interface reference {0:?}")]
    DanglingReference(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{node}.{field}: {message}")]
    Expression {
        node: String,
        field: String,
        message: String,
    },
    #[error("unbound parameter #{name} (used by {node})")]
    UnboundParameter { name: String, node: String },
    #[error("cyclic property reference in {node}: {cycle}")]
    CyclicReference { node: String, cycle: String },
    #[error("{node}.{field} is not finite")]
    NonFinite { node: String, field: String },
    #[error("{node}: width {width} below minimum {min}")]
    WidthBelowMinimum { node: String, width: f64, min: u32 },
    #[error("cannot infer the width of {0}")]
    UnknownWidth(String),
}

#[cfg(test)]
mod tests;
