//! Pattern programs and drawing layers.

mod apply;
mod gauge;
mod layers;
pub mod noise;
mod op;
mod parser;
mod query;

pub use apply::{applicable, apply_cross, apply_op, realize, unpaired_crosses};
pub use gauge::check_gauge_conflicts;
pub use layers::{
    commit, develop_layers, DevelopError, DevelopReport, DrawingMode, Layer, LayerBody,
};
pub use op::PatternOp;
pub use parser::{
    parse_program, Grid, GridMode, OpSpec, PatternError, ProgramLayer, Query, RangeSpec, Scope,
    Statement,
};
pub use query::{PatternContext, Selection};
