//! Compiler from garment skeletons and pattern programs to V-bed knitting
//! machine instructions.

pub mod constants;
pub mod diag;
pub mod expr;
pub mod layout;
pub mod machine;
pub mod pattern;
pub mod pipeline;
pub mod schedule;
pub mod shapegen;
pub mod skeleton;
pub mod viz;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(String),
    #[error("machine constants: {0}")]
    Config(String),
    #[error(transparent)]
    Skeleton(#[from] skeleton::SkeletonError),
    #[error(transparent)]
    Shape(#[from] shapegen::ShapeError),
    #[error("skeleton has {} error diagnostics", .0.iter().filter(|d| d.is_error()).count())]
    Invalid(Vec<diag::Diagnostic>),
    #[error(transparent)]
    Schedule(#[from] schedule::ScheduleError),
    #[error("{file}: {error}")]
    Pattern {
        file: String,
        error: pattern::PatternError,
    },
    #[error(transparent)]
    Develop(#[from] pattern::DevelopError),
    #[error(transparent)]
    Layout(#[from] layout::LayoutError),
    #[error(transparent)]
    Machine(#[from] machine::MachineError),
}
