//! Warnings and errors reported by every stage of the pipeline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosticClass {
    /// Yarn stretched beyond the allowed needle span.
    Tension,
    /// Too many loops stacked on a needle.
    PileUp,
    /// Reverse stitch while the opposite needle is occupied.
    ReverseConflict,
    /// Knit closing over a long run of misses.
    MissCollapse,
    /// Something does not fit the bed or an iteration budget.
    Overflow,
    WidthMismatch,
    TypeMismatch,
    FoldedFlatBase,
    Structure,
}

/// A finding attached to stitches. `conflicts` lists the stitches the
/// problem depends on; `stitches` are the ones where it shows up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub class: DiagnosticClass,
    pub stitches: Vec<u32>,
    pub conflicts: Vec<u32>,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(class: DiagnosticClass, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            class,
            stitches: Vec::new(),
            conflicts: Vec::new(),
            message: message.into(),
        }
    }

    pub fn error(class: DiagnosticClass, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            ..Self::warning(class, message)
        }
    }

    pub fn with_stitches(mut self, ids: impl IntoIterator<Item = u32>) -> Self {
        self.stitches = ids.into_iter().collect();
        self
    }

    pub fn with_conflicts(mut self, ids: impl IntoIterator<Item = u32>) -> Self {
        self.conflicts = ids.into_iter().collect();
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Serializes diagnostics as the JSON report array.
pub fn to_json(diags: &[Diagnostic]) -> String {
    let mut s = serde_json::to_string_pretty(diags).expect("diagnostics serialize");
    s.push('\n');
    s
}
