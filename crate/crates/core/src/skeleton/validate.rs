use super::model::{InterfaceState, NodeKind, SheetType};
use super::resolve::{ResolvedShape, ResolvedSkeleton};
use crate::diag::{Diagnostic, DiagnosticClass};

/// Reports conflicts across connections without attempting to fix them.
pub fn validate(skel: &ResolvedSkeleton) -> Vec<Diagnostic> {
    let mut out = skel.issues.clone();

    for node in &skel.nodes {
        if let ResolvedShape::Split {
            folded: true,
            circular: false,
            ..
        } = node.shape
        {
            out.push(Diagnostic::error(
                DiagnosticClass::FoldedFlatBase,
                format!("{}: folded split requires a tubular base", node.name),
            ));
        }
        if let NodeKind::Split(s) = &skel.graph.node(node.id).kind {
            if let (Some(t), ResolvedShape::Split { circular, .. }) = (s.base_type, &node.shape) {
                if (t == SheetType::Tubular) != *circular {
                    out.push(Diagnostic::error(
                        DiagnosticClass::TypeMismatch,
                        format!(
                            "{}: declared base type does not match its connection",
                            node.name
                        ),
                    ));
                }
            }
        }
    }

    for (a, b) in skel.graph.connections() {
        let (ia, ib) = (skel.interface(a), skel.interface(b));
        let (pa, pb) = (skel.interface_path(a), skel.interface_path(b));
        if ia.circular != ib.circular {
            out.push(Diagnostic::error(
                DiagnosticClass::TypeMismatch,
                format!(
                    "{pa} ({}) <-> {pb} ({})",
                    kind(ia.circular),
                    kind(ib.circular)
                ),
            ));
        } else if ia.width != ib.width {
            out.push(Diagnostic::warning(
                DiagnosticClass::WidthMismatch,
                format!("{pa} (width {}) <-> {pb} (width {})", ia.width, ib.width),
            ));
        }
    }

    let start = skel.interface(skel.graph.start);
    if start.state == InterfaceState::Closed {
        out.push(Diagnostic::error(
            DiagnosticClass::Structure,
            format!(
                "start interface {} is closed",
                skel.interface_path(start.id)
            ),
        ));
    }
    out
}

fn kind(circular: bool) -> &'static str {
    if circular {
        "tubular"
    } else {
        "flat"
    }
}
