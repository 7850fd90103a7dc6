use std::collections::BTreeSet;

use super::op::PatternOp;
use crate::diag::{Diagnostic, DiagnosticClass};
use crate::shapegen::{StitchGraph, StitchId};
use crate::skeleton::{Gauge, ResolvedSkeleton};

/// Warns, once per full-gauge node, about purls whose needle across the bed
/// holds a stitch of the same course.
pub fn check_gauge_conflicts(graph: &StitchGraph, skel: &ResolvedSkeleton) -> Vec<Diagnostic> {
    let mut per_node: Vec<Vec<StitchId>> = vec![Vec::new(); skel.nodes.len()];
    for course in &graph.courses {
        if skel.node(course.node).gauge == Gauge::Half {
            continue;
        }
        let occupied: BTreeSet<_> = course
            .stitches
            .iter()
            .map(|s| (graph.stitch(*s).x, graph.stitch(*s).side))
            .collect();
        for s in &course.stitches {
            let st = graph.stitch(*s);
            if st.op == PatternOp::Purl && occupied.contains(&(st.x, st.side.opposite())) {
                per_node[course.node.0 as usize].push(*s);
            }
        }
    }
    per_node
        .into_iter()
        .enumerate()
        .filter(|(_, ids)| !ids.is_empty())
        .map(|(k, ids)| {
            Diagnostic::warning(
                DiagnosticClass::ReverseConflict,
                format!(
                    "{}: {} purl stitches face occupied needles; consider half gauge",
                    skel.nodes[k].name,
                    ids.len()
                ),
            )
            .with_stitches(ids)
        })
        .collect()
}
