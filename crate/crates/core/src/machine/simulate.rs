use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::state::MachineState;
use super::{Instr, Loc, NeedleAction, PassKind, Program};
use crate::constants::MachineConstants;
use crate::diag::{Diagnostic, DiagnosticClass};
use crate::shapegen::{StitchGraph, StitchId};
use crate::skeleton::NodeId;

fn is_design(g: &StitchGraph, owner: StitchId) -> bool {
    g.stitches
        .get(owner as usize)
        .is_some_and(|s| !s.is_continuity())
}

/// Replays the program and reports loop pile-ups, yarn tension, reverse
/// stitches onto occupied needles, and knits closing over long miss runs.
pub fn simulate(program: &Program, g: &StitchGraph, consts: &MachineConstants) -> Vec<Diagnostic> {
    let mut state = MachineState::default();
    let mut out = Vec::new();
    let mut piled: HashSet<Loc> = HashSet::new();
    let mut runs: HashMap<Loc, Vec<StitchId>> = HashMap::new();
    let mut last_yarn: HashMap<u32, (StitchId, i32)> = HashMap::new();
    let mut reverse: BTreeMap<NodeId, (BTreeSet<StitchId>, BTreeSet<StitchId>)> = BTreeMap::new();

    for pass in &program.passes {
        for e in &pass.entries {
            let s = e.stitch;
            if pass.kind == PassKind::Actions {
                if let Some(s) = s {
                    let st = g.stitch(s);
                    match (e.action, e.instr) {
                        (Some(NeedleAction::Purl), Instr::Knit { loc, .. }) => {
                            let foreign: Vec<StitchId> = state
                                .stack(loc)
                                .iter()
                                .map(|t| t.0)
                                .filter(|o| *o != s && is_design(g, *o) && !st.parents.contains(o))
                                .collect();
                            if !foreign.is_empty() {
                                let r = reverse.entry(st.node).or_default();
                                r.0.insert(s);
                                r.1.extend(foreign);
                            }
                        }
                        (
                            Some(NeedleAction::Knit | NeedleAction::KickbackKnit),
                            Instr::Knit { loc, .. },
                        ) if st.children.len() == 2 && !state.is_empty_at(loc.across()) => {
                            let r = reverse.entry(st.node).or_default();
                            r.0.insert(s);
                            r.1.extend(
                                state
                                    .stack(loc.across())
                                    .iter()
                                    .map(|t| t.0)
                                    .filter(|o| is_design(g, *o)),
                            );
                        }
                        _ => {}
                    }
                    let yarn = match e.instr {
                        Instr::Knit { loc, carrier, .. }
                        | Instr::Tuck { loc, carrier, .. }
                        | Instr::Split {
                            from: loc, carrier, ..
                        } => Some((loc, carrier)),
                        _ => None,
                    };
                    if let Some((loc, carrier)) = yarn {
                        if let Some((prev, n)) = last_yarn.insert(carrier, (s, loc.needle)) {
                            let span = (loc.needle - n).unsigned_abs();
                            if span > consts.max_stretch {
                                out.push(
                                    Diagnostic::warning(
                                        DiagnosticClass::Tension,
                                        format!("yarn spans {span} needles between stitches {prev} and {s}"),
                                    )
                                    .with_stitches([s])
                                    .with_conflicts([prev]),
                                );
                            }
                        }
                    }
                }
            }
            match e.instr {
                Instr::Miss { loc, .. } => {
                    if let Some(s) = s {
                        runs.entry(loc).or_default().push(s);
                    }
                }
                Instr::Knit { loc, .. } | Instr::Split { from: loc, .. } => {
                    if let Some(run) = runs.remove(&loc) {
                        if run.len() > consts.max_miss {
                            out.push(
                                Diagnostic::warning(
                                    DiagnosticClass::MissCollapse,
                                    format!(
                                        "knit at {loc} closes over {} missed courses",
                                        run.len()
                                    ),
                                )
                                .with_stitches(s)
                                .with_conflicts(run),
                            );
                        }
                    }
                }
                Instr::Xfer { from, to } => {
                    if let Some(run) = runs.remove(&from) {
                        runs.entry(to).or_default().extend(run);
                    }
                }
                Instr::Drop(loc) => {
                    runs.remove(&loc);
                }
                _ => {}
            }
            state.apply(&e.instr, s);
            let touched = match e.instr {
                Instr::Knit { loc, .. } | Instr::Tuck { loc, .. } => Some(loc),
                Instr::Split { to, .. } | Instr::Xfer { to, .. } => Some(to),
                _ => None,
            };
            if let Some(loc) = touched {
                let stack = state.stack(loc);
                if stack.len() > consts.max_loops && piled.insert(loc) {
                    let owners: BTreeSet<StitchId> = stack
                        .iter()
                        .map(|t| t.0)
                        .filter(|o| (*o as usize) < g.stitches.len())
                        .collect();
                    out.push(
                        Diagnostic::warning(
                            DiagnosticClass::PileUp,
                            format!(
                                "{} loops on {loc}, more than {}",
                                stack.len(),
                                consts.max_loops
                            ),
                        )
                        .with_stitches(s)
                        .with_conflicts(owners),
                    );
                }
            }
        }
    }
    for (node, (stitches, conflicts)) in reverse {
        out.push(
            Diagnostic::warning(
                DiagnosticClass::ReverseConflict,
                format!(
                    "node {}: {} stitches need the opposite needle while it holds loops; consider half gauge",
                    node.0,
                    stitches.len()
                ),
            )
            .with_stitches(stitches)
            .with_conflicts(conflicts),
        );
    }
    out
}
