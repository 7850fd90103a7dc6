//! End-to-end compile driver with per-stage timings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::constants::MachineConstants;
use crate::diag::Diagnostic;
use crate::layout::{
    build_bed, build_groups, compact_bed, optimize_layout, spread_continuity, LayoutGroup,
    Optimization, TimeNeedleBed,
};
use crate::machine::{generate_code, interpret, simulate, Program};
use crate::pattern::{
    check_gauge_conflicts, commit, develop_layers, DevelopReport, Layer, PatternContext,
};
use crate::schedule::{schedule_courses, trace_yarn, CourseSchedule, YarnTrace};
use crate::shapegen::{merge_interfaces, Shapes, StitchGraph};
use crate::skeleton::{evaluate_parameters, parse_skeleton, validate, ResolvedSkeleton};
use crate::Error;

/// A pattern file: a DSL program or a JSON drawing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSource {
    pub name: String,
    pub text: String,
}

impl PatternSource {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        Ok(PatternSource { name, text })
    }

    fn is_drawing(&self) -> bool {
        self.name.ends_with(".json") || self.text.trim_start().starts_with('{')
    }

    pub fn layers(&self) -> Result<Vec<Layer>, Error> {
        let wrap = |error| Error::Pattern {
            file: self.name.clone(),
            error,
        };
        if self.is_drawing() {
            Ok(vec![
                Layer::from_drawing(&self.name, &self.text).map_err(wrap)?
            ])
        } else {
            Layer::from_program(&self.name, &self.text).map_err(wrap)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompileInput {
    pub skeleton: String,
    /// Directory that image paths in patterns are relative to.
    pub base_dir: PathBuf,
    pub patterns: Vec<PatternSource>,
    pub overrides: BTreeMap<String, f64>,
    pub constants: MachineConstants,
}

impl CompileInput {
    pub fn new(skeleton: impl Into<String>) -> Self {
        CompileInput {
            skeleton: skeleton.into(),
            base_dir: PathBuf::from("."),
            patterns: Vec::new(),
            overrides: BTreeMap::new(),
            constants: MachineConstants::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Create,
    Schedule,
    Trace,
    Develop,
    Layout,
    Interpret,
    Simulate,
    Compact,
    Generate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub nodes: usize,
    pub patterns: usize,
    pub stitches: usize,
    /// Seconds per stage.
    pub timings: Vec<(Stage, f64)>,
}

impl Stats {
    pub fn total(&self) -> f64 {
        self.timings.iter().map(|(_, t)| t).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub skeleton: ResolvedSkeleton,
    pub graph: StitchGraph,
    pub schedule: CourseSchedule,
    pub trace: YarnTrace,
    pub develop: DevelopReport,
    pub groups: Vec<LayoutGroup>,
    pub optimization: Optimization,
    pub bed: TimeNeedleBed,
    pub compact: TimeNeedleBed,
    pub program: Program,
    pub code: String,
    pub diagnostics: Vec<Diagnostic>,
    pub stats: Stats,
}

struct Clock {
    timings: Vec<(Stage, f64)>,
    at: Instant,
}

impl Clock {
    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        let d: Duration = now - self.at;
        self.timings.push((stage, d.as_secs_f64()));
        self.at = now;
    }
}

fn resolve(input: &CompileInput) -> Result<(ResolvedSkeleton, Vec<Diagnostic>), Error> {
    let graph = parse_skeleton(&input.skeleton)?;
    let skel = evaluate_parameters(&graph, &input.overrides)?;
    let diags = validate(&skel);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(Error::Invalid(diags));
    }
    Ok((skel, diags))
}

fn develop(
    input: &CompileInput,
    skel: &ResolvedSkeleton,
    shapes: &Shapes,
) -> Result<(Vec<crate::pattern::PatternOp>, DevelopReport), Error> {
    let mut layers = Vec::new();
    for p in &input.patterns {
        layers.extend(p.layers()?);
    }
    let ctx = PatternContext::new(&shapes.graph, skel, &shapes.ports, &input.base_dir);
    Ok(develop_layers(
        &layers,
        &ctx,
        input.constants.max_move.max(0) as u32,
    )?)
}

/// Parses, validates and patterns the garment without laying it out, adding
/// the static gauge check.
pub fn check(input: &CompileInput) -> Result<Vec<Diagnostic>, Error> {
    let (skel, mut diags) = resolve(input)?;
    let mut shapes = merge_interfaces(&skel)?;
    let (ops, _) = develop(input, &skel, &shapes)?;
    let order: Vec<u32> = (0..shapes.graph.courses.len() as u32).collect();
    commit(&mut shapes.graph, &ops, &order);
    diags.extend(check_gauge_conflicts(&shapes.graph, &skel));
    Ok(diags)
}

/// Runs every stage and returns all intermediate products.
pub fn compile(input: &CompileInput) -> Result<Compiled, Error> {
    let consts = &input.constants;
    let mut clock = Clock {
        timings: Vec::new(),
        at: Instant::now(),
    };
    let (skel, mut diagnostics) = resolve(input)?;
    let mut shapes = merge_interfaces(&skel)?;
    clock.lap(Stage::Create);
    let schedule = schedule_courses(&shapes.graph, &skel, &shapes.node_courses)?;
    clock.lap(Stage::Schedule);
    let (schedule, trace) = trace_yarn(&mut shapes.graph, &skel, &schedule, consts.continuity_gap);
    clock.lap(Stage::Trace);
    let (ops, report) = develop(input, &skel, &shapes)?;
    commit(&mut shapes.graph, &ops, &schedule.order);
    clock.lap(Stage::Develop);
    let graph = shapes.graph;
    let mut groups = build_groups(&graph, &skel, &schedule, consts.bed_width)?;
    let optimization = optimize_layout(&graph, &mut groups, consts.bed_width)?;
    diagnostics.extend(optimization.diagnostics.iter().cloned());
    let mut bed = build_bed(&graph, &schedule, &groups, consts.bed_width);
    spread_continuity(&mut bed, &graph, &trace);
    clock.lap(Stage::Layout);
    let program = interpret(&graph, &schedule, &trace, &bed, consts)?;
    clock.lap(Stage::Interpret);
    diagnostics.extend(simulate(&program, &graph, consts));
    clock.lap(Stage::Simulate);
    let compact = compact_bed(&bed, &graph);
    clock.lap(Stage::Compact);
    let code = generate_code(&program);
    clock.lap(Stage::Generate);
    let stats = Stats {
        nodes: skel.nodes.len(),
        patterns: input.patterns.len(),
        stitches: graph.design_stitch_count(),
        timings: clock.timings,
    };
    Ok(Compiled {
        skeleton: skel,
        graph,
        schedule,
        trace,
        develop: report,
        groups,
        optimization,
        bed,
        compact,
        program,
        code,
        diagnostics,
        stats,
    })
}
