use super::*;
use crate::constants::MachineConstants;
use crate::diag::DiagnosticClass;
use crate::pipeline::{compile, CompileInput, Compiled, PatternSource};

fn sheet(kind: &str, length: u32, width: u32) -> String {
    format!(
        r#"{{"version":1,"start":"s.bottom","nodes":[{{"kind":"sheet","name":"s","type":"{kind}","length":{length},"width":{width}}}]}}"#
    )
}

fn build(skeleton: &str, pattern: Option<&str>, consts: MachineConstants) -> Compiled {
    let mut input = CompileInput::new(skeleton);
    input.constants = consts;
    if let Some(p) = pattern {
        input.patterns.push(PatternSource {
            name: "p.pat".into(),
            text: p.into(),
        });
    }
    let c = compile(&input).unwrap();
    replay_validate(&c.code, input.constants.racking_bound)
        .unwrap_or_else(|v| panic!("{v}\n{}", c.code));
    c
}

const ONE_COURSE: &str = ";!knitout-2
;;Carriers: 1
;pass 0 caston 5
in 1
tuck + f0 1
tuck + f2 1
tuck - f3 1
tuck - f1 1
;pass 0 actions 4
knit + f0 1
knit + f1 1
knit + f2 1
knit + f3 1
;pass 0 castoff 17
rack -1
xfer f0 bs1
rack 0
xfer bs1 f1
knit + f1 1
rack -1
xfer f1 bs2
rack 0
xfer bs2 f2
knit + f2 1
rack -1
xfer f2 bs3
rack 0
xfer bs3 f3
knit + f3 1
drop f3
out 1
";

#[test]
fn single_course_golden() {
    let c = build(&sheet("flat", 1, 4), None, MachineConstants::default());
    assert_eq!(c.code, ONE_COURSE);
    let kinds: Vec<PassKind> = c.program.passes.iter().map(|p| p.kind).collect();
    assert_eq!(
        kinds,
        vec![PassKind::CastOn, PassKind::Actions, PassKind::CastOff]
    );
    assert!(c.diagnostics.is_empty());
}

#[test]
fn empty_program_is_headers_only() {
    let p = Program {
        carriers: vec![1],
        passes: Vec::new(),
    };
    assert_eq!(generate_code(&p), ";!knitout-2\n;;Carriers: 1\n");
}

#[test]
fn move_goes_through_the_other_bed() {
    let c = build(
        &sheet("flat", 3, 6),
        Some("courses(0).wales(2).apply(move(1))"),
        MachineConstants::default(),
    );
    let moved = c.graph.courses[0].stitches[2];
    let child = c.graph.stitch(moved).children[0];
    assert_eq!(c.bed.address(child).needle, c.bed.address(moved).needle + 1);
    let t = c
        .program
        .passes
        .iter()
        .find(|p| p.kind == PassKind::Transfers)
        .unwrap();
    let lines: Vec<Instr> = t.entries.iter().map(|e| e.instr).collect();
    let n = c.bed.address(moved).needle as i32;
    assert_eq!(
        lines,
        vec![
            Instr::Rack(-1),
            Instr::Xfer {
                from: Loc::needle(Side::Front, n),
                to: Loc::slider(Side::Back, n + 1)
            },
            Instr::Rack(0),
            Instr::Xfer {
                from: Loc::slider(Side::Back, n + 1),
                to: Loc::needle(Side::Front, n + 1)
            },
        ]
    );
}

#[test]
fn increases_use_split_knits() {
    let doc = r#"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":2,"width":6},
        {"kind":"sheet","name":"b","length":2,"width":8}],
        "connections":[["a.top","b.bottom"]]}"#;
    let c = build(doc, None, MachineConstants::default());
    let splits = c
        .program
        .instructions()
        .filter(|e| e.action == Some(NeedleAction::SplitKnit))
        .count();
    assert_eq!(splits, 2);
}

#[test]
fn racking_stays_within_bound() {
    let doc = r#"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","type":"tubular","length":3,"width":12},
        {"kind":"sheet","name":"b","type":"tubular","length":3,"width":6,"alignment":"left"}],
        "connections":[["a.top","b.bottom"]]}"#;
    let consts = MachineConstants {
        racking_bound: 2,
        ..MachineConstants::default()
    };
    let c = build(doc, None, consts);
    for e in c.program.instructions() {
        if let Instr::Rack(r) = e.instr {
            assert!(r.abs() <= 2);
        }
    }
}

#[test]
fn stacked_tucks_pile_up_once() {
    let consts = MachineConstants {
        max_loops: 3,
        ..MachineConstants::default()
    };
    let c = build(
        &sheet("flat", 8, 6),
        Some("courses(1..6).wales(3).apply(tuck)"),
        consts,
    );
    let piles: Vec<_> = c
        .diagnostics
        .iter()
        .filter(|d| d.class == DiagnosticClass::PileUp)
        .collect();
    assert_eq!(piles.len(), 1, "{:?}", c.diagnostics);
}

#[test]
fn long_miss_run_collapses() {
    let consts = MachineConstants {
        max_miss: 3,
        ..MachineConstants::default()
    };
    let c = build(
        &sheet("flat", 10, 6),
        Some("courses(2..7).wales(2).apply(miss)"),
        consts,
    );
    let found: Vec<_> = c
        .diagnostics
        .iter()
        .filter(|d| d.class == DiagnosticClass::MissCollapse)
        .collect();
    assert_eq!(found.len(), 1, "{:?}", c.diagnostics);
    assert_eq!(found[0].conflicts.len(), 5);
}

#[test]
fn purl_on_full_gauge_tube_conflicts() {
    let c = build(
        &sheet("tubular", 4, 5),
        Some("courses(1..3).wales(1).apply(purl)"),
        MachineConstants::default(),
    );
    let found: Vec<_> = c
        .diagnostics
        .iter()
        .filter(|d| d.class == DiagnosticClass::ReverseConflict)
        .collect();
    assert_eq!(found.len(), 1, "{:?}", c.diagnostics);
}

#[test]
fn replay_rejects_knit_on_empty_needle() {
    let text = ";!knitout-2\n;;Carriers: 1\n;pass 0 actions 2\nin 1\nknit + f3 1\n";
    let v = replay_validate(text, 4).unwrap_err();
    assert_eq!(v.line, 5);
}

#[test]
fn replay_rejects_carrier_left_in() {
    let text = ";!knitout-2\n;;Carriers: 1\n;pass 0 caston 2\nin 1\ntuck + f0 1\n;pass 0 castoff 1\ndrop f0\n";
    let v = replay_validate(text, 4).unwrap_err();
    assert!(v.message.contains("carrier in at end"), "{v}");
}
