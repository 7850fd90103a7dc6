use std::collections::BTreeMap;

use super::*;
use crate::diag::DiagnosticClass;

fn two_sheets(top_width: u32, bottom_width: u32) -> String {
    format!(
        r##"{{"version":1,"start":"a.bottom","nodes":[
            {{"kind":"sheet","name":"a","length":4,"width":{top_width}}},
            {{"kind":"sheet","name":"b","length":4,"width":{bottom_width}}}],
          "connections":[["a.top","b.bottom"]]}}"##
    )
}

fn resolve(doc: &str) -> ResolvedSkeleton {
    evaluate_parameters(&parse_skeleton(doc).unwrap(), &BTreeMap::new()).unwrap()
}

#[test]
fn minimal_sheet() {
    let g = parse_skeleton(
        r##"{"version":1,"start":"s.bottom","nodes":[{"kind":"sheet","name":"s","length":4,"width":6}]}"##,
    )
    .unwrap();
    assert_eq!(g.nodes.len(), 1);
    assert!(g.interfaces.iter().all(|i| i.state == InterfaceState::Open));
    assert_eq!(g.interfaces.len(), 2);
}

#[test]
fn dangling_and_duplicate() {
    let dangling = r##"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":4,"width":6}],
        "connections":[["a.top","ghost.bottom"]]}"##;
    assert!(matches!(
        parse_skeleton(dangling),
        Err(SkeletonError::DanglingReference(_))
    ));
    let dup = r##"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":4,"width":6},
        {"kind":"sheet","name":"a","length":4,"width":6}]}"##;
    assert!(matches!(
        parse_skeleton(dup),
        Err(SkeletonError::DuplicateNode(_))
    ));
    assert!(matches!(
        parse_skeleton("{\n  \"version\": 1,"),
        Err(SkeletonError::Syntax { line: 2, .. })
    ));
}

#[test]
fn parameter_expressions() {
    let doc = r##"{"version":1,"parameters":{"Len":20,"LenDelta":3},"start":"s.bottom",
        "nodes":[{"kind":"sheet","name":"s","length":"#Len + #LenDelta","width":"@length"}]}"##;
    let r = resolve(doc);
    match &r.nodes[0].shape {
        ResolvedShape::Sheet {
            length,
            course_widths,
            ..
        } => {
            assert_eq!(*length, 23);
            assert!(course_widths.iter().all(|w| *w == 23));
        }
        other => panic!("{other:?}"),
    }
    let g = parse_skeleton(&doc.replace("\"LenDelta\":3", "\"Other\":3")).unwrap();
    let err = evaluate_parameters(&g, &BTreeMap::from([("Len".to_string(), 20.0)])).unwrap_err();
    assert!(matches!(err, SkeletonError::UnboundParameter { ref name, .. } if name == "LenDelta"));
}

#[test]
fn overrides_win() {
    let doc = r##"{"version":1,"parameters":{"W":6},"start":"s.bottom",
        "nodes":[{"kind":"sheet","name":"s","length":2,"width":"#W"}]}"##;
    let g = parse_skeleton(doc).unwrap();
    let r = evaluate_parameters(&g, &BTreeMap::from([("W".to_string(), 9.0)])).unwrap();
    assert_eq!(r.interfaces[0].width, 9);
    assert_eq!(
        r,
        evaluate_parameters(&g, &BTreeMap::from([("W".to_string(), 9.0)])).unwrap()
    );
}

#[test]
fn cyclic_properties_rejected() {
    let doc = r##"{"version":1,"start":"s.bottom",
        "nodes":[{"kind":"sheet","name":"s","length":"@width","width":"@length"}]}"##;
    let err = evaluate_parameters(&parse_skeleton(doc).unwrap(), &BTreeMap::new()).unwrap_err();
    assert!(
        matches!(err, SkeletonError::CyclicReference { .. }),
        "{err}"
    );
}

#[test]
fn width_minimum() {
    let doc = r##"{"version":1,"start":"s.bottom",
        "nodes":[{"kind":"sheet","name":"s","type":"tubular","length":3,"width":1}]}"##;
    let err = evaluate_parameters(&parse_skeleton(doc).unwrap(), &BTreeMap::new()).unwrap_err();
    assert!(matches!(
        err,
        SkeletonError::WidthBelowMinimum { min: 2, .. }
    ));
}

#[test]
fn midpoint_sampling_rounds_half_up() {
    // t = 0.125, 0.375, 0.625, 0.875 over 4 -> 12
    let w = sample_widths(&[(0.0, 4.0), (1.0, 12.0)], 4, 1);
    assert_eq!(w, vec![5, 7, 9, 11]);
    assert_eq!(sample_widths(&[(0.0, 2.5), (1.0, 2.5)], 2, 1), vec![3, 3]);
}

#[test]
fn validation_reports_mismatch() {
    assert!(validate(&resolve(&two_sheets(10, 10))).is_empty());
    let diags = validate(&resolve(&two_sheets(10, 8)));
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].class, DiagnosticClass::WidthMismatch);
    assert!(diags[0].message.contains("a.top") && diags[0].message.contains("b.bottom"));
}

#[test]
fn folded_split_on_flat_base() {
    let doc = r##"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":2,"width":8},
        {"kind":"split","name":"s","degree":2,"folded":true}],
        "connections":[["a.top","s.base"]]}"##;
    let diags = validate(&resolve(doc));
    assert_eq!(diags.iter().filter(|d| d.is_error()).count(), 1);
    assert_eq!(diags[0].class, DiagnosticClass::FoldedFlatBase);
}

#[test]
fn type_mismatch_is_error() {
    let doc = r##"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":2,"width":8},
        {"kind":"sheet","name":"b","type":"tubular","length":2,"width":8}],
        "connections":[["a.top","b.bottom"]]}"##;
    let diags = validate(&resolve(doc));
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].class, DiagnosticClass::TypeMismatch);
}

#[test]
fn split_branches_partition_base() {
    let doc = r##"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","length":2,"width":12},
        {"kind":"split","name":"s","degree":2}],
        "connections":[["a.top","s.base"]]}"##;
    let r = resolve(doc);
    match &r.nodes[1].shape {
        ResolvedShape::Split { branches, .. } => assert_eq!(branches, &vec![(0, 6), (6, 6)]),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        allocate_branches(13, 3, None, SplitAlignment::Uniform, &[None, None, None]),
        vec![(0, 5), (5, 4), (9, 4)]
    );
}

#[test]
fn merge_orientation_from_branches() {
    let doc = r##"{"version":1,"start":"l.bottom","nodes":[
        {"kind":"sheet","name":"l","type":"tubular","length":3,"width":4},
        {"kind":"sheet","name":"r","type":"tubular","length":3,"width":4},
        {"kind":"split","name":"m","degree":2,"folded":true},
        {"kind":"sheet","name":"top","type":"tubular","length":3,"width":8}],
        "connections":[["l.top","m.branch[0]"],["r.top","m.branch1"],["m.base","top.bottom"]]}"##;
    let r = resolve(doc);
    assert_eq!(r.nodes[2].orientation, Orientation::Reverse);
    assert_eq!(
        r.interfaces[r.graph.find_interface("m.base").unwrap().0 as usize].width,
        8
    );
    assert!(validate(&r).is_empty());
}

#[test]
fn serialization_round_trip() {
    let doc = r##"{"version":1,"parameters":{"L":5},"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","type":"tubular","length":"#L * 2","width":[[0,4],[0.5,"#L"],[1,6]],"shaping":"center"},
        {"kind":"joint","name":"j","rows":3,"width":2,"layout":0.25},
        {"kind":"split","name":"s","degree":2,"layout":[0,0.5],"folded":true,"closed":["branch[1]"]},
        {"kind":"sheet","name":"c","type":"tubular","length":2,"width":3,"shaping":{"custom":"i"}}],
        "connections":[["a.top","j.bottom"],["j.top","s.base"],["s.branch[0]","c.bottom"]]}"##;
    let g = parse_skeleton(doc).unwrap();
    let again = parse_skeleton(&g.to_json()).unwrap();
    assert_eq!(g, again);
}
