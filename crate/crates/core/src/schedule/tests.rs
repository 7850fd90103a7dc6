use std::collections::BTreeMap;

use super::*;
use crate::shapegen::{merge_interfaces, Shapes, Side};
use crate::skeleton::{evaluate_parameters, parse_skeleton};

fn build(doc: &str) -> (ResolvedSkeleton, Shapes) {
    let skel = evaluate_parameters(&parse_skeleton(doc).unwrap(), &BTreeMap::new()).unwrap();
    let shapes = merge_interfaces(&skel).unwrap();
    (skel, shapes)
}

const FLAT: &str = r#"{"version":1,"start":"s.bottom","nodes":[{"kind":"sheet","name":"s","length":4,"width":6}]}"#;

#[test]
fn chain_in_wale_order() {
    let (skel, sh) = build(
        r#"{"version":1,"start":"t.bottom","nodes":[{"kind":"sheet","name":"t","type":"tubular","length":5,"width":4}]}"#,
    );
    let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).unwrap();
    assert_eq!(s.order, vec![0, 1, 2, 3, 4]);
}

#[test]
fn boustrophedon_flat() {
    let (skel, mut sh) = build(FLAT);
    let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).unwrap();
    let (s2, trace) = trace_yarn(&mut sh.graph, &skel, &s, 2);
    assert!(trace.continuity.is_empty());
    assert_eq!(s2, s);
    let path = &trace.carriers[0];
    assert_eq!(path.len(), 24);
    for (r, chunk) in path.chunks(6).enumerate() {
        let xs: Vec<i32> = chunk.iter().map(|id| sh.graph.stitch(*id).x).collect();
        if r % 2 == 0 {
            assert_eq!(xs, vec![0, 1, 2, 3, 4, 5]);
        } else {
            assert_eq!(xs, vec![5, 4, 3, 2, 1, 0]);
        }
    }
}

#[test]
fn tube_spirals() {
    let (skel, mut sh) = build(
        r#"{"version":1,"start":"t.bottom","nodes":[{"kind":"sheet","name":"t","type":"tubular","length":3,"width":4}]}"#,
    );
    let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).unwrap();
    let (_, trace) = trace_yarn(&mut sh.graph, &skel, &s, 2);
    let path = &trace.carriers[0];
    // each course starts on the front at the same side as the previous
    for r in 0..2 {
        let last = sh.graph.stitch(path[r * 8 + 7]);
        let first = sh.graph.stitch(path[r * 8 + 8]);
        assert_eq!(last.side, Side::Back);
        assert_eq!(first.side, Side::Front);
        assert_eq!(last.x, first.x);
    }
}

#[test]
fn finger_jump_inserts_tucks() {
    let (skel, mut sh) = build(
        r#"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","type":"tubular","length":2,"width":6},
        {"kind":"sheet","name":"b","type":"tubular","length":2,"width":6},
        {"kind":"split","name":"m","degree":2,"folded":true}],
        "connections":[["a.top","m.branch[0]"],["b.top","m.branch[1]"]]}"#,
    );
    let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).unwrap();
    let (s2, trace) = trace_yarn(&mut sh.graph, &skel, &s, 2);
    // a ends at back x=0 and b starts at front x=6: ceil(6/2) - 1 = 2.
    // The merge course then jumps back from b to x=0: 2 more.
    assert_eq!(trace.continuity.len(), 4);
    assert_eq!(s2.len(), s.len() + 2);
    let first_jump = s2.order[2];
    assert_eq!(
        sh.graph.course(first_jump).kind,
        crate::shapegen::CourseKind::Continuity
    );
    assert_eq!(sh.graph.course(first_jump).stitches.len(), 2);
    let total = sh.graph.stitches.len();
    assert_eq!(trace.carriers[0].len(), total);
    let mut sorted = trace.carriers[0].clone();
    sorted.sort();
    assert_eq!(sorted, (0..total as u32).collect::<Vec<_>>());
}

#[test]
fn cycle_reported() {
    let (skel, mut sh) = build(FLAT);
    let top = sh.graph.courses[3].stitches[0];
    let bottom = sh.graph.courses[0].stitches[0];
    sh.graph.link(top, bottom);
    let err = schedule_courses(&sh.graph, &skel, &[]).unwrap_err();
    let ScheduleError::Cycle(names) = err;
    assert_eq!(names, vec!["s#0", "s#1", "s#2", "s#3"]);
}
