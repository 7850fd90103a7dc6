use super::*;
use crate::diag::DiagnosticClass;
use crate::pipeline::{compile, CompileInput, Compiled, PatternSource};

fn build(skeleton: &str, pattern: Option<&str>) -> Compiled {
    let mut input = CompileInput::new(skeleton);
    if let Some(p) = pattern {
        input.patterns.push(PatternSource {
            name: "p.pat".into(),
            text: p.into(),
        });
    }
    compile(&input).unwrap()
}

fn sheet(kind: &str, length: u32, width: u32) -> String {
    format!(
        r#"{{"version":1,"start":"s.bottom","nodes":[{{"kind":"sheet","name":"s","type":"{kind}","length":{length},"width":{width}}}]}}"#
    )
}

fn count(svg: &str, needle: &str) -> usize {
    svg.matches(needle).count()
}

#[test]
fn small_sheet_has_one_cell_per_stitch() {
    let c = build(&sheet("flat", 2, 2), None);
    let opts = RenderOptions {
        zoom: Zoom::Grid,
        ..RenderOptions::default()
    };
    let svg = render_svg(&c.bed, &c.graph, &opts);
    assert_eq!(count(&svg, "class=\"st "), 4);
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\""));
}

#[test]
fn rib_purls_get_their_own_class() {
    let c = build(
        &sheet("flat", 4, 6),
        Some("filter(wale % 2 == 1).apply(purl)"),
    );
    let svg = render_svg(&c.bed, &c.graph, &RenderOptions::default());
    assert_eq!(count(&svg, "class=\"st purl\""), 12);
    assert_eq!(count(&svg, "class=\"st knit\""), 12);
}

#[test]
fn miss_collapse_highlight_marks_exactly_the_conflicts() {
    let c = build(
        &sheet("flat", 10, 6),
        Some("courses(2..8).wales(2).apply(miss)"),
    );
    let d: Vec<_> = c
        .diagnostics
        .iter()
        .filter(|d| d.class == DiagnosticClass::MissCollapse)
        .collect();
    assert_eq!(d.len(), 1);
    let opts = RenderOptions {
        highlight: Some(Highlight::diagnostics(d.clone())),
        ..RenderOptions::default()
    };
    let svg = render_svg(&c.bed, &c.graph, &opts);
    let mut marked: Vec<u32> = svg
        .lines()
        .filter(|l| l.contains(" conflict\""))
        .map(|l| {
            let at = l.find("id=\"s").unwrap() + 5;
            l[at..].split('"').next().unwrap().parse().unwrap()
        })
        .collect();
    marked.sort_unstable();
    assert_eq!(marked, d[0].conflicts);
}

#[test]
fn faces_split_the_tube() {
    let c = build(&sheet("tubular", 3, 4), None);
    let front = render_svg(
        &c.bed,
        &c.graph,
        &RenderOptions {
            face: Face::Front,
            ..RenderOptions::default()
        },
    );
    let back = render_svg(
        &c.bed,
        &c.graph,
        &RenderOptions {
            face: Face::Back,
            ..RenderOptions::default()
        },
    );
    let both = render_svg(&c.bed, &c.graph, &RenderOptions::default());
    assert_eq!(count(&front, "class=\"st "), 12);
    assert_eq!(count(&back, "class=\"st "), 12);
    assert_eq!(count(&both, "class=\"st "), 24);
}

#[test]
fn compact_view_draws_compacted_steps() {
    let doc = r#"{"version":1,"start":"a.bottom","nodes":[
        {"kind":"sheet","name":"a","type":"tubular","length":2,"width":6},
        {"kind":"sheet","name":"b","type":"tubular","length":2,"width":6},
        {"kind":"split","name":"m","degree":2,"folded":true}],
        "connections":[["a.top","m.branch[0]"],["b.top","m.branch[1]"]]}"#;
    let c = build(doc, None);
    assert!(c.compact.steps.len() < c.bed.steps.len());
    let opts = RenderOptions {
        view: View::Compact,
        ..RenderOptions::default()
    };
    let svg = render_svg(&c.compact, &c.graph, &opts);
    assert!(svg.contains(&format!("compact view, {} steps", c.compact.steps.len())));
    let height: i64 = svg
        .split("height=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(height, 32 + 12 * c.compact.steps.len() as i64);
}

#[test]
fn rendering_is_repeatable() {
    let c = build(
        &sheet("tubular", 6, 5),
        Some("courses(1..4).wales(1).apply(purl)"),
    );
    let opts = RenderOptions {
        zoom: Zoom::Yarn,
        ..RenderOptions::default()
    };
    assert_eq!(
        render_svg(&c.bed, &c.graph, &opts),
        render_svg(&c.bed, &c.graph, &opts)
    );
    assert!(render_svg(&c.bed, &c.graph, &opts).contains("class=\"yarn\""));
}

#[test]
fn zero_iterations_keep_the_grid() {
    let c = build(&sheet("flat", 3, 4), None);
    let p = force_layout(&c.graph, 0, 1);
    for (id, pos) in p.ids.iter().zip(&p.positions) {
        let st = c.graph.stitch(*id);
        assert_eq!(pos[0], st.x as f64);
        assert_eq!(pos[1], st.row as f64 * COURSE_PITCH);
    }
    assert_eq!(p.energy.len(), 1);
}

#[test]
fn relaxation_moves_edges_toward_unit_length() {
    let c = build(&sheet("flat", 10, 10), None);
    let before = force_layout(&c.graph, 0, 3).edge_deviation();
    let p = force_layout(&c.graph, 500, 3);
    assert!(
        p.edge_deviation() < before,
        "{} vs {before}",
        p.edge_deviation()
    );
    for w in p.energy[10..].windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert_eq!(p, force_layout(&c.graph, 500, 3));
    assert!(p.to_csv().starts_with("stitch_id,x,y\n0,"));
}

#[test]
fn ribbed_cuff_pulls_in() {
    let plain = build(&sheet("tubular", 12, 10), None);
    let rib = build(
        &sheet("tubular", 12, 10),
        Some("filter(wale % 2 == 1).apply(purl)"),
    );
    let a = force_layout(&plain.graph, 300, 5).width();
    let b = force_layout(&rib.graph, 300, 5).width();
    assert!(b < a, "rib {b} vs plain {a}");
}
