//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use knitskel::diag::{self, DiagnosticClass};
use knitskel::layout::{brute_force_stress, build_bed, build_groups, optimize_layout};
use knitskel::machine::replay_validate;
use knitskel::pattern::{
    apply_op, commit, develop_layers, parse_program, Grid, GridMode, PatternContext, PatternOp,
    Query, Selection,
};
use knitskel::pipeline::{compile, CompileInput, Compiled, PatternSource};
use knitskel::schedule::{schedule_courses, trace_yarn};
use knitskel::shapegen::{merge_interfaces, run_shaper, ShaperMapping, Shapes, Side};
use knitskel::skeleton::{evaluate_parameters, parse_skeleton, ResolvedSkeleton, Shaping};
use knitskel::viz::{render_svg, RenderOptions, View};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Clone)]
struct Case {
    name: &'static str,
    skeleton: &'static str,
    patterns: &'static [&'static str],
    overrides: &'static [(&'static str, f64)],
}

const fn case(
    name: &'static str,
    skeleton: &'static str,
    patterns: &'static [&'static str],
    overrides: &'static [(&'static str, f64)],
) -> Case {
    Case {
        name,
        skeleton,
        patterns,
        overrides,
    }
}

const CORPUS: &[Case] = &[
    case("flat", "flat.skel", &[], &[]),
    case("tube", "tube.skel", &[], &[]),
    case("sock", "sock.skel", &["sock.pat"], &[]),
    case(
        "glove",
        "glove.skel",
        &["glove_cuff.pat", "glove_lace.pat", "glove_cable.pat"],
        &[],
    ),
    case("scarf", "scarf.skel", &["scarf.pat"], &[]),
];

const DIAGNOSTIC: &[(Case, DiagnosticClass)] = &[
    (
        case("pileup", "diag/sheet.skel", &["diag/pileup.pat"], &[]),
        DiagnosticClass::PileUp,
    ),
    (
        case("tension", "diag/sheet.skel", &["diag/tension.pat"], &[]),
        DiagnosticClass::Tension,
    ),
    (
        case("reverse", "diag/tube.skel", &["diag/reverse.pat"], &[]),
        DiagnosticClass::ReverseConflict,
    ),
    (
        case("miss", "diag/sheet.skel", &["diag/miss.pat"], &[]),
        DiagnosticClass::MissCollapse,
    ),
];

const SCALE: &[Case] = &[
    case(
        "cat-32",
        "scale/cat.skel",
        &["scale/cat_face.pat", "scale/cat_border.pat"],
        &[("Size", 32.0)],
    ),
    case(
        "cat-64",
        "scale/cat.skel",
        &["scale/cat_face.pat", "scale/cat_border.pat"],
        &[("Size", 64.0)],
    ),
    case(
        "glove",
        "glove.skel",
        &["glove_cuff.pat", "glove_lace.pat", "glove_cable.pat"],
        &[],
    ),
    case(
        "cat-128",
        "scale/cat.skel",
        &["scale/cat_face.pat", "scale/cat_border.pat"],
        &[("Size", 128.0)],
    ),
    case("sock", "sock.skel", &["sock.pat"], &[("Leg", 122.0)]),
    case("noisy-scarf", "scale/noisy.skel", &["scale/noisy.pat"], &[]),
];

fn input(c: &Case) -> CompileInput {
    let path = fixtures().join(c.skeleton);
    let mut input = CompileInput::new(std::fs::read_to_string(&path).expect("fixture exists"));
    input.base_dir = path.parent().unwrap().to_path_buf();
    for p in c.patterns {
        input
            .patterns
            .push(PatternSource::load(&fixtures().join(p)).expect("pattern exists"));
    }
    input.overrides = c
        .overrides
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    input
}

fn build(c: &Case) -> Result<Compiled, String> {
    compile(&input(c)).map_err(|e| format!("{}: {e}", c.name))
}

fn shapes_of(doc: &str, overrides: &BTreeMap<String, f64>) -> (ResolvedSkeleton, Shapes) {
    let skel = evaluate_parameters(&parse_skeleton(doc).unwrap(), overrides).unwrap();
    let shapes = merge_interfaces(&skel).unwrap();
    (skel, shapes)
}

fn sheet(kind: &str, length: u32, width: u32, gauge: &str) -> String {
    format!(
        r#"{{"version":1,"start":"s.bottom","nodes":[{{"kind":"sheet","name":"s","type":"{kind}","length":{length},"width":{width},"gauge":"{gauge}"}}]}}"#
    )
}

// 1. shaper oracle

/// Every non-crossing mapping of `m` sources onto `n` targets where each
/// source feeds one or two consecutive targets, built target by target.
fn enumerate_mappings(m: usize, n: usize) -> Vec<ShaperMapping> {
    fn go(
        i: usize,
        j: usize,
        m: usize,
        n: usize,
        pairs: &mut Vec<(usize, usize)>,
        out: &mut Vec<ShaperMapping>,
    ) {
        if i == m {
            if j == n {
                out.push(ShaperMapping {
                    m,
                    n,
                    pairs: pairs.clone(),
                });
            }
            return;
        }
        for k in 1..=2 {
            if j + k > n || n - (j + k) > 2 * (m - i - 1) || n - (j + k) < m - i - 1 {
                continue;
            }
            for t in 0..k {
                pairs.push((i, j + t));
            }
            go(i + 1, j + k, m, n, pairs, out);
            pairs.truncate(pairs.len() - k);
        }
    }
    let mut out = Vec::new();
    go(0, 0, m, n, &mut Vec::new(), &mut out);
    out
}

fn gap_spread(m: usize, doubled: &[usize]) -> usize {
    if doubled.len() < 2 {
        return 0;
    }
    let mut gaps: Vec<usize> = doubled.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(m - doubled[doubled.len() - 1] + doubled[0]);
    gaps.iter().max().unwrap() - gaps.iter().min().unwrap()
}

fn center_offset(m: usize, doubled: &[usize]) -> Option<usize> {
    if doubled.is_empty() {
        return Some(0);
    }
    let contiguous = doubled.windows(2).all(|w| w[1] == w[0] + 1);
    // twice the block center against twice the course center
    let c2 = doubled[0] + doubled[doubled.len() - 1] + 1;
    contiguous.then(|| c2.abs_diff(m) / 2)
}

const ORACLE_LIMIT: usize = 16;

fn shaper_oracle() -> Outcome {
    let start = Instant::now();
    let mut exhaustive = 0;
    for m in 1..=60 {
        for n in m..=60.min(2 * m) {
            let d = n - m;
            let uni = run_shaper(&Shaping::Uniform, m, n).map_err(|e| e.to_string())?;
            let cen = run_shaper(&Shaping::Center, m, n).map_err(|e| e.to_string())?;
            uni.check().map_err(|e| format!("uniform {m}->{n}: {e}"))?;
            cen.check().map_err(|e| format!("center {m}->{n}: {e}"))?;
            ensure!(
                gap_spread(m, &uni.doubled()) <= 1,
                "uniform {m}->{n}: gaps {:?}",
                uni.doubled()
            );
            ensure!(
                uni.doubled().len() == d && cen.doubled().len() == d,
                "{m}->{n}: wrong increase count"
            );
            let off = center_offset(m, &cen.doubled());
            ensure!(
                off.is_some_and(|o| o <= 1),
                "center {m}->{n}: block {:?}",
                cen.doubled()
            );
            if m <= ORACLE_LIMIT {
                let all = enumerate_mappings(m, n);
                ensure!(
                    all.iter().all(|a| a.check().is_ok()),
                    "enumerator produced an invalid mapping"
                );
                ensure!(
                    all.contains(&uni) && all.contains(&cen),
                    "{m}->{n}: shaper output not enumerated"
                );
                let best = all
                    .iter()
                    .map(|a| gap_spread(m, &a.doubled()))
                    .min()
                    .unwrap();
                ensure!(
                    gap_spread(m, &uni.doubled()) == best,
                    "{m}->{n}: uniform gaps not minimal"
                );
                let best_off = all
                    .iter()
                    .filter_map(|a| center_offset(m, &a.doubled()))
                    .min()
                    .unwrap();
                ensure!(
                    off == Some(best_off),
                    "{m}->{n}: center block not most central"
                );
                exhaustive += all.len();
            }
        }
    }
    for m in 1..=60 {
        ensure!(
            run_shaper(&Shaping::Uniform, m, 2 * m + 1).is_err(),
            "{m}: more than doubling accepted"
        );
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(10), "took {t:?}");
    Ok(format!(
        "all M<=N<=min(60,2M); {exhaustive} mappings enumerated for M<={ORACLE_LIMIT}; {:.2}s",
        t.as_secs_f64()
    ))
}

// 2. identity

fn identity_shaping() -> Outcome {
    let modes = [
        Shaping::Uniform,
        Shaping::Center,
        Shaping::Left,
        Shaping::Right,
        Shaping::Sides,
    ];
    for m in 1..=60 {
        for s in &modes {
            let map = run_shaper(s, m, m).map_err(|e| e.to_string())?;
            ensure!(
                map.pairs == (0..m).map(|i| (i, i)).collect::<Vec<_>>(),
                "{s:?} {m}: not identity"
            );
        }
    }
    Ok("5 modes, M=1..60".into())
}

// 3. gauge support

fn support(c: &Compiled) -> BTreeSet<(Side, u32)> {
    c.bed
        .address
        .iter()
        .flatten()
        .map(|a| (a.side, a.needle))
        .collect()
}

fn gauge_support() -> Outcome {
    for w in 2..=50u32 {
        let half = compile(&CompileInput::new(sheet("tubular", 2, w, "half")))
            .map_err(|e| e.to_string())?;
        let full = compile(&CompileInput::new(sheet("tubular", 2, 2 * w, "full")))
            .map_err(|e| e.to_string())?;
        let needles = |s: &BTreeSet<(Side, u32)>| -> BTreeSet<u32> {
            let lo = s.iter().map(|(_, n)| *n).min().unwrap();
            s.iter().map(|(_, n)| n - lo).collect()
        };
        let (hs, fs) = (support(&half), support(&full));
        ensure!(needles(&hs) == needles(&fs), "width {w}: supports differ");
        ensure!(
            needles(&hs).len() == 2 * w as usize,
            "width {w}: support is not {} needles",
            2 * w
        );
        for (side, n) in &hs {
            ensure!(
                !hs.contains(&(side.opposite(), *n)),
                "width {w}: needle {n} used on both beds"
            );
        }
    }
    Ok("half gauge w vs full gauge 2w, w=2..50".into())
}

// 4. DSL algebra

fn random_base(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => {
            let a = rng.gen_range(0..30);
            format!("wales({a}..{})", rng.gen_range(a..=30))
        }
        1 => {
            let a = rng.gen_range(0..30);
            format!("courses({a}..{})", rng.gen_range(a..=30))
        }
        2 => format!(
            "filter((wale * {} + course * {}) % {} < {})",
            rng.gen_range(1..5),
            rng.gen_range(0..5),
            rng.gen_range(2..7),
            rng.gen_range(1..4)
        ),
        _ => format!(
            "filter(noise2(wale / 6, course / 6, {}) > 0)",
            rng.gen_range(0..100)
        ),
    }
}

/// Membership of a base query computed from coordinates alone.
fn base_mask(q: &str, c: i64, w: i64) -> Option<bool> {
    let nums = |s: &str| -> Vec<i64> {
        s.split(|ch: char| !ch.is_ascii_digit())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().unwrap())
            .collect()
    };
    if q.starts_with("wales") {
        let n = nums(q);
        Some(n[0] <= w && w < n[1])
    } else if q.starts_with("courses") {
        let n = nums(q);
        Some(n[0] <= c && c < n[1])
    } else if q.contains("noise2") {
        None
    } else {
        let n = nums(q);
        Some((w * n[0] + c * n[1]) % n[2] < n[3])
    }
}

fn dsl_algebra() -> Outcome {
    let (skel, sh) = shapes_of(&sheet("flat", 30, 30, "full"), &BTreeMap::new());
    let ctx = PatternContext::new(&sh.graph, &skel, &sh.ports, Path::new("."));
    let dom = ctx.domain(None);
    let eval = |text: &str| -> Result<Selection, String> {
        let layers =
            parse_program(&format!("{text}.apply(knit)")).map_err(|e| format!("{text}: {e}"))?;
        ctx.eval(&layers[0].statements[0].query, &dom, None)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut laws = 0;
    for _ in 0..1000 {
        let (a, b, c) = (
            random_base(&mut rng),
            random_base(&mut rng),
            random_base(&mut rng),
        );
        let (sa, sb, sc) = (eval(&a)?, eval(&b)?, eval(&c)?);
        for s in dom.ids() {
            let (cc, w) = ctx.coords(s);
            if let Some(m) = base_mask(&a, cc, w) {
                ensure!(
                    sa.contains(s) == m,
                    "{a}: stitch at ({cc}, {w}) disagrees with its mask"
                );
            }
        }
        let checks = [
            (format!("or({a}, {b})"), sa.union(&sb)),
            (format!("or({b}, {a})"), sa.union(&sb)),
            (format!("{a}.and({b})"), sa.intersect(&sb)),
            (format!("{b}.and({a})"), sa.intersect(&sb)),
            (format!("minus({a}, {b})"), sa.minus(&sb)),
            (format!("{a}.and(inverse({b}))"), sa.minus(&sb)),
            (format!("inverse(inverse({a}))"), sa.clone()),
            (
                format!("inverse(or({a}, {b}))"),
                dom.minus(&sa).intersect(&dom.minus(&sb)),
            ),
            (
                format!("or(inverse({a}), inverse({b}))"),
                dom.minus(&sa.intersect(&sb)),
            ),
            (
                format!("{a}.and(or({b}, {c}))"),
                sa.intersect(&sb).union(&sa.intersect(&sc)),
            ),
            (
                format!("or({a}, {b}.and({c}))"),
                sa.union(&sb).intersect(&sa.union(&sc)),
            ),
            (format!("or({a}, {a}.and({b}))"), sa.clone()),
            (format!("or(or({a}, {b}), {c})"), sa.union(&sb.union(&sc))),
        ];
        for (text, want) in checks {
            ensure!(eval(&text)? == want, "law broken: {text}");
            laws += 1;
        }
    }
    for _ in 0..50 {
        let (rows, cols) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let cells: Vec<Vec<Option<PatternOp>>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| rng.gen_bool(0.4).then_some(PatternOp::Purl))
                    .collect()
            })
            .collect();
        let grid = Grid {
            cells: cells.clone(),
        };
        let sel = ctx.eval(&Query::Grid(GridMode::Tile, grid, None), &dom, None)?;
        for s in dom.ids() {
            let (c, w) = ctx.coords(s);
            let want = cells[c.rem_euclid(rows as i64) as usize]
                [w.rem_euclid(cols as i64) as usize]
                .is_some();
            ensure!(
                sel.contains(s) == want,
                "tile {rows}x{cols} wrong at ({c}, {w})"
            );
        }
        let full: Vec<Vec<Option<PatternOp>>> = (0..30)
            .map(|_| {
                (0..30)
                    .map(|_| rng.gen_bool(0.5).then_some(PatternOp::Tuck))
                    .collect()
            })
            .collect();
        let sel = ctx.eval(
            &Query::Grid(
                GridMode::Stretch,
                Grid {
                    cells: full.clone(),
                },
                None,
            ),
            &dom,
            None,
        )?;
        for s in dom.ids() {
            let (c, w) = ctx.coords(s);
            ensure!(
                sel.contains(s) == full[c as usize][w as usize].is_some(),
                "stretch not identity at ({c}, {w})"
            );
        }
    }
    Ok(format!(
        "1000 random triples, {laws} law checks, 50 tile and stretch grids"
    ))
}

// 5. border semantics

fn move_border() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let w = rng.gen_range(2..40);
        for kind in ["flat", "tubular"] {
            let (skel, mut sh) = shapes_of(&sheet(kind, 3, w, "full"), &BTreeMap::new());
            let ctx = PatternContext::new(&sh.graph, &skel, &sh.ports, Path::new("."));
            let course = &sh.graph.courses[0];
            let last = *course.stitches.last().unwrap();
            let first_above = sh.graph.courses[1].stitches[0];
            let mut ops = vec![PatternOp::Knit; ctx.len()];
            let sel = Selection::from_ids(ctx.len(), [last]);
            let n = apply_op(&sh.graph, &mut ops, &sel, PatternOp::Move(1), 4);
            if kind == "flat" {
                ensure!(
                    n == 0 && ops.iter().all(|o| *o == PatternOp::Knit),
                    "flat width {w}: border move applied"
                );
            } else {
                ensure!(n == 1, "tube width {w}: border move not applied");
                let order: Vec<u32> = (0..sh.graph.courses.len() as u32).collect();
                commit(&mut sh.graph, &ops, &order);
                let children = &sh.graph.stitch(last).children;
                ensure!(
                    children.contains(&first_above),
                    "tube width {w}: move did not wrap to the first wale"
                );
            }
        }
    }
    Ok("50 widths, flat and tubular".into())
}

// 6. conservation

fn conservation() -> Outcome {
    let mut counts = Vec::new();
    for c in CORPUS {
        let inp = input(c);
        let graph = parse_skeleton(&inp.skeleton).map_err(|e| e.to_string())?;
        let skel = evaluate_parameters(&graph, &inp.overrides).map_err(|e| e.to_string())?;
        let mut sh = merge_interfaces(&skel).map_err(|e| e.to_string())?;
        let widths = |sh: &Shapes| {
            sh.graph
                .courses
                .iter()
                .map(|c| c.stitches.len())
                .collect::<Vec<_>>()
        };
        let (before, before_widths) = (sh.graph.stitches.len(), widths(&sh));
        let mut layers = Vec::new();
        for p in &inp.patterns {
            layers.extend(p.layers().map_err(|e| e.to_string())?);
        }
        let ctx = PatternContext::new(&sh.graph, &skel, &sh.ports, &inp.base_dir);
        let (ops, _) = develop_layers(&layers, &ctx, 4).map_err(|e| e.to_string())?;
        let order: Vec<u32> = (0..sh.graph.courses.len() as u32).collect();
        commit(&mut sh.graph, &ops, &order);
        ensure!(
            sh.graph.stitches.len() == before,
            "{}: {before} -> {}",
            c.name,
            sh.graph.stitches.len()
        );
        ensure!(
            widths(&sh) == before_widths,
            "{}: course widths changed",
            c.name
        );
        counts.push(format!("{}={before}", c.name));
    }
    Ok(counts.join(" "))
}

// 7. schedule soundness

const FINGERS: &[(&str, &str)] = &[
    ("thumb", "web"),
    ("index", "knuckles"),
    ("middle", "knuckles"),
    ("ring", "knuckles"),
    ("pinky", "knuckles"),
];

fn rename(doc: &str, names: &BTreeMap<String, String>) -> String {
    let mut v: serde_json::Value = serde_json::from_str(doc).unwrap();
    let path = |s: &str| -> String {
        let (node, itf) = s.split_once('.').unwrap();
        format!("{}.{itf}", names[node])
    };
    for n in v["nodes"].as_array_mut().unwrap() {
        let old = n["name"].as_str().unwrap().to_string();
        n["name"] = names[&old].clone().into();
    }
    for c in v["connections"].as_array_mut().unwrap() {
        for end in c.as_array_mut().unwrap() {
            *end = path(end.as_str().unwrap()).into();
        }
    }
    v["start"] = path(v["start"].as_str().unwrap()).into();
    v.to_string()
}

fn schedule_soundness() -> Outcome {
    let doc = std::fs::read_to_string(fixtures().join("glove.skel")).unwrap();
    let originals: Vec<String> = parse_skeleton(&doc)
        .unwrap()
        .nodes
        .iter()
        .map(|n| n.name.clone())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut orders = BTreeSet::new();
    for _ in 0..100 {
        let mut fresh: Vec<String> = (0..originals.len())
            .map(|k| format!("n{k}_{}", rng.gen_range(0..1000)))
            .collect();
        fresh.shuffle(&mut rng);
        let names: BTreeMap<String, String> = originals.iter().cloned().zip(fresh).collect();
        let (skel, sh) = shapes_of(&rename(&doc, &names), &BTreeMap::new());
        let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).map_err(|e| e.to_string())?;
        let node = |name: &str| skel.graph.node_by_name(&names[name]).unwrap().id.0 as usize;
        let times = |k: usize| sh.node_courses[k].iter().map(|c| s.time[*c as usize]);
        let palm_start = times(node("palm")).min().unwrap();
        for (finger, merge) in FINGERS {
            let done = times(node(finger)).max().unwrap();
            let merged = times(node(merge)).min().unwrap();
            ensure!(
                done < merged && done < palm_start,
                "{finger} knitted after its merge"
            );
        }
        let order: Vec<usize> = sh
            .node_courses
            .iter()
            .map(|cs| s.time[cs[0] as usize] as usize)
            .collect();
        orders.insert(order);
    }
    Ok(format!(
        "100 renamings, {} distinct node orders",
        orders.len()
    ))
}

// 8. layout optimality

fn layout_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases = 0;
    for _ in 0..120 {
        let mut w: Vec<u32> = (0..3).map(|_| rng.gen_range(3..9)).collect();
        // neighbouring widths stay within a factor of two
        for k in 1..3 {
            w[k] = w[k].clamp(w[k - 1].div_ceil(2), 2 * w[k - 1]);
        }
        let bed = rng.gen_range(18..=32);
        let doc = match rng.gen_range(0..3) {
            0 => format!(
                r#"{{"version":1,"start":"a.bottom","nodes":[
                {{"kind":"sheet","name":"a","length":2,"width":{}}},
                {{"kind":"sheet","name":"b","length":3,"width":{}}}],
                "connections":[["a.top","b.bottom"]]}}"#,
                w[0], w[1]
            ),
            1 => format!(
                r#"{{"version":1,"start":"a.bottom","nodes":[
                {{"kind":"sheet","name":"a","length":2,"width":{}}},
                {{"kind":"sheet","name":"b","length":3,"width":{}}},
                {{"kind":"sheet","name":"c","length":2,"width":{}}}],
                "connections":[["a.top","b.bottom"],["b.top","c.bottom"]]}}"#,
                w[0], w[1], w[2]
            ),
            _ => format!(
                r#"{{"version":1,"start":"s.base","nodes":[
                {{"kind":"split","name":"s","degree":2}},
                {{"kind":"sheet","name":"b","length":3,"width":{}}},
                {{"kind":"sheet","name":"c","length":2,"width":{}}}],
                "connections":[["s.branch[0]","b.bottom"],["s.branch[1]","c.bottom"]]}}"#,
                w[1], w[2]
            ),
        };
        let (skel, mut sh) = shapes_of(&doc, &BTreeMap::new());
        let s = schedule_courses(&sh.graph, &skel, &sh.node_courses).map_err(|e| e.to_string())?;
        let (schedule, _) = trace_yarn(&mut sh.graph, &skel, &s, 2);
        let mut groups =
            build_groups(&sh.graph, &skel, &schedule, bed).map_err(|e| e.to_string())?;
        ensure!((2..=3).contains(&groups.len()), "{} groups", groups.len());
        let opt = match optimize_layout(&sh.graph, &mut groups, bed) {
            Ok(o) => o,
            Err(_) => continue,
        };
        ensure!(
            opt.stress_trace.windows(2).all(|p| p[1] <= p[0]),
            "stress rose: {:?}",
            opt.stress_trace
        );
        let best = brute_force_stress(&sh.graph, &groups, bed);
        ensure!(
            Some(opt.stress()) == best,
            "descent {} vs optimum {best:?} on bed {bed}: {doc}",
            opt.stress()
        );
        let laid = build_bed(&sh.graph, &schedule, &groups, bed);
        ensure!(laid.steps.len() == schedule.order.len(), "bed lost steps");
        cases += 1;
    }
    ensure!(cases >= 100, "only {cases} feasible fixtures");
    Ok(format!(
        "{cases} fixtures with 2-3 groups on beds of 18..32 needles"
    ))
}

// 9. replay

fn all_cases() -> Vec<Case> {
    CORPUS
        .iter()
        .cloned()
        .chain(DIAGNOSTIC.iter().map(|(c, _)| c.clone()))
        .chain(SCALE.iter().cloned())
        .collect()
}

fn replay() -> Outcome {
    let mut streams = Vec::new();
    for c in all_cases() {
        let compiled = build(&c)?;
        replay_validate(&compiled.code, 4).map_err(|v| format!("{}: {v}", c.name))?;
        streams.push(compiled.code);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut caught, total) = (0, 500);
    for _ in 0..total {
        let code = streams.choose(&mut rng).unwrap();
        let lines: Vec<&str> = code.lines().collect();
        let candidates: Vec<usize> = (0..lines.len())
            .filter(|k| lines[*k].starts_with("xfer ") || lines[*k].starts_with("knit "))
            .collect();
        let drop = *candidates.choose(&mut rng).unwrap();
        let mutated: String = lines
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != drop)
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        if replay_validate(&mutated, 4).is_err() {
            caught += 1;
        }
    }
    let rate = caught as f64 / total as f64;
    ensure!(rate >= 0.99, "caught {caught}/{total}");
    Ok(format!(
        "{} streams valid; {caught}/{total} deletions caught",
        streams.len()
    ))
}

// 10. diagnostics

fn diagnostics() -> Outcome {
    let mut found = Vec::new();
    for (c, class) in DIAGNOSTIC {
        let a = build(c)?;
        let b = build(c)?;
        ensure!(
            a.diagnostics == b.diagnostics,
            "{}: diagnostics differ between runs",
            c.name
        );
        let hits: Vec<_> = a.diagnostics.iter().filter(|d| d.class == *class).collect();
        ensure!(
            hits.len() == 1,
            "{}: {} {class:?} diagnostics: {:?}",
            c.name,
            hits.len(),
            a.diagnostics
        );
        ensure!(
            !hits[0].conflicts.is_empty(),
            "{}: empty conflict set",
            c.name
        );
        found.push(format!("{class:?}"));
    }
    Ok(found.join(", "))
}

// 11. scale

fn time_compile(c: &Case) -> Result<(usize, f64), String> {
    let inp = input(c);
    let mut best = f64::INFINITY;
    let mut stitches = 0;
    for _ in 0..3 {
        let t = Instant::now();
        let out = compile(&inp).map_err(|e| e.to_string())?;
        best = best.min(t.elapsed().as_secs_f64());
        stitches = out.stats.stitches;
    }
    Ok((stitches, best))
}

fn scale() -> Outcome {
    let glove = &CORPUS[3];
    let t = Instant::now();
    let c = build(glove)?;
    let took = t.elapsed();
    let s = &c.stats;
    ensure!(
        (s.nodes, s.patterns, s.stitches) == (10, 3, 5030),
        "glove is {}/{}/{}",
        s.nodes,
        s.patterns,
        s.stitches
    );
    ensure!(took < Duration::from_secs(5), "glove took {took:?}");
    let mut pts = Vec::new();
    for c in SCALE {
        let (n, secs) = time_compile(c)?;
        pts.push((c.name, n, secs));
    }
    let (lo, hi) = (
        pts.iter().map(|p| p.1).min().unwrap(),
        pts.iter().map(|p| p.1).max().unwrap(),
    );
    ensure!(
        lo <= 1100 && hi >= 85000,
        "corpus spans {lo}..{hi} stitches"
    );
    let xs: Vec<f64> = pts.iter().map(|p| (p.1 as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.2.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = cov / var;
    let table: Vec<String> = pts
        .iter()
        .map(|(name, n, t)| format!("{name}:{n}@{:.1}ms", t * 1e3))
        .collect();
    ensure!(
        (0.8..=1.3).contains(&slope),
        "slope {slope:.3} ({})",
        table.join(" ")
    );
    Ok(format!(
        "glove 10/3/5030 in {:.0}ms; slope {slope:.3} over {}",
        took.as_secs_f64() * 1e3,
        table.join(" ")
    ))
}

// 12. determinism

fn artifacts(c: &Case) -> Result<(String, String, String, String), String> {
    let out = build(c)?;
    let full = render_svg(&out.bed, &out.graph, &RenderOptions::default());
    let compact = render_svg(
        &out.compact,
        &out.graph,
        &RenderOptions {
            view: View::Compact,
            ..RenderOptions::default()
        },
    );
    Ok((out.code, diag::to_json(&out.diagnostics), full, compact))
}

fn determinism() -> Outcome {
    let cases = all_cases();
    let first: Vec<_> = cases.iter().map(artifacts).collect::<Result<_, _>>()?;
    let second: Vec<_> = cases.iter().map(artifacts).collect::<Result<_, _>>()?;
    for (c, (a, b)) in cases.iter().zip(first.iter().zip(&second)) {
        ensure!(a.0 == b.0, "{}: instruction text differs", c.name);
        ensure!(a.1 == b.1, "{}: diagnostics differ", c.name);
        ensure!(a.2 == b.2 && a.3 == b.3, "{}: svg differs", c.name);
    }
    let bytes: usize = first
        .iter()
        .map(|a| a.0.len() + a.1.len() + a.2.len() + a.3.len())
        .sum();
    Ok(format!("{} fixtures, {bytes} bytes compared", cases.len()))
}

fn main() {
    let criteria: &[Criterion] = &[
        ("shaper oracle", shaper_oracle),
        ("identity shaping", identity_shaping),
        ("gauge support", gauge_support),
        ("dsl algebra", dsl_algebra),
        ("border and cyclic moves", move_border),
        ("stitch conservation", conservation),
        ("schedule soundness", schedule_soundness),
        ("layout optimality", layout_optimality),
        ("replay validation", replay),
        ("diagnostic triggers", diagnostics),
        ("scale and performance", scale),
        ("determinism", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
