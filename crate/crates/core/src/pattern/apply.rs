use super::op::PatternOp;
use super::query::Selection;
use crate::shapegen::{StitchGraph, StitchId};

/// Lateral neighbor `k` positions along `s`'s child course, if it exists.
/// Flat courses stop at their borders; circular ones wrap.
fn retarget(g: &StitchGraph, s: StitchId, k: i32) -> Option<StitchId> {
    let child = g.stitch(*g.stitch(s).children.first()?);
    let course = g.course(child.course);
    let n = course.stitches.len() as i64;
    let t = child.index as i64 + k as i64;
    let t = if course.circular { t.rem_euclid(n) } else { t };
    (0..n).contains(&t).then(|| course.stitches[t as usize])
}

/// A stitch can miss or move when it has one regular wale in and out.
fn simple_wale(g: &StitchGraph, s: StitchId) -> bool {
    let st = g.stitch(s);
    st.is_regular()
        && st.parents.len() <= 1
        && st.children.len() == 1
        && g.stitch(st.children[0]).parents.len() == 1
}

pub fn applicable(g: &StitchGraph, s: StitchId, op: PatternOp, max_move: u32) -> bool {
    match op {
        PatternOp::Knit | PatternOp::Purl | PatternOp::Tuck => true,
        PatternOp::Miss => simple_wale(g, s),
        PatternOp::Move(k) | PatternOp::Cross { offset: k, .. } => {
            k != 0
                && k.unsigned_abs() <= max_move
                && simple_wale(g, s)
                && retarget(g, s, k).is_some()
        }
    }
}

/// Sets `op` on every applicable selected stitch; returns how many were set.
pub fn apply_op(
    g: &StitchGraph,
    ops: &mut [PatternOp],
    sel: &Selection,
    op: PatternOp,
    max_move: u32,
) -> usize {
    let mut count = 0;
    for s in sel.ids() {
        if applicable(g, s, op, max_move) {
            ops[s as usize] = op;
            count += 1;
        }
    }
    count
}

/// Pairs blocks of `2k` laterally adjacent selected stitches: the first `k`
/// cross over to the right, the next `k` under to the left.
pub fn apply_cross(
    g: &StitchGraph,
    ops: &mut [PatternOp],
    sel: &Selection,
    k: i32,
    max_move: u32,
) -> usize {
    let k = k as usize;
    let mut count = 0;
    for course in &g.courses {
        let mut run: Vec<StitchId> = Vec::new();
        let flush = |run: &mut Vec<StitchId>, ops: &mut [PatternOp], count: &mut usize| {
            for block in run.chunks_exact(2 * k) {
                let plan: Vec<(StitchId, PatternOp)> = block
                    .iter()
                    .enumerate()
                    .map(|(m, s)| {
                        let op = if m < k {
                            PatternOp::Cross {
                                offset: k as i32,
                                over: true,
                            }
                        } else {
                            PatternOp::Cross {
                                offset: -(k as i32),
                                over: false,
                            }
                        };
                        (*s, op)
                    })
                    .collect();
                if plan.iter().all(|(s, op)| applicable(g, *s, *op, max_move)) {
                    for (s, op) in plan {
                        ops[s as usize] = op;
                        *count += 1;
                    }
                }
            }
            run.clear();
        };
        for s in &course.stitches {
            if sel.contains(*s) {
                run.push(*s);
            } else {
                flush(&mut run, ops, &mut count);
            }
        }
        flush(&mut run, ops, &mut count);
    }
    count
}

/// Cross stitches whose partner is missing, by stitch id.
pub fn unpaired_crosses(g: &StitchGraph, ops: &[PatternOp]) -> Vec<StitchId> {
    let mut bad = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let PatternOp::Cross { offset, over } = *op else {
            continue;
        };
        let st = g.stitch(i as StitchId);
        let course = g.course(st.course);
        let n = course.stitches.len() as i64;
        let t = st.index as i64 + offset as i64;
        let t = if course.circular { t.rem_euclid(n) } else { t };
        let ok = (0..n).contains(&t)
            && ops[course.stitches[t as usize] as usize]
                == PatternOp::Cross {
                    offset: -offset,
                    over: !over,
                };
        if !ok {
            bad.push(i as StitchId);
        }
    }
    bad
}

fn replace(v: &mut [StitchId], from: StitchId, to: StitchId) {
    for x in v.iter_mut().filter(|x| **x == from) {
        *x = to;
    }
}

/// Writes ops into the graph and realizes their wale changes in course
/// order: misses hand their parents to their child, moves and crosses
/// retarget their child link.
pub fn realize(g: &mut StitchGraph, ops: &[PatternOp], course_order: &[u32]) {
    for (s, op) in g.stitches.iter_mut().zip(ops) {
        s.op = *op;
    }
    let plan: Vec<(StitchId, PatternOp, Option<StitchId>)> = course_order
        .iter()
        .flat_map(|c| g.course(*c).stitches.clone())
        .filter_map(|s| match ops[s as usize] {
            PatternOp::Miss => Some((s, PatternOp::Miss, None)),
            op @ (PatternOp::Move(k) | PatternOp::Cross { offset: k, .. }) => {
                Some((s, op, retarget(g, s, k)))
            }
            _ => None,
        })
        .collect();
    for (s, op, target) in plan {
        match op {
            PatternOp::Miss => {
                let Some(&child) = g.stitch(s).children.first() else {
                    continue;
                };
                let parents = std::mem::take(&mut g.stitch_mut(s).parents);
                g.stitch_mut(s).children.clear();
                g.stitch_mut(child).parents.retain(|p| *p != s);
                for p in parents {
                    replace(&mut g.stitch_mut(p).children, s, child);
                    g.stitch_mut(child).parents.push(p);
                }
            }
            _ => {
                let (Some(t), Some(&child)) = (target, g.stitch(s).children.first()) else {
                    continue;
                };
                replace(&mut g.stitch_mut(s).children, child, t);
                g.stitch_mut(child).parents.retain(|p| *p != s);
                g.stitch_mut(t).parents.push(s);
            }
        }
    }
}
