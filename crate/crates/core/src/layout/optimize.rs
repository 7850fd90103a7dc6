use super::{LayoutError, LayoutGroup};
use crate::diag::{Diagnostic, DiagnosticClass};
use crate::shapegen::{StitchGraph, StitchId};

const MAX_SWEEPS: usize = 100;
/// Block moves try every subset up to this many groups, else only prefixes
/// and suffixes in knitting order.
const SUBSET_LIMIT: usize = 6;

/// Result of the descent.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    /// Stress after initialization and after every accepted move.
    pub stress_trace: Vec<i64>,
    pub sweeps: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl Optimization {
    pub fn stress(&self) -> i64 {
        self.stress_trace.last().copied().unwrap_or(0)
    }
}

struct Problem<'a> {
    groups: &'a [LayoutGroup],
    bed: i32,
    /// Group and relative needle per flip state of every placed stitch.
    slot: Vec<Option<(usize, [i32; 2])>>,
    /// Cross-group stitch pairs.
    pairs: Vec<(StitchId, StitchId)>,
    /// Pair indices touching each group.
    touching: Vec<Vec<usize>>,
    /// Groups in knitting order.
    order: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Place {
    offset: i32,
    flipped: bool,
}

impl<'a> Problem<'a> {
    fn new(g: &StitchGraph, groups: &'a [LayoutGroup], bed: u32) -> Self {
        let mut slot = vec![None; g.stitches.len()];
        for (k, grp) in groups.iter().enumerate() {
            for &(s, x, side) in &grp.members {
                if !g.stitch(s).is_continuity() {
                    slot[s as usize] = Some((
                        k,
                        [
                            grp.relative(x, side, false).1,
                            grp.relative(x, side, true).1,
                        ],
                    ));
                }
            }
        }
        let group_of = |s: StitchId| slot[s as usize].map(|(k, _)| k);
        let mut pairs = Vec::new();
        for (a, b) in g.wale_links() {
            if let (Some(ga), Some(gb)) = (group_of(a), group_of(b)) {
                if ga != gb {
                    pairs.push((a, b));
                }
            }
        }
        for st in &g.stitches {
            if st.is_continuity() {
                continue;
            }
            let mut next = st.next;
            while let Some(n) = next.filter(|n| g.stitch(*n).is_continuity()) {
                next = g.stitch(n).next;
            }
            if let Some(n) = next {
                if let (Some(ga), Some(gb)) = (group_of(st.id), group_of(n)) {
                    if ga != gb {
                        pairs.push((st.id, n));
                    }
                }
            }
        }
        let mut touching = vec![Vec::new(); groups.len()];
        for (i, (a, b)) in pairs.iter().enumerate() {
            touching[group_of(*a).unwrap()].push(i);
            touching[group_of(*b).unwrap()].push(i);
        }
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|k| (groups[*k].span_time.0, *k));
        Problem {
            groups,
            bed: bed as i32,
            slot,
            pairs,
            touching,
            order,
        }
    }

    fn needle(&self, place: &[Place], s: StitchId) -> i32 {
        let (k, rel) = self.slot[s as usize].expect("paired stitches are placed");
        place[k].offset + rel[place[k].flipped as usize]
    }

    fn stress(&self, place: &[Place]) -> i64 {
        self.pairs
            .iter()
            .map(|(a, b)| {
                let d = (self.needle(place, *a) - self.needle(place, *b)) as i64;
                d * d
            })
            .sum()
    }

    fn in_bounds(&self, k: usize, offset: i32) -> bool {
        offset >= 0 && offset + self.groups[k].span() <= self.bed
    }

    /// Whether groups `a` and `b` share a needle at the same time.
    fn collide(&self, a: usize, pa: Place, b: usize, pb: Place) -> bool {
        let (ga, gb) = (&self.groups[a], &self.groups[b]);
        if ga.span_time.1 <= gb.span_time.0 || gb.span_time.1 <= ga.span_time.0 {
            return false;
        }
        if pa.offset + ga.span() <= pb.offset || pb.offset + gb.span() <= pa.offset {
            return false;
        }
        let cb = &gb.cells[pb.flipped as usize];
        for ((side, rel), iva) in &ga.cells[pa.flipped as usize] {
            let key = (*side, rel + pa.offset - pb.offset);
            if let Ok(i) = cb.binary_search_by(|(k, _)| k.cmp(&key)) {
                if overlaps(iva, &cb[i].1) {
                    return true;
                }
            }
        }
        false
    }

    /// Whether moving the groups in `moved` to their entries in `place`
    /// keeps them clear of every other group.
    fn feasible(&self, place: &[Place], moved: &[usize]) -> bool {
        moved.iter().all(|&a| {
            self.in_bounds(a, place[a].offset)
                && (0..self.groups.len())
                    .filter(|b| !moved.contains(b))
                    .all(|b| !self.collide(a, place[a], b, place[b]))
        })
    }

    /// Coefficients `(n, Σc, Σc²)` of the pair stress `Σ (o + c)²` of group
    /// `k` at offset `o`, with `c` its pair distances at offset 0.
    fn single_terms(&self, place: &[Place], k: usize, flipped: bool) -> (i64, i64, i64) {
        let (mut n, mut s1, mut s2) = (0i64, 0i64, 0i64);
        for &i in &self.touching[k] {
            let (a, b) = self.pairs[i];
            let (mine, other) = if self.slot[a as usize].unwrap().0 == k {
                (a, b)
            } else {
                (b, a)
            };
            let rel = self.slot[mine as usize].unwrap().1[flipped as usize];
            let c = (rel - self.needle(place, other)) as i64;
            n += 1;
            s1 += c;
            s2 += c * c;
        }
        (n, s1, s2)
    }

    /// Best strictly improving offset and flip for one group.
    fn improve_single(&self, place: &mut [Place], k: usize) -> bool {
        let current = {
            let (n, s1, s2) = self.single_terms(place, k, place[k].flipped);
            let o = place[k].offset as i64;
            n * o * o + 2 * o * s1 + s2
        };
        let mut cands = Vec::new();
        for flipped in [false, true] {
            let (n, s1, s2) = self.single_terms(place, k, flipped);
            for o in 0..=(self.bed - self.groups[k].span()) {
                let oo = o as i64;
                let cost = n * oo * oo + 2 * oo * s1 + s2;
                if cost < current {
                    cands.push((cost, (o - place[k].offset).abs(), o, flipped));
                }
            }
        }
        cands.sort_unstable();
        let saved = place[k];
        for (_, _, offset, flipped) in cands {
            place[k] = Place { offset, flipped };
            if self.feasible(place, &[k]) {
                return true;
            }
        }
        place[k] = saved;
        false
    }

    /// Best strictly improving common shift of a block of groups.
    fn improve_block(&self, place: &mut [Place], block: &[usize]) -> bool {
        let (mut n, mut s1) = (0i64, 0i64);
        for (a, b) in &self.pairs {
            let ina = block.contains(&self.slot[*a as usize].unwrap().0);
            let inb = block.contains(&self.slot[*b as usize].unwrap().0);
            if ina != inb {
                let c = (self.needle(place, *a) - self.needle(place, *b)) as i64;
                let c = if ina { c } else { -c };
                n += 1;
                s1 += c;
            }
        }
        if n == 0 {
            return false;
        }
        let lo = block.iter().map(|k| -place[*k].offset).max().unwrap();
        let hi = block
            .iter()
            .map(|k| self.bed - self.groups[*k].span() - place[*k].offset)
            .min()
            .unwrap();
        let mut cands: Vec<(i64, i32)> = (lo..=hi)
            .filter(|d| *d != 0)
            .map(|d| (n * (d as i64) * (d as i64) + 2 * (d as i64) * s1, d))
            .filter(|(gain, _)| *gain < 0)
            .collect();
        cands.sort_unstable_by_key(|(gain, d)| (*gain, d.abs(), *d));
        let saved: Vec<Place> = place.to_vec();
        for (_, d) in cands {
            for k in block {
                place[*k].offset = saved[*k].offset + d;
            }
            if self.feasible(place, block) {
                return true;
            }
        }
        place.copy_from_slice(&saved);
        false
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.groups.len();
        if n <= SUBSET_LIMIT {
            (1..(1u32 << n) - 1)
                .map(|mask| (0..n).filter(|k| mask & (1 << k) != 0).collect())
                .collect()
        } else {
            let mut out = Vec::new();
            for cut in 1..n {
                out.push(self.order[..cut].to_vec());
                out.push(self.order[cut..].to_vec());
            }
            out
        }
    }

    /// Places groups in knitting order, aligning each one's paired stitches
    /// with their already placed partners.
    fn initialize(&self) -> Result<Vec<Place>, LayoutError> {
        let mut place = vec![
            Place {
                offset: 0,
                flipped: false
            };
            self.groups.len()
        ];
        let mut placed: Vec<usize> = Vec::new();
        for &k in &self.order {
            let span = self.groups[k].span();
            let mut sum = 0i64;
            let mut count = 0i64;
            for &i in &self.touching[k] {
                let (a, b) = self.pairs[i];
                let (mine, other) = if self.slot[a as usize].unwrap().0 == k {
                    (a, b)
                } else {
                    (b, a)
                };
                if placed.contains(&self.slot[other as usize].unwrap().0) {
                    sum += (self.needle(&place, other) - self.slot[mine as usize].unwrap().1[0])
                        as i64;
                    count += 1;
                }
            }
            let want = if count > 0 {
                (sum as f64 / count as f64).round() as i32
            } else if placed.is_empty() {
                (self.bed - span) / 2
            } else {
                placed
                    .iter()
                    .map(|j| place[*j].offset + self.groups[*j].span())
                    .max()
                    .unwrap()
            };
            let want = want.clamp(0, (self.bed - span).max(0));
            let mut offsets: Vec<i32> = (0..=(self.bed - span)).collect();
            offsets.sort_by_key(|o| ((o - want).abs(), *o));
            let found = offsets.into_iter().find(|&o| {
                place[k] = Place {
                    offset: o,
                    flipped: false,
                };
                placed
                    .iter()
                    .all(|&j| !self.collide(k, place[k], j, place[j]))
            });
            if found.is_none() {
                let needles = self.groups.iter().map(|g| g.span() as u32).sum();
                return Err(LayoutError::BedOverflow {
                    needles,
                    bed: self.bed as u32,
                });
            }
            placed.push(k);
        }
        Ok(place)
    }
}

fn overlaps(a: &[(u32, u32)], b: &[(u32, u32)]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].0 < b[j].1 && b[j].0 < a[i].1 {
            return true;
        }
        if a[i].1 <= b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    false
}

/// Coordinate descent over group offsets and flips minimizing the squared
/// needle distance of cross-group wale and course pairs. Writes the final
/// placement into `groups`, shifted so the leftmost group starts at needle 0.
pub fn optimize_layout(
    g: &StitchGraph,
    groups: &mut [LayoutGroup],
    bed_width: u32,
) -> Result<Optimization, LayoutError> {
    let (place, trace, sweeps) = {
        let p = Problem::new(g, groups, bed_width);
        let mut place = p.initialize()?;
        let mut trace = vec![p.stress(&place)];
        let blocks = p.blocks();
        let mut sweeps = 0;
        loop {
            if sweeps == MAX_SWEEPS {
                break;
            }
            sweeps += 1;
            let mut changed = false;
            for &k in &p.order {
                if p.improve_single(&mut place, k) {
                    trace.push(p.stress(&place));
                    changed = true;
                }
            }
            for b in &blocks {
                if p.improve_block(&mut place, b) {
                    trace.push(p.stress(&place));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (place, trace, sweeps)
    };
    let shift = place.iter().map(|p| p.offset).min().unwrap_or(0);
    for (grp, p) in groups.iter_mut().zip(&place) {
        grp.offset = p.offset - shift;
        grp.flipped = p.flipped;
    }
    let mut diagnostics = Vec::new();
    if sweeps == MAX_SWEEPS {
        diagnostics.push(Diagnostic::warning(
            DiagnosticClass::Overflow,
            format!("layout descent stopped after {MAX_SWEEPS} sweeps"),
        ));
    }
    Ok(Optimization {
        stress_trace: trace,
        sweeps,
        diagnostics,
    })
}

/// Lowest stress over every feasible placement, by exhaustive enumeration.
/// Only usable for a handful of groups on a narrow bed.
pub fn brute_force_stress(g: &StitchGraph, groups: &[LayoutGroup], bed_width: u32) -> Option<i64> {
    let p = Problem::new(g, groups, bed_width);
    let mut place = vec![
        Place {
            offset: 0,
            flipped: false
        };
        groups.len()
    ];
    let mut best = None;
    fn rec(p: &Problem, place: &mut Vec<Place>, k: usize, best: &mut Option<i64>) {
        if k == place.len() {
            let s = p.stress(place);
            if best.is_none_or(|b| s < b) {
                *best = Some(s);
            }
            return;
        }
        for flipped in [false, true] {
            for offset in 0..=(p.bed - p.groups[k].span()) {
                place[k] = Place { offset, flipped };
                if (0..k).all(|j| !p.collide(k, place[k], j, place[j])) {
                    rec(p, place, k + 1, best);
                }
            }
        }
    }
    rec(&p, &mut place, 0, &mut best);
    best
}
