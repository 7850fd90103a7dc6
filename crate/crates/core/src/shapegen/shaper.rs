//! Wale mappings between two consecutive courses of sizes `M <= N`.

use crate::expr::{self, Env, Expr, Value};
use crate::skeleton::Shaping;

/// Non-crossing mapping from `M` sources onto `N` targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShaperMapping {
    pub m: usize,
    pub n: usize,
    /// `(i, j)` pairs sorted by `j`.
    pub pairs: Vec<(usize, usize)>,
}

impl ShaperMapping {
    pub fn identity(m: usize) -> Self {
        ShaperMapping {
            m,
            n: m,
            pairs: (0..m).map(|i| (i, i)).collect(),
        }
    }

    /// Builds the mapping where each `doubled[i]` source feeds two targets.
    pub fn from_doubled(m: usize, doubled: &[usize]) -> Self {
        let mut pairs = Vec::with_capacity(m + doubled.len());
        let mut it = doubled.iter().peekable();
        let mut j = 0;
        for i in 0..m {
            pairs.push((i, j));
            j += 1;
            while it.peek() == Some(&&i) {
                it.next();
                pairs.push((i, j));
                j += 1;
            }
        }
        ShaperMapping { m, n: j, pairs }
    }

    /// Sources that feed two targets, ascending.
    pub fn doubled(&self) -> Vec<usize> {
        let mut count = vec![0u8; self.m];
        for (i, _) in &self.pairs {
            count[*i] += 1;
        }
        (0..self.m).filter(|i| count[*i] > 1).collect()
    }

    /// Checks coverage, degree and non-crossing rules; reports the first
    /// rule that fails.
    pub fn check(&self) -> Result<(), String> {
        let mut src = vec![0usize; self.m];
        let mut dst = vec![0usize; self.n];
        for &(i, j) in &self.pairs {
            if i >= self.m || j >= self.n {
                return Err(format!(
                    "pair ({i}, {j}) out of range for M={}, N={}",
                    self.m, self.n
                ));
            }
            src[i] += 1;
            dst[j] += 1;
        }
        if let Some(j) = dst.iter().position(|c| *c != 1) {
            return Err(format!(
                "target {j} covered {} times (must be exactly once)",
                dst[j]
            ));
        }
        if let Some(i) = src.iter().position(|c| *c == 0) {
            return Err(format!("source {i} has no target"));
        }
        if let Some(i) = src.iter().position(|c| *c > 2) {
            return Err(format!("source {i} has {} targets (at most 2)", src[i]));
        }
        let mut sorted = self.pairs.clone();
        sorted.sort_by_key(|p| (p.1, p.0));
        for w in sorted.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(format!(
                    "wales cross: ({}, {}) and ({}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        Ok(())
    }
}

/// Cyclic gaps between consecutive doubled sources on a course of `m`.
pub fn cyclic_gaps(m: usize, doubled: &[usize]) -> Vec<usize> {
    if doubled.is_empty() {
        return Vec::new();
    }
    let mut gaps: Vec<usize> = doubled.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(m - doubled[doubled.len() - 1] + doubled[0]);
    gaps
}

/// Spread (max - min) of the cyclic doubled-source gaps.
pub fn gap_spread(m: usize, doubled: &[usize]) -> usize {
    let g = cyclic_gaps(m, doubled);
    match (g.iter().max(), g.iter().min()) {
        (Some(a), Some(b)) => a - b,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShaperError {
    #[error("course size must be at least 1 (M={m}, N={n})")]
    Empty { m: usize, n: usize },
    #[error("cannot map {m} stitches onto {n}: more than doubling")]
    TooWide { m: usize, n: usize },
    #[error("custom shaper: {0}")]
    Custom(String),
}

/// A user shaper program: an expression over `M`, `N` and `i` returning the
/// target index (or list of indices) of source `i`.
#[derive(Debug, Clone)]
pub struct CustomShaper {
    expr: Expr,
}

struct ShaperEnv {
    m: usize,
    n: usize,
    i: usize,
}

impl Env for ShaperEnv {
    fn var(&self, name: &str) -> Result<Value, String> {
        match name {
            "M" => Ok(Value::Num(self.m as f64)),
            "N" => Ok(Value::Num(self.n as f64)),
            "i" => Ok(Value::Num(self.i as f64)),
            _ => Err(format!("unknown variable {name} (expected M, N or i)")),
        }
    }
}

impl CustomShaper {
    pub fn compile(program: &str) -> Result<Self, String> {
        let expr = expr::parse(program).map_err(|e| e.to_string())?;
        Ok(CustomShaper { expr })
    }

    pub fn run(&self, m: usize, n: usize) -> Result<ShaperMapping, String> {
        let mut pairs = Vec::new();
        for i in 0..m {
            let v = expr::eval(&self.expr, &ShaperEnv { m, n, i })?;
            let items = match v {
                Value::List(items) => items,
                other => vec![other],
            };
            for item in items {
                let j = item.as_num()?;
                if j < 0.0 || j.fract() != 0.0 {
                    return Err(format!("source {i}: invalid target {j}"));
                }
                pairs.push((i, j as usize));
            }
        }
        pairs.sort_by_key(|p| (p.1, p.0));
        let mapping = ShaperMapping { m, n, pairs };
        mapping.check()?;
        Ok(mapping)
    }
}

/// Doubled sources for a built-in shaping mode with `d` increases over `m`.
pub fn doubled_sources(shaping: &Shaping, m: usize, d: usize) -> Vec<usize> {
    if d == 0 {
        return Vec::new();
    }
    match shaping {
        Shaping::Uniform | Shaping::Custom(_) => {
            (0..d).map(|k| (2 * k + 1) * m / (2 * d)).collect()
        }
        Shaping::Center => {
            let s = (m - d) / 2;
            (s..s + d).collect()
        }
        Shaping::Left => (0..d).collect(),
        Shaping::Right => (m - d..m).collect(),
        Shaping::Sides => {
            let left = d.div_ceil(2);
            let right = d / 2;
            (0..left).chain(m - right..m).collect()
        }
    }
}

/// Produces the wale mapping between course sizes `m <= n`.
pub fn run_shaper(shaping: &Shaping, m: usize, n: usize) -> Result<ShaperMapping, ShaperError> {
    if m < 1 || n < m {
        return Err(ShaperError::Empty { m, n });
    }
    if n > 2 * m {
        return Err(ShaperError::TooWide { m, n });
    }
    if let Shaping::Custom(prog) = shaping {
        let shaper = CustomShaper::compile(prog).map_err(ShaperError::Custom)?;
        return shaper.run(m, n).map_err(ShaperError::Custom);
    }
    Ok(ShaperMapping::from_doubled(
        m,
        &doubled_sources(shaping, m, n - m),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_equal() {
        for m in 1..20 {
            let map = run_shaper(&Shaping::Sides, m, m).unwrap();
            assert_eq!(map, ShaperMapping::identity(m));
        }
    }

    #[test]
    fn figure_case_ten_to_fourteen() {
        let map = run_shaper(&Shaping::Uniform, 10, 14).unwrap();
        map.check().unwrap();
        assert_eq!(map.doubled(), vec![1, 3, 6, 8]);
        assert!(gap_spread(10, &map.doubled()) <= 1);
    }

    #[test]
    fn center_three_to_five_biases_low() {
        let map = run_shaper(&Shaping::Center, 3, 5).unwrap();
        assert_eq!(map.doubled(), vec![0, 1]);
    }

    #[test]
    fn sides_split_block() {
        let map = run_shaper(&Shaping::Sides, 10, 13).unwrap();
        assert_eq!(map.doubled(), vec![0, 1, 9]);
    }

    #[test]
    fn custom_program_reports_violation() {
        let ok = CustomShaper::compile("if(i == 0, [0, 1], i + 1)").unwrap();
        assert!(ok.run(4, 5).is_ok());
        let bad = CustomShaper::compile("[i, i + 1]").unwrap();
        let err = bad.run(3, 4).unwrap_err();
        assert!(err.contains("covered"), "{err}");
    }

    #[test]
    fn too_wide_rejected() {
        assert_eq!(
            run_shaper(&Shaping::Uniform, 3, 7),
            Err(ShaperError::TooWide { m: 3, n: 7 })
        );
    }
}
