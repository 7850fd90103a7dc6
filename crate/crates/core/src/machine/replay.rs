//! Stand-alone checker for instruction text. It shares no state model with
//! the interpreter: it parses the text and counts loops per needle.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for Violation {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplayReport {
    pub instructions: usize,
    pub passes: usize,
    /// Largest loop count seen on any needle.
    pub max_loops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Slot {
    front: bool,
    slider: bool,
    index: i64,
}

fn parse_slot(tok: &str) -> Option<Slot> {
    let (front, rest) = match tok.as_bytes().first()? {
        b'f' => (true, &tok[1..]),
        b'b' => (false, &tok[1..]),
        _ => return None,
    };
    let (slider, num) = match rest.strip_prefix('s') {
        Some(n) => (true, n),
        None => (false, rest),
    };
    Some(Slot {
        front,
        slider,
        index: num.parse().ok()?,
    })
}

struct Replay {
    loops: HashMap<Slot, usize>,
    declared: BTreeSet<String>,
    active: BTreeSet<String>,
    rack: i64,
    bound: i64,
    report: ReplayReport,
}

impl Replay {
    fn count(&self, s: Slot) -> usize {
        self.loops.get(&s).copied().unwrap_or(0)
    }

    fn set(&mut self, s: Slot, n: usize) {
        if n == 0 {
            self.loops.remove(&s);
        } else {
            self.loops.insert(s, n);
            self.report.max_loops = self.report.max_loops.max(n);
        }
    }

    fn aligned(&self, a: Slot, b: Slot) -> Result<(), String> {
        if a.front == b.front {
            return Err("transfer between slots of the same bed".into());
        }
        let (f, bk) = if a.front { (a, b) } else { (b, a) };
        if f.index - bk.index != self.rack {
            return Err(format!("slots not aligned at racking {}", self.rack));
        }
        Ok(())
    }

    fn carrier(&self, c: &str) -> Result<(), String> {
        if !self.active.contains(c) {
            return Err(format!("carrier {c} is not in"));
        }
        Ok(())
    }

    fn instruction(&mut self, words: &[&str]) -> Result<(), String> {
        let needle = |t: &str| -> Result<Slot, String> {
            let s = parse_slot(t).ok_or_else(|| format!("bad needle {t:?}"))?;
            if s.slider {
                return Err(format!("cannot form loops on slider {t}"));
            }
            Ok(s)
        };
        let dir = |t: &str| -> Result<(), String> {
            if t == "+" || t == "-" {
                Ok(())
            } else {
                Err(format!("bad direction {t:?}"))
            }
        };
        match words {
            ["in", c] => {
                if !self.declared.contains(*c) {
                    return Err(format!("carrier {c} is not declared"));
                }
                if !self.active.insert(c.to_string()) {
                    return Err(format!("carrier {c} is already in"));
                }
            }
            ["out", c] => {
                if !self.active.remove(*c) {
                    return Err(format!("carrier {c} is not in"));
                }
            }
            ["rack", r] => {
                let r: i64 = r.parse().map_err(|_| format!("bad racking {r:?}"))?;
                if r.abs() > self.bound {
                    return Err(format!("racking {r} beyond {}", self.bound));
                }
                self.rack = r;
            }
            ["knit", d, n, c] => {
                dir(d)?;
                self.carrier(c)?;
                let s = needle(n)?;
                if self.count(s) == 0 {
                    return Err(format!("knit on empty needle {n}"));
                }
                self.set(s, 1);
            }
            ["tuck", d, n, c] => {
                dir(d)?;
                self.carrier(c)?;
                let s = needle(n)?;
                self.set(s, self.count(s) + 1);
            }
            ["miss", d, n, c] => {
                dir(d)?;
                self.carrier(c)?;
                let s = needle(n)?;
                if self.count(s) == 0 {
                    return Err(format!("miss on empty needle {n}"));
                }
            }
            ["split", d, n, m, c] => {
                dir(d)?;
                self.carrier(c)?;
                let (s, t) = (needle(n)?, needle(m)?);
                if self.count(s) == 0 {
                    return Err(format!("split on empty needle {n}"));
                }
                self.aligned(s, t)?;
                self.set(t, self.count(t) + self.count(s));
                self.set(s, 1);
            }
            ["xfer", a, b] => {
                let a = parse_slot(a).ok_or_else(|| format!("bad needle {a:?}"))?;
                let b = parse_slot(b).ok_or_else(|| format!("bad needle {b:?}"))?;
                self.aligned(a, b)?;
                let n = self.count(a);
                if n == 0 {
                    return Err("transfer from an empty slot".into());
                }
                self.set(a, 0);
                self.set(b, self.count(b) + n);
            }
            ["drop", n] => {
                let s = parse_slot(n).ok_or_else(|| format!("bad needle {n:?}"))?;
                if self.count(s) == 0 {
                    return Err(format!("drop on empty needle {n}"));
                }
                self.set(s, 0);
            }
            _ => return Err(format!("unknown instruction {:?}", words.join(" "))),
        }
        Ok(())
    }
}

/// Replays instruction text and returns the first rule it breaks: loops
/// formed or missed on empty needles, transfers between unaligned slots or
/// from empty ones, racking past `racking_bound`, pass sizes that disagree
/// with their headers, and loops or carriers left at the end.
pub fn replay_validate(text: &str, racking_bound: i32) -> Result<ReplayReport, Violation> {
    let mut r = Replay {
        loops: HashMap::new(),
        declared: BTreeSet::new(),
        active: BTreeSet::new(),
        rack: 0,
        bound: racking_bound as i64,
        report: ReplayReport::default(),
    };
    let fail = |line: usize, message: String| Violation { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, ";!knitout-2")) => {}
        _ => return Err(fail(1, "missing version header".into())),
    }
    // (header line, declared size, instructions seen)
    let mut pass: Option<(usize, usize, usize)> = None;
    let close = |pass: Option<(usize, usize, usize)>| match pass {
        Some((at, want, got)) if want != got => Err(fail(
            at,
            format!("pass declares {want} instructions but holds {got}"),
        )),
        _ => Ok(()),
    };
    let mut last = 1;
    for (no, l) in lines {
        last = no;
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix(";;Carriers:") {
            r.declared.extend(rest.split_whitespace().map(String::from));
            continue;
        }
        if let Some(rest) = l.strip_prefix(";pass ") {
            close(pass)?;
            let n = rest
                .split_whitespace()
                .nth(2)
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| fail(no, "malformed pass header".into()))?;
            pass = Some((no, n, 0));
            r.report.passes += 1;
            continue;
        }
        if l.starts_with(';') {
            continue;
        }
        let Some(p) = pass.as_mut() else {
            return Err(fail(no, "instruction outside a pass".into()));
        };
        p.2 += 1;
        let words: Vec<&str> = l.split_whitespace().collect();
        r.instruction(&words).map_err(|m| fail(no, m))?;
        r.report.instructions += 1;
    }
    if let Some(c) = r.active.iter().next() {
        return Err(fail(last, format!("carrier in at end ({c})")));
    }
    close(pass)?;
    if let Some((s, n)) = r
        .loops
        .iter()
        .min_by_key(|(s, _)| (s.front, s.slider, s.index))
    {
        let bed = if s.front { "f" } else { "b" };
        return Err(fail(last, format!("{n} loops left on {bed}{}", s.index)));
    }
    Ok(r.report)
}
