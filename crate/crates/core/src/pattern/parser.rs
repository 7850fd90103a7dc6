use std::collections::BTreeMap;

use thiserror::Error;

use super::op::PatternOp;
use crate::expr::{self, Expr, ExprError, Tok, TokenCursor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct PatternError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Half-open index range. A single index `n` is stored as `n..n+1` with
/// `single` set, since `neighbors(n)` reads it as "up to n".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeSpec {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    pub single: bool,
}

impl RangeSpec {
    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        RangeSpec {
            lo,
            hi,
            single: false,
        }
    }

    pub fn single(n: i64) -> Self {
        RangeSpec {
            lo: Some(n),
            hi: Some(n + 1),
            single: true,
        }
    }

    /// Clamps to `[0, extent)`.
    pub fn clamp(&self, extent: i64) -> (i64, i64) {
        let lo = self.lo.unwrap_or(0).clamp(0, extent);
        let hi = self.hi.unwrap_or(extent).clamp(0, extent);
        (lo, hi)
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v < hi)
    }
}

/// Two-dimensional op grid; row 0 is the bottom course.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub cells: Vec<Vec<Option<PatternOp>>>,
}

impl Grid {
    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn get(&self, r: usize, c: usize) -> Option<PatternOp> {
        self.cells
            .get(r)
            .and_then(|row| row.get(c))
            .copied()
            .flatten()
    }

    pub fn has_cross(&self) -> bool {
        self.cells
            .iter()
            .flatten()
            .any(|c| matches!(c, Some(PatternOp::Cross { .. })))
    }

    /// Distinct ops in row-major order of first appearance.
    pub fn ops(&self) -> Vec<PatternOp> {
        let mut out = Vec::new();
        for op in self.cells.iter().flatten().flatten() {
            if !out.contains(op) {
                out.push(*op);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    Stretch,
    Tile,
    Place,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    All,
    Filter(Expr),
    Wales(RangeSpec),
    Courses(RangeSpec),
    Select(RangeSpec, RangeSpec),
    Named(String),
    Shape(String),
    Itf(String),
    /// Cells of the grid; `Some(op)` restricts to cells holding `op`.
    Grid(GridMode, Grid, Option<PatternOp>),
    Img(String),
    Or(Box<Query>, Box<Query>),
    And(Box<Query>, Box<Query>),
    Minus(Box<Query>, Box<Query>),
    Inverse(Box<Query>),
    Neighbors(Box<Query>, RangeSpec),
    Boundaries(Box<Query>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSpec {
    Op(PatternOp),
    /// Pairs blocks of `2k` adjacent selected stitches into crossings.
    Cross(i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub line: usize,
    pub query: Query,
    pub op: OpSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Pre,
    Node(String),
    Post,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramLayer {
    pub scope: Scope,
    pub statements: Vec<Statement>,
}

#[derive(Clone)]
enum Binding {
    Grid(Grid),
    Query(Query),
}

struct Parser<'a> {
    cur: TokenCursor<'a>,
    line: usize,
    text: &'a str,
    bindings: &'a BTreeMap<String, Binding>,
}

fn err_at(line: usize, text: &str, pos: usize, message: impl Into<String>) -> PatternError {
    let column = text[..pos.min(text.len())].chars().count() + 1;
    PatternError {
        line,
        column,
        message: message.into(),
    }
}

impl Parser<'_> {
    fn err(&self, pos: usize, message: impl Into<String>) -> PatternError {
        err_at(self.line, self.text, pos, message)
    }

    fn expr_error(&self, e: ExprError) -> PatternError {
        self.err(e.pos, e.msg)
    }

    fn expect(&mut self, s: &str) -> Result<(), PatternError> {
        self.cur.expect_sym(s).map_err(|e| self.expr_error(e))
    }

    fn ident(&mut self) -> Result<(String, usize), PatternError> {
        let pos = self.cur.pos();
        match self.cur.advance() {
            Some(expr::Token {
                tok: Tok::Ident(name),
                ..
            }) => Ok((name.clone(), pos)),
            _ => Err(self.err(pos, "expected a name")),
        }
    }

    fn int(&mut self) -> Result<i64, PatternError> {
        let pos = self.cur.pos();
        let neg = self.cur.eat_sym("-");
        match self.cur.advance() {
            Some(expr::Token {
                tok: Tok::Num(v), ..
            }) if v.fract() == 0.0 => Ok(if neg { -(*v as i64) } else { *v as i64 }),
            _ => Err(self.err(pos, "expected an integer")),
        }
    }

    fn string(&mut self) -> Result<String, PatternError> {
        let pos = self.cur.pos();
        match self.cur.advance() {
            Some(expr::Token {
                tok: Tok::Str(s), ..
            }) => Ok(s.clone()),
            _ => Err(self.err(pos, "expected a string")),
        }
    }

    fn range(&mut self) -> Result<RangeSpec, PatternError> {
        if self.cur.eat_sym("..") {
            return Ok(RangeSpec::new(None, Some(self.int()?)));
        }
        let lo = self.int()?;
        if self.cur.eat_sym("..") {
            if self.cur.is_sym(")") || self.cur.is_sym(",") {
                return Ok(RangeSpec::new(Some(lo), None));
            }
            return Ok(RangeSpec::new(Some(lo), Some(self.int()?)));
        }
        Ok(RangeSpec::single(lo))
    }

    fn grid(&mut self) -> Result<Grid, PatternError> {
        let pos = self.cur.pos();
        if let Some(expr::Token {
            tok: Tok::Ident(name),
            ..
        }) = self.cur.peek()
        {
            self.cur.advance();
            return match self.bindings.get(name) {
                Some(Binding::Grid(g)) => Ok(g.clone()),
                _ => Err(self.err(pos, format!("{name} is not a grid"))),
            };
        }
        let e = self.cur.parse_expr().map_err(|e| self.expr_error(e))?;
        grid_from_expr(&e).map_err(|m| self.err(pos, m))
    }

    fn args_end(&mut self) -> Result<(), PatternError> {
        self.expect(")")
    }

    fn head(&mut self) -> Result<Query, PatternError> {
        let (name, pos) = self.ident()?;
        if !self.cur.is_sym("(") {
            return match self.bindings.get(&name) {
                Some(Binding::Query(q)) => Ok(q.clone()),
                Some(Binding::Grid(_)) => {
                    Err(self.err(pos, format!("{name} is a grid, not a query")))
                }
                None => Err(self.err(pos, format!("unknown name {name}"))),
            };
        }
        self.expect("(")?;
        let q = match name.as_str() {
            "all" => Query::All,
            "filter" => Query::Filter(self.cur.parse_expr().map_err(|e| self.expr_error(e))?),
            "wales" => Query::Wales(self.range()?),
            "courses" => Query::Courses(self.range()?),
            "select" => {
                let c = self.range()?;
                self.expect(",")?;
                Query::Select(c, self.range()?)
            }
            "named" => Query::Named(self.string()?),
            "shape" => Query::Shape(self.string()?),
            "itf" => Query::Itf(self.string()?),
            "stretch" | "tile" | "place" => {
                let mode = match name.as_str() {
                    "stretch" => GridMode::Stretch,
                    "tile" => GridMode::Tile,
                    _ => GridMode::Place,
                };
                let g = self.grid()?;
                let cell = if self.cur.eat_sym(",") {
                    let p = self.cur.pos();
                    Some(PatternOp::from_opcode(&self.string()?).map_err(|m| self.err(p, m))?)
                } else {
                    None
                };
                Query::Grid(mode, g, cell)
            }
            "img" => Query::Img(self.string()?),
            "or" | "and" | "minus" => {
                let a = self.chain()?;
                self.expect(",")?;
                let b = self.chain()?;
                combine(&name, a, b)
            }
            "inverse" => Query::Inverse(Box::new(self.chain()?)),
            "neighbors" => {
                let a = self.chain()?;
                self.expect(",")?;
                Query::Neighbors(Box::new(a), self.range()?)
            }
            "boundaries" => Query::Boundaries(Box::new(self.chain()?)),
            _ => return Err(self.err(pos, format!("unknown query {name}"))),
        };
        self.args_end()?;
        Ok(q)
    }

    /// `head(.method)*`, stopping before `.apply`.
    fn chain(&mut self) -> Result<Query, PatternError> {
        let mut q = self.head()?;
        loop {
            if !self.cur.is_sym(".") {
                return Ok(q);
            }
            if let Some(expr::Token {
                tok: Tok::Ident(m), ..
            }) = self.cur.peek_at(1)
            {
                if m == "apply" {
                    return Ok(q);
                }
            }
            self.cur.advance();
            let (name, _) = self.ident()?;
            q = match name.as_str() {
                "or" | "and" | "minus" => {
                    self.expect("(")?;
                    let b = self.chain()?;
                    self.args_end()?;
                    combine(&name, q, b)
                }
                "inverse" | "boundaries" => {
                    self.expect("(")?;
                    self.args_end()?;
                    if name == "inverse" {
                        Query::Inverse(Box::new(q))
                    } else {
                        Query::Boundaries(Box::new(q))
                    }
                }
                "neighbors" => {
                    self.expect("(")?;
                    let r = self.range()?;
                    self.args_end()?;
                    Query::Neighbors(Box::new(q), r)
                }
                _ => {
                    // any other query head intersects
                    self.cur.idx -= 1;
                    Query::And(Box::new(q), Box::new(self.head()?))
                }
            };
        }
    }

    fn op(&mut self) -> Result<OpSpec, PatternError> {
        let (name, pos) = self.ident()?;
        let simple = |op| Ok(OpSpec::Op(op));
        match name.as_str() {
            "knit" => simple(PatternOp::Knit),
            "purl" => simple(PatternOp::Purl),
            "tuck" => simple(PatternOp::Tuck),
            "miss" => simple(PatternOp::Miss),
            "move" | "cross" => {
                self.expect("(")?;
                let k = self.int()?;
                self.args_end()?;
                if k == 0 || (name == "cross" && k < 0) {
                    return Err(self.err(pos, format!("{name} needs a positive offset")));
                }
                if name == "move" {
                    Ok(OpSpec::Op(PatternOp::Move(k as i32)))
                } else {
                    Ok(OpSpec::Cross(k as i32))
                }
            }
            _ => Err(self.err(pos, format!("unknown operation {name}"))),
        }
    }
}

fn combine(name: &str, a: Query, b: Query) -> Query {
    match name {
        "or" => Query::Or(Box::new(a), Box::new(b)),
        "and" => Query::And(Box::new(a), Box::new(b)),
        _ => Query::Minus(Box::new(a), Box::new(b)),
    }
}

/// Reads a grid from a nested list of numbers (nonzero = set) or opcode
/// strings.
fn grid_from_expr(e: &Expr) -> Result<Grid, String> {
    let Expr::List(rows) = e else {
        return Err("expected a grid [[...], ...]".into());
    };
    let cells = rows
        .iter()
        .map(|row| {
            let Expr::List(items) = row else {
                return Err("grid rows must be lists".to_string());
            };
            items
                .iter()
                .map(|item| match item {
                    Expr::Num(v) => Ok((*v != 0.0).then_some(PatternOp::Knit)),
                    Expr::Str(s) => PatternOp::from_opcode(s).map(Some),
                    Expr::Var(v) if v == "null" || v == "_" => Ok(None),
                    _ => Err("grid cells must be numbers or opcode strings".to_string()),
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>, String>>()?;
    Ok(Grid { cells })
}

/// Removes a trailing comment: `#` followed by whitespace or end of line.
fn strip_comment(line: &str) -> &str {
    let b = line.as_bytes();
    let mut in_str = false;
    for i in 0..b.len() {
        match b[i] {
            b'"' => in_str = !in_str,
            b'#' if !in_str && (i + 1 == b.len() || b[i + 1].is_ascii_whitespace()) => {
                return &line[..i];
            }
            _ => {}
        }
    }
    line
}

/// Parses a pattern program. `@pre`, `@node NAME` and `@post` lines start
/// new layers; statements before any directive form a `@pre` layer.
pub fn parse_program(text: &str) -> Result<Vec<ProgramLayer>, PatternError> {
    let mut layers: Vec<ProgramLayer> = Vec::new();
    let mut bindings: BTreeMap<String, Binding> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('@') {
            let mut words = rest.split_whitespace();
            let scope = match (words.next(), words.next(), words.next()) {
                (Some("pre"), None, _) => Scope::Pre,
                (Some("post"), None, _) => Scope::Post,
                (Some("node"), Some(name), None) => Scope::Node(name.to_string()),
                _ => {
                    let column = raw.find('@').unwrap_or(0) + 1;
                    return Err(PatternError {
                        line,
                        column,
                        message: format!("bad directive @{rest}"),
                    });
                }
            };
            layers.push(ProgramLayer {
                scope,
                statements: Vec::new(),
            });
            continue;
        }
        let toks = expr::tokenize(body).map_err(|e| err_at(line, body, e.pos, e.msg))?;
        let snapshot = bindings.clone();
        let mut p = Parser {
            cur: TokenCursor::new(&toks, body.len()),
            line,
            text: body,
            bindings: &snapshot,
        };
        let is_let =
            matches!(p.cur.peek(), Some(expr::Token { tok: Tok::Ident(k), .. }) if k == "let");
        if is_let {
            p.cur.advance();
            let (name, _) = p.ident()?;
            p.expect("=")?;
            let start = p.cur.idx;
            let binding = if p.cur.is_sym("[") {
                Binding::Grid(p.grid()?)
            } else {
                let q = p.chain()?;
                if p.cur.idx == start {
                    return Err(p.err(p.cur.pos(), "expected a grid or query"));
                }
                Binding::Query(q)
            };
            if !p.cur.at_end() {
                return Err(p.err(p.cur.pos(), "unexpected input after binding"));
            }
            bindings.insert(name, binding);
            continue;
        }
        let query = p.chain()?;
        p.expect(".")?;
        let (apply, pos) = p.ident()?;
        if apply != "apply" {
            return Err(p.err(pos, "expected apply"));
        }
        p.expect("(")?;
        let op = p.op()?;
        p.args_end()?;
        if !p.cur.at_end() {
            return Err(p.err(p.cur.pos(), "unexpected input after apply(...)"));
        }
        if layers.is_empty() {
            layers.push(ProgramLayer {
                scope: Scope::Pre,
                statements: Vec::new(),
            });
        }
        layers
            .last_mut()
            .unwrap()
            .statements
            .push(Statement { line, query, op });
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let layers = parse_program("courses(0..2).apply(purl)").unwrap();
        assert_eq!(layers.len(), 1);
        let st = &layers[0].statements[0];
        assert_eq!(st.query, Query::Courses(RangeSpec::new(Some(0), Some(2))));
        assert_eq!(st.op, OpSpec::Op(PatternOp::Purl));
    }

    #[test]
    fn tile_with_bound_grid() {
        let src = "let G = [[1,0,0],[0,1,0],[0,0,1]]\ntile(G).apply(move(-1))";
        let layers = parse_program(src).unwrap();
        let st = &layers[0].statements[0];
        assert!(matches!(&st.query, Query::Grid(GridMode::Tile, g, None) if g.rows() == 3));
        assert_eq!(st.op, OpSpec::Op(PatternOp::Move(-1)));
    }

    #[test]
    fn unclosed_call_reports_position() {
        let err = parse_program("wales(2..).and(").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 16);
    }

    #[test]
    fn comments_directives_and_chains() {
        let src = "# header\n@node cuff\nwales(0..).filter(wale % 2 == 1).apply(purl) # rib\n@post\nall().minus(courses(0)).apply(knit)";
        let layers = parse_program(src).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].scope, Scope::Node("cuff".into()));
        assert!(matches!(layers[0].statements[0].query, Query::And(_, _)));
        assert!(matches!(layers[1].statements[0].query, Query::Minus(_, _)));
    }

    #[test]
    fn unknown_combinator_and_arity() {
        assert!(parse_program("sideways(1).apply(knit)")
            .unwrap_err()
            .message
            .contains("unknown query"));
        assert!(parse_program("select(1).apply(knit)").is_err());
        assert!(parse_program("all().apply(spin)").is_err());
    }
}
