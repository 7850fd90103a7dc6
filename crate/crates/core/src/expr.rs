//! Small expression language shared by parametric skeleton fields, custom
//! shaper programs and pattern predicates.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! or      := and ('||' and)*
//! and     := cmp ('&&' cmp)*
//! cmp     := add (('=='|'!='|'<'|'<='|'>'|'>=') add)?
//! add     := mul (('+'|'-') mul)*
//! mul     := unary (('*'|'/'|'%') unary)*
//! unary   := ('-'|'!') unary | primary
//! primary := number | string | '#'name | '@'name | name | name '(' args ')'
//!          | '(' or ')' | '[' args ']'
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{msg} at offset {pos}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

impl ExprError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        Self {
            pos,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Param(String),
    Prop(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

const SYMBOLS: [&str; 24] = [
    "..", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "[", "]", ",", ".", "+", "-", "*", "/",
    "%", "<", ">", "!", "=", "{", "}",
];

/// Tokenizes `src`. `#` starts a parameter reference when followed by a
/// letter; callers that allow line comments strip them beforehand.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let v: f64 = src[start..i]
                .parse()
                .map_err(|_| ExprError::new(start, "malformed number"))?;
            out.push(Token {
                tok: Tok::Num(v),
                pos: start,
            });
            continue;
        }
        if c == '"' {
            i += 1;
            let s = i;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(ExprError::new(start, "unterminated string"));
            }
            out.push(Token {
                tok: Tok::Str(src[s..i].to_string()),
                pos: start,
            });
            i += 1;
            continue;
        }
        if c == '#' || c == '@' {
            i += 1;
            let s = i;
            while i < bytes.len() && is_ident_byte(bytes[i]) {
                i += 1;
            }
            if s == i {
                return Err(ExprError::new(
                    start,
                    format!("expected a name after '{c}'"),
                ));
            }
            let name = src[s..i].to_string();
            let tok = if c == '#' {
                Tok::Param(name)
            } else {
                Tok::Prop(name)
            };
            out.push(Token { tok, pos: start });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && is_ident_byte(bytes[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        let rest = &src[i..];
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                out.push(Token {
                    tok: Tok::Sym(sym),
                    pos: start,
                });
                i += sym.len();
            }
            None => return Err(ExprError::new(start, format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Str(String),
    Param(String),
    Prop(String),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    List(Vec<Expr>),
}

impl Expr {
    /// Collects `#param` and `@prop` references.
    pub fn references(&self, params: &mut BTreeSet<String>, props: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                params.insert(p.clone());
            }
            Expr::Prop(p) => {
                props.insert(p.clone());
            }
            Expr::Neg(e) | Expr::Not(e) => e.references(params, props),
            Expr::Bin(_, a, b) => {
                a.references(params, props);
                b.references(params, props);
            }
            Expr::Call(_, args) | Expr::List(args) => {
                args.iter().for_each(|a| a.references(params, props))
            }
            Expr::Num(_) | Expr::Str(_) | Expr::Var(_) => {}
        }
    }
}

/// Cursor over a token slice; the pattern DSL parser drives it directly.
pub struct TokenCursor<'a> {
    toks: &'a [Token],
    pub idx: usize,
    end_pos: usize,
}

impl<'a> TokenCursor<'a> {
    pub fn new(toks: &'a [Token], end_pos: usize) -> Self {
        Self {
            toks,
            idx: 0,
            end_pos,
        }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.idx)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.idx + k)
    }

    pub fn pos(&self) -> usize {
        self.peek().map_or(self.end_pos, |t| t.pos)
    }

    pub fn advance(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(x), .. }) if *x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ExprError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(ExprError::new(self.pos(), format!("expected '{s}'")))
        }
    }

    pub fn parse_expr(&mut self) -> Result<Expr, ExprError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_and()?;
        while self.eat_sym("||") {
            let rhs = self.parse_and()?;
            lhs = Expr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_cmp()?;
        while self.eat_sym("&&") {
            let rhs = self.parse_cmp()?;
            lhs = Expr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_cmp(&mut self) -> Result<Expr, ExprError> {
        let lhs = self.parse_add()?;
        let op = [
            ("==", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ]
        .into_iter()
        .find(|(s, _)| self.is_sym(s));
        match op {
            Some((s, op)) => {
                self.expect_sym(s)?;
                let rhs = self.parse_add()?;
                Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
            }
            None => Ok(lhs),
        }
    }

    fn parse_add(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_mul()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.parse_mul()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_mul(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else if self.eat_sym("%") {
                BinOp::Rem
            } else {
                return Ok(lhs);
            };
            let rhs = self.parse_unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        if self.eat_sym("!") {
            return Ok(Expr::Not(Box::new(self.parse_unary()?)));
        }
        self.parse_primary()
    }

    fn parse_args(&mut self, close: &str) -> Result<Vec<Expr>, ExprError> {
        let mut args = Vec::new();
        if self.eat_sym(close) {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.eat_sym(close) {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        let Some(tok) = self.advance() else {
            return Err(ExprError::new(pos, "unexpected end of expression"));
        };
        match &tok.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::Str(s) => Ok(Expr::Str(s.clone())),
            Tok::Param(p) => Ok(Expr::Param(p.clone())),
            Tok::Prop(p) => Ok(Expr::Prop(p.clone())),
            Tok::Ident(name) => {
                if self.eat_sym("(") {
                    let args = self.parse_args(")")?;
                    Ok(Expr::Call(name.clone(), args))
                } else {
                    Ok(Expr::Var(name.clone()))
                }
            }
            Tok::Sym("(") => {
                let e = self.parse_expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => Ok(Expr::List(self.parse_args("]")?)),
            Tok::Sym(s) => Err(ExprError::new(tok.pos, format!("unexpected '{s}'"))),
        }
    }
}

/// Parses a complete standalone expression.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut cur = TokenCursor::new(&toks, src.len());
    let e = cur.parse_expr()?;
    if !cur.at_end() {
        return Err(ExprError::new(cur.pos(), "trailing input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    pub fn as_num(&self) -> Result<f64, String> {
        match self {
            Value::Num(v) => Ok(*v),
            Value::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
            other => Err(format!("expected a number, got {other}")),
        }
    }

    pub fn truthy(&self) -> Result<bool, String> {
        match self {
            Value::Bool(b) => Ok(*b),
            Value::Num(v) => Ok(*v != 0.0),
            other => Err(format!("expected a boolean, got {other}")),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Variable lookup for evaluation.
pub trait Env {
    fn param(&self, name: &str) -> Result<Value, String> {
        Err(format!("unbound parameter #{name}"))
    }
    fn prop(&self, name: &str) -> Result<Value, String> {
        Err(format!("unknown property @{name}"))
    }
    fn var(&self, name: &str) -> Result<Value, String> {
        Err(format!("unknown variable {name}"))
    }
}

pub fn eval(expr: &Expr, env: &dyn Env) -> Result<Value, String> {
    match expr {
        Expr::Num(v) => Ok(Value::Num(*v)),
        Expr::Str(s) => Ok(Value::Str(s.clone())),
        Expr::Param(p) => env.param(p),
        Expr::Prop(p) => env.prop(p),
        Expr::Var(v) => match v.as_str() {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => env.var(v),
        },
        Expr::Neg(e) => Ok(Value::Num(-eval(e, env)?.as_num()?)),
        Expr::Not(e) => Ok(Value::Bool(!eval(e, env)?.truthy()?)),
        Expr::Bin(BinOp::And, a, b) => Ok(Value::Bool(
            eval(a, env)?.truthy()? && eval(b, env)?.truthy()?,
        )),
        Expr::Bin(BinOp::Or, a, b) => Ok(Value::Bool(
            eval(a, env)?.truthy()? || eval(b, env)?.truthy()?,
        )),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, env)?, eval(b, env)?);
            if let (Value::Str(x), Value::Str(y)) = (&a, &b) {
                return match op {
                    BinOp::Eq => Ok(Value::Bool(x == y)),
                    BinOp::Ne => Ok(Value::Bool(x != y)),
                    _ => Err("strings only support == and !=".into()),
                };
            }
            let (x, y) = (a.as_num()?, b.as_num()?);
            Ok(match op {
                BinOp::Add => Value::Num(x + y),
                BinOp::Sub => Value::Num(x - y),
                BinOp::Mul => Value::Num(x * y),
                BinOp::Div => Value::Num(x / y),
                BinOp::Rem => Value::Num(x.rem_euclid(y)),
                BinOp::Eq => Value::Bool(x == y),
                BinOp::Ne => Value::Bool(x != y),
                BinOp::Lt => Value::Bool(x < y),
                BinOp::Le => Value::Bool(x <= y),
                BinOp::Gt => Value::Bool(x > y),
                BinOp::Ge => Value::Bool(x >= y),
                BinOp::And | BinOp::Or => unreachable!(),
            })
        }
        Expr::List(items) => Ok(Value::List(
            items
                .iter()
                .map(|e| eval(e, env))
                .collect::<Result<_, _>>()?,
        )),
        Expr::Call(name, args) => call(name, args, env),
    }
}

fn call(name: &str, args: &[Expr], env: &dyn Env) -> Result<Value, String> {
    if name == "if" {
        if args.len() != 3 {
            return Err("if(cond, a, b) takes 3 arguments".into());
        }
        return if eval(&args[0], env)?.truthy()? {
            eval(&args[1], env)
        } else {
            eval(&args[2], env)
        };
    }
    let vals: Vec<Value> = args
        .iter()
        .map(|e| eval(e, env))
        .collect::<Result<_, _>>()?;
    let num = |i: usize| -> Result<f64, String> {
        vals.get(i)
            .ok_or_else(|| format!("{name}: missing argument {}", i + 1))?
            .as_num()
    };
    let arity = |n: usize| -> Result<(), String> {
        if vals.len() == n {
            Ok(())
        } else {
            Err(format!("{name} takes {n} argument(s), got {}", vals.len()))
        }
    };
    match name {
        "abs" => arity(1).and(Ok(Value::Num(num(0)?.abs()))),
        "floor" => arity(1).and(Ok(Value::Num(num(0)?.floor()))),
        "ceil" => arity(1).and(Ok(Value::Num(num(0)?.ceil()))),
        "round" => arity(1).and(Ok(Value::Num(num(0)?.round()))),
        "sqrt" => arity(1).and(Ok(Value::Num(num(0)?.sqrt()))),
        "min" | "max" => {
            if vals.is_empty() {
                return Err(format!("{name} needs at least one argument"));
            }
            let mut acc = num(0)?;
            for i in 1..vals.len() {
                let v = num(i)?;
                acc = if name == "min" {
                    acc.min(v)
                } else {
                    acc.max(v)
                };
            }
            Ok(Value::Num(acc))
        }
        "noise2" => {
            arity(3)?;
            Ok(Value::Num(crate::pattern::noise::simplex2(
                num(0)?,
                num(1)?,
                num(2)? as i64,
            )))
        }
        "len" => match vals.as_slice() {
            [Value::List(l)] => Ok(Value::Num(l.len() as f64)),
            _ => Err("len takes one list".into()),
        },
        _ => Err(format!("unknown function {name}")),
    }
}
