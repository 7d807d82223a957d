//! Symbolic complexity formulas, evaluated with unit hidden constants.
//!
//! `log(x)` evaluates as `ln(max(x, e))` so every formula stays positive on
//! positive inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::lg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Log,
    Sqrt,
    Exp,
    Max,
    Min,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Max | Func::Min => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Named constant `e` or `pi`.
    Const(&'static str),
    Sym(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    /// Every free symbol.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Neg(x) => x.collect(out),
            Expr::Bin(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect(out)),
            Expr::Num(_) | Expr::Const(_) => {}
        }
    }

    fn eval(&self, params: &BTreeMap<String, f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Const("pi") => std::f64::consts::PI,
            Expr::Const(_) => std::f64::consts::E,
            Expr::Sym(s) => *params.get(s).ok_or_else(|| Error::UnboundSymbol(s.clone()))?,
            Expr::Neg(x) => -x.eval(params)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(params)?, b.eval(params)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|a| a.eval(params)).collect::<Result<_>>()?;
                match f {
                    Func::Log => lg(v[0]),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Exp => v[0].exp(),
                    Func::Max => v[0].max(v[1]),
                    Func::Min => v[0].min(v[1]),
                }
            }
        })
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Neg(x) => {
                write!(f, "-")?;
                x.write_child(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, left, right) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write_child(f, left)?;
                write!(f, "{sym}")?;
                b.write_child(f, right)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when digits follow, so `2e` stays `2` then `e`
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::FormulaParse(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(ch) {
            out.push(Token::Op(ch));
            i += 1;
        } else {
            return Err(Error::FormulaParse(format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::FormulaParse(format!("expected `{op}` at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| Error::FormulaParse("unexpected end of formula".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                if let Some(func) = Func::lookup(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != func.arity() {
                        return Err(Error::FormulaParse(format!(
                            "`{name}` takes {} argument(s), got {}",
                            func.arity(),
                            args.len()
                        )));
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(match name.as_str() {
                        "e" => Expr::Const("e"),
                        "pi" => Expr::Const("pi"),
                        _ => Expr::Sym(name),
                    })
                }
            }
            Token::Op(c) => Err(Error::FormulaParse(format!("unexpected `{c}`"))),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            tokens: tokenize(s)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::FormulaParse(format!("trailing input at token {}", p.pos)));
        }
        Ok(e)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFormula {
    pub name: String,
    pub expression: Expr,
    pub source: String,
}

impl CostFormula {
    pub fn new(name: &str, expression: &str, source: &str) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            expression: expression.parse()?,
            source: source.to_string(),
        })
    }
}

pub type Params = BTreeMap<String, f64>;

pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn evaluate(formula: &CostFormula, params: &Params) -> Result<f64> {
    for s in formula.expression.symbols() {
        let v = *params.get(&s).ok_or_else(|| Error::UnboundSymbol(s.clone()))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveParameter { name: s, value: v });
        }
    }
    let v = formula.expression.eval(params)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "formula `{}` evaluated to {v}",
            formula.name
        )));
    }
    Ok(v)
}

const REGISTRY: &[(&str, &str, &str)] = &[
    ("pca/power-result", "log(m*n)*normF*log(n/eps)^r*log(1/eps)^r/(eps*Delta^r*gamma^r)", "result:pca-power"),
    ("pca/ours-power", "log(m*n)*log(n/eps)^2*log(1/eps)^2/(Delta^2*gamma^2)", "table:pca/ours"),
    ("pca/ours-power-known-overlap", "log(m*n)*log(n/eps)^2*log(1/eps)^2/Delta^2", "table:pca-gd/power"),
    ("pca/ours-gradient", "log(m*n)*log(1/eps)^3/eps^2", "table:pca-gd/gradient"),
    ("pca/lloyd", "log(m*n)/eps^3", "table:pca/lloyd2014"),
    ("pca/nghiem", "m*log(n)*log(n/eps)^6/(eps*Delta)^4", "table:pca/nghiem2025"),
    ("pca/tang", "1/eps^6 + log(m*n)/eps^4", "table:pca/tang2021"),
    ("solver/ours", "normF*kappa^2*log(s*n)*log(kappa^2/eps)^2*log(1/eps)^2", "table:solver/ours"),
    ("solver/ours-psd", "normF*kappa^3*log(s*n)*log(kappa^1.5/eps)^2", "result:solver-psd"),
    ("solver/nghiem", "s^2*(s^2 + log(n))*log(s/eps)^3.5/eps", "table:solver/nghiem2025b"),
    ("solver/hhl", "s*kappa*log(n)/eps", "table:solver/harrow2009"),
    ("solver/childs", "s*kappa^2*log(kappa/eps)^2.5*(log(n) + log(kappa/eps)^2.5)", "table:solver/childs2017"),
    ("solver/clader", "s^7*log(n)/eps", "table:solver/clader2013"),
    ("solver/wossnig", "kappa^2*normF*log(n)/eps", "table:solver/wossnig2018"),
    ("simulation/ours", "log(s*n)*log(1/eps)^2*(t*normF + log(1/eps)/log(e + log(1/eps)/t))", "result:simulation"),
    ("ground-prep/result", "normF/gamma*sqrt(log(n/(eps*gamma))/Delta)*log(n)*log(1/eps)^2.5", "result:ground-state"),
    ("ground-prep/power", "log(n)*log(n/eps)*log(1/eps)/(Delta*gamma)", "table:ground-prep/power"),
    ("ground-prep/gradient", "log(1/eps)*(4/eps)*log(n)", "table:ground-prep/gradient"),
    ("ground-prep/ite", "normF/gamma*sqrt(log(n/(gamma^2*eps))/Delta)*log(n)*log(1/eps)^3.5", "table:ground-prep/ite"),
    ("ground-prep/dong", "TU/(gamma^2*eps)", "table:ground-prep/dong2022"),
    ("ground-prep/lin", "log(1/gamma)*log(1/eps)*TU/(gamma*eps)", "table:ground-prep/lin2020"),
    ("ground-energy/power", "log(n)*log(1/(eps*gamma))*log(1/eps)/(Delta*gamma*eps)", "table:ground-energy/power"),
    ("ground-energy/gradient", "log(n)*log(1/eps)/eps^2", "table:ground-energy/gradient"),
    ("ground-energy/dong", "TU/(gamma^2*eps)", "table:ground-energy/dong2022"),
    ("ground-energy/lin", "TU*log(1/eps)*log(1/gamma)/(gamma*eps)", "table:ground-energy/lin2020"),
    ("fit/ours", "normF*log(M*N)*kappa^2*log(1/eps)^2", "result:fit"),
    ("fit/ours-predict", "normF*log(M*N)*kappa^2*log(1/eps)^2/eps", "result:fit-predict"),
    ("fit/wiebe", "kappa^3*s^6*log(M*N)/eps", "text:fit/wiebe2012"),
    ("ledger/power-iterations", "log(n/eps)/Delta", "lemma:power-iterations"),
    ("ledger/exp-decay-degree", "sqrt(beta*log(1/eps))", "lemma:exp-decay-degree"),
    ("ledger/psd-solver-queries", "kappa^2*log(kappa^3/eps)^2", "lemma:negative-power"),
    ("ledger/jacobi-anger-degree", "t + log(1/eps)/log(e + log(1/eps)/t)", "lemma:jacobi-anger"),
];

/// Built-in formulas keyed by citation.
pub fn registry() -> BTreeMap<String, CostFormula> {
    REGISTRY
        .iter()
        .map(|(name, expr, src)| {
            let f = CostFormula::new(name, expr, src).expect("registry formulas parse");
            (src.to_string(), f)
        })
        .collect()
}

/// Formulas whose citation starts with `prefix`, in citation order.
pub fn table(prefix: &str) -> Vec<CostFormula> {
    registry()
        .into_iter()
        .filter(|(k, _)| k.starts_with(prefix))
        .map(|(_, v)| v)
        .collect()
}

pub const TABLE_FOOTER: &str = "hidden constants set to 1; log(x) = ln(max(x, e))";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub name: String,
    pub source: String,
    pub expression: String,
    pub value: f64,
    /// `value / other.value` keyed by the other row's name.
    pub ratios: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub params: Params,
    pub rows: Vec<CostRow>,
    pub footer: String,
}

pub fn render_table(rows: &[CostFormula], params: &Params) -> Result<CostTable> {
    let values: Vec<f64> = rows.iter().map(|f| evaluate(f, params)).collect::<Result<_>>()?;
    let out = rows
        .iter()
        .zip(&values)
        .map(|(f, &v)| CostRow {
            name: f.name.clone(),
            source: f.source.clone(),
            expression: f.expression.to_string(),
            value: v,
            ratios: rows
                .iter()
                .zip(&values)
                .map(|(g, &w)| (g.name.clone(), v / w))
                .collect(),
        })
        .collect();
    Ok(CostTable {
        params: params.clone(),
        rows: out,
        footer: TABLE_FOOTER.to_string(),
    })
}

impl CostTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let names: Vec<&str> = self.rows.iter().map(|r| r.name.as_str()).collect();
        let mut header = vec!["name".to_string(), "source".into(), "expression".into(), "value".into()];
        header.extend(names.iter().map(|n| format!("ratio_to_{n}")));
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        if !self.rows.is_empty() {
            w.write_record(&header).map_err(io)?;
        }
        for r in &self.rows {
            let mut rec = vec![r.name.clone(), r.source.clone(), r.expression.clone(), format!("{:e}", r.value)];
            rec.extend(names.iter().map(|n| format!("{:e}", r.ratios[*n])));
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        let mut s = String::from_utf8(bytes).expect("csv writer emits UTF-8");
        s.push_str(&format!("# {}\n", self.footer));
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost tables serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub axis: String,
    /// Smallest integer value from which `ours < other` holds up to `limit`.
    pub threshold: Option<u64>,
    pub limit: u64,
    /// `other / ours` at the threshold and at the limit.
    pub ratio_at_threshold: Option<f64>,
    pub ratio_at_limit: f64,
}

/// Scans `axis = 1..=limit` for the point past which `ours` stays below `other`.
pub fn crossover(ours: &CostFormula, other: &CostFormula, params: &Params, axis: &str, limit: u64) -> Result<Crossover> {
    let mut p = params.clone();
    let mut ratio = |v: u64| -> Result<f64> {
        p.insert(axis.to_string(), v as f64);
        Ok(evaluate(other, &p)? / evaluate(ours, &p)?)
    };
    let mut last_bad = None;
    for v in 1..=limit {
        if ratio(v)? <= 1.0 {
            last_bad = Some(v);
        }
    }
    let threshold = match last_bad {
        None => Some(1),
        Some(v) if v < limit => Some(v + 1),
        _ => None,
    };
    Ok(Crossover {
        axis: axis.to_string(),
        threshold,
        limit,
        ratio_at_threshold: threshold.map(&mut ratio).transpose()?,
        ratio_at_limit: ratio(limit)?,
    })
}
