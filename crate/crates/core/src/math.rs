//! Addition/subtraction programs over a context of named decimal variables.
//!
//! Values are multiples of 0.1 held as integer tenths, so evaluation is exact.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::corpus::{PretrainExample, RngStream, SeedSpec, Task};

/// Largest value a variable may take, in tenths (1000.0).
pub const MAX_VALUE_TENTHS: i64 = 10_000;
pub const MAX_IRRELEVANT_VARS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("expression must have 2 or 3 terms, got {0}")]
    TermCount(usize),
    #[error("first term must be positive")]
    LeadingMinus,
    #[error("duplicate variable `{0}` in context")]
    DuplicateVar(String),
    #[error("value {0} outside [0.0, 1000.0]")]
    ValueRange(Tenths),
    #[error("{0} irrelevant variables exceeds the limit of 30")]
    TooManyIrrelevant(usize),
    #[error("cannot parse `{0}`")]
    Syntax(String),
}

/// A decimal with exactly one fractional digit, stored as tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tenths(pub i64);

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{}", abs / 10, abs % 10)
    }
}

impl FromStr for Tenths {
    type Err = MathError;

    /// Accepts `[-]digits.digit`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MathError::Syntax(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').ok_or_else(bad)?;
        if int.is_empty() || frac.len() != 1 || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = int.parse().map_err(|_| bad())?;
        let v = whole.checked_mul(10).and_then(|w| w.checked_add((frac.as_bytes()[0] - b'0') as i64)).ok_or_else(bad)?;
        Ok(Tenths(if neg { -v } else { v }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// `v1 (± v2){1,2}`; the first term is always added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathExpr {
    terms: Vec<(Sign, String)>,
}

impl MathExpr {
    pub fn new(terms: Vec<(Sign, String)>) -> Result<Self, MathError> {
        if !(2..=3).contains(&terms.len()) {
            return Err(MathError::TermCount(terms.len()));
        }
        if terms[0].0 != Sign::Plus {
            return Err(MathError::LeadingMinus);
        }
        Ok(MathExpr { terms })
    }

    pub fn terms(&self) -> &[(Sign, String)] {
        &self.terms
    }

    pub fn operator_count(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn distinct_vars(&self) -> HashSet<&str> {
        self.terms.iter().map(|(_, v)| v.as_str()).collect()
    }
}

impl fmt::Display for MathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (_, first) = &self.terms[0];
        f.write_str(first)?;
        for (sign, var) in &self.terms[1..] {
            write!(f, " {} {var}", sign.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for MathExpr {
    type Err = MathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = s.split(' ');
        let first = tokens.next().filter(|t| is_var_name(t)).ok_or_else(|| MathError::Syntax(s.into()))?;
        let mut terms = vec![(Sign::Plus, first.to_string())];
        while let Some(op) = tokens.next() {
            let sign = match op {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                _ => return Err(MathError::Syntax(s.into())),
            };
            let var = tokens.next().filter(|t| is_var_name(t)).ok_or_else(|| MathError::Syntax(s.into()))?;
            terms.push((sign, var.to_string()));
        }
        MathExpr::new(terms)
    }
}

fn is_var_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// `a`..`z`, then `aa`, `ab`, ... (bijective base 26).
pub fn var_name(mut index: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Variable bindings in presentation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathContext {
    bindings: Vec<(String, Tenths)>,
    necessary_count: usize,
    irrelevant_count: usize,
}

impl MathContext {
    /// Builds a context for `expr`; bindings not mentioned by `expr` count as
    /// irrelevant.
    pub fn new(bindings: Vec<(String, Tenths)>, expr: &MathExpr) -> Result<Self, MathError> {
        let mut names = HashSet::with_capacity(bindings.len());
        for (name, value) in &bindings {
            if !names.insert(name.as_str()) {
                return Err(MathError::DuplicateVar(name.clone()));
            }
            if !(0..=MAX_VALUE_TENTHS).contains(&value.0) {
                return Err(MathError::ValueRange(*value));
            }
        }
        let used = expr.distinct_vars();
        let necessary_count = used.iter().filter(|v| names.contains(*v)).count();
        let irrelevant_count = bindings.len() - necessary_count;
        if irrelevant_count > MAX_IRRELEVANT_VARS {
            return Err(MathError::TooManyIrrelevant(irrelevant_count));
        }
        Ok(MathContext { bindings, necessary_count, irrelevant_count })
    }

    pub fn bindings(&self) -> &[(String, Tenths)] {
        &self.bindings
    }

    pub fn necessary_count(&self) -> usize {
        self.necessary_count
    }

    pub fn irrelevant_count(&self) -> usize {
        self.irrelevant_count
    }

    pub fn get(&self, name: &str) -> Option<Tenths> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

pub fn eval_math(expr: &MathExpr, ctx: &MathContext) -> Result<Tenths, MathError> {
    expr.terms.iter().try_fold(Tenths(0), |acc, (sign, var)| {
        let v = ctx.get(var).ok_or_else(|| MathError::Unbound(var.clone()))?;
        Ok(match sign {
            Sign::Plus => Tenths(acc.0 + v.0),
            Sign::Minus => Tenths(acc.0 - v.0),
        })
    })
}

/// `name = value ;` items joined by single spaces.
pub fn render_math_context(ctx: &MathContext) -> String {
    render_bindings(ctx.bindings())
}

fn render_bindings(bindings: &[(String, Tenths)]) -> String {
    let mut out = String::with_capacity(bindings.len() * 12);
    for (i, (name, value)) in bindings.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(name);
        out.push_str(" = ");
        out.push_str(&value.to_string());
        out.push_str(" ;");
    }
    out
}

/// Inverse of [`render_math_context`].
pub fn parse_bindings(text: &str) -> Result<Vec<(String, Tenths)>, MathError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if !tokens.len().is_multiple_of(4) {
        return Err(MathError::Syntax(text.into()));
    }
    tokens
        .chunks(4)
        .map(|item| match item {
            [name, "=", value, ";"] if is_var_name(name) => Ok((name.to_string(), value.parse()?)),
            _ => Err(MathError::Syntax(item.join(" "))),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MathConfig {
    pub irrelevant_vars: usize,
    pub count: u64,
}

/// Samples one (program, context) pair from an example's RNG stream.
pub fn sample_math<R: Rng>(rng: &mut R, irrelevant_vars: usize) -> (MathExpr, MathContext) {
    let operators = rng.gen_range(1..=2);
    let necessary = operators + 1;
    let total = necessary + irrelevant_vars;
    let values: Vec<Tenths> = (0..total).map(|_| Tenths(rng.gen_range(0..=MAX_VALUE_TENTHS))).collect();
    let picked = rand::seq::index::sample(rng, total, necessary);
    let terms = picked
        .iter()
        .enumerate()
        .map(|(i, var)| {
            let sign = if i == 0 || rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
            (sign, var_name(var))
        })
        .collect();
    let expr = MathExpr::new(terms).expect("2 or 3 terms with leading plus");
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let bindings = order.into_iter().map(|i| (var_name(i), values[i])).collect();
    let ctx = MathContext::new(bindings, &expr).expect("generated context is valid");
    (expr, ctx)
}

pub fn gen_math(seed: &SeedSpec, cfg: &MathConfig) -> Result<Vec<PretrainExample>, MathError> {
    if cfg.irrelevant_vars > MAX_IRRELEVANT_VARS {
        return Err(MathError::TooManyIrrelevant(cfg.irrelevant_vars));
    }
    Ok(seed
        .indices(cfg.count)
        .map(|index| {
            let mut rng = seed.rng(RngStream::Math, index);
            let (expr, ctx) = sample_math(&mut rng, cfg.irrelevant_vars);
            let result = eval_math(&expr, &ctx).expect("all generated vars are bound");
            PretrainExample::new(
                format!("math-{}-{index}", seed.master_seed()),
                Task::Math,
                render_math_context(&ctx),
                expr.to_string(),
                result.to_string(),
            )
            .with_meta("seed", seed.master_seed())
            .with_meta("irrelevant_vars", cfg.irrelevant_vars)
        })
        .collect())
}
