//! Reference implementations used by the integration and acceptance tests.
//!
//! Everything here is written against the text formats and the documented
//! semantics, sharing no evaluation code with the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
pub mod sqlgen;

use poet_forge::sql::{AggFn, ArithOp, Cell, CmpOp, Condition, SelectExpr, SqlQuery, Table, Value};

// ---------------------------------------------------------------- decimals

/// Parses `[-]digits[.digits]` into an exact rational.
pub fn decimal(text: &str) -> BigRational {
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| panic!("bad decimal {text}"));
    let r = BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    if neg {
        -r
    } else {
        r
    }
}

/// Renders with exactly `places` fractional digits; the value must be exact.
pub fn fixed(r: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10).pow(places);
    let scaled = r * BigRational::from_integer(scale.clone());
    assert!(scaled.is_integer(), "{r} has more than {places} places");
    let n = scaled.to_integer();
    let sign = if n.is_negative() { "-" } else { "" };
    let abs = n.abs();
    if places == 0 {
        return format!("{sign}{abs}");
    }
    let int = &abs / &scale;
    let frac = (&abs % &scale).to_string();
    format!("{sign}{int}.{frac:0>width$}", width = places as usize)
}

// -------------------------------------------------------------------- math

/// Evaluates a math program (`a + b - c`) against its context text
/// (`a = 1.0 ; b = 2.5 ;`).
pub fn math_oracle(context: &str, program: &str) -> String {
    let needed: Vec<&str> = program.split_whitespace().step_by(2).collect();
    let mut env = BTreeMap::new();
    for binding in context.split(';').map(str::trim).filter(|b| !b.is_empty()) {
        let (name, value) = binding.split_once(" = ").expect("binding");
        if needed.contains(&name) {
            env.insert(name.to_string(), decimal(value));
        }
    }
    let mut tokens = program.split_whitespace();
    let mut acc = env[tokens.next().expect("first term")].clone();
    while let Some(op) = tokens.next() {
        let v = &env[tokens.next().expect("operand")];
        match op {
            "+" => acc += v,
            "-" => acc -= v,
            other => panic!("operator {other}"),
        }
    }
    fixed(&acc, 1)
}

// ------------------------------------------------------------------- logic

/// A literal as (variable, positive polarity).
pub type Lit = (u8, bool);

/// Parses `~ p2 -> p4` into (antecedent, consequent).
pub fn parse_implication(text: &str) -> (Lit, Lit) {
    let (l, r) = text.split_once(" -> ").expect("implication");
    let lit = |s: &str| -> Lit {
        let (pos, name) = match s.strip_prefix("~ ") {
            Some(n) => (false, n),
            None => (true, s),
        };
        (name.strip_prefix('p').expect("variable").parse().expect("index"), pos)
    };
    (lit(l), lit(r))
}

fn dpll(clauses: &[Vec<Lit>], assignment: &mut BTreeMap<u8, bool>) -> bool {
    loop {
        let mut unit = None;
        for clause in clauses {
            let mut unassigned = Vec::new();
            let mut satisfied = false;
            for &(v, pos) in clause {
                match assignment.get(&v) {
                    Some(&val) if val == pos => satisfied = true,
                    Some(_) => {}
                    None => unassigned.push((v, pos)),
                }
            }
            if satisfied {
                continue;
            }
            match unassigned.len() {
                0 => return false,
                1 => {
                    unit = Some(unassigned[0]);
                    break;
                }
                _ => {}
            }
        }
        match unit {
            Some((v, pos)) => {
                assignment.insert(v, pos);
            }
            None => break,
        }
    }
    let branch = clauses.iter().flatten().map(|&(v, _)| v).find(|v| !assignment.contains_key(v));
    let Some(v) = branch else {
        return true;
    };
    for value in [true, false] {
        let mut next = assignment.clone();
        next.insert(v, value);
        if dpll(clauses, &mut next) {
            return true;
        }
    }
    false
}

/// Premises entail the conclusion iff premises plus its negation are
/// unsatisfiable. `a -> b` is the clause `~a | b`; `~(a -> b)` is `a & ~b`.
pub fn dpll_entails(premises: &[(Lit, Lit)], conclusion: (Lit, Lit)) -> bool {
    let neg = |(v, pos): Lit| (v, !pos);
    let mut clauses: Vec<Vec<Lit>> = premises.iter().map(|&(a, b)| vec![neg(a), b]).collect();
    clauses.push(vec![conclusion.0]);
    clauses.push(vec![neg(conclusion.1)]);
    !dpll(&clauses, &mut BTreeMap::new())
}

/// Entailment label for a logic example's context and program text.
pub fn logic_oracle(context: &str, program: &str) -> &'static str {
    let premises: Vec<_> = context.split(" ; ").filter(|s| !s.is_empty()).map(parse_implication).collect();
    if dpll_entails(&premises, parse_implication(program)) {
        "True"
    } else {
        "False"
    }
}

// --------------------------------------------------------------------- sql

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OVal {
    Text(String),
    Num(BigRational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OErr {
    Empty,
    Type,
}

/// Row-major copy of a table with `None` for empty cells.
pub struct OTable {
    names: Vec<String>,
    numeric: Vec<bool>,
    rows: Vec<Vec<Option<OVal>>>,
}

impl OTable {
    pub fn from_table(t: &Table) -> Self {
        let names = t.columns().iter().map(|c| c.name.clone()).collect();
        let numeric = t.columns().iter().map(|c| c.ctype == poet_forge::sql::ColumnType::Number).collect();
        let rows = t.rows().iter().map(|r| r.iter().map(oval).collect()).collect();
        OTable { names, numeric, rows }
    }

    fn col(&self, name: &str) -> Result<usize, OErr> {
        self.names.iter().position(|n| n == name).ok_or(OErr::Type)
    }
}

pub fn oval(c: &Cell) -> Option<OVal> {
    match c {
        Cell::Text(s) => Some(OVal::Text(s.clone())),
        Cell::Number(n) => Some(OVal::Num(n.as_ratio().clone())),
        Cell::Empty => None,
    }
}

fn is_agg_number_fn(f: AggFn) -> bool {
    !matches!(f, AggFn::Count)
}

fn typecheck_select(s: &SelectExpr, t: &OTable) -> Result<(), OErr> {
    match s {
        SelectExpr::Col(c) => t.col(c).map(|_| ()),
        SelectExpr::Agg(f, c) => {
            let i = t.col(c)?;
            if is_agg_number_fn(*f) && !t.numeric[i] {
                return Err(OErr::Type);
            }
            Ok(())
        }
        SelectExpr::Arith(_, l, r) => match (&**l, &**r) {
            (SelectExpr::Col(a), SelectExpr::Col(b)) => {
                if t.numeric[t.col(a)?] && t.numeric[t.col(b)?] {
                    Ok(())
                } else {
                    Err(OErr::Type)
                }
            }
            (SelectExpr::Agg(..), SelectExpr::Agg(..)) => {
                typecheck_select(l, t)?;
                typecheck_select(r, t)
            }
            _ => Err(OErr::Type),
        },
    }
}

fn has_in(c: &Condition) -> bool {
    match c {
        Condition::In { .. } => true,
        Condition::Cmp { .. } => false,
        Condition::And(a, b) | Condition::Or(a, b) => has_in(a) || has_in(b),
    }
}

fn literal_number(v: &Value) -> Option<BigRational> {
    match v {
        Value::Number(n) => Some(n.as_ratio().clone()),
        Value::Text(s) => {
            let s = s.trim();
            let body = s.strip_prefix('-').unwrap_or(s);
            let (int, frac) = body.split_once('.').unwrap_or((body, "0"));
            let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
            (digits(int) && digits(frac)).then(|| decimal(s))
        }
    }
}

fn typecheck_cond(c: &Condition, t: &OTable) -> Result<(), OErr> {
    match c {
        Condition::Cmp { col, op, value } => {
            let i = t.col(col)?;
            if t.numeric[i] {
                literal_number(value).map(|_| ()).ok_or(OErr::Type)
            } else {
                match value {
                    Value::Text(_) if matches!(op, CmpOp::Eq | CmpOp::Ne) => Ok(()),
                    _ => Err(OErr::Type),
                }
            }
        }
        Condition::And(a, b) | Condition::Or(a, b) => {
            typecheck_cond(a, t)?;
            typecheck_cond(b, t)
        }
        Condition::In { col, subquery } => {
            let outer = t.col(col)?;
            let SelectExpr::Col(inner) = &subquery.select else {
                return Err(OErr::Type);
            };
            let inner = t.col(inner)?;
            if t.numeric[outer] != t.numeric[inner] {
                return Err(OErr::Type);
            }
            if let Some(f) = &subquery.filter {
                if has_in(f) {
                    return Err(OErr::Type);
                }
                typecheck_cond(f, t)?;
            }
            Ok(())
        }
    }
}

fn holds(c: &Condition, row: &[Option<OVal>], t: &OTable) -> bool {
    match c {
        Condition::Cmp { col, op, value } => {
            let i = t.col(col).unwrap();
            let ord = match &row[i] {
                None => return false,
                Some(OVal::Num(n)) => n.cmp(&literal_number(value).unwrap()),
                Some(OVal::Text(s)) => match value {
                    Value::Text(v) => s.trim().cmp(v.trim()),
                    Value::Number(_) => return false,
                },
            };
            match op {
                CmpOp::Eq => ord.is_eq(),
                CmpOp::Ne => ord.is_ne(),
                CmpOp::Gt => ord.is_gt(),
                CmpOp::Lt => ord.is_lt(),
                CmpOp::Ge => ord.is_ge(),
                CmpOp::Le => ord.is_le(),
            }
        }
        Condition::And(a, b) => holds(a, row, t) && holds(b, row, t),
        Condition::Or(a, b) => holds(a, row, t) || holds(b, row, t),
        Condition::In { col, subquery } => {
            let Some(v) = &row[t.col(col).unwrap()] else {
                return false;
            };
            // Re-run the subquery for every outer row.
            match run(subquery, t) {
                Ok(values) => values.contains(v),
                Err(_) => false,
            }
        }
    }
}

fn round_half_away(r: &BigRational, places: u32) -> BigRational {
    let scale = BigRational::from_integer(BigInt::from(10).pow(places));
    let scaled = r * &scale;
    let half = BigRational::new(1.into(), 2.into());
    let mag = (scaled.abs() + half).floor();
    let signed = if scaled.is_negative() { -mag } else { mag };
    signed / scale
}

fn fold(f: AggFn, i: usize, rows: &[&Vec<Option<OVal>>], filtered: bool) -> Result<BigRational, OErr> {
    if filtered && rows.is_empty() {
        return Err(OErr::Empty);
    }
    let present: Vec<&OVal> = rows.iter().filter_map(|r| r[i].as_ref()).collect();
    if f == AggFn::Count {
        return Ok(BigRational::from_integer(present.len().into()));
    }
    let nums: Vec<&BigRational> = present
        .iter()
        .filter_map(|v| match v {
            OVal::Num(n) => Some(n),
            OVal::Text(_) => None,
        })
        .collect();
    if nums.is_empty() {
        return Err(OErr::Empty);
    }
    let mut best = nums[0].clone();
    let mut sum = BigRational::zero();
    for n in &nums {
        sum += *n;
        match f {
            AggFn::Max if *n > &best => best = (*n).clone(),
            AggFn::Min if *n < &best => best = (*n).clone(),
            _ => {}
        }
    }
    Ok(match f {
        AggFn::Max | AggFn::Min => best,
        AggFn::Sum => sum,
        AggFn::Avg => round_half_away(&(sum / BigRational::from_integer(nums.len().into())), 4),
        AggFn::Count => unreachable!(),
    })
}

fn arith(op: ArithOp, a: &BigRational, b: &BigRational) -> BigRational {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
    }
}

fn run(q: &SqlQuery, t: &OTable) -> Result<Vec<OVal>, OErr> {
    typecheck_select(&q.select, t)?;
    if let Some(f) = &q.filter {
        typecheck_cond(f, t)?;
    }
    let mut rows = Vec::new();
    for row in &t.rows {
        if q.filter.as_ref().is_none_or(|c| holds(c, row, t)) {
            rows.push(row);
        }
    }
    let filtered = q.filter.is_some();
    let out = match &q.select {
        SelectExpr::Col(c) => {
            let i = t.col(c)?;
            rows.iter().filter_map(|r| r[i].clone()).collect()
        }
        SelectExpr::Agg(f, c) => vec![OVal::Num(fold(*f, t.col(c)?, &rows, filtered)?)],
        SelectExpr::Arith(op, l, r) => match (&**l, &**r) {
            (SelectExpr::Col(a), SelectExpr::Col(b)) => {
                let (a, b) = (t.col(a)?, t.col(b)?);
                let mut out = Vec::new();
                for row in &rows {
                    if let (Some(OVal::Num(x)), Some(OVal::Num(y))) = (&row[a], &row[b]) {
                        out.push(OVal::Num(arith(*op, x, y)));
                    }
                }
                out
            }
            (SelectExpr::Agg(fa, a), SelectExpr::Agg(fb, b)) => {
                let x = fold(*fa, t.col(a)?, &rows, filtered)?;
                let y = fold(*fb, t.col(b)?, &rows, filtered)?;
                vec![OVal::Num(arith(*op, &x, &y))]
            }
            _ => return Err(OErr::Type),
        },
    };
    if out.is_empty() {
        return Err(OErr::Empty);
    }
    Ok(out)
}

/// Naive row-scan evaluation of `q` over `t`.
pub fn sql_oracle(q: &SqlQuery, t: &Table) -> Result<Vec<OVal>, OErr> {
    run(q, &OTable::from_table(t))
}

// -------------------------------------------------------------- flattening

/// Value strings of every cell in a flattened context, with the token range
/// each occupies. Parsed from the text alone.
pub fn flattened_cells(context: &str) -> Vec<(String, usize, usize)> {
    let tokens: Vec<&str> = context.split_whitespace().collect();
    let mut cells = Vec::new();
    let mut i = 0;
    let mut in_row = false;
    let mut start = None;
    let close = |start: &mut Option<usize>, end: usize, cells: &mut Vec<(String, usize, usize)>| {
        if let Some(s) = start.take() {
            cells.push((tokens[s..end].join(" "), s, end));
        }
    };
    while i < tokens.len() {
        match tokens[i] {
            "ROW" => {
                close(&mut start, i, &mut cells);
                // ROW <n> :
                i += 3;
                in_row = true;
                start = Some(i);
                continue;
            }
            "|" if in_row => {
                close(&mut start, i, &mut cells);
                start = Some(i + 1);
            }
            _ => {}
        }
        i += 1;
    }
    close(&mut start, tokens.len(), &mut cells);
    cells
}

/// Renders an oracle value the way results are written: integers without a
/// fractional part, other decimals with no trailing zeros.
pub fn render_oval(v: &OVal) -> String {
    match v {
        OVal::Text(s) => s.clone(),
        OVal::Num(n) => {
            let mut places = 0;
            while !(n * BigRational::from_integer(BigInt::from(10).pow(places))).is_integer() {
                places += 1;
                assert!(places <= 10, "{n} is not a short decimal");
            }
            fixed(n, places)
        }
    }
}

impl OTable {
    /// Rebuilds a table from flattened context text and its column types
    /// (`text,number,...`), using only the text layout.
    pub fn from_flattened(context: &str, types: &str) -> Self {
        let numeric: Vec<bool> = types.split(',').map(|t| t == "number").collect();
        let head = context.strip_prefix("HEAD : ").expect("HEAD");
        let head = head.split(" ROW ").next().unwrap();
        let names: Vec<String> = head.split(" | ").map(|s| s.trim().to_string()).collect();
        assert_eq!(names.len(), numeric.len(), "{context}");
        let cells = flattened_cells(context);
        assert_eq!(cells.len() % names.len(), 0, "{context}");
        let rows = cells
            .chunks(names.len())
            .map(|row| {
                row.iter()
                    .zip(&numeric)
                    .map(|((text, _, _), &num)| match (text.is_empty(), num) {
                        (true, _) => None,
                        (false, true) => Some(OVal::Num(decimal(text))),
                        (false, false) => Some(OVal::Text(text.clone())),
                    })
                    .collect()
            })
            .collect();
        OTable { names, numeric, rows }
    }
}

pub fn sql_oracle_on(q: &SqlQuery, t: &OTable) -> Result<Vec<OVal>, OErr> {
    run(q, t)
}
