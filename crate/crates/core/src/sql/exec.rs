//! Reference executor.
//!
//! Semantics in brief: the WHERE clause selects surviving rows in table
//! order; empty cells fail every comparison and are skipped by projections,
//! per-row arithmetic and aggregates. A query that yields no values is an
//! [`ExecError::EmptyResult`].

use std::cmp::Ordering;
use std::collections::HashSet;

use thiserror::Error;

use super::ast::{AggFn, ArithOp, CmpOp, Condition, SelectExpr, SqlQuery, Value};
use super::number::Number;
use super::table::{Cell, ColumnType, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("query produced no values")]
    EmptyResult,
    #[error("type error: {0}")]
    Type(String),
}

fn type_err<T>(msg: impl Into<String>) -> Result<T, ExecError> {
    Err(ExecError::Type(msg.into()))
}

/// Decimal places kept by AVG.
pub const AVG_PLACES: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    values: Vec<Cell>,
}

impl QueryResult {
    /// `None` when `values` is empty.
    pub fn new(values: Vec<Cell>) -> Option<Self> {
        (!values.is_empty()).then_some(QueryResult { values })
    }

    pub fn values(&self) -> &[Cell] {
        &self.values
    }
}

/// Cells joined by `", "`.
pub fn render_result(r: &QueryResult) -> String {
    r.values.iter().map(Cell::render).collect::<Vec<_>>().join(", ")
}

fn column(t: &Table, name: &str) -> Result<(usize, ColumnType), ExecError> {
    match t.column_index(name) {
        Some(i) => Ok((i, t.columns()[i].ctype)),
        None => type_err(format!("unknown column `{name}`")),
    }
}

fn check_number_column(t: &Table, name: &str, what: &str) -> Result<usize, ExecError> {
    match column(t, name)? {
        (i, ColumnType::Number) => Ok(i),
        _ => type_err(format!("{what} requires number column, `{name}` is text")),
    }
}

/// Type-checks `q` against `t`'s schema.
pub fn check_query(q: &SqlQuery, t: &Table) -> Result<(), ExecError> {
    check_select(&q.select, t)?;
    if let Some(c) = &q.filter {
        check_condition(c, t)?;
    }
    Ok(())
}

fn check_select(s: &SelectExpr, t: &Table) -> Result<(), ExecError> {
    match s {
        SelectExpr::Col(c) => column(t, c).map(drop),
        SelectExpr::Agg(AggFn::Count, c) => column(t, c).map(drop),
        SelectExpr::Agg(f, c) => check_number_column(t, c, f.keyword()).map(drop),
        SelectExpr::Arith(_, l, r) => match (l.as_ref(), r.as_ref()) {
            (SelectExpr::Col(a), SelectExpr::Col(b)) => {
                check_number_column(t, a, "arithmetic")?;
                check_number_column(t, b, "arithmetic").map(drop)
            }
            (SelectExpr::Agg(..), SelectExpr::Agg(..)) => {
                check_select(l, t)?;
                check_select(r, t)
            }
            _ => type_err("arithmetic operands must both be columns or both aggregates"),
        },
    }
}

fn check_condition(c: &Condition, t: &Table) -> Result<(), ExecError> {
    match c {
        Condition::Cmp { col, op, value } => {
            let (_, ctype) = column(t, col)?;
            match (ctype, value) {
                (ColumnType::Number, Value::Number(_)) => Ok(()),
                (ColumnType::Number, Value::Text(s)) => match s.trim().parse::<Number>() {
                    Ok(_) => Ok(()),
                    Err(_) => type_err(format!("`{s}` is not a number for column `{col}`")),
                },
                (ColumnType::Text, Value::Text(_)) if !op.is_ordering() => Ok(()),
                (ColumnType::Text, Value::Text(_)) => type_err(format!("`{}` on text column `{col}`", op.symbol())),
                (ColumnType::Text, Value::Number(_)) => type_err(format!("number literal for text column `{col}`")),
            }
        }
        Condition::And(l, r) | Condition::Or(l, r) => {
            check_condition(l, t)?;
            check_condition(r, t)
        }
        Condition::In { col, subquery } => {
            let (_, outer) = column(t, col)?;
            let SelectExpr::Col(inner) = &subquery.select else {
                return type_err("subquery must select a single column");
            };
            let (_, inner_type) = column(t, inner)?;
            if inner_type != outer {
                return type_err(format!("IN compares `{col}` with `{inner}` of a different type"));
            }
            if subquery.filter.as_ref().is_some_and(Condition::contains_subquery) {
                return type_err("subqueries may not nest");
            }
            check_query(subquery, t)
        }
    }
}

/// A condition with columns resolved and subqueries evaluated.
enum Predicate {
    Cmp { col: usize, op: CmpOp, operand: Operand },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    In { col: usize, members: HashSet<Cell> },
}

enum Operand {
    Number(Number),
    Text(String),
}

fn compile(c: &Condition, t: &Table) -> Result<Predicate, ExecError> {
    Ok(match c {
        Condition::Cmp { col, op, value } => {
            let (idx, ctype) = column(t, col)?;
            let operand = match (ctype, value) {
                (ColumnType::Number, Value::Number(n)) => Operand::Number(n.clone()),
                (ColumnType::Number, Value::Text(s)) => Operand::Number(
                    s.trim().parse().map_err(|_| ExecError::Type(format!("`{s}` is not a number")))?,
                ),
                (ColumnType::Text, Value::Text(s)) => Operand::Text(s.trim().to_string()),
                (ColumnType::Text, Value::Number(_)) => return type_err("number literal for text column"),
            };
            Predicate::Cmp { col: idx, op: *op, operand }
        }
        Condition::And(l, r) => Predicate::And(Box::new(compile(l, t)?), Box::new(compile(r, t)?)),
        Condition::Or(l, r) => Predicate::Or(Box::new(compile(l, t)?), Box::new(compile(r, t)?)),
        Condition::In { col, subquery } => {
            let (idx, _) = column(t, col)?;
            let members = match execute(subquery, t) {
                Ok(r) => r.values.into_iter().collect(),
                Err(ExecError::EmptyResult) => HashSet::new(),
                Err(e) => return Err(e),
            };
            Predicate::In { col: idx, members }
        }
    })
}

fn compare(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Ge => ord != Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
    }
}

impl Predicate {
    fn matches(&self, row: &[Cell]) -> bool {
        match self {
            Predicate::Cmp { col, op, operand } => match (&row[*col], operand) {
                (Cell::Number(n), Operand::Number(v)) => compare(*op, n.cmp(v)),
                (Cell::Text(s), Operand::Text(v)) => compare(*op, s.trim().as_bytes().cmp(v.as_bytes())),
                _ => false,
            },
            Predicate::And(l, r) => l.matches(row) && r.matches(row),
            Predicate::Or(l, r) => l.matches(row) || r.matches(row),
            Predicate::In { col, members } => !row[*col].is_empty() && members.contains(&row[*col]),
        }
    }
}

/// Indices of rows passing the WHERE clause, in table order.
pub fn surviving_rows(q: &SqlQuery, t: &Table) -> Result<Vec<usize>, ExecError> {
    match &q.filter {
        None => Ok((0..t.rows().len()).collect()),
        Some(c) => {
            let pred = compile(c, t)?;
            Ok(t.rows().iter().enumerate().filter(|(_, row)| pred.matches(row)).map(|(i, _)| i).collect())
        }
    }
}

fn aggregate(f: AggFn, col: usize, rows: &[usize], t: &Table, filtered: bool) -> Result<Number, ExecError> {
    if filtered && rows.is_empty() {
        return Err(ExecError::EmptyResult);
    }
    let cells = rows.iter().map(|&r| &t.rows()[r][col]).filter(|c| !c.is_empty());
    if f == AggFn::Count {
        return Ok(Number::from_i64(cells.count() as i64));
    }
    let nums: Vec<&Number> = cells.filter_map(Cell::as_number).collect();
    if nums.is_empty() {
        return Err(ExecError::EmptyResult);
    }
    Ok(match f {
        AggFn::Max => nums.iter().copied().max().cloned().expect("non-empty"),
        AggFn::Min => nums.iter().copied().min().cloned().expect("non-empty"),
        AggFn::Sum | AggFn::Avg => {
            let sum = nums.iter().fold(Number::from_i64(0), |acc, n| &acc + n);
            if f == AggFn::Sum {
                sum
            } else {
                let avg = sum.into_ratio() / num_rational::BigRational::from_integer((nums.len() as i64).into());
                Number::from_ratio(avg).round_dp(AVG_PLACES)
            }
        }
        AggFn::Count => unreachable!(),
    })
}

fn apply(op: ArithOp, l: &Number, r: &Number) -> Number {
    match op {
        ArithOp::Add => l + r,
        ArithOp::Sub => l - r,
    }
}

pub fn execute(q: &SqlQuery, t: &Table) -> Result<QueryResult, ExecError> {
    check_query(q, t)?;
    let rows = surviving_rows(q, t)?;
    let filtered = q.filter.is_some();
    let values = match &q.select {
        SelectExpr::Col(c) => {
            let (idx, _) = column(t, c)?;
            rows.iter().map(|&r| &t.rows()[r][idx]).filter(|c| !c.is_empty()).cloned().collect()
        }
        SelectExpr::Agg(f, c) => {
            let (idx, _) = column(t, c)?;
            vec![Cell::Number(aggregate(*f, idx, &rows, t, filtered)?)]
        }
        SelectExpr::Arith(op, l, r) => match (l.as_ref(), r.as_ref()) {
            (SelectExpr::Col(a), SelectExpr::Col(b)) => {
                let (ia, _) = column(t, a)?;
                let (ib, _) = column(t, b)?;
                rows.iter()
                    .filter_map(|&r| {
                        let row = &t.rows()[r];
                        Some(Cell::Number(apply(*op, row[ia].as_number()?, row[ib].as_number()?)))
                    })
                    .collect()
            }
            (SelectExpr::Agg(fa, a), SelectExpr::Agg(fb, b)) => {
                let left = aggregate(*fa, column(t, a)?.0, &rows, t, filtered)?;
                let right = aggregate(*fb, column(t, b)?.0, &rows, t, filtered)?;
                vec![Cell::Number(apply(*op, &left, &right))]
            }
            _ => return type_err("arithmetic operands must both be columns or both aggregates"),
        },
    };
    QueryResult::new(values).ok_or(ExecError::EmptyResult)
}
