//! Random small tables and queries of each reasoning shape.

use poet_forge::builder::Shape;
use poet_forge::sql::{AggFn, ArithOp, Cell, CmpOp, Column, ColumnType, Condition, Number, SelectExpr, SqlQuery, Table, Value};
use rand::seq::SliceRandom;
use rand::Rng;

const TEXTS: [&str; 8] = ["Athens", "Paris", "Oslo", "Rome", "New York", "Lima", "it's", "São Paulo"];
const NUMBERS: [&str; 12] = ["0", "1", "2", "3", "5", "7", "-4", "2.5", "10", "0.1", "12.75", "100"];

/// At most 8 rows and 5 columns; column 0 is numeric and column 1 text.
pub fn random_table<R: Rng>(rng: &mut R) -> Table {
    let ncols = rng.gen_range(2..=5);
    let columns: Vec<Column> = (0..ncols)
        .map(|i| {
            let ctype = match i {
                0 => ColumnType::Number,
                1 => ColumnType::Text,
                _ if rng.gen_bool(0.5) => ColumnType::Number,
                _ => ColumnType::Text,
            };
            Column::new(format!("c{i}"), ctype)
        })
        .collect();
    let nrows = rng.gen_range(0..=8);
    let rows = (0..nrows)
        .map(|_| {
            columns
                .iter()
                .map(|c| {
                    if rng.gen_bool(0.12) {
                        return Cell::Empty;
                    }
                    match c.ctype {
                        ColumnType::Number => Cell::Number(NUMBERS.choose(rng).unwrap().parse().unwrap()),
                        ColumnType::Text => Cell::Text(TEXTS.choose(rng).unwrap().to_string()),
                    }
                })
                .collect()
        })
        .collect();
    Table::new("t", columns, rows).unwrap()
}

fn cols_of(t: &Table, ctype: Option<ColumnType>) -> Vec<String> {
    t.columns().iter().filter(|c| ctype.is_none_or(|ct| c.ctype == ct)).map(|c| c.name.clone()).collect()
}

fn pick<R: Rng>(rng: &mut R, names: &[String]) -> String {
    names.choose(rng).unwrap().clone()
}

fn number_value<R: Rng>(rng: &mut R) -> Value {
    let n: Number = NUMBERS.choose(rng).unwrap().parse().unwrap();
    if rng.gen_bool(0.1) {
        Value::Text(n.to_string())
    } else {
        Value::Number(n)
    }
}

/// A comparison usually drawn to be well typed; roughly one in twenty is not.
pub fn random_cmp<R: Rng>(rng: &mut R, t: &Table, ordering_only: bool) -> Condition {
    let ill_typed = rng.gen_bool(0.05);
    let candidates: Vec<&Column> = if ordering_only && !ill_typed {
        t.columns().iter().filter(|c| c.ctype == ColumnType::Number).collect()
    } else {
        t.columns().iter().collect()
    };
    let col = (*candidates.choose(rng).unwrap()).clone();
    let numeric = col.ctype == ColumnType::Number;
    let op = if ordering_only {
        *[CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le].choose(rng).unwrap()
    } else if numeric || ill_typed {
        *CmpOp::ALL.choose(rng).unwrap()
    } else {
        *[CmpOp::Eq, CmpOp::Ne].choose(rng).unwrap()
    };
    let value = if numeric != ill_typed {
        number_value(rng)
    } else {
        Value::Text(TEXTS.choose(rng).unwrap().to_string())
    };
    Condition::cmp(col.name, op, value)
}

fn maybe_filter<R: Rng>(rng: &mut R, t: &Table) -> Option<Condition> {
    match rng.gen_range(0..4) {
        0 | 1 => None,
        2 => Some(random_cmp(rng, t, false)),
        _ => Some(random_cmp(rng, t, false).and(random_cmp(rng, t, false))),
    }
}

fn query(select: SelectExpr, filter: Option<Condition>) -> SqlQuery {
    match filter {
        Some(f) => SqlQuery::filtered(select, f),
        None => SqlQuery::new(select),
    }
}

pub fn random_query<R: Rng>(rng: &mut R, shape: Shape, t: &Table) -> SqlQuery {
    let nums = cols_of(t, Some(ColumnType::Number));
    let all = cols_of(t, None);
    let op = if rng.gen_bool(0.5) { ArithOp::Add } else { ArithOp::Sub };
    match shape {
        Shape::Arithmetic => {
            let select = if rng.gen_bool(0.5) {
                SelectExpr::arith(op, SelectExpr::col(pick(rng, &nums)), SelectExpr::col(pick(rng, &nums)))
            } else {
                let agg = |rng: &mut R| {
                    let f = *AggFn::ALL.choose(rng).unwrap();
                    let col = if f == AggFn::Count { pick(rng, &all) } else { pick(rng, &nums) };
                    SelectExpr::agg(f, col)
                };
                SelectExpr::arith(op, agg(rng), agg(rng))
            };
            query(select, maybe_filter(rng, t))
        }
        Shape::Superlative => {
            let f = if rng.gen_bool(0.5) { AggFn::Max } else { AggFn::Min };
            query(SelectExpr::agg(f, pick(rng, &nums)), maybe_filter(rng, t))
        }
        Shape::Comparative => {
            let mut cond = random_cmp(rng, t, true);
            if rng.gen_bool(0.3) {
                cond = cond.and(random_cmp(rng, t, false));
            }
            SqlQuery::filtered(SelectExpr::col(pick(rng, &all)), cond)
        }
        Shape::Aggregation => {
            let f = *[AggFn::Count, AggFn::Sum, AggFn::Avg].choose(rng).unwrap();
            let col = if f == AggFn::Count { pick(rng, &all) } else { pick(rng, &nums) };
            query(SelectExpr::agg(f, col), maybe_filter(rng, t))
        }
        Shape::Union => {
            let cond = random_cmp(rng, t, false).or(random_cmp(rng, t, false));
            SqlQuery::filtered(SelectExpr::col(pick(rng, &all)), cond)
        }
        Shape::Nested => {
            let outer = t.columns().choose(rng).unwrap().clone();
            let same = cols_of(t, Some(outer.ctype));
            let inner = query(SelectExpr::col(pick(rng, &same)), maybe_filter(rng, t));
            let mut cond = Condition::in_subquery(outer.name, inner);
            if rng.gen_bool(0.2) {
                cond = cond.and(random_cmp(rng, t, false));
            }
            SqlQuery::filtered(SelectExpr::col(pick(rng, &all)), cond)
        }
        Shape::PlainSelect => {
            let mut cond = random_cmp(rng, t, false);
            if let Condition::Cmp { op, .. } = &mut cond {
                if op.is_ordering() {
                    *op = CmpOp::Eq;
                }
            }
            SqlQuery::filtered(SelectExpr::col(pick(rng, &all)), cond)
        }
    }
}

/// Deeper random conditions for parser round trips.
pub fn random_condition<R: Rng>(rng: &mut R, t: &Table, depth: u32) -> Condition {
    if depth == 0 || rng.gen_bool(0.35) {
        return if depth > 0 && rng.gen_bool(0.15) {
            let inner = query(SelectExpr::col(pick(rng, &cols_of(t, None))), maybe_filter(rng, t));
            Condition::in_subquery(pick(rng, &cols_of(t, None)), inner)
        } else {
            random_cmp(rng, t, false)
        };
    }
    let l = random_condition(rng, t, depth - 1);
    let r = random_condition(rng, t, depth - 1);
    if rng.gen_bool(0.5) {
        l.and(r)
    } else {
        l.or(r)
    }
}
