use std::fmt;

use super::number::Number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Count,
    Sum,
    Avg,
    Max,
    Min,
}

impl AggFn {
    pub const ALL: [AggFn; 5] = [AggFn::Count, AggFn::Sum, AggFn::Avg, AggFn::Max, AggFn::Min];

    pub fn keyword(self) -> &'static str {
        match self {
            AggFn::Count => "COUNT",
            AggFn::Sum => "SUM",
            AggFn::Avg => "AVG",
            AggFn::Max => "MAX",
            AggFn::Min => "MIN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SelectExpr {
    Col(String),
    Agg(AggFn, String),
    Arith(ArithOp, Box<SelectExpr>, Box<SelectExpr>),
}

impl SelectExpr {
    pub fn col(name: impl Into<String>) -> Self {
        SelectExpr::Col(name.into())
    }

    pub fn agg(f: AggFn, name: impl Into<String>) -> Self {
        SelectExpr::Agg(f, name.into())
    }

    pub fn arith(op: ArithOp, left: SelectExpr, right: SelectExpr) -> Self {
        SelectExpr::Arith(op, Box::new(left), Box::new(right))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

/// A literal on the right of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Number(Number),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Cmp { col: String, op: CmpOp, value: Value },
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    In { col: String, subquery: Box<SqlQuery> },
}

impl Condition {
    pub fn cmp(col: impl Into<String>, op: CmpOp, value: Value) -> Self {
        Condition::Cmp { col: col.into(), op, value }
    }

    pub fn and(self, other: Condition) -> Self {
        Condition::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Condition) -> Self {
        Condition::Or(Box::new(self), Box::new(other))
    }

    pub fn in_subquery(col: impl Into<String>, subquery: SqlQuery) -> Self {
        Condition::In { col: col.into(), subquery: Box::new(subquery) }
    }

    pub fn contains_subquery(&self) -> bool {
        match self {
            Condition::Cmp { .. } => false,
            Condition::In { .. } => true,
            Condition::And(l, r) | Condition::Or(l, r) => l.contains_subquery() || r.contains_subquery(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SqlQuery {
    pub select: SelectExpr,
    pub filter: Option<Condition>,
}

impl SqlQuery {
    pub fn new(select: SelectExpr) -> Self {
        SqlQuery { select, filter: None }
    }

    pub fn filtered(select: SelectExpr, filter: Condition) -> Self {
        SqlQuery { select, filter: Some(filter) }
    }
}

/// Canonical single-line SQL.
pub fn render_sql(q: &SqlQuery) -> String {
    q.to_string()
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT {}", self.select)?;
        if let Some(cond) = &self.filter {
            write!(f, " WHERE {cond}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SelectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectExpr::Col(c) => f.write_str(c),
            SelectExpr::Agg(func, c) => write!(f, "{}({c})", func.keyword()),
            SelectExpr::Arith(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

/// Binding strength used to decide where parentheses are needed. Both
/// connectives parse left-associatively; OR binds loosest.
fn precedence(c: &Condition) -> u8 {
    match c {
        Condition::Or(..) => 0,
        Condition::And(..) => 1,
        Condition::Cmp { .. } | Condition::In { .. } => 2,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, c: &Condition, min_prec: u8) -> fmt::Result {
    if precedence(c) < min_prec {
        write!(f, "( {c} )")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Cmp { col, op, value } => write!(f, "{col} {} {value}", op.symbol()),
            Condition::In { col, subquery } => write!(f, "{col} IN ( {subquery} )"),
            Condition::Or(l, r) => {
                write_operand(f, l, 0)?;
                f.write_str(" OR ")?;
                write_operand(f, r, 1)
            }
            Condition::And(l, r) => {
                write_operand(f, l, 1)?;
                f.write_str(" AND ")?;
                write_operand(f, r, 2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(render_sql(&SqlQuery::new(SelectExpr::agg(AggFn::Max, "score"))), "SELECT MAX(score)");
        let arith = SelectExpr::arith(ArithOp::Sub, SelectExpr::col("a"), SelectExpr::col("b"));
        assert_eq!(render_sql(&SqlQuery::new(arith)), "SELECT a - b");
        let sub = SqlQuery::filtered(SelectExpr::col("b"), Condition::cmp("c", CmpOp::Eq, Value::Text("x".into())));
        let nested = SqlQuery::filtered(SelectExpr::col("a"), Condition::in_subquery("b", sub));
        assert_eq!(render_sql(&nested), "SELECT a WHERE b IN ( SELECT b WHERE c = 'x' )");
    }

    #[test]
    fn quotes_are_doubled() {
        let q = SqlQuery::filtered(SelectExpr::col("a"), Condition::cmp("b", CmpOp::Ne, Value::Text("O'Neil".into())));
        assert_eq!(render_sql(&q), "SELECT a WHERE b != 'O''Neil'");
    }

    #[test]
    fn parentheses_only_where_needed() {
        let c = |v: i64| Condition::cmp("x", CmpOp::Gt, Value::Number(Number::from_i64(v)));
        let q = SqlQuery::filtered(SelectExpr::col("a"), c(1).or(c(2)).and(c(3)));
        assert_eq!(render_sql(&q), "SELECT a WHERE ( x > 1 OR x > 2 ) AND x > 3");
        let q = SqlQuery::filtered(SelectExpr::col("a"), c(1).or(c(2).and(c(3))));
        assert_eq!(render_sql(&q), "SELECT a WHERE x > 1 OR x > 2 AND x > 3");
        let q = SqlQuery::filtered(SelectExpr::col("a"), c(1).or(c(2).or(c(3))));
        assert_eq!(render_sql(&q), "SELECT a WHERE x > 1 OR ( x > 2 OR x > 3 )");
        let q = SqlQuery::filtered(SelectExpr::col("a"), c(-1).or(c(2)).or(c(3)));
        assert_eq!(render_sql(&q), "SELECT a WHERE x > -1 OR x > 2 OR x > 3");
    }
}
