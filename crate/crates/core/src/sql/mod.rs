//! The SQL-subset executor: typed tables, query AST, parser, renderer and
//! reference evaluator.

pub mod ast;
pub mod exec;
pub mod number;
pub mod parse;
pub mod table;

pub use ast::{render_sql, AggFn, ArithOp, CmpOp, Condition, SelectExpr, SqlQuery, Value};
pub use exec::{check_query, execute, render_result, surviving_rows, ExecError, QueryResult};
pub use number::Number;
pub use parse::{parse_sql, ParseError, RESERVED_WORDS};
pub use table::{Cell, Column, ColumnType, Table, TableError};
