//! Implication premises over five boolean variables, labelled by whether the
//! conclusion holds in every assignment that satisfies the premises.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::corpus::{PretrainExample, RngStream, SeedSpec, Task};

pub const VAR_COUNT: u8 = 5;
/// Unordered variable pairs `(p, q)` with `p < q`.
pub const PAIR_COUNT: usize = (VAR_COUNT as usize * (VAR_COUNT as usize - 1)) / 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("variable p{0} out of range")]
    VarRange(u8),
    #[error("statement relates p{0} to itself")]
    SameVar(u8),
    #[error("cannot parse statement `{0}`")]
    Syntax(String),
    #[error("pair range {min}..={max} must lie within 1..={PAIR_COUNT}")]
    PairRange { min: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    var: u8,
    negated: bool,
}

impl Literal {
    pub fn new(var: u8, negated: bool) -> Result<Self, LogicError> {
        if var >= VAR_COUNT {
            return Err(LogicError::VarRange(var));
        }
        Ok(Literal { var, negated })
    }

    pub fn var(self) -> u8 {
        self.var
    }

    pub fn negated(self) -> bool {
        self.negated
    }

    /// Truth value under an assignment given as a bitmask over the variables.
    fn eval(self, assignment: u32) -> bool {
        ((assignment >> self.var) & 1 == 1) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~ ")?;
        }
        write!(f, "p{}", self.var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImplicationStmt {
    antecedent: Literal,
    consequent: Literal,
}

impl ImplicationStmt {
    pub fn new(antecedent: Literal, consequent: Literal) -> Result<Self, LogicError> {
        if antecedent.var == consequent.var {
            return Err(LogicError::SameVar(antecedent.var));
        }
        Ok(ImplicationStmt { antecedent, consequent })
    }

    pub fn antecedent(&self) -> Literal {
        self.antecedent
    }

    pub fn consequent(&self) -> Literal {
        self.consequent
    }

    pub fn holds(&self, assignment: u32) -> bool {
        !self.antecedent.eval(assignment) || self.consequent.eval(assignment)
    }

    /// Unordered variable pair, smaller index first.
    pub fn pair(&self) -> (u8, u8) {
        let (a, b) = (self.antecedent.var, self.consequent.var);
        (a.min(b), a.max(b))
    }
}

/// `p0 -> p1`, `~ p2 -> p4`.
pub fn render_stmt(s: &ImplicationStmt) -> String {
    s.to_string()
}

impl fmt::Display for ImplicationStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.antecedent, self.consequent)
    }
}

impl FromStr for ImplicationStmt {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || LogicError::Syntax(s.to_string());
        let mut tokens = s.split(' ').peekable();
        let literal = |tokens: &mut std::iter::Peekable<std::str::Split<'_, char>>| {
            let negated = tokens.next_if_eq(&"~").is_some();
            let var = tokens
                .next()
                .and_then(|t| t.strip_prefix('p'))
                .filter(|d| d.len() == 1)
                .and_then(|d| d.parse::<u8>().ok())
                .ok_or_else(syntax)?;
            Literal::new(var, negated)
        };
        let antecedent = literal(&mut tokens)?;
        if tokens.next() != Some("->") {
            return Err(syntax());
        }
        let consequent = literal(&mut tokens)?;
        if tokens.next().is_some() {
            return Err(syntax());
        }
        ImplicationStmt::new(antecedent, consequent)
    }
}

/// True iff every assignment satisfying all premises satisfies the conclusion.
pub fn entailed(premises: &[ImplicationStmt], conclusion: &ImplicationStmt) -> bool {
    (0..1u32 << VAR_COUNT)
        .filter(|&a| premises.iter().all(|p| p.holds(a)))
        .all(|a| conclusion.holds(a))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicInstance {
    pub premises: Vec<ImplicationStmt>,
    pub conclusion: ImplicationStmt,
    pub label: bool,
}

impl LogicInstance {
    pub fn new(premises: Vec<ImplicationStmt>, conclusion: ImplicationStmt) -> Self {
        let label = entailed(&premises, &conclusion);
        LogicInstance { premises, conclusion, label }
    }

    pub fn render_context(&self) -> String {
        render_premises(&self.premises)
    }
}

pub fn render_premises(premises: &[ImplicationStmt]) -> String {
    premises.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ; ")
}

pub fn parse_premises(text: &str) -> Result<Vec<ImplicationStmt>, LogicError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(" ; ").map(str::parse).collect()
}

pub fn render_label(label: bool) -> &'static str {
    if label {
        "True"
    } else {
        "False"
    }
}

/// Number of sampled pairs `k` is uniform over `min_pairs..=max_pairs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicConfig {
    pub count: u64,
    pub min_pairs: usize,
    pub max_pairs: usize,
}

impl LogicConfig {
    pub const DEFAULT_MIN_PAIRS: usize = 2;
    pub const DEFAULT_MAX_PAIRS: usize = 8;

    pub fn with_count(count: u64) -> Self {
        LogicConfig { count, min_pairs: Self::DEFAULT_MIN_PAIRS, max_pairs: Self::DEFAULT_MAX_PAIRS }
    }

    fn check(&self) -> Result<(), LogicError> {
        if self.min_pairs == 0 || self.min_pairs > self.max_pairs || self.max_pairs > PAIR_COUNT {
            return Err(LogicError::PairRange { min: self.min_pairs, max: self.max_pairs });
        }
        Ok(())
    }
}

fn all_pairs() -> [(u8, u8); PAIR_COUNT] {
    let mut pairs = [(0, 0); PAIR_COUNT];
    let mut i = 0;
    for p in 0..VAR_COUNT {
        for q in p + 1..VAR_COUNT {
            pairs[i] = (p, q);
            i += 1;
        }
    }
    pairs
}

/// Samples `k` distinct pairs, one implication shape per pair
/// (`p -> q`, `p -> ~q`, `~p -> ~q`, `~p -> q`), and promotes one uniformly
/// chosen statement to the conclusion.
pub fn sample_instance<R: Rng>(rng: &mut R, min_pairs: usize, max_pairs: usize) -> LogicInstance {
    let pairs = all_pairs();
    let k = rng.gen_range(min_pairs..=max_pairs);
    let mut stmts: Vec<ImplicationStmt> = rand::seq::index::sample(rng, PAIR_COUNT, k)
        .iter()
        .map(|i| {
            let (p, q) = pairs[i];
            let (neg_p, neg_q) = match rng.gen_range(0..4) {
                0 => (false, false),
                1 => (false, true),
                2 => (true, true),
                _ => (true, false),
            };
            ImplicationStmt { antecedent: Literal { var: p, negated: neg_p }, consequent: Literal { var: q, negated: neg_q } }
        })
        .collect();
    let conclusion = stmts.remove(rng.gen_range(0..k));
    LogicInstance::new(stmts, conclusion)
}

pub fn gen_logic(seed: &SeedSpec, cfg: &LogicConfig) -> Result<Vec<PretrainExample>, LogicError> {
    cfg.check()?;
    Ok(seed
        .indices(cfg.count)
        .map(|index| {
            let mut rng = seed.rng(RngStream::Logic, index);
            let inst = sample_instance(&mut rng, cfg.min_pairs, cfg.max_pairs);
            PretrainExample::new(
                format!("logic-{}-{index}", seed.master_seed()),
                Task::Logic,
                inst.render_context(),
                inst.conclusion.to_string(),
                render_label(inst.label),
            )
            .with_meta("seed", seed.master_seed())
            .with_meta("pairs", inst.premises.len() + 1)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stmt(s: &str) -> ImplicationStmt {
        s.parse().unwrap()
    }

    #[test]
    fn rendering() {
        let s = ImplicationStmt::new(Literal::new(0, false).unwrap(), Literal::new(1, false).unwrap()).unwrap();
        assert_eq!(render_stmt(&s), "p0 -> p1");
        let s = ImplicationStmt::new(Literal::new(2, true).unwrap(), Literal::new(4, false).unwrap()).unwrap();
        assert_eq!(render_stmt(&s), "~ p2 -> p4");
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["p0 -> p0", "p5 -> p1", "p0 => p1", "~p0 -> p1", "p0 -> p1 ;", "p10 -> p1", ""] {
            assert!(bad.parse::<ImplicationStmt>().is_err(), "{bad}");
        }
    }

    #[test]
    fn entailment_examples() {
        assert!(entailed(&[stmt("p0 -> p1")], &stmt("p0 -> p1")));
        assert!(!entailed(&[], &stmt("p0 -> p1")));
        assert!(entailed(&[stmt("p0 -> p1"), stmt("p1 -> p2")], &stmt("p0 -> p2")));
        assert!(entailed(&[stmt("p0 -> p1")], &stmt("~ p1 -> ~ p0")));
        assert!(!entailed(&[stmt("p0 -> p1")], &stmt("p1 -> p0")));
    }

    /// Explicit truth table for the chain case, written out by hand.
    #[test]
    fn chain_matches_enumeration() {
        let mut counter = 0;
        for bits in 0..32u32 {
            let (p, q, r) = (bits & 1 == 1, bits & 2 == 2, bits & 4 == 4);
            if (!p || q) && (!q || r) {
                assert!(!p || r);
                counter += 1;
            }
        }
        // 4 of 8 (p,q,r) combinations satisfy the chain, times 4 for p3, p4.
        assert_eq!(counter, 16);
    }

    #[test]
    fn single_pair_never_entailed() {
        let seed = SeedSpec::single(3);
        let cfg = LogicConfig { count: 200, min_pairs: 1, max_pairs: 1 };
        for ex in gen_logic(&seed, &cfg).unwrap() {
            assert_eq!(ex.context, "");
            assert_eq!(ex.result, "False");
        }
    }

    #[test]
    fn config_checked() {
        let cfg = LogicConfig { count: 1, min_pairs: 0, max_pairs: 8 };
        assert!(gen_logic(&SeedSpec::single(0), &cfg).is_err());
        let cfg = LogicConfig { count: 1, min_pairs: 2, max_pairs: 11 };
        assert!(gen_logic(&SeedSpec::single(0), &cfg).is_err());
    }

    #[test]
    fn generated_examples_self_consistent() {
        let exs = gen_logic(&SeedSpec::single(99), &LogicConfig::with_count(2000)).unwrap();
        for ex in exs {
            let premises = parse_premises(&ex.context).unwrap();
            let conclusion: ImplicationStmt = ex.program.parse().unwrap();
            assert_eq!(render_label(entailed(&premises, &conclusion)), ex.result);
            let mut pairs: Vec<_> = premises.iter().chain([&conclusion]).map(|s| s.pair()).collect();
            let n = pairs.len();
            assert!((2..=8).contains(&n));
            pairs.sort();
            pairs.dedup();
            assert_eq!(pairs.len(), n, "{}", ex.id);
        }
    }

    fn arb_stmt() -> impl Strategy<Value = ImplicationStmt> {
        (0u8..5, 0u8..4, any::<bool>(), any::<bool>()).prop_map(|(a, off, na, nb)| {
            let b = (a + 1 + off) % 5;
            ImplicationStmt::new(Literal::new(a, na).unwrap(), Literal::new(b, nb).unwrap()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn render_parse_round_trip(s in arb_stmt()) {
            prop_assert_eq!(render_stmt(&s).parse::<ImplicationStmt>().unwrap(), s);
        }
    }

    proptest! {
        #[test]
        fn adding_premise_is_monotone(premises in prop::collection::vec(arb_stmt(), 0..7), extra in arb_stmt(), c in arb_stmt()) {
            if entailed(&premises, &c) {
                let mut more = premises.clone();
                more.push(extra);
                prop_assert!(entailed(&more, &c));
            }
        }
    }
}
