//! The learning loop and its counterexample analyses.
//!
//! A satisfying model of the table encoding yields a hypothesis, which is
//! sent to the teacher. Simple counterexamples are analysed along one word
//! (breaking intervals), inductive counterexamples along a pair of words
//! (breaking rectangles); both add suffixes. Unsatisfiable instances add
//! prefixes named by the core.

use std::time::{Duration, Instant};

use crate::automata::{Dfa, Word};
use crate::encoding::{prefixes_from_core, Encoder, EncodingError, Hypothesis, TableSolution};
use crate::sat::CoreShrink;
use crate::table::{ObservationTable, TableError, TriBool};
use crate::teachers::{CachedTeacher, Teacher, TeacherError, ValAnswer};

/// How to pick a breaking interval or rectangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RsStrategy {
    /// Use the whole counterexample.
    Off,
    /// Fewest suffixes.
    #[default]
    Small,
    /// Latest start, which keeps the added suffixes short.
    Short,
}

impl RsStrategy {
    pub fn name(self) -> &'static str {
        match self {
            RsStrategy::Off => "off",
            RsStrategy::Small => "small",
            RsStrategy::Short => "short",
        }
    }
}

impl std::str::FromStr for RsStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(RsStrategy::Off),
            "small" => Ok(RsStrategy::Small),
            "short" => Ok(RsStrategy::Short),
            _ => Err(format!("unknown strategy `{s}` (expected off, small or short)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LearnerConfig {
    pub rs_strategy: RsStrategy,
    pub core_shrink: CoreShrink,
    /// Upper bound on table refinements (prefix or suffix additions).
    pub max_refinements: usize,
    pub timeout: Option<Duration>,
    /// Check every model and every refinement against the encoding's
    /// guarantees; a failed check ends the run with a contract violation.
    pub self_check: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            rs_strategy: RsStrategy::Small,
            core_shrink: CoreShrink::OnePass,
            max_refinements: 10_000,
            timeout: None,
            self_check: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LearnOutcome {
    Success(Dfa),
    Timeout,
    /// No acceptable answer exists; the word is both required and forbidden.
    Unsafe(Word),
    ContractViolation(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub mem_queries: u64,
    pub mem_hint_queries: u64,
    pub val_queries: u64,
    pub sat_calls: u64,
    pub unsat_cores: u64,
    pub prefix_count: usize,
    pub suffix_count: usize,
    pub hypothesis_states: usize,
    pub wall_ms: u64,
    pub simple_cex: u64,
    pub inductive_cex: u64,
    /// Refinements confirmed to exclude every model extending the previous
    /// projected model (self-check mode only).
    pub refinement_checks: u64,
    /// Models that passed the structural checks (self-check mode only).
    pub model_checks: u64,
    /// Models whose basis rows were not pairwise distinct (self-check mode).
    pub duplicate_rows: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunEvent {
    Sat { states: usize },
    Unsat { prefixes: Vec<Word> },
    SimpleCex(Word),
    InductiveCex(Word, Word),
    Interval { i: usize, j: usize },
    Rectangle { i: usize, i2: usize, j: usize, j2: usize },
    Suffixes(Vec<Word>),
    Valid,
}

/// Partial computation `⟦w^i⟧ · w[i:]`.
pub fn partial_computation(hyp: &Hypothesis, w: &Word, i: usize) -> Word {
    hyp.access_word(&w.prefix(i)).concat(&w.suffix(i))
}

/// Teacher answer if decisive, else the model's value if defined.
fn nu(oracle: &mut CachedTeacher<'_>, hyp: &Hypothesis, c: &Word) -> Result<TriBool, TeacherError> {
    let s = oracle.status(c)?;
    if s.is_decisive() {
        return Ok(s);
    }
    Ok(hyp.model().x(c).map_or(TriBool::Blank, TriBool::from_bool))
}

/// One-dimensional evaluation of a simple counterexample at position `i`.
pub fn agree_simple(
    oracle: &mut CachedTeacher<'_>,
    hyp: &Hypothesis,
    w: &Word,
    i: usize,
) -> Result<TriBool, TeacherError> {
    nu(oracle, hyp, &partial_computation(hyp, w, i))
}

pub fn agree_row(oracle: &mut CachedTeacher<'_>, hyp: &Hypothesis, w: &Word) -> Result<Vec<TriBool>, TeacherError> {
    (0..=w.len()).map(|i| agree_simple(oracle, hyp, w, i)).collect()
}

fn implies(a: bool, b: bool) -> TriBool {
    TriBool::from_bool(!a || b)
}

/// Two-dimensional evaluation of an inductive counterexample at `(i, j)`:
/// both answers decisive gives the implication; a certified pair gives
/// `One`; both values known from the teacher or the model gives the
/// implication; otherwise `Blank`.
pub fn agree_inductive(
    oracle: &mut CachedTeacher<'_>,
    hyp: &Hypothesis,
    w1: &Word,
    w2: &Word,
    i: usize,
    j: usize,
) -> Result<TriBool, TeacherError> {
    let c1 = partial_computation(hyp, w1, i);
    let c2 = partial_computation(hyp, w2, j);
    let s1 = oracle.status(&c1)?;
    let s2 = oracle.status(&c2)?;
    if let (Some(a), Some(b)) = (s1.as_bool(), s2.as_bool()) {
        return Ok(implies(a, b));
    }
    if s1 == TriBool::Blank && oracle.is_pair(&c1, &c2)? {
        return Ok(TriBool::One);
    }
    let v1 = nu(oracle, hyp, &c1)?;
    let v2 = nu(oracle, hyp, &c2)?;
    Ok(match (v1.as_bool(), v2.as_bool()) {
        (Some(a), Some(b)) => implies(a, b),
        _ => TriBool::Blank,
    })
}

/// `grid[i][j]` for `i ∈ 0..=|w1|`, `j ∈ 0..=|w2|`.
pub fn agree_grid(
    oracle: &mut CachedTeacher<'_>,
    hyp: &Hypothesis,
    w1: &Word,
    w2: &Word,
) -> Result<Vec<Vec<TriBool>>, TeacherError> {
    (0..=w1.len())
        .map(|i| (0..=w2.len()).map(|j| agree_inductive(oracle, hyp, w1, w2, i, j)).collect())
        .collect()
}

/// A breaking interval `(i, j)`: `i < j`, both values decisive and different.
pub fn find_breaking_interval(values: &[TriBool], strategy: RsStrategy) -> Option<(usize, usize)> {
    let n = values.len().checked_sub(1)?;
    let breaks = |i: usize, j: usize| {
        values[i].is_decisive() && values[j].is_decisive() && values[i] != values[j]
    };
    if strategy == RsStrategy::Off {
        return breaks(0, n).then_some((0, n));
    }
    let mut best: Option<(usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..=n {
            if !breaks(i, j) {
                continue;
            }
            let better = match (best, strategy) {
                (None, _) => true,
                (Some((bi, bj)), RsStrategy::Small) => j - i < bj - bi,
                (Some((bi, bj)), _) => i > bi || (i == bi && j < bj),
            };
            if better {
                best = Some((i, j));
            }
        }
    }
    best
}

/// `{w[i+1:], …, w[j:]}`.
pub fn interval_suffixes(w: &Word, i: usize, j: usize) -> Vec<Word> {
    (i + 1..=j).map(|k| w.suffix(k)).collect()
}

/// A breaking rectangle `(i, i', j, j')` with `(i, j) ≺ (i', j')` and
/// decisive, different corner values.
pub fn find_breaking_rectangle(
    grid: &[Vec<TriBool>],
    strategy: RsStrategy,
) -> Option<(usize, usize, usize, usize)> {
    let n1 = grid.len().checked_sub(1)?;
    let n2 = grid[0].len().checked_sub(1)?;
    let breaks = |i: usize, j: usize, i2: usize, j2: usize| {
        let (a, b) = (grid[i][j], grid[i2][j2]);
        a.is_decisive() && b.is_decisive() && a != b
    };
    if strategy == RsStrategy::Off {
        return breaks(0, 0, n1, n2).then_some((0, n1, 0, n2));
    }
    let mut best: Option<(usize, usize, usize, usize)> = None;
    for i in 0..=n1 {
        for j in 0..=n2 {
            if !grid[i][j].is_decisive() {
                continue;
            }
            for i2 in i..=n1 {
                for j2 in j..=n2 {
                    if (i2, j2) == (i, j) || !breaks(i, j, i2, j2) {
                        continue;
                    }
                    let cand = (i, i2, j, j2);
                    let better = match best {
                        None => true,
                        Some(b) => match strategy {
                            RsStrategy::Small => {
                                let size = |(a, a2, c, c2): (usize, usize, usize, usize)| (a2 - a) + (c2 - c);
                                (size(cand), cand) < (size(b), b)
                            }
                            _ => {
                                let key = |(a, a2, c, c2): (usize, usize, usize, usize)| {
                                    (std::cmp::Reverse(a), std::cmp::Reverse(c), a2, c2)
                                };
                                key(cand) < key(b)
                            }
                        },
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    best
}

/// `{w1[i:], …, w1[i':]} ∪ {w2[j:], …, w2[j':]}`, shortlex-sorted.
pub fn rectangle_suffixes(w1: &Word, w2: &Word, i: usize, i2: usize, j: usize, j2: usize) -> Vec<Word> {
    let mut out: Vec<Word> = (i..=i2).map(|k| w1.suffix(k)).chain((j..=j2).map(|k| w2.suffix(k))).collect();
    out.sort();
    out.dedup();
    out
}

enum Stop {
    Timeout,
    Unsafe(Word),
    Violation(String),
}

impl From<TeacherError> for Stop {
    fn from(e: TeacherError) -> Self {
        match e {
            TeacherError::Unsafe(w) => Stop::Unsafe(w),
            other => Stop::Violation(other.to_string()),
        }
    }
}

impl From<TableError> for Stop {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Teacher(t) => t.into(),
            other => Stop::Violation(other.to_string()),
        }
    }
}

impl From<EncodingError> for Stop {
    fn from(e: EncodingError) -> Self {
        match e {
            EncodingError::Table(t) => t.into(),
            other => Stop::Violation(other.to_string()),
        }
    }
}

pub struct Learner<'t> {
    config: LearnerConfig,
    oracle: CachedTeacher<'t>,
    table: ObservationTable,
    encoder: Encoder,
    stats: RunStats,
    events: Vec<RunEvent>,
    started: Option<Instant>,
}

impl<'t> Learner<'t> {
    pub fn new(teacher: &'t mut dyn Teacher, config: LearnerConfig) -> Self {
        let table = ObservationTable::new(teacher.alphabet().clone());
        let encoder = Encoder::new(config.core_shrink);
        Learner {
            config,
            oracle: CachedTeacher::new(teacher),
            table,
            encoder,
            stats: RunStats::default(),
            events: Vec::new(),
            started: None,
        }
    }

    pub fn table(&self) -> &ObservationTable {
        &self.table
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn events(&self) -> &[RunEvent] {
        &self.events
    }

    pub fn stats(&self) -> RunStats {
        let mut s = self.stats;
        let t = self.oracle.stats();
        s.mem_queries = t.mem_status_calls;
        s.mem_hint_queries = t.mem_hint_calls;
        s.val_queries = t.val_calls;
        s.prefix_count = self.table.prefix_count();
        s.suffix_count = self.table.suffixes().len();
        if let Some(start) = self.started {
            s.wall_ms = start.elapsed().as_millis() as u64;
        }
        s
    }

    fn event(&mut self, e: RunEvent) {
        log::debug!("{e:?}");
        self.events.push(e);
    }

    pub fn run(&mut self) -> LearnOutcome {
        let start = Instant::now();
        self.started = Some(start);
        let deadline = self.config.timeout.map(|d| start + d);
        let outcome = match self.main_loop(deadline) {
            Ok(dfa) => LearnOutcome::Success(dfa),
            Err(Stop::Timeout) => LearnOutcome::Timeout,
            Err(Stop::Unsafe(w)) => LearnOutcome::Unsafe(w),
            Err(Stop::Violation(msg)) => LearnOutcome::ContractViolation(msg),
        };
        self.stats.wall_ms = start.elapsed().as_millis() as u64;
        outcome
    }

    fn main_loop(&mut self, deadline: Option<Instant>) -> Result<Dfa, Stop> {
        self.table.extend_and_fill([], [], &mut self.oracle)?;
        self.encoder.sync(&self.table)?;
        let mut refinements = 0usize;
        loop {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(Stop::Timeout);
            }
            if refinements > self.config.max_refinements {
                return Err(Stop::Timeout);
            }
            self.stats.sat_calls += 1;
            let solution = self.encoder.solve(&self.table, deadline)?.ok_or(Stop::Timeout)?;
            let hyp = match solution {
                TableSolution::Unsat(core) => {
                    self.stats.unsat_cores += 1;
                    let prefixes = prefixes_from_core(&core, &self.table);
                    if prefixes.is_empty() {
                        return Err(Stop::Violation("core adds no new prefix".into()));
                    }
                    self.event(RunEvent::Unsat {
                        prefixes: prefixes.clone(),
                    });
                    self.table.extend_and_fill(&prefixes, [], &mut self.oracle)?;
                    self.encoder.sync(&self.table)?;
                    refinements += 1;
                    continue;
                }
                TableSolution::Sat(h) => h,
            };
            self.stats.hypothesis_states = hyp.dfa().state_count();
            self.event(RunEvent::Sat {
                states: hyp.dfa().state_count(),
            });
            if self.config.self_check {
                self.encoder.check_solution(&self.table, &hyp)?;
                self.stats.model_checks += 1;
                if !self.encoder.basis_rows_distinct(&self.table, &hyp)? {
                    self.stats.duplicate_rows += 1;
                }
            }
            let suffixes = match self.oracle.validate(hyp.dfa())? {
                ValAnswer::Valid => {
                    self.event(RunEvent::Valid);
                    if let Some(f) = self.oracle.check(hyp.dfa())? {
                        return Err(Stop::Violation(format!("accepted answer fails the check: {f}")));
                    }
                    return Ok(hyp.dfa().clone());
                }
                ValAnswer::SimpleCex(w) => {
                    self.stats.simple_cex += 1;
                    self.event(RunEvent::SimpleCex(w.clone()));
                    self.analyze_simple(&hyp, &w)?
                }
                ValAnswer::InductiveCex(w1, w2) => {
                    self.stats.inductive_cex += 1;
                    self.event(RunEvent::InductiveCex(w1.clone(), w2.clone()));
                    self.analyze_inductive(&hyp, &w1, &w2)?
                }
            };
            let fresh: Vec<Word> = suffixes.into_iter().filter(|s| !self.table.has_suffix(s)).collect();
            if fresh.is_empty() {
                return Err(Stop::Violation("counterexample analysis added no suffix".into()));
            }
            self.event(RunEvent::Suffixes(fresh.clone()));
            self.table.extend_and_fill([], &fresh, &mut self.oracle)?;
            self.encoder.sync(&self.table)?;
            refinements += 1;
            if self.config.self_check {
                if self.encoder.extends(hyp.model()) {
                    return Err(Stop::Violation(
                        "refined instance still admits the previous model".into(),
                    ));
                }
                self.stats.refinement_checks += 1;
            }
        }
    }

    fn analyze_simple(&mut self, hyp: &Hypothesis, w: &Word) -> Result<Vec<Word>, Stop> {
        let n = w.len();
        let values = if self.config.rs_strategy == RsStrategy::Off {
            let mut v = vec![TriBool::Blank; n + 1];
            v[0] = agree_simple(&mut self.oracle, hyp, w, 0)?;
            v[n] = agree_simple(&mut self.oracle, hyp, w, n)?;
            v
        } else {
            agree_row(&mut self.oracle, hyp, w)?
        };
        if !(values[0].is_decisive() && values[n].is_decisive() && values[0] != values[n]) {
            return Err(Stop::Violation(format!(
                "endpoints of counterexample {w:?} do not disagree: {:?} / {:?}",
                values[0], values[n]
            )));
        }
        let (i, j) = find_breaking_interval(&values, self.config.rs_strategy)
            .ok_or_else(|| Stop::Violation("no breaking interval".into()))?;
        self.event(RunEvent::Interval { i, j });
        Ok(interval_suffixes(w, i, j))
    }

    fn analyze_inductive(&mut self, hyp: &Hypothesis, w1: &Word, w2: &Word) -> Result<Vec<Word>, Stop> {
        let (n1, n2) = (w1.len(), w2.len());
        let grid = if self.config.rs_strategy == RsStrategy::Off {
            let mut g = vec![vec![TriBool::Blank; n2 + 1]; n1 + 1];
            g[0][0] = agree_inductive(&mut self.oracle, hyp, w1, w2, 0, 0)?;
            g[n1][n2] = agree_inductive(&mut self.oracle, hyp, w1, w2, n1, n2)?;
            g
        } else {
            agree_grid(&mut self.oracle, hyp, w1, w2)?
        };
        if grid[0][0] != TriBool::One || grid[n1][n2] != TriBool::Zero {
            return Err(Stop::Violation(format!(
                "corners of inductive counterexample ({w1:?}, {w2:?}) are {:?} / {:?}",
                grid[0][0], grid[n1][n2]
            )));
        }
        let (i, i2, j, j2) = find_breaking_rectangle(&grid, self.config.rs_strategy)
            .ok_or_else(|| Stop::Violation("no breaking rectangle".into()))?;
        self.event(RunEvent::Rectangle { i, i2, j, j2 });
        Ok(rectangle_suffixes(w1, w2, i, i2, j, j2))
    }
}

/// Runs the learner to completion.
pub fn learn(teacher: &mut dyn Teacher, config: LearnerConfig) -> (LearnOutcome, RunStats) {
    let mut learner = Learner::new(teacher, config);
    let outcome = learner.run();
    (outcome, learner.stats())
}
