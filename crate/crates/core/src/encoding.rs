//! SAT encoding of an incomplete observation table.
//!
//! A model picks a prefix-closed basis among the prefixes, fills the unknown
//! cells and fixes a successor for every basis state and letter, so that the
//! filled sub-table is closed and consistent with the teacher's inductive
//! pairs. The closedness clauses are guarded by selector literals; when the
//! instance is unsatisfiable, the failed selectors name the frontier words
//! to promote to prefixes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{self, Write};
use std::time::Instant;

use crate::automata::{Dfa, Letter, Word};
use crate::sat::{CoreShrink, Lit, Model, SatError, SatOutcome, Solver, Var};
use crate::table::{ObservationTable, TableError, TriBool};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// The prefix is a basis state.
    B(Word),
    /// The successor of basis state `p` on `a` is `p'`.
    E(Word, Letter, Word),
    /// Membership value of an unknown cell.
    X(Word),
    /// Activates the closedness clause of `(p, a)` in a given generation.
    ClosSel(Word, Letter, u32),
}

/// The part of a solver model that the hypothesis depends on: every basis
/// flag, successor choices between basis states, and unknown cells whose
/// every row lies in the basis or one letter beyond it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialModel {
    values: BTreeMap<VarKey, bool>,
}

impl PartialModel {
    pub fn get(&self, key: &VarKey) -> Option<bool> {
        self.values.get(key).copied()
    }

    pub fn x(&self, w: &Word) -> Option<bool> {
        self.get(&VarKey::X(w.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, bool)> {
        self.values.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True if every assignment of `self` also appears in `other`.
    pub fn subsumed_by(&self, other: &PartialModel) -> bool {
        self.iter().all(|(k, v)| other.get(k) == Some(v))
    }
}

/// A DFA read off a model, with states labelled by basis words.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    dfa: Dfa,
    basis: Vec<Word>,
    model: PartialModel,
}

impl Hypothesis {
    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    /// Basis words, shortlex-sorted; state `i` is `basis[i]`, `ε` is state 0.
    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn model(&self) -> &PartialModel {
        &self.model
    }

    /// The basis word of the state reached on `w`.
    pub fn access_word(&self, w: &Word) -> &Word {
        &self.basis[self.dfa.run(w)]
    }

    pub fn accepts(&self, w: &Word) -> bool {
        self.dfa.contains(w)
    }
}

#[derive(Clone, Debug)]
pub enum TableSolution {
    Sat(Hypothesis),
    /// `(p, a)` pairs whose closedness clauses are in the core.
    Unsat(Vec<(Word, Letter)>),
}

/// Number of CNF clauses emitted per clause family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FamilyCounts {
    pub basis_eps: usize,
    pub basis_pa: usize,
    pub reach: usize,
    pub cong: usize,
    pub det: usize,
    pub clos: usize,
    pub succ: usize,
    pub sharp: usize,
    pub ind: usize,
    /// Units disabling closedness clauses of earlier generations.
    pub retired: usize,
}

impl FamilyCounts {
    pub fn total(&self) -> usize {
        self.basis_eps
            + self.basis_pa
            + self.reach
            + self.cong
            + self.det
            + self.clos
            + self.succ
            + self.sharp
            + self.ind
            + self.retired
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("unsatisfiable without any closedness clause")]
    EmptyCore,
    #[error("core names no frontier word outside the prefixes")]
    EmptyRefinement,
    #[error("basis state {0:?} has no unique successor on letter {1}")]
    Successor(Word, Letter),
    #[error("model check failed: {0}")]
    Unsound(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

enum Nu {
    Const(bool),
    Lit(Lit),
}

pub struct Encoder {
    solver: Solver,
    vars: HashMap<VarKey, Var>,
    keys: Vec<VarKey>,
    prefixes: BTreeSet<Word>,
    suffixes: HashSet<Word>,
    pairs: HashSet<(Word, Word)>,
    generation: u32,
    selectors: Vec<(Word, Letter, Var)>,
    counts: FamilyCounts,
    shrink: CoreShrink,
    started: bool,
    last_model: Option<Model>,
}

impl Encoder {
    pub fn new(shrink: CoreShrink) -> Self {
        Encoder {
            solver: Solver::new(),
            vars: HashMap::new(),
            keys: Vec::new(),
            prefixes: BTreeSet::new(),
            suffixes: HashSet::new(),
            pairs: HashSet::new(),
            generation: 0,
            selectors: Vec::new(),
            counts: FamilyCounts::default(),
            shrink,
            started: false,
            last_model: None,
        }
    }

    pub fn counts(&self) -> FamilyCounts {
        self.counts
    }

    pub fn var_count(&self) -> usize {
        self.solver.num_vars()
    }

    pub fn clause_count(&self) -> usize {
        self.solver.num_clauses()
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn var(&self, key: &VarKey) -> Option<Var> {
        self.vars.get(key).copied()
    }

    pub fn key(&self, v: Var) -> &VarKey {
        &self.keys[v.index()]
    }

    /// Current-generation selector literals, in `(p, a)` order.
    pub fn selector_lits(&self) -> Vec<Lit> {
        self.selectors.iter().map(|(_, _, v)| v.pos()).collect()
    }

    pub fn write_dimacs(&self, out: &mut impl Write) -> io::Result<()> {
        self.solver.write_dimacs(out)
    }

    fn var_for(&mut self, key: VarKey) -> Var {
        if let Some(&v) = self.vars.get(&key) {
            return v;
        }
        let v = self.solver.new_var();
        self.vars.insert(key.clone(), v);
        self.keys.push(key);
        v
    }

    fn b(&mut self, p: &Word) -> Var {
        self.var_for(VarKey::B(p.clone()))
    }

    fn e(&mut self, p: &Word, a: Letter, q: &Word) -> Var {
        self.var_for(VarKey::E(p.clone(), a, q.clone()))
    }

    fn nu(&mut self, table: &ObservationTable, w: &Word) -> Result<Nu, TableError> {
        Ok(match table.cell_value(w)? {
            TriBool::One => Nu::Const(true),
            TriBool::Zero => Nu::Const(false),
            TriBool::Blank => Nu::Lit(self.var_for(VarKey::X(w.clone())).pos()),
        })
    }

    fn emit(&mut self, lits: &[Lit]) {
        self.solver.add_clause(lits);
    }

    /// Emits the clauses for everything added to `table` since the previous
    /// call.
    pub fn sync(&mut self, table: &ObservationTable) -> Result<(), EncodingError> {
        let all_p: Vec<Word> = table.prefixes().cloned().collect();
        let all_s: Vec<Word> = table.suffixes().to_vec();
        let new_p: Vec<Word> = all_p
            .iter()
            .filter(|p| !self.prefixes.contains(*p))
            .cloned()
            .collect();
        let old_p = self.prefixes.clone();
        let old_s = self.suffixes.clone();
        let letters: Vec<Letter> = table.alphabet().letters().collect();

        if !self.started {
            let b = self.b(&Word::empty());
            self.emit(&[b.pos()]);
            self.counts.basis_eps += 1;
            self.started = true;
        }
        for p in &all_p {
            self.b(p);
        }
        for p in &new_p {
            if let Some((q, a)) = p.split_last() {
                let bp = self.b(p);
                let bq = self.b(&q);
                let e = self.e(&q, a, p);
                self.emit(&[bp.neg(), bq.pos()]);
                self.counts.basis_pa += 1;
                self.emit(&[bp.neg(), e.pos()]);
                self.counts.reach += 1;
            }
        }
        // cong: e(p, a, p') forces rows p·a and p' to agree on every suffix
        for p in &all_p {
            for &a in &letters {
                let pa = p.push(a);
                for q in &all_p {
                    if *q == pa {
                        continue;
                    }
                    let e = self.e(p, a, q);
                    for s in &all_s {
                        if old_p.contains(p) && old_p.contains(q) && old_s.contains(s) {
                            continue;
                        }
                        let left = self.nu(table, &pa.concat(s))?;
                        let right = self.nu(table, &q.concat(s))?;
                        match (left, right) {
                            (Nu::Const(x), Nu::Const(y)) => {
                                if x != y {
                                    self.emit(&[e.neg()]);
                                    self.counts.cong += 1;
                                }
                            }
                            (Nu::Const(c), Nu::Lit(l)) | (Nu::Lit(l), Nu::Const(c)) => {
                                self.emit(&[e.neg(), if c { l } else { !l }]);
                                self.counts.cong += 1;
                            }
                            (Nu::Lit(x), Nu::Lit(y)) => {
                                self.emit(&[e.neg(), !x, y]);
                                self.emit(&[e.neg(), x, !y]);
                                self.counts.cong += 2;
                            }
                        }
                    }
                }
            }
        }
        // det: at most one successor
        for p in &all_p {
            for &a in &letters {
                for (i, p1) in all_p.iter().enumerate() {
                    for p2 in &all_p[i + 1..] {
                        if old_p.contains(p) && old_p.contains(p1) && old_p.contains(p2) {
                            continue;
                        }
                        let e1 = self.e(p, a, p1);
                        let e2 = self.e(p, a, p2);
                        self.emit(&[e1.neg(), e2.neg()]);
                        self.counts.det += 1;
                    }
                }
            }
        }
        // succ: successors are basis states
        for p in &all_p {
            for &a in &letters {
                for q in &all_p {
                    if old_p.contains(p) && old_p.contains(q) {
                        continue;
                    }
                    let e = self.e(p, a, q);
                    let bq = self.b(q);
                    self.emit(&[e.neg(), bq.pos()]);
                    self.counts.succ += 1;
                }
            }
        }
        // sharp: a basis word p·a is not identified with a smaller basis word
        for pa in &all_p {
            let Some((p, a)) = pa.split_last() else { continue };
            for q in all_p.iter().take_while(|q| *q < pa) {
                if old_p.contains(pa) && old_p.contains(q) {
                    continue;
                }
                let bpa = self.b(pa);
                let bq = self.b(q);
                let e = self.e(&p, a, q);
                self.emit(&[bpa.neg(), bq.neg(), e.neg()]);
                self.counts.sharp += 1;
            }
        }
        // clos: re-emitted with a fresh selector whenever P grows
        if !new_p.is_empty() {
            for (_, _, sel) in std::mem::take(&mut self.selectors) {
                self.emit(&[sel.neg()]);
                self.counts.retired += 1;
            }
            self.generation += 1;
            let generation = self.generation;
            for p in &all_p {
                for &a in &letters {
                    let sel = self.var_for(VarKey::ClosSel(p.clone(), a, generation));
                    let bp = self.b(p);
                    let mut clause = vec![sel.neg(), bp.neg()];
                    for q in &all_p {
                        clause.push(self.e(p, a, q).pos());
                    }
                    self.emit(&clause);
                    self.counts.clos += 1;
                    self.selectors.push((p.clone(), a, sel));
                }
            }
        }
        // ind: inductive pairs between unknown cells
        for (w1, w2) in table.pairs() {
            if self.pairs.contains(&(w1.clone(), w2.clone())) {
                continue;
            }
            let x1 = self.nu(table, w1)?;
            let x2 = self.nu(table, w2)?;
            match (x1, x2) {
                (Nu::Lit(l1), Nu::Lit(l2)) => self.emit(&[!l1, l2]),
                (Nu::Lit(l1), Nu::Const(false)) => self.emit(&[!l1]),
                (Nu::Const(true), Nu::Lit(l2)) => self.emit(&[l2]),
                (Nu::Const(true), Nu::Const(false)) => self.emit(&[]),
                _ => {}
            }
            self.counts.ind += 1;
            self.pairs.insert((w1.clone(), w2.clone()));
        }
        for w in table.incomplete() {
            self.var_for(VarKey::X(w.clone()));
        }
        self.prefixes.extend(new_p);
        self.suffixes.extend(all_s);
        Ok(())
    }

    /// Solves the current instance under the current closedness selectors.
    /// Returns `None` if the deadline passes first.
    pub fn solve(
        &mut self,
        table: &ObservationTable,
        deadline: Option<Instant>,
    ) -> Result<Option<TableSolution>, EncodingError> {
        self.solve_under(table, &[], deadline)
    }

    /// Like [`Self::solve`], with extra variable assignments assumed. Extra
    /// assumptions never appear in the returned core.
    pub fn solve_under(
        &mut self,
        table: &ObservationTable,
        extra: &[(VarKey, bool)],
        deadline: Option<Instant>,
    ) -> Result<Option<TableSolution>, EncodingError> {
        let mut assumptions = self.selector_lits();
        let mut forced = HashSet::new();
        for (key, v) in extra {
            let var = self
                .var(key)
                .ok_or_else(|| EncodingError::Unsound(format!("no variable for {key:?}")))?;
            assumptions.push(var.lit(*v));
            forced.insert(var);
        }
        let Some(outcome) = self.solver.solve_with_deadline(&assumptions, deadline) else {
            return Ok(None);
        };
        match outcome {
            SatOutcome::Sat(model) => {
                let hyp = self.hypothesis_from_model(&model, table)?;
                self.last_model = Some(model);
                Ok(Some(TableSolution::Sat(hyp)))
            }
            SatOutcome::Unsat(core) => {
                if core.is_empty() {
                    return Err(EncodingError::EmptyCore);
                }
                let core = self.solver.shrink_core(&core, self.shrink)?;
                let mut pairs = Vec::new();
                for l in core {
                    if forced.contains(&l.var()) {
                        continue;
                    }
                    match self.key(l.var()) {
                        VarKey::ClosSel(p, a, g) if *g == self.generation => {
                            pairs.push((p.clone(), *a));
                        }
                        other => {
                            return Err(EncodingError::Unsound(format!(
                                "core literal {other:?} is not a current selector"
                            )))
                        }
                    }
                }
                if pairs.is_empty() {
                    return Err(EncodingError::EmptyCore);
                }
                Ok(Some(TableSolution::Unsat(pairs)))
            }
        }
    }

    fn model_value(&self, model: &Model, key: &VarKey) -> Option<bool> {
        self.vars.get(key).map(|&v| model.value(v))
    }

    /// Value of a cell under a full model: the teacher's answer if decisive,
    /// the model's guess otherwise.
    fn full_value(&self, model: &Model, table: &ObservationTable, w: &Word) -> Result<bool, EncodingError> {
        match table.cell_value(w)? {
            TriBool::One => Ok(true),
            TriBool::Zero => Ok(false),
            TriBool::Blank => self
                .model_value(model, &VarKey::X(w.clone()))
                .ok_or_else(|| EncodingError::Unsound(format!("no variable for cell {w:?}"))),
        }
    }

    pub fn hypothesis_from_model(
        &self,
        model: &Model,
        table: &ObservationTable,
    ) -> Result<Hypothesis, EncodingError> {
        let basis: Vec<Word> = table
            .prefixes()
            .filter(|p| self.model_value(model, &VarKey::B((*p).clone())) == Some(true))
            .cloned()
            .collect();
        let index: HashMap<&Word, usize> = basis.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let sigma = table.alphabet().clone();
        let k = sigma.len();
        let mut values = BTreeMap::new();
        for p in table.prefixes() {
            values.insert(VarKey::B(p.clone()), index.contains_key(p));
        }
        let mut delta = vec![0; basis.len() * k];
        for (i, p) in basis.iter().enumerate() {
            for a in sigma.letters() {
                let mut succ = None;
                for q in &basis {
                    let key = VarKey::E(p.clone(), a, q.clone());
                    let v = self.model_value(model, &key).unwrap_or(false);
                    values.insert(key, v);
                    if v {
                        if succ.is_some() {
                            return Err(EncodingError::Successor(p.clone(), a));
                        }
                        succ = Some(index[q]);
                    }
                }
                delta[i * k + a as usize] = succ.ok_or_else(|| EncodingError::Successor(p.clone(), a))?;
            }
        }
        let kept_row = |r: &Word| {
            index.contains_key(r) || r.split_last().is_some_and(|(q, _)| index.contains_key(&q))
        };
        for w in table.incomplete() {
            let all_kept = (0..=w.len()).all(|i| {
                let (r, s) = (w.prefix(i), w.suffix(i));
                let is_row = table.has_prefix(&r)
                    || r.split_last().is_some_and(|(q, _)| table.has_prefix(&q));
                !(is_row && table.has_suffix(&s)) || kept_row(&r)
            });
            if all_kept {
                let key = VarKey::X(w.clone());
                if let Some(v) = self.model_value(model, &key) {
                    values.insert(key, v);
                }
            }
        }
        let mut accepting = Vec::with_capacity(basis.len());
        for p in &basis {
            accepting.push(self.full_value(model, table, p)?);
        }
        let dfa = Dfa::from_table(sigma, 0, accepting, delta)
            .map_err(|e| EncodingError::Unsound(e.to_string()))?;
        Ok(Hypothesis {
            dfa,
            basis,
            model: PartialModel { values },
        })
    }

    /// Re-solves with `model`'s assignments (and the current selectors) as
    /// assumptions. Returns true if some full model extends it.
    pub fn extends(&mut self, model: &PartialModel) -> bool {
        let mut assumptions = self.selector_lits();
        for (key, v) in model.iter() {
            if let Some(&var) = self.vars.get(key) {
                assumptions.push(var.lit(v));
            }
        }
        self.solver.solve(&assumptions).is_sat()
    }

    /// Structural checks of the last satisfying model against the table and
    /// the hypothesis built from it.
    pub fn check_solution(&self, table: &ObservationTable, hyp: &Hypothesis) -> Result<(), EncodingError> {
        let model = self
            .last_model
            .as_ref()
            .ok_or_else(|| EncodingError::Unsound("no model".into()))?;
        let bad = |msg: String| Err(EncodingError::Unsound(msg));
        let basis = hyp.basis();
        if basis.first() != Some(&Word::empty()) {
            return bad("basis lacks ε".into());
        }
        for p in basis {
            if let Some((q, _)) = p.split_last() {
                if !basis.contains(&q) {
                    return bad(format!("basis not prefix-closed at {p:?}"));
                }
            }
            if hyp.accepts(p) != self.full_value(model, table, p)? {
                return bad(format!("hypothesis disagrees with the table on basis word {p:?}"));
            }
        }
        for (i, p) in basis.iter().enumerate() {
            for a in table.alphabet().letters() {
                let target = &basis[hyp.dfa().step(i, a)];
                let pa = p.push(a);
                if basis.contains(&pa) && *target != pa {
                    return bad(format!("basis word {pa:?} identified with {target:?}"));
                }
                for s in table.suffixes() {
                    let left = self.full_value(model, table, &pa.concat(s))?;
                    let right = self.full_value(model, table, &target.concat(s))?;
                    if left != right {
                        return bad(format!("row {pa:?} differs from {target:?} on {s:?}"));
                    }
                }
            }
        }
        for (w1, w2) in table.pairs() {
            if self.full_value(model, table, w1)? && !self.full_value(model, table, w2)? {
                return bad(format!("inductive pair {w1:?} -> {w2:?} violated"));
            }
        }
        Ok(())
    }

    /// Whether the basis rows of the last model are pairwise distinct.
    pub fn basis_rows_distinct(&self, table: &ObservationTable, hyp: &Hypothesis) -> Result<bool, EncodingError> {
        let model = self
            .last_model
            .as_ref()
            .ok_or_else(|| EncodingError::Unsound("no model".into()))?;
        let mut rows = HashSet::new();
        for p in hyp.basis() {
            let row = table
                .suffixes()
                .iter()
                .map(|s| self.full_value(model, table, &p.concat(s)))
                .collect::<Result<Vec<bool>, _>>()?;
            if !rows.insert(row) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// New prefixes `p·a` named by a core, minus those already in the table.
pub fn prefixes_from_core(core: &[(Word, Letter)], table: &ObservationTable) -> Vec<Word> {
    let set: BTreeSet<Word> = core
        .iter()
        .map(|(p, a)| p.push(*a))
        .filter(|w| !table.has_prefix(w))
        .collect();
    set.into_iter().collect()
}
