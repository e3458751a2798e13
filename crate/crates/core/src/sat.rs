//! An incremental CDCL SAT solver with assumption literals.
//!
//! Clauses can be added between calls to [`Solver::solve`]; learnt clauses
//! are kept across calls. When a call fails under assumptions, the returned
//! core is the subset of assumptions that took part in the final conflict.

use std::fmt;
use std::io::{self, Write};
use std::ops::Not;
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit(self.0 * 2 + u32::from(!positive))
    }

    pub fn pos(self) -> Lit {
        self.lit(true)
    }

    pub fn neg(self) -> Lit {
        self.lit(false)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0 + 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    /// The DIMACS integer for this literal (variables numbered from 1).
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.0 >> 1) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A total assignment over every allocated variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Model),
    /// Failed assumptions, in the order they were passed.
    Unsat(Vec<Lit>),
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CoreShrink {
    Off,
    #[default]
    OnePass,
    Fixpoint,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SatError {
    #[error("core to shrink is satisfiable together with the clause set")]
    CoreNotUnsat,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub learnt: u64,
}

type CRef = usize;

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
    deleted: bool,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

/// Max-heap of variables by activity; ties go to the lower index.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn before(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::before(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::before(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::before(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, None);
        }
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(mut i: u64) -> u64 {
    // i-th element (0-based) of 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub struct Solver {
    clauses: Vec<Clause>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    original: Vec<Vec<Lit>>,
    max_learnts: f64,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            original: Vec::new(),
            max_learnts: 2000.0,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len() as u32;
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        Var(v)
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Number of clauses added through [`Solver::add_clause`].
    pub fn num_clauses(&self) -> usize {
        self.original.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.original
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// False once the clause set is unsatisfiable without assumptions.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var().index()];
        if l.is_positive() {
            a
        } else {
            -a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_positive() { TRUE } else { FALSE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        let cref = self.clauses.len();
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            activity: 0.0,
            deleted: false,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    /// Adds a clause permanently. Returns false if the clause set became
    /// unsatisfiable. Every variable must come from [`Solver::new_var`].
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        assert!(
            lits.iter().all(|l| l.var().index() < self.num_vars()),
            "literal over an unallocated variable"
        );
        self.original.push(lits.to_vec());
        if !self.ok {
            return false;
        }
        self.backtrack(0);
        let mut c = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return true;
        }
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        c.retain(|&l| self.value(l) == UNDEF);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c, false);
            }
        }
        self.ok
    }

    fn propagate(&mut self) -> Option<CRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if self.clauses[w.cref].deleted {
                    continue;
                }
                let assigns = &self.assigns;
                let val = |l: Lit| {
                    let a = assigns[l.var().index()];
                    if l.is_positive() {
                        a
                    } else {
                        -a
                    }
                };
                let lits = &mut self.clauses[w.cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && val(first) == TRUE {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if val(lits[k]) != FALSE {
                        lits.swap(1, k);
                        let new_watch = lits[1];
                        self.watches[new_watch.code()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if val(first) == FALSE {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: Var) {
        let i = v.index();
        self.activity[i] += self.var_inc;
        if self.activity[i] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v.0, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, confl: CRef) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut cref = confl;
        loop {
            self.bump_clause(cref);
            let start = usize::from(p.is_some());
            for k in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var().index()] = false;
            pending -= 1;
            p = Some(pl);
            if pending == 0 {
                break;
            }
            cref = self.reason[pl.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict has a UIP");

        // drop literals implied by other learnt literals
        let all = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let redundant = match self.reason[q.var().index()] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|&l| {
                    let v = l.var().index();
                    self.seen[v] || self.level[v] == 0
                }),
            };
            if !redundant {
                kept.push(q);
            }
        }
        for q in all {
            self.seen[q.var().index()] = false;
        }
        let mut learnt = kept;
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var().index()];
        }
        (learnt, back)
    }

    /// Collects the assumptions responsible for the assumption `a` being
    /// false.
    fn analyze_final(&mut self, a: Lit, assumptions: &[Lit]) -> Vec<Lit> {
        let mut core = std::collections::HashSet::new();
        core.insert(a);
        if self.decision_level() > 0 {
            self.seen[a.var().index()] = true;
            for k in (self.trail_lim[0]..self.trail.len()).rev() {
                let x = self.trail[k];
                let v = x.var().index();
                if !self.seen[v] {
                    continue;
                }
                match self.reason[v] {
                    None => {
                        core.insert(x);
                    }
                    Some(r) => {
                        for j in 1..self.clauses[r].lits.len() {
                            let u = self.clauses[r].lits[j].var().index();
                            if self.level[u] > 0 {
                                self.seen[u] = true;
                            }
                        }
                    }
                }
                self.seen[v] = false;
            }
            self.seen[a.var().index()] = false;
        }
        let mut ordered: Vec<Lit> = Vec::new();
        for &l in assumptions {
            if core.remove(&l) {
                ordered.push(l);
            }
        }
        ordered
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.phase[v] = l.is_positive();
            self.heap.insert(l.var().0, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<CRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| {
                let cl = &self.clauses[c];
                let first = cl.lits[0];
                let locked =
                    self.reason[first.var().index()] == Some(c) && self.value(first) == TRUE;
                cl.lits.len() > 2 && !locked
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
                .then(a.cmp(&b))
        });
        for &c in &cands[..cands.len() / 2] {
            self.clauses[c].deleted = true;
            self.clauses[c].lits = Vec::new();
        }
        self.learnts.retain(|&c| !self.clauses[c].deleted);
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(Var(v).lit(self.phase[v as usize]));
            }
        }
        None
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> SatOutcome {
        self.solve_with_deadline(assumptions, None)
            .expect("no deadline given")
    }

    /// Like [`Solver::solve`], giving up with `None` once `deadline` passes.
    pub fn solve_with_deadline(
        &mut self,
        assumptions: &[Lit],
        deadline: Option<Instant>,
    ) -> Option<SatOutcome> {
        self.stats.solves += 1;
        if !self.ok {
            return Some(SatOutcome::Unsat(Vec::new()));
        }
        let mut restarts = 0u64;
        let mut budget = luby(0) * 100;
        let mut since_restart = 0u64;
        let outcome = loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    break SatOutcome::Unsat(Vec::new());
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.stats.learnt += 1;
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.stats.conflicts % 256 == 0 {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            self.backtrack(0);
                            return None;
                        }
                    }
                }
                continue;
            }
            if since_restart >= budget {
                restarts += 1;
                budget = luby(restarts) * 100;
                since_restart = 0;
                self.backtrack(0);
                self.max_learnts *= 1.05;
                continue;
            }
            if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                self.reduce_db();
            }
            let mut next = None;
            let mut failed = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        failed = Some(self.analyze_final(a, assumptions));
                        break;
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            if let Some(core) = failed {
                break SatOutcome::Unsat(core);
            }
            let decision = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => {
                        self.stats.decisions += 1;
                        l
                    }
                    None => {
                        let values = self.assigns.iter().map(|&a| a == TRUE).collect();
                        break SatOutcome::Sat(Model { values });
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        };
        self.backtrack(0);
        Some(outcome)
    }

    /// Deletion-based core minimization. Each pass tries dropping every
    /// literal and keeps the drop when the rest is still unsatisfiable.
    pub fn shrink_core(&mut self, core: &[Lit], mode: CoreShrink) -> Result<Vec<Lit>, SatError> {
        let mut current = match self.solve(core) {
            SatOutcome::Unsat(c) => c,
            SatOutcome::Sat(_) => return Err(SatError::CoreNotUnsat),
        };
        if mode == CoreShrink::Off {
            return Ok(core.to_vec());
        }
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < current.len() {
                let mut cand = current.clone();
                cand.remove(i);
                match self.solve(&cand) {
                    // literals before i stay necessary, so i is still the
                    // next untested position
                    SatOutcome::Unsat(c) => {
                        current = c;
                        changed = true;
                    }
                    SatOutcome::Sat(_) => i += 1,
                }
            }
            if mode == CoreShrink::OnePass || !changed {
                return Ok(current);
            }
        }
    }

    /// Writes every clause added so far in DIMACS CNF.
    pub fn write_dimacs(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars(), self.original.len())?;
        for c in &self.original {
            for l in c {
                write!(out, "{} ", l.to_dimacs())?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }
}
