//! Teachers that may answer "don't know" to membership queries but back it
//! up with inductive hints, and whose validity check can return a pair of
//! words as a counterexample.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::automata::{Alphabet, AutomataError, Dfa, Word};
use crate::table::TriBool;
use crate::transducer::{Direction, RmcModel, TransducerError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemAnswer {
    Yes,
    No,
    Unknown(Vec<(Word, Word)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValAnswer {
    Valid,
    /// A word whose status is decisive and disagrees with the hypothesis.
    SimpleCex(Word),
    /// `(w1, w2)` with `w1` accepted, `w2` rejected, and the pair certified
    /// as inductive by the teacher.
    InductiveCex(Word, Word),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TeacherStats {
    pub mem_status_calls: u64,
    pub mem_hint_calls: u64,
    pub val_calls: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TeacherError {
    #[error("no answer exists: {0:?} is both required and forbidden")]
    Unsafe(Word),
    #[error("teacher contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Transducer(#[from] TransducerError),
}

/// Why a candidate answer is not acceptable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckFailure {
    /// A word that must be accepted is rejected.
    MissesRequired(Word),
    /// A word that must be rejected is accepted.
    AcceptsForbidden(Word),
    /// `from` is accepted, `to` is a successor of `from`, and `to` is rejected.
    NotInductive { from: Word, to: Word },
}

impl CheckFailure {
    pub fn describe(&self, sigma: &Alphabet) -> String {
        match self {
            CheckFailure::MissesRequired(w) => {
                format!("required word rejected: {}", sigma.render(w))
            }
            CheckFailure::AcceptsForbidden(w) => {
                format!("forbidden word accepted: {}", sigma.render(w))
            }
            CheckFailure::NotInductive { from, to } => format!(
                "not closed under steps: {} -> {}",
                sigma.render(from),
                sigma.render(to)
            ),
        }
    }
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckFailure::MissesRequired(w) => write!(f, "required word rejected: {w:?}"),
            CheckFailure::AcceptsForbidden(w) => write!(f, "forbidden word accepted: {w:?}"),
            CheckFailure::NotInductive { from, to } => {
                write!(f, "not closed under steps: {from:?} -> {to:?}")
            }
        }
    }
}

/// Checks `pos ⊆ h` and `h ∩ neg = ∅`, reporting shortlex-least witnesses.
pub fn check_separator(pos: &Dfa, neg: &Dfa, h: &Dfa) -> Result<Option<CheckFailure>, AutomataError> {
    if let Some(w) = pos.difference(h)?.shortest_accepted() {
        return Ok(Some(CheckFailure::MissesRequired(w)));
    }
    if let Some(w) = h.intersect(neg)?.shortest_accepted() {
        return Ok(Some(CheckFailure::AcceptsForbidden(w)));
    }
    Ok(None)
}

/// Checks that `h` contains the initial words, avoids the bad words and is
/// closed under one step of the transition relation.
pub fn check_invariant(model: &RmcModel, h: &Dfa) -> Result<Option<CheckFailure>, AutomataError> {
    if let Some(w) = model.initial.difference(h)?.shortest_accepted() {
        return Ok(Some(CheckFailure::MissesRequired(w)));
    }
    if let Some(w) = h.intersect(&model.bad)?.shortest_accepted() {
        return Ok(Some(CheckFailure::AcceptsForbidden(w)));
    }
    let post = model.step.image(h, Direction::Forward)?;
    if let Some(to) = post.difference(h)?.shortest_accepted() {
        let from = model
            .step
            .step_words(&to, Direction::Backward)
            .into_iter()
            .find(|v| h.contains(v))
            .expect("a word of Post(H) has a predecessor in H");
        return Ok(Some(CheckFailure::NotInductive { from, to }));
    }
    Ok(None)
}

pub trait Teacher {
    fn alphabet(&self) -> &Alphabet;

    /// `One` if every acceptable answer contains `w`, `Zero` if none does,
    /// `Blank` otherwise.
    fn mem_status(&mut self, w: &Word) -> Result<TriBool, TeacherError>;

    /// Inductive pairs between `w` and words of `candidates`. Each pair has
    /// `w` on one side. Only defined for words with a `Blank` status.
    fn mem_hints(&mut self, w: &Word, candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError>;

    fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError>;

    fn stats(&self) -> TeacherStats;

    /// Independent acceptance check of a final answer. Does not touch the
    /// query counters.
    fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError>;

    fn mem(&mut self, w: &Word, candidates: &[Word]) -> Result<MemAnswer, TeacherError> {
        Ok(match self.mem_status(w)? {
            TriBool::One => MemAnswer::Yes,
            TriBool::Zero => MemAnswer::No,
            TriBool::Blank => MemAnswer::Unknown(self.mem_hints(w, candidates)?),
        })
    }
}

impl<T: Teacher + ?Sized> Teacher for Box<T> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }
    fn mem_status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        (**self).mem_status(w)
    }
    fn mem_hints(&mut self, w: &Word, candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        (**self).mem_hints(w, candidates)
    }
    fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError> {
        (**self).validate(h)
    }
    fn stats(&self) -> TeacherStats {
        (**self).stats()
    }
    fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError> {
        (**self).check(h)
    }
}

fn shortest_cex(
    must: &Dfa,
    must_not: &Dfa,
    h: &Dfa,
) -> Result<Option<Word>, AutomataError> {
    let missing = must.difference(h)?;
    let extra = h.intersect(must_not)?;
    Ok(missing.union(&extra)?.shortest_accepted())
}

/// Separation of two disjoint regular languages: any regular `H` with
/// `pos ⊆ H` and `H ∩ neg = ∅` is acceptable. Never gives hints.
pub struct SeparationTeacher {
    pos: Dfa,
    neg: Dfa,
    stats: TeacherStats,
}

impl SeparationTeacher {
    /// Fails with [`TeacherError::Unsafe`] carrying the shortlex-least common
    /// word when the languages overlap.
    pub fn new(pos: Dfa, neg: Dfa) -> Result<Self, TeacherError> {
        if let Some(w) = pos.intersect(&neg)?.shortest_accepted() {
            return Err(TeacherError::Unsafe(w));
        }
        Ok(SeparationTeacher {
            pos,
            neg,
            stats: TeacherStats::default(),
        })
    }

    pub fn pos(&self) -> &Dfa {
        &self.pos
    }

    pub fn neg(&self) -> &Dfa {
        &self.neg
    }
}

impl Teacher for SeparationTeacher {
    fn alphabet(&self) -> &Alphabet {
        self.pos.alphabet()
    }

    fn mem_status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        self.stats.mem_status_calls += 1;
        Ok(if self.pos.accepts(w)? {
            TriBool::One
        } else if self.neg.accepts(w)? {
            TriBool::Zero
        } else {
            TriBool::Blank
        })
    }

    fn mem_hints(&mut self, _w: &Word, _candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        self.stats.mem_hint_calls += 1;
        Ok(Vec::new())
    }

    fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError> {
        self.stats.val_calls += 1;
        Ok(match shortest_cex(&self.pos, &self.neg, h)? {
            Some(w) => ValAnswer::SimpleCex(w),
            None => ValAnswer::Valid,
        })
    }

    fn stats(&self) -> TeacherStats {
        self.stats
    }

    fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError> {
        Ok(check_separator(&self.pos, &self.neg, h)?)
    }
}

/// Invariant inference for a regular transition system. A word is `One`
/// when reachable from an initial word of its length, `Zero` when it can
/// reach a bad word, `Blank` otherwise.
pub struct RmcTeacher {
    model: RmcModel,
    reach: HashMap<usize, HashSet<Word>>,
    coreach: HashMap<usize, HashSet<Word>>,
    stats: TeacherStats,
}

impl RmcTeacher {
    pub fn new(model: RmcModel) -> Self {
        RmcTeacher {
            model,
            reach: HashMap::new(),
            coreach: HashMap::new(),
            stats: TeacherStats::default(),
        }
    }

    pub fn model(&self) -> &RmcModel {
        &self.model
    }

    fn ensure_length(&mut self, n: usize) -> Result<(), TeacherError> {
        if self.reach.contains_key(&n) {
            return Ok(());
        }
        let step = &self.model.step;
        let init = self.model.initial.words_of_length(n);
        let reach = step.star_finite(&init, Direction::Forward)?;
        if let Some(w) = reach.iter().find(|w| self.model.bad.contains(w)) {
            return Err(TeacherError::Unsafe(w.clone()));
        }
        let bad = self.model.bad.words_of_length(n);
        let coreach = step.star_finite(&bad, Direction::Backward)?;
        self.reach.insert(n, reach.into_iter().collect());
        self.coreach.insert(n, coreach.into_iter().collect());
        Ok(())
    }

    /// Status without touching the counters.
    pub fn status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        self.model.alphabet().check_word(w)?;
        self.ensure_length(w.len())?;
        Ok(if self.reach[&w.len()].contains(w) {
            TriBool::One
        } else if self.coreach[&w.len()].contains(w) {
            TriBool::Zero
        } else {
            TriBool::Blank
        })
    }

    /// `{w} × (Post*({w}) ∩ A) ∪ (Pre*({w}) ∩ A) × {w}` without `(w, w)`.
    pub fn hint_pairs(&self, w: &Word, candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        let same: Vec<&Word> = candidates
            .iter()
            .filter(|v| v.len() == w.len() && *v != w)
            .collect();
        if same.is_empty() {
            return Ok(Vec::new());
        }
        let step = &self.model.step;
        let fwd = step.star_finite([w], Direction::Forward)?;
        let bwd = step.star_finite([w], Direction::Backward)?;
        let mut pairs = BTreeSet::new();
        for v in same {
            if fwd.contains(v) {
                pairs.insert((w.clone(), v.clone()));
            }
            if bwd.contains(v) {
                pairs.insert((v.clone(), w.clone()));
            }
        }
        Ok(pairs.into_iter().collect())
    }
}

impl Teacher for RmcTeacher {
    fn alphabet(&self) -> &Alphabet {
        self.model.alphabet()
    }

    fn mem_status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        self.stats.mem_status_calls += 1;
        self.status(w)
    }

    fn mem_hints(&mut self, w: &Word, candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        self.stats.mem_hint_calls += 1;
        if self.status(w)? != TriBool::Blank {
            return Err(TeacherError::Contract(format!(
                "hints requested for decided word {w:?}"
            )));
        }
        self.hint_pairs(w, candidates)
    }

    fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError> {
        self.stats.val_calls += 1;
        if let Some(w) = shortest_cex(&self.model.initial, &self.model.bad, h)? {
            return Ok(ValAnswer::SimpleCex(w));
        }
        let post = self.model.step.image(h, Direction::Forward)?;
        let Some(w2) = post.difference(h)?.shortest_accepted() else {
            return Ok(ValAnswer::Valid);
        };
        let w1 = self
            .model
            .step
            .step_words(&w2, Direction::Backward)
            .into_iter()
            .find(|v| h.contains(v))
            .ok_or_else(|| TeacherError::Contract("successor without predecessor".into()))?;
        // A decided endpoint already contradicts the hypothesis on its own.
        if self.status(&w2)? == TriBool::One {
            return Ok(ValAnswer::SimpleCex(w2));
        }
        if self.status(&w1)? == TriBool::Zero {
            return Ok(ValAnswer::SimpleCex(w1));
        }
        Ok(ValAnswer::InductiveCex(w1, w2))
    }

    fn stats(&self) -> TeacherStats {
        self.stats
    }

    fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError> {
        Ok(check_invariant(&self.model, h)?)
    }
}

/// A teacher that never answers "don't know": `Blank` is replaced by a fixed
/// answer. With `One` it over-approximates (non-strict), with `Zero` it
/// under-approximates (strict). Validity queries go to the wrapped teacher.
pub struct Baseline<T> {
    inner: T,
    blank_as: TriBool,
}

impl<T: Teacher> Baseline<T> {
    pub fn strict(inner: T) -> Self {
        Baseline {
            inner,
            blank_as: TriBool::Zero,
        }
    }

    pub fn non_strict(inner: T) -> Self {
        Baseline {
            inner,
            blank_as: TriBool::One,
        }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Teacher> Teacher for Baseline<T> {
    fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    fn mem_status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        Ok(match self.inner.mem_status(w)? {
            TriBool::Blank => self.blank_as,
            s => s,
        })
    }

    fn mem_hints(&mut self, w: &Word, _candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        Err(TeacherError::Contract(format!(
            "hints requested from a teacher without blanks for {w:?}"
        )))
    }

    fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError> {
        self.inner.validate(h)
    }

    fn stats(&self) -> TeacherStats {
        self.inner.stats()
    }

    fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError> {
        self.inner.check(h)
    }
}

/// Memoizes a teacher so that each word's status and each candidate pair is
/// asked at most once.
pub struct CachedTeacher<'t> {
    teacher: &'t mut dyn Teacher,
    status: HashMap<Word, TriBool>,
    pairs: HashMap<(Word, Word), bool>,
}

impl<'t> CachedTeacher<'t> {
    pub fn new(teacher: &'t mut dyn Teacher) -> Self {
        CachedTeacher {
            teacher,
            status: HashMap::new(),
            pairs: HashMap::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.teacher.alphabet()
    }

    pub fn status(&mut self, w: &Word) -> Result<TriBool, TeacherError> {
        if let Some(&v) = self.status.get(w) {
            return Ok(v);
        }
        let v = self.teacher.mem_status(w)?;
        self.status.insert(w.clone(), v);
        Ok(v)
    }

    pub fn cached_status(&self, w: &Word) -> Option<TriBool> {
        self.status.get(w).copied()
    }

    /// Hint pairs between `w` and `candidates`; also records every
    /// candidate pair that was not returned as a non-pair.
    pub fn hints(&mut self, w: &Word, candidates: &[Word]) -> Result<Vec<(Word, Word)>, TeacherError> {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let found = self.teacher.mem_hints(w, candidates)?;
        for v in candidates {
            self.pairs.entry((w.clone(), v.clone())).or_insert(false);
            self.pairs.entry((v.clone(), w.clone())).or_insert(false);
        }
        for p in &found {
            self.pairs.insert(p.clone(), true);
        }
        Ok(found)
    }

    /// Whether `(w1, w2)` is an inductive pair. `w1` must have a `Blank`
    /// status.
    pub fn is_pair(&mut self, w1: &Word, w2: &Word) -> Result<bool, TeacherError> {
        if w1.len() != w2.len() {
            return Ok(false);
        }
        let key = (w1.clone(), w2.clone());
        if let Some(&b) = self.pairs.get(&key) {
            return Ok(b);
        }
        let found = self.teacher.mem_hints(w1, std::slice::from_ref(w2))?;
        let b = found.contains(&key);
        self.pairs.insert(key, b);
        Ok(b)
    }

    pub fn validate(&mut self, h: &Dfa) -> Result<ValAnswer, TeacherError> {
        self.teacher.validate(h)
    }

    pub fn check(&self, h: &Dfa) -> Result<Option<CheckFailure>, TeacherError> {
        self.teacher.check(h)
    }

    pub fn stats(&self) -> TeacherStats {
        self.teacher.stats()
    }
}
