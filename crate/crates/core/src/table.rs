//! Observation tables whose cells may be unknown.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::automata::{Alphabet, Word};
use crate::teachers::{CachedTeacher, TeacherError};

/// A three-valued answer: decisive `Zero`/`One`, or `Blank` for unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriBool {
    Zero,
    One,
    Blank,
}

impl TriBool {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriBool::One
        } else {
            TriBool::Zero
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            TriBool::Zero => Some(false),
            TriBool::One => Some(true),
            TriBool::Blank => None,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != TriBool::Blank
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TriBool::Zero => "0",
            TriBool::One => "1",
            TriBool::Blank => "□",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TableError {
    #[error("{0:?} is not a cell of the table")]
    NotACell(Word),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
}

/// Prefixes `P` (prefix-closed, shortlex-sorted), suffixes `S` (insertion
/// order, `ε` first), and a status for every cell word in `(P ∪ P·Σ)·S`.
/// Cells are keyed by the concatenated word, so `p·s = p'·s'` share one
/// entry.
#[derive(Clone, Debug)]
pub struct ObservationTable {
    alphabet: Alphabet,
    prefixes: BTreeSet<Word>,
    suffixes: Vec<Word>,
    status: HashMap<Word, TriBool>,
    incomplete: BTreeSet<Word>,
    pairs: BTreeSet<(Word, Word)>,
}

/// What an extension added.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extension {
    pub prefixes: Vec<Word>,
    pub suffixes: Vec<Word>,
    pub cells: usize,
    pub blanks: usize,
    pub pairs: usize,
}

impl ObservationTable {
    /// An empty table with `P = S = {ε}`; call [`Self::extend_and_fill`] with
    /// no new words to fill the initial cells.
    pub fn new(alphabet: Alphabet) -> Self {
        ObservationTable {
            alphabet,
            prefixes: BTreeSet::from([Word::empty()]),
            suffixes: vec![Word::empty()],
            status: HashMap::new(),
            incomplete: BTreeSet::new(),
            pairs: BTreeSet::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &Word> {
        self.prefixes.iter()
    }

    pub fn prefix_count(&self) -> usize {
        self.prefixes.len()
    }

    pub fn has_prefix(&self, p: &Word) -> bool {
        self.prefixes.contains(p)
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    pub fn has_suffix(&self, s: &Word) -> bool {
        self.suffixes.contains(s)
    }

    /// Words of `U`, shortlex-sorted.
    pub fn incomplete(&self) -> &BTreeSet<Word> {
        &self.incomplete
    }

    pub fn pairs(&self) -> &BTreeSet<(Word, Word)> {
        &self.pairs
    }

    pub fn is_cell(&self, w: &Word) -> bool {
        self.status.contains_key(w)
    }

    pub fn cell_count(&self) -> usize {
        self.status.len()
    }

    pub fn cell_value(&self, w: &Word) -> Result<TriBool, TableError> {
        self.status
            .get(w)
            .copied()
            .ok_or_else(|| TableError::NotACell(w.clone()))
    }

    /// Row of `p` (a prefix or a one-letter extension of one) over `S`.
    pub fn row(&self, p: &Word) -> Result<Vec<TriBool>, TableError> {
        self.suffixes
            .iter()
            .map(|s| self.cell_value(&p.concat(s)))
            .collect()
    }

    /// Row words `P ∪ P·Σ`, shortlex-sorted.
    pub fn row_words(&self) -> BTreeSet<Word> {
        let mut rows = self.prefixes.clone();
        for p in &self.prefixes {
            for a in self.alphabet.letters() {
                rows.insert(p.push(a));
            }
        }
        rows
    }

    /// Adds prefixes (with all their prefixes) and suffixes, queries the
    /// status of every new cell once, and collects inductive pairs for new
    /// blank cells against the current set of blank cells.
    pub fn extend_and_fill<'w>(
        &mut self,
        new_prefixes: impl IntoIterator<Item = &'w Word>,
        new_suffixes: impl IntoIterator<Item = &'w Word>,
        oracle: &mut CachedTeacher<'_>,
    ) -> Result<Extension, TableError> {
        let mut ext = Extension::default();
        for p in new_prefixes {
            for q in p.prefixes() {
                if self.prefixes.insert(q.clone()) {
                    ext.prefixes.push(q);
                }
            }
        }
        ext.prefixes.sort();
        for s in new_suffixes {
            if !self.suffixes.contains(s) {
                self.suffixes.push(s.clone());
                ext.suffixes.push(s.clone());
            }
        }
        let mut fresh = Vec::new();
        for r in self.row_words() {
            for s in &self.suffixes {
                let w = r.concat(s);
                if self.status.contains_key(&w) {
                    continue;
                }
                let v = oracle.status(&w)?;
                self.status.insert(w.clone(), v);
                ext.cells += 1;
                if v == TriBool::Blank {
                    self.incomplete.insert(w.clone());
                    fresh.push(w);
                }
            }
        }
        ext.blanks = fresh.len();
        fresh.sort();
        for u in &fresh {
            let others: Vec<Word> = self
                .incomplete
                .iter()
                .filter(|v| v.len() == u.len() && *v != u)
                .cloned()
                .collect();
            for pair in oracle.hints(u, &others)? {
                if self.pairs.insert(pair) {
                    ext.pairs += 1;
                }
            }
        }
        Ok(ext)
    }

    /// Aligned text rendering: rows `P`, a separator, then rows `P·Σ \ P`.
    pub fn dump(&self) -> String {
        let render = |w: &Word| self.alphabet.render(w);
        let width = |s: &str| s.chars().count();
        let extra: Vec<Word> = self
            .row_words()
            .into_iter()
            .filter(|r| !self.prefixes.contains(r))
            .collect();
        let label_w = self
            .prefixes
            .iter()
            .chain(&extra)
            .map(|w| width(&render(w)))
            .max()
            .unwrap_or(1);
        let cols: Vec<String> = self.suffixes.iter().map(render).collect();
        let col_w: Vec<usize> = cols.iter().map(|c| width(c).max(1)).collect();
        let mut out = String::new();
        let _ = write!(out, "{:label_w$} |", "");
        for (c, w) in cols.iter().zip(&col_w) {
            let _ = write!(out, " {c:>w$}");
        }
        out.push('\n');
        let line = |out: &mut String, r: &Word| {
            let _ = write!(out, "{:label_w$} |", render(r));
            for (s, w) in self.suffixes.iter().zip(&col_w) {
                let v = self.status.get(&r.concat(s)).map_or("?", |v| v.symbol());
                let _ = write!(out, " {v:>w$}");
            }
            out.push('\n');
        };
        for p in &self.prefixes {
            line(&mut out, p);
        }
        let _ = writeln!(out, "{}", "-".repeat(label_w + 2));
        for r in &extra {
            line(&mut out, r);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Dfa;
    use crate::teachers::{SeparationTeacher, Teacher};

    fn sigma() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn teacher() -> SeparationTeacher {
        // even number of a's vs odd number of a's
        let even = Dfa::new(sigma(), 2, 0, [0], [(0, 0, 1), (1, 0, 0), (0, 1, 0), (1, 1, 1)]).unwrap();
        SeparationTeacher::new(even.clone(), even.complement()).unwrap()
    }

    #[test]
    fn initial_fill_and_idempotence() {
        let mut t = teacher();
        let mut o = CachedTeacher::new(&mut t);
        let mut table = ObservationTable::new(sigma());
        let ext = table.extend_and_fill([], [], &mut o).unwrap();
        assert_eq!(ext.cells, 3);
        assert_eq!(table.cell_value(&Word::empty()).unwrap(), TriBool::One);
        let eps = Word::empty();
        let ext = table.extend_and_fill([], [&eps, &eps], &mut o).unwrap();
        assert_eq!(ext, Extension::default());
        assert!(table.cell_value(&Word::from_letters(vec![0, 0, 0])).is_err());
        drop(o);
        assert_eq!(t.stats().mem_status_calls, 3);
    }

    #[test]
    fn prefixes_are_closed_and_sorted() {
        let mut t = teacher();
        let mut o = CachedTeacher::new(&mut t);
        let mut table = ObservationTable::new(sigma());
        let p = Word::from_letters(vec![1, 0, 1]);
        table.extend_and_fill([&p], [], &mut o).unwrap();
        let ps: Vec<&Word> = table.prefixes().collect();
        assert_eq!(ps.len(), 4);
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        assert!(table.dump().contains("bab"));
    }
}
