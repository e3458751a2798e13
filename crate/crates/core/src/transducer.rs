//! Length-preserving transducers and the regular transition systems built on
//! them.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::automata::{Alphabet, AutomataError, Dfa, Letter, Nfa, StateId, Word};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TransducerError {
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("seed words have different lengths ({0} and {1})")]
    MixedLengths(usize, usize),
}

/// Which way to apply the step relation: `Forward` computes successors
/// (`Post`), `Backward` computes predecessors (`Pre`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// A letter-to-letter transducer. Every transition reads one letter and
/// writes one letter, so related words always have equal length.
#[derive(Clone, Debug)]
pub struct Transducer {
    alphabet: Alphabet,
    initial: Vec<StateId>,
    accepting: Vec<bool>,
    transitions: Vec<(StateId, Letter, Letter, StateId)>,
    // by_in[q][a] = [(out, to)], by_out[q][b] = [(in, to)]
    by_in: Vec<Vec<Vec<(Letter, StateId)>>>,
    by_out: Vec<Vec<Vec<(Letter, StateId)>>>,
}

impl Transducer {
    pub fn new(
        alphabet: Alphabet,
        state_count: usize,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = (StateId, Letter, Letter, StateId)>,
    ) -> Result<Self, AutomataError> {
        if state_count == 0 {
            return Err(AutomataError::NoStates);
        }
        let k = alphabet.len();
        let state = |q: StateId| {
            if q < state_count {
                Ok(q)
            } else {
                Err(AutomataError::InvalidState {
                    state: q,
                    count: state_count,
                })
            }
        };
        let letter = |a: Letter| {
            if (a as usize) < k {
                Ok(a)
            } else {
                Err(AutomataError::MalformedWord { letter: a, size: k })
            }
        };
        let mut init = initial.into_iter().map(state).collect::<Result<Vec<_>, _>>()?;
        init.sort_unstable();
        init.dedup();
        let mut acc = vec![false; state_count];
        for q in accepting {
            acc[state(q)?] = true;
        }
        let mut by_in = vec![vec![Vec::new(); k]; state_count];
        let mut by_out = vec![vec![Vec::new(); k]; state_count];
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        for (from, a, b, to) in transitions {
            let t = (state(from)?, letter(a)?, letter(b)?, state(to)?);
            if seen.insert(t) {
                by_in[from][a as usize].push((b, to));
                by_out[from][b as usize].push((a, to));
                list.push(t);
            }
        }
        Ok(Transducer {
            alphabet,
            initial: init,
            accepting: acc,
            transitions: list,
            by_in,
            by_out,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_count()).filter(|&q| self.accepting[q])
    }

    pub fn transitions(&self) -> &[(StateId, Letter, Letter, StateId)] {
        &self.transitions
    }

    fn moves(&self, dir: Direction) -> &[Vec<Vec<(Letter, StateId)>>] {
        match dir {
            Direction::Forward => &self.by_in,
            Direction::Backward => &self.by_out,
        }
    }

    /// Every word related to `w` by one step, shortlex-sorted.
    pub fn step_words(&self, w: &Word, dir: Direction) -> Vec<Word> {
        let moves = self.moves(dir);
        let n = w.len();
        let letters = w.letters();
        // live[i][q]: the rest of w from position i can be consumed from q
        let mut live = vec![vec![false; self.state_count()]; n + 1];
        live[n].clone_from(&self.accepting);
        for i in (0..n).rev() {
            for q in 0..self.state_count() {
                live[i][q] = moves[q][letters[i] as usize]
                    .iter()
                    .any(|&(_, t)| live[i + 1][t]);
            }
        }
        let mut frontier: HashSet<(StateId, Vec<Letter>)> = self
            .initial
            .iter()
            .filter(|&&q| live[0][q])
            .map(|&q| (q, Vec::new()))
            .collect();
        for i in 0..n {
            let mut next = HashSet::with_capacity(frontier.len());
            for (q, out) in &frontier {
                for &(b, t) in &moves[*q][letters[i] as usize] {
                    if live[i + 1][t] {
                        let mut o = out.clone();
                        o.push(b);
                        next.insert((t, o));
                    }
                }
            }
            frontier = next;
        }
        let outs: BTreeSet<Word> = frontier
            .into_iter()
            .map(|(_, o)| Word::from_letters(o))
            .collect();
        outs.into_iter().collect()
    }

    /// A DFA for `Post(L)` (forward) or `Pre(L)` (backward).
    pub fn image(&self, lang: &Dfa, dir: Direction) -> Result<Dfa, AutomataError> {
        if lang.alphabet() != &self.alphabet {
            return Err(AutomataError::AlphabetMismatch);
        }
        let moves = self.moves(dir);
        let mut nfa = Nfa::new(self.alphabet.clone(), 0);
        let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        for &t in &self.initial {
            let key = (t, lang.initial());
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(key) {
                let id = nfa.add_state();
                nfa.add_initial(id);
                e.insert(id);
                queue.push_back(key);
            }
        }
        while let Some((t, d)) = queue.pop_front() {
            let id = ids[&(t, d)];
            if self.accepting[t] && lang.is_accepting(d) {
                nfa.add_accepting(id);
            }
            for a in self.alphabet.letters() {
                let d2 = lang.step(d, a);
                for &(b, t2) in &moves[t][a as usize] {
                    let key = (t2, d2);
                    let target = match ids.get(&key) {
                        Some(&x) => x,
                        None => {
                            let x = nfa.add_state();
                            ids.insert(key, x);
                            queue.push_back(key);
                            x
                        }
                    };
                    nfa.add_transition(id, b, target);
                }
            }
        }
        if nfa.state_count() == 0 {
            return Ok(Dfa::empty(self.alphabet.clone()));
        }
        Ok(nfa.determinize())
    }

    /// Least fixpoint of `seed` under one-step images. Seeds must share one
    /// length, which confines the result to `Σⁿ`.
    pub fn star_finite<'a>(
        &self,
        seed: impl IntoIterator<Item = &'a Word>,
        dir: Direction,
    ) -> Result<BTreeSet<Word>, TransducerError> {
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue: VecDeque<Word> = VecDeque::new();
        let mut len = None;
        let mut sorted: Vec<&Word> = seed.into_iter().collect();
        sorted.sort();
        for w in sorted {
            match len {
                None => len = Some(w.len()),
                Some(n) if n != w.len() => return Err(TransducerError::MixedLengths(n, w.len())),
                _ => {}
            }
            if seen.insert(w.clone()) {
                queue.push_back(w.clone());
            }
        }
        while let Some(w) = queue.pop_front() {
            for v in self.step_words(&w, dir) {
                if !seen.contains(&v) {
                    seen.insert(v.clone());
                    queue.push_back(v);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

/// A regular transition system: initial configurations, bad configurations,
/// and a step transducer over one alphabet.
#[derive(Clone, Debug)]
pub struct RmcModel {
    pub initial: Dfa,
    pub bad: Dfa,
    pub step: Transducer,
}

impl RmcModel {
    pub fn new(initial: Dfa, bad: Dfa, step: Transducer) -> Result<Self, AutomataError> {
        if initial.alphabet() != bad.alphabet() || initial.alphabet() != step.alphabet() {
            return Err(AutomataError::AlphabetMismatch);
        }
        Ok(RmcModel { initial, bad, step })
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.initial.alphabet()
    }
}
