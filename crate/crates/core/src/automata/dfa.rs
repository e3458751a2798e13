use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Alphabet, AutomataError, Letter, Nfa, Word};

pub type StateId = usize;

/// A complete deterministic finite automaton.
///
/// The transition function is total: constructors that accept partial
/// transition lists route every missing pair to a fresh rejecting sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: StateId,
    accepting: Vec<bool>,
    // row-major: delta[q * |Σ| + a]
    delta: Vec<StateId>,
}

impl Dfa {
    /// Builds a DFA from a possibly partial transition list.
    ///
    /// Two transitions for the same `(state, letter)` are rejected; missing
    /// pairs go to an added sink state.
    pub fn new(
        alphabet: Alphabet,
        state_count: usize,
        initial: StateId,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = (StateId, Letter, StateId)>,
    ) -> Result<Self, AutomataError> {
        if state_count == 0 {
            return Err(AutomataError::NoStates);
        }
        let check = |q: StateId| {
            if q < state_count {
                Ok(q)
            } else {
                Err(AutomataError::InvalidState {
                    state: q,
                    count: state_count,
                })
            }
        };
        check(initial)?;
        let k = alphabet.len();
        let mut acc = vec![false; state_count];
        for q in accepting {
            acc[check(q)?] = true;
        }
        let mut table: Vec<Option<StateId>> = vec![None; state_count * k];
        for (from, a, to) in transitions {
            check(from)?;
            check(to)?;
            if a as usize >= k {
                return Err(AutomataError::MalformedWord { letter: a, size: k });
            }
            let slot = &mut table[from * k + a as usize];
            if slot.is_some() {
                return Err(AutomataError::Nondeterministic {
                    state: from,
                    symbol: alphabet.symbol(a).to_string(),
                });
            }
            *slot = Some(to);
        }
        let needs_sink = table.iter().any(Option::is_none);
        let sink = state_count;
        let mut delta: Vec<StateId> = table.into_iter().map(|t| t.unwrap_or(sink)).collect();
        if needs_sink {
            acc.push(false);
            delta.extend(std::iter::repeat_n(sink, k));
        }
        Ok(Dfa {
            alphabet,
            initial,
            accepting: acc,
            delta,
        })
    }

    /// Builds a DFA from a complete row-major table.
    pub fn from_table(
        alphabet: Alphabet,
        initial: StateId,
        accepting: Vec<bool>,
        delta: Vec<StateId>,
    ) -> Result<Self, AutomataError> {
        let n = accepting.len();
        if n == 0 {
            return Err(AutomataError::NoStates);
        }
        if delta.len() != n * alphabet.len() {
            return Err(AutomataError::IncompleteTable);
        }
        if let Some(&q) = delta.iter().chain(std::iter::once(&initial)).find(|&&q| q >= n) {
            return Err(AutomataError::InvalidState { state: q, count: n });
        }
        Ok(Dfa {
            alphabet,
            initial,
            accepting,
            delta,
        })
    }

    /// The language `Σ*`.
    pub fn universal(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Dfa {
            alphabet,
            initial: 0,
            accepting: vec![true],
            delta: vec![0; k],
        }
    }

    /// The empty language.
    pub fn empty(alphabet: Alphabet) -> Self {
        let mut d = Dfa::universal(alphabet);
        d.accepting[0] = false;
        d
    }

    /// The finite language made of exactly `words`.
    pub fn from_words<'a>(
        alphabet: Alphabet,
        words: impl IntoIterator<Item = &'a Word>,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        // trie; state 0 is the root, the sink is appended at the end
        let mut next: Vec<Vec<Option<StateId>>> = vec![vec![None; k]];
        let mut acc = vec![false];
        for w in words {
            alphabet.check_word(w)?;
            let mut q = 0;
            for &a in w.letters() {
                q = match next[q][a as usize] {
                    Some(t) => t,
                    None => {
                        next.push(vec![None; k]);
                        acc.push(false);
                        let t = next.len() - 1;
                        next[q][a as usize] = Some(t);
                        t
                    }
                };
            }
            acc[q] = true;
        }
        let sink = next.len();
        acc.push(false);
        let mut delta: Vec<StateId> = next
            .into_iter()
            .flat_map(|row| row.into_iter().map(|t| t.unwrap_or(sink)))
            .collect();
        delta.extend(std::iter::repeat_n(sink, k));
        Dfa::from_table(alphabet, 0, acc, delta)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_count()).filter(|&q| self.accepting[q])
    }

    #[inline]
    pub fn step(&self, q: StateId, a: Letter) -> StateId {
        self.delta[q * self.alphabet.len() + a as usize]
    }

    /// State reached from `q` on `w`.
    ///
    /// Panics if `w` uses letters outside the alphabet.
    pub fn run_from(&self, q: StateId, w: &Word) -> StateId {
        w.letters().iter().fold(q, |q, &a| self.step(q, a))
    }

    pub fn run(&self, w: &Word) -> StateId {
        self.run_from(self.initial, w)
    }

    /// Membership test with alphabet validation.
    pub fn accepts(&self, w: &Word) -> Result<bool, AutomataError> {
        self.alphabet.check_word(w)?;
        Ok(self.contains(w))
    }

    /// Membership test for words known to be over this alphabet.
    pub fn contains(&self, w: &Word) -> bool {
        self.accepting[self.run(w)]
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            accepting: self.accepting.iter().map(|b| !b).collect(),
            delta: self.delta.clone(),
        }
    }

    fn same_alphabet(&self, other: &Dfa) -> Result<(), AutomataError> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch)
        }
    }

    /// Reachable part of the synchronous product, with acceptance given by
    /// `accept(self_accepts, other_accepts)`.
    pub fn product(
        &self,
        other: &Dfa,
        accept: impl Fn(bool, bool) -> bool,
    ) -> Result<Dfa, AutomataError> {
        self.same_alphabet(other)?;
        let k = self.alphabet.len();
        let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        ids.insert(pairs[0], 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for a in 0..k as Letter {
                let t = (self.step(p, a), other.step(q, a));
                let id = *ids.entry(t).or_insert_with(|| {
                    pairs.push(t);
                    pairs.len() - 1
                });
                delta.push(id);
            }
            i += 1;
        }
        let accepting = pairs
            .iter()
            .map(|&(p, q)| accept(self.accepting[p], other.accepting[q]))
            .collect();
        Ok(Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting,
            delta,
        })
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa, AutomataError> {
        self.product(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa, AutomataError> {
        self.product(other, |a, b| a || b)
    }

    /// `L(self) \ L(other)`.
    pub fn difference(&self, other: &Dfa) -> Result<Dfa, AutomataError> {
        self.product(other, |a, b| a && !b)
    }

    /// Shortlex-least accepted word, or `None` for the empty language.
    ///
    /// BFS in letter order visits states in shortlex order of their least
    /// access word, so the first accepting state dequeued gives the answer.
    pub fn shortest_accepted(&self) -> Option<Word> {
        let k = self.alphabet.len();
        let mut parent: Vec<Option<(StateId, Letter)>> = vec![None; self.state_count()];
        let mut seen = vec![false; self.state_count()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            if self.accepting[q] {
                let mut letters = Vec::new();
                let mut cur = q;
                while let Some((p, a)) = parent[cur] {
                    letters.push(a);
                    cur = p;
                }
                letters.reverse();
                return Some(Word::from_letters(letters));
            }
            for a in 0..k as Letter {
                let t = self.step(q, a);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_accepted().is_none()
    }

    /// Shortlex-least word of `L(self) \ L(other)`, if any.
    pub fn subset_witness(&self, other: &Dfa) -> Result<Option<Word>, AutomataError> {
        Ok(self.difference(other)?.shortest_accepted())
    }

    /// Shortlex-least word in the symmetric difference, if any.
    pub fn distinguishing_word(&self, other: &Dfa) -> Result<Option<Word>, AutomataError> {
        Ok(self.product(other, |a, b| a != b)?.shortest_accepted())
    }

    pub fn equivalent(&self, other: &Dfa) -> Result<bool, AutomataError> {
        Ok(self.distinguishing_word(other)?.is_none())
    }

    /// All accepted words of length `n`, shortlex-sorted.
    pub fn words_of_length(&self, n: usize) -> Vec<Word> {
        let k = self.alphabet.len();
        // live[d][q]: some word of length d leads from q to acceptance
        let mut live = vec![self.accepting.clone()];
        for d in 1..=n {
            let prev = &live[d - 1];
            let row = (0..self.state_count())
                .map(|q| (0..k as Letter).any(|a| prev[self.step(q, a)]))
                .collect();
            live.push(row);
        }
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.enumerate(self.initial, n, &live, &mut buf, &mut out);
        out
    }

    fn enumerate(
        &self,
        q: StateId,
        remaining: usize,
        live: &[Vec<bool>],
        buf: &mut Vec<Letter>,
        out: &mut Vec<Word>,
    ) {
        if !live[remaining][q] {
            return;
        }
        if remaining == 0 {
            out.push(Word::from_letters(buf.clone()));
            return;
        }
        for a in 0..self.alphabet.len() as Letter {
            buf.push(a);
            self.enumerate(self.step(q, a), remaining - 1, live, buf, out);
            buf.pop();
        }
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable_states(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for a in self.alphabet.letters() {
                let t = self.step(q, a);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// The minimal complete DFA for the same language (Moore refinement over
    /// the reachable part). Used for reporting only.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        let reach = self.reachable_states();
        let mut class: HashMap<StateId, usize> = reach
            .iter()
            .map(|&q| (q, usize::from(self.accepting[q])))
            .collect();
        let mut count = class.values().collect::<BTreeSet<_>>().len();
        loop {
            let mut sig_ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = HashMap::new();
            for &q in &reach {
                let mut sig = vec![class[&q]];
                sig.extend((0..k as Letter).map(|a| class[&self.step(q, a)]));
                let fresh = sig_ids.len();
                let id = *sig_ids.entry(sig).or_insert(fresh);
                next.insert(q, id);
            }
            let new_count = sig_ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // renumber classes in BFS order so the initial state is 0
        let mut renum: HashMap<usize, StateId> = HashMap::new();
        for &q in &reach {
            let n = renum.len();
            renum.entry(class[&q]).or_insert(n);
        }
        let n = renum.len();
        let mut accepting = vec![false; n];
        let mut delta = vec![0; n * k];
        for &q in &reach {
            let c = renum[&class[&q]];
            accepting[c] = self.accepting[q];
            for a in 0..k {
                delta[c * k + a] = renum[&class[&self.step(q, a as Letter)]];
            }
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting,
            delta,
        }
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut nfa = Nfa::new(self.alphabet.clone(), self.state_count());
        nfa.add_initial(self.initial);
        for q in self.accepting_states() {
            nfa.add_accepting(q);
        }
        for q in 0..self.state_count() {
            for a in self.alphabet.letters() {
                nfa.add_transition(q, a, self.step(q, a));
            }
        }
        nfa
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma() -> Alphabet {
        Alphabet::new(["o", "x"]).unwrap()
    }

    fn w(s: &str) -> Word {
        sigma().parse_word(s).unwrap()
    }

    // x(oo)*x
    fn s0() -> Dfa {
        Dfa::new(sigma(), 4, 0, [2], [(0, 1, 1), (1, 0, 3), (3, 0, 1), (1, 1, 2)]).unwrap()
    }

    #[test]
    fn sink_completion() {
        let d = s0();
        assert_eq!(d.state_count(), 5);
        assert!(d.contains(&w("xx")));
        assert!(!d.contains(&w("xox")));
        assert!(d.contains(&w("xoox")));
        assert!(!d.contains(&w("xxo")));
    }

    #[test]
    fn duplicate_transition_rejected() {
        let r = Dfa::new(sigma(), 1, 0, [], [(0, 0, 0), (0, 0, 0)]);
        assert!(matches!(r, Err(AutomataError::Nondeterministic { .. })));
    }

    #[test]
    fn malformed_word() {
        let bad = Word::from_letters(vec![0, 5]);
        assert!(matches!(
            s0().accepts(&bad),
            Err(AutomataError::MalformedWord { .. })
        ));
    }

    #[test]
    fn empty_word_follows_initial() {
        assert!(!s0().accepts(&Word::empty()).unwrap());
        assert!(Dfa::universal(sigma()).accepts(&Word::empty()).unwrap());
        assert!(Dfa::empty(sigma()).complement().contains(&Word::empty()));
    }

    #[test]
    fn from_words_is_exact() {
        let words = [w("xx"), w("o"), w("")];
        let d = Dfa::from_words(sigma(), &words).unwrap();
        for u in Word::all_up_to(2, 4) {
            assert_eq!(d.contains(&u), words.contains(&u), "{u:?}");
        }
    }

    #[test]
    fn minimize_keeps_language() {
        let d = s0().union(&Dfa::from_words(sigma(), &[w("xx")]).unwrap()).unwrap();
        let m = d.minimize();
        assert!(m.equivalent(&s0()).unwrap());
        assert_eq!(m.state_count(), 5);
    }

    #[test]
    fn alphabet_mismatch() {
        let other = Dfa::universal(Alphabet::new(["a"]).unwrap());
        assert!(matches!(
            s0().intersect(&other),
            Err(AutomataError::AlphabetMismatch)
        ));
    }
}
