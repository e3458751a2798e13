use std::collections::HashMap;

use super::{Alphabet, Dfa, Letter, StateId};

/// A nondeterministic automaton without ε-moves.
#[derive(Clone, Debug)]
pub struct Nfa {
    alphabet: Alphabet,
    initial: Vec<bool>,
    accepting: Vec<bool>,
    // succ[q][a] = sorted, deduplicated successor list
    succ: Vec<Vec<Vec<StateId>>>,
}

impl Nfa {
    pub fn new(alphabet: Alphabet, state_count: usize) -> Self {
        let k = alphabet.len();
        Nfa {
            alphabet,
            initial: vec![false; state_count],
            accepting: vec![false; state_count],
            succ: vec![vec![Vec::new(); k]; state_count],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.initial.len()
    }

    pub fn add_state(&mut self) -> StateId {
        self.initial.push(false);
        self.accepting.push(false);
        self.succ.push(vec![Vec::new(); self.alphabet.len()]);
        self.state_count() - 1
    }

    pub fn add_initial(&mut self, q: StateId) {
        self.initial[q] = true;
    }

    pub fn add_accepting(&mut self, q: StateId) {
        self.accepting[q] = true;
    }

    pub fn add_transition(&mut self, from: StateId, a: Letter, to: StateId) {
        let list = &mut self.succ[from][a as usize];
        if let Err(pos) = list.binary_search(&to) {
            list.insert(pos, to);
        }
    }

    pub fn is_initial(&self, q: StateId) -> bool {
        self.initial[q]
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn successors(&self, q: StateId, a: Letter) -> &[StateId] {
        &self.succ[q][a as usize]
    }

    /// Subset construction restricted to reachable subsets. The empty subset,
    /// when reachable, becomes the rejecting sink.
    pub fn determinize(&self) -> Dfa {
        let k = self.alphabet.len();
        let start: Vec<StateId> = (0..self.state_count()).filter(|&q| self.initial[q]).collect();
        let mut ids: HashMap<Vec<StateId>, StateId> = HashMap::new();
        ids.insert(start.clone(), 0);
        let mut subsets = vec![start];
        let mut delta = Vec::new();
        let mut mark = vec![false; self.state_count()];
        let mut i = 0;
        while i < subsets.len() {
            for a in 0..k {
                let mut target = Vec::new();
                for &q in &subsets[i] {
                    for &t in &self.succ[q][a] {
                        if !mark[t] {
                            mark[t] = true;
                            target.push(t);
                        }
                    }
                }
                for &t in &target {
                    mark[t] = false;
                }
                target.sort_unstable();
                let id = match ids.get(&target) {
                    Some(&id) => id,
                    None => {
                        let id = subsets.len();
                        ids.insert(target.clone(), id);
                        subsets.push(target);
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accepting = subsets
            .iter()
            .map(|s| s.iter().any(|&q| self.accepting[q]))
            .collect();
        Dfa::from_table(self.alphabet.clone(), 0, accepting, delta)
            .expect("subset construction yields a complete table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Word;

    #[test]
    fn determinize_contains_a_letter_x() {
        // Σ* x Σ*
        let sigma = Alphabet::new(["o", "x"]).unwrap();
        let mut n = Nfa::new(sigma.clone(), 2);
        n.add_initial(0);
        n.add_accepting(1);
        n.add_transition(0, 0, 0);
        n.add_transition(0, 1, 0);
        n.add_transition(0, 1, 1);
        n.add_transition(1, 0, 1);
        n.add_transition(1, 1, 1);
        let d = n.determinize();
        for w in Word::all_up_to(2, 5) {
            assert_eq!(d.contains(&w), w.letters().contains(&1));
        }
    }

    #[test]
    fn no_initial_state_is_empty() {
        let sigma = Alphabet::new(["a"]).unwrap();
        let n = Nfa::new(sigma, 3);
        assert!(n.determinize().is_empty());
    }
}
