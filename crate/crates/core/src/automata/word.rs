use std::cmp::Ordering;
use std::fmt;

/// Dense index of a letter inside an [`Alphabet`](super::Alphabet).
pub type Letter = u8;

/// A finite word, stored as letter indices.
///
/// Words are totally ordered by shortlex: shorter words first, then
/// lexicographically by letter index. Every "least word" choice in the crate
/// refers to this order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl Into<Vec<Letter>>) -> Self {
        Word(letters.into())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The first `i` letters (`w^i`); the whole word when `i >= len`.
    pub fn prefix(&self, i: usize) -> Word {
        Word(self.0[..i.min(self.0.len())].to_vec())
    }

    /// The word from position `i` on (`w[i:]`); empty when `i >= len`.
    pub fn suffix(&self, i: usize) -> Word {
        Word(self.0[i.min(self.0.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, a: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(a);
        Word(v)
    }

    /// All prefixes, from `ε` up to the word itself.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.0.len()).map(move |i| self.prefix(i))
    }

    /// Splits `pa` into `(p, a)`; `None` for the empty word.
    pub fn split_last(&self) -> Option<(Word, Letter)> {
        self.0
            .split_last()
            .map(|(a, p)| (Word(p.to_vec()), *a))
    }

    /// Every word of length `n` over `k` letters, in shortlex order.
    pub fn all_of_length(k: usize, n: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * k);
            for w in &out {
                for a in 0..k {
                    next.push(w.push(a as Letter));
                }
            }
            out = next;
        }
        out
    }

    /// Every word of length at most `n` over `k` letters, in shortlex order.
    pub fn all_up_to(k: usize, n: usize) -> Vec<Word> {
        (0..=n).flat_map(|l| Word::all_of_length(k, l)).collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortlex_order() {
        let a = Word::from_letters(vec![1]);
        let b = Word::from_letters(vec![0, 0]);
        let c = Word::from_letters(vec![0, 1]);
        assert!(Word::empty() < a);
        assert!(a < b);
        assert!(b < c);
    }

    #[test]
    fn prefix_and_suffix_clamp() {
        let w = Word::from_letters(vec![0, 1, 1]);
        assert_eq!(w.prefix(0), Word::empty());
        assert_eq!(w.prefix(2), Word::from_letters(vec![0, 1]));
        assert_eq!(w.prefix(9), w);
        assert_eq!(w.suffix(1), Word::from_letters(vec![1, 1]));
        assert_eq!(w.suffix(3), Word::empty());
        assert_eq!(w.suffix(7), Word::empty());
    }

    #[test]
    fn enumeration_is_sorted() {
        let all = Word::all_up_to(2, 3);
        assert_eq!(all.len(), 1 + 2 + 4 + 8);
        assert!(all.windows(2).all(|p| p[0] < p[1]));
    }
}
