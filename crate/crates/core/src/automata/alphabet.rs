use std::collections::HashMap;
use std::fmt;

use super::{AutomataError, Letter, Word};

/// A finite, ordered set of symbols. Letter `i` is the `i`-th listed symbol.
#[derive(Clone)]
pub struct Alphabet {
    letters: Vec<String>,
    index: HashMap<String, Letter>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AutomataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut letters = Vec::new();
        let mut index = HashMap::new();
        for s in symbols {
            let s: String = s.into();
            if s.is_empty() || s.chars().any(char::is_whitespace) || s.starts_with('#') {
                return Err(AutomataError::BadSymbol(s));
            }
            if index.contains_key(&s) {
                return Err(AutomataError::DuplicateSymbol(s));
            }
            if letters.len() > Letter::MAX as usize {
                return Err(AutomataError::AlphabetTooLarge);
            }
            index.insert(s.clone(), letters.len() as Letter);
            letters.push(s);
        }
        if letters.is_empty() {
            return Err(AutomataError::EmptyAlphabet);
        }
        Ok(Alphabet { letters, index })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.letters
    }

    pub fn symbol(&self, a: Letter) -> &str {
        &self.letters[a as usize]
    }

    pub fn letter(&self, symbol: &str) -> Result<Letter, AutomataError> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| AutomataError::UnknownSymbol(symbol.to_string()))
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.letters.len()).map(|a| a as Letter)
    }

    fn single_char(&self) -> bool {
        self.letters.iter().all(|s| s.chars().count() == 1)
    }

    /// Parses a word. With single-character symbols the text is read character
    /// by character (whitespace ignored); otherwise symbols are separated by
    /// whitespace. `""` and `"ε"` denote the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word, AutomataError> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Word::empty());
        }
        let letters = if self.single_char() {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| self.letter(c.encode_utf8(&mut [0; 4])))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            text.split_whitespace()
                .map(|s| self.letter(s))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Word::from_letters(letters))
    }

    /// Checks that every letter of `w` belongs to this alphabet.
    pub fn check_word(&self, w: &Word) -> Result<(), AutomataError> {
        match w.letters().iter().find(|&&a| a as usize >= self.len()) {
            Some(&a) => Err(AutomataError::MalformedWord {
                letter: a,
                size: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Renders a word; inverse of [`Alphabet::parse_word`]. The empty word
    /// renders as `ε`.
    pub fn render(&self, w: &Word) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.single_char() { "" } else { " " };
        w.letters()
            .iter()
            .map(|&a| self.symbol(a))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{:?}", self.letters)
    }
}
