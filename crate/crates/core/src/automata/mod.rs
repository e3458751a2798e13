//! Finite automata over small explicit alphabets.
//!
//! Words are letter-index sequences ordered by shortlex. DFAs are always
//! complete; partial inputs are completed with a rejecting sink at
//! construction time.

mod alphabet;
mod dfa;
mod nfa;
mod word;

pub use alphabet::Alphabet;
pub use dfa::{Dfa, StateId};
pub use nfa::Nfa;
pub use word::{Letter, Word};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet has more than 256 symbols")]
    AlphabetTooLarge,
    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(String),
    #[error("`{0}` is not a valid symbol")]
    BadSymbol(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("letter index {letter} out of range for an alphabet of size {size}")]
    MalformedWord { letter: Letter, size: usize },
    #[error("state {state} out of range (automaton has {count} states)")]
    InvalidState { state: StateId, count: usize },
    #[error("automaton must have at least one state")]
    NoStates,
    #[error("transition table does not cover every (state, letter) pair")]
    IncompleteTable,
    #[error("two transitions from state {state} on `{symbol}`")]
    Nondeterministic { state: StateId, symbol: String },
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
}
