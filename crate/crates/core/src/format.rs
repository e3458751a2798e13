//! Line-oriented text formats for automata (`.aut`) and transducers (`.trd`).
//!
//! ```text
//! # comment
//! alphabet o x
//! states 3
//! initial 0
//! accepting 2
//! trans 0 x 1
//! ```
//!
//! Transducer files use the same header lines; `initial` may list several
//! states and transitions read `trans <from> <in> <out> <to>`.

use std::fmt::Write as _;
use std::path::Path;

use crate::automata::{Alphabet, AutomataError, Dfa, Letter, StateId};
use crate::transducer::Transducer;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("line {line}: {source}")]
    Automata { line: usize, source: AutomataError },
    #[error(transparent)]
    Build(#[from] AutomataError),
}

struct Header {
    alphabet: Option<Alphabet>,
    states: Option<usize>,
    initial: Option<Vec<StateId>>,
    accepting: Vec<StateId>,
    // (line, fields after `trans`)
    trans: Vec<(usize, Vec<String>)>,
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn number(line: usize, s: &str) -> Result<usize, FormatError> {
    s.parse()
        .map_err(|_| syntax(line, format!("expected a number, found `{s}`")))
}

fn parse_header(text: &str) -> Result<Header, FormatError> {
    let mut h = Header {
        alphabet: None,
        states: None,
        initial: None,
        accepting: Vec::new(),
        trans: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        let Some(key) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        match key {
            "alphabet" => {
                if h.alphabet.is_some() {
                    return Err(syntax(line, "repeated `alphabet` line"));
                }
                let a = Alphabet::new(rest.iter().copied())
                    .map_err(|source| FormatError::Automata { line, source })?;
                h.alphabet = Some(a);
            }
            "states" => {
                if h.states.is_some() {
                    return Err(syntax(line, "repeated `states` line"));
                }
                let [n] = rest[..] else {
                    return Err(syntax(line, "`states` takes one number"));
                };
                h.states = Some(number(line, n)?);
            }
            "initial" => {
                if h.initial.is_some() {
                    return Err(syntax(line, "repeated `initial` line"));
                }
                let qs = rest
                    .iter()
                    .map(|s| number(line, s))
                    .collect::<Result<Vec<_>, _>>()?;
                h.initial = Some(qs);
            }
            "accepting" => {
                for s in rest {
                    h.accepting.push(number(line, s)?);
                }
            }
            "trans" => h
                .trans
                .push((line, rest.into_iter().map(String::from).collect())),
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
    }
    Ok(h)
}

fn symbol(alphabet: &Alphabet, line: usize, s: &str) -> Result<Letter, FormatError> {
    alphabet
        .letter(s)
        .map_err(|source| FormatError::Automata { line, source })
}

fn state(n: usize, line: usize, s: &str) -> Result<StateId, FormatError> {
    let q = number(line, s)?;
    if q >= n {
        return Err(FormatError::Automata {
            line,
            source: AutomataError::InvalidState { state: q, count: n },
        });
    }
    Ok(q)
}

pub fn parse_dfa(text: &str) -> Result<Dfa, FormatError> {
    let h = parse_header(text)?;
    let alphabet = h.alphabet.ok_or(FormatError::Missing("alphabet"))?;
    let n = h.states.ok_or(FormatError::Missing("states"))?;
    let initial = match h.initial.as_deref() {
        Some([q]) => *q,
        Some(_) => return Err(syntax(0, "a DFA has exactly one initial state")),
        None => return Err(FormatError::Missing("initial")),
    };
    let mut seen = std::collections::HashSet::new();
    let mut trans = Vec::new();
    for (line, f) in &h.trans {
        let [from, sym, to] = &f[..] else {
            return Err(syntax(*line, "expected `trans <from> <sym> <to>`"));
        };
        let t = (
            state(n, *line, from)?,
            symbol(&alphabet, *line, sym)?,
            state(n, *line, to)?,
        );
        if !seen.insert((t.0, t.1)) {
            return Err(FormatError::Automata {
                line: *line,
                source: AutomataError::Nondeterministic {
                    state: t.0,
                    symbol: sym.clone(),
                },
            });
        }
        trans.push(t);
    }
    Ok(Dfa::new(alphabet, n, initial, h.accepting, trans)?)
}

pub fn parse_transducer(text: &str) -> Result<Transducer, FormatError> {
    let h = parse_header(text)?;
    let alphabet = h.alphabet.ok_or(FormatError::Missing("alphabet"))?;
    let n = h.states.ok_or(FormatError::Missing("states"))?;
    let initial = h.initial.ok_or(FormatError::Missing("initial"))?;
    let mut trans = Vec::new();
    for (line, f) in &h.trans {
        let [from, a, b, to] = &f[..] else {
            return Err(syntax(*line, "expected `trans <from> <in> <out> <to>`"));
        };
        trans.push((
            state(n, *line, from)?,
            symbol(&alphabet, *line, a)?,
            symbol(&alphabet, *line, b)?,
            state(n, *line, to)?,
        ));
    }
    Ok(Transducer::new(alphabet, n, initial, h.accepting, trans)?)
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_dfa(path: &Path) -> Result<Dfa, FormatError> {
    parse_dfa(&read(path)?)
}

pub fn load_transducer(path: &Path) -> Result<Transducer, FormatError> {
    parse_transducer(&read(path)?)
}

/// Writes a DFA in `.aut` format, listing every transition.
pub fn write_dfa(dfa: &Dfa) -> String {
    let sigma = dfa.alphabet();
    let mut out = String::new();
    let _ = writeln!(out, "alphabet {}", sigma.symbols().join(" "));
    let _ = writeln!(out, "states {}", dfa.state_count());
    let _ = writeln!(out, "initial {}", dfa.initial());
    let acc: Vec<String> = dfa.accepting_states().map(|q| q.to_string()).collect();
    let _ = writeln!(out, "accepting {}", acc.join(" "));
    for q in 0..dfa.state_count() {
        for a in sigma.letters() {
            let _ = writeln!(out, "trans {q} {} {}", sigma.symbol(a), dfa.step(q, a));
        }
    }
    out
}

pub fn write_transducer(t: &Transducer) -> String {
    let sigma = t.alphabet();
    let mut out = String::new();
    let _ = writeln!(out, "alphabet {}", sigma.symbols().join(" "));
    let _ = writeln!(out, "states {}", t.state_count());
    let init: Vec<String> = t.initial_states().iter().map(|q| q.to_string()).collect();
    let _ = writeln!(out, "initial {}", init.join(" "));
    let acc: Vec<String> = t.accepting_states().map(|q| q.to_string()).collect();
    let _ = writeln!(out, "accepting {}", acc.join(" "));
    for &(q, a, b, r) in t.transitions() {
        let _ = writeln!(out, "trans {q} {} {} {r}", sigma.symbol(a), sigma.symbol(b));
    }
    out
}
