//! Learning regular invariants and separators from membership and validity
//! queries, with an incremental SAT solver filling undetermined table cells.

pub mod automata;
pub mod format;
pub mod transducer;
pub mod sat;
pub mod table;
pub mod teachers;
pub mod encoding;
pub mod learner;
