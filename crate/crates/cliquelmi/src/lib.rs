//! File formats, benchmark harness and command-line front end for
//! `cliquelmi-core`.

pub mod bench;
pub mod io;
