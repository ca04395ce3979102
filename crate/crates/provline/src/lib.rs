//! Corpus files, the `provline` command line and the review service on top
//! of [`provline_core`].

pub mod cli;
pub mod io;
pub mod queue;
pub mod report;
pub mod server;
