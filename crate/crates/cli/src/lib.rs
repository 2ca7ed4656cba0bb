//! Command-line front end: revert series, run the smooth-case pipeline,
//! verify remainder decay, benchmark the reversion algorithms, and emit
//! JSON or CSV reports.
//!
//! Exit codes: 0 success, 2 not revertible or ill-conditioned jet, 3 parse,
//! input or IO error, 4 algorithm disagreement, 5 root-finding failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{
    cmd_bench, cmd_burmann, cmd_corpus, cmd_jet, cmd_revert, cmd_verify, run, split_window,
    BenchRow,
};
pub use config::{thread_count, Command, FunctionSource, RunConfig};
pub use error::CliError;
pub use report::{emit_report, Format, Report};

/// Caps the global rayon pool at `threads` workers (`None` = automatic).
pub fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // A pool built earlier in the process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}
