//! File formats, parallel sweeps and the `turing-one` command line on top of
//! [`turing_one_core`].
//!
//! - [`model_file`]: the JSON model description and the Gray-Scott presets.
//! - [`formats`]: verdict JSON, locus / sweep / trajectory / spectra CSV and
//!   the binary trajectory block.
//! - [`sweep`]: the `(γ, k)` region sweep spread over a rayon pool.
//! - [`manifest`]: run manifests with SHA-256 digests of inputs and outputs.
//! - [`cli`]: argument parsing and the subcommands.

pub mod cli;
mod error;
pub mod formats;
pub mod manifest;
pub mod model_file;
pub mod sweep;

pub use error::{CliError, ExitCode};
