//! File formats, CSV/SVG emitters and the command-line frontend for
//! `qnet-alloc-core`.

pub mod cli;
pub mod error;
pub mod instance_file;
pub mod plot;
pub mod report;

pub use cli::run;
pub use error::{CliError, ParseError};
pub use instance_file::{load_instance, parse_instance, InstanceFile, LoadedInstance};
