//! Command-line front end for `caliper-match`: CSV input, caliper files
//! and the `match`, `min-caliper` and `simulate` commands.

pub mod caliper_file;
pub mod commands;
pub mod error;
pub mod input;

pub use caliper_file::{parse_caliper, read_caliper_file};
pub use commands::{cmd_match, cmd_min_caliper, cmd_simulate, Mode};
pub use error::{CliError, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_IO, EXIT_OK};
pub use input::InputTable;
