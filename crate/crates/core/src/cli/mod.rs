//! Configuration, file formats, figure rendering and the pipeline commands
//! behind the `pdml` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod svg;

pub use commands::{cmd_design, cmd_eval, cmd_simulate, cmd_trace};
pub use config::{Overrides, RunConfig};
pub use io::{DatasetMeta, RegionFile};
