//! File formats, configuration and command front end for the sensing
//! pipeline in `cirsense-core`.

pub mod commands;
pub mod conf;
pub mod error;
pub mod exports;
pub mod framefile;
pub mod model_file;
pub mod scenario_file;

pub use commands::{cmd_eval, cmd_pca, cmd_pipeline, cmd_simulate};
pub use conf::{Overrides, RunConfig};
pub use error::AppError;
pub use framefile::{read_frames, write_frames};
pub use scenario_file::ScenarioLibrary;
