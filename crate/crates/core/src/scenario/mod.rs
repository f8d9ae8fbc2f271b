//! Scenario files, the predefined catalog, and level generation.

pub mod catalog;
pub mod io;
pub mod levelgen;

pub use catalog::{catalog, catalog_entries, catalog_scenario, compose, lineup, CatalogError, CatalogKind};
pub use io::{load_and_validate, load_scenario, read_scenario_file, save_scenario, write_scenario_file, LoadError};
pub use levelgen::{mutate_level, mutate_level_in, sample_level, Category, LevelGenSpec, MutationOp, ParamRanges, Range};
