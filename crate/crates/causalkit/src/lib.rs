//! File formats, rendering and paper-table reproduction on top of
//! [`causalkit_core`]. The `causalkit` binary is a thin layer over this crate.

pub mod csvdata;
pub mod dagfile;
pub mod render;
pub mod reproduce;
pub mod scenario_file;

pub use csvdata::{read_csv, write_csv, CsvError};
pub use dagfile::{parse_dag, to_dag_text, DagFileError};
pub use render::Format;
pub use reproduce::{reproduce_all, ReproTable, Settings, Target};
pub use scenario_file::{parse_scenario, ScenarioFileError};
