//! Reference tables, file ingestion, seeded randomness and
//! calibration/reference splitting.

mod io;
mod seed;
mod split;
mod table;

pub use io::{load_observations, load_reference_table, write_reference_table, ColumnSchema, Delimiter};
pub(crate) use io::format_float;
pub use seed::SeedStream;
pub use split::{split_calibration, split_indices, SplitSpec};
pub use table::{Particle, ReferenceTable};
