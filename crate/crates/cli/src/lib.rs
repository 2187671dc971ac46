//! File formats, run records, reporting and the command-line front end
//! around `bois-core`.

pub mod cli;
pub mod experiment;
pub mod family_file;
pub mod record;
pub mod report;
