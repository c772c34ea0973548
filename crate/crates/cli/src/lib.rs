//! Library surface of the analyzer binary: file ingestion and the report
//! schema, exposed so integration tests can parse emitted reports.

pub mod io;
pub mod report;
