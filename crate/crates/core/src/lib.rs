pub mod bench;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod model;
pub mod query;
pub mod report;
pub mod script;
