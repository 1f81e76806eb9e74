//! Relational schemas to partial MEBN theories.

pub mod bench;
pub mod config;
mod cursor;
pub mod database;
pub mod ingest;
pub mod instances;
pub mod mapper;
pub mod mebn;
pub mod naming;
pub mod normalize;
pub mod schema;
pub mod stats;
pub mod synth;

pub use cursor::Pos;
