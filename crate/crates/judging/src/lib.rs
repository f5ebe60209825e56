//! Judging service for pooled documents.
//!
//! Assessors receive a shuffled worklist per topic and see only cleaned
//! documents: nothing they can reach tells them how a document entered the
//! pool, how deep it was found or what anyone else judged. Operators upload
//! pools, export judgments and run noise-document quality control.

pub mod assign;
pub mod clean;
pub mod config;
pub mod http;
pub mod qc;
pub mod service;
pub mod store;

pub use assign::{assign_pool, Assignment};
pub use clean::{clean_document, CleanDocument};
pub use config::ServiceConfig;
pub use qc::{noise_qc, QcReport};
pub use service::JudgingService;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("invalid request: {0}")]
    Invalid(String),

    #[error("missing or wrong access token")]
    Unauthorized,

    #[error("corrupt judging state: {0}")]
    Corrupt(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] trelkit_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
