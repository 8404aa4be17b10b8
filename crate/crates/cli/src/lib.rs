//! Shared plumbing behind the `chromashape` command-line tool and its HTTP
//! service: configuration, data loading, request handling and the router.

pub mod api;
pub mod config;
pub mod data;
pub mod error;
pub mod service;

pub use config::Config;
pub use error::ApiError;
pub use service::Engine;
