pub mod engine;
pub mod error;
pub mod exec;
pub mod expfam;
pub mod fragments;
pub mod linalg;
pub mod models;
pub mod special;

pub use error::{Result, VmpError};
