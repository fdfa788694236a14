pub mod error;
pub mod linalg;
pub mod rng;
pub mod spin;
pub mod ensembles;
pub mod kicked_top;
pub mod coupled_tops;
pub mod tomography;
pub mod discord;
pub mod config;
pub mod cli;

pub use error::{Error, Result};
