pub mod cli;
pub mod error;
pub mod formats;
pub mod games;
pub mod matrix;
pub mod perturbation;
pub mod presentations;
pub mod sampling;
pub mod search;
pub mod suite;
