//! Synthetic training-set generation.

pub mod idx;
