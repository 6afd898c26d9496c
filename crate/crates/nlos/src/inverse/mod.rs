//! Planar-scene inversion.

pub mod mirror;

pub use mirror::{reproject_to_plane, specular_mirror_point};
