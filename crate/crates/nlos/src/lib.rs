//! Steady-state non-line-of-sight imaging toolkit.
//!
//! Simulates third-bounce reflections of a scanned continuous light beam on
//! a diffuse wall (no time-resolved sensing), and inverts such measurements
//! for planar hidden scenes: plane geometry from specular feature tracks and
//! specular reflectance by regularized maximum likelihood. Also generates
//! synthetic training datasets from digit images with the fast
//! hemisphere-sampling renderer.

pub mod config;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod inverse;
pub mod io;
pub mod material;
pub mod metrics;
pub mod noise;
pub mod render;
pub mod rng;
pub mod scene;
pub mod stack;

pub use error::{Error, Result};
pub use geometry::{PlaneParams, VirtualSource, WallGeometry};
pub use material::{phong_brdf, PhongMaterial};
pub use noise::{apply_sensor_noise, NoiseParams};
pub use scene::{HiddenScene, PlanarObject, Scene, TriangleMesh};
pub use stack::ReflectionStack;
