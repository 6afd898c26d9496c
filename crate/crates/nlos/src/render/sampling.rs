//! Hemisphere quadrature for the fast renderer.

use nalgebra::Vector3;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// Deterministic stratified spherical-Fibonacci spiral.
    FibonacciStratified,
}

/// Unit directions over the upper hemisphere (positive z w.r.t. the wall
/// normal) with quadrature weights summing to the hemisphere solid angle
/// 2 pi.
#[derive(Debug, Clone)]
pub struct HemisphereSampling {
    pub scheme: SamplingScheme,
    pub directions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl HemisphereSampling {
    /// Equal-area spherical-Fibonacci points: z stratified uniformly in
    /// (0, 1), azimuth advanced by the golden angle. Every sample carries
    /// the weight 2 pi / count.
    pub fn fibonacci(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::contract("sample count must be at least 1"));
        }
        let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let mut directions = Vec::with_capacity(count);
        for k in 0..count {
            let z = 1.0 - (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let az = golden_angle * k as f64;
            directions.push(Vector3::new(r * az.cos(), r * az.sin(), z));
        }
        let w = 2.0 * std::f64::consts::PI / count as f64;
        Ok(HemisphereSampling {
            scheme: SamplingScheme::FibonacciStratified,
            weights: vec![w; count],
            directions,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}
