//! Phong reflectance with energy-conserving normalization.
//!
//! The BRDF is a diffuse plus specular mix,
//! rho = alpha_d / pi + alpha_s * (e + 2) / (2 pi) * max(0, r . w_o)^e,
//! where r is the mirror of the incoming direction about the normal. The
//! 1/pi and (e+2)/(2 pi) constants make the albedos interpretable: a unit
//! albedo reflects at most the incident energy.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction vectors passed to the BRDF may deviate from unit length by at
/// most this much.
pub const DIRECTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhongMaterial {
    /// Diffuse albedo per channel, in [0, 1].
    pub diffuse: Vector3<f64>,
    /// Specular albedo per channel, in [0, 1].
    pub specular: Vector3<f64>,
    /// Shininess exponent, >= 0.
    pub exponent: f64,
}

impl PhongMaterial {
    pub fn new(diffuse: Vector3<f64>, specular: Vector3<f64>, exponent: f64) -> Result<Self> {
        if diffuse.min() < 0.0 || specular.min() < 0.0 {
            return Err(Error::contract("albedos must be nonnegative"));
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::contract("exponent must be finite and >= 0"));
        }
        Ok(PhongMaterial {
            diffuse,
            specular,
            exponent,
        })
    }

    pub fn lambertian(diffuse: Vector3<f64>) -> Result<Self> {
        PhongMaterial::new(diffuse, Vector3::zeros(), 0.0)
    }
}

/// Mirror of `w_i` about the normal: 2 (w_i . n) n - w_i.
#[inline]
pub fn mirror_direction(w_i: &Vector3<f64>, n: &Vector3<f64>) -> Vector3<f64> {
    n * (2.0 * w_i.dot(n)) - w_i
}

/// Phong BRDF value per channel.
///
/// `w_i` points from the surface toward the source, `w_o` toward the
/// receiver, both unit length and on the outside of the surface.
pub fn phong_brdf(
    w_i: &Vector3<f64>,
    w_o: &Vector3<f64>,
    n: &Vector3<f64>,
    m: &PhongMaterial,
) -> Result<Vector3<f64>> {
    for (name, d) in [("w_i", w_i), ("w_o", w_o), ("n", n)] {
        if (d.norm() - 1.0).abs() > DIRECTION_TOL {
            return Err(Error::contract(format!(
                "{name} must be unit length (|{name}| = {})",
                d.norm()
            )));
        }
    }
    Ok(phong_brdf_unchecked(w_i, w_o, n, m))
}

/// [`phong_brdf`] without the unit-length checks, for renderer inner loops
/// that construct normalized directions themselves.
#[inline]
pub fn phong_brdf_unchecked(
    w_i: &Vector3<f64>,
    w_o: &Vector3<f64>,
    n: &Vector3<f64>,
    m: &PhongMaterial,
) -> Vector3<f64> {
    let mut rho = m.diffuse * std::f64::consts::FRAC_1_PI;
    if m.specular != Vector3::zeros() {
        let r = mirror_direction(w_i, n);
        let c = r.dot(w_o).max(0.0);
        if c > 0.0 {
            let lobe = (m.exponent + 2.0) / (2.0 * std::f64::consts::PI) * c.powf(m.exponent);
            rho += m.specular * lobe;
        }
    }
    rho
}
