//! Wall and hidden-plane geometry.
//!
//! World frame convention: the visible wall is the z = 0 plane, its normal
//! +z points into the hidden volume, and all hidden geometry lives strictly
//! at z > 0. Wall images are indexed (row, col) with row 0 at the +v edge
//! (top) and col 0 at the -u edge (left); pixel (i, j) maps to the center of
//! its footprint on the wall.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for unit-length and orthogonality invariants.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance for point-on-plane membership checks (meters).
pub const ON_PLANE_TOL: f64 = 1e-9;

/// Rectangular diffuse wall patch with a pixel grid on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WallGeometry {
    /// Center of the wall rectangle (meters).
    pub origin: Vector3<f64>,
    /// In-plane unit axis along image columns.
    pub u: Vector3<f64>,
    /// In-plane unit axis along image rows (row 0 sits at +v).
    pub v: Vector3<f64>,
    /// (width, height) in meters along u and v.
    pub extent: (f64, f64),
    /// (rows, cols) of the wall image grid.
    pub resolution: (usize, usize),
}

impl WallGeometry {
    pub fn new(
        origin: Vector3<f64>,
        u: Vector3<f64>,
        v: Vector3<f64>,
        extent: (f64, f64),
        resolution: (usize, usize),
    ) -> Result<Self> {
        if (u.norm() - 1.0).abs() > UNIT_TOL || (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::contract("wall axes must be unit length"));
        }
        if u.dot(&v).abs() > UNIT_TOL {
            return Err(Error::contract("wall axes must be orthogonal"));
        }
        if extent.0 <= 0.0 || extent.1 <= 0.0 {
            return Err(Error::contract("wall extent must be positive"));
        }
        if resolution.0 < 1 || resolution.1 < 1 {
            return Err(Error::contract("wall resolution must be at least 1x1"));
        }
        Ok(WallGeometry {
            origin,
            u,
            v,
            extent,
            resolution,
        })
    }

    /// The conventional wall: z = 0 plane centered at the world origin,
    /// u = +x, v = +y, normal +z into the hidden volume.
    pub fn standard(width: f64, height: f64, rows: usize, cols: usize) -> Result<Self> {
        WallGeometry::new(
            Vector3::zeros(),
            Vector3::x(),
            Vector3::y(),
            (width, height),
            (rows, cols),
        )
    }

    pub fn rows(&self) -> usize {
        self.resolution.0
    }

    pub fn cols(&self) -> usize {
        self.resolution.1
    }

    /// Wall normal u x v; +z for the standard frame.
    pub fn normal(&self) -> Vector3<f64> {
        self.u.cross(&self.v)
    }

    /// Physical pixel pitch (du, dv) in meters.
    pub fn pixel_pitch(&self) -> (f64, f64) {
        (
            self.extent.0 / self.resolution.1 as f64,
            self.extent.1 / self.resolution.0 as f64,
        )
    }

    /// Center of the pixel footprint for index (i, j).
    pub fn pixel_to_point(&self, i: usize, j: usize) -> Result<Vector3<f64>> {
        let (rows, cols) = self.resolution;
        if i >= rows || j >= cols {
            return Err(Error::OutOfBounds {
                i: i as isize,
                j: j as isize,
                rows,
                cols,
            });
        }
        Ok(self.frac_to_point(i as f64, j as f64))
    }

    /// Continuous version of [`pixel_to_point`](Self::pixel_to_point):
    /// (i, j) may be fractional, (0.0, 0.0) is the center of pixel (0, 0).
    pub fn frac_to_point(&self, i: f64, j: f64) -> Vector3<f64> {
        let (rows, cols) = self.resolution;
        let s = ((j + 0.5) / cols as f64 - 0.5) * self.extent.0;
        let t = (0.5 - (i + 0.5) / rows as f64) * self.extent.1;
        self.origin + self.u * s + self.v * t
    }

    /// In-plane (fractional row, fractional col) coordinates of a wall point.
    /// Does not check that the point lies on the wall plane.
    pub fn point_to_frac(&self, p: &Vector3<f64>) -> (f64, f64) {
        let d = p - self.origin;
        let s = d.dot(&self.u);
        let t = d.dot(&self.v);
        let j = (s / self.extent.0 + 0.5) * self.cols() as f64 - 0.5;
        let i = (0.5 - t / self.extent.1) * self.rows() as f64 - 0.5;
        (i, j)
    }

    /// Pixel index containing a wall point; errors when the point falls
    /// outside the wall rectangle or off the wall plane.
    pub fn point_to_pixel(&self, p: &Vector3<f64>) -> Result<(usize, usize)> {
        if self.plane_distance(p).abs() > ON_PLANE_TOL {
            return Err(Error::contract("point does not lie on the wall plane"));
        }
        let (i, j) = self.point_to_frac(p);
        let (ii, jj) = (i.round(), j.round());
        if ii < -0.5 || jj < -0.5 || ii >= self.rows() as f64 - 0.5 + 1.0 || jj >= self.cols() as f64 - 0.5 + 1.0 {
            return Err(Error::OutOfBounds {
                i: ii as isize,
                j: jj as isize,
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let ii = (ii.max(0.0) as usize).min(self.rows() - 1);
        let jj = (jj.max(0.0) as usize).min(self.cols() - 1);
        Ok((ii, jj))
    }

    /// Signed distance from a point to the wall plane along the normal.
    pub fn plane_distance(&self, p: &Vector3<f64>) -> f64 {
        (p - self.origin).dot(&self.normal())
    }

    /// True when the in-plane coordinates of `p` fall inside the rectangle.
    pub fn contains_in_plane(&self, p: &Vector3<f64>) -> bool {
        let d = p - self.origin;
        let s = d.dot(&self.u);
        let t = d.dot(&self.v);
        s.abs() <= self.extent.0 / 2.0 && t.abs() <= self.extent.1 / 2.0
    }
}

/// Three-DOF hidden-plane parametrization: spherical normal angles plus a
/// z-axis offset of a reference point from the volume origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PlaneParams {
    pub theta: f64,
    pub phi: f64,
    /// Offset along +z from the volume origin to the plane point (meters).
    pub nu: f64,
    /// Volume origin; a fixed configuration constant, not an optimization
    /// variable.
    pub origin: Vector3<f64>,
}

/// Default volume origin for a 2 m x 2 m wall setup.
pub const DEFAULT_VOLUME_ORIGIN: Vector3<f64> = Vector3::new(0.0, 0.0, 0.4);

impl PlaneParams {
    pub fn new(theta: f64, phi: f64, nu: f64, origin: Vector3<f64>) -> Self {
        PlaneParams {
            theta,
            phi,
            nu,
            origin,
        }
    }

    /// Unit normal from the spherical angles. Unit length holds by
    /// construction for every (theta, phi).
    pub fn normal(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * sp, st * sp, cp)
    }

    /// Reference point on the plane: origin + nu * e_z.
    pub fn point(&self) -> Vector3<f64> {
        self.origin + Vector3::new(0.0, 0.0, self.nu)
    }

    /// Partial derivative of the normal w.r.t. theta.
    pub fn dnormal_dtheta(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let sp = self.phi.sin();
        Vector3::new(-st * sp, ct * sp, 0.0)
    }

    /// Partial derivative of the normal w.r.t. phi.
    pub fn dnormal_dphi(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * cp, st * cp, -sp)
    }

    /// Signed distance of a point to the plane along the normal.
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        (p - self.point()).dot(&self.normal())
    }

    /// Angle between this plane's normal and another's, in radians,
    /// insensitive to the n vs -n sign ambiguity.
    pub fn normal_angle_to(&self, other: &PlaneParams) -> f64 {
        let d = self.normal().dot(&other.normal()).abs().min(1.0);
        d.acos()
    }
}

/// A wall spot illuminated by the scanned beam, acting as a point source for
/// the hidden scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VirtualSource {
    /// Position on the wall (meters).
    pub position: Vector3<f64>,
    /// Per-channel radiant power in arbitrary linear units.
    pub power: Vector3<f64>,
}

impl VirtualSource {
    /// Validates wall-plane membership (within 1e-9 m) and nonnegative power.
    pub fn new(position: Vector3<f64>, power: Vector3<f64>, wall: &WallGeometry) -> Result<Self> {
        if wall.plane_distance(&position).abs() > ON_PLANE_TOL {
            return Err(Error::contract(
                "virtual source must lie on the wall plane",
            ));
        }
        if power.min() < 0.0 {
            return Err(Error::contract("source power must be nonnegative"));
        }
        Ok(VirtualSource { position, power })
    }

    /// White source of equal per-channel power.
    pub fn white(position: Vector3<f64>, power: f64, wall: &WallGeometry) -> Result<Self> {
        VirtualSource::new(position, Vector3::repeat(power), wall)
    }
}

/// Uniform R x C grid of white sources over a centered fraction of the wall.
///
/// `margin` is the fraction of the half-extent left free on each side; 0.0
/// spreads the grid corner-to-corner, 0.5 uses the central half.
pub fn source_grid(
    wall: &WallGeometry,
    grid_rows: usize,
    grid_cols: usize,
    margin: f64,
    power: f64,
) -> Result<Vec<VirtualSource>> {
    if grid_rows == 0 || grid_cols == 0 {
        return Err(Error::contract("source grid must be nonempty"));
    }
    let mut out = Vec::with_capacity(grid_rows * grid_cols);
    let (w, h) = wall.extent;
    let hw = w / 2.0 * (1.0 - margin);
    let hh = h / 2.0 * (1.0 - margin);
    for r in 0..grid_rows {
        for c in 0..grid_cols {
            let fy = if grid_rows == 1 {
                0.0
            } else {
                r as f64 / (grid_rows - 1) as f64 * 2.0 - 1.0
            };
            let fx = if grid_cols == 1 {
                0.0
            } else {
                c as f64 / (grid_cols - 1) as f64 * 2.0 - 1.0
            };
            let pos = wall.origin + wall.u * (fx * hw) + wall.v * (-fy * hh);
            out.push(VirtualSource::white(pos, power, wall)?);
        }
    }
    Ok(out)
}
