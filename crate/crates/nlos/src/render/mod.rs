//! Forward simulation of steady-state third-bounce transport.
//!
//! Two renderers produce indirect reflection maps: a brute-force
//! surface-integral oracle ([`render_oracle`]) and the fast
//! hemisphere-sampling projection renderer ([`render_fast`]) that converges
//! to it. [`render_stack`] scans a source grid into a
//! [`ReflectionStack`](crate::stack::ReflectionStack), optionally applying
//! sensor noise, and [`render_orthogonal_view`] produces the ground-truth
//! latent view.

mod fast;
mod oracle;
mod ortho;
pub mod sampling;

pub use fast::{render_fast, JACOBIAN_COS_CLAMP};
pub use oracle::{render_oracle, OracleDiagnostics};
pub use ortho::{render_orthogonal_view, OrthogonalView};
pub use sampling::{HemisphereSampling, SamplingScheme};

use ndarray::Array3;

use crate::error::Result;
use crate::geometry::VirtualSource;
use crate::noise::apply_sensor_noise;
use crate::rng::derive_seed;
use crate::scene::Scene;
use crate::stack::{ReflectionStack, StackEntry};

#[derive(Debug, Clone)]
pub struct RenderSettings {
    /// Deposit the source's power into the pixel containing it.
    pub include_direct_bounce: bool,
    /// Clamp post-noise readings at zero.
    pub clamp_negative: bool,
    /// Minimum ray/patch distance before a contribution is skipped.
    pub intersection_epsilon: f64,
    /// Mesh tessellation density for the oracle, in patches per meter.
    pub oracle_density: f64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            include_direct_bounce: false,
            clamp_negative: false,
            intersection_epsilon: 1e-7,
            oracle_density: 200.0,
        }
    }
}

/// Which renderer a stack is produced with.
#[derive(Debug, Clone)]
pub enum RendererChoice {
    Fast(HemisphereSampling),
    Oracle,
}

impl RendererChoice {
    pub fn fast(samples: usize) -> Result<Self> {
        Ok(RendererChoice::Fast(HemisphereSampling::fibonacci(
            samples,
        )?))
    }
}

/// Adds the Dirac direct-bounce term: the source power lands in the single
/// pixel containing the beam position.
pub(crate) fn deposit_direct_bounce(
    image: &mut Array3<f64>,
    wall: &crate::geometry::WallGeometry,
    source: &VirtualSource,
) {
    if let Ok((i, j)) = wall.point_to_pixel(&source.position) {
        for c in 0..3 {
            image[(i, j, c)] += source.power[c];
        }
    }
}

/// Renders one map per source with identical settings, deriving a child
/// noise seed per map. Deterministic for a fixed (scene, grid, seed).
pub fn render_stack(
    scene: &Scene,
    grid: &[VirtualSource],
    renderer: &RendererChoice,
    with_noise: bool,
    seed: u64,
    settings: &RenderSettings,
) -> Result<ReflectionStack> {
    if grid.is_empty() {
        return Err(crate::error::Error::contract(
            "source grid must be nonempty",
        ));
    }
    let mut entries = Vec::with_capacity(grid.len());
    for (k, source) in grid.iter().enumerate() {
        let mut image = match renderer {
            RendererChoice::Fast(sampling) => render_fast(scene, source, sampling, settings)?,
            RendererChoice::Oracle => render_oracle(scene, source, settings)?.0,
        };
        if with_noise {
            image = apply_sensor_noise(&image, &scene.noise, derive_seed(seed, k as u64))?;
            if settings.clamp_negative {
                image.mapv_inplace(|v| v.max(0.0));
            }
        }
        entries.push(StackEntry {
            source: source.clone(),
            image,
        });
    }
    let stack = ReflectionStack {
        wall: scene.wall.clone(),
        entries,
        direct_bounce_included: settings.include_direct_bounce,
        noisy: with_noise,
        seed: Some(seed),
    };
    stack.validate()?;
    Ok(stack)
}
