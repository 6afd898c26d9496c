//! Brute-force surface-integral renderer.
//!
//! Direct quadrature of the third-bounce transport integral: the hidden
//! surface is tessellated into patches and every (pixel, patch) pair is
//! summed explicitly. Slow and unquestionably converged; the fast renderer
//! is validated against it.

use nalgebra::Vector3;
use ndarray::Array3;
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::VirtualSource;
use crate::material::phong_brdf_unchecked;
use crate::scene::{Scene, SurfacePatch};

use super::{deposit_direct_bounce, RenderSettings};

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleDiagnostics {
    /// Patches skipped because they (nearly) coincide with the source or a
    /// wall pixel.
    pub skipped_patches: usize,
    pub total_patches: usize,
}

/// Renders one indirect reflection map by explicit patch summation.
///
/// Occlusion inside the hidden scene is ignored; every patch contributes to
/// every pixel.
pub fn render_oracle(
    scene: &Scene,
    source: &VirtualSource,
    settings: &RenderSettings,
) -> Result<(Array3<f64>, OracleDiagnostics)> {
    let wall = &scene.wall;
    let (rows, cols) = (wall.rows(), wall.cols());
    let mut image = Array3::zeros((rows, cols, 3));
    let patches = scene.hidden.tessellate(settings.oracle_density)?;
    let eps = settings.intersection_epsilon;
    let l = source.position;

    // Source-side factors do not depend on the pixel; fold them per patch.
    struct Shaded {
        position: Vector3<f64>,
        normal: Vector3<f64>,
        material: crate::material::PhongMaterial,
        w_i: Vector3<f64>,
        /// power * cos_in * area / r_xl^2, per channel
        premul: Vector3<f64>,
    }
    let mut skipped = 0usize;
    let shaded: Vec<Shaded> = patches
        .iter()
        .filter_map(|p: &SurfacePatch| {
            let d = l - p.position;
            let r2 = d.norm_squared();
            if r2.sqrt() < eps {
                skipped += 1;
                return None;
            }
            let w_i = d / r2.sqrt();
            let cos_in = p.normal.dot(&w_i).max(0.0);
            if cos_in == 0.0 {
                // Legitimate zero contribution, not a degeneracy.
                return Some(Shaded {
                    position: p.position,
                    normal: p.normal,
                    material: p.material,
                    w_i,
                    premul: Vector3::zeros(),
                });
            }
            Some(Shaded {
                position: p.position,
                normal: p.normal,
                material: p.material,
                w_i,
                premul: source.power * (cos_in * p.area / r2),
            })
        })
        .collect();

    let skipped_pixel_side: usize = image
        .axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            let mut row_skipped = 0usize;
            for j in 0..cols {
                let w = wall.frac_to_point(i as f64, j as f64);
                let mut acc = Vector3::zeros();
                for p in &shaded {
                    let d = w - p.position;
                    let r2 = d.norm_squared();
                    if r2.sqrt() < eps {
                        row_skipped += 1;
                        continue;
                    }
                    if p.premul == Vector3::zeros() {
                        continue;
                    }
                    let w_o = d / r2.sqrt();
                    let rho = phong_brdf_unchecked(&p.w_i, &w_o, &p.normal, &p.material);
                    acc += rho.component_mul(&p.premul) / r2;
                }
                for c in 0..3 {
                    row[(j, c)] = acc[c];
                }
            }
            row_skipped
        })
        .sum();

    if settings.include_direct_bounce {
        deposit_direct_bounce(&mut image, wall, source);
    }

    Ok((
        image,
        OracleDiagnostics {
            skipped_patches: skipped + skipped_pixel_side,
            total_patches: patches.len(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PlaneParams, WallGeometry, DEFAULT_VOLUME_ORIGIN};
    use crate::material::PhongMaterial;
    use crate::noise::NoiseParams;
    use crate::scene::{AlbedoChart, HiddenScene, PlanarObject};

    fn empty_scene(rows: usize, cols: usize) -> Scene {
        Scene {
            wall: WallGeometry::standard(2.0, 2.0, rows, cols).unwrap(),
            sources: vec![],
            hidden: HiddenScene::Empty,
            noise: NoiseParams::paper_calibration(),
        }
    }

    /// One-texel Lambertian chart of the given physical size.
    fn single_patch_scene(center_z: f64, side: f64) -> Scene {
        let mut scene = empty_scene(64, 64);
        let plane = PlaneParams::new(
            0.0,
            0.0,
            center_z - DEFAULT_VOLUME_ORIGIN.z,
            DEFAULT_VOLUME_ORIGIN,
        );
        let chart = AlbedoChart::uniform(
            (side, side),
            (1, 1),
            &PhongMaterial::lambertian(nalgebra::Vector3::repeat(1.0)).unwrap(),
        )
        .unwrap();
        scene.hidden = HiddenScene::Plane(PlanarObject::new(plane, (0.0, 0.0), 0.0, chart).unwrap());
        scene
    }

    #[test]
    fn empty_scene_renders_black() {
        let scene = empty_scene(32, 32);
        let src = VirtualSource::white(nalgebra::Vector3::zeros(), 1.0, &scene.wall).unwrap();
        let (img, diag) = render_oracle(&scene, &src, &RenderSettings::default()).unwrap();
        assert!(img.iter().all(|v| *v == 0.0));
        assert_eq!(diag.total_patches, 0);
    }

    #[test]
    fn single_patch_matches_hand_evaluation() {
        // 1 cm^2 Lambertian patch at (0, 0, 0.5), source at the wall origin,
        // evaluated at w = (0.3, 0, 0):
        // (1/pi) * 1 * (1/0.34) * (1/0.25) * 1e-4 = 3.745e-4 per unit power.
        let scene = single_patch_scene(0.5, 0.01);
        let src = VirtualSource::white(nalgebra::Vector3::zeros(), 1.0, &scene.wall).unwrap();
        let settings = RenderSettings::default();
        let (img, diag) = render_oracle(&scene, &src, &settings).unwrap();
        assert_eq!(diag.skipped_patches, 0);

        let w = nalgebra::Vector3::new(0.3, 0.0, 0.0);
        let (fi, fj) = scene.wall.point_to_frac(&w);
        // Independent scalar evaluation of the transport summand.
        let x = nalgebra::Vector3::new(0.0, 0.0, 0.5);
        let r2_xl = (x - src.position).norm_squared();
        let wp = scene.wall.frac_to_point(fi.round(), fj.round());
        let r2_xw = (wp - x).norm_squared();
        let expect = std::f64::consts::FRAC_1_PI * (1.0 / r2_xw) * (1.0 / r2_xl) * 1e-4;
        let got = img[(fi.round() as usize, fj.round() as usize, 0)];
        assert!(
            ((got - expect) / expect).abs() < 1e-12,
            "got {got}, expect {expect}"
        );
        // Hand value from the analysis: ~3.745e-4 at exactly (0.3, 0, 0).
        assert!((expect - 3.745e-4).abs() / 3.745e-4 < 2e-2);
    }

    #[test]
    fn doubling_power_doubles_every_pixel() {
        let scene = single_patch_scene(0.4, 0.05);
        let s1 = VirtualSource::white(nalgebra::Vector3::new(0.2, 0.1, 0.0), 1.0, &scene.wall)
            .unwrap();
        let s2 = VirtualSource::white(nalgebra::Vector3::new(0.2, 0.1, 0.0), 2.0, &scene.wall)
            .unwrap();
        let settings = RenderSettings::default();
        let (a, _) = render_oracle(&scene, &s1, &settings).unwrap();
        let (b, _) = render_oracle(&scene, &s2, &settings).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            if *x > 0.0 {
                assert!(((y / x) - 2.0).abs() < 1e-12);
            } else {
                assert_eq!(*y, 0.0);
            }
        }
    }

    #[test]
    fn falloff_law_scales_inverse_fourth() {
        // Moving a small patch from depth d to 2d divides the contribution
        // at the wall point beneath it by ~16 (two squared falloffs).
        let d = 0.5;
        let scene_near = single_patch_scene(d, 0.004);
        let scene_far = single_patch_scene(2.0 * d, 0.004);
        let src =
            VirtualSource::white(nalgebra::Vector3::zeros(), 1.0, &scene_near.wall).unwrap();
        let settings = RenderSettings::default();
        let (near, _) = render_oracle(&scene_near, &src, &settings).unwrap();
        let (far, _) = render_oracle(&scene_far, &src, &settings).unwrap();
        let (fi, fj) = scene_near.wall.point_to_frac(&nalgebra::Vector3::zeros());
        let (i, j) = (fi.round() as usize, fj.round() as usize);
        let ratio = near[(i, j, 0)] / far[(i, j, 0)];
        assert!((ratio - 16.0).abs() / 16.0 < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn direct_bounce_lands_in_source_pixel() {
        let mut scene = empty_scene(32, 32);
        scene.sources.clear();
        let src =
            VirtualSource::white(nalgebra::Vector3::new(0.21, -0.4, 0.0), 3.0, &scene.wall)
                .unwrap();
        let settings = RenderSettings {
            include_direct_bounce: true,
            ..RenderSettings::default()
        };
        let (img, _) = render_oracle(&scene, &src, &settings).unwrap();
        let (i, j) = scene.wall.point_to_pixel(&src.position).unwrap();
        assert_eq!(img[(i, j, 0)], 3.0);
        let total: f64 = img.iter().sum();
        assert_eq!(total, 9.0);
    }
}
