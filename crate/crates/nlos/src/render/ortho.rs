//! Ground-truth latent view: orthographic projection of the hidden scene
//! along the wall normal from the wall center, with ambient-lit albedo and
//! per-pixel depth in meters. Background pixels have infinite depth
//! (encoded as 0 in files).

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use crate::error::Result;
use crate::scene::Scene;

pub struct OrthogonalView {
    /// Diffuse albedo of the front-most surface per pixel, (H, W, 3).
    pub image: Array3<f64>,
    /// Distance from the wall plane to the surface (meters); infinity for
    /// background.
    pub depth: Array2<f64>,
}

/// Renders the orthographic ground-truth view over the wall's own grid.
pub fn render_orthogonal_view(scene: &Scene) -> Result<OrthogonalView> {
    render_orthogonal_view_eps(scene, 1e-7)
}

pub fn render_orthogonal_view_eps(scene: &Scene, eps: f64) -> Result<OrthogonalView> {
    let wall = &scene.wall;
    let (rows, cols) = (wall.rows(), wall.cols());
    let normal = wall.normal();
    let mut image = Array3::zeros((rows, cols, 3));
    let mut depth = Array2::from_elem((rows, cols), f64::INFINITY);

    image
        .axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .zip(depth.axis_iter_mut(ndarray::Axis(0)).into_par_iter())
        .enumerate()
        .for_each(|(i, (mut img_row, mut depth_row))| {
            for j in 0..cols {
                let origin = wall.frac_to_point(i as f64, j as f64);
                if let Some(hit) = scene.hidden.intersect(&origin, &normal, eps) {
                    for c in 0..3 {
                        img_row[(j, c)] = hit.material.diffuse[c];
                    }
                    depth_row[j] = hit.t;
                }
            }
        });

    Ok(OrthogonalView { image, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PlaneParams, WallGeometry, DEFAULT_VOLUME_ORIGIN};
    use crate::material::PhongMaterial;
    use crate::noise::NoiseParams;
    use crate::scene::{AlbedoChart, HiddenScene, PlanarObject};
    use ndarray::Array3;

    #[test]
    fn empty_scene_black_with_background_depth() {
        let scene = Scene {
            wall: WallGeometry::standard(2.0, 2.0, 16, 16).unwrap(),
            sources: vec![],
            hidden: HiddenScene::Empty,
            noise: NoiseParams::paper_calibration(),
        };
        let view = render_orthogonal_view(&scene).unwrap();
        assert!(view.image.iter().all(|v| *v == 0.0));
        assert!(view.depth.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn wall_parallel_plane_has_constant_depth_and_exact_albedo() {
        // Chart texels aligned to the view grid: 2 m / 256 px = 7.8125 mm,
        // chart 28 texels * 7.8125 mm = 0.21875 m, centered.
        let rows = 256;
        let wall = WallGeometry::standard(2.0, 2.0, rows, rows).unwrap();
        let d = 0.55;
        let plane = PlaneParams::new(0.0, 0.0, d - DEFAULT_VOLUME_ORIGIN.z, DEFAULT_VOLUME_ORIGIN);
        let texels = 28usize;
        let side = 2.0 / rows as f64 * texels as f64;
        let mut diffuse = Array3::zeros((texels, texels, 3));
        for i in 0..texels {
            for j in 0..texels {
                let v = ((i * 31 + j * 7) % 17) as f64 / 16.0;
                for c in 0..3 {
                    diffuse[(i, j, c)] = v;
                }
            }
        }
        let chart = AlbedoChart::new(
            (side, side),
            diffuse.clone(),
            Array3::zeros((texels, texels, 3)),
            crate::scene::ExponentMap::Uniform(0.0),
        )
        .unwrap();
        let scene = Scene {
            wall,
            sources: vec![],
            hidden: HiddenScene::Plane(PlanarObject::new(plane, (0.0, 0.0), 0.0, chart).unwrap()),
            noise: NoiseParams::paper_calibration(),
        };
        let view = render_orthogonal_view(&scene).unwrap();

        // Footprint pixels carry depth d; everything else is background.
        let first = rows / 2 - texels / 2;
        let mut inside = 0usize;
        for i in 0..rows {
            for j in 0..rows {
                if view.depth[(i, j)].is_finite() {
                    assert!((view.depth[(i, j)] - d).abs() < 1e-12);
                    inside += 1;
                    let (ti, tj) = (i - first, j - first);
                    // Rows in the view run top-down like chart rows.
                    assert!(
                        (view.image[(i, j, 0)] - diffuse[(ti, tj, 0)]).abs() < 1e-9,
                        "albedo mismatch at ({i},{j})"
                    );
                }
            }
        }
        assert_eq!(inside, texels * texels);
    }

}
