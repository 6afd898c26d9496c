//! Fast third-bounce renderer.
//!
//! Re-parametrizes the transport surface integral by direction: for every
//! hemisphere sample the hidden scene is orthographically projected onto the
//! wall (one hit point per covered wall pixel), shaded with the transport
//! integrand, and accumulated with the quadrature weight times the
//! change-of-variables Jacobian r^2 / |cos gamma|. The Jacobian cancels the
//! receiver-side falloff term analytically, so the per-hit shading needs
//! only the source-side distance.
//!
//! Directions are processed in a fixed number of blocks; each block
//! accumulates into its own buffer sequentially and the buffers are reduced
//! in block order, so the output is bitwise identical for any thread count.

use nalgebra::{Matrix2, Vector2, Vector3};
use ndarray::Array3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{VirtualSource, WallGeometry};
use crate::material::{phong_brdf_unchecked, PhongMaterial};
use crate::scene::{HiddenScene, Scene, TriangleMesh};

use super::sampling::HemisphereSampling;
use super::{deposit_direct_bounce, RenderSettings};

/// Grazing-angle clamp on the Jacobian cosine; bounds the estimator
/// variance at silhouettes.
pub const JACOBIAN_COS_CLAMP: f64 = 1e-3;

/// Number of direction blocks; fixed so the reduction tree does not depend
/// on the thread count.
const DIRECTION_BLOCKS: usize = 32;

/// Renders one indirect reflection map with hemisphere-sampled direct
/// projections. Converges to [`render_oracle`](super::render_oracle) as the
/// sample count grows.
pub fn render_fast(
    scene: &Scene,
    source: &VirtualSource,
    sampling: &HemisphereSampling,
    settings: &RenderSettings,
) -> Result<Array3<f64>> {
    if sampling.is_empty() {
        return Err(Error::contract("hemisphere sampling must be nonempty"));
    }
    let wall = &scene.wall;
    let (rows, cols) = (wall.rows(), wall.cols());

    let n_dirs = sampling.len();
    let blocks = DIRECTION_BLOCKS.min(n_dirs);

    let partials: Vec<std::result::Result<Array3<f64>, (usize, usize, usize)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * n_dirs / blocks;
            let hi = (b + 1) * n_dirs / blocks;
            let mut acc = Array3::zeros((rows, cols, 3));
            let mut scratch = MeshScratch::new(rows * cols);
            for k in lo..hi {
                let dir = sampling.directions[k];
                let weight = sampling.weights[k];
                if let Err((i, j)) = accumulate_direction(
                    scene, source, &dir, weight, settings, &mut acc, &mut scratch,
                ) {
                    return Err((k, i, j));
                }
            }
            Ok(acc)
        })
        .collect();

    let mut image = Array3::zeros((rows, cols, 3));
    for p in partials {
        match p {
            Ok(acc) => image += &acc,
            Err((k, i, j)) => {
                return Err(Error::Render(format!(
                    "non-finite shading value at pixel ({i}, {j}), sample {k}"
                )))
            }
        }
    }

    if settings.include_direct_bounce {
        deposit_direct_bounce(&mut image, wall, source);
    }
    Ok(image)
}

/// Transport integrand for one projected hit, already multiplied by the
/// direction quadrature weight and the surface-to-solid-angle Jacobian.
#[inline]
fn shade_hit(
    position: &Vector3<f64>,
    normal: &Vector3<f64>,
    material: &PhongMaterial,
    source: &VirtualSource,
    dir: &Vector3<f64>,
    weight: f64,
    eps: f64,
) -> Option<Vector3<f64>> {
    let d_l = source.position - position;
    let r2_xl = d_l.norm_squared();
    let r_xl = r2_xl.sqrt();
    if r_xl < eps {
        return None;
    }
    let w_i = d_l / r_xl;
    let cos_in = normal.dot(&w_i);
    if cos_in <= 0.0 {
        return None;
    }
    let jac_cos = normal.dot(dir).abs().max(JACOBIAN_COS_CLAMP);
    let w_o = -dir;
    let rho = phong_brdf_unchecked(&w_i, &w_o, normal, material);
    let scale = weight * cos_in / (r2_xl * jac_cos);
    Some(rho.component_mul(&source.power) * scale)
}

/// Depth buffer and hit store reused across the directions of a block; only
/// the mesh path needs it.
struct MeshScratch {
    depth: Vec<f64>,
    hit: Vec<MeshHit>,
    touched: Vec<u32>,
}

#[derive(Clone, Copy)]
struct MeshHit {
    position: Vector3<f64>,
    normal: Vector3<f64>,
    face: u32,
}

impl MeshScratch {
    fn new(pixels: usize) -> Self {
        MeshScratch {
            depth: vec![f64::INFINITY; pixels],
            hit: vec![
                MeshHit {
                    position: Vector3::zeros(),
                    normal: Vector3::zeros(),
                    face: 0,
                };
                pixels
            ],
            touched: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &t in &self.touched {
            self.depth[t as usize] = f64::INFINITY;
        }
        self.touched.clear();
    }
}

/// Rasterizes the scene along one direction and accumulates shaded hits.
/// Returns the offending (row, col) on a non-finite shading value.
fn accumulate_direction(
    scene: &Scene,
    source: &VirtualSource,
    dir: &Vector3<f64>,
    weight: f64,
    settings: &RenderSettings,
    acc: &mut Array3<f64>,
    scratch: &mut MeshScratch,
) -> std::result::Result<(), (usize, usize)> {
    let wall = &scene.wall;
    let eps = settings.intersection_epsilon;
    match &scene.hidden {
        HiddenScene::Empty => Ok(()),
        HiddenScene::Plane(obj) => {
            // A planar chart projects injectively along any direction, so
            // hits can be shaded immediately.
            let (rows, cols) = obj.chart.resolution();
            let (cw, ch) = obj.chart.extent;
            let frame = &obj.frame;
            let project = |p: &Vector3<f64>| -> Vector3<f64> { p - dir * (p.z / dir.z) };
            let a_u = frame.e_u - dir * (frame.e_u.z / dir.z);
            let a_v = frame.e_v - dir * (frame.e_v.z / dir.z);
            let w0 = project(&frame.center);
            // 2x2 map from chart coordinates to in-wall-plane offsets.
            let m = Matrix2::new(
                a_u.dot(&wall.u),
                a_v.dot(&wall.u),
                a_u.dot(&wall.v),
                a_v.dot(&wall.v),
            );
            if m.determinant().abs() < 1e-14 {
                return Ok(()); // edge-on footprint, measure zero
            }
            let m_inv = m.try_inverse().expect("checked determinant");

            let mut lo_i = f64::INFINITY;
            let mut hi_i = f64::NEG_INFINITY;
            let mut lo_j = f64::INFINITY;
            let mut hi_j = f64::NEG_INFINITY;
            for (sa, sb) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
                let c = w0 + a_u * (sa * cw) + a_v * (sb * ch);
                let (fi, fj) = wall.point_to_frac(&c);
                lo_i = lo_i.min(fi);
                hi_i = hi_i.max(fi);
                lo_j = lo_j.min(fj);
                hi_j = hi_j.max(fj);
            }
            if hi_i < 0.0 || hi_j < 0.0 || lo_i > wall.rows() as f64 - 1.0
                || lo_j > wall.cols() as f64 - 1.0
            {
                return Ok(());
            }
            let i0 = lo_i.ceil().max(0.0) as usize;
            let i1 = hi_i.floor().min(wall.rows() as f64 - 1.0).max(0.0) as usize;
            let j0 = lo_j.ceil().max(0.0) as usize;
            let j1 = hi_j.floor().min(wall.cols() as f64 - 1.0).max(0.0) as usize;

            let n_shade = frame.shading_normal();
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let w = wall.frac_to_point(i as f64, j as f64);
                    let dw = w - w0;
                    let ab = m_inv * Vector2::new(dw.dot(&wall.u), dw.dot(&wall.v));
                    if ab.x.abs() > cw / 2.0 || ab.y.abs() > ch / 2.0 {
                        continue;
                    }
                    let x = frame.center + frame.e_u * ab.x + frame.e_v * ab.y;
                    if x.z / dir.z <= eps {
                        continue;
                    }
                    let (fi, fj) =
                        frame.chart_to_texel(ab.x, ab.y, obj.chart.extent, (rows, cols));
                    let ti = (fi.round().max(0.0) as usize).min(rows - 1);
                    let tj = (fj.round().max(0.0) as usize).min(cols - 1);
                    let material = obj.chart.material_at(ti, tj);
                    if let Some(c) =
                        shade_hit(&x, &n_shade, &material, source, dir, weight, eps)
                    {
                        if !(c.x.is_finite() && c.y.is_finite() && c.z.is_finite()) {
                            return Err((i, j));
                        }
                        acc[(i, j, 0)] += c.x;
                        acc[(i, j, 1)] += c.y;
                        acc[(i, j, 2)] += c.z;
                    }
                }
            }
            Ok(())
        }
        HiddenScene::Mesh(mesh) => {
            scratch.reset();
            for (fi, f) in mesh.faces.iter().enumerate() {
                rasterize_triangle(mesh, fi, f, dir, wall, eps, scratch);
            }
            let cols = wall.cols();
            for idx in 0..scratch.touched.len() {
                let px = scratch.touched[idx] as usize;
                let h = scratch.hit[px];
                let material = mesh.face_material(h.face as usize);
                if let Some(c) = shade_hit(
                    &h.position,
                    &h.normal,
                    &material,
                    source,
                    dir,
                    weight,
                    eps,
                ) {
                    let (i, j) = (px / cols, px % cols);
                    if !(c.x.is_finite() && c.y.is_finite() && c.z.is_finite()) {
                        return Err((i, j));
                    }
                    acc[(i, j, 0)] += c.x;
                    acc[(i, j, 1)] += c.y;
                    acc[(i, j, 2)] += c.z;
                }
            }
            Ok(())
        }
    }
}

/// Projects one mesh triangle along `dir`, depth-testing candidate hits
/// into the scratch buffers (nearest surface point per wall pixel wins).
fn rasterize_triangle(
    mesh: &TriangleMesh,
    face_index: usize,
    face: &[usize; 3],
    dir: &Vector3<f64>,
    wall: &WallGeometry,
    eps: f64,
    scratch: &mut MeshScratch,
) {
    let verts = [
        mesh.vertices[face[0]],
        mesh.vertices[face[1]],
        mesh.vertices[face[2]],
    ];
    let norms = [
        mesh.normals[face[0]],
        mesh.normals[face[1]],
        mesh.normals[face[2]],
    ];
    let project = |p: &Vector3<f64>| -> Vector3<f64> { p - dir * (p.z / dir.z) };

    let mut pw = [(0.0f64, 0.0f64); 3];
    let mut lo_i = f64::INFINITY;
    let mut hi_i = f64::NEG_INFINITY;
    let mut lo_j = f64::INFINITY;
    let mut hi_j = f64::NEG_INFINITY;
    for (k, v) in verts.iter().enumerate() {
        let q = project(v);
        let d = q - wall.origin;
        pw[k] = (d.dot(&wall.u), d.dot(&wall.v));
        let (fi, fj) = wall.point_to_frac(&q);
        lo_i = lo_i.min(fi);
        hi_i = hi_i.max(fi);
        lo_j = lo_j.min(fj);
        hi_j = hi_j.max(fj);
    }

    let (x0, y0) = pw[0];
    let (x1, y1) = pw[1];
    let (x2, y2) = pw[2];
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    if det.abs() < 1e-16 {
        return;
    }
    if hi_i < 0.0 || hi_j < 0.0 || lo_i > wall.rows() as f64 - 1.0
        || lo_j > wall.cols() as f64 - 1.0
    {
        return;
    }
    let i0 = lo_i.ceil().max(0.0) as usize;
    let i1 = hi_i.floor().min(wall.rows() as f64 - 1.0).max(0.0) as usize;
    let j0 = lo_j.ceil().max(0.0) as usize;
    let j1 = hi_j.floor().min(wall.cols() as f64 - 1.0).max(0.0) as usize;

    let cols = wall.cols();
    for i in i0..=i1 {
        for j in j0..=j1 {
            let w = wall.frac_to_point(i as f64, j as f64);
            let d = w - wall.origin;
            let (sx, sy) = (d.dot(&wall.u), d.dot(&wall.v));
            let b1 = ((sx - x0) * (y2 - y0) - (x2 - x0) * (sy - y0)) / det;
            let b2 = ((x1 - x0) * (sy - y0) - (sx - x0) * (y1 - y0)) / det;
            let b0 = 1.0 - b1 - b2;
            if b0 < 0.0 || b1 < 0.0 || b2 < 0.0 {
                continue;
            }
            let x = verts[0] * b0 + verts[1] * b1 + verts[2] * b2;
            let t = x.z / dir.z;
            if t <= eps {
                continue;
            }
            let px = i * cols + j;
            if t < scratch.depth[px] {
                if scratch.depth[px].is_infinite() {
                    scratch.touched.push(px as u32);
                }
                scratch.depth[px] = t;
                scratch.hit[px] = MeshHit {
                    position: x,
                    normal: (norms[0] * b0 + norms[1] * b1 + norms[2] * b2)
                        .try_normalize(1e-12)
                        .unwrap_or_else(|| {
                            (verts[1] - verts[0])
                                .cross(&(verts[2] - verts[0]))
                                .normalize()
                        }),
                    face: face_index as u32,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PlaneParams, DEFAULT_VOLUME_ORIGIN};
    use crate::material::PhongMaterial;
    use crate::metrics::rel_rmse;
    use crate::noise::NoiseParams;
    use crate::render::oracle::render_oracle;
    use crate::scene::{AlbedoChart, HiddenScene, MeshMaterials, PlanarObject};

    fn quad_scene(rows: usize, cols: usize, tilt: f64, exponent: f64) -> Scene {
        let wall = WallGeometry::standard(2.0, 2.0, rows, cols).unwrap();
        let plane = PlaneParams::new(0.4, tilt, 0.1, DEFAULT_VOLUME_ORIGIN);
        let chart = AlbedoChart::uniform(
            (0.3, 0.3),
            (64, 64),
            &PhongMaterial::new(
                nalgebra::Vector3::new(0.6, 0.4, 0.2),
                nalgebra::Vector3::new(0.5, 0.5, 0.8),
                exponent,
            )
            .unwrap(),
        )
        .unwrap();
        Scene {
            wall,
            sources: vec![],
            hidden: HiddenScene::Plane(
                PlanarObject::new(plane, (0.03, -0.02), 0.3, chart).unwrap(),
            ),
            noise: NoiseParams::paper_calibration(),
        }
    }

    #[test]
    fn empty_scene_is_black() {
        let scene = Scene {
            wall: WallGeometry::standard(2.0, 2.0, 32, 32).unwrap(),
            sources: vec![],
            hidden: HiddenScene::Empty,
            noise: NoiseParams::paper_calibration(),
        };
        let src = VirtualSource::white(nalgebra::Vector3::zeros(), 1.0, &scene.wall).unwrap();
        let sampling = HemisphereSampling::fibonacci(64).unwrap();
        let img = render_fast(&scene, &src, &sampling, &RenderSettings::default()).unwrap();
        assert!(img.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn deterministic_for_fixed_sampling() {
        let scene = quad_scene(64, 64, 0.3, 40.0);
        let src =
            VirtualSource::white(nalgebra::Vector3::new(0.2, 0.2, 0.0), 1.0, &scene.wall)
                .unwrap();
        let sampling = HemisphereSampling::fibonacci(500).unwrap();
        let a = render_fast(&scene, &src, &sampling, &RenderSettings::default()).unwrap();
        let b = render_fast(&scene, &src, &sampling, &RenderSettings::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn converges_to_oracle_on_quad_scene() {
        let scene = quad_scene(64, 64, 0.35, 30.0);
        let src =
            VirtualSource::white(nalgebra::Vector3::new(-0.3, 0.1, 0.0), 1.0, &scene.wall)
                .unwrap();
        let settings = RenderSettings::default();
        let (reference, _) = render_oracle(&scene, &src, &settings).unwrap();
        let mut last = f64::INFINITY;
        for s in [25usize, 100, 10_000] {
            let sampling = HemisphereSampling::fibonacci(s).unwrap();
            let img = render_fast(&scene, &src, &sampling, &settings).unwrap();
            let err = rel_rmse(&img, &reference);
            assert!(err < last, "error must decrease: {err} !< {last} at S={s}");
            last = err;
        }
        assert!(last <= 0.02, "relative RMSE at S=1e4: {last}");
    }

    #[test]
    fn linear_in_source_power() {
        let scene = quad_scene(48, 48, 0.2, 25.0);
        let s1 = VirtualSource::white(nalgebra::Vector3::new(0.1, 0.0, 0.0), 1.0, &scene.wall)
            .unwrap();
        let s3 = VirtualSource::white(nalgebra::Vector3::new(0.1, 0.0, 0.0), 3.0, &scene.wall)
            .unwrap();
        let sampling = HemisphereSampling::fibonacci(200).unwrap();
        let settings = RenderSettings::default();
        let a = render_fast(&scene, &s1, &sampling, &settings).unwrap();
        let b = render_fast(&scene, &s3, &sampling, &settings).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            if *x != 0.0 {
                assert!((y / x - 3.0).abs() < 1e-12);
            } else {
                assert_eq!(*y, 0.0);
            }
        }
    }

    #[test]
    fn mesh_quad_matches_planar_quad() {
        // The same geometric quad expressed as a chart and as two triangles
        // must render nearly identically.
        let rows = 48;
        let wall = WallGeometry::standard(2.0, 2.0, rows, rows).unwrap();
        let m = PhongMaterial::new(
            nalgebra::Vector3::repeat(0.7),
            nalgebra::Vector3::repeat(0.4),
            20.0,
        )
        .unwrap();
        let plane = PlaneParams::new(0.0, 0.0, 0.1, DEFAULT_VOLUME_ORIGIN);
        let chart = AlbedoChart::uniform((0.3, 0.3), (1, 1), &m).unwrap();
        let planar = Scene {
            wall: wall.clone(),
            sources: vec![],
            hidden: HiddenScene::Plane(
                PlanarObject::new(plane, (0.0, 0.0), 0.0, chart).unwrap(),
            ),
            noise: NoiseParams::paper_calibration(),
        };
        let z = 0.5;
        let n = -nalgebra::Vector3::z();
        let mesh = TriangleMesh::new(
            vec![
                nalgebra::Vector3::new(-0.15, -0.15, z),
                nalgebra::Vector3::new(0.15, -0.15, z),
                nalgebra::Vector3::new(0.15, 0.15, z),
                nalgebra::Vector3::new(-0.15, 0.15, z),
            ],
            vec![n; 4],
            vec![[0, 1, 2], [0, 2, 3]],
            MeshMaterials::Uniform(m),
        )
        .unwrap();
        let meshed = Scene {
            wall,
            sources: vec![],
            hidden: HiddenScene::Mesh(mesh),
            noise: NoiseParams::paper_calibration(),
        };
        let src =
            VirtualSource::white(nalgebra::Vector3::new(0.25, -0.1, 0.0), 1.0, &planar.wall)
                .unwrap();
        let sampling = HemisphereSampling::fibonacci(2000).unwrap();
        let settings = RenderSettings::default();
        let a = render_fast(&planar, &src, &sampling, &settings).unwrap();
        let b = render_fast(&meshed, &src, &sampling, &settings).unwrap();
        assert!(rel_rmse(&b, &a) < 5e-3, "rel rmse {}", rel_rmse(&b, &a));
    }
}
