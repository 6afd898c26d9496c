//! Scene description: the wall, virtual sources, hidden geometry and its
//! Phong materials, and the sensor noise calibration.
//!
//! Hidden geometry is either a textured rectangular chart on a plane or a
//! triangle mesh, both strictly inside the z > 0 half-space. Albedo maps are
//! treated as piecewise constant per texel; both renderers sample them with
//! nearest-texel lookup so they integrate the identical radiance field.

use std::path::Path;

use nalgebra::Vector3;
use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PlaneParams, VirtualSource, WallGeometry, DEFAULT_VOLUME_ORIGIN};
use crate::io;
use crate::material::PhongMaterial;
use crate::noise::NoiseParams;

/// Oriented rectangle frame on a hidden plane: chart center plus in-plane
/// axes. Rows run along -e_v, columns along +e_u, like the wall grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartFrame {
    pub center: Vector3<f64>,
    pub e_u: Vector3<f64>,
    pub e_v: Vector3<f64>,
}

impl ChartFrame {
    /// Canonical in-plane basis for a plane, rotated by `rotation` about the
    /// normal, centered at `center` (which must lie on the plane).
    pub fn on_plane(plane: &PlaneParams, in_plane_offset: (f64, f64), rotation: f64) -> Self {
        let n = plane.normal();
        let (b_u, b_v) = plane_basis(&n);
        let (s, c) = rotation.sin_cos();
        let e_u = b_u * c + b_v * s;
        let e_v = b_v * c - b_u * s;
        let center = plane.point() + b_u * in_plane_offset.0 + b_v * in_plane_offset.1;
        ChartFrame { center, e_u, e_v }
    }

    /// Shading normal oriented to face the wall (negative z component).
    pub fn shading_normal(&self) -> Vector3<f64> {
        let n = self.e_u.cross(&self.e_v);
        if n.z > 0.0 {
            -n
        } else {
            n
        }
    }

    /// World position of fractional texel (i, j) for a chart of the given
    /// extent and resolution; (0.0, 0.0) is the center of texel (0, 0).
    pub fn texel_to_point(
        &self,
        i: f64,
        j: f64,
        extent: (f64, f64),
        resolution: (usize, usize),
    ) -> Vector3<f64> {
        let (rows, cols) = resolution;
        let a = ((j + 0.5) / cols as f64 - 0.5) * extent.0;
        let b = (0.5 - (i + 0.5) / rows as f64) * extent.1;
        self.center + self.e_u * a + self.e_v * b
    }

    /// In-plane chart coordinates (a along e_u, b along e_v) of a world
    /// point (ignores any out-of-plane component).
    pub fn point_to_chart(&self, p: &Vector3<f64>) -> (f64, f64) {
        let d = p - self.center;
        (d.dot(&self.e_u), d.dot(&self.e_v))
    }

    /// Fractional texel indices of in-plane coordinates.
    pub fn chart_to_texel(
        &self,
        a: f64,
        b: f64,
        extent: (f64, f64),
        resolution: (usize, usize),
    ) -> (f64, f64) {
        let (rows, cols) = resolution;
        let j = (a / extent.0 + 0.5) * cols as f64 - 0.5;
        let i = (0.5 - b / extent.1) * rows as f64 - 0.5;
        (i, j)
    }
}

/// Deterministic orthonormal basis spanning the plane orthogonal to `n`.
pub fn plane_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let b_u = (helper - n * helper.dot(n)).normalize();
    let b_v = n.cross(&b_u);
    (b_u, b_v)
}

/// Per-texel shininess exponent, uniform in the common case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ExponentMap {
    Uniform(f64),
    PerTexel(Array2<f64>),
}

impl ExponentMap {
    fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            ExponentMap::Uniform(e) => *e,
            ExponentMap::PerTexel(m) => m[(i, j)],
        }
    }
}

/// Textured Phong material chart: per-texel diffuse and specular albedo
/// maps sharing one resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlbedoChart {
    /// (width, height) of the chart rectangle in meters.
    pub extent: (f64, f64),
    /// Diffuse albedo, (rows, cols, 3).
    pub diffuse: Array3<f64>,
    /// Specular albedo, (rows, cols, 3).
    pub specular: Array3<f64>,
    pub exponent: ExponentMap,
}

impl AlbedoChart {
    pub fn new(
        extent: (f64, f64),
        diffuse: Array3<f64>,
        specular: Array3<f64>,
        exponent: ExponentMap,
    ) -> Result<Self> {
        if extent.0 <= 0.0 || extent.1 <= 0.0 {
            return Err(Error::contract("chart extent must be positive"));
        }
        if diffuse.dim() != specular.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", diffuse.dim()),
                got: format!("{:?}", specular.dim()),
            });
        }
        if diffuse.dim().2 != 3 || diffuse.dim().0 == 0 || diffuse.dim().1 == 0 {
            return Err(Error::contract("albedo maps must be (H, W, 3), H, W >= 1"));
        }
        if let ExponentMap::PerTexel(m) = &exponent {
            if m.dim() != (diffuse.dim().0, diffuse.dim().1) {
                return Err(Error::contract("exponent map resolution mismatch"));
            }
        }
        for v in diffuse.iter().chain(specular.iter()) {
            if !(*v >= 0.0) {
                return Err(Error::contract("albedos must be nonnegative"));
            }
        }
        Ok(AlbedoChart {
            extent,
            diffuse,
            specular,
            exponent,
        })
    }

    /// Uniform-material chart of the given resolution.
    pub fn uniform(
        extent: (f64, f64),
        resolution: (usize, usize),
        material: &PhongMaterial,
    ) -> Result<Self> {
        let mut diffuse = Array3::zeros((resolution.0, resolution.1, 3));
        let mut specular = Array3::zeros((resolution.0, resolution.1, 3));
        for i in 0..resolution.0 {
            for j in 0..resolution.1 {
                for c in 0..3 {
                    diffuse[(i, j, c)] = material.diffuse[c];
                    specular[(i, j, c)] = material.specular[c];
                }
            }
        }
        AlbedoChart::new(
            extent,
            diffuse,
            specular,
            ExponentMap::Uniform(material.exponent),
        )
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.diffuse.dim().0, self.diffuse.dim().1)
    }

    pub fn material_at(&self, i: usize, j: usize) -> PhongMaterial {
        PhongMaterial {
            diffuse: Vector3::new(
                self.diffuse[(i, j, 0)],
                self.diffuse[(i, j, 1)],
                self.diffuse[(i, j, 2)],
            ),
            specular: Vector3::new(
                self.specular[(i, j, 0)],
                self.specular[(i, j, 1)],
                self.specular[(i, j, 2)],
            ),
            exponent: self.exponent.at(i, j),
        }
    }
}

/// Rectangular textured quad lying on a parametrized plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarObject {
    pub plane: PlaneParams,
    pub frame: ChartFrame,
    pub chart: AlbedoChart,
}

impl PlanarObject {
    pub fn new(
        plane: PlaneParams,
        in_plane_offset: (f64, f64),
        rotation: f64,
        chart: AlbedoChart,
    ) -> Result<Self> {
        let frame = ChartFrame::on_plane(&plane, in_plane_offset, rotation);
        let obj = PlanarObject {
            plane,
            frame,
            chart,
        };
        obj.validate()?;
        Ok(obj)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.chart.extent;
        for (sa, sb) in [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)] {
            let corner = self.frame.center + self.frame.e_u * (sa * w) + self.frame.e_v * (sb * h);
            if corner.z <= 0.0 {
                return Err(Error::contract(
                    "planar chart must lie strictly in the hidden half-space z > 0",
                ));
            }
        }
        Ok(())
    }

    /// Nearest-texel material at in-plane coordinates, or None outside the
    /// chart rectangle.
    pub fn material_at_chart(&self, a: f64, b: f64) -> Option<PhongMaterial> {
        let (w, h) = self.chart.extent;
        if a.abs() > w / 2.0 || b.abs() > h / 2.0 {
            return None;
        }
        let (rows, cols) = self.chart.resolution();
        let (fi, fj) = self.frame.chart_to_texel(a, b, self.chart.extent, (rows, cols));
        let i = (fi.round().max(0.0) as usize).min(rows - 1);
        let j = (fj.round().max(0.0) as usize).min(cols - 1);
        Some(self.chart.material_at(i, j))
    }
}

/// Triangle mesh with per-vertex unit normals and per-face (or uniform)
/// Phong materials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub materials: MeshMaterials,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MeshMaterials {
    Uniform(PhongMaterial),
    PerFace(Vec<PhongMaterial>),
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        normals: Vec<Vector3<f64>>,
        faces: Vec<[usize; 3]>,
        materials: MeshMaterials,
    ) -> Result<Self> {
        if normals.len() != vertices.len() {
            return Err(Error::contract("one normal per vertex required"));
        }
        for n in &normals {
            if (n.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::contract("mesh normals must be unit length"));
            }
        }
        for v in &vertices {
            if v.z <= 0.0 {
                return Err(Error::contract(
                    "mesh must lie strictly in the hidden half-space z > 0",
                ));
            }
        }
        for f in &faces {
            if f.iter().any(|&k| k >= vertices.len()) {
                return Err(Error::contract("face index out of range"));
            }
        }
        if let MeshMaterials::PerFace(ms) = &materials {
            if ms.len() != faces.len() {
                return Err(Error::contract("one material per face required"));
            }
        }
        Ok(TriangleMesh {
            vertices,
            normals,
            faces,
            materials,
        })
    }

    pub fn face_material(&self, face: usize) -> PhongMaterial {
        match &self.materials {
            MeshMaterials::Uniform(m) => *m,
            MeshMaterials::PerFace(ms) => ms[face],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum HiddenScene {
    Empty,
    Plane(PlanarObject),
    Mesh(TriangleMesh),
}

/// One tessellated surface element for the brute-force renderer.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePatch {
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub area: f64,
    pub material: PhongMaterial,
}

/// Ray-surface hit for the projection renderers.
#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub material: PhongMaterial,
}

impl HiddenScene {
    /// Splits the hidden surface into patches: texel-aligned for charts,
    /// triangles subdivided until their area is at most (1/density)^2 for
    /// meshes.
    pub fn tessellate(&self, density: f64) -> Result<Vec<SurfacePatch>> {
        if density <= 0.0 {
            return Err(Error::contract("tessellation density must be positive"));
        }
        match self {
            HiddenScene::Empty => Ok(Vec::new()),
            HiddenScene::Plane(obj) => {
                let (rows, cols) = obj.chart.resolution();
                let (w, h) = obj.chart.extent;
                let area = (w / cols as f64) * (h / rows as f64);
                let normal = obj.frame.shading_normal();
                let mut out = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    for j in 0..cols {
                        out.push(SurfacePatch {
                            position: obj.frame.texel_to_point(
                                i as f64,
                                j as f64,
                                obj.chart.extent,
                                (rows, cols),
                            ),
                            normal,
                            area,
                            material: obj.chart.material_at(i, j),
                        });
                    }
                }
                Ok(out)
            }
            HiddenScene::Mesh(mesh) => {
                let max_area = (1.0 / density) * (1.0 / density);
                let mut out = Vec::new();
                for (fi, f) in mesh.faces.iter().enumerate() {
                    let m = mesh.face_material(fi);
                    let tri = [
                        (mesh.vertices[f[0]], mesh.normals[f[0]]),
                        (mesh.vertices[f[1]], mesh.normals[f[1]]),
                        (mesh.vertices[f[2]], mesh.normals[f[2]]),
                    ];
                    subdivide_triangle(&tri, max_area, m, &mut out);
                }
                Ok(out)
            }
        }
    }

    /// Nearest intersection of the ray origin + t * dir (t > eps) with the
    /// hidden surface.
    pub fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, eps: f64) -> Option<Hit> {
        match self {
            HiddenScene::Empty => None,
            HiddenScene::Plane(obj) => {
                let n = obj.frame.shading_normal();
                let denom = dir.dot(&n);
                if denom.abs() < 1e-14 {
                    return None;
                }
                let t = (obj.frame.center - origin).dot(&n) / denom;
                if t <= eps {
                    return None;
                }
                let p = origin + dir * t;
                let (a, b) = obj.frame.point_to_chart(&p);
                let material = obj.material_at_chart(a, b)?;
                Some(Hit {
                    t,
                    position: p,
                    normal: n,
                    material,
                })
            }
            HiddenScene::Mesh(mesh) => {
                let mut best: Option<Hit> = None;
                for (fi, f) in mesh.faces.iter().enumerate() {
                    let (a, b, c) = (
                        mesh.vertices[f[0]],
                        mesh.vertices[f[1]],
                        mesh.vertices[f[2]],
                    );
                    if let Some((t, u, v)) = ray_triangle(origin, dir, &a, &b, &c, eps) {
                        if best.map_or(true, |h| t < h.t) {
                            let w = 1.0 - u - v;
                            let normal = (mesh.normals[f[0]] * w
                                + mesh.normals[f[1]] * u
                                + mesh.normals[f[2]] * v)
                                .normalize();
                            best = Some(Hit {
                                t,
                                position: origin + dir * t,
                                normal,
                                material: mesh.face_material(fi),
                            });
                        }
                    }
                }
                best
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, HiddenScene::Empty)
    }
}

fn subdivide_triangle(
    tri: &[(Vector3<f64>, Vector3<f64>); 3],
    max_area: f64,
    material: PhongMaterial,
    out: &mut Vec<SurfacePatch>,
) {
    let [(a, na), (b, nb), (c, nc)] = *tri;
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    if area <= max_area || area < 1e-18 {
        out.push(SurfacePatch {
            position: (a + b + c) / 3.0,
            normal: (na + nb + nc)
                .try_normalize(1e-12)
                .unwrap_or_else(|| (b - a).cross(&(c - a)).normalize()),
            area,
            material,
        });
        return;
    }
    let mab = ((a + b) / 2.0, (na + nb).normalize());
    let mbc = ((b + c) / 2.0, (nb + nc).normalize());
    let mca = ((c + a) / 2.0, (nc + na).normalize());
    subdivide_triangle(&[(a, na), mab, mca], max_area, material, out);
    subdivide_triangle(&[mab, (b, nb), mbc], max_area, material, out);
    subdivide_triangle(&[mca, mbc, (c, nc)], max_area, material, out);
    subdivide_triangle(&[mab, mbc, mca], max_area, material, out);
}

/// Moeller-Trumbore ray/triangle intersection returning (t, u, v).
fn ray_triangle(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
    eps: f64,
) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t <= eps {
        return None;
    }
    Some((t, u, v))
}

/// Complete simulation input: wall, beam positions, hidden object, noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    pub wall: WallGeometry,
    pub sources: Vec<VirtualSource>,
    pub hidden: HiddenScene,
    pub noise: NoiseParams,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        for s in &self.sources {
            VirtualSource::new(s.position, s.power, &self.wall)?;
        }
        if let HiddenScene::Plane(obj) = &self.hidden {
            obj.validate()?;
        }
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Scene> {
        Self::from_json_with_base(json, None)
    }

    pub fn from_json_file(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_with_base(&text, path.parent())
    }

    /// Parses the scene document; `base` resolves relative texture paths.
    pub fn from_json_with_base(json: &str, base: Option<&Path>) -> Result<Scene> {
        let doc: dto::SceneDoc = serde_json::from_str(json)?;
        doc.build(base)
    }
}

/// Serde document types for the scene JSON format. Unknown keys are
/// rejected everywhere so typos fail loudly.
mod dto {
    use super::*;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct SceneDoc {
        pub wall: WallDoc,
        pub sources: Vec<SourceDoc>,
        pub hidden: HiddenDoc,
        #[serde(default)]
        pub materials: Option<MaterialsDoc>,
        pub noise: NoiseDoc,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct WallDoc {
        pub origin: [f64; 3],
        pub u: [f64; 3],
        pub v: [f64; 3],
        pub extent: [f64; 2],
        pub resolution: [usize; 2],
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct SourceDoc {
        pub position: [f64; 3],
        pub power: [f64; 3],
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct NoiseDoc {
        pub kappa: f64,
        pub sigma: f64,
        pub gain: f64,
    }

    #[derive(Deserialize)]
    #[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
    pub enum HiddenDoc {
        Empty,
        Plane {
            theta: f64,
            phi: f64,
            nu: f64,
            #[serde(default)]
            volume_origin: Option<[f64; 3]>,
            chart: ChartDoc,
        },
        Mesh {
            vertices: Vec<[f64; 3]>,
            normals: Vec<[f64; 3]>,
            faces: Vec<[usize; 3]>,
        },
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ChartDoc {
        pub extent: [f64; 2],
        /// Resolution used when the albedos are constants; texture files
        /// carry their own resolution.
        #[serde(default)]
        pub resolution: Option<[usize; 2]>,
        #[serde(default)]
        pub offset: Option<[f64; 2]>,
        #[serde(default)]
        pub rotation: Option<f64>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct MaterialsDoc {
        pub alpha_d: AlbedoSpec,
        pub alpha_s: AlbedoSpec,
        pub exponent: f64,
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub enum AlbedoSpec {
        Constant([f64; 3]),
        Texture { texture: String },
    }

    fn v3(a: [f64; 3]) -> Vector3<f64> {
        Vector3::new(a[0], a[1], a[2])
    }

    impl AlbedoSpec {
        fn load(
            &self,
            base: Option<&Path>,
            resolution: (usize, usize),
        ) -> Result<Array3<f64>> {
            match self {
                AlbedoSpec::Constant(c) => {
                    let mut m = Array3::zeros((resolution.0, resolution.1, 3));
                    for i in 0..resolution.0 {
                        for j in 0..resolution.1 {
                            for ch in 0..3 {
                                m[(i, j, ch)] = c[ch];
                            }
                        }
                    }
                    Ok(m)
                }
                AlbedoSpec::Texture { texture } => {
                    let path = match base {
                        Some(b) => b.join(texture),
                        None => Path::new(texture).to_path_buf(),
                    };
                    io::load_png_linear(&path)
                }
            }
        }
    }

    impl SceneDoc {
        pub fn build(self, base: Option<&Path>) -> Result<Scene> {
            let wall = WallGeometry::new(
                v3(self.wall.origin),
                v3(self.wall.u),
                v3(self.wall.v),
                (self.wall.extent[0], self.wall.extent[1]),
                (self.wall.resolution[0], self.wall.resolution[1]),
            )?;
            let sources = self
                .sources
                .iter()
                .map(|s| VirtualSource::new(v3(s.position), v3(s.power), &wall))
                .collect::<Result<Vec<_>>>()?;
            let noise = NoiseParams::new(self.noise.kappa, self.noise.sigma, self.noise.gain)?;
            let material = |m: &Option<MaterialsDoc>| -> Result<&MaterialsDoc> {
                m.as_ref().ok_or_else(|| {
                    Error::contract("hidden geometry requires a materials section")
                })
            };
            let hidden = match self.hidden {
                HiddenDoc::Empty => HiddenScene::Empty,
                HiddenDoc::Plane {
                    theta,
                    phi,
                    nu,
                    volume_origin,
                    chart,
                } => {
                    let mats = material(&self.materials)?;
                    let plane = PlaneParams::new(
                        theta,
                        phi,
                        nu,
                        volume_origin.map(v3).unwrap_or(DEFAULT_VOLUME_ORIGIN),
                    );
                    let res = chart.resolution.map(|r| (r[0], r[1]));
                    let diffuse = match res {
                        Some(r) => mats.alpha_d.load(base, r)?,
                        None => {
                            let d = mats.alpha_d.load(base, (1, 1))?;
                            if matches!(mats.alpha_d, AlbedoSpec::Constant(_)) {
                                return Err(Error::contract(
                                    "constant albedos require chart.resolution",
                                ));
                            }
                            d
                        }
                    };
                    let spec_res = (diffuse.dim().0, diffuse.dim().1);
                    let specular = mats.alpha_s.load(base, spec_res)?;
                    let albedo = AlbedoChart::new(
                        (chart.extent[0], chart.extent[1]),
                        diffuse,
                        specular,
                        ExponentMap::Uniform(mats.exponent),
                    )?;
                    let offset = chart.offset.map(|o| (o[0], o[1])).unwrap_or((0.0, 0.0));
                    HiddenScene::Plane(PlanarObject::new(
                        plane,
                        offset,
                        chart.rotation.unwrap_or(0.0),
                        albedo,
                    )?)
                }
                HiddenDoc::Mesh {
                    vertices,
                    normals,
                    faces,
                } => {
                    let mats = material(&self.materials)?;
                    let m = PhongMaterial::new(
                        match &mats.alpha_d {
                            AlbedoSpec::Constant(c) => v3(*c),
                            _ => {
                                return Err(Error::contract(
                                    "mesh materials must be constant albedos",
                                ))
                            }
                        },
                        match &mats.alpha_s {
                            AlbedoSpec::Constant(c) => v3(*c),
                            _ => {
                                return Err(Error::contract(
                                    "mesh materials must be constant albedos",
                                ))
                            }
                        },
                        mats.exponent,
                    )?;
                    HiddenScene::Mesh(TriangleMesh::new(
                        vertices.into_iter().map(v3).collect(),
                        normals.into_iter().map(v3).collect(),
                        faces,
                        MeshMaterials::Uniform(m),
                    )?)
                }
            };
            let scene = Scene {
                wall,
                sources,
                hidden,
                noise,
            };
            scene.validate()?;
            Ok(scene)
        }
    }
}
