//! Reflection stacks: the N indirect reflection maps produced by scanning
//! the beam over the wall, plus their on-disk ".nlss" container.
//!
//! A ".nlss" container is a directory holding `manifest.json` and one raw
//! little-endian float32 tensor per map in row-major (H, W, 3) order.
//! 16-bit PNG previews are optional; their fixed linear scale is recorded
//! in the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{VirtualSource, WallGeometry};
use crate::io;

#[derive(Debug, Clone)]
pub struct StackEntry {
    pub source: VirtualSource,
    pub image: Array3<f64>,
}

/// N indirect reflection maps over a shared wall grid.
#[derive(Debug, Clone)]
pub struct ReflectionStack {
    pub wall: WallGeometry,
    pub entries: Vec<StackEntry>,
    pub direct_bounce_included: bool,
    /// True once sensor noise has been applied; noisy maps may contain
    /// negative readings from the Gaussian term.
    pub noisy: bool,
    pub seed: Option<u64>,
}

impl ReflectionStack {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::contract("stack must contain at least one map"));
        }
        let shape = (self.wall.rows(), self.wall.cols(), 3);
        for (k, e) in self.entries.iter().enumerate() {
            if e.image.dim() != shape {
                return Err(Error::ShapeMismatch {
                    expected: format!("{shape:?}"),
                    got: format!("map {k}: {:?}", e.image.dim()),
                });
            }
            VirtualSource::new(e.source.position, e.source.power, &self.wall)?;
            if !self.noisy {
                if let Some(bad) = e.image.iter().find(|v| !(**v >= 0.0)) {
                    return Err(Error::contract(format!(
                        "pre-noise map {k} must be nonnegative, found {bad}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn images(&self) -> Vec<&Array3<f64>> {
        self.entries.iter().map(|e| &e.image).collect()
    }

    pub fn source_positions(&self) -> Vec<nalgebra::Vector3<f64>> {
        self.entries.iter().map(|e| e.source.position).collect()
    }

    /// Writes the stack as a ".nlss" container directory. With
    /// `with_png`, 16-bit previews are written next to the tensors and the
    /// shared linear scale (the stack maximum) is recorded in the manifest.
    pub fn write(&self, dir: &Path, with_png: bool) -> Result<()> {
        self.validate()?;
        fs::create_dir_all(dir)?;
        let png_scale = if with_png {
            let m = self
                .entries
                .iter()
                .flat_map(|e| e.image.iter())
                .fold(0.0f64, |a, v| a.max(*v));
            Some(if m > 0.0 { m } else { 1.0 })
        } else {
            None
        };
        let mut maps = Vec::with_capacity(self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            let data = format!("map_{k:04}.f32");
            io::write_f32_image(&dir.join(&data), &e.image)?;
            let png = if let Some(scale) = png_scale {
                let name = format!("map_{k:04}.png");
                io::write_png16(&dir.join(&name), &e.image, scale)?;
                Some(name)
            } else {
                None
            };
            maps.push(ManifestMap {
                source: e.source.clone(),
                data,
                png,
            });
        }
        let manifest = Manifest {
            format: "nlss".to_string(),
            version: 1,
            wall: self.wall.clone(),
            shape: [self.wall.rows(), self.wall.cols(), 3],
            direct_bounce_included: self.direct_bounce_included,
            noisy: self.noisy,
            seed: self.seed,
            png_scale,
            maps,
        };
        // Manifest last: it doubles as the completion marker.
        io::write_atomic(
            &dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?.as_bytes(),
        )?;
        Ok(())
    }

    /// Loads a ".nlss" container and re-checks the stack invariants.
    pub fn read(dir: &Path) -> Result<ReflectionStack> {
        let manifest_path = dir.join("manifest.json");
        let text = fs::read_to_string(&manifest_path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", manifest_path.display()),
            ))
        })?;
        let manifest = parse_manifest(&text)?;
        let [rows, cols, _] = manifest.shape;
        let mut entries = Vec::with_capacity(manifest.maps.len());
        for m in &manifest.maps {
            let file = sanitize_member(dir, &m.data)?;
            let image = io::read_f32_image(&file, rows, cols)?;
            entries.push(StackEntry {
                source: m.source.clone(),
                image,
            });
        }
        let stack = ReflectionStack {
            wall: manifest.wall,
            entries,
            direct_bounce_included: manifest.direct_bounce_included,
            noisy: manifest.noisy,
            seed: manifest.seed,
        };
        stack.validate()?;
        Ok(stack)
    }
}

/// Parses and sanity-checks a stack manifest document.
pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_str(text)?;
    if manifest.format != "nlss" {
        return Err(Error::format(0, "not an nlss manifest"));
    }
    if manifest.version != 1 {
        return Err(Error::format(
            0,
            format!("unsupported nlss version {}", manifest.version),
        ));
    }
    if manifest.shape[2] != 3 {
        return Err(Error::format(0, "nlss maps must have 3 channels"));
    }
    if manifest.shape[0] != manifest.wall.rows() || manifest.shape[1] != manifest.wall.cols() {
        return Err(Error::format(0, "manifest shape disagrees with wall grid"));
    }
    if manifest.maps.is_empty() {
        return Err(Error::format(0, "manifest lists no maps"));
    }
    Ok(manifest)
}

/// Rejects member names that escape the container directory.
fn sanitize_member(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = Path::new(name);
    if p.is_absolute()
        || p.components()
            .any(|c| !matches!(c, std::path::Component::Normal(_)))
    {
        return Err(Error::format(0, format!("illegal member path {name:?}")));
    }
    Ok(dir.join(p))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub wall: WallGeometry,
    pub shape: [usize; 3],
    pub direct_bounce_included: bool,
    pub noisy: bool,
    pub seed: Option<u64>,
    pub png_scale: Option<f64>,
    pub maps: Vec<ManifestMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestMap {
    pub source: VirtualSource,
    pub data: String,
    #[serde(default)]
    pub png: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn small_stack() -> ReflectionStack {
        let wall = WallGeometry::standard(2.0, 2.0, 8, 8).unwrap();
        let mut img = Array3::zeros((8, 8, 3));
        img[(2, 3, 1)] = 0.5;
        let source =
            VirtualSource::white(Vector3::new(0.25, -0.25, 0.0), 1.0, &wall).unwrap();
        ReflectionStack {
            wall,
            entries: vec![
                StackEntry {
                    source: source.clone(),
                    image: img.clone(),
                },
                StackEntry { source, image: img },
            ],
            direct_bounce_included: false,
            noisy: false,
            seed: Some(7),
        }
    }

    #[test]
    fn container_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.nlss");
        let stack = small_stack();
        stack.write(&path, true).unwrap();
        let back = ReflectionStack::read(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.seed, Some(7));
        assert!((back.entries[0].image[(2, 3, 1)] - 0.5).abs() < 1e-7);
        assert!(path.join("map_0000.png").exists());
    }

    #[test]
    fn negative_pixels_rejected_unless_noisy() {
        let mut stack = small_stack();
        stack.entries[0].image[(0, 0, 0)] = -0.01;
        assert!(stack.validate().is_err());
        stack.noisy = true;
        assert!(stack.validate().is_ok());
    }

    #[test]
    fn manifest_rejects_wrong_format_and_traversal() {
        let stack = small_stack();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.nlss");
        stack.write(&path, false).unwrap();
        let text = std::fs::read_to_string(path.join("manifest.json")).unwrap();
        let evil = text.replace("map_0000.f32", "../map_0000.f32");
        std::fs::write(path.join("manifest.json"), &evil).unwrap();
        assert!(ReflectionStack::read(&path).is_err());
        let wrong = text.replace("\"nlss\"", "\"ssln\"");
        std::fs::write(path.join("manifest.json"), &wrong).unwrap();
        assert!(ReflectionStack::read(&path).is_err());
    }
}
