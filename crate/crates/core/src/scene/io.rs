//! TOML scene files.
//!
//! ```toml
//! rng_seed = "42"
//!
//! [grid]
//! width = 500
//! height = 300
//! cell_size = 0.002
//! origin = { x = 0.001, y = 0.001 }
//!
//! [basket]
//! x = 1.3
//! y = 0.3
//!
//! [[garments]]
//! id = 0
//! thickness = 0.01
//! polygon = [[-0.05, -0.05], [0.05, -0.05], [0.05, 0.05], [-0.05, 0.05]]
//! discs = [[0.05, 0.0, 0.02]]
//! pose = { x = 0.3, y = 0.3, rotation = 0.0, scale = 1.0 }
//! ```
//!
//! Floats are written in shortest round-trip form, so a loaded scene equals
//! the saved one exactly.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use super::{Garment, Outline, Pose, Scene};
use crate::error::SceneError;
use crate::raster::{GridMeta, Point};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    /// Kept as a string: TOML integers stop at `i64::MAX`.
    rng_seed: String,
    grid: GridMeta,
    basket: Point,
    #[serde(default)]
    garments: Vec<GarmentRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GarmentRecord {
    id: u32,
    thickness: f64,
    polygon: Vec<[f64; 2]>,
    #[serde(default)]
    discs: Vec<[f64; 3]>,
    pose: Pose,
}

pub fn scene_to_string(scene: &Scene) -> String {
    let file = SceneFile {
        rng_seed: scene.rng_seed.to_string(),
        grid: scene.meta,
        basket: scene.basket,
        garments: scene
            .stack
            .iter()
            .map(|g| GarmentRecord {
                id: g.id,
                thickness: g.thickness,
                polygon: g.outline.polygon.iter().map(|p| [p.x, p.y]).collect(),
                discs: g.outline.discs.iter().map(|(c, r)| [c.x, c.y, *r]).collect(),
                pose: g.pose,
            })
            .collect(),
    };
    toml::to_string(&file).expect("scene fields are always representable")
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = toml::from_str(text).map_err(|e| SceneError::Format(e.to_string()))?;
    let seed = file
        .rng_seed
        .parse::<u64>()
        .map_err(|e| SceneError::Format(format!("rng_seed: {e}")))?;
    let g = file.grid;
    let meta = GridMeta::new(g.width, g.height, g.cell_size, g.origin)?;
    let mut stack = Vec::with_capacity(file.garments.len());
    for r in file.garments {
        let bad = |what: &str| SceneError::Format(format!("garment {}: {what}", r.id));
        if !(r.thickness > 0.0 && r.thickness.is_finite()) {
            return Err(bad("thickness must be positive"));
        }
        if r.polygon.len() < 3 {
            return Err(bad("polygon needs at least three vertices"));
        }
        let p = r.pose;
        if !(p.scale > 0.0 && [p.x, p.y, p.rotation, p.scale].iter().all(|v| v.is_finite())) {
            return Err(bad("invalid pose"));
        }
        if r.polygon.iter().flatten().chain(r.discs.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(bad("non-finite outline"));
        }
        let outline = Outline {
            polygon: r.polygon.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            discs: r.discs.iter().map(|&[x, y, rad]| (Point::new(x, y), rad)).collect(),
        };
        stack.push(Garment::new(r.id, Arc::new(outline), r.pose, r.thickness, meta));
    }
    Scene::new(meta, stack, file.basket, seed)
}

pub fn save_scene(scene: &Scene, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, scene_to_string(scene))
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|e| SceneError::Format(format!("{}: {e}", path.display())))?;
    parse_scene(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{GripperSpec, PredictorConfig};
    use crate::scene::{garment_library, generate_scene, LibrarySpec, SimConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_scene_round_trips() {
        let lib = garment_library(&LibrarySpec::default());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = SimConfig { compaction: 0.9, shuffle_compaction: 0.9, ..SimConfig::default() };
        let mut s = generate_scene(&lib, 10, &cfg, &GripperSpec::default(), &PredictorConfig::default(), &mut rng).unwrap();
        s.rng_seed = u64::MAX;
        let text = scene_to_string(&s);
        assert_eq!(parse_scene(&text).unwrap(), s);
    }

    #[test]
    fn errors_mention_line() {
        let err = parse_scene("rng_seed = \"1\"\n[grid]\nwidth = oops\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_bad_garments() {
        let base = "rng_seed = \"0\"\n[grid]\nwidth = 10\nheight = 10\ncell_size = 0.01\norigin = { x = 0.005, y = 0.005 }\n[basket]\nx = 1.0\ny = 0.0\n";
        assert!(parse_scene(base).unwrap().is_empty());
        let two = "[[garments]]\nid = 1\nthickness = 0.01\npolygon = [[0.0, 0.0], [0.01, 0.0], [0.0, 0.01]]\npose = { x = 0.05, y = 0.05, rotation = 0.0, scale = 1.0 }\n";
        let dup = format!("{base}{two}{two}");
        assert!(matches!(parse_scene(&dup), Err(SceneError::DuplicateId(1))));
        let thin = format!("{base}{}", two.replace("0.01\npolygon", "0.0\npolygon"));
        assert!(parse_scene(&thin).is_err());
    }
}
