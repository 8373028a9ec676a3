//! Scenario documents (JSON).
//!
//! Lengths are metres, orientations degrees (converted to radians on load),
//! powers dBm. See the README for the full schema.

use std::fs;
use std::path::Path;

use irsplan_core::geometry::{Building, Rect, Vec3};
use irsplan_core::scene::{auto_select_candidates, SceneSpec, SiteSpec};
use irsplan_core::{CostParams, CoverageParams, Scene, TracerConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionDoc {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BuildingDoc {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SiteDoc {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heights: Option<Vec<f64>>,
    #[serde(default)]
    pub orientations_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SitesDoc {
    Keyword(String),
    List(Vec<SiteDoc>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TracerDoc {
    pub reflection_coefficient: f64,
    pub cull_db: f64,
    pub direct_floor_dbm: f64,
    pub irs_gain_factor: f64,
}

impl Default for TracerDoc {
    fn default() -> Self {
        let t = TracerConfig::default();
        Self {
            reflection_coefficient: t.reflection_coefficient,
            cull_db: t.cull_threshold_db,
            direct_floor_dbm: t.direct_floor_dbm,
            irs_gain_factor: t.irs_departure_gain,
        }
    }
}

impl TracerDoc {
    pub fn config(&self) -> TracerConfig {
        TracerConfig {
            reflection_coefficient: self.reflection_coefficient,
            cull_threshold_db: self.cull_db,
            direct_floor_dbm: self.direct_floor_dbm,
            irs_departure_gain: self.irs_gain_factor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub region: RegionDoc,
    pub grid_side: f64,
    /// Optional explicit `[row, col]` cells (1-based).
    #[serde(default)]
    pub grids: Option<Vec<[u32; 2]>>,
    pub rx_height: f64,
    #[serde(default)]
    pub buildings: Vec<BuildingDoc>,
    pub bs: PointDoc,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub elements_per_tile_side: u32,
    pub max_tiles: u32,
    pub tx_power_dbm: f64,
    pub p_min_dbm: f64,
    pub eta0: f64,
    pub site_cost: f64,
    pub tile_cost: f64,
    pub heights: Vec<f64>,
    pub orientations_deg: Vec<f64>,
    pub sites: SitesDoc,
    #[serde(default)]
    pub tracer: TracerDoc,
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub scene: Scene,
    pub tracer: TracerConfig,
    pub cost: CostParams,
    pub coverage: CoverageParams,
    /// Hex SHA-256 of the scenario file bytes.
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn radians(deg: &[f64]) -> Vec<f64> {
    deg.iter().map(|d| d.to_radians()).collect()
}

impl ScenarioDoc {
    fn scene_spec(&self, sites: Vec<SiteSpec>) -> SceneSpec {
        let r = &self.region;
        SceneSpec {
            region: Rect::new(r.x_min, r.y_min, r.x_max, r.y_max),
            grid_side: self.grid_side,
            cells: self
                .grids
                .as_ref()
                .map(|g| g.iter().map(|&[row, col]| (row, col)).collect()),
            rx_height: self.rx_height,
            buildings: self
                .buildings
                .iter()
                .map(|b| Building::new(Rect::new(b.x_min, b.y_min, b.x_max, b.y_max), b.height))
                .collect(),
            bs_position: Vec3::new(self.bs.x, self.bs.y, self.bs.z),
            wavelength: self.wavelength,
            element_spacing: self.element_spacing,
            elements_per_tile_side: self.elements_per_tile_side,
            max_tiles: self.max_tiles,
            sites,
        }
    }
}

impl Scenario {
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Scenario> {
        let doc: ScenarioDoc =
            serde_json::from_slice(bytes).map_err(|e| CliError::schema(path, e.to_string()))?;
        let bad = |msg: String| CliError::schema(path, msg);
        let tracer = doc.tracer.config();
        let scene = match &doc.sites {
            SitesDoc::Keyword(k) if k == "auto" => {
                let bare = Scene::build(doc.scene_spec(Vec::new())).map_err(|e| bad(e.to_string()))?;
                let sites = auto_select_candidates(&bare, &tracer, &doc.heights, &radians(&doc.orientations_deg));
                bare.with_sites(sites).map_err(|e| bad(e.to_string()))?
            }
            SitesDoc::Keyword(k) => {
                return Err(bad(format!("`sites` must be \"auto\" or a list, got \"{k}\"")));
            }
            SitesDoc::List(list) => {
                let sites = list
                    .iter()
                    .map(|s| SiteSpec {
                        x: s.x,
                        y: s.y,
                        heights: s.heights.clone().unwrap_or_else(|| doc.heights.clone()),
                        orientations: radians(s.orientations_deg.as_deref().unwrap_or(&doc.orientations_deg)),
                    })
                    .collect();
                Scene::build(doc.scene_spec(sites)).map_err(|e| bad(e.to_string()))?
            }
        };
        if scene.sites().is_empty() {
            return Err(bad("scenario has no candidate sites".into()));
        }
        let cost = CostParams::new(doc.site_cost, doc.tile_cost).map_err(|e| bad(e.to_string()))?;
        let coverage = CoverageParams::from_dbm(doc.p_min_dbm, doc.eta0).map_err(|e| bad(e.to_string()))?;
        Ok(Scenario {
            sha256: sha256_hex(bytes),
            doc,
            scene,
            tracer,
            cost,
            coverage,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::NotFound {
                what: "scenario file".into(),
                path: path.to_path_buf(),
            },
            _ => CliError::io(path, e),
        })?;
        Self::from_bytes(&bytes, path)
    }
}
