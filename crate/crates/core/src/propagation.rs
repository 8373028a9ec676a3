//! Channel knowledge generation.
//!
//! A small deterministic tracer (line of sight plus one specular bounce off a
//! building wall via the image method) feeds the large-scale tables the
//! optimizers consume: `β` per grid, `‖σ‖²` per site state and `‖ω‖²` per
//! site state and grid. Tables produced elsewhere (measurements, a full ray
//! tracer) can be loaded instead through the companion crate.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;

use crate::geometry::Vec3;
use crate::scene::{CandidateSite, Scene};
use crate::units::dbm_to_mw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracerConfig {
    /// Amplitude multiplier applied per wall bounce.
    pub reflection_coefficient: f64,
    /// Paths weaker than the strongest by more than this are dropped.
    pub cull_threshold_db: f64,
    /// `β` recorded for grids without any surviving BS path.
    pub direct_floor_dbm: f64,
    /// Power factor applied to every IRS-to-grid path (front half-space
    /// reflection gain of the panel versus an isotropic probe).
    pub irs_departure_gain: f64,
}

impl Default for TracerConfig {
    fn default() -> Self {
        Self {
            reflection_coefficient: 0.6,
            cull_threshold_db: 6.0,
            direct_floor_dbm: -90.0,
            irs_departure_gain: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropagationError {
    NonUnitNormal { norm: f64 },
}

impl fmt::Display for PropagationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropagationError::NonUnitNormal { norm } => {
                write!(f, "half-space normal must be unit length, got norm {norm}")
            }
        }
    }
}

/// One propagation path between two endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Field amplitude of the channel gain (transmit power not included).
    pub amplitude: f64,
    pub elevation_aoa: f64,
    pub azimuth_aoa: f64,
    pub elevation_aod: f64,
    pub azimuth_aod: f64,
    pub length: f64,
    pub bounce_count: u32,
}

impl Path {
    pub fn power(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// Unit vector from the receiver towards where the wave came from.
    pub fn arrival_direction(&self) -> Vec3 {
        Vec3::from_angles(self.elevation_aoa, self.azimuth_aoa)
    }

    /// Unit vector from the transmitter along the departing ray.
    pub fn departure_direction(&self) -> Vec3 {
        Vec3::from_angles(self.elevation_aod, self.azimuth_aod)
    }
}

/// Paths between `tx` and `rx`, strongest first. Empty means blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub tx: Vec3,
    pub rx: Vec3,
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    /// `Σ |a_l|²` over the paths.
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(Path::power).sum()
    }

    fn with_paths(&self, paths: Vec<Path>) -> PathSet {
        PathSet {
            tx: self.tx,
            rx: self.rx,
            paths,
        }
    }
}

fn principal_azimuth(az: f64) -> f64 {
    if az <= -PI {
        az + 2.0 * PI
    } else {
        az
    }
}

fn make_path(amplitude: f64, arrival: Vec3, departure: Vec3, length: f64, bounces: u32) -> Path {
    let (el_a, az_a) = arrival.to_angles();
    let (el_d, az_d) = departure.to_angles();
    Path {
        amplitude,
        elevation_aoa: el_a,
        azimuth_aoa: principal_azimuth(az_a),
        elevation_aod: el_d,
        azimuth_aod: principal_azimuth(az_d),
        length,
        bounce_count: bounces,
    }
}

fn path_order(a: &Path, b: &Path) -> Ordering {
    b.amplitude
        .total_cmp(&a.amplitude)
        .then(a.bounce_count.cmp(&b.bounce_count))
        .then(a.length.total_cmp(&b.length))
        .then(a.azimuth_aoa.total_cmp(&b.azimuth_aoa))
        .then(a.elevation_aoa.total_cmp(&b.elevation_aoa))
        .then(a.azimuth_aod.total_cmp(&b.azimuth_aod))
        .then(a.elevation_aod.total_cmp(&b.elevation_aod))
}

fn segment_clear(scene: &Scene, a: Vec3, b: Vec3) -> bool {
    scene.buildings().iter().all(|bl| !bl.blocks_segment(a, b))
}

/// Traces the LoS path and every single-bounce wall reflection between `tx`
/// and `rx`.
pub fn trace_paths(tx: Vec3, rx: Vec3, scene: &Scene, cfg: &TracerConfig) -> PathSet {
    let mut paths = Vec::new();
    if tx == rx {
        return PathSet { tx, rx, paths };
    }
    let lambda = scene.wavelength();
    let free_space = |len: f64| lambda / (4.0 * PI * len);

    if segment_clear(scene, tx, rx) {
        let len = tx.distance(rx);
        paths.push(make_path(free_space(len), tx - rx, rx - tx, len, 0));
    }

    for building in scene.buildings() {
        for wall in building.walls() {
            if !(wall.exterior_distance(tx) > 0.0 && wall.exterior_distance(rx) > 0.0) {
                continue;
            }
            let image = wall.mirror(tx);
            let Some(hit) = wall.hit_point(rx, image) else {
                continue;
            };
            if !segment_clear(scene, tx, hit) || !segment_clear(scene, hit, rx) {
                continue;
            }
            let len = image.distance(rx);
            let amp = cfg.reflection_coefficient * free_space(len);
            if amp > 0.0 {
                paths.push(make_path(amp, hit - rx, hit - tx, len, 1));
            }
        }
    }
    paths.sort_by(path_order);
    PathSet { tx, rx, paths }
}

/// Which side of the IRS a path set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Paths arriving at the IRS.
    Incident,
    /// Paths leaving the IRS.
    Departing,
}

/// Keeps only the paths on the front side of a panel with unit `normal`.
/// Paths exactly in the panel plane are dropped.
pub fn half_space_filter(
    paths: &PathSet,
    normal: Vec3,
    direction: Direction,
) -> Result<PathSet, PropagationError> {
    let norm = normal.norm();
    if libm::fabs(norm - 1.0) > 1e-9 {
        return Err(PropagationError::NonUnitNormal { norm });
    }
    let kept = paths
        .paths
        .iter()
        .filter(|p| {
            let d = match direction {
                // The wave travels along -arrival; it must hit the front face,
                // i.e. travel against the normal.
                Direction::Incident => p.arrival_direction(),
                Direction::Departing => p.departure_direction(),
            };
            d.dot(normal) > 0.0
        })
        .copied()
        .collect();
    Ok(paths.with_paths(kept))
}

/// Drops every path whose power is more than `threshold_db` below the
/// strongest one.
pub fn cull_paths(paths: &PathSet, threshold_db: f64) -> PathSet {
    let max = paths.paths.iter().map(Path::power).fold(0.0f64, f64::max);
    if max == 0.0 {
        return paths.with_paths(Vec::new());
    }
    let floor = max * libm::pow(10.0, -threshold_db / 10.0);
    paths.with_paths(
        paths
            .paths
            .iter()
            .filter(|p| p.power() >= floor)
            .copied()
            .collect(),
    )
}

/// Received power (mW) of a direct link and its dominant path count.
/// A zero path count marks a floor value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectEntry {
    pub power_mw: f64,
    pub paths: u32,
}

/// A power (mW) or dimensionless gain plus its path count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEntry {
    pub value: f64,
    pub paths: u32,
}

/// `(site_id, height_index, orient_index)`, indices 1-based.
pub type StateKey = (u32, usize, usize);
/// `(site_id, height_index, orient_index, grid_id)`.
pub type LinkKey = (u32, usize, usize, u32);

#[derive(Debug, Clone, PartialEq)]
pub enum KnowledgeError {
    NegativePower { table: &'static str },
    ZeroPathsWithPower { table: &'static str },
    NonFinite { table: &'static str },
}

impl fmt::Display for KnowledgeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnowledgeError::NegativePower { table } => write!(f, "{table}: negative power"),
            KnowledgeError::ZeroPathsWithPower { table } => {
                write!(f, "{table}: zero path count with nonzero power")
            }
            KnowledgeError::NonFinite { table } => write!(f, "{table}: non-finite value"),
        }
    }
}

/// Large-scale channel knowledge: the only channel input of the optimizers.
///
/// `direct` and `irs_incident` hold received powers in milliwatts (transmit
/// power included); `irs_departing` holds dimensionless power gains. Absent
/// IRS entries mean zero gain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelKnowledge {
    pub direct: BTreeMap<u32, DirectEntry>,
    pub irs_incident: BTreeMap<StateKey, LinkEntry>,
    pub irs_departing: BTreeMap<LinkKey, LinkEntry>,
}

impl ChannelKnowledge {
    pub fn validate(&self) -> Result<(), KnowledgeError> {
        for e in self.direct.values() {
            check_entry("direct", e.power_mw, e.paths, true)?;
        }
        for e in self.irs_incident.values() {
            check_entry("bs_irs", e.value, e.paths, false)?;
        }
        for e in self.irs_departing.values() {
            check_entry("irs_grid", e.value, e.paths, false)?;
        }
        Ok(())
    }

    /// `β₀ₙ` in mW, zero when the grid is unknown.
    pub fn beta(&self, grid: u32) -> f64 {
        self.direct.get(&grid).map_or(0.0, |e| e.power_mw)
    }

    /// `κ₀ᵢₙ(sᵢ)` for a site state and grid (zero when either link is absent).
    pub fn kappa(&self, site: u32, j: usize, k: usize, grid: u32) -> f64 {
        let (Some(inc), Some(dep)) = (
            self.irs_incident.get(&(site, j, k)),
            self.irs_departing.get(&(site, j, k, grid)),
        ) else {
            return 0.0;
        };
        crate::channel::kappa((inc.value, inc.paths), (dep.value, dep.paths)).unwrap_or(0.0)
    }
}

fn check_entry(table: &'static str, v: f64, l: u32, zero_paths_ok: bool) -> Result<(), KnowledgeError> {
    if !v.is_finite() {
        return Err(KnowledgeError::NonFinite { table });
    }
    if v < 0.0 {
        return Err(KnowledgeError::NegativePower { table });
    }
    if v > 0.0 && l == 0 && !zero_paths_ok {
        return Err(KnowledgeError::ZeroPathsWithPower { table });
    }
    Ok(())
}

/// Direct BS-to-grid entries for every grid.
pub fn direct_table(scene: &Scene, cfg: &TracerConfig, tx_power_dbm: f64) -> BTreeMap<u32, DirectEntry> {
    let tx_mw = dbm_to_mw(tx_power_dbm);
    let floor = dbm_to_mw(cfg.direct_floor_dbm);
    scene
        .grids()
        .iter()
        .map(|g| {
            let traced = trace_paths(scene.bs_position(), g.center, scene, cfg);
            let culled = cull_paths(&traced, cfg.cull_threshold_db);
            let entry = if culled.is_empty() {
                DirectEntry {
                    power_mw: floor,
                    paths: 0,
                }
            } else {
                DirectEntry {
                    power_mw: tx_mw * culled.total_power(),
                    paths: culled.len() as u32,
                }
            };
            (g.id, entry)
        })
        .collect()
}

/// Incident and departing entries of one candidate site, over all of its
/// height/orientation states.
pub fn site_tables(
    scene: &Scene,
    site: &CandidateSite,
    cfg: &TracerConfig,
    tx_power_dbm: f64,
) -> (Vec<(StateKey, LinkEntry)>, Vec<(LinkKey, LinkEntry)>) {
    let tx_mw = dbm_to_mw(tx_power_dbm);
    let mut incident = Vec::new();
    let mut departing = Vec::new();
    for j in 1..=site.heights.len() {
        let irs = scene.irs_point(site, j);
        let from_bs = trace_paths(scene.bs_position(), irs, scene, cfg);
        let to_grids: Vec<(u32, PathSet)> = scene
            .grids()
            .iter()
            .map(|g| (g.id, trace_paths(irs, g.center, scene, cfg)))
            .collect();
        for k in 1..=site.orientations.len() {
            let normal = scene.site_normal(site, k);
            let inc = half_space_filter(&from_bs, normal, Direction::Incident)
                .expect("site normals are unit length");
            let inc = cull_paths(&inc, cfg.cull_threshold_db);
            if !inc.is_empty() {
                incident.push((
                    (site.id, j, k),
                    LinkEntry {
                        value: tx_mw * inc.total_power(),
                        paths: inc.len() as u32,
                    },
                ));
            }
            for (grid_id, set) in &to_grids {
                let dep = half_space_filter(set, normal, Direction::Departing)
                    .expect("site normals are unit length");
                let dep = cull_paths(&dep, cfg.cull_threshold_db);
                if dep.is_empty() {
                    continue;
                }
                let gain: f64 = dep
                    .paths
                    .iter()
                    .map(|p| cfg.irs_departure_gain * p.power())
                    .sum();
                departing.push((
                    (site.id, j, k, *grid_id),
                    LinkEntry {
                        value: gain,
                        paths: dep.len() as u32,
                    },
                ));
            }
        }
    }
    (incident, departing)
}

/// Traces the full channel knowledge of a scene.
pub fn generate_knowledge(scene: &Scene, cfg: &TracerConfig, tx_power_dbm: f64) -> ChannelKnowledge {
    let mut knowledge = ChannelKnowledge {
        direct: direct_table(scene, cfg, tx_power_dbm),
        ..ChannelKnowledge::default()
    };
    for site in scene.sites() {
        let (inc, dep) = site_tables(scene, site, cfg, tx_power_dbm);
        knowledge.irs_incident.extend(inc);
        knowledge.irs_departing.extend(dep);
    }
    knowledge
}
