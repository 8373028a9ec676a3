//! The physical planning problem: region grid, buildings, base station,
//! candidate IRS sites and the discrete deployment configuration space.
//!
//! Coordinates are metres. The region origin `(x_min, y_min)` is its
//! north-west corner; x grows eastwards and y grows southwards, the same
//! orientation as a raster radio map. Grid cells are numbered row-major from
//! that corner starting at 1.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{Building, Rect, Vec3};
use crate::propagation::{self, TracerConfig};

/// Smallest accepted ratio between the grid side and the wavelength.
pub const MIN_GRID_TO_WAVELENGTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum SceneError {
    NonPositive { field: &'static str, value: f64 },
    GridTooFine { ratio: f64 },
    UnevenDivision { axis: &'static str, extent: f64, grid_side: f64 },
    DegenerateBuilding { index: usize },
    CellOutOfRange { row: u32, col: u32 },
    DuplicateCell { row: u32, col: u32 },
    GridInsideBuilding { row: u32, col: u32 },
    EmptyGrid,
    SiteOutsideRegion { index: usize },
    EmptyHeights { index: usize },
    EmptyOrientations { index: usize },
    HeightsNotIncreasing { index: usize },
    OrientationsNotIncreasing { index: usize },
    DegenerateSite,
    Invalid(String),
}

impl fmt::Display for SceneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneError::NonPositive { field, value } => {
                write!(f, "{field} must be positive, got {value}")
            }
            SceneError::GridTooFine { ratio } => write!(
                f,
                "grid side / wavelength = {ratio:.3} < {MIN_GRID_TO_WAVELENGTH}: δ/λ ≥ 10 violated"
            ),
            SceneError::UnevenDivision {
                axis,
                extent,
                grid_side,
            } => write!(
                f,
                "region {axis} extent {extent} m is not a multiple of the grid side {grid_side} m"
            ),
            SceneError::DegenerateBuilding { index } => {
                write!(f, "building #{index} has an empty footprint or non-positive height")
            }
            SceneError::CellOutOfRange { row, col } => {
                write!(f, "grid cell ({row}, {col}) lies outside the region")
            }
            SceneError::DuplicateCell { row, col } => {
                write!(f, "grid cell ({row}, {col}) listed twice")
            }
            SceneError::GridInsideBuilding { row, col } => {
                write!(f, "grid cell ({row}, {col}) has its center inside a building footprint")
            }
            SceneError::EmptyGrid => write!(f, "scene has no receiver grids"),
            SceneError::SiteOutsideRegion { index } => {
                write!(f, "candidate site #{index} lies outside the region")
            }
            SceneError::EmptyHeights { index } => {
                write!(f, "candidate site #{index} has no allowed heights")
            }
            SceneError::EmptyOrientations { index } => {
                write!(f, "candidate site #{index} has no allowed orientations")
            }
            SceneError::HeightsNotIncreasing { index } => {
                write!(f, "candidate site #{index}: heights must be strictly increasing")
            }
            SceneError::OrientationsNotIncreasing { index } => {
                write!(f, "candidate site #{index}: orientations must be strictly increasing")
            }
            SceneError::DegenerateSite => {
                write!(f, "candidate site coincides with the base station position")
            }
            SceneError::Invalid(msg) => f.write_str(msg),
        }
    }
}

/// A receiver grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// 1-based id, contiguous over the scene.
    pub id: u32,
    /// 1-based raster row (north to south).
    pub row: u32,
    /// 1-based raster column (west to east).
    pub col: u32,
    /// Cell center at receiver height.
    pub center: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSite {
    /// 1-based id.
    pub id: u32,
    /// Ground position (z = 0).
    pub position: Vec3,
    /// Allowed mounting heights, strictly increasing.
    pub heights: Vec<f64>,
    /// Allowed azimuth rotations in radians, strictly increasing.
    pub orientations: Vec<f64>,
}

impl CandidateSite {
    pub fn num_states(&self) -> usize {
        self.heights.len() * self.orientations.len()
    }

    /// 1-based orientation index of θ = 0, if present.
    pub fn zero_orientation_index(&self) -> Option<usize> {
        self.orientations
            .iter()
            .position(|&o| o == 0.0)
            .map(|k| k + 1)
    }
}

/// One deployment configuration: tile count plus 1-based height and
/// orientation indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IrsConfig {
    pub site_id: u32,
    pub tile_count: u32,
    pub height_index: usize,
    pub orient_index: usize,
}

/// Site as given in a scenario document (ids are assigned on build).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSpec {
    pub x: f64,
    pub y: f64,
    pub heights: Vec<f64>,
    pub orientations: Vec<f64>,
}

/// Unvalidated scene description.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub region: Rect,
    pub grid_side: f64,
    /// Explicit `(row, col)` cells forming the region of interest. `None`
    /// keeps every cell whose center is outside all buildings.
    pub cells: Option<Vec<(u32, u32)>>,
    pub rx_height: f64,
    pub buildings: Vec<Building>,
    pub bs_position: Vec3,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub elements_per_tile_side: u32,
    pub max_tiles: u32,
    pub sites: Vec<SiteSpec>,
}

/// A validated, immutable planning scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    region: Rect,
    grid_side: f64,
    rows: u32,
    cols: u32,
    rx_height: f64,
    buildings: Vec<Building>,
    bs_position: Vec3,
    wavelength: f64,
    element_spacing: f64,
    elements_per_tile_side: u32,
    max_tiles: u32,
    grids: Vec<Grid>,
    sites: Vec<CandidateSite>,
}

fn positive(field: &'static str, value: f64) -> Result<(), SceneError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SceneError::NonPositive { field, value })
    }
}

fn divisions(axis: &'static str, extent: f64, grid_side: f64) -> Result<u32, SceneError> {
    let q = extent / grid_side;
    let n = libm::round(q);
    if n < 1.0 || libm::fabs(q - n) > 1e-9 * n.max(1.0) {
        return Err(SceneError::UnevenDivision {
            axis,
            extent,
            grid_side,
        });
    }
    Ok(n as u32)
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl Scene {
    /// Validates a scene description and lays out the receiver grid.
    pub fn build(spec: SceneSpec) -> Result<Scene, SceneError> {
        positive("grid_side", spec.grid_side)?;
        positive("wavelength", spec.wavelength)?;
        let ratio = spec.grid_side / spec.wavelength;
        if ratio < MIN_GRID_TO_WAVELENGTH {
            return Err(SceneError::GridTooFine { ratio });
        }
        positive("element_spacing", spec.element_spacing)?;
        positive("elements_per_tile_side", spec.elements_per_tile_side as f64)?;
        positive("max_tiles", spec.max_tiles as f64)?;
        if !(spec.rx_height >= 0.0) {
            return Err(SceneError::NonPositive {
                field: "rx_height",
                value: spec.rx_height,
            });
        }
        let cols = divisions("x", spec.region.width(), spec.grid_side)?;
        let rows = divisions("y", spec.region.height(), spec.grid_side)?;

        for (index, b) in spec.buildings.iter().enumerate() {
            let f = &b.footprint;
            if !(f.x_max > f.x_min && f.y_max > f.y_min && b.height > 0.0) {
                return Err(SceneError::DegenerateBuilding { index });
            }
        }
        // Canonical building order makes every downstream result independent
        // of the order buildings were listed in.
        let mut buildings = spec.buildings;
        buildings.sort_by(|a, b| {
            let ka = [
                a.footprint.x_min,
                a.footprint.y_min,
                a.footprint.x_max,
                a.footprint.y_max,
                a.height,
            ];
            let kb = [
                b.footprint.x_min,
                b.footprint.y_min,
                b.footprint.x_max,
                b.footprint.y_max,
                b.height,
            ];
            ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
        });

        let center_of = |row: u32, col: u32| {
            Vec3::new(
                spec.region.x_min + (col as f64 - 0.5) * spec.grid_side,
                spec.region.y_min + (row as f64 - 0.5) * spec.grid_side,
                spec.rx_height,
            )
        };
        let in_building = |c: Vec3| {
            buildings
                .iter()
                .any(|b| b.footprint.contains_strictly(c.x, c.y))
        };

        let mut cells: Vec<(u32, u32)> = match &spec.cells {
            Some(list) => {
                for &(row, col) in list {
                    if row < 1 || row > rows || col < 1 || col > cols {
                        return Err(SceneError::CellOutOfRange { row, col });
                    }
                    if in_building(center_of(row, col)) {
                        return Err(SceneError::GridInsideBuilding { row, col });
                    }
                }
                let mut sorted = list.clone();
                sorted.sort_unstable();
                for w in sorted.windows(2) {
                    if w[0] == w[1] {
                        return Err(SceneError::DuplicateCell {
                            row: w[0].0,
                            col: w[0].1,
                        });
                    }
                }
                sorted
            }
            None => {
                let mut all = Vec::new();
                for row in 1..=rows {
                    for col in 1..=cols {
                        if !in_building(center_of(row, col)) {
                            all.push((row, col));
                        }
                    }
                }
                all
            }
        };
        cells.sort_unstable();
        if cells.is_empty() {
            return Err(SceneError::EmptyGrid);
        }
        let grids = cells
            .iter()
            .enumerate()
            .map(|(idx, &(row, col))| Grid {
                id: idx as u32 + 1,
                row,
                col,
                center: center_of(row, col),
            })
            .collect();

        let mut scene = Scene {
            region: spec.region,
            grid_side: spec.grid_side,
            rows,
            cols,
            rx_height: spec.rx_height,
            buildings,
            bs_position: spec.bs_position,
            wavelength: spec.wavelength,
            element_spacing: spec.element_spacing,
            elements_per_tile_side: spec.elements_per_tile_side,
            max_tiles: spec.max_tiles,
            grids,
            sites: Vec::new(),
        };
        let sites = spec
            .sites
            .into_iter()
            .enumerate()
            .map(|(idx, s)| CandidateSite {
                id: idx as u32 + 1,
                position: Vec3::new(s.x, s.y, 0.0),
                heights: s.heights,
                orientations: s.orientations,
            })
            .collect();
        scene.set_sites(sites)?;
        Ok(scene)
    }

    /// Same scene with a different candidate site list (ids are reassigned
    /// sequentially from 1).
    pub fn with_sites(&self, sites: Vec<CandidateSite>) -> Result<Scene, SceneError> {
        let mut scene = self.clone();
        let sites = sites
            .into_iter()
            .enumerate()
            .map(|(idx, mut s)| {
                s.id = idx as u32 + 1;
                s
            })
            .collect();
        scene.set_sites(sites)?;
        Ok(scene)
    }

    fn set_sites(&mut self, sites: Vec<CandidateSite>) -> Result<(), SceneError> {
        for (idx, s) in sites.iter().enumerate() {
            let index = idx + 1;
            if !self.region.contains(s.position.x, s.position.y) {
                return Err(SceneError::SiteOutsideRegion { index });
            }
            if s.heights.is_empty() {
                return Err(SceneError::EmptyHeights { index });
            }
            if s.orientations.is_empty() {
                return Err(SceneError::EmptyOrientations { index });
            }
            if !strictly_increasing(&s.heights) || s.heights.iter().any(|&h| !(h > 0.0)) {
                return Err(SceneError::HeightsNotIncreasing { index });
            }
            if !strictly_increasing(&s.orientations) {
                return Err(SceneError::OrientationsNotIncreasing { index });
            }
            let w = s.position - self.bs_position.with_z(0.0);
            if w.x == 0.0 && w.y == 0.0 {
                return Err(SceneError::DegenerateSite);
            }
        }
        self.sites = sites;
        Ok(())
    }

    pub fn region(&self) -> Rect {
        self.region
    }
    pub fn grid_side(&self) -> f64 {
        self.grid_side
    }
    pub fn raster_size(&self) -> (u32, u32) {
        (self.rows, self.cols)
    }
    pub fn rx_height(&self) -> f64 {
        self.rx_height
    }
    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }
    pub fn bs_position(&self) -> Vec3 {
        self.bs_position
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn element_spacing(&self) -> f64 {
        self.element_spacing
    }
    pub fn elements_per_tile_side(&self) -> u32 {
        self.elements_per_tile_side
    }
    /// Elements per tile, `M²`.
    pub fn elements_per_tile(&self) -> u32 {
        self.elements_per_tile_side * self.elements_per_tile_side
    }
    pub fn max_tiles(&self) -> u32 {
        self.max_tiles
    }
    pub fn grids(&self) -> &[Grid] {
        &self.grids
    }
    pub fn num_grids(&self) -> usize {
        self.grids.len()
    }
    pub fn grid(&self, id: u32) -> Option<&Grid> {
        self.grids.get((id as usize).checked_sub(1)?)
    }
    pub fn sites(&self) -> &[CandidateSite] {
        &self.sites
    }
    pub fn site(&self, id: u32) -> Option<&CandidateSite> {
        self.sites.get((id as usize).checked_sub(1)?)
    }

    /// Position of the IRS reference point for a site at height index `j`.
    pub fn irs_point(&self, site: &CandidateSite, height_index: usize) -> Vec3 {
        site.position.with_z(site.heights[height_index - 1])
    }

    /// Outward normal of the IRS at `site` with orientation index `k`.
    pub fn site_normal(&self, site: &CandidateSite, orient_index: usize) -> Vec3 {
        let w = site.position - self.bs_position.with_z(0.0);
        normal_vector(w, site.orientations[orient_index - 1])
            .expect("site/BS coincidence is rejected at build time")
    }
}

/// IRS normal for a site at horizontal offset `w` from the base station,
/// rotated by `theta` about the z axis. At `theta = 0` the panel faces the
/// base station.
pub fn normal_vector(w: Vec3, theta: f64) -> Result<Vec3, SceneError> {
    let norm = libm::sqrt(w.x * w.x + w.y * w.y);
    if norm == 0.0 {
        return Err(SceneError::DegenerateSite);
    }
    let (ux, uy) = (-w.x / norm, -w.y / norm);
    let (c, s) = (libm::cos(theta), libm::sin(theta));
    Ok(Vec3::new(c * ux - s * uy, s * ux + c * uy, 0.0))
}

/// Every `(t, j, k)` configuration of a site in lexicographic order.
pub fn enumerate_configs(site: &CandidateSite, max_tiles: u32) -> Vec<IrsConfig> {
    let mut out = Vec::with_capacity(max_tiles as usize * site.num_states());
    for t in 1..=max_tiles {
        for j in 1..=site.heights.len() {
            for k in 1..=site.orientations.len() {
                out.push(IrsConfig {
                    site_id: site.id,
                    tile_count: t,
                    height_index: j,
                    orient_index: k,
                });
            }
        }
    }
    out
}

/// Corner of the grid square farthest (horizontally) from the base station.
/// Ties go to the smaller x, then the smaller y.
pub fn farthest_corner(scene: &Scene, grid: &Grid) -> Vec3 {
    let half = scene.grid_side / 2.0;
    let bs = scene.bs_position;
    let mut best: Option<(f64, f64, f64)> = None;
    for (dx, dy) in [(-half, -half), (-half, half), (half, -half), (half, half)] {
        let (x, y) = (grid.center.x + dx, grid.center.y + dy);
        let d2 = (x - bs.x) * (x - bs.x) + (y - bs.y) * (y - bs.y);
        let better = match best {
            None => true,
            Some((bd, bx, by)) => {
                d2 > bd || (d2 == bd && (x < bx || (x == bx && y < by)))
            }
        };
        if better {
            best = Some((d2, x, y));
        }
    }
    let (_, x, y) = best.expect("four corners");
    Vec3::new(x, y, 0.0)
}

/// Picks one tentative site per grid (its corner farthest from the BS) and
/// keeps it iff some height/orientation pair sees at least one BS path on the
/// panel's front side.
pub fn auto_select_candidates(
    scene: &Scene,
    tracer: &TracerConfig,
    heights: &[f64],
    orientations: &[f64],
) -> Vec<CandidateSite> {
    let mut out = Vec::new();
    for grid in scene.grids() {
        let pos = farthest_corner(scene, grid);
        let w = pos - scene.bs_position.with_z(0.0);
        if w.x == 0.0 && w.y == 0.0 {
            continue;
        }
        let reachable = heights.iter().any(|&h| {
            let paths = propagation::trace_paths(scene.bs_position, pos.with_z(h), scene, tracer);
            if paths.is_empty() {
                return false;
            }
            orientations.iter().any(|&theta| {
                let normal = normal_vector(w, theta).expect("nonzero offset");
                !propagation::half_space_filter(&paths, normal, propagation::Direction::Incident)
                    .expect("unit normal")
                    .is_empty()
            })
        });
        if reachable {
            out.push(CandidateSite {
                id: out.len() as u32 + 1,
                position: pos,
                heights: heights.to_vec(),
                orientations: orientations.to_vec(),
            });
        }
    }
    out
}
