//! Deployment cost, effective channel power, coverage rate and the
//! feasibility band of a coverage target.
//!
//! [`Instance`] is the dense form of a planning problem (β per grid and κ per
//! site state and grid) that every optimizer in the crate works on. The free
//! functions taking a [`ChannelKnowledge`] recompute the same quantities
//! straight from the tables and are used to re-validate solver output.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::cascaded_gain;
use crate::propagation::ChannelKnowledge;
use crate::scene::Scene;
use crate::units::dbm_to_mw;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    InvalidCost,
    InvalidCoverage,
    UnknownGrid(u32),
    UnknownSite(u32),
    InvalidPlacement(Placement),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::InvalidCost => {
                write!(f, "cost coefficients must be non-negative and not both zero")
            }
            MetricsError::InvalidCoverage => {
                write!(f, "P_min must be finite and the coverage target must lie in (0, 1]")
            }
            MetricsError::UnknownGrid(n) => write!(f, "unknown grid id {n}"),
            MetricsError::UnknownSite(i) => write!(f, "unknown site id {i}"),
            MetricsError::InvalidPlacement(p) => write!(f, "invalid placement {p:?}"),
        }
    }
}

/// Per-site and per-tile deployment cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub site_cost: f64,
    pub tile_cost: f64,
}

impl CostParams {
    pub fn new(site_cost: f64, tile_cost: f64) -> Result<Self, MetricsError> {
        let ok = site_cost >= 0.0
            && tile_cost >= 0.0
            && site_cost.is_finite()
            && tile_cost.is_finite()
            && (site_cost > 0.0 || tile_cost > 0.0);
        if ok {
            Ok(Self {
                site_cost,
                tile_cost,
            })
        } else {
            Err(MetricsError::InvalidCost)
        }
    }

    /// Cost of one IRS with `tiles` tiles.
    pub fn config_cost(&self, tiles: u32) -> f64 {
        self.site_cost + self.tile_cost * tiles as f64
    }
}

/// Coverage threshold (stored in mW) and target rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageParams {
    pub p_min_mw: f64,
    pub eta0: f64,
}

impl CoverageParams {
    pub fn from_dbm(p_min_dbm: f64, eta0: f64) -> Result<Self, MetricsError> {
        Self::new(dbm_to_mw(p_min_dbm), eta0)
    }

    pub fn new(p_min_mw: f64, eta0: f64) -> Result<Self, MetricsError> {
        if p_min_mw > 0.0 && p_min_mw.is_finite() && eta0 > 0.0 && eta0 <= 1.0 {
            Ok(Self { p_min_mw, eta0 })
        } else {
            Err(MetricsError::InvalidCoverage)
        }
    }

    /// Smallest covered-grid count `k` with `k / n ≥ η₀`.
    pub fn required_count(&self, num_grids: usize) -> usize {
        let n = num_grids as f64;
        let mut k = libm::ceil(self.eta0 * n) as usize;
        k = k.min(num_grids);
        while k > 0 && (k - 1) as f64 / n >= self.eta0 {
            k -= 1;
        }
        while k < num_grids && (k as f64) / n < self.eta0 {
            k += 1;
        }
        k
    }
}

/// One deployed IRS. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub site_id: u32,
    pub height_index: usize,
    pub orient_index: usize,
    pub tiles: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub site_use: f64,
    pub hardware: f64,
    pub total: f64,
}

/// Outcome classification shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// Meets the coverage target, optimality not proven.
    Feasible,
    /// Target already met without any IRS.
    Trivial,
    /// No deployment can meet the target.
    Infeasible,
    /// Time limit hit; the solution is the best incumbent, if any.
    Timeout,
    /// Sequential deployment ran out of candidate sites below the target.
    TargetUnreachableWithPool,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Trivial => "trivial",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
            SolveStatus::TargetUnreachableWithPool => "target_unreachable_with_pool",
        }
    }
}

/// A deployment with its cost and coverage evaluated from first principles.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentSolution {
    /// Sorted by site id, at most one per site.
    pub placements: Vec<Placement>,
    pub cost: CostBreakdown,
    /// Effective power (mW) per grid, index `n - 1`.
    pub per_grid_power: Vec<f64>,
    pub covered: usize,
    pub coverage_rate: f64,
    pub status: SolveStatus,
}

impl DeploymentSolution {
    pub fn meets(&self, coverage: &CoverageParams) -> bool {
        self.coverage_rate >= coverage.eta0
    }

    pub fn total_tiles(&self) -> u32 {
        self.placements.iter().map(|p| p.tiles).sum()
    }
}

/// `c_s |I| + c_h Σ T_i`.
pub fn deployment_cost(placements: &[Placement], params: &CostParams) -> CostBreakdown {
    let site_use = params.site_cost * placements.len() as f64;
    let hardware = params.tile_cost * placements.iter().map(|p| p.tiles).sum::<u32>() as f64;
    CostBreakdown {
        site_use,
        hardware,
        total: site_use + hardware,
    }
}

fn sorted(placements: &[Placement]) -> Vec<Placement> {
    let mut v = placements.to_vec();
    v.sort_unstable();
    v
}

/// Effective power at grid `n` straight from the knowledge tables.
pub fn effective_power(
    n: u32,
    placements: &[Placement],
    knowledge: &ChannelKnowledge,
    elements_per_tile: u32,
) -> Result<f64, MetricsError> {
    let beta = knowledge
        .direct
        .get(&n)
        .ok_or(MetricsError::UnknownGrid(n))?
        .power_mw;
    let mut p = beta;
    for pl in sorted(placements) {
        let kappa = knowledge.kappa(pl.site_id, pl.height_index, pl.orient_index, n);
        p += cascaded_gain(pl.tiles, elements_per_tile, kappa);
    }
    Ok(p)
}

/// Coverage rate straight from the knowledge tables.
pub fn coverage_rate(
    placements: &[Placement],
    knowledge: &ChannelKnowledge,
    coverage: &CoverageParams,
    elements_per_tile: u32,
) -> f64 {
    let n = knowledge.direct.len();
    if n == 0 {
        return 0.0;
    }
    let covered = knowledge
        .direct
        .keys()
        .filter(|&&g| {
            effective_power(g, placements, knowledge, elements_per_tile)
                .is_ok_and(|p| p >= coverage.p_min_mw)
        })
        .count();
    covered as f64 / n as f64
}

/// Where a coverage target sits relative to the achievable band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// Already met with no IRS.
    Trivial,
    FeasibleBand,
    /// Above even the per-grid optimistic bound.
    Infeasible,
}

pub fn check_feasibility(coverage: &CoverageParams, bounds: (f64, f64)) -> Feasibility {
    let (eta_min, eta_max) = bounds;
    if coverage.eta0 <= eta_min {
        Feasibility::Trivial
    } else if coverage.eta0 > eta_max {
        Feasibility::Infeasible
    } else {
        Feasibility::FeasibleBand
    }
}

/// κ table of one candidate site: one dense per-grid row per
/// `(height, orientation)` state, states in row-major `(j, k)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTable {
    pub id: u32,
    pub num_heights: usize,
    pub num_orients: usize,
    /// 1-based index of the θ = 0 orientation, if the site has one.
    pub zero_orient: Option<usize>,
    pub kappa: Vec<Vec<f64>>,
}

impl SiteTable {
    pub fn num_states(&self) -> usize {
        self.num_heights * self.num_orients
    }

    /// Dense state index of 1-based `(j, k)`.
    pub fn state(&self, j: usize, k: usize) -> usize {
        (j - 1) * self.num_orients + (k - 1)
    }

    /// 1-based `(j, k)` of a dense state index.
    pub fn indices(&self, state: usize) -> (usize, usize) {
        (state / self.num_orients + 1, state % self.num_orients + 1)
    }
}

/// Dense, validated planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    beta: Vec<f64>,
    sites: Vec<SiteTable>,
    max_tiles: u32,
    elements_per_tile: u32,
    cost: CostParams,
    coverage: CoverageParams,
}

impl Instance {
    /// Builds the dense tables from a scene and its channel knowledge.
    pub fn new(
        scene: &Scene,
        knowledge: &ChannelKnowledge,
        cost: CostParams,
        coverage: CoverageParams,
    ) -> Result<Instance, MetricsError> {
        let shapes: Vec<(u32, usize, usize, Option<usize>)> = scene
            .sites()
            .iter()
            .map(|s| {
                (
                    s.id,
                    s.heights.len(),
                    s.orientations.len(),
                    s.zero_orientation_index(),
                )
            })
            .collect();
        Self::from_knowledge(
            knowledge,
            scene.num_grids(),
            &shapes,
            scene.max_tiles(),
            scene.elements_per_tile(),
            cost,
            coverage,
        )
    }

    /// Builds the dense tables from knowledge plus site shapes
    /// `(id, |H|, |O|, index of θ = 0)`. Site ids must be `1..=I₀` in order.
    pub fn from_knowledge(
        knowledge: &ChannelKnowledge,
        num_grids: usize,
        shapes: &[(u32, usize, usize, Option<usize>)],
        max_tiles: u32,
        elements_per_tile: u32,
        cost: CostParams,
        coverage: CoverageParams,
    ) -> Result<Instance, MetricsError> {
        let mut beta = Vec::with_capacity(num_grids);
        for n in 1..=num_grids as u32 {
            beta.push(
                knowledge
                    .direct
                    .get(&n)
                    .ok_or(MetricsError::UnknownGrid(n))?
                    .power_mw,
            );
        }
        let mut sites = Vec::with_capacity(shapes.len());
        for (idx, &(id, nh, no, zero)) in shapes.iter().enumerate() {
            if id as usize != idx + 1 {
                return Err(MetricsError::UnknownSite(id));
            }
            let mut kappa = Vec::with_capacity(nh * no);
            for j in 1..=nh {
                for k in 1..=no {
                    kappa.push(
                        (1..=num_grids as u32)
                            .map(|n| knowledge.kappa(id, j, k, n))
                            .collect(),
                    );
                }
            }
            sites.push(SiteTable {
                id,
                num_heights: nh,
                num_orients: no,
                zero_orient: zero,
                kappa,
            });
        }
        Ok(Instance {
            beta,
            sites,
            max_tiles,
            elements_per_tile,
            cost,
            coverage,
        })
    }

    /// Builds an instance from raw tables (test and benchmark helper).
    pub fn from_tables(
        beta: Vec<f64>,
        sites: Vec<SiteTable>,
        max_tiles: u32,
        elements_per_tile: u32,
        cost: CostParams,
        coverage: CoverageParams,
    ) -> Instance {
        Instance {
            beta,
            sites,
            max_tiles,
            elements_per_tile,
            cost,
            coverage,
        }
    }

    pub fn num_grids(&self) -> usize {
        self.beta.len()
    }
    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }
    pub fn sites(&self) -> &[SiteTable] {
        &self.sites
    }
    pub fn site(&self, id: u32) -> &SiteTable {
        &self.sites[id as usize - 1]
    }
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
    pub fn max_tiles(&self) -> u32 {
        self.max_tiles
    }
    pub fn elements_per_tile(&self) -> u32 {
        self.elements_per_tile
    }
    pub fn cost_params(&self) -> &CostParams {
        &self.cost
    }
    pub fn coverage_params(&self) -> &CoverageParams {
        &self.coverage
    }

    /// Same instance with a different coverage target.
    pub fn with_coverage(&self, coverage: CoverageParams) -> Instance {
        Instance {
            coverage,
            ..self.clone()
        }
    }

    /// Same instance with different cost coefficients.
    pub fn with_cost(&self, cost: CostParams) -> Instance {
        Instance {
            cost,
            ..self.clone()
        }
    }

    /// Minimum number of covered grids meeting the target.
    pub fn required_count(&self) -> usize {
        self.coverage.required_count(self.num_grids())
    }

    /// `T² M⁴ κ` of one site state at one grid (0-based grid index).
    pub fn gain(&self, site: u32, state: usize, tiles: u32, grid: usize) -> f64 {
        cascaded_gain(tiles, self.elements_per_tile, self.site(site).kappa[state][grid])
    }

    pub fn check_placement(&self, p: &Placement) -> Result<(), MetricsError> {
        let ok = p.site_id >= 1
            && (p.site_id as usize) <= self.sites.len()
            && {
                let s = self.site(p.site_id);
                (1..=s.num_heights).contains(&p.height_index)
                    && (1..=s.num_orients).contains(&p.orient_index)
            }
            && (1..=self.max_tiles).contains(&p.tiles);
        if ok {
            Ok(())
        } else {
            Err(MetricsError::InvalidPlacement(*p))
        }
    }

    /// Effective power (mW) of every grid; placements are summed in site
    /// order so the result is bit-identical to [`effective_power`].
    pub fn powers(&self, placements: &[Placement]) -> Vec<f64> {
        let mut p = self.beta.clone();
        for pl in sorted(placements) {
            let state = self.site(pl.site_id).state(pl.height_index, pl.orient_index);
            for (n, v) in p.iter_mut().enumerate() {
                *v += self.gain(pl.site_id, state, pl.tiles, n);
            }
        }
        p
    }

    pub fn count_covered(&self, powers: &[f64]) -> usize {
        powers.iter().filter(|&&p| p >= self.coverage.p_min_mw).count()
    }

    pub fn coverage_rate(&self, placements: &[Placement]) -> f64 {
        self.count_covered(&self.powers(placements)) as f64 / self.num_grids() as f64
    }

    /// Evaluates a deployment. The status is `Feasible` when the target is
    /// met and `Infeasible` otherwise; callers refine it.
    pub fn evaluate(&self, placements: &[Placement]) -> DeploymentSolution {
        let placements = sorted(placements);
        let per_grid_power = self.powers(&placements);
        let covered = self.count_covered(&per_grid_power);
        let coverage_rate = covered as f64 / self.num_grids() as f64;
        let status = if covered >= self.required_count() {
            SolveStatus::Feasible
        } else {
            SolveStatus::Infeasible
        };
        DeploymentSolution {
            cost: deployment_cost(&placements, &self.cost),
            placements,
            per_grid_power,
            covered,
            coverage_rate,
            status,
        }
    }

    /// The zero-cost deployment.
    pub fn empty_solution(&self) -> DeploymentSolution {
        self.evaluate(&[])
    }

    /// `(η_min, η_max)`: coverage with no IRS, and the optimistic bound where
    /// every site runs at `T_max` and each grid picks each site's best state.
    pub fn feasibility_bounds(&self) -> (f64, f64) {
        let n = self.num_grids();
        if n == 0 {
            return (0.0, 0.0);
        }
        let eta_min = self.count_covered(&self.beta) as f64 / n as f64;
        let mut best = self.beta.clone();
        for site in &self.sites {
            for (g, v) in best.iter_mut().enumerate() {
                let k = site.kappa.iter().map(|row| row[g]).fold(0.0, f64::max);
                *v += cascaded_gain(self.max_tiles, self.elements_per_tile, k);
            }
        }
        let eta_max = self.count_covered(&best) as f64 / n as f64;
        (eta_min, eta_max)
    }

    pub fn feasibility(&self) -> Feasibility {
        check_feasibility(&self.coverage, self.feasibility_bounds())
    }
}

/// Builds an all-zero κ table for a site.
pub fn empty_site_table(id: u32, num_heights: usize, num_orients: usize, num_grids: usize) -> SiteTable {
    SiteTable {
        id,
        num_heights,
        num_orients,
        zero_orient: None,
        kappa: vec![vec![0.0; num_grids]; num_heights * num_orients],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{DirectEntry, LinkEntry};

    fn knowledge_with(betas_dbm: &[f64]) -> ChannelKnowledge {
        let mut k = ChannelKnowledge::default();
        for (i, &b) in betas_dbm.iter().enumerate() {
            k.direct.insert(
                i as u32 + 1,
                DirectEntry {
                    power_mw: dbm_to_mw(b),
                    paths: 1,
                },
            );
        }
        k
    }

    #[test]
    fn cost_examples() {
        let pl = |tiles| Placement {
            site_id: 1,
            height_index: 1,
            orient_index: 1,
            tiles,
        };
        let four: Vec<Placement> = [20, 15, 15, 15].iter().map(|&t| pl(t)).collect();
        let c = deployment_cost(&four, &CostParams::new(5.0, 1.0).unwrap());
        assert_eq!(c.total, 85.0);
        assert_eq!((c.site_use, c.hardware), (20.0, 65.0));
        assert_eq!(deployment_cost(&[], &CostParams::new(5.0, 1.0).unwrap()).total, 0.0);
        let three: Vec<Placement> = [25, 25, 24].iter().map(|&t| pl(t)).collect();
        assert_eq!(deployment_cost(&three, &CostParams::new(10.0, 1.0).unwrap()).total, 104.0);
    }

    #[test]
    fn cost_params_validation() {
        assert!(CostParams::new(0.0, 0.0).is_err());
        assert!(CostParams::new(-1.0, 1.0).is_err());
        assert!(CoverageParams::new(1e-7, 0.0).is_err());
        assert!(CoverageParams::new(1e-7, 1.1).is_err());
    }

    #[test]
    fn effective_power_examples() {
        let mut k = ChannelKnowledge::default();
        k.direct.insert(1, DirectEntry { power_mw: 1e-7, paths: 1 });
        assert_eq!(effective_power(1, &[], &k, 4), Ok(1e-7));
        k.irs_incident.insert((1, 1, 1), LinkEntry { value: 1e-9, paths: 1 });
        let pl = [Placement {
            site_id: 1,
            height_index: 1,
            orient_index: 1,
            tiles: 2,
        }];
        // no departing entry: κ = 0
        assert_eq!(effective_power(1, &pl, &k, 4), Ok(1e-7));
        k.irs_departing.insert((1, 1, 1, 1), LinkEntry { value: 1.0, paths: 1 });
        let p = effective_power(1, &pl, &k, 4).unwrap();
        assert!((p - 1.64e-7).abs() < 1e-20);
        assert_eq!(effective_power(9, &pl, &k, 4), Err(MetricsError::UnknownGrid(9)));
    }

    #[test]
    fn coverage_threshold_is_inclusive() {
        let k = knowledge_with(&[-70.0, -68.0, -60.0, -69.0]);
        let cov = CoverageParams::from_dbm(-68.0, 0.5).unwrap();
        assert_eq!(coverage_rate(&[], &k, &cov, 4), 0.5);
        let cov = CoverageParams::from_dbm(-50.0, 0.5).unwrap();
        assert_eq!(coverage_rate(&[], &k, &cov, 4), 0.0);
    }

    #[test]
    fn required_count_is_consistent_with_rate_comparison() {
        for n in 1..200usize {
            for e in 1..=100 {
                let eta0 = e as f64 / 100.0;
                let cov = CoverageParams::new(1.0, eta0).unwrap();
                let k = cov.required_count(n);
                assert!(k as f64 / n as f64 >= eta0);
                if k > 0 {
                    assert!(((k - 1) as f64 / n as f64) < eta0);
                }
            }
        }
        let cov = CoverageParams::new(1.0, 0.7).unwrap();
        assert_eq!(cov.required_count(10), 7);
    }

    #[test]
    fn feasibility_classes() {
        let cov = |eta| CoverageParams::new(1.0, eta).unwrap();
        assert_eq!(check_feasibility(&cov(0.4), (0.5, 0.8)), Feasibility::Trivial);
        assert_eq!(check_feasibility(&cov(0.5), (0.5, 0.8)), Feasibility::Trivial);
        assert_eq!(check_feasibility(&cov(0.7), (0.5, 0.8)), Feasibility::FeasibleBand);
        assert_eq!(check_feasibility(&cov(0.9), (0.5, 0.8)), Feasibility::Infeasible);
    }

    #[test]
    fn empty_knowledge_bounds() {
        let k = knowledge_with(&[-100.0, -100.0]);
        let inst = Instance::from_knowledge(
            &k,
            2,
            &[(1, 1, 1, Some(1))],
            3,
            16,
            CostParams::new(1.0, 1.0).unwrap(),
            CoverageParams::from_dbm(-68.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(inst.feasibility_bounds(), (0.0, 0.0));
    }

    #[test]
    fn one_config_covering_everything_gives_full_upper_bound() {
        let mut k = knowledge_with(&[-100.0, -100.0, -100.0]);
        k.irs_incident.insert((1, 1, 2), LinkEntry { value: 1e-3, paths: 1 });
        for n in 1..=3 {
            k.irs_departing.insert((1, 1, 2, n), LinkEntry { value: 1e-3, paths: 1 });
        }
        let inst = Instance::from_knowledge(
            &k,
            3,
            &[(1, 1, 2, None)],
            1,
            16,
            CostParams::new(1.0, 1.0).unwrap(),
            CoverageParams::from_dbm(-68.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(inst.feasibility_bounds(), (0.0, 1.0));
        let sol = inst.evaluate(&[Placement {
            site_id: 1,
            height_index: 1,
            orient_index: 2,
            tiles: 1,
        }]);
        assert_eq!(sol.coverage_rate, 1.0);
        for n in 1..=3u32 {
            assert_eq!(
                sol.per_grid_power[n as usize - 1],
                effective_power(n, &sol.placements, &k, 16).unwrap()
            );
        }
    }
}
