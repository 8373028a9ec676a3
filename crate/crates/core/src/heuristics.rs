//! Sequential deployment, successive refinement and the two baselines.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::metrics::{DeploymentSolution, Feasibility, Instance, Placement, SolveStatus};
use crate::milp::{self, BuildOptions, LpStatus, MilpError, StopCheck};

/// Threshold above which a relaxed site usage `Σ ξ` counts as nonzero.
pub const DEFAULT_LP_THRESHOLD: f64 = 1e-6;

/// Best state of one site at a fixed tile count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateChoice {
    pub height_index: usize,
    pub orient_index: usize,
    pub covered: usize,
    /// Added effective power summed over all grids (mW).
    pub added_power: f64,
}

/// `(T*, s*, η)` of one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileChoice {
    pub site_id: u32,
    pub tiles: u32,
    pub height_index: usize,
    pub orient_index: usize,
    pub covered: usize,
}

impl TileChoice {
    pub fn placement(&self) -> Placement {
        Placement {
            site_id: self.site_id,
            height_index: self.height_index,
            orient_index: self.orient_index,
            tiles: self.tiles,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TileSearch {
    #[default]
    Binary,
    Linear,
}

/// Best `(j, k)` of site `i` with `tiles` tiles on top of `base` powers:
/// most covered grids, then most added power, then lowest `(j, k)`.
pub fn optimal_state_for_tiles(instance: &Instance, base: &[f64], site_id: u32, tiles: u32) -> StateChoice {
    let site = instance.site(site_id);
    let p_min = instance.coverage_params().p_min_mw;
    let mut best: Option<StateChoice> = None;
    for st in 0..site.num_states() {
        let mut covered = 0usize;
        let mut added = 0.0;
        for (g, &b) in base.iter().enumerate() {
            let gain = instance.gain(site_id, st, tiles, g);
            added += gain;
            if b + gain >= p_min {
                covered += 1;
            }
        }
        let better = match &best {
            None => true,
            Some(b) => covered > b.covered || (covered == b.covered && added > b.added_power),
        };
        if better {
            let (j, k) = site.indices(st);
            best = Some(StateChoice {
                height_index: j,
                orient_index: k,
                covered,
                added_power: added,
            });
        }
    }
    best.unwrap_or(StateChoice {
        height_index: 1,
        orient_index: 1,
        covered: instance.count_covered(base),
        added_power: 0.0,
    })
}

/// Smallest tile count reaching the target, or, when no tile count does,
/// the smallest one attaining the best coverage at `T_max`.
pub fn optimal_tiles(instance: &Instance, base: &[f64], site_id: u32, search: TileSearch) -> TileChoice {
    let t_max = instance.max_tiles();
    let at = |t: u32| optimal_state_for_tiles(instance, base, site_id, t);
    let top = at(t_max);
    let target = top.covered.min(instance.required_count());
    let (tiles, st) = match search {
        TileSearch::Linear => (1..=t_max)
            .map(|t| (t, at(t)))
            .find(|(_, s)| s.covered >= target)
            .unwrap_or((t_max, top)),
        TileSearch::Binary => {
            let (mut lo, mut hi) = (1u32, t_max);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if at(mid).covered >= target {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            (lo, if lo == t_max { top } else { at(lo) })
        }
    };
    TileChoice {
        site_id,
        tiles,
        height_index: st.height_index,
        orient_index: st.orient_index,
        covered: st.covered,
    }
}

/// One iteration of sequential deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct DeployStep {
    pub choice: TileChoice,
    /// Whether the pick came from the set of sites reaching the target alone.
    pub from_target_set: bool,
    /// Candidates evaluated in this iteration, ascending by site id.
    pub candidates: Vec<TileChoice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialResult {
    pub solution: DeploymentSolution,
    pub trace: Vec<DeployStep>,
}

/// Greedy deployment over `pool`, on top of the fixed `prefix`.
pub fn sequential_deploy(instance: &Instance, pool: &[u32], prefix: &[Placement], search: TileSearch) -> SequentialResult {
    let required = instance.required_count();
    let mut deployed: Vec<Placement> = prefix.to_vec();
    let mut remaining: Vec<u32> = pool
        .iter()
        .copied()
        .filter(|i| !prefix.iter().any(|p| p.site_id == *i))
        .collect();
    remaining.sort_unstable();
    remaining.dedup();
    let mut trace = Vec::new();
    let mut powers = instance.powers(&deployed);
    while instance.count_covered(&powers) < required && !remaining.is_empty() {
        let candidates: Vec<TileChoice> = remaining
            .iter()
            .map(|&i| optimal_tiles(instance, &powers, i, search))
            .collect();
        let in_target = candidates.iter().any(|c| c.covered >= required);
        let pick = if in_target {
            candidates
                .iter()
                .filter(|c| c.covered >= required)
                .min_by(|a, b| {
                    a.tiles
                        .cmp(&b.tiles)
                        .then(b.covered.cmp(&a.covered))
                        .then(a.site_id.cmp(&b.site_id))
                })
        } else {
            candidates.iter().min_by(|a, b| {
                b.covered
                    .cmp(&a.covered)
                    .then(a.tiles.cmp(&b.tiles))
                    .then(a.site_id.cmp(&b.site_id))
            })
        }
        .copied()
        .expect("nonempty candidate list");
        deployed.push(pick.placement());
        remaining.retain(|&i| i != pick.site_id);
        powers = instance.powers(&deployed);
        trace.push(DeployStep {
            choice: pick,
            from_target_set: in_target,
            candidates,
        });
    }
    let mut solution = instance.evaluate(&deployed);
    solution.status = if solution.covered >= required {
        SolveStatus::Feasible
    } else {
        SolveStatus::TargetUnreachableWithPool
    };
    SequentialResult { solution, trace }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step1Result {
    pub pool: Vec<u32>,
    pub lp_status: LpStatus,
    /// The relaxation was infeasible and the pool fell back to every site.
    pub fallback: bool,
}

/// Sites with nonzero usage in the full-coverage LP relaxation.
pub fn step1_lp_subset(instance: &Instance, threshold: f64) -> Result<Step1Result, MilpError> {
    let model = milp::build_p21(instance)?;
    let lp = milp::lp_solve(&model);
    if lp.status != LpStatus::Optimal {
        return Ok(Step1Result {
            pool: instance.sites().iter().map(|s| s.id).collect(),
            lp_status: lp.status,
            fallback: true,
        });
    }
    let mut usage = vec![0.0; instance.num_sites()];
    for (v, &x) in model.vars.iter().zip(&lp.values) {
        if let milp::VarKind::Xi { site, .. } = v {
            usage[*site as usize - 1] += x;
        }
    }
    let pool = usage
        .iter()
        .enumerate()
        .filter(|(_, &u)| u > threshold)
        .map(|(i, _)| i as u32 + 1)
        .collect();
    Ok(Step1Result {
        pool,
        lp_status: lp.status,
        fallback: false,
    })
}

fn cost_or_inf(s: &DeploymentSolution, required: usize) -> f64 {
    if s.covered >= required {
        s.cost.total
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swap {
    pub position: usize,
    pub removed: u32,
    pub added: u32,
    pub cost: f64,
}

/// Pairwise site swapping between the pool and the rest of the sites.
pub fn step2_swap_refine(
    instance: &Instance,
    incumbent: DeploymentSolution,
    pool: Vec<u32>,
    search: TileSearch,
) -> (DeploymentSolution, Vec<u32>, Vec<Swap>) {
    let required = instance.required_count();
    let mut incumbent = incumbent;
    let mut pool = pool;
    let mut swaps = Vec::new();
    for m in 0..pool.len() {
        let outside: Vec<u32> = instance
            .sites()
            .iter()
            .map(|s| s.id)
            .filter(|i| !pool.contains(i))
            .collect();
        let mut best: Option<(u32, DeploymentSolution)> = None;
        for &cand in &outside {
            let mut trial = pool.clone();
            trial[m] = cand;
            let r = sequential_deploy(instance, &trial, &[], search).solution;
            let c = cost_or_inf(&r, required);
            if c.is_finite() && best.as_ref().is_none_or(|(_, b)| c < b.cost.total) {
                best = Some((cand, r));
            }
        }
        if let Some((cand, sol)) = best {
            if sol.cost.total < cost_or_inf(&incumbent, required) - 1e-9 {
                swaps.push(Swap {
                    position: m,
                    removed: pool[m],
                    added: cand,
                    cost: sol.cost.total,
                });
                pool[m] = cand;
                incumbent = sol;
            }
        }
    }
    (incumbent, pool, swaps)
}

/// Restricted ILP over `pool`, warm-started with the incumbent. Returns
/// the better of the two, the node count and whether BB improved on it.
pub fn step3_final_ilp(
    instance: &Instance,
    incumbent: &DeploymentSolution,
    pool: &[u32],
    stop: &dyn StopCheck,
) -> Result<(DeploymentSolution, usize, bool), MilpError> {
    let required = instance.required_count();
    if pool.is_empty() {
        return Ok((incumbent.clone(), 0, false));
    }
    let model = milp::build_p1(
        instance,
        &BuildOptions {
            restrict_sites: Some(pool.to_vec()),
            ..Default::default()
        },
    )?;
    let r = milp::branch_and_bound(&model, instance, Some(incumbent), stop);
    let bb_cost = cost_or_inf(&r.solution, required);
    if bb_cost < cost_or_inf(incumbent, required) - 1e-9 {
        Ok((r.solution, r.nodes, true))
    } else {
        Ok((incumbent.clone(), r.nodes, false))
    }
}

/// Which stage produced the final deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStage {
    Trivial,
    Infeasible,
    Sequential,
    Swap,
    FinalIlp,
}

impl RefineStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            RefineStage::Trivial => "trivial",
            RefineStage::Infeasible => "infeasible",
            RefineStage::Sequential => "sequential",
            RefineStage::Swap => "swap",
            RefineStage::FinalIlp => "final_ilp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub solution: DeploymentSolution,
    pub stage: RefineStage,
    pub lp_pool: Vec<u32>,
    pub lp_fallback: bool,
    /// Sequential deployment on the relaxation's pool failed and was rerun
    /// on every site.
    pub pool_fallback: bool,
    pub final_pool: Vec<u32>,
    pub swaps: Vec<Swap>,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub lp_threshold: f64,
    pub search: TileSearch,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            lp_threshold: DEFAULT_LP_THRESHOLD,
            search: TileSearch::Binary,
        }
    }
}

/// Three-stage heuristic: relaxation-guided pool with sequential deployment,
/// pairwise swaps, then a restricted exact solve.
pub fn successive_refinement(
    instance: &Instance,
    opts: &RefineOptions,
    stop: &dyn StopCheck,
) -> Result<RefineResult, MilpError> {
    let all: Vec<u32> = instance.sites().iter().map(|s| s.id).collect();
    let short = |solution, stage| RefineResult {
        solution,
        stage,
        lp_pool: Vec::new(),
        lp_fallback: false,
        pool_fallback: false,
        final_pool: Vec::new(),
        swaps: Vec::new(),
        nodes: 0,
    };
    match instance.feasibility() {
        Feasibility::Trivial => {
            let mut s = instance.empty_solution();
            s.status = SolveStatus::Trivial;
            return Ok(short(s, RefineStage::Trivial));
        }
        Feasibility::Infeasible => {
            let mut s = instance.empty_solution();
            s.status = SolveStatus::Infeasible;
            return Ok(short(s, RefineStage::Infeasible));
        }
        Feasibility::FeasibleBand => {}
    }
    let required = instance.required_count();

    let step1 = step1_lp_subset(instance, opts.lp_threshold)?;
    let mut seq = sequential_deploy(instance, &step1.pool, &[], opts.search).solution;
    let mut pool_fallback = false;
    if seq.covered < required && step1.pool.len() < all.len() {
        seq = sequential_deploy(instance, &all, &[], opts.search).solution;
        pool_fallback = true;
    }
    let pool: Vec<u32> = if seq.covered >= required {
        seq.placements.iter().map(|p| p.site_id).collect()
    } else {
        all.clone()
    };

    let seq_cost = cost_or_inf(&seq, required);
    let (swapped, pool, swaps) = step2_swap_refine(instance, seq, pool, opts.search);
    let swap_cost = cost_or_inf(&swapped, required);
    let (mut solution, nodes, improved) = step3_final_ilp(instance, &swapped, &pool, stop)?;

    let stage = if improved {
        RefineStage::FinalIlp
    } else if swap_cost < seq_cost {
        RefineStage::Swap
    } else {
        RefineStage::Sequential
    };
    solution.status = if solution.covered >= required {
        SolveStatus::Feasible
    } else if stop.should_stop() {
        SolveStatus::Timeout
    } else {
        SolveStatus::Infeasible
    };
    Ok(RefineResult {
        solution,
        stage,
        lp_pool: step1.pool,
        lp_fallback: step1.fallback,
        pool_fallback,
        final_pool: pool,
        swaps,
        nodes,
    })
}

/// Exact solve of the joint problem.
pub fn exact(instance: &Instance, stop: &dyn StopCheck) -> Result<milp::BbResult, MilpError> {
    solve_restricted(instance, &BuildOptions::default(), stop)
}

/// Lowest height and zero orientation at every site.
pub fn fixed_state_baseline(instance: &Instance, stop: &dyn StopCheck) -> Result<milp::BbResult, MilpError> {
    solve_restricted(
        instance,
        &BuildOptions {
            fixed_state: true,
            ..Default::default()
        },
        stop,
    )
}

/// Every deployed IRS carries the maximum tile count.
pub fn max_tile_baseline(instance: &Instance, stop: &dyn StopCheck) -> Result<milp::BbResult, MilpError> {
    solve_restricted(
        instance,
        &BuildOptions {
            fixed_tiles: Some(instance.max_tiles()),
            ..Default::default()
        },
        stop,
    )
}

fn solve_restricted(instance: &Instance, opts: &BuildOptions, stop: &dyn StopCheck) -> Result<milp::BbResult, MilpError> {
    // the zero-orientation check must fire even when the target is trivial
    let model = milp::build_p1(instance, opts)?;
    match instance.feasibility() {
        Feasibility::Trivial => {
            let mut s = instance.empty_solution();
            s.status = SolveStatus::Trivial;
            Ok(milp::BbResult {
                solution: s,
                nodes: 0,
                root_bound: 0.0,
            })
        }
        Feasibility::Infeasible => {
            let mut s = instance.empty_solution();
            s.status = SolveStatus::Infeasible;
            Ok(milp::BbResult {
                solution: s,
                nodes: 0,
                root_bound: f64::INFINITY,
            })
        }
        Feasibility::FeasibleBand => Ok(milp::branch_and_bound(&model, instance, None, stop)),
    }
}

/// Orders solutions by feasibility then cost; used to compare outcomes.
pub fn compare_solutions(a: &DeploymentSolution, b: &DeploymentSolution, required: usize) -> Ordering {
    cost_or_inf(a, required).total_cmp(&cost_or_inf(b, required))
}
