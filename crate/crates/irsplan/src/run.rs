//! Solver dispatch, run reports and their JSON documents.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use irsplan_core::heuristics::{self, RefineOptions};
use irsplan_core::milp::{self, BuildOptions, IlpModel, StopCheck};
use irsplan_core::units::mw_to_dbm;
use irsplan_core::{DeploymentSolution, Instance, Scene, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bb,
    Refine,
    FixedState,
    MaxTile,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Bb, Algorithm::Refine, Algorithm::FixedState, Algorithm::MaxTile];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bb => "bb",
            Algorithm::Refine => "refine",
            Algorithm::FixedState => "fixed-state",
            Algorithm::MaxTile => "max-tile",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CliError::UnknownAlgorithm(s.to_string()))
    }
}

/// Wall-clock time limit.
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn new(limit: Option<Duration>) -> Self {
        Deadline(limit.map(|d| Instant::now() + d))
    }
}

impl StopCheck for Deadline {
    fn should_stop(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// Result of one solver run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub wall_time: Duration,
    pub solution: DeploymentSolution,
    pub node_count: Option<usize>,
    pub refine: Option<heuristics::RefineResult>,
}

impl RunReport {
    pub fn status(&self) -> SolveStatus {
        self.solution.status
    }
}

/// Model solved by an algorithm (the full one for the heuristic).
pub fn model_for(algorithm: Algorithm, instance: &Instance) -> Result<IlpModel, CliError> {
    let opts = match algorithm {
        Algorithm::Bb | Algorithm::Refine => BuildOptions::default(),
        Algorithm::FixedState => BuildOptions {
            fixed_state: true,
            ..Default::default()
        },
        Algorithm::MaxTile => BuildOptions {
            fixed_tiles: Some(instance.max_tiles()),
            ..Default::default()
        },
    };
    milp::build_p1(instance, &opts).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(algorithm: Algorithm, instance: &Instance, stop: &dyn StopCheck) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let usage = |e: milp::MilpError| CliError::Usage(e.to_string());
    let (solution, node_count, refine) = match algorithm {
        Algorithm::Bb => {
            let r = heuristics::exact(instance, stop).map_err(usage)?;
            (r.solution, Some(r.nodes), None)
        }
        Algorithm::FixedState => {
            let r = heuristics::fixed_state_baseline(instance, stop).map_err(usage)?;
            (r.solution, Some(r.nodes), None)
        }
        Algorithm::MaxTile => {
            let r = heuristics::max_tile_baseline(instance, stop).map_err(usage)?;
            (r.solution, Some(r.nodes), None)
        }
        Algorithm::Refine => {
            let r = heuristics::successive_refinement(instance, &RefineOptions::default(), stop).map_err(usage)?;
            (r.solution.clone(), Some(r.nodes), Some(r))
        }
    };
    let wall_time = start.elapsed();
    log::info!(
        "{algorithm}: status {} cost {} coverage {:.4} in {:.3} s",
        solution.status.as_str(),
        solution.cost.total,
        solution.coverage_rate,
        wall_time.as_secs_f64()
    );
    Ok(RunReport {
        algorithm,
        wall_time,
        solution,
        node_count,
        refine,
    })
}

/// Process exit code of a solver status.
pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::Trivial => 0,
        SolveStatus::Infeasible | SolveStatus::TargetUnreachableWithPool => 2,
        SolveStatus::Timeout => 3,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlacementDoc {
    pub site_id: u32,
    pub x: f64,
    pub y: f64,
    pub height_index: usize,
    pub height_m: f64,
    pub orient_index: usize,
    pub orientation_rad: f64,
    pub tiles: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CostDoc {
    pub site_use: f64,
    pub hardware: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoverageDoc {
    pub covered: usize,
    pub num_grids: usize,
    pub required: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridDoc {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub effective_dbm: f64,
}

/// `solution.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolutionDoc {
    pub algorithm: Algorithm,
    pub status: String,
    pub scenario_sha256: String,
    pub p_min_dbm: f64,
    pub eta0: f64,
    pub site_cost: f64,
    pub tile_cost: f64,
    pub elements_per_tile: u32,
    pub placements: Vec<PlacementDoc>,
    pub cost: CostDoc,
    pub coverage: CoverageDoc,
    pub grids: Vec<GridDoc>,
}

impl SolutionDoc {
    pub fn new(
        algorithm: Algorithm,
        sol: &DeploymentSolution,
        scene: &Scene,
        instance: &Instance,
        p_min_dbm: f64,
        scenario_sha256: &str,
    ) -> SolutionDoc {
        let placements = sol
            .placements
            .iter()
            .map(|p| {
                let site = scene.site(p.site_id).expect("placement site exists");
                PlacementDoc {
                    site_id: p.site_id,
                    x: site.position.x,
                    y: site.position.y,
                    height_index: p.height_index,
                    height_m: site.heights[p.height_index - 1],
                    orient_index: p.orient_index,
                    orientation_rad: site.orientations[p.orient_index - 1],
                    tiles: p.tiles,
                }
            })
            .collect();
        let grids = scene
            .grids()
            .iter()
            .map(|g| GridDoc {
                id: g.id,
                x: g.center.x,
                y: g.center.y,
                effective_dbm: mw_to_dbm(sol.per_grid_power[g.id as usize - 1]),
            })
            .collect();
        SolutionDoc {
            algorithm,
            status: sol.status.as_str().to_string(),
            scenario_sha256: scenario_sha256.to_string(),
            p_min_dbm,
            eta0: instance.coverage_params().eta0,
            site_cost: instance.cost_params().site_cost,
            tile_cost: instance.cost_params().tile_cost,
            elements_per_tile: instance.elements_per_tile(),
            placements,
            cost: CostDoc {
                site_use: sol.cost.site_use,
                hardware: sol.cost.hardware,
                total: sol.cost.total,
            },
            coverage: CoverageDoc {
                covered: sol.covered,
                num_grids: instance.num_grids(),
                required: instance.required_count(),
                rate: sol.coverage_rate,
            },
            grids,
        }
    }

    pub fn placements(&self) -> Vec<irsplan_core::Placement> {
        self.placements
            .iter()
            .map(|p| irsplan_core::Placement {
                site_id: p.site_id,
                height_index: p.height_index,
                orient_index: p.orient_index,
                tiles: p.tiles,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SwapDoc {
    pub position: usize,
    pub removed: u32,
    pub added: u32,
    pub cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RefineDoc {
    pub stage: String,
    pub lp_pool: Vec<u32>,
    pub lp_fallback: bool,
    pub pool_fallback: bool,
    pub final_pool: Vec<u32>,
    pub swaps: Vec<SwapDoc>,
}

/// `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDoc {
    pub algorithm: Algorithm,
    pub status: String,
    pub wall_time_s: f64,
    pub node_count: Option<usize>,
    pub seed: Option<u64>,
    pub time_limit_s: Option<f64>,
    pub refine: Option<RefineDoc>,
    pub solution: SolutionDoc,
}

impl ReportDoc {
    pub fn new(report: &RunReport, solution: SolutionDoc, seed: Option<u64>, time_limit: Option<Duration>) -> Self {
        ReportDoc {
            algorithm: report.algorithm,
            status: report.status().as_str().to_string(),
            wall_time_s: report.wall_time.as_secs_f64(),
            node_count: report.node_count,
            seed,
            time_limit_s: time_limit.map(|d| d.as_secs_f64()),
            refine: report.refine.as_ref().map(|r| RefineDoc {
                stage: r.stage.as_str().to_string(),
                lp_pool: r.lp_pool.clone(),
                lp_fallback: r.lp_fallback,
                pool_fallback: r.pool_fallback,
                final_pool: r.final_pool.clone(),
                swaps: r
                    .swaps
                    .iter()
                    .map(|s| SwapDoc {
                        position: s.position,
                        removed: s.removed,
                        added: s.added,
                        cost: s.cost,
                    })
                    .collect(),
            }),
            solution,
        }
    }
}
