//! Shared fixtures: the seeded desk-scale random suite and an exhaustive
//! enumeration oracle that works straight from the knowledge tables.
#![allow(dead_code)]

use irsplan_core::propagation::{DirectEntry, LinkEntry};
use irsplan_core::{ChannelKnowledge, CostParams, CoverageParams, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `M²` of every generated instance.
pub const M2: u32 = 4;
pub const SUITE_SEEDS: u64 = 100;

pub struct Case {
    pub seed: u64,
    pub knowledge: ChannelKnowledge,
    pub instance: Instance,
    pub num_sites: u32,
    pub num_grids: u32,
    pub max_tiles: u32,
    pub site_cost: f64,
    pub tile_cost: f64,
    pub p_min: f64,
    pub eta0: f64,
}

/// Random instance: 3 to 6 sites, 1 to 3 tiles, two heights and two
/// orientations per site (the first one at zero), 6 to 12 grids.
pub fn suite_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
    let num_sites = rng.gen_range(3..=6u32);
    let num_grids = rng.gen_range(6..=12u32);
    let max_tiles = rng.gen_range(1..=3u32);
    let p_min = 1e-7;
    let eta0 = rng.gen_range(0.5..=1.0);
    let (site_cost, tile_cost) = if seed.is_multiple_of(2) {
        (rng.gen_range(3..=15) as f64, rng.gen_range(1..=3) as f64)
    } else {
        (rng.gen_range(2.0..15.0), rng.gen_range(0.5..3.0))
    };
    let m4 = f64::from(M2 * M2);
    let mut k = ChannelKnowledge::default();
    for n in 1..=num_grids {
        let b = p_min * 10f64.powf(rng.gen_range(-3.0..0.3));
        k.direct.insert(n, DirectEntry { power_mw: b, paths: 1 });
    }
    let mut shapes = Vec::new();
    for i in 1..=num_sites {
        for j in 1..=2 {
            for o in 1..=2 {
                let sigma = 10f64.powf(rng.gen_range(-0.5..0.5));
                k.irs_incident.insert((i, j, o), LinkEntry { value: sigma, paths: 1 });
                for n in 1..=num_grids {
                    if rng.gen_bool(0.6) {
                        let omega = p_min * 10f64.powf(rng.gen_range(-1.8..0.4)) / (m4 * sigma);
                        k.irs_departing.insert((i, j, o, n), LinkEntry { value: omega, paths: 2 });
                    }
                }
            }
        }
        shapes.push((i, 2, 2, Some(1)));
    }
    let instance = Instance::from_knowledge(
        &k,
        num_grids as usize,
        &shapes,
        max_tiles,
        M2,
        CostParams::new(site_cost, tile_cost).unwrap(),
        CoverageParams::new(p_min, eta0).unwrap(),
    )
    .unwrap();
    Case {
        seed,
        knowledge: k,
        instance,
        num_sites,
        num_grids,
        max_tiles,
        site_cost,
        tile_cost,
        p_min,
        eta0,
    }
}

/// Which configurations the oracle may use.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Restrict {
    None,
    FixedState,
    MaxTile,
}

/// Minimum cost over every assignment of "nothing or one (t, j, k)" to each
/// site, or `None` if no assignment reaches the target.
pub fn brute_force_optimum(case: &Case, restrict: Restrict) -> Option<f64> {
    let n = case.num_grids as usize;
    let m4 = f64::from(M2 * M2);
    let required = (1..=n).find(|&c| c as f64 / n as f64 >= case.eta0).unwrap_or(n);
    // options[i] = list of (cost, gain per grid)
    let mut options: Vec<Vec<(f64, Vec<f64>)>> = Vec::new();
    for i in 1..=case.num_sites {
        let mut opts = Vec::new();
        for t in 1..=case.max_tiles {
            if restrict == Restrict::MaxTile && t != case.max_tiles {
                continue;
            }
            for j in 1..=2usize {
                for o in 1..=2usize {
                    if restrict == Restrict::FixedState && (j, o) != (1, 1) {
                        continue;
                    }
                    let gains = (1..=case.num_grids)
                        .map(|g| f64::from(t * t) * m4 * link(case, i, j, o, g))
                        .collect();
                    opts.push((case.site_cost + case.tile_cost * f64::from(t), gains));
                }
            }
        }
        options.push(opts);
    }
    let beta: Vec<f64> = (1..=case.num_grids).map(|g| case.knowledge.direct[&g].power_mw).collect();
    let mut best = f64::INFINITY;
    dfs(&options, 0, &beta, 0.0, case.p_min, required, &mut best);
    best.is_finite().then_some(best)
}

fn dfs(options: &[Vec<(f64, Vec<f64>)>], i: usize, power: &[f64], cost: f64, p_min: f64, required: usize, best: &mut f64) {
    if cost >= *best {
        return;
    }
    if i == options.len() {
        if power.iter().filter(|&&p| p >= p_min).count() >= required {
            *best = cost;
        }
        return;
    }
    dfs(options, i + 1, power, cost, p_min, required, best);
    for (c, gains) in &options[i] {
        let next: Vec<f64> = power.iter().zip(gains).map(|(p, g)| p + g).collect();
        dfs(options, i + 1, &next, cost + c, p_min, required, best);
    }
}

/// `σ² ω² / (L₀ᵢ Lᵢₙ)` read from the tables.
fn link(case: &Case, i: u32, j: usize, o: usize, g: u32) -> f64 {
    match (
        case.knowledge.irs_incident.get(&(i, j, o)),
        case.knowledge.irs_departing.get(&(i, j, o, g)),
    ) {
        (Some(a), Some(b)) => a.value * b.value / f64::from(a.paths * b.paths),
        _ => 0.0,
    }
}

/// Independent coverage count of a set of placements.
pub fn recount(case: &Case, placements: &[irsplan_core::Placement]) -> usize {
    let m4 = f64::from(M2 * M2);
    (1..=case.num_grids)
        .filter(|&g| {
            let mut p = case.knowledge.direct[&g].power_mw;
            for pl in placements {
                p += f64::from(pl.tiles * pl.tiles) * m4 * link(case, pl.site_id, pl.height_index, pl.orient_index, g);
            }
            p >= case.p_min
        })
        .count()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn table(id: u32, states: Vec<Vec<f64>>) -> irsplan_core::metrics::SiteTable {
    irsplan_core::metrics::SiteTable {
        id,
        num_heights: 1,
        num_orients: states.len(),
        zero_orient: Some(1),
        kappa: states,
    }
}

/// Three sites, six grids, one height and two orientations each, `M² = 1`
/// so a configuration adds `t² κ`. `P_min = 1`, η₀ = 0.8 (five grids) and
/// grid 6 is covered by the direct path alone.
///
/// Hand execution of the sequential deployment:
///
/// ```text
/// round 1 (covered {6})
///   A: T=1 best (1,2) covers 2, T=2 best (1,1) covers 4 -> T*=2, η=4
///   B: T=1 best (1,2) covers 2, T=2 best (1,1) covers 3 -> T*=2, η=3
///   C: T=1 covers 1,            T=2 (1,1) covers 3      -> T*=2, η=3
///   nobody reaches 5: take the largest η -> A (T=2, (1,1))
/// round 2 (covered {1,2,3,6})
///   B: T=1 (1,2) covers 5, T=2 (1,1) covers 6 -> target met, T*=1, η=5
///   C: T=1 covers 4,       T=2 (1,1) covers 6 -> T*=2, η=6
///   both reach 5: smallest T wins -> B (T=1, (1,2)), not the wider C
/// result: A(T=2,h1,o1) + B(T=1,h1,o2), 5 of 6 grids, cost 2·10 + 3·1 = 23
/// ```
pub fn alg1_fixture() -> Instance {
    Instance::from_tables(
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        vec![
            table(1, vec![vec![0.3, 0.3, 0.3, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]]),
            table(2, vec![vec![0.0, 0.0, 0.0, 0.5, 0.3, 0.0], vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]]),
            table(3, vec![vec![0.0, 0.0, 0.0, 0.26, 0.26, 0.0], vec![0.0; 6]]),
        ],
        2,
        1,
        CostParams::new(10.0, 1.0).unwrap(),
        CoverageParams::new(1.0, 0.8).unwrap(),
    )
}

/// Sites 1 and 2 each cover half of four grids; site 3 covers all of them.
/// Starting from the pool {1, 2} (cost 22), swapping site 1 for site 3
/// leaves site 3 alone (cost 11).
pub fn swap_fixture() -> Instance {
    Instance::from_tables(
        vec![0.0; 4],
        vec![
            table(1, vec![vec![1.0, 1.0, 0.0, 0.0]]),
            table(2, vec![vec![0.0, 0.0, 1.0, 1.0]]),
            table(3, vec![vec![1.0, 1.0, 1.0, 1.0]]),
        ],
        1,
        1,
        CostParams::new(10.0, 1.0).unwrap(),
        CoverageParams::new(1.0, 1.0).unwrap(),
    )
}
