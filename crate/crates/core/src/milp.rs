//! Binary ILP model of the deployment problem, a bounded-variable primal
//! simplex for its LP relaxation, and a best-first branch and bound.
//!
//! Variables are `ξ(i, t, j, k)` for every allowed configuration (sites
//! ascending, then `t`, `j`, `k` lexicographic) followed by one `χₙ` per
//! grid. Grid rows are scaled by `1 / P_min`:
//!
//! ```text
//!   χₙ − Σ (α / P_min) ξ ≤ βₙ / P_min,   α = t² M⁴ κ
//! ```

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::metrics::{DeploymentSolution, Instance, Placement, SolveStatus};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum MilpError {
    EmptySiteSet,
    UnknownSite(u32),
    TargetExceedsGrids,
    MissingZeroOrientation(u32),
    NonIntegral(usize),
    DuplicateSite(u32),
    CoverageViolated { covered: usize, required: usize },
    NotInModel(Placement),
}

impl fmt::Display for MilpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MilpError::EmptySiteSet => write!(f, "no candidate sites in the model"),
            MilpError::UnknownSite(i) => write!(f, "unknown site {i}"),
            MilpError::TargetExceedsGrids => write!(f, "coverage target exceeds the number of grids"),
            MilpError::MissingZeroOrientation(i) => {
                write!(f, "site {i} has no zero orientation for the fixed-state baseline")
            }
            MilpError::NonIntegral(v) => write!(f, "variable {v} is not integral"),
            MilpError::DuplicateSite(i) => write!(f, "two configurations selected at site {i}"),
            MilpError::CoverageViolated { covered, required } => {
                write!(f, "decoded solution covers {covered} grids, {required} required")
            }
            MilpError::NotInModel(p) => write!(f, "placement {p:?} is not a model variable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Xi {
        site: u32,
        tiles: u32,
        height: usize,
        orient: usize,
    },
    Chi(u32),
}

impl VarKind {
    pub fn name(&self) -> String {
        match *self {
            VarKind::Xi {
                site,
                tiles,
                height,
                orient,
            } => alloc::format!("xi_{site}_{tiles}_{height}_{orient}"),
            VarKind::Chi(n) => alloc::format!("chi_{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Which configurations enter the model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildOptions {
    /// Only these sites (the restricted problem over a site subset).
    pub restrict_sites: Option<Vec<u32>>,
    /// Only this tile count.
    pub fixed_tiles: Option<u32>,
    /// Only the lowest height and the zero orientation.
    pub fixed_state: bool,
}

/// Binary program: minimize `objective · x` subject to `rows`, `x ∈ {0,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    pub vars: Vec<VarKind>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Minimum covered-grid count (0 when there are no χ variables).
    pub required: usize,
}

impl IlpModel {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Same binary feasible set, tighter relaxation.
    ///
    /// Coefficient strengthening on binaries: with `r` the right-hand side
    /// of a `≤` row and `M` the largest attainable sum of its positive
    /// terms, a term `-a·x` with `a > M - r` is capped at `M - r`, since
    /// `x = 1` already makes the row slack. Rows with `M ≤ r` are dropped.
    pub fn tightened(&self) -> IlpModel {
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let sign = match row.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            let r = sign * row.rhs;
            let max_act: f64 = row.coeffs.iter().map(|&(_, c)| (sign * c).max(0.0)).sum();
            if max_act <= r {
                continue;
            }
            let cap = max_act - r;
            let coeffs = row
                .coeffs
                .iter()
                .map(|&(v, c)| (v, sign * (sign * c).max(-cap)))
                .collect();
            rows.push(Row {
                coeffs,
                sense: row.sense,
                rhs: row.rhs,
            });
        }
        IlpModel {
            vars: self.vars.clone(),
            objective: self.objective.clone(),
            rows,
            required: self.required,
        }
    }

    /// Common step of all objective values when the coefficients are
    /// integers, so any bound can be rounded up to a multiple of it.
    pub fn objective_step(&self) -> Option<f64> {
        let mut g = 0u64;
        for &c in &self.objective {
            let r = libm::round(c);
            if (c - r).abs() > 1e-9 || r.abs() > 1e15 {
                return None;
            }
            let mut a = r.abs() as u64;
            let mut b = g;
            while b != 0 {
                (a, b) = (b, a % b);
            }
            g = a;
        }
        (g > 0).then_some(g as f64)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_index(&self, kind: VarKind) -> Option<usize> {
        self.vars.iter().position(|v| *v == kind)
    }

    /// Indicator vector of a set of placements; `χₙ = 1` on covered grids.
    pub fn encode(&self, instance: &Instance, placements: &[Placement]) -> Result<Vec<f64>, MilpError> {
        let mut x = vec![0.0; self.vars.len()];
        for p in placements {
            let kind = VarKind::Xi {
                site: p.site_id,
                tiles: p.tiles,
                height: p.height_index,
                orient: p.orient_index,
            };
            let v = self.var_index(kind).ok_or(MilpError::NotInModel(*p))?;
            x[v] = 1.0;
        }
        let powers = instance.powers(placements);
        let p_min = instance.coverage_params().p_min_mw;
        for (v, kind) in self.vars.iter().enumerate() {
            if let VarKind::Chi(n) = kind {
                if powers[*n as usize - 1] >= p_min {
                    x[v] = 1.0;
                }
            }
        }
        Ok(x)
    }

    /// Writes the model in CPLEX LP text format.
    pub fn write_lp<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        writeln!(out, "\\ irs deployment model")?;
        writeln!(out, "Minimize")?;
        write!(out, " obj:")?;
        let mut any = false;
        for (v, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                write!(out, " + {c:e} {}", self.vars[v].name())?;
                any = true;
            }
        }
        if !any {
            write!(out, " 0 {}", self.vars.first().map(|v| v.name()).unwrap_or_default())?;
        }
        writeln!(out)?;
        writeln!(out, "Subject To")?;
        for (r, row) in self.rows.iter().enumerate() {
            write!(out, " r{}:", r + 1)?;
            for &(v, a) in &row.coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                write!(out, " {sign} {:e} {}", a.abs(), self.vars[v].name())?;
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
            };
            writeln!(out, " {op} {:e}", row.rhs)?;
        }
        writeln!(out, "Binary")?;
        for v in &self.vars {
            writeln!(out, " {}", v.name())?;
        }
        writeln!(out, "End")
    }

    pub fn to_lp_string(&self) -> String {
        let mut s = String::new();
        let _ = self.write_lp(&mut s);
        s
    }
}

fn config_sites(instance: &Instance, opts: &BuildOptions) -> Result<Vec<u32>, MilpError> {
    let mut sites: Vec<u32> = match &opts.restrict_sites {
        Some(list) => {
            for &i in list {
                if i == 0 || i as usize > instance.num_sites() {
                    return Err(MilpError::UnknownSite(i));
                }
            }
            list.clone()
        }
        None => instance.sites().iter().map(|s| s.id).collect(),
    };
    sites.sort_unstable();
    sites.dedup();
    if sites.is_empty() {
        return Err(MilpError::EmptySiteSet);
    }
    Ok(sites)
}

/// ξ variables and their per-grid scaled gains.
fn xi_columns(
    instance: &Instance,
    opts: &BuildOptions,
    sites: &[u32],
) -> Result<Vec<(VarKind, f64)>, MilpError> {
    let cost = instance.cost_params();
    let mut out = Vec::new();
    for &i in sites {
        let site = instance.site(i);
        let (heights, orients): (Vec<usize>, Vec<usize>) = if opts.fixed_state {
            let k = site.zero_orient.ok_or(MilpError::MissingZeroOrientation(i))?;
            (vec![1], vec![k])
        } else {
            ((1..=site.num_heights).collect(), (1..=site.num_orients).collect())
        };
        let tiles: Vec<u32> = match opts.fixed_tiles {
            Some(t) => vec![t.clamp(1, instance.max_tiles())],
            None => (1..=instance.max_tiles()).collect(),
        };
        for &t in &tiles {
            for &j in &heights {
                for &k in &orients {
                    out.push((
                        VarKind::Xi {
                            site: i,
                            tiles: t,
                            height: j,
                            orient: k,
                        },
                        cost.config_cost(t),
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn site_rows(sites: &[u32], vars: &[VarKind]) -> Vec<Row> {
    sites
        .iter()
        .map(|&i| Row {
            coeffs: vars
                .iter()
                .enumerate()
                .filter(|(_, v)| matches!(v, VarKind::Xi { site, .. } if *site == i))
                .map(|(idx, _)| (idx, 1.0))
                .collect(),
            sense: Sense::Le,
            rhs: 1.0,
        })
        .collect()
}

/// Scaled `α / P_min` terms of grid `g` (0-based).
fn grid_terms(instance: &Instance, vars: &[VarKind], g: usize) -> Vec<(usize, f64)> {
    let p_min = instance.coverage_params().p_min_mw;
    let mut terms = Vec::new();
    for (idx, v) in vars.iter().enumerate() {
        if let VarKind::Xi {
            site,
            tiles,
            height,
            orient,
        } = *v
        {
            let st = instance.site(site).state(height, orient);
            let alpha = instance.gain(site, st, tiles, g);
            if alpha > 0.0 {
                terms.push((idx, -alpha / p_min));
            }
        }
    }
    terms
}

/// The full deployment ILP (optionally restricted, or pruned to a baseline's
/// configuration set).
pub fn build_p1(instance: &Instance, opts: &BuildOptions) -> Result<IlpModel, MilpError> {
    let sites = config_sites(instance, opts)?;
    let n = instance.num_grids();
    let required = instance.required_count();
    if required > n {
        return Err(MilpError::TargetExceedsGrids);
    }
    let cols = xi_columns(instance, opts, &sites)?;
    let mut vars: Vec<VarKind> = cols.iter().map(|c| c.0).collect();
    let mut objective: Vec<f64> = cols.iter().map(|c| c.1).collect();
    let chi0 = vars.len();
    for g in 1..=n as u32 {
        vars.push(VarKind::Chi(g));
        objective.push(0.0);
    }
    let mut rows = site_rows(&sites, &vars);
    let p_min = instance.coverage_params().p_min_mw;
    for g in 0..n {
        let mut coeffs = vec![(chi0 + g, 1.0)];
        coeffs.extend(grid_terms(instance, &vars, g));
        rows.push(Row {
            coeffs,
            sense: Sense::Le,
            rhs: instance.beta()[g] / p_min,
        });
    }
    rows.push(Row {
        coeffs: (chi0..chi0 + n).map(|v| (v, 1.0)).collect(),
        sense: Sense::Ge,
        rhs: required as f64,
    });
    Ok(IlpModel {
        vars,
        objective,
        rows,
        required,
    })
}

/// The model with every `χₙ` fixed to one: every grid must be covered.
pub fn build_p21(instance: &Instance) -> Result<IlpModel, MilpError> {
    let opts = BuildOptions::default();
    let sites = config_sites(instance, &opts)?;
    let cols = xi_columns(instance, &opts, &sites)?;
    let vars: Vec<VarKind> = cols.iter().map(|c| c.0).collect();
    let objective: Vec<f64> = cols.iter().map(|c| c.1).collect();
    let mut rows = site_rows(&sites, &vars);
    let p_min = instance.coverage_params().p_min_mw;
    for g in 0..instance.num_grids() {
        rows.push(Row {
            coeffs: grid_terms(instance, &vars, g),
            sense: Sense::Le,
            rhs: instance.beta()[g] / p_min - 1.0,
        });
    }
    Ok(IlpModel {
        vars,
        objective,
        rows,
        required: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

/// LP relaxation of the model with every variable in `[0, 1]`.
pub fn lp_solve(model: &IlpModel) -> LpSolution {
    let n = model.num_vars();
    lp_solve_bounded(model, &vec![0.0; n], &vec![1.0; n])
}

/// LP relaxation with explicit per-variable bounds.
pub fn lp_solve_bounded(model: &IlpModel, lower: &[f64], upper: &[f64]) -> LpSolution {
    Simplex::new(model, lower, upper).solve(&model.objective)
}

/// Dense bounded-variable tableau simplex.
///
/// Columns are the structural variables, one slack per row and one
/// artificial per row. Every nonbasic variable sits at one of its bounds.
struct Simplex {
    m: usize,
    n0: usize,
    cols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
}

enum Phase {
    Done,
    Unbounded,
    Limit,
}

impl Simplex {
    fn new(model: &IlpModel, lower: &[f64], upper: &[f64]) -> Simplex {
        let m = model.rows.len();
        let n0 = model.vars.len();
        let cols = n0 + 2 * m;
        let mut lo = vec![0.0; cols];
        let mut hi = vec![0.0; cols];
        lo[..n0].copy_from_slice(lower);
        hi[..n0].copy_from_slice(upper);
        for s in 0..m {
            hi[n0 + s] = f64::INFINITY;
        }
        let mut x = lo.clone();
        let mut t = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut is_basic = vec![false; cols];
        for (r, row) in model.rows.iter().enumerate() {
            let tr = &mut t[r * cols..(r + 1) * cols];
            let mut resid = row.rhs;
            for &(v, a) in &row.coeffs {
                tr[v] += a;
                resid -= a * x[v];
            }
            let slack_sign = match row.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            tr[n0 + r] = slack_sign;
            let s_val = resid * slack_sign;
            if s_val >= 0.0 {
                if slack_sign < 0.0 {
                    tr.iter_mut().for_each(|v| *v = -*v);
                }
                basis[r] = n0 + r;
                x[n0 + r] = s_val;
            } else {
                // slack stays at zero, an artificial takes the residual
                let a = n0 + m + r;
                hi[a] = f64::INFINITY;
                tr[a] = if resid >= 0.0 { 1.0 } else { -1.0 };
                if resid < 0.0 {
                    tr.iter_mut().for_each(|v| *v = -*v);
                }
                basis[r] = a;
                x[a] = resid.abs();
            }
            is_basic[basis[r]] = true;
        }
        Simplex {
            m,
            n0,
            cols,
            t,
            basis,
            is_basic,
            x,
            lo,
            hi,
            d: vec![0.0; cols],
            iterations: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n0 + self.m
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let tr = &self.t[r * self.cols..(r + 1) * self.cols];
                for (dj, &a) in self.d.iter_mut().zip(tr) {
                    *dj -= cb * a;
                }
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.is_basic[j] || self.hi[j] <= self.lo[j] {
                continue;
            }
            let dj = self.d[j];
            let at_lo = self.x[j] <= self.lo[j];
            let dir = if at_lo && dj < -OPT_TOL {
                1.0
            } else if !at_lo && dj > OPT_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| dj.abs() > self.d[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn iterate(&mut self, cost: &[f64]) -> Phase {
        self.price(cost);
        let mut streak = 0usize;
        loop {
            if self.iterations > 200 * (self.m + self.cols) + 10_000 {
                return Phase::Limit;
            }
            let Some((j, dir)) = self.entering(streak >= DEGENERATE_STREAK) else {
                return Phase::Done;
            };
            self.iterations += 1;
            let bland = streak >= DEGENERATE_STREAK;
            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = dir * self.t[r * self.cols + j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[r];
                let lim = if a > 0.0 {
                    (self.x[b] - self.lo[b]) / a
                } else if self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / -a
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                let better = match leave {
                    None => lim < theta,
                    Some((lr, la)) => {
                        if lim < theta - 1e-12 {
                            true
                        } else if lim <= theta + 1e-12 {
                            if bland {
                                b < self.basis[lr]
                            } else {
                                a.abs() > la.abs() || (a.abs() == la.abs() && b < self.basis[lr])
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = if leave.is_some() { theta.min(lim) } else { lim };
                    leave = Some((r, a));
                }
            }
            if !theta.is_finite() {
                return Phase::Unbounded;
            }
            if theta > 1e-12 {
                streak = 0;
            } else {
                streak += 1;
            }
            let step = dir * theta;
            if step != 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * self.cols + j];
                    if a != 0.0 {
                        let b = self.basis[r];
                        self.x[b] -= a * step;
                    }
                }
            }
            match leave {
                None => {
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some((r, a)) => {
                    self.x[j] += step;
                    let b = self.basis[r];
                    self.x[b] = if a > 0.0 { self.lo[b] } else { self.hi[b] };
                    self.pivot(r, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[j] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for other in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = other[j];
            if f != 0.0 {
                for (o, &pv) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * pv;
                }
                other[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (o, &pv) in self.d.iter_mut().zip(prow.iter()) {
                *o -= f * pv;
            }
            self.d[j] = 0.0;
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    fn solve(mut self, objective: &[f64]) -> LpSolution {
        let art0 = self.n0 + self.m;
        let needs_phase1 = self.basis.iter().any(|&b| b >= art0);
        if needs_phase1 {
            let mut c1 = vec![0.0; self.cols];
            c1[art0..].iter_mut().for_each(|c| *c = 1.0);
            match self.iterate(&c1) {
                Phase::Done => {}
                Phase::Unbounded | Phase::Limit => return self.result(objective, LpStatus::IterationLimit),
            }
            let infeas: f64 = self.x[art0..].iter().sum();
            if infeas > FEAS_TOL {
                return self.result(objective, LpStatus::Infeasible);
            }
            for a in art0..self.cols {
                self.hi[a] = 0.0;
                self.lo[a] = 0.0;
                self.x[a] = 0.0;
            }
            self.drive_out_artificials();
        }
        let mut c2 = vec![0.0; self.cols];
        c2[..self.n0].copy_from_slice(objective);
        match self.iterate(&c2) {
            Phase::Done => self.result(objective, LpStatus::Optimal),
            Phase::Unbounded => self.result(objective, LpStatus::Unbounded),
            Phase::Limit => self.result(objective, LpStatus::IterationLimit),
        }
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row = &self.t[r * self.cols..(r + 1) * self.cols];
            let cand = (0..self.n0 + self.m)
                .filter(|&j| !self.is_basic[j])
                .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)));
            if let Some(j) = cand {
                if row[j].abs() > 1e-9 {
                    self.pivot(r, j);
                }
            }
        }
    }

    fn result(&self, objective: &[f64], status: LpStatus) -> LpSolution {
        let values: Vec<f64> = (0..self.n0)
            .map(|v| self.x[v].clamp(self.lo[v], self.hi[v]))
            .collect();
        let obj = values.iter().zip(objective).map(|(x, c)| x * c).sum();
        LpSolution {
            values,
            objective: obj,
            status,
            iterations: self.iterations,
        }
    }
}

/// Polled between node solves; returning true ends the search early.
pub trait StopCheck {
    fn should_stop(&self) -> bool;
}

/// Never stops.
pub struct NoLimit;

impl StopCheck for NoLimit {
    fn should_stop(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbResult {
    /// Best deployment found; empty with status `Infeasible` when none.
    pub solution: DeploymentSolution,
    /// Number of LP relaxations solved.
    pub nodes: usize,
    /// Objective of the root relaxation (`+∞` if infeasible).
    pub root_bound: f64,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    fixes: Vec<(usize, bool)>,
    lp: LpSolution,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // max-heap: the smallest bound, then the deepest, then the oldest is greatest
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&o.depth))
            .then(o.id.cmp(&self.id))
    }
}

fn xi_placements(model: &IlpModel, values: &[f64]) -> Vec<Placement> {
    model
        .vars
        .iter()
        .zip(values)
        .filter_map(|(v, &x)| match *v {
            VarKind::Xi {
                site,
                tiles,
                height,
                orient,
            } if x > 0.5 => Some(Placement {
                site_id: site,
                height_index: height,
                orient_index: orient,
                tiles,
            }),
            _ => None,
        })
        .collect()
}

/// Turns an integral assignment into a deployment, re-evaluating power,
/// coverage and cost from the instance tables.
pub fn decode_solution(model: &IlpModel, instance: &Instance, values: &[f64]) -> Result<DeploymentSolution, MilpError> {
    for (v, &x) in values.iter().enumerate() {
        if x.abs() > INT_TOL && (x - 1.0).abs() > INT_TOL {
            return Err(MilpError::NonIntegral(v));
        }
    }
    let placements = xi_placements(model, values);
    for w in placements.windows(2) {
        if w[0].site_id == w[1].site_id {
            return Err(MilpError::DuplicateSite(w[0].site_id));
        }
    }
    let sol = instance.evaluate(&placements);
    let required = instance.required_count();
    if sol.covered < required {
        return Err(MilpError::CoverageViolated {
            covered: sol.covered,
            required,
        });
    }
    Ok(sol)
}

/// Best-first branch and bound on the model.
///
/// `warm` is used as the initial incumbent when it is feasible and all its
/// placements are model variables.
pub fn branch_and_bound(
    model: &IlpModel,
    instance: &Instance,
    warm: Option<&DeploymentSolution>,
    stop: &dyn StopCheck,
) -> BbResult {
    let nv = model.num_vars();
    let required = instance.required_count();
    let tight = model.tightened();
    let step = model.objective_step();
    // a node whose bound cannot beat the incumbent by a full objective step is dead
    let dominated = |bound: f64, inc: f64| match step {
        Some(g) => libm::ceil((bound - INT_TOL) / g) * g >= inc - PRUNE_TOL,
        None => bound >= inc - PRUNE_TOL,
    };
    let mut incumbent: Option<DeploymentSolution> = warm
        .filter(|w| w.covered >= required && model.encode(instance, &w.placements).is_ok())
        .map(|w| instance.evaluate(&w.placements));
    let inc_cost = |inc: &Option<DeploymentSolution>| inc.as_ref().map_or(f64::INFINITY, |s| s.cost.total);

    let mut nodes = 0usize;
    let mut next_id = 0usize;
    let mut timed_out = false;
    let mut heap = BinaryHeap::new();

    let solve_node = |fixes: &[(usize, bool)]| {
        let mut lo = vec![0.0; nv];
        let mut hi = vec![1.0; nv];
        for &(v, one) in fixes {
            let b = if one { 1.0 } else { 0.0 };
            lo[v] = b;
            hi[v] = b;
        }
        lp_solve_bounded(&tight, &lo, &hi)
    };

    let root_bound;
    if stop.should_stop() {
        timed_out = true;
        root_bound = f64::INFINITY;
    } else {
        let lp = solve_node(&[]);
        nodes += 1;
        root_bound = if lp.status == LpStatus::Optimal {
            lp.objective
        } else {
            f64::INFINITY
        };
        if lp.status == LpStatus::Optimal {
            heap.push(Node {
                bound: lp.objective,
                depth: 0,
                id: next_id,
                fixes: Vec::new(),
                lp,
            });
            next_id += 1;
        }
    }

    while let Some(node) = heap.pop() {
        if dominated(node.bound, inc_cost(&incumbent)) {
            continue;
        }
        let values = &node.lp.values;
        let xi_integral = model
            .vars
            .iter()
            .zip(values)
            .all(|(v, &x)| !matches!(v, VarKind::Xi { .. }) || x.min(1.0 - x).abs() <= INT_TOL);
        if xi_integral {
            let sol = instance.evaluate(&xi_placements(model, values));
            if sol.covered >= required {
                if sol.cost.total < inc_cost(&incumbent) {
                    incumbent = Some(sol);
                }
                continue;
            }
        }
        let fixed: Vec<bool> = {
            let mut f = vec![false; nv];
            node.fixes.iter().for_each(|&(v, _)| f[v] = true);
            f
        };
        // ξ first: χ follows from ξ, so χ branches are a last resort
        let mut branch: Option<(bool, usize, f64)> = None;
        for (v, &x) in values.iter().enumerate() {
            let frac = x.min(1.0 - x);
            if frac > INT_TOL && !fixed[v] {
                let is_chi = matches!(model.vars[v], VarKind::Chi(_));
                let dist = (x - 0.5).abs();
                if branch.is_none_or(|(c, _, d)| (is_chi, dist) < (c, d)) {
                    branch = Some((is_chi, v, dist));
                }
            }
        }
        let var = match branch {
            Some((_, v, _)) => v,
            None => match (0..nv).find(|&v| !fixed[v]) {
                Some(v) => v,
                None => continue,
            },
        };
        for one in [false, true] {
            if stop.should_stop() {
                timed_out = true;
                break;
            }
            let mut fixes = node.fixes.clone();
            fixes.push((var, one));
            let lp = solve_node(&fixes);
            nodes += 1;
            if lp.status == LpStatus::Optimal && !dominated(lp.objective, inc_cost(&incumbent)) {
                heap.push(Node {
                    bound: lp.objective,
                    depth: node.depth + 1,
                    id: next_id,
                    fixes,
                    lp,
                });
                next_id += 1;
            }
        }
        if timed_out {
            break;
        }
    }

    let solution = match incumbent {
        Some(mut s) => {
            s.status = if timed_out {
                SolveStatus::Timeout
            } else {
                SolveStatus::Optimal
            };
            s
        }
        None => {
            let mut s = instance.empty_solution();
            s.status = if timed_out {
                SolveStatus::Timeout
            } else {
                SolveStatus::Infeasible
            };
            s
        }
    };
    BbResult {
        solution,
        nodes,
        root_bound,
    }
}
