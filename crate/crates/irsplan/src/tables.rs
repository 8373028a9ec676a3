//! Channel knowledge on disk: three CSV tables plus a provenance record.
//!
//! ```text
//! direct.csv    grid_id,beta_dbm,L
//! bs_irs.csv    site_id,height_idx,orient_idx,sigma_sq_dbm,L0i
//! irs_grid.csv  site_id,height_idx,orient_idx,grid_id,omega_sq_db,Lin
//! ```
//!
//! Powers are written with 12 decimals so a save/load round trip is exact
//! to well under 1e-12 relative.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use irsplan_core::propagation::{DirectEntry, LinkEntry};
use irsplan_core::units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm};
use irsplan_core::{ChannelKnowledge, Scene};

use crate::error::{CliError, Result};

pub const DIRECT: &str = "direct.csv";
pub const BS_IRS: &str = "bs_irs.csv";
pub const IRS_GRID: &str = "irs_grid.csv";
pub const PROVENANCE: &str = "provenance.json";

const DIRECT_HEADER: [&str; 3] = ["grid_id", "beta_dbm", "L"];
const BS_IRS_HEADER: [&str; 5] = ["site_id", "height_idx", "orient_idx", "sigma_sq_dbm", "L0i"];
const IRS_GRID_HEADER: [&str; 6] = ["site_id", "height_idx", "orient_idx", "grid_id", "omega_sq_db", "Lin"];

fn fmt_db(v: f64) -> String {
    format!("{v:.12}")
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::schema(path, format!("{other:?}")),
    }
}

/// Writes the three tables into `dir` (created if needed).
pub fn save_knowledge(k: &ChannelKnowledge, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_table(
        &dir.join(DIRECT),
        &DIRECT_HEADER,
        k.direct
            .iter()
            .map(|(n, e)| vec![n.to_string(), fmt_db(mw_to_dbm(e.power_mw)), e.paths.to_string()]),
    )?;
    write_table(
        &dir.join(BS_IRS),
        &BS_IRS_HEADER,
        k.irs_incident.iter().map(|((i, j, o), e)| {
            vec![
                i.to_string(),
                j.to_string(),
                o.to_string(),
                fmt_db(mw_to_dbm(e.value)),
                e.paths.to_string(),
            ]
        }),
    )?;
    write_table(
        &dir.join(IRS_GRID),
        &IRS_GRID_HEADER,
        k.irs_departing.iter().map(|((i, j, o, n), e)| {
            vec![
                i.to_string(),
                j.to_string(),
                o.to_string(),
                n.to_string(),
                fmt_db(linear_to_db(e.value)),
                e.paths.to_string(),
            ]
        }),
    )
}

struct Table {
    path: PathBuf,
    rows: Vec<(usize, csv::StringRecord)>,
}

fn read_table(dir: &Path, name: &str, header: &[&str]) -> Result<Table> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(CliError::NotFound {
            what: format!("knowledge table {name}"),
            path,
        });
    }
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| csv_err(&path, e))?;
    let got = r.headers().map_err(|e| csv_err(&path, e))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(CliError::schema(
            &path,
            format!("header must be `{}`", header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| CliError::schema(&path, format!("line {line}: {e}")))?;
        if rec.len() != header.len() {
            return Err(CliError::schema(
                &path,
                format!("line {line}: expected {} columns, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((line, rec));
    }
    Ok(Table { path, rows })
}

impl Table {
    fn field<T: std::str::FromStr>(&self, line: usize, rec: &csv::StringRecord, col: usize, name: &str) -> Result<T> {
        rec[col]
            .parse()
            .map_err(|_| CliError::schema(&self.path, format!("line {line}: `{name}` is not a valid number: `{}`", &rec[col])))
    }

    fn power(&self, line: usize, rec: &csv::StringRecord, col: usize, name: &str) -> Result<f64> {
        let v: f64 = self.field(line, rec, col, name)?;
        if v.is_nan() || v == f64::INFINITY {
            return Err(CliError::schema(&self.path, format!("line {line}: `{name}` must be finite")));
        }
        Ok(v)
    }

    fn check_linear(&self, line: usize, v: f64, paths: u32, zero_paths_ok: bool) -> Result<()> {
        if v < 0.0 {
            return Err(CliError::schema(&self.path, format!("line {line}: negative power")));
        }
        if v > 0.0 && paths == 0 && !zero_paths_ok {
            return Err(CliError::schema(
                &self.path,
                format!("line {line}: zero path count with nonzero power"),
            ));
        }
        Ok(())
    }

    fn duplicate(&self, line: usize) -> CliError {
        CliError::schema(&self.path, format!("line {line}: duplicate key"))
    }
}

/// Reads and validates the three tables in `dir`.
pub fn load_knowledge(dir: &Path) -> Result<ChannelKnowledge> {
    let mut k = ChannelKnowledge::default();

    let t = read_table(dir, DIRECT, &DIRECT_HEADER)?;
    for (line, rec) in &t.rows {
        let n: u32 = t.field(*line, rec, 0, "grid_id")?;
        let mw = dbm_to_mw(t.power(*line, rec, 1, "beta_dbm")?);
        let l: u32 = t.field(*line, rec, 2, "L")?;
        t.check_linear(*line, mw, l, true)?;
        if k.direct.insert(n, DirectEntry { power_mw: mw, paths: l }).is_some() {
            return Err(t.duplicate(*line));
        }
    }

    let t = read_table(dir, BS_IRS, &BS_IRS_HEADER)?;
    for (line, rec) in &t.rows {
        let key = (
            t.field(*line, rec, 0, "site_id")?,
            t.field(*line, rec, 1, "height_idx")?,
            t.field(*line, rec, 2, "orient_idx")?,
        );
        let mw = dbm_to_mw(t.power(*line, rec, 3, "sigma_sq_dbm")?);
        let l: u32 = t.field(*line, rec, 4, "L0i")?;
        t.check_linear(*line, mw, l, false)?;
        if k.irs_incident.insert(key, LinkEntry { value: mw, paths: l }).is_some() {
            return Err(t.duplicate(*line));
        }
    }

    let t = read_table(dir, IRS_GRID, &IRS_GRID_HEADER)?;
    for (line, rec) in &t.rows {
        let key = (
            t.field(*line, rec, 0, "site_id")?,
            t.field(*line, rec, 1, "height_idx")?,
            t.field(*line, rec, 2, "orient_idx")?,
            t.field(*line, rec, 3, "grid_id")?,
        );
        let g = db_to_linear(t.power(*line, rec, 4, "omega_sq_db")?);
        let l: u32 = t.field(*line, rec, 5, "Lin")?;
        t.check_linear(*line, g, l, false)?;
        if k.irs_departing.insert(key, LinkEntry { value: g, paths: l }).is_some() {
            return Err(t.duplicate(*line));
        }
    }
    Ok(k)
}

/// Checks that the tables describe exactly the scene's grids and only its
/// sites and states.
pub fn check_against_scene(k: &ChannelKnowledge, scene: &Scene, dir: &Path) -> Result<()> {
    let n = scene.num_grids() as u32;
    let ids: Vec<u32> = k.direct.keys().copied().collect();
    if ids != (1..=n).collect::<Vec<_>>() {
        return Err(CliError::schema(
            &dir.join(DIRECT),
            format!("expected one row per grid 1..={n}, found {} rows", ids.len()),
        ));
    }
    let state_ok = |i: u32, j: usize, o: usize| {
        scene
            .site(i)
            .is_some_and(|s| (1..=s.heights.len()).contains(&j) && (1..=s.orientations.len()).contains(&o))
    };
    if let Some((i, j, o)) = k.irs_incident.keys().find(|&&(i, j, o)| !state_ok(i, j, o)) {
        return Err(CliError::schema(
            &dir.join(BS_IRS),
            format!("state ({i}, {j}, {o}) is not in the scenario"),
        ));
    }
    if let Some((i, j, o, g)) = k
        .irs_departing
        .keys()
        .find(|&&(i, j, o, g)| !state_ok(i, j, o) || g == 0 || g > n)
    {
        return Err(CliError::schema(
            &dir.join(IRS_GRID),
            format!("entry ({i}, {j}, {o}, {g}) is not in the scenario"),
        ));
    }
    Ok(())
}

/// Loads per-table data keyed by grid id, used by the map export.
pub fn beta_dbm(k: &ChannelKnowledge) -> BTreeMap<u32, f64> {
    k.direct.iter().map(|(n, e)| (*n, mw_to_dbm(e.power_mw))).collect()
}
