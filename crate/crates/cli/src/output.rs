//! CSV tables and JSON metadata.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so every file round-trips exactly.

use std::path::Path;

use nrfermion::analytic;
use nrfermion::series::StandardErrors;
use nrfermion::ObservableSeries;
use serde::Serialize;

use crate::error::CliError;

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_float(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Table, CliError> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Io(format!("{} row {}: {e}", path.display(), n + 1)))?;
            if row.len() != header.len() {
                return Err(CliError::Io(format!("{} row {}: wrong column count", path.display(), n + 1)));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

/// Shortest round-trip text, in exponent form for very small or large values.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Column names of a series: `t`, `n_j`, `I_j_l`, `D`, `S_cut`, `nk_m`,
/// with `_se` twins for ensemble standard errors.
pub fn series_table(s: &ObservableSeries, bonds: &[(usize, usize)], doublons: bool) -> Table {
    let sites = s.sites();
    let has_current = s.current.first().is_some_and(|c| !c.is_empty());
    let cuts = if s.entropy.first().is_some_and(|e| !e.is_empty()) { &s.cuts[..] } else { &[] };
    let nk = s.momentum.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    let mut names = Vec::new();
    names.extend((0..sites).map(|j| format!("n_{j}")));
    if has_current {
        names.extend(bonds.iter().map(|(j, l)| format!("I_{j}_{l}")));
    }
    if doublons {
        names.push("D".into());
    }
    names.extend(cuts.iter().map(|c| format!("S_{c}")));
    header.extend(names.iter().cloned());
    header.extend((0..nk).map(|m| format!("nk_{m}")));
    let se = s.errors.as_ref();
    if se.is_some() {
        header.extend(names.iter().map(|n| format!("{n}_se")));
    }
    let mut t = Table::new(header);
    for i in 0..s.len() {
        let mut row = vec![s.times[i]];
        row.extend(&s.density[i]);
        if has_current {
            row.extend(&s.current[i]);
        }
        if doublons {
            row.push(s.doublons[i]);
        }
        if !cuts.is_empty() {
            row.extend(&s.entropy[i]);
        }
        if nk > 0 {
            row.extend(&s.momentum[i]);
        }
        if let Some(e) = se {
            row.extend(&e.density[i]);
            if has_current {
                row.extend(&e.current[i]);
            }
            if doublons {
                row.push(e.doublons[i]);
            }
            if !cuts.is_empty() {
                row.extend(&e.entropy[i]);
            }
        }
        t.push(row);
    }
    t
}

/// Rebuilds a series from a table written by [`series_table`]. Momentum
/// columns are taken to sit on the ring grid 2πm/L.
pub fn table_series(t: &Table) -> Result<ObservableSeries, CliError> {
    let tcol = t.column("t").ok_or_else(|| CliError::Io("table has no t column".into()))?;
    let mut density = Vec::new();
    let mut current = Vec::new();
    let mut dcol = None;
    let mut entropy = Vec::new();
    let mut momentum = Vec::new();
    let mut errs = (Vec::new(), Vec::new(), None, Vec::new());
    for (c, name) in t.header.iter().enumerate() {
        let (base, is_se) = match name.strip_suffix("_se") {
            Some(b) => (b, true),
            None => (name.as_str(), false),
        };
        let (d, cur, dbl, ent) = if is_se {
            (&mut errs.0, &mut errs.1, &mut errs.2, &mut errs.3)
        } else {
            (&mut density, &mut current, &mut dcol, &mut entropy)
        };
        if base == "t" {
            continue;
        } else if base == "D" {
            *dbl = Some(c);
        } else if let Some(r) = base.strip_prefix("nk_") {
            momentum.push((index(r)?, c));
        } else if let Some(r) = base.strip_prefix("n_") {
            d.push((index(r)?, c));
        } else if base.starts_with("I_") {
            cur.push(c);
        } else if let Some(r) = base.strip_prefix("S_") {
            ent.push((index(r)?, c));
        } else {
            return Err(CliError::Io(format!("unknown column '{name}'")));
        }
    }
    let cuts: Vec<usize> = entropy.iter().map(|(c, _)| *c).collect();
    let pick = |row: &[f64], cols: &[(usize, usize)]| cols.iter().map(|(_, c)| row[*c]).collect::<Vec<_>>();
    let pick_c = |row: &[f64], cols: &[usize]| cols.iter().map(|c| row[*c]).collect::<Vec<_>>();
    let momenta = if momentum.is_empty() { vec![] } else { analytic::momentum_grid(momentum.len()) };
    let mut s = ObservableSeries::new(cuts, momenta);
    let mut se = StandardErrors::default();
    for row in &t.rows {
        s.times.push(row[tcol]);
        s.density.push(pick(row, &density));
        s.current.push(pick_c(row, &current));
        s.doublons.push(dcol.map_or(0.0, |c| row[c]));
        s.entropy.push(pick(row, &entropy));
        s.momentum.push(pick(row, &momentum));
        se.density.push(pick(row, &errs.0));
        se.current.push(pick_c(row, &errs.1));
        se.doublons.push(errs.2.map_or(0.0, |c| row[c]));
        se.entropy.push(pick(row, &errs.3));
    }
    if !errs.0.is_empty() {
        s.errors = Some(se);
    }
    Ok(s)
}

fn index(s: &str) -> Result<usize, CliError> {
    s.parse().map_err(|_| CliError::Io(format!("bad column index '{s}'")))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
