//! Dispatch of a validated configuration to the solver tiers.

use std::path::{Path, PathBuf};

use nrfermion::analytic::{self, CorrelationLength};
use nrfermion::fock::{ensemble_average, run_ensemble, StateVector, TrajectoryEngine, TrajectoryOptions};
use nrfermion::gaussian::{self, CorrelationMatrix};
use nrfermion::liouville::{DensityMatrix, Liouvillian};
use nrfermion::{Boundary, InitialState, ModelParams, ObservableSeries, Sample};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Observable, Point, RunConfig, Solver};
use crate::error::CliError;
use crate::output::{series_table, write_json, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scalars of one grid point, in a fixed order per solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub stem: String,
    pub scalars: Vec<(&'static str, f64)>,
}

pub fn stem(index: usize) -> String {
    format!("run_{index:04}")
}

/// Runs every grid point, writing `run_NNNN.csv` and `run_NNNN.json` per
/// point, `summary.csv` and `manifest.json`.
pub fn execute(cfg: &RunConfig, threads: usize) -> Result<Vec<PointResult>, CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let points = cfg.points()?;
    let results: Vec<Result<PointResult, CliError>> =
        points.par_iter().map(|pt| run_point(cfg, pt, threads)).collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_summary(cfg, &points, &results)?;
    write_json(
        &cfg.out_dir.join("manifest.json"),
        &json!({
            "version": VERSION,
            "threads": threads,
            "config": cfg,
            "points": results.len(),
            "files": results.iter().map(|r| &r.stem).collect::<Vec<_>>(),
        }),
    )?;
    Ok(results)
}

fn write_summary(cfg: &RunConfig, points: &[Point], results: &[PointResult]) -> Result<(), CliError> {
    let mut header = vec!["point".to_string()];
    header.extend(cfg.sweeps.iter().map(|s| s.param.name().to_string()));
    if let Some(first) = results.first() {
        header.extend(first.scalars.iter().map(|(n, _)| n.to_string()));
    }
    let mut t = Table::new(header);
    for (pt, r) in points.iter().zip(results) {
        let mut row = vec![pt.index as f64];
        row.extend(pt.values.iter().map(|(_, v)| *v));
        row.extend(r.scalars.iter().map(|(_, v)| *v));
        t.push(row);
    }
    t.write(&cfg.out_dir.join("summary.csv"))
}

fn wants(cfg: &RunConfig, o: Observable) -> bool {
    cfg.observables.contains(&o)
}

/// Drops the observables that were not selected.
fn select(cfg: &RunConfig, s: &mut ObservableSeries) {
    let clear = |v: &mut Vec<Vec<f64>>| v.iter_mut().for_each(Vec::clear);
    if !wants(cfg, Observable::Density) {
        clear(&mut s.density);
        if let Some(e) = &mut s.errors {
            clear(&mut e.density);
        }
    }
    if !wants(cfg, Observable::Current) {
        clear(&mut s.current);
        if let Some(e) = &mut s.errors {
            clear(&mut e.current);
        }
    }
    if !wants(cfg, Observable::Entropy) {
        clear(&mut s.entropy);
        if let Some(e) = &mut s.errors {
            clear(&mut e.entropy);
        }
    }
    if !wants(cfg, Observable::Momentum) {
        clear(&mut s.momentum);
    }
}

fn params_json(p: &ModelParams) -> Value {
    json!({
        "L": p.sites,
        "J": p.hopping,
        "delta": p.interaction,
        "gamma": p.gain,
        "kappa": p.loss,
        "theta": p.gain_phase,
        "phi": p.loss_phase,
        "bc": match p.boundary { Boundary::Periodic => "periodic", Boundary::Open => "open" },
    })
}

/// Site-averaged value of the last row of a profile.
fn final_mean(v: &[Vec<f64>]) -> f64 {
    match v.last() {
        Some(row) if !row.is_empty() => row.iter().sum::<f64>() / row.len() as f64,
        _ => f64::NAN,
    }
}

fn series_scalars(s: &ObservableSeries) -> Vec<(&'static str, f64)> {
    vec![
        ("density_final", final_mean(&s.density)),
        ("current_final", final_mean(&s.current)),
        ("doublons_final", s.doublons.last().copied().unwrap_or(f64::NAN)),
        ("entropy_final", s.entropy.last().and_then(|e| e.first()).copied().unwrap_or(f64::NAN)),
    ]
}

fn run_point(cfg: &RunConfig, pt: &Point, threads: usize) -> Result<PointResult, CliError> {
    let p = pt.params;
    let stem = stem(pt.index);
    let dir = &cfg.out_dir;
    let times = cfg.times();
    let init = cfg.initial();
    let mut extra = serde_json::Map::new();
    let mut files = vec![format!("{stem}.csv")];
    let (mut series, scalars, doublons) = match cfg.solver {
        Solver::Analytic => {
            let (s, scalars) = analytic_point(&p, &init, &times, wants(cfg, Observable::Momentum))?;
            files.push(format!("{stem}_modes.csv"));
            modes_table(&p).write(&dir.join(format!("{stem}_modes.csv")))?;
            (s, scalars, false)
        }
        Solver::Gaussian => {
            let gen = gaussian::build_generator(&p)?;
            let c0 = CorrelationMatrix::from_initial(&init, p.sites)?;
            let ks = analytic::momentum_grid(p.sites);
            let momenta = wants(cfg, Observable::Momentum).then_some(&ks[..]);
            let s = gaussian::evolve_series(&gen, &c0, &times, momenta)?;
            let scalars = series_scalars(&s);
            (s, scalars, true)
        }
        Solver::Trajectories => {
            let opts = TrajectoryOptions { cuts: cfg.cuts.clone(), ..TrajectoryOptions::default() };
            let engine = TrajectoryEngine::new(&p, &opts)?;
            let psi0 = StateVector::from_initial(&init, p.sites)?;
            let count = cfg.n_trajectories.expect("validated trajectory count");
            let seed = cfg.master_seed.wrapping_add(pt.index as u64);
            let records = run_ensemble(&engine, &psi0, &times, seed, count)?;
            let s = ensemble_average(&records)?;
            let mut jumps = Table::new(vec!["trajectory".into(), "time".into(), "channel".into()]);
            for r in &records {
                for j in &r.jumps {
                    jumps.push(vec![r.stream as f64, j.time, j.channel as f64]);
                }
            }
            jumps.write(&dir.join(format!("{stem}_jumps.csv")))?;
            files.push(format!("{stem}_jumps.csv"));
            let dark: usize = records.iter().map(|r| r.dark_events).sum();
            extra.insert("seed".into(), json!(seed));
            extra.insert("dark_events".into(), json!(dark));
            extra.insert(
                "channels".into(),
                json!(engine
                    .ops
                    .jumps
                    .iter()
                    .map(|j| json!({"kind": format!("{:?}", j.spec.kind), "site": j.spec.site}))
                    .collect::<Vec<_>>()),
            );
            let mut scalars = series_scalars(&s);
            scalars.push(("jumps_per_trajectory", jumps.rows.len() as f64 / count as f64));
            (s, scalars, true)
        }
        Solver::Liouville => {
            let l = Liouvillian::new(&p)?;
            let rho0 = DensityMatrix::from_initial(&init, p.sites)?;
            let s = l.evolve_series(&rho0, &times)?;
            let scalars = series_scalars(&s);
            (s, scalars, true)
        }
    };
    select(cfg, &mut series);
    let doublons = doublons && wants(cfg, Observable::Doublons);
    series_table(&series, &p.bonds(), doublons).write(&dir.join(format!("{stem}.csv")))?;
    let meta = json!({
        "version": VERSION,
        "threads": threads,
        "solver": cfg.solver,
        "point": pt.index,
        "sweep": pt.values.iter().map(|(k, v)| (k.name().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "params": params_json(&p),
        "initial_state": init.label(),
        "config": cfg,
        "files": files,
        "bonds": p.bonds(),
        "cuts": series.cuts,
        "momenta": series.momenta,
        "summary": scalars.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "details": extra,
    });
    write_json(&dir.join(format!("{stem}.json")), &meta)?;
    Ok(PointResult { index: pt.index, stem, scalars })
}

/// Infinite-ring series sampled on the L sites and bonds of a ring.
fn analytic_point(
    p: &ModelParams,
    init: &InitialState,
    times: &[f64],
    momentum: bool,
) -> Result<(ObservableSeries, Vec<(&'static str, f64)>), CliError> {
    let l = p.sites;
    let ks = if momentum { analytic::momentum_grid(l) } else { vec![] };
    let steady = analytic::steady_observables(p, 4096)?;
    let n0 = match init {
        InitialState::Vacuum => 0.0,
        InitialState::Full => 1.0,
        _ => 0.5,
    };
    let mut s = ObservableSeries::new(vec![], ks.clone());
    for &t in times {
        let (density, current) = if *init == InitialState::ChargeDensityWave {
            let v = (0..l).map(|j| analytic::cdw_transient(p, j, t)).collect::<Result<Vec<_>, _>>()?;
            (v.iter().map(|x| x.density).collect(), v.iter().map(|x| x.current).collect())
        } else {
            let dev = analytic::uniform_relaxation(p, t, n0)?;
            (vec![steady.density + dev.density; l], vec![steady.current + dev.current; l])
        };
        s.push(Sample {
            time: t,
            density,
            current,
            doublons: 0.0,
            entropy: vec![],
            momentum: ks.iter().map(|&k| analytic::nk_t(p, k, t, n0)).collect(),
        });
    }
    let slowest = analytic::k_star(p)?;
    let xi_inv = match analytic::correlation_length(p) {
        CorrelationLength::Inverse(x) => x,
        CorrelationLength::DeltaCorrelated => f64::INFINITY,
    };
    let scalars = vec![
        ("gap", analytic::dissipative_gap(p)),
        ("k_star", slowest.momentum),
        ("density_ss", steady.density),
        ("current_ss", steady.current),
        ("inverse_correlation_length", xi_inv),
    ];
    Ok((s, scalars))
}

/// Mode functions and Green's functions at ω = ε_k on the ring momenta.
fn modes_table(p: &ModelParams) -> Table {
    let names = [
        "k", "epsilon", "gain", "loss", "lambda", "nk_ss", "gr_re", "gr_im", "gk_re", "gk_im", "distribution",
    ];
    let mut t = Table::new(names.iter().map(|s| s.to_string()).collect());
    for k in analytic::momentum_grid(p.sites) {
        let m = analytic::mode_functions(p, k);
        let g = analytic::keldysh(p, k, m.dispersion);
        t.push(vec![
            k,
            m.dispersion,
            m.gain_rate,
            m.loss_rate,
            m.decay_rate,
            analytic::nk_ss(p, k),
            g.retarded.re,
            g.retarded.im,
            g.keldysh.re,
            g.keldysh.im,
            g.distribution,
        ]);
    }
    t
}

/// Output directory of a run, for messages.
pub fn describe(dir: &Path, results: &[PointResult]) -> PathBuf {
    match results {
        [one] => dir.join(format!("{}.csv", one.stem)),
        _ => dir.join("summary.csv"),
    }
}
