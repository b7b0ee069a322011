use rayon::prelude::*;

use super::state::StateVector;
use super::trajectory::{TrajectoryEngine, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::series::{ObservableSeries, StandardErrors};

/// Runs trajectories 0..count in parallel; trajectory i uses stream i of
/// `seed`, so results do not depend on the thread count.
pub fn run_ensemble(
    engine: &TrajectoryEngine,
    psi0: &StateVector,
    times: &[f64],
    seed: u64,
    count: usize,
) -> Result<Vec<TrajectoryRecord>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| engine.run(psi0, times, seed, i))
        .collect()
}

/// Mean and standard error ((N−1)-normalized variance over √N) at each time.
fn mean_se(values: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len() as f64;
    let width = values[0].len();
    let mut mean = vec![0.0; width];
    for v in values {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for v in values {
        for ((s, x), m) in var.iter_mut().zip(v.iter()).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let se = var.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect();
    (mean, se)
}

/// Ensemble mean of the records with standard errors attached.
pub fn ensemble_average(records: &[TrajectoryRecord]) -> Result<ObservableSeries> {
    if records.len() < 2 {
        return Err(Error::Precondition("an ensemble needs at least two trajectories".into()));
    }
    let first = &records[0].series;
    for r in records {
        if r.series.times != first.times || r.series.cuts != first.cuts || r.series.sites() != first.sites() {
            return Err(Error::GridMismatch("trajectories were sampled differently".into()));
        }
    }
    let mut out = ObservableSeries::new(first.cuts.clone(), first.momenta.clone());
    out.times = first.times.clone();
    let mut errors = StandardErrors::default();
    for i in 0..first.len() {
        let pick = |f: fn(&ObservableSeries) -> &Vec<Vec<f64>>| -> Vec<&[f64]> {
            records.iter().map(|r| f(&r.series)[i].as_slice()).collect()
        };
        let (m, s) = mean_se(&pick(|s| &s.density));
        out.density.push(m);
        errors.density.push(s);
        let (m, s) = mean_se(&pick(|s| &s.current));
        out.current.push(m);
        errors.current.push(s);
        let (m, s) = mean_se(&pick(|s| &s.entropy));
        out.entropy.push(m);
        errors.entropy.push(s);
        let d: Vec<&[f64]> = records
            .iter()
            .map(|r| std::slice::from_ref(&r.series.doublons[i]))
            .collect();
        let (m, s) = mean_se(&d);
        out.doublons.push(m[0]);
        errors.doublons.push(s[0]);
        out.momentum.push(vec![]);
    }
    out.errors = Some(errors);
    Ok(out)
}
