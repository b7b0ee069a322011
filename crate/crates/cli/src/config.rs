//! Flat key-value run configuration with command-line overrides.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nrfermion::{Boundary, InitialState, ModelParams};
use serde::Serialize;

use crate::error::CliError;

pub const KEYS_HELP: &str = "\
Configuration keys (file lines `key = value`, `#` comments; `--set key=value` overrides):
  L               number of sites (required)
  J               hopping amplitude [1]
  delta           nearest-neighbour interaction [0]
  gamma, kappa    gain and loss rates [0.1, 0.1]
  theta, phi      gain and loss phases, e.g. pi/2 or -0.5*pi [pi/2, pi/2]
  bc              periodic | open [periodic]
  solver          analytic | gaussian | trajectories | liouville (set by the subcommand)
  initial_state   vacuum | full | cdw | domain-wall | bitstring:<0110..>
                  [cdw; vacuum for analytic]
  t_max           final time [20]
  n_samples       number of sample times in [0, t_max] [41]
  n_trajectories  trajectory count (required for trajectories)
  master_seed     64-bit seed of the trajectory streams [0]
  sweep.<param>   values for L, J, delta, gamma, kappa, theta or phi:
                  `linspace(a, b, n)` or a comma list; several sweeps form a grid
  out_dir         output directory [out]
  cuts            entanglement cuts, comma list [L/2]
  observables     comma list of density, current, doublons, entropy, momentum [all available]
Environment: NONRECIP_THREADS sets the worker thread count.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Analytic,
    Gaussian,
    Trajectories,
    Liouville,
}

impl Solver {
    pub fn parse(s: &str) -> Result<Solver, CliError> {
        match s {
            "analytic" => Ok(Solver::Analytic),
            "gaussian" => Ok(Solver::Gaussian),
            "trajectories" => Ok(Solver::Trajectories),
            "liouville" => Ok(Solver::Liouville),
            _ => Err(CliError::Config(format!("unknown solver '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Solver::Analytic => "analytic",
            Solver::Gaussian => "gaussian",
            Solver::Trajectories => "trajectories",
            Solver::Liouville => "liouville",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Param {
    L,
    J,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "phi")]
    Phi,
}

impl Param {
    fn parse(s: &str) -> Option<Param> {
        Some(match s {
            "L" => Param::L,
            "J" => Param::J,
            "delta" => Param::Delta,
            "gamma" => Param::Gamma,
            "kappa" => Param::Kappa,
            "theta" => Param::Theta,
            "phi" => Param::Phi,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::L => "L",
            Param::J => "J",
            Param::Delta => "delta",
            Param::Gamma => "gamma",
            Param::Kappa => "kappa",
            Param::Theta => "theta",
            Param::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Density,
    Current,
    Doublons,
    Entropy,
    Momentum,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::Density,
        Observable::Current,
        Observable::Doublons,
        Observable::Entropy,
        Observable::Momentum,
    ];

    fn parse(s: &str) -> Result<Observable, CliError> {
        Ok(match s {
            "density" => Observable::Density,
            "current" => Observable::Current,
            "doublons" => Observable::Doublons,
            "entropy" => Observable::Entropy,
            "momentum" => Observable::Momentum,
            _ => return Err(CliError::Config(format!("unknown observable '{s}'"))),
        })
    }

    /// Whether `solver` produces this observable for the given boundary.
    fn available(self, solver: Solver, bc: Boundary) -> bool {
        match self {
            Observable::Density | Observable::Current => true,
            Observable::Doublons => solver != Solver::Analytic,
            Observable::Entropy => solver == Solver::Trajectories,
            Observable::Momentum => {
                matches!(solver, Solver::Gaussian | Solver::Analytic) && bc == Boundary::Periodic
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub param: Param,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub theta: f64,
    pub phi: f64,
    pub bc: &'static str,
    pub solver: Solver,
    pub initial_state: String,
    pub t_max: f64,
    pub n_samples: usize,
    pub n_trajectories: Option<usize>,
    pub master_seed: u64,
    pub sweeps: Vec<Sweep>,
    pub out_dir: PathBuf,
    pub cuts: Option<Vec<usize>>,
    pub observables: Vec<Observable>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub index: usize,
    pub values: Vec<(Param, f64)>,
    pub params: ModelParams,
}

/// Keys as they are collected, before validation.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    sites: Option<usize>,
    hopping: Option<f64>,
    delta: Option<f64>,
    gamma: Option<f64>,
    kappa: Option<f64>,
    theta: Option<f64>,
    phi: Option<f64>,
    bc: Option<Boundary>,
    solver: Option<Solver>,
    initial_state: Option<InitialState>,
    t_max: Option<f64>,
    n_samples: Option<usize>,
    n_trajectories: Option<usize>,
    master_seed: Option<u64>,
    sweeps: Vec<Sweep>,
    out_dir: Option<PathBuf>,
    cuts: Option<Vec<usize>>,
    observables: Option<Vec<Observable>>,
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = '{value}': {why}"))
}

fn parse_count(key: &str, value: &str) -> Result<usize, CliError> {
    value.trim().parse().map_err(|e| bad(key, value, e))
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solver(&self) -> Option<Solver> {
        self.solver
    }

    /// Reads `key = value` lines; duplicate keys within one file are rejected.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.load_str(&text)
    }

    pub fn load_str(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key = value", n + 1)));
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
            self.set(key, value.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{pair}' is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let num = || parse_number(value).map_err(|e| bad(key, value, e));
        match key {
            "L" => self.sites = Some(parse_count(key, value)?),
            "J" => self.hopping = Some(num()?),
            "delta" => self.delta = Some(num()?),
            "gamma" => self.gamma = Some(num()?),
            "kappa" => self.kappa = Some(num()?),
            "theta" => self.theta = Some(num()?),
            "phi" => self.phi = Some(num()?),
            "bc" => {
                self.bc = Some(match value {
                    "periodic" | "pbc" => Boundary::Periodic,
                    "open" | "obc" => Boundary::Open,
                    _ => return Err(bad(key, value, "expected periodic or open")),
                })
            }
            "solver" => self.solver = Some(Solver::parse(value)?),
            "initial_state" => {
                self.initial_state = Some(InitialState::parse(value).map_err(|e| bad(key, value, e))?)
            }
            "t_max" => self.t_max = Some(num()?),
            "n_samples" => self.n_samples = Some(parse_count(key, value)?),
            "n_trajectories" => self.n_trajectories = Some(parse_count(key, value)?),
            "master_seed" => self.master_seed = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "cuts" => {
                self.cuts = Some(
                    split_list(value)
                        .map(|v| parse_count(key, v))
                        .collect::<Result<_, _>>()?,
                )
            }
            "observables" => {
                self.observables = Some(split_list(value).map(Observable::parse).collect::<Result<_, _>>()?)
            }
            _ => {
                let param = key
                    .strip_prefix("sweep.")
                    .and_then(Param::parse)
                    .ok_or_else(|| CliError::Config(format!("unknown key '{key}'")))?;
                let values = parse_values(value).map_err(|e| bad(key, value, e))?;
                if values.is_empty() {
                    return Err(bad(key, value, "no values"));
                }
                self.sweeps.retain(|s| s.param != param);
                self.sweeps.push(Sweep { param, values });
            }
        }
        Ok(())
    }

    /// Validates against the solver chosen on the command line.
    pub fn finish(self, solver: Solver) -> Result<RunConfig, CliError> {
        if let Some(s) = self.solver {
            if s != solver {
                return Err(CliError::Config(format!(
                    "config selects solver {} but the command is {}",
                    s.name(),
                    solver.name()
                )));
            }
        }
        let sites = self.sites.ok_or_else(|| CliError::Config("missing required key L".into()))?;
        let bc = self.bc.unwrap_or(Boundary::Periodic);
        let observables = match self.observables {
            Some(list) => {
                if let Some(o) = list.iter().find(|o| !o.available(solver, bc)) {
                    return Err(CliError::Config(format!(
                        "observable {o:?} is not produced by the {} solver with {bc:?} boundaries",
                        solver.name()
                    )));
                }
                list
            }
            None => Observable::ALL.into_iter().filter(|o| o.available(solver, bc)).collect(),
        };
        let cfg = RunConfig {
            sites,
            hopping: self.hopping.unwrap_or(1.0),
            delta: self.delta.unwrap_or(0.0),
            gamma: self.gamma.unwrap_or(0.1),
            kappa: self.kappa.unwrap_or(0.1),
            theta: self.theta.unwrap_or(PI / 2.0),
            phi: self.phi.unwrap_or(PI / 2.0),
            bc: match bc {
                Boundary::Periodic => "periodic",
                Boundary::Open => "open",
            },
            solver,
            initial_state: self
                .initial_state
                .unwrap_or(if solver == Solver::Analytic {
                    InitialState::Vacuum
                } else {
                    InitialState::ChargeDensityWave
                })
                .label(),
            t_max: self.t_max.unwrap_or(20.0),
            n_samples: self.n_samples.unwrap_or(41),
            n_trajectories: self.n_trajectories,
            master_seed: self.master_seed.unwrap_or(0),
            sweeps: self.sweeps,
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            cuts: self.cuts,
            observables,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    pub fn boundary(&self) -> Boundary {
        if self.bc == "open" {
            Boundary::Open
        } else {
            Boundary::Periodic
        }
    }

    pub fn initial(&self) -> InitialState {
        InitialState::parse(&self.initial_state).expect("validated initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect()
    }

    pub fn base_params(&self) -> ModelParams {
        ModelParams {
            sites: self.sites,
            hopping: self.hopping,
            interaction: self.delta,
            gain: self.gamma,
            loss: self.kappa,
            gain_phase: self.theta,
            loss_phase: self.phi,
            boundary: self.boundary(),
            peierls: 0.0,
        }
    }

    pub fn point_count(&self) -> usize {
        self.sweeps.iter().map(|s| s.values.len()).product()
    }

    /// Cartesian product of the sweeps in declaration order, last axis fastest.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let total = self.point_count();
        let mut out = Vec::with_capacity(total);
        for index in 0..total {
            let mut rem = index;
            let mut values = vec![(Param::L, 0.0); self.sweeps.len()];
            for (a, s) in self.sweeps.iter().enumerate().rev() {
                values[a] = (s.param, s.values[rem % s.values.len()]);
                rem /= s.values.len();
            }
            let mut p = self.base_params();
            for &(param, v) in &values {
                match param {
                    Param::L => {
                        if v < 2.0 || v.fract() != 0.0 {
                            return Err(CliError::Config(format!("sweep value L = {v} is not a site count")));
                        }
                        p.sites = v as usize
                    }
                    Param::J => p.hopping = v,
                    Param::Delta => p.interaction = v,
                    Param::Gamma => p.gain = v,
                    Param::Kappa => p.loss = v,
                    Param::Theta => p.gain_phase = v,
                    Param::Phi => p.loss_phase = v,
                }
            }
            let params = p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            out.push(Point { index, values, params });
        }
        Ok(out)
    }

    fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return err(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.n_samples < 2 {
            return err("n_samples must be at least 2".into());
        }
        match self.solver {
            Solver::Trajectories => match self.n_trajectories {
                None => return err("the trajectories solver needs n_trajectories".into()),
                Some(n) if n < 2 => return err("n_trajectories must be at least 2".into()),
                _ => {}
            },
            Solver::Analytic => {
                if self.boundary() == Boundary::Open {
                    return err("the analytic solver describes the infinite ring; use bc = periodic".into());
                }
                let init = self.initial();
                if !matches!(
                    init,
                    InitialState::Vacuum | InitialState::Full | InitialState::ChargeDensityWave
                ) {
                    return err(format!(
                        "the analytic solver supports vacuum, full and cdw starts, not {}",
                        self.initial_state
                    ));
                }
            }
            Solver::Gaussian | Solver::Liouville => {}
        }
        let points = self.points()?;
        for pt in &points {
            let p = &pt.params;
            match self.solver {
                Solver::Gaussian if p.interaction != 0.0 => {
                    return err(format!(
                        "the gaussian solver needs delta = 0 (got {}); use trajectories or liouville",
                        p.interaction
                    ))
                }
                Solver::Liouville if p.sites > nrfermion::liouville::MAX_SITES => {
                    return err(format!(
                        "the liouville solver handles L <= {}, got {}",
                        nrfermion::liouville::MAX_SITES,
                        p.sites
                    ))
                }
                Solver::Trajectories if p.sites > nrfermion::fock::MAX_SITES => {
                    return err(format!(
                        "the trajectories solver handles L <= {}, got {}",
                        nrfermion::fock::MAX_SITES,
                        p.sites
                    ))
                }
                Solver::Analytic if self.initial() == InitialState::ChargeDensityWave && !p.on_critical_line() => {
                    return err("the analytic CDW transient needs theta = -phi".into())
                }
                _ => {}
            }
            if let Some(cuts) = &self.cuts {
                if cuts.iter().any(|&c| c == 0 || c >= p.sites) {
                    return err(format!("cuts must lie in 1..{} for L = {}", p.sites, p.sites));
                }
            }
            if let InitialState::Bitstring(b) = self.initial() {
                if b.len() != p.sites {
                    return err(format!("bitstring has {} sites but L = {}", b.len(), p.sites));
                }
            }
        }
        Ok(())
    }
}

/// Sweep values: `linspace(a, b, n)` or a comma list of numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("linspace takes (start, stop, count)".into());
        }
        let a = parse_number(parts[0])?;
        let b = parse_number(parts[1])?;
        let n: usize = parts[2].parse().map_err(|e| format!("count: {e}"))?;
        return Ok(match n {
            0 => vec![],
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    split_list(s).map(parse_number).collect()
}

/// Arithmetic on numbers and `pi` with + − * / and parentheses; a number
/// directly followed by `pi` multiplies it (`3pi/4`).
pub fn parse_number(s: &str) -> Result<f64, String> {
    let tokens = tokenize(s)?;
    let mut pos = 0;
    let v = expr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("unexpected trailing input in '{s}'"));
    }
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut literal_end = None;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if s[i..].starts_with("pi") {
            if literal_end == Some(i) {
                out.push(Tok::Op('*'));
            }
            out.push(Tok::Num(PI));
            i += 2;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v: f64 = s[start..i].parse().map_err(|_| format!("bad number '{}'", &s[start..i]))?;
            out.push(Tok::Num(v));
            literal_end = Some(i);
        } else {
            return Err(format!("unexpected character '{c}'"));
        }
    }
    if out.is_empty() {
        return Err("empty value".into());
    }
    Ok(out)
}

fn expr(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    let mut v = term(t, pos)?;
    while let Some(&Tok::Op(c @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let r = term(t, pos)?;
        v = if c == '+' { v + r } else { v - r };
    }
    Ok(v)
}

fn term(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    let mut v = unary(t, pos)?;
    while let Some(&Tok::Op(c @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let r = unary(t, pos)?;
        v = if c == '*' { v * r } else { v / r };
    }
    Ok(v)
}

fn unary(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    match t.get(*pos) {
        Some(Tok::Op('-')) => {
            *pos += 1;
            Ok(-unary(t, pos)?)
        }
        Some(Tok::Op('+')) => {
            *pos += 1;
            unary(t, pos)
        }
        Some(Tok::Op('(')) => {
            *pos += 1;
            let v = expr(t, pos)?;
            if t.get(*pos) != Some(&Tok::Op(')')) {
                return Err("missing ')'".into());
            }
            *pos += 1;
            Ok(v)
        }
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        _ => Err("expected a number".into()),
    }
}
