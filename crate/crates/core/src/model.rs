//! Physical parameters of the chain and the structure of its dissipators.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

/// Couplings of the chain. Energies are in arbitrary units; `hopping` sets the scale.
///
/// `peierls` is a phase attached to every hopping bond (c†_j c_{j+1} picks up
/// e^{i peierls}). It is zero for the physical model and only becomes nonzero
/// through [`gauge_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub sites: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub gain: f64,
    pub loss: f64,
    pub gain_phase: f64,
    pub loss_phase: f64,
    pub boundary: Boundary,
    pub peierls: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sites: 8,
            hopping: 1.0,
            interaction: 0.0,
            gain: 0.1,
            loss: 0.1,
            gain_phase: PI / 2.0,
            loss_phase: PI / 2.0,
            boundary: Boundary::Periodic,
            peierls: 0.0,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

impl ModelParams {
    pub fn periodic(sites: usize) -> Self {
        ModelParams {
            sites,
            ..Default::default()
        }
    }

    pub fn open(sites: usize) -> Self {
        ModelParams {
            sites,
            boundary: Boundary::Open,
            ..Default::default()
        }
    }

    pub fn with_rates(mut self, gain: f64, loss: f64) -> Self {
        self.gain = gain;
        self.loss = loss;
        self
    }

    pub fn with_phases(mut self, gain_phase: f64, loss_phase: f64) -> Self {
        self.gain_phase = gain_phase;
        self.loss_phase = loss_phase;
        self
    }

    pub fn with_interaction(mut self, interaction: f64) -> Self {
        self.interaction = interaction;
        self
    }

    /// Checks rates and sizes and wraps all phases into (−π, π].
    pub fn validate(self) -> Result<ModelParams> {
        let reals = [
            ("hopping", self.hopping),
            ("interaction", self.interaction),
            ("gain", self.gain),
            ("loss", self.loss),
            ("gain_phase", self.gain_phase),
            ("loss_phase", self.loss_phase),
            ("peierls", self.peierls),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite ({v})")));
            }
        }
        if self.sites < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 sites, got {}",
                self.sites
            )));
        }
        if self.hopping <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "hopping must be positive, got {}",
                self.hopping
            )));
        }
        if self.gain < 0.0 {
            return Err(Error::InvalidParams(format!("negative gain rate {}", self.gain)));
        }
        if self.loss < 0.0 {
            return Err(Error::InvalidParams(format!("negative loss rate {}", self.loss)));
        }
        Ok(ModelParams {
            gain_phase: wrap_phase(self.gain_phase),
            loss_phase: wrap_phase(self.loss_phase),
            peierls: wrap_phase(self.peierls),
            ..self
        })
    }

    /// Nearest-neighbour bonds (j, j+1); the periodic chain includes (L−1, 0).
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        match self.boundary {
            Boundary::Open => (0..l - 1).map(|j| (j, j + 1)).collect(),
            Boundary::Periodic => (0..l).map(|j| (j, (j + 1) % l)).collect(),
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.gain + self.loss
    }

    /// Steady filling on the critical line, Γ/(Γ+κ); zero for a closed chain.
    pub fn critical_filling(&self) -> f64 {
        let r = self.total_rate();
        if r > 0.0 {
            self.gain / r
        } else {
            0.0
        }
    }

    /// True when θ + φ ≡ 0 (mod 2π), where the dissipative gap closes.
    pub fn on_critical_line(&self) -> bool {
        wrap_phase(self.gain_phase + self.loss_phase).abs() < 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JumpKind {
    BondLoss,
    BondGain,
    EdgeLoss,
    EdgeGain,
}

impl JumpKind {
    pub fn is_gain(self) -> bool {
        matches!(self, JumpKind::BondGain | JumpKind::EdgeGain)
    }
}

/// One jump operator: a linear combination of annihilators (loss) or
/// creators (gain) with the listed mode amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    pub kind: JumpKind,
    pub site: usize,
    pub modes: Vec<(usize, C64)>,
}

impl JumpSpec {
    /// Σ|a|², which equals the rate constant of the channel.
    pub fn weight(&self) -> f64 {
        self.modes.iter().map(|(_, a)| a.norm_sqr()).sum()
    }
}

/// Loss operators first, then gain, bond index ascending; open chains append
/// the four edge terms.
pub fn enumerate_jumps(p: &ModelParams) -> Vec<JumpSpec> {
    let sk = p.loss.sqrt();
    let sg = p.gain.sqrt();
    let bonds = p.bonds();
    let mut out = Vec::with_capacity(2 * bonds.len() + 4);
    for &(j, l) in &bonds {
        out.push(JumpSpec {
            kind: JumpKind::BondLoss,
            site: j,
            modes: vec![(j, C64::new(sk, 0.0)), (l, C64::from_polar(sk, p.loss_phase))],
        });
    }
    for &(j, l) in &bonds {
        out.push(JumpSpec {
            kind: JumpKind::BondGain,
            site: j,
            modes: vec![(j, C64::new(sg, 0.0)), (l, C64::from_polar(sg, p.gain_phase))],
        });
    }
    if p.boundary == Boundary::Open {
        for site in [0, p.sites - 1] {
            out.push(JumpSpec {
                kind: JumpKind::EdgeLoss,
                site,
                modes: vec![(site, C64::new(sk, 0.0))],
            });
            out.push(JumpSpec {
                kind: JumpKind::EdgeGain,
                site,
                modes: vec![(site, C64::new(sg, 0.0))],
            });
        }
    }
    out
}

/// Site-dependent rephasing c_j → e^{i j θ} c_j, which removes the gain phase
/// at the price of a Peierls phase on every bond. Returns the transformed
/// parameters and the bond phase factor.
///
/// Only single-valued on a ring when L·θ is a multiple of 2π. Observables other
/// than densities must be dressed accordingly, so this is a testing aid.
pub fn gauge_transform(p: &ModelParams) -> Result<(ModelParams, C64)> {
    let p = p.validate()?;
    let err = Error::GaugeIncompatible {
        sites: p.sites,
        phase: p.gain_phase,
    };
    if p.boundary != Boundary::Periodic {
        return Err(err);
    }
    let winding = wrap_phase(p.sites as f64 * p.gain_phase);
    if winding.abs() > 1e-9 {
        return Err(err);
    }
    let q = ModelParams {
        gain_phase: 0.0,
        loss_phase: wrap_phase(p.gain_phase + p.loss_phase),
        peierls: wrap_phase(p.peierls + p.gain_phase),
        ..p
    };
    Ok((q, C64::from_polar(1.0, p.gain_phase)))
}

/// Product states used as initial conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    Vacuum,
    Full,
    /// |1010…⟩, site 0 occupied.
    ChargeDensityWave,
    /// Left half filled.
    DomainWall,
    Bitstring(Vec<bool>),
}

impl InitialState {
    pub fn occupations(&self, sites: usize) -> Result<Vec<bool>> {
        Ok(match self {
            InitialState::Vacuum => vec![false; sites],
            InitialState::Full => vec![true; sites],
            InitialState::ChargeDensityWave => (0..sites).map(|j| j % 2 == 0).collect(),
            InitialState::DomainWall => (0..sites).map(|j| j < sites / 2).collect(),
            InitialState::Bitstring(bits) => {
                if bits.len() != sites {
                    return Err(Error::InvalidParams(format!(
                        "bitstring has {} entries for {} sites",
                        bits.len(),
                        sites
                    )));
                }
                bits.clone()
            }
        })
    }

    /// Parses `vacuum`, `full`, `cdw`, `domain-wall` or `bitstring:0110`.
    pub fn parse(s: &str) -> Result<InitialState> {
        let s = s.trim();
        match s {
            "vacuum" => Ok(InitialState::Vacuum),
            "full" => Ok(InitialState::Full),
            "cdw" => Ok(InitialState::ChargeDensityWave),
            "domain-wall" => Ok(InitialState::DomainWall),
            _ => {
                let Some(pattern) = s.strip_prefix("bitstring:") else {
                    return Err(Error::InvalidParams(format!("unknown initial state '{s}'")));
                };
                pattern
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(Error::InvalidParams(format!("bad bitstring character '{c}'"))),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(InitialState::Bitstring)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Vacuum => "vacuum".into(),
            InitialState::Full => "full".into(),
            InitialState::ChargeDensityWave => "cdw".into(),
            InitialState::DomainWall => "domain-wall".into(),
            InitialState::Bitstring(b) => {
                let s: String = b.iter().map(|&x| if x { '1' } else { '0' }).collect();
                format!("bitstring:{s}")
            }
        }
    }
}
