//! Named configurations at desk scale; every key can be overridden.

use crate::config::Solver;

pub struct Preset {
    pub name: &'static str,
    pub solver: Solver,
    pub about: &'static str,
    pub config: &'static str,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "phase-diagram",
        solver: Solver::Analytic,
        about: "gap and steady current over a 41 x 41 (theta, phi) grid",
        config: "\
L = 64
gamma = 0.1
kappa = 0.1
initial_state = vacuum
t_max = 20
n_samples = 11
observables = density, current
sweep.theta = linspace(-pi, pi, 41)
sweep.phi = linspace(-pi, pi, 41)
out_dir = phase-diagram
",
    },
    Preset {
        name: "fig3ab",
        solver: Solver::Trajectories,
        about: "CDW relaxation on a ring with theta = -phi = -pi/2, interaction sweep",
        config: "\
L = 10
bc = periodic
gamma = 0.1
kappa = 0.1
theta = -pi/2
phi = pi/2
initial_state = cdw
t_max = 20
n_samples = 41
n_trajectories = 64
sweep.delta = 0, 2, 8
out_dir = fig3ab
",
    },
    Preset {
        name: "fig3ab-aligned",
        solver: Solver::Trajectories,
        about: "as fig3ab with theta = phi = pi/2",
        config: "\
L = 10
bc = periodic
gamma = 0.1
kappa = 0.1
theta = pi/2
phi = pi/2
initial_state = cdw
t_max = 20
n_samples = 41
n_trajectories = 64
sweep.delta = 0, 2, 8
out_dir = fig3ab-aligned
",
    },
    Preset {
        name: "blockade",
        solver: Solver::Trajectories,
        about: "CDW melting on an open chain with theta = phi = pi/2, interaction sweep",
        config: "\
L = 10
bc = open
gamma = 0.1
kappa = 0.1
theta = pi/2
phi = pi/2
initial_state = cdw
t_max = 4
n_samples = 41
n_trajectories = 200
sweep.delta = 0, 2, 8
out_dir = blockade
",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
