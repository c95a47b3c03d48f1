//! Davies-type cooling engine.
//!
//! Each coupling operator `A` is split into Bohr components `A(w)` between
//! levels of the (diagonal) network Hamiltonian, `w` being the energy
//! released. Component `A(w)` acts as a jump operator with Glauber rate
//! `gamma0 / (1 + exp(-w / theta))`, which satisfies detailed balance at the
//! bath temperature `theta`.
//!
//! Symmetric mode uses `sigma_t1^a + sigma_t2^a` for every triode and axis,
//! asymmetric mode uses `sigma_t1^a` and `sigma_t2^a` separately. The rate
//! scale follows from the Markov limit of the field statistics: the averaged
//! field has half the variance of a proton field.

use nalgebra::DMatrix;

use crate::bath::FieldStatistics;
use crate::error::{Error, Result};
use crate::hamiltonians::CouplingOperators;
use crate::operator::{max_abs, CMatrix, HermitianOperator, C64};
use crate::space::SpaceLabel;

use super::schedule::{substeps, TemperatureSchedule};
use super::state::{Payload, SystemState};
use super::CouplingMode;

/// Largest dimension for which coherent states are propagated with the full
/// superoperator.
pub const SUPEROPERATOR_MAX_DIM: usize = 64;

const LEVEL_TOL: f64 = 1e-9;

/// Glauber rate for releasing energy `omega` into a bath at temperature `theta`.
pub fn glauber_rate(omega: f64, theta: f64, gamma0: f64) -> f64 {
    if theta <= 0.0 {
        return if omega > LEVEL_TOL {
            gamma0
        } else if omega < -LEVEL_TOL {
            0.0
        } else {
            0.5 * gamma0
        };
    }
    let x = -omega / theta;
    if x > 700.0 {
        0.0
    } else {
        gamma0 / (1.0 + x.exp())
    }
}

#[derive(Debug, Clone)]
struct BohrJump {
    omega: f64,
    gamma0: f64,
    op: CMatrix,
    /// `A(w)^dagger A(w)`
    weight: CMatrix,
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    from: usize,
    to: usize,
    omega: f64,
    strength: f64,
}

#[derive(Debug, Clone)]
pub struct DaviesModel {
    space: SpaceLabel,
    energies: Vec<f64>,
    hamiltonian: CMatrix,
    mode: CouplingMode,
    jumps: Vec<BohrJump>,
    transitions: Vec<Transition>,
    classical: bool,
}

impl DaviesModel {
    /// `network` must be diagonal in the computational basis.
    pub fn new(
        network: &HermitianOperator,
        couplings: &CouplingOperators,
        mode: CouplingMode,
        g: f64,
        fields: FieldStatistics,
    ) -> Result<Self> {
        fields.validate()?;
        let space = network.space().clone();
        if couplings.space() != &space {
            return Err(Error::Space("couplings and network live on different spaces".into()));
        }
        let scale = max_abs(network.matrix()).max(1.0);
        if network.off_diagonal_max() > 1e-12 * scale {
            return Err(Error::Parameter("the dissipative engine needs a diagonal network Hamiltonian".into()));
        }
        let energies = network.diagonal_real();
        let d = space.dim();

        let base = g * g * fields.sigma_b * fields.sigma_b * fields.t_c;
        let mut sources: Vec<(CMatrix, f64)> = Vec::new();
        for tau in 0..space.triode_count() {
            for a in 0..3 {
                match mode {
                    CouplingMode::Symmetric => {
                        sources.push((couplings.proton(tau, 0, a) + couplings.proton(tau, 1, a), base));
                    }
                    CouplingMode::Asymmetric => {
                        sources.push((couplings.proton(tau, 0, a).clone(), 2.0 * base));
                        sources.push((couplings.proton(tau, 1, a).clone(), 2.0 * base));
                    }
                }
            }
        }

        let mut jumps = Vec::new();
        let mut transitions = Vec::new();
        for (a, gamma0) in sources {
            let mut components: Vec<(f64, CMatrix)> = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    let z = a[(j, i)];
                    if z.norm() <= 1e-14 {
                        continue;
                    }
                    let omega = energies[i] - energies[j];
                    if i != j {
                        transitions.push(Transition { from: i, to: j, omega, strength: z.norm_sqr() * gamma0 });
                    }
                    let slot = match components.iter().position(|(w, _)| (w - omega).abs() <= LEVEL_TOL * scale) {
                        Some(k) => k,
                        None => {
                            components.push((omega, CMatrix::zeros(d, d)));
                            components.len() - 1
                        }
                    };
                    components[slot].1[(j, i)] = z;
                }
            }
            for (omega, op) in components {
                let weight = op.adjoint() * &op;
                jumps.push(BohrJump { omega, gamma0, op, weight });
            }
        }
        let classical =
            jumps.iter().all(|j| (0..d).all(|i| j.op.column(i).iter().filter(|z| z.norm() > 1e-14).count() <= 1));
        Ok(Self { space, energies, hamiltonian: network.matrix().clone(), mode, jumps, transitions, classical })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// True when every jump maps basis states to basis states, so diagonal
    /// states stay diagonal and the population dynamics is exact.
    pub fn is_classical(&self) -> bool {
        self.classical
    }

    /// Population rate matrix `W` with `dp/dt = W p`.
    pub fn rate_matrix(&self, theta: f64) -> DMatrix<f64> {
        let d = self.space.dim();
        let mut w = DMatrix::zeros(d, d);
        for tr in &self.transitions {
            let r = glauber_rate(tr.omega, theta, 1.0) * tr.strength;
            w[(tr.to, tr.from)] += r;
            w[(tr.from, tr.from)] -= r;
        }
        w
    }

    /// Column-stacked Lindblad superoperator, `vec(A rho B) = (B^T (x) A) vec(rho)`.
    pub fn superoperator(&self, theta: f64) -> Result<CMatrix> {
        let d = self.space.dim();
        if d > SUPEROPERATOR_MAX_DIM {
            return Err(Error::DimensionBound { dim: d, bound: SUPEROPERATOR_MAX_DIM });
        }
        let id = CMatrix::identity(d, d);
        let i = C64::new(0.0, 1.0);
        let mut l = (id.kronecker(&self.hamiltonian) - self.hamiltonian.transpose().kronecker(&id)) * -i;
        for jump in &self.jumps {
            let r = glauber_rate(jump.omega, theta, jump.gamma0);
            if r == 0.0 {
                continue;
            }
            let half = C64::new(0.5, 0.0);
            let term = jump.op.conjugate().kronecker(&jump.op)
                - id.kronecker(&jump.weight) * half
                - jump.weight.transpose().kronecker(&id) * half;
            l += term * C64::new(r, 0.0);
        }
        Ok(l)
    }

    /// Advances `state` by `h` at fixed temperature.
    pub fn step(&self, state: &SystemState, theta: f64, h: f64) -> Result<SystemState> {
        if state.space() != &self.space {
            return Err(Error::Space("state and model live on different spaces".into()));
        }
        let d = self.space.dim();
        if self.classical && !state.is_pure() && state.is_diagonal(0.0) {
            let p = nalgebra::DVector::from_vec(state.populations());
            let next = (self.rate_matrix(theta) * h).exp() * p;
            let pops: Vec<f64> = next.iter().map(|&x| x.max(0.0)).collect();
            return Ok(SystemState::diagonal(&self.space, &pops, state.t + h));
        }
        let rho = state.density();
        let v = nalgebra::DVector::from_column_slice(rho.as_slice());
        let next = (self.superoperator(theta)? * C64::new(h, 0.0)).exp() * v;
        let mut out = CMatrix::from_column_slice(d, d, next.as_slice());
        out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
        Ok(SystemState::from_parts(self.space.clone(), Payload::Mixed(out), state.t + h))
    }

    /// Gibbs populations at `theta` restricted to the basis states in `mask`.
    pub fn gibbs_populations(&self, theta: f64, mask: &[bool]) -> Vec<f64> {
        let e_min = self.energies.iter().zip(mask).filter(|(_, &m)| m).map(|(&e, _)| e).fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = self
            .energies
            .iter()
            .zip(mask)
            .map(|(&e, &m)| {
                if !m {
                    0.0
                } else if theta > 0.0 {
                    (-(e - e_min) / theta).exp()
                } else if (e - e_min).abs() <= LEVEL_TOL {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

/// Runs the engine from `initial` through the slice boundaries `times`, with
/// midpoint temperature steps no longer than `dt`.
pub fn evolve_dissipative(
    initial: &SystemState,
    model: &DaviesModel,
    temperature: &TemperatureSchedule,
    times: &[f64],
    dt: f64,
) -> Result<Vec<SystemState>> {
    temperature.validate()?;
    if times.is_empty() || !(dt > 0.0) {
        return Err(Error::Parameter("need sample times and a positive step".into()));
    }
    let mut state = initial.clone().into_mixed();
    state.t = times[0];
    let mut out = vec![state.clone()];
    for w in times.windows(2) {
        state = advance(&state, model, temperature, w[1], dt)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Advances from `state.t` to `t_end`.
pub fn advance(
    state: &SystemState,
    model: &DaviesModel,
    temperature: &TemperatureSchedule,
    t_end: f64,
    dt: f64,
) -> Result<SystemState> {
    if t_end < state.t {
        return Err(Error::Parameter(format!("cannot step backwards from {} to {t_end}", state.t)));
    }
    let mut out = state.clone();
    if t_end == state.t {
        return Ok(out);
    }
    let t0 = state.t;
    let (n, h) = substeps(t0, t_end, dt);
    for k in 0..n {
        let t = t0 + k as f64 * h;
        out = model.step(&out, temperature.at(t + 0.5 * h), h)?;
    }
    out.t = t_end;
    Ok(out)
}
