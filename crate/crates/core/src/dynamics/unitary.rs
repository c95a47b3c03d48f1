use crate::bath::{sample_bath_fields, BathFieldSample, TimeGrid};
use crate::error::{Error, Result};
use crate::hamiltonians::CouplingOperators;
use crate::operator::{CMatrix, HermitianOperator, C64};
use crate::seeding;
use crate::space::SpaceLabel;

use super::schedule::{substeps, RelaxationSchedule};
use super::state::{Payload, SystemState};
use super::{ordered_map, CouplingMode, Parallelism};

/// Largest allowed `||H|| dt` per step.
pub const STEP_GUARD: f64 = 0.1;

/// A time-dependent Hamiltonian.
pub trait HamiltonianProvider: Sync {
    fn space(&self) -> &SpaceLabel;
    fn at(&self, t: f64) -> Result<CMatrix>;
}

#[derive(Debug, Clone)]
pub struct StaticHamiltonian(pub HermitianOperator);

impl HamiltonianProvider for StaticHamiltonian {
    fn space(&self) -> &SpaceLabel {
        self.0.space()
    }

    fn at(&self, _t: f64) -> Result<CMatrix> {
        Ok(self.0.matrix().clone())
    }
}

/// Network Hamiltonian plus a bath coupling driven by sampled fields.
#[derive(Debug, Clone, Copy)]
pub struct BathDriven<'a> {
    pub network: &'a HermitianOperator,
    pub couplings: &'a CouplingOperators,
    pub fields: &'a BathFieldSample,
    pub g: f64,
    pub mode: CouplingMode,
}

impl HamiltonianProvider for BathDriven<'_> {
    fn space(&self) -> &SpaceLabel {
        self.network.space()
    }

    fn at(&self, t: f64) -> Result<CMatrix> {
        let coupling = match self.mode {
            CouplingMode::Symmetric => self.couplings.symmetric(self.fields, t, self.g)?,
            CouplingMode::Asymmetric => self.couplings.asymmetric(self.fields, t, self.g)?,
        };
        Ok(self.network.matrix() + coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    /// `exp(-i H(t + h/2) h)`.
    Exponential,
    /// `1 - i H(t + h/2) h`; not unitary, used only for the projection identity.
    FirstOrder,
}

/// One propagation step for the Hermitian matrix `h`.
pub fn step_operator(h: &CMatrix, dt: f64, method: StepMethod) -> Result<CMatrix> {
    let n = h.nrows();
    match method {
        StepMethod::FirstOrder => Ok(CMatrix::identity(n, n) - h * C64::new(0.0, dt)),
        StepMethod::Exponential => {
            let eig = h.clone().symmetric_eigen();
            let norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm * dt >= STEP_GUARD {
                return Err(Error::StepGuard { value: norm * dt });
            }
            let mut scaled = eig.eigenvectors.clone();
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                let phase = C64::from_polar(1.0, -lambda * dt);
                for z in scaled.column_mut(k).iter_mut() {
                    *z *= phase;
                }
            }
            Ok(scaled * eig.eigenvectors.adjoint())
        }
    }
}

fn apply(payload: &mut Payload, u: &CMatrix) {
    match payload {
        Payload::Pure(psi) => *psi = u * &*psi,
        Payload::Mixed(rho) => *rho = u * &*rho * u.adjoint(),
    }
}

/// Propagates `state` from `state.t` to `t_end` with midpoint steps no longer than `dt`.
pub fn evolve_unitary(
    state: &SystemState,
    provider: &dyn HamiltonianProvider,
    t_end: f64,
    dt: f64,
    method: StepMethod,
) -> Result<SystemState> {
    if provider.space() != state.space() {
        return Err(Error::Space("Hamiltonian and state live on different spaces".into()));
    }
    if !(dt > 0.0) || t_end < state.t {
        return Err(Error::Parameter(format!("cannot step from {} to {t_end} with dt = {dt}", state.t)));
    }
    let mut out = state.clone();
    if t_end == state.t {
        return Ok(out);
    }
    let (n, h) = substeps(state.t, t_end, dt);
    for k in 0..n {
        let t = state.t + k as f64 * h;
        let u = step_operator(&provider.at(t + 0.5 * h)?, h, method)?;
        apply(out.payload_mut(), &u);
    }
    out.t = t_end;
    Ok(out)
}

/// Error ratio `|U_dt - U_dt/2| / |U_dt/2 - U_dt/4|` on the final state;
/// close to 4 for a second-order integrator.
pub fn step_halving_ratio(state: &SystemState, provider: &dyn HamiltonianProvider, t_end: f64, dt: f64) -> Result<f64> {
    let run = |h: f64| evolve_unitary(state, provider, t_end, h, StepMethod::Exponential).map(|s| s.density());
    let (a, b, c) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
    Ok((a - &b).norm() / (b - c).norm())
}

/// Which bath fields drive the trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSource {
    /// Independent fields on the two protons of each triode.
    #[default]
    Sampled,
    /// Both protons see their average field.
    Equal,
    /// No bath.
    Zero,
}

/// Field realization of trajectory `m`, sampled on a grid no coarser than `dt`.
pub fn trajectory_fields(
    seed: u64,
    m: usize,
    schedule: &RelaxationSchedule,
    triodes: usize,
    source: FieldSource,
) -> Result<BathFieldSample> {
    let grid = TimeGrid::covering(schedule.t_start, schedule.t_end, schedule.dt);
    match source {
        FieldSource::Zero => Ok(BathFieldSample::zero(grid, triodes)),
        FieldSource::Sampled => sample_bath_fields(seed, seeding::trajectory_stream(m), grid, schedule.fields, triodes),
        FieldSource::Equal => {
            Ok(sample_bath_fields(seed, seeding::trajectory_stream(m), grid, schedule.fields, triodes)?.equal_fields())
        }
    }
}

/// Setup shared by all trajectories of an ensemble run.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryModel<'a> {
    pub network: &'a HermitianOperator,
    pub couplings: &'a CouplingOperators,
    pub g: f64,
    pub mode: CouplingMode,
    pub source: FieldSource,
}

/// Ensemble density operator at each slice boundary, averaged over
/// `schedule.trajectories` field realizations in a fixed order.
pub fn evolve_trajectories(
    initial: &SystemState,
    model: TrajectoryModel<'_>,
    schedule: &RelaxationSchedule,
    seed: u64,
    parallelism: Parallelism,
) -> Result<Vec<SystemState>> {
    schedule.validate()?;
    let times = schedule.sample_times();
    let mut start = initial.clone();
    start.t = schedule.t_start;
    let triodes = model.couplings.space().triode_count();
    let runs = ordered_map(schedule.trajectories, parallelism, |m| -> Result<Vec<CMatrix>> {
        let fields = trajectory_fields(seed, m, schedule, triodes, model.source)?;
        let provider = BathDriven {
            network: model.network,
            couplings: model.couplings,
            fields: &fields,
            g: model.g,
            mode: model.mode,
        };
        let mut state = start.clone();
        let mut out = vec![state.density()];
        for &t in &times[1..] {
            state = evolve_unitary(&state, &provider, t, schedule.dt, StepMethod::Exponential)?;
            out.push(state.density());
        }
        Ok(out)
    });
    let weight = C64::new(1.0 / schedule.trajectories as f64, 0.0);
    let d = initial.space().dim();
    let mut sums = vec![CMatrix::zeros(d, d); times.len()];
    for run in runs {
        for (acc, rho) in sums.iter_mut().zip(run?) {
            *acc += rho;
        }
    }
    Ok(sums
        .into_iter()
        .zip(times)
        .map(|(rho, t)| SystemState::from_parts(initial.space().clone(), Payload::Mixed(rho * weight), t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::FieldStatistics;
    use crate::dynamics::schedule::TemperatureSchedule;
    use crate::hamiltonians::{pair_half_network_hamiltonian, wire_frustration_hamiltonian};
    use crate::network::BooleanNetwork;
    use crate::operator::{max_abs, CVector};
    use crate::spin;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(space: &SpaceLabel, mask: Option<&[bool]>, seed: u64) -> SystemState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi =
            CVector::from_fn(space.dim(), |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        if let Some(mask) = mask {
            for (z, &m) in psi.iter_mut().zip(mask) {
                if !m {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
        let n = psi.norm();
        SystemState::pure(space.clone(), psi.unscale(n), 0.0).unwrap()
    }

    fn schedule(t_end: f64, m: usize) -> RelaxationSchedule {
        RelaxationSchedule {
            t_start: 0.0,
            t_end,
            dt: 0.005,
            slice: 0.25,
            temperature: TemperatureSchedule::Constant { theta: 0.0 },
            fields: FieldStatistics { sigma_b: 1.0, t_c: 0.5 },
            trajectories: m,
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let s = SpaceLabel::spin1(2);
        let psi = random_state(&s, None, 1);
        let out =
            evolve_unitary(&psi, &StaticHamiltonian(HermitianOperator::zero(&s)), 1.0, 0.1, StepMethod::Exponential)
                .unwrap();
        assert!(max_abs(&(out.density() - psi.density())) < 1e-15);
        assert_eq!(out.t, 1.0);
    }

    #[test]
    fn constant_hamiltonian_matches_eigen_propagator() {
        let s = SpaceLabel::pair(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = CMatrix::from_fn(4, 4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = HermitianOperator::new(s.clone(), (&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap();
        let psi = random_state(&s, None, 2);
        let total = 2.7;
        let out = evolve_unitary(&psi, &StaticHamiltonian(h.clone()), total, 0.01, StepMethod::Exponential).unwrap();
        let e = h.eigen();
        let phases = CVector::from_iterator(4, e.values.iter().map(|&l| C64::from_polar(1.0, -l * total)));
        let u = &e.vectors * CMatrix::from_diagonal(&phases) * e.vectors.adjoint();
        let Payload::Pure(a) = out.payload() else { panic!() };
        let Payload::Pure(b) = psi.payload() else { panic!() };
        assert!((a - u * b).iter().all(|z| z.norm() < 1e-8));
        // energy and norm
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert!((out.expectation(&h) - psi.expectation(&h)).abs() < 1e-8);
    }

    #[test]
    fn step_guard() {
        let s = SpaceLabel::spin1(1);
        let h = HermitianOperator::identity(&s).scale(10.0);
        let psi = SystemState::basis(&s, 0).unwrap();
        assert!(matches!(
            evolve_unitary(&psi, &StaticHamiltonian(h), 1.0, 0.05, StepMethod::Exponential),
            Err(Error::StepGuard { .. })
        ));
    }

    #[test]
    fn norm_drift_over_many_steps() {
        let net = BooleanNetwork::six_node_example();
        let space = SpaceLabel::pair(2);
        let hn = wire_frustration_hamiltonian(&net, &space, 1.0).unwrap();
        let ops = CouplingOperators::new(&space).unwrap();
        let sched = RelaxationSchedule { t_end: 20.0, dt: 0.002, ..schedule(20.0, 1) };
        let fields = trajectory_fields(4, 0, &sched, 2, FieldSource::Sampled).unwrap();
        let provider =
            BathDriven { network: &hn, couplings: &ops, fields: &fields, g: 1.0, mode: CouplingMode::Asymmetric };
        let psi = random_state(&space, None, 3);
        let out = evolve_unitary(&psi, &provider, 20.0, 0.002, StepMethod::Exponential).unwrap();
        let Payload::Pure(v) = out.payload() else { panic!() };
        assert!((v.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_halving_shows_second_order() {
        let net = BooleanNetwork::six_node_example();
        let space = SpaceLabel::pair(2);
        let hn = wire_frustration_hamiltonian(&net, &space, 1.0).unwrap();
        let ops = CouplingOperators::new(&space).unwrap();
        let sched = RelaxationSchedule { dt: 0.006, ..schedule(1.2, 1) };
        let fields = trajectory_fields(9, 0, &sched, 2, FieldSource::Sampled).unwrap();
        let provider =
            BathDriven { network: &hn, couplings: &ops, fields: &fields, g: 1.0, mode: CouplingMode::Asymmetric };
        let psi = random_state(&space, None, 4);
        let ratio = step_halving_ratio(&psi, &provider, 1.2, 0.006).unwrap();
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn symmetric_run_stays_in_triplet_sector() {
        let net = BooleanNetwork::six_node_example();
        let space = SpaceLabel::pair(2);
        let hn = pair_half_network_hamiltonian(&net, 1.0, 0.0).unwrap();
        let ops = CouplingOperators::new(&space).unwrap();
        let mask = spin::triplet_mask(&space);
        let psi = random_state(&space, Some(&mask), 6);
        let model = TrajectoryModel {
            network: &hn,
            couplings: &ops,
            g: 1.0,
            mode: CouplingMode::Symmetric,
            source: FieldSource::Sampled,
        };
        let out = evolve_trajectories(&psi, model, &schedule(2.0, 3), 11, Parallelism::default()).unwrap();
        for s in &out {
            assert!(s.weight_outside(&mask) < 1e-8);
            s.validate().unwrap();
        }
    }

    #[test]
    fn ensemble_special_cases() {
        let net = BooleanNetwork::six_node_example();
        let space = SpaceLabel::pair(2);
        let hn = wire_frustration_hamiltonian(&net, &space, 1.0).unwrap();
        let ops = CouplingOperators::new(&space).unwrap();
        let psi = random_state(&space, None, 8);
        // one trajectory: a pure-state projector
        let model = TrajectoryModel {
            network: &hn,
            couplings: &ops,
            g: 1.0,
            mode: CouplingMode::Asymmetric,
            source: FieldSource::Sampled,
        };
        let out = evolve_trajectories(&psi, model, &schedule(1.0, 1), 1, Parallelism::Sequential).unwrap();
        let rho = out.last().unwrap().density();
        assert!(max_abs(&(&rho * &rho - &rho)) < 1e-10);
        // no bath: unitary image under the network Hamiltonian alone
        let model = TrajectoryModel { source: FieldSource::Zero, ..model };
        let out = evolve_trajectories(&psi, model, &schedule(1.0, 2), 1, Parallelism::Sequential).unwrap();
        let direct = evolve_unitary(&psi, &StaticHamiltonian(hn.clone()), 1.0, 0.005, StepMethod::Exponential).unwrap();
        assert!(out.last().unwrap().trace_distance(&direct) < 1e-10);
    }

    #[test]
    fn ensemble_is_independent_of_parallelism() {
        let net = BooleanNetwork::six_node_example();
        let space = SpaceLabel::pair(2);
        let hn = wire_frustration_hamiltonian(&net, &space, 1.0).unwrap();
        let ops = CouplingOperators::new(&space).unwrap();
        let psi = random_state(&space, None, 10);
        let model = TrajectoryModel {
            network: &hn,
            couplings: &ops,
            g: 1.0,
            mode: CouplingMode::Asymmetric,
            source: FieldSource::Sampled,
        };
        let a = evolve_trajectories(&psi, model, &schedule(0.5, 6), 3, Parallelism::Sequential).unwrap();
        let b = evolve_trajectories(&psi, model, &schedule(0.5, 6), 3, Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
