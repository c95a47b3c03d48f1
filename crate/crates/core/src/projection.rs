//! Comparison between the triode network and its XOR-relaxed counterpart.
//!
//! The comparison system lets the bath address each proton separately, so
//! triodes may fall into singlets. Projecting onto the all-triplet subspace
//! at the end of every slice and renormalizing recovers the actual dynamics
//! as the slice length goes to zero. Along the way the solution probability
//! grows through renormalization, which is the take-off mechanism measured
//! here.

use serde::{Deserialize, Serialize};

use crate::bath::BathFieldSample;
use crate::dynamics::dissipative::{advance, DaviesModel};
use crate::dynamics::schedule::RelaxationSchedule;
use crate::dynamics::state::{Payload, SystemState};
use crate::dynamics::unitary::{
    evolve_unitary, step_operator, trajectory_fields, BathDriven, FieldSource, HamiltonianProvider, StepMethod,
};
use crate::dynamics::{ordered_map, CouplingMode, Parallelism};
use crate::error::{Error, Result};
use crate::hamiltonians::{basis_pattern, CouplingOperators};
use crate::network::BooleanNetwork;
use crate::operator::{max_abs, CMatrix, HermitianOperator, C64};
use crate::space::SpaceLabel;
use crate::spin;

/// Tolerance for runtime probability bookkeeping checks.
pub const BOOKKEEPING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    /// All triodes and wires satisfied.
    Solution,
    /// Triodes satisfied, at least one wire frustrated.
    Frustrated,
    /// At least one triode in its singlet.
    Violated,
}

/// Classification of every basis state of a network space.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    space: SpaceLabel,
    classes: Vec<StateClass>,
}

impl Decomposition {
    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn classes(&self) -> &[StateClass] {
        &self.classes
    }

    pub fn mask(&self, class: StateClass) -> Vec<bool> {
        self.classes.iter().map(|&c| c == class).collect()
    }

    /// Basis states with every triode satisfied; the support of the symmetrizer.
    pub fn triplet_mask(&self) -> Vec<bool> {
        self.classes.iter().map(|&c| c != StateClass::Violated).collect()
    }

    pub fn rank(&self, class: StateClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn projector(&self, class: StateClass) -> HermitianOperator {
        let diag: Vec<f64> = self.mask(class).into_iter().map(|m| if m { 1.0 } else { 0.0 }).collect();
        HermitianOperator::from_real_diagonal(&self.space, &diag)
    }
}

/// Assigns each polarization basis state to a class; a singlet on any
/// triode makes the state triode-violated.
pub fn build_decomposition(net: &BooleanNetwork, space: &SpaceLabel) -> Result<Decomposition> {
    if space.triode_count() != net.triode_count() {
        return Err(Error::Space(format!(
            "network has {} triodes, space has {}",
            net.triode_count(),
            space.triode_count()
        )));
    }
    let classes = (0..space.dim())
        .map(|i| {
            let (values, singlets) = basis_pattern(space, net, i);
            if singlets.iter().any(|&s| s) {
                StateClass::Violated
            } else if net.wires().iter().any(|&(a, b)| values[a - 1] != values[b - 1]) {
                StateClass::Frustrated
            } else {
                StateClass::Solution
            }
        })
        .collect();
    Ok(Decomposition { space: space.clone(), classes })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Probabilities {
    pub p0: f64,
    pub pf: f64,
    pub pv: f64,
}

impl Probabilities {
    pub fn total(&self) -> f64 {
        self.p0 + self.pf + self.pv
    }
}

fn check_space(state: &SystemState, d: &Decomposition) -> Result<()> {
    if state.space() != d.space() {
        return Err(Error::Space("state and decomposition live on different spaces".into()));
    }
    Ok(())
}

/// Class probabilities from the diagonal of the state.
pub fn probabilities(state: &SystemState, d: &Decomposition) -> Result<Probabilities> {
    check_space(state, d)?;
    let mut p = Probabilities::default();
    for (x, c) in state.populations().into_iter().zip(&d.classes) {
        match c {
            StateClass::Solution => p.p0 += x,
            StateClass::Frustrated => p.pf += x,
            StateClass::Violated => p.pv += x,
        }
    }
    Ok(p)
}

/// Probabilities and the unnormalized blocks `Pi_x rho Pi_x` for the
/// solution, frustrated and violated classes.
pub fn decompose(state: &SystemState, d: &Decomposition) -> Result<(Probabilities, [CMatrix; 3])> {
    let p = probabilities(state, d)?;
    let rho = state.density();
    let block = |class| {
        let mask = d.mask(class);
        CMatrix::from_fn(
            rho.nrows(),
            rho.ncols(),
            |i, j| if mask[i] && mask[j] { rho[(i, j)] } else { C64::new(0.0, 0.0) },
        )
    };
    Ok((p, [block(StateClass::Solution), block(StateClass::Frustrated), block(StateClass::Violated)]))
}

fn project_payload(payload: &mut Payload, mask: &[bool]) {
    match payload {
        Payload::Pure(psi) => {
            for (z, &m) in psi.iter_mut().zip(mask) {
                if !m {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
        Payload::Mixed(rho) => {
            let n = rho.nrows();
            for j in 0..n {
                for i in 0..n {
                    if !(mask[i] && mask[j]) {
                        rho[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
            }
        }
    }
}

fn normalize_payload(payload: &mut Payload) -> f64 {
    match payload {
        Payload::Pure(psi) => {
            let n = psi.norm();
            if n > 0.0 {
                psi.unscale_mut(n);
            }
            n * n
        }
        Payload::Mixed(rho) => {
            let tr = rho.trace().re;
            if tr > 0.0 {
                *rho /= C64::new(tr, 0.0);
            }
            tr
        }
    }
}

/// `P rho P / tr(P rho P)` (or the pure analogue) for a diagonal projector
/// given by `mask`. Returns the state and the retained weight.
pub fn project_and_renormalize(state: &SystemState, mask: &[bool]) -> Result<(SystemState, f64)> {
    if mask.len() != state.space().dim() {
        return Err(Error::Space("projector and state dimensions differ".into()));
    }
    let mut out = state.clone();
    project_payload(out.payload_mut(), mask);
    let kept = normalize_payload(out.payload_mut());
    if !(kept > 1e-300) {
        return Err(Error::Annihilated { slice: None });
    }
    Ok((out, kept))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Least-squares line: `(slope, intercept, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Residuals of the projection identity over a ladder of step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityLadder {
    pub dts: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Fitted log-log slope; `NaN` when every residual vanishes.
    pub order: f64,
    /// `max |P H_A P - H_sym P|` at the first midpoint.
    pub generator_residual: f64,
}

/// Compares one projected comparison step with one symmetric step from `psi`.
pub fn verify_projection_identity(
    psi: &SystemState,
    network: &HermitianOperator,
    couplings: &CouplingOperators,
    fields: &BathFieldSample,
    g: f64,
    t: f64,
    dts: &[f64],
    method: StepMethod,
) -> Result<IdentityLadder> {
    let Payload::Pure(v) = psi.payload() else {
        return Err(Error::State("the identity check needs a pure state".into()));
    };
    let mask = spin::triplet_mask(psi.space());
    let outside = v.iter().zip(&mask).filter(|(_, &m)| !m).map(|(z, _)| z.norm()).fold(0.0, f64::max);
    if outside > 1e-12 {
        return Err(Error::State(format!("state leaves the triplet sector by {outside:e}")));
    }
    let asym = BathDriven { network, couplings, fields, g, mode: CouplingMode::Asymmetric };
    let sym = BathDriven { mode: CouplingMode::Symmetric, ..asym };
    let p = CMatrix::from_diagonal(&crate::operator::CVector::from_iterator(
        mask.len(),
        mask.iter().map(|&m| C64::new(if m { 1.0 } else { 0.0 }, 0.0)),
    ));
    let mut residuals = Vec::with_capacity(dts.len());
    let mut generator_residual = 0.0;
    for (k, &dt) in dts.iter().enumerate() {
        let ha = asym.at(t + 0.5 * dt)?;
        let hs = sym.at(t + 0.5 * dt)?;
        if k == 0 {
            generator_residual = max_abs(&(&p * &ha * &p - &hs * &p));
        }
        let mut a = step_operator(&ha, dt, method)? * v;
        for (z, &m) in a.iter_mut().zip(&mask) {
            if !m {
                *z = C64::new(0.0, 0.0);
            }
        }
        let s = step_operator(&hs, dt, method)? * v;
        residuals.push((a - s).norm());
    }
    let order = if residuals.iter().all(|&r| r > 0.0) { log_log_slope(dts, &residuals) } else { f64::NAN };
    Ok(IdentityLadder { dts: dts.to_vec(), residuals, order, generator_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Stochastic-field Schroedinger evolution.
    Unitary,
    /// Davies cooling at the scheduled temperature.
    Dissipative,
}

/// Everything a sliced comparison run needs besides the schedule.
#[derive(Debug, Clone)]
pub struct ComparisonSetup {
    pub decomposition: Decomposition,
    /// Network Hamiltonian on the pair space; also the energy observable.
    pub network: HermitianOperator,
    pub couplings: CouplingOperators,
    pub g: f64,
    pub engine: Engine,
    /// Field source for the unitary engine.
    pub fields: FieldSource,
}

impl ComparisonSetup {
    pub fn new(
        net: &BooleanNetwork,
        network: HermitianOperator,
        g: f64,
        engine: Engine,
        fields: FieldSource,
    ) -> Result<Self> {
        let space = network.space().clone();
        Ok(Self {
            decomposition: build_decomposition(net, &space)?,
            couplings: CouplingOperators::new(&space)?,
            network,
            g,
            engine,
            fields,
        })
    }
}

/// One slice boundary of a sliced comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub t: f64,
    pub actual: Probabilities,
    pub actual_energy: f64,
    /// Comparison state at `t` before the projection.
    pub pre_projection: Probabilities,
    pub pre_energy: f64,
    /// Comparison state after projection and renormalization.
    pub comparison: Probabilities,
    pub comparison_energy: f64,
    /// Weight removed by the projection.
    pub annihilated: f64,
}

#[derive(Debug, Clone)]
pub struct SlicedRun {
    pub records: Vec<SliceRecord>,
    pub actual_final: SystemState,
    pub comparison_final: SystemState,
}

fn invariant(check: &'static str, detail: String) -> Error {
    Error::Invariant { check, detail }
}

/// Per-boundary snapshots of one trajectory: actual, comparison before
/// projection and after projection. Comparison snapshots are unnormalized.
type Snapshots = Vec<[SystemState; 3]>;

fn unitary_trajectory(
    setup: &ComparisonSetup,
    start: &SystemState,
    schedule: &RelaxationSchedule,
    times: &[f64],
    seed: u64,
    m: usize,
) -> Result<Snapshots> {
    let fields = trajectory_fields(seed, m, schedule, setup.couplings.space().triode_count(), setup.fields)?;
    let sym = BathDriven {
        network: &setup.network,
        couplings: &setup.couplings,
        fields: &fields,
        g: setup.g,
        mode: CouplingMode::Symmetric,
    };
    let asym = BathDriven { mode: CouplingMode::Asymmetric, ..sym };
    let mask = setup.decomposition.triplet_mask();
    let mut actual = start.clone();
    let mut comparison = start.clone();
    let mut out = vec![[actual.clone(), comparison.clone(), comparison.clone()]];
    for &t in &times[1..] {
        actual = evolve_unitary(&actual, &sym, t, schedule.dt, StepMethod::Exponential)?;
        comparison = evolve_unitary(&comparison, &asym, t, schedule.dt, StepMethod::Exponential)?;
        let pre = comparison.clone();
        project_payload(comparison.payload_mut(), &mask);
        out.push([actual.clone(), pre, comparison.clone()]);
    }
    Ok(out)
}

fn ensemble(states: &[&SystemState]) -> SystemState {
    let first = states[0];
    if let [only] = states {
        let mut s = (*only).clone();
        normalize_payload(s.payload_mut());
        return s;
    }
    let mut rho =
        states.iter().fold(CMatrix::zeros(first.space().dim(), first.space().dim()), |acc, s| acc + s.density());
    let tr = rho.trace().re;
    if tr > 0.0 {
        rho /= C64::new(tr, 0.0);
    }
    SystemState::from_parts(first.space().clone(), Payload::Mixed(rho), first.t)
}

/// Runs the actual (symmetric) system and the sliced comparison system side by
/// side, recording class probabilities at every slice boundary.
pub fn run_sliced_comparison(
    setup: &ComparisonSetup,
    initial: &SystemState,
    schedule: &RelaxationSchedule,
    seed: u64,
    parallelism: Parallelism,
) -> Result<SlicedRun> {
    schedule.validate()?;
    let d = &setup.decomposition;
    if initial.space() != d.space() {
        return Err(Error::Space("initial state and network live on different spaces".into()));
    }
    let mask = d.triplet_mask();
    let (mut start, _) = project_and_renormalize(initial, &mask)?;
    if initial.weight_outside(&mask) > BOOKKEEPING_TOL {
        return Err(Error::State("the initial state must satisfy every triode".into()));
    }
    start.t = schedule.t_start;
    let times = schedule.sample_times();

    // per boundary: [actual, pre-projection, post-projection], normalized
    let snapshots: Vec<[SystemState; 3]> = match setup.engine {
        Engine::Unitary => {
            let runs = ordered_map(schedule.trajectories, parallelism, |m| {
                unitary_trajectory(setup, &start, schedule, &times, seed, m)
            });
            let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
            (0..times.len())
                .map(|i| [0, 1, 2].map(|k| ensemble(&runs.iter().map(|r| &r[i][k]).collect::<Vec<_>>())))
                .collect()
        }
        Engine::Dissipative => {
            let actual_model =
                DaviesModel::new(&setup.network, &setup.couplings, CouplingMode::Symmetric, setup.g, schedule.fields)?;
            let comparison_model =
                DaviesModel::new(&setup.network, &setup.couplings, CouplingMode::Asymmetric, setup.g, schedule.fields)?;
            let mut actual = start.clone().into_mixed();
            let mut comparison = actual.clone();
            let mut out = vec![[actual.clone(), comparison.clone(), comparison.clone()]];
            for (i, &t) in times.iter().enumerate().skip(1) {
                actual = advance(&actual, &actual_model, &schedule.temperature, t, schedule.dt)?;
                comparison = advance(&comparison, &comparison_model, &schedule.temperature, t, schedule.dt)?;
                let pre = comparison.clone();
                comparison =
                    project_and_renormalize(&comparison, &mask).map_err(|_| Error::Annihilated { slice: Some(i) })?.0;
                out.push([actual.clone(), pre, comparison.clone()]);
            }
            out
        }
    };

    let mut records = Vec::with_capacity(times.len());
    for (i, (snap, &t)) in snapshots.iter().zip(&times).enumerate() {
        let [actual, pre, post] = snap;
        let pa = probabilities(actual, d)?;
        let pp = probabilities(pre, d)?;
        let pc = probabilities(post, d)?;
        for (name, p) in [("actual", pa), ("pre-projection", pp), ("comparison", pc)] {
            if (p.total() - 1.0).abs() > BOOKKEEPING_TOL {
                return Err(invariant(
                    "probability-sum",
                    format!("{name} probabilities sum to {} at t = {t}", p.total()),
                ));
            }
        }
        if pa.pv > 1e-8 {
            return Err(invariant(
                "triplet-conservation",
                format!("actual run leaked {:e} into singlets at t = {t}", pa.pv),
            ));
        }
        if pc.pv > BOOKKEEPING_TOL {
            return Err(invariant(
                "projection",
                format!("projected state keeps weight {:e} outside the triplet sector", pc.pv),
            ));
        }
        if pp.pv >= 1.0 {
            return Err(Error::Annihilated { slice: Some(i) });
        }
        // renormalization scales the solution block by 1 / (1 - annihilated)
        let expected = pp.p0 / (1.0 - pp.pv);
        if (pc.p0 - expected).abs() > BOOKKEEPING_TOL * expected.max(1.0) {
            return Err(invariant(
                "renormalization",
                format!("p0 after projection {} differs from {}", pc.p0, expected),
            ));
        }
        records.push(SliceRecord {
            t,
            actual: pa,
            actual_energy: actual.expectation(&setup.network),
            pre_projection: pp,
            pre_energy: pre.expectation(&setup.network),
            comparison: pc,
            comparison_energy: post.expectation(&setup.network),
            annihilated: pp.pv,
        });
    }
    let [actual_final, _, comparison_final] = snapshots.into_iter().last().expect("at least one boundary");
    Ok(SlicedRun { records, actual_final, comparison_final })
}

/// Per-slice logarithmic decay rates and their time-weighted aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `k = sum_i k_i dt_i / sum_i dt_i`
    pub k: f64,
    pub rates: Vec<f64>,
    /// Slope of the least-squares line through `ln y`, negated.
    pub fitted: f64,
    /// RMS residual of that line.
    pub residual: f64,
}

/// `k_i = -ln(y_{i+1} / y_i) / dt_i` over a strictly positive series.
pub fn estimate_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Parameter("rate estimation needs at least two matching samples".into()));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositive { index, value });
    }
    let rates: Vec<f64> =
        times.windows(2).zip(values.windows(2)).map(|(t, y)| -(y[1] / y[0]).ln() / (t[1] - t[0])).collect();
    let dts: Vec<f64> = times.windows(2).map(|t| t[1] - t[0]).collect();
    let k = aggregate_rate(&rates, &dts);
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, _, residual) = linear_fit(times, &logs);
    Ok(RateFit { k, rates, fitted: -slope, residual })
}

/// `sum_i k_i dt_i / sum_i dt_i`.
pub fn aggregate_rate(rates: &[f64], dts: &[f64]) -> f64 {
    let total: f64 = dts.iter().sum();
    rates.iter().zip(dts).map(|(k, dt)| k * dt).sum::<f64>() / total
}

/// Solution probability a time `delta_t` after onset, `p0 exp(k delta_t)` capped at 1.
pub fn takeoff_prediction(k: f64, delta_t: f64, p0_onset: f64) -> f64 {
    (p0_onset * (k * delta_t).exp()).min(1.0)
}

/// Solution probability of a uniform guess over `q` nodes.
pub fn nucleus_probability(q: usize) -> f64 {
    0.5f64.powi(q as i32)
}

/// Upper end of the take-off window.
pub const TAKEOFF_CEILING: f64 = 0.1;

/// Comparison of measured solution-probability growth with the frustration decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TakeoffReport {
    /// Onset: first boundary with `p0 > 0` in the comparison run.
    pub t_h: f64,
    pub p0_onset: f64,
    /// End of the window: last boundary with `p0 <= TAKEOFF_CEILING`.
    pub t_end: f64,
    pub points: usize,
    /// Aggregate within-slice decay rate of `p_F` over the window.
    pub k: f64,
    /// Same from the network energy.
    pub k_energy: f64,
    pub per_slice: Vec<f64>,
    /// Log-linear growth rate of `p0` over the window.
    pub growth: f64,
    pub fit_residual: f64,
    /// `|growth - k| / k`
    pub relative_deviation: f64,
    /// Largest `|p0(t) / prediction(t) - 1|` over the window.
    pub max_prediction_deviation: f64,
    /// Growth of `p0` contributed by renormalization.
    pub renormalization_rate: f64,
    /// Growth of `p0` within slices, before projection.
    pub direct_rate: f64,
    pub final_p0: f64,
}

/// Locates the take-off window in a sliced run and fits it.
pub fn compare_takeoff(run: &SlicedRun) -> Result<TakeoffReport> {
    let r = &run.records;
    let start = r
        .iter()
        .position(|x| x.comparison.p0 > 0.0)
        .ok_or_else(|| Error::Parameter("solution probability never becomes positive".into()))?;
    let mut end = start;
    while end + 1 < r.len() && r[end + 1].comparison.p0 <= TAKEOFF_CEILING {
        end += 1;
    }
    if end < start + 2 {
        return Err(Error::Parameter(format!("take-off window has {} points, need at least 3", end - start + 1)));
    }
    let w = &r[start..=end];
    let times: Vec<f64> = w.iter().map(|x| x.t).collect();
    let p0: Vec<f64> = w.iter().map(|x| x.comparison.p0).collect();
    let logs: Vec<f64> = p0.iter().map(|p| p.ln()).collect();
    let (growth, _, fit_residual) = linear_fit(&times, &logs);

    let mut per_slice = Vec::new();
    let mut per_slice_energy = Vec::new();
    let mut dts = Vec::new();
    let (mut renorm, mut direct) = (0.0, 0.0);
    for pair in w.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.t - a.t;
        dts.push(dt);
        per_slice.push(-(b.pre_projection.pf / a.comparison.pf).ln() / dt);
        per_slice_energy.push(-(b.pre_energy / a.comparison_energy).ln() / dt);
        renorm += -(1.0 - b.annihilated).ln();
        direct += (b.pre_projection.p0 / a.comparison.p0).ln();
    }
    let span = times[times.len() - 1] - times[0];
    let k = aggregate_rate(&per_slice, &dts);
    let k_energy = aggregate_rate(&per_slice_energy, &dts);
    let max_prediction_deviation = w
        .iter()
        .map(|x| (x.comparison.p0 / takeoff_prediction(k, x.t - times[0], p0[0]) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TakeoffReport {
        t_h: times[0],
        p0_onset: p0[0],
        t_end: times[times.len() - 1],
        points: w.len(),
        k,
        k_energy,
        per_slice,
        growth,
        fit_residual,
        relative_deviation: (growth - k).abs() / k,
        max_prediction_deviation,
        renormalization_rate: renorm / span,
        direct_rate: direct / span,
        final_p0: r[r.len() - 1].comparison.p0,
    })
}
