use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use staticgate::bath::{sample_bath_fields, FieldStatistics, TimeGrid};
use staticgate::dynamics::StepMethod;
use staticgate::dynamics::{
    evolve_dissipative, evolve_trajectories, node_distribution, CouplingMode, DaviesModel, Parallelism, SystemState,
    TrajectoryModel,
};
use staticgate::hamiltonians::{network_hamiltonian, wire_spectrum_report, CouplingConstants, CouplingOperators};
use staticgate::operator::{degeneracies, CVector};
use staticgate::projection::{
    build_decomposition, compare_takeoff, nucleus_probability, probabilities, run_sliced_comparison,
    takeoff_prediction, verify_projection_identity, ComparisonSetup, Decomposition, Engine, StateClass,
};
use staticgate::{seeding, BooleanNetwork, Error, FactorKind, HermitianOperator, Representation, SpaceLabel, C64};

use crate::config::{ExperimentConfig, InitialState};
use crate::table::{num, write_file, Summary, Table};
use crate::{CliError, CliResult};

/// Tolerance for grouping degenerate levels.
const LEVEL_TOL: f64 = 1e-9;

pub fn load_network(path: &Path) -> CliResult<BooleanNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(BooleanNetwork::parse(&text)?)
}

fn solution_count(result: staticgate::Result<Vec<staticgate::Assignment>>) -> CliResult<Option<usize>> {
    match result {
        Ok(s) => Ok(Some(s.len())),
        Err(Error::SearchBound { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn count_text(c: Option<usize>) -> String {
    c.map_or_else(|| "skipped (search bound)".to_string(), |n| n.to_string())
}

pub fn validate(network: &Path) -> CliResult<String> {
    let net = load_network(network)?;
    let mut out = format!("Q={} W={} T={}\n", net.node_count(), net.wire_count(), net.triode_count());
    let triode = solution_count(net.enumerate_solutions())?;
    let xor = solution_count(net.enumerate_xor_solutions())?;
    let _ = writeln!(out, "triode solutions: {}", count_text(triode));
    let _ = writeln!(out, "XOR solutions: {}", count_text(xor));
    for w in net.warnings() {
        let _ = writeln!(out, "warning: {w}");
    }
    Ok(out)
}

fn write_or_return(out: Option<&Path>, body: String, note: String) -> CliResult<String> {
    match out {
        Some(path) => {
            write_file(path, &body)?;
            Ok(note)
        }
        None => Ok(body),
    }
}

pub fn spectrum(network: &Path, rep: Representation, c: &CouplingConstants, out: Option<&Path>) -> CliResult<String> {
    let net = load_network(network)?;
    let space = SpaceLabel::for_representation(rep, net.triode_count());
    space.ensure_bounded()?;
    let h = network_hamiltonian(&net, &space, c)?;
    let spectrum = h.spectrum();
    let levels = degeneracies(&spectrum, LEVEL_TOL * c.g);

    let sub = if space.representation().has_pairs() {
        staticgate::spin::restrict_to_triplet(&h)?.spectrum()
    } else {
        spectrum.clone()
    };
    let triplet_levels = degeneracies(&sub, LEVEL_TOL * c.g);
    let idlers = space.factors().iter().filter(|f| f.kind == FactorKind::Idler).count();
    let solutions = solution_count(net.enumerate_solutions())?;

    let mut table = Table::new(&[("energy", "g"), ("degeneracy", "1")]);
    table.comment(format!("spectrum rep={rep} g={} g_prime={} j={}", c.g, c.g_prime, c.ferro_penalty));
    table.comment(space.header().trim_start_matches("# ").to_string());
    for (e, d) in &levels {
        table.row(vec![num(*e), d.to_string()]);
    }
    let (e0, d0) = levels[0];
    let (t0, td) = triplet_levels[0];
    let verdict = match solutions {
        Some(0) => (t0 > LEVEL_TOL * c.g).then_some("match"),
        Some(n) => (t0.abs() <= LEVEL_TOL * c.g && td == n << idlers).then_some("match"),
        None => Some("unchecked"),
    }
    .unwrap_or("mismatch");
    let mut summary = Summary::default();
    summary
        .num("ground_energy", e0)
        .put("ground_degeneracy", d0)
        .num("triplet_ground_energy", t0)
        .put("triplet_ground_degeneracy", td)
        .put("solutions", count_text(solutions))
        .put("idlers", idlers)
        .put("oracle", verdict);
    let mut body = table.render();
    for line in summary.render().lines() {
        let _ = writeln!(body, "# {line}");
    }
    let text = write_or_return(out, body, summary.render())?;
    if verdict == "mismatch" {
        return Err(
            Error::Invariant { check: "ground-space-oracle", detail: summary.render().replace('\n', "; ") }.into()
        );
    }
    Ok(text)
}

pub fn wire_spectrum(g: f64, out: Option<&Path>) -> CliResult<String> {
    let r = wire_spectrum_report(g)?;
    let mut table = Table::new(&[("energy", "g"), ("degeneracy", "1")]);
    table.comment(format!("wire spectrum g={g} dim={}", r.spectrum.len()));
    for (e, d) in degeneracies(&r.spectrum, LEVEL_TOL * g) {
        table.row(vec![num(e / g), d.to_string()]);
    }
    let mut summary = Summary::default();
    summary.put("kernel_dimension", r.kernel_dimension);
    for p in &r.kernel_patterns {
        summary.put("kernel_pattern", format!("s1={} s2={} n1={} n2={}", p[0], p[1], p[2], p[3]));
    }
    summary.num("frustrated_min", r.frustrated_min).num("wire_satisfaction", r.wire_satisfaction);
    let mut body = table.render();
    for line in summary.render().lines() {
        let _ = writeln!(body, "# {line}");
    }
    write_or_return(out, body, summary.render())
}

fn random_triplet_state(space: &SpaceLabel, mask: &[bool], seed: u64) -> CliResult<SystemState> {
    let mut rng = seeding::rng(seed, seeding::INITIAL_STATE);
    let mut v = CVector::zeros(space.dim());
    for (z, &m) in v.iter_mut().zip(mask) {
        let (re, im) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        if m {
            *z = C64::new(re, im);
        }
    }
    let n = v.norm();
    Ok(SystemState::pure(space.clone(), v.unscale(n), 0.0)?)
}

fn initial_state(kind: InitialState, d: &Decomposition, seed: u64) -> CliResult<SystemState> {
    let space = d.space();
    Ok(match kind {
        InitialState::TripletUniform => SystemState::uniform_mixture(space, &d.triplet_mask())?,
        InitialState::FrustratedUniform => SystemState::uniform_mixture(space, &d.mask(StateClass::Frustrated))?,
        InitialState::RandomTriplet => random_triplet_state(space, &d.triplet_mask(), seed)?,
    })
}

/// Network, space, Hamiltonian and decomposition for a config.
struct Prepared {
    net: BooleanNetwork,
    h: HermitianOperator,
    decomposition: Decomposition,
    initial: SystemState,
}

fn prepare(cfg: &ExperimentConfig, seed: u64) -> CliResult<Prepared> {
    let net = load_network(&cfg.network_path())?;
    let space = SpaceLabel::for_representation(cfg.representation, net.triode_count());
    space.ensure_bounded()?;
    let h = network_hamiltonian(&net, &space, &cfg.constants()?)?;
    let decomposition = build_decomposition(&net, &space)?;
    let initial = initial_state(cfg.initial, &decomposition, seed)?;
    Ok(Prepared { net, h, decomposition, initial })
}

fn output_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    match (out, &cfg.out) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => cfg.base.join(o),
        (None, None) => PathBuf::from("out"),
    }
}

fn log(cfg: &ExperimentConfig, msg: &str) {
    if cfg.verbosity > 0 {
        eprintln!("{msg}");
    }
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Unitary => "unitary",
        Engine::Dissipative => "dissipative",
    }
}

fn mode_name(m: CouplingMode) -> &'static str {
    match m {
        CouplingMode::Symmetric => "symmetric",
        CouplingMode::Asymmetric => "asymmetric",
    }
}

pub fn relax(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<String> {
    let seed = seed.unwrap_or(cfg.seed);
    let p = prepare(cfg, seed)?;
    let schedule = cfg.schedule()?;
    let couplings = CouplingOperators::new(p.h.space())?;
    let times = schedule.sample_times();
    log(cfg, &format!("relax: {} samples, engine {}", times.len(), engine_name(cfg.engine)));
    let states = match cfg.engine {
        Engine::Dissipative => {
            let model = DaviesModel::new(&p.h, &couplings, cfg.mode, cfg.couplings.g, schedule.fields)?;
            evolve_dissipative(&p.initial, &model, &schedule.temperature, &times, schedule.dt)?
        }
        Engine::Unitary => {
            let model = TrajectoryModel {
                network: &p.h,
                couplings: &couplings,
                g: cfg.couplings.g,
                mode: cfg.mode,
                source: cfg.fields.into(),
            };
            evolve_trajectories(&p.initial, model, &schedule, seed, Parallelism::default())?
        }
    };

    let mut table = Table::new(&[
        ("t", "time"),
        ("theta", "energy"),
        ("energy", "energy"),
        ("p0", "1"),
        ("pF", "1"),
        ("pV", "1"),
        ("triplet_weight", "1"),
    ]);
    table.comment(format!("relax engine={} mode={} seed={seed}", engine_name(cfg.engine), mode_name(cfg.mode)));
    table.comment(p.h.space().header().trim_start_matches("# ").to_string());
    let pv0 = probabilities(&states[0], &p.decomposition)?.pv;
    for s in &states {
        let pr = probabilities(s, &p.decomposition)?;
        let tr = s.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant { check: "trace", detail: format!("trace {tr} at t = {}", s.t) }.into());
        }
        if let Some(low) = s.populations().into_iter().find(|&x| x < -1e-9) {
            return Err(
                Error::Invariant { check: "positivity", detail: format!("population {low} at t = {}", s.t) }.into()
            );
        }
        if cfg.mode == CouplingMode::Symmetric && (pr.pv - pv0).abs() > 1e-8 {
            return Err(Error::Invariant {
                check: "triplet-conservation",
                detail: format!("pV moved to {} at t = {}", pr.pv, s.t),
            }
            .into());
        }
        table.row(vec![
            num(s.t),
            num(schedule.temperature.at(s.t)),
            num(s.expectation(&p.h)),
            num(pr.p0),
            num(pr.pf),
            num(pr.pv),
            num(1.0 - pr.pv),
        ]);
    }

    let last = states.last().expect("at least one sample");
    let dist = node_distribution(last, &p.net)?;
    let solutions = p.net.enumerate_solutions().ok().unwrap_or_default();
    let mut rng = seeding::rng(seed, seeding::MEASUREMENT);
    let n = cfg.measurement.samples;
    let hits = (0..n).filter(|_| solutions.contains(&dist.sample(&mut rng))).count();
    let pr = probabilities(last, &p.decomposition)?;
    let mut summary = Summary::default();
    summary
        .put("engine", engine_name(cfg.engine))
        .put("mode", mode_name(cfg.mode))
        .put("seed", seed)
        .num("final_energy", last.expectation(&p.h))
        .num("final_p0", pr.p0)
        .put("solutions", solutions.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .put("samples", n)
        .put("solution_hits", hits)
        .num("solution_frequency", if n > 0 { hits as f64 / n as f64 } else { 0.0 });
    if let Some((a, prob)) = dist.most_likely() {
        summary.put("most_likely", a).num("most_likely_probability", *prob);
    }
    let dir = output_dir(cfg, out);
    write_file(&dir.join("relax.tsv"), &table.render())?;
    write_file(&dir.join("relax_summary.tsv"), &summary.render())?;
    Ok(summary.render())
}

pub fn compare(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<String> {
    let seed = seed.unwrap_or(cfg.seed);
    let p = prepare(cfg, seed)?;
    let schedule = cfg.schedule()?;
    let setup = ComparisonSetup::new(&p.net, p.h.clone(), cfg.couplings.g, cfg.engine, cfg.fields.into())?;
    log(cfg, &format!("compare: {} slices, engine {}", schedule.sample_times().len() - 1, engine_name(cfg.engine)));
    let run = run_sliced_comparison(&setup, &p.initial, &schedule, seed, Parallelism::default())?;

    let mut table = Table::new(&[
        ("t", "time"),
        ("actual_p0", "1"),
        ("actual_pF", "1"),
        ("actual_pV", "1"),
        ("actual_energy", "energy"),
        ("pre_p0", "1"),
        ("pre_pF", "1"),
        ("pre_pV", "1"),
        ("pre_energy", "energy"),
        ("comparison_p0", "1"),
        ("comparison_pF", "1"),
        ("comparison_pV", "1"),
        ("comparison_energy", "energy"),
        ("annihilated", "1"),
    ]);
    table.comment(
        format!("compare engine={} fields={:?} seed={seed}", engine_name(cfg.engine), cfg.fields).to_lowercase(),
    );
    table.comment(p.h.space().header().trim_start_matches("# ").to_string());
    for r in &run.records {
        table.row(vec![
            num(r.t),
            num(r.actual.p0),
            num(r.actual.pf),
            num(r.actual.pv),
            num(r.actual_energy),
            num(r.pre_projection.p0),
            num(r.pre_projection.pf),
            num(r.pre_projection.pv),
            num(r.pre_energy),
            num(r.comparison.p0),
            num(r.comparison.pf),
            num(r.comparison.pv),
            num(r.comparison_energy),
            num(r.annihilated),
        ]);
    }

    let mut summary = Summary::default();
    let last = run.records.last().expect("at least one record");
    summary
        .put("engine", engine_name(cfg.engine))
        .put("seed", seed)
        .num("final_p0", last.comparison.p0)
        .num("final_actual_p0", last.actual.p0)
        .num("final_trace_distance", run.actual_final.trace_distance(&run.comparison_final))
        .num("nucleus_p0", nucleus_probability(p.net.node_count()));
    match compare_takeoff(&run) {
        Ok(t) => {
            summary
                .num("k", t.k)
                .num("k_energy", t.k_energy)
                .num("t_h", t.t_h)
                .num("p0_onset", t.p0_onset)
                .num("window_end", t.t_end)
                .put("window_points", t.points)
                .num("growth_rate", t.growth)
                .num("fit_residual", t.fit_residual)
                .num("relative_deviation", t.relative_deviation)
                .num("max_prediction_deviation", t.max_prediction_deviation)
                .num("renormalization_rate", t.renormalization_rate)
                .num("direct_rate", t.direct_rate)
                .num("predicted_p0", takeoff_prediction(t.k, t.t_end - t.t_h, t.p0_onset));
        }
        Err(e) => {
            summary.put("takeoff", format!("none ({e})"));
        }
    }
    let dir = output_dir(cfg, out);
    write_file(&dir.join("compare.tsv"), &table.render())?;
    write_file(&dir.join("compare_summary.tsv"), &summary.render())?;
    Ok(summary.render())
}

/// Parameters of the projection identity ladder.
#[derive(Debug, Clone, Copy)]
pub struct IdentityOptions {
    pub g: f64,
    pub fields: FieldStatistics,
    pub t: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self { g: 1.0, fields: FieldStatistics { sigma_b: 1.0, t_c: 0.5 }, t: 0.3 }
    }
}

pub fn identity_check(network: &Path, seed: u64, opts: IdentityOptions, out: Option<&Path>) -> CliResult<String> {
    let net = load_network(network)?;
    let space = SpaceLabel::pair(net.triode_count());
    space.ensure_bounded()?;
    let c = CouplingConstants::new(opts.g, 0.0, 0.0)?;
    let h = network_hamiltonian(&net, &space, &c)?;
    let couplings = CouplingOperators::new(&space)?;
    let psi = random_triplet_state(&space, &staticgate::spin::triplet_mask(&space), seed)?;
    let grid = TimeGrid::covering(0.0, 2.0 * opts.t + 0.1, 0.01);
    let fields = sample_bath_fields(seed, seeding::trajectory_stream(0), grid, opts.fields, net.triode_count())?;
    let dts = [0.008, 0.004, 0.002];

    let mut table = Table::new(&[("method", "-"), ("fields", "-"), ("dt", "time"), ("residual", "1")]);
    table.comment(format!("identity-check seed={seed} t={}", opts.t));
    let mut summary = Summary::default();
    for (method, mname) in [(StepMethod::FirstOrder, "first_order"), (StepMethod::Exponential, "exponential")] {
        for (f, fname) in [(fields.clone(), "independent"), (fields.equal_fields(), "equal")] {
            let ladder = verify_projection_identity(&psi, &h, &couplings, &f, opts.g, opts.t, &dts, method)?;
            for (dt, r) in ladder.dts.iter().zip(&ladder.residuals) {
                table.row(vec![mname.into(), fname.into(), num(*dt), num(*r)]);
            }
            let max = ladder.residuals.iter().copied().fold(0.0, f64::max);
            summary.num(&format!("{mname}_{fname}_max_residual"), max);
            if fname == "independent" {
                summary.num(&format!("{mname}_order"), ladder.order);
                if method == StepMethod::FirstOrder {
                    summary.num("generator_residual", ladder.generator_residual);
                }
            }
        }
    }
    let mut body = table.render();
    for line in summary.render().lines() {
        let _ = writeln!(body, "# {line}");
    }
    write_or_return(out, body, summary.render())
}
