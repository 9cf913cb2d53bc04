use std::path::Path;

use boolflow::formula::NetworkSpec;
use boolflow::harness::{
    admissible_delta, build_region, estimate_constants, lyapunov_with, run_example_suite_seeded, verify_theorem_with, LyapunovOptions,
    SweepConfig,
};
use boolflow::{
    integrate, state_box, BooleanFunction, BooleanState, ConsistencyLevel, ContinuousConversion, FlowKind, FlowSpec, IntegrationOptions,
    Scheme, VerdictReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Result of a command: the report, whether its checks passed, and any
/// extra files to write next to the JSON report.
pub struct Outcome {
    pub passed: bool,
    pub reason: Option<String>,
    pub report: Value,
    pub summary: String,
    pub csv: Vec<(&'static str, String)>,
}

impl Outcome {
    fn checked(passed: bool, reason: impl FnOnce() -> String, report: Value, summary: String) -> Self {
        Outcome { passed, reason: (!passed).then(reason), report, summary, csv: Vec::new() }
    }
}

pub fn load_network(path: &Path) -> Result<NetworkSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(NetworkSpec::parse(&text)?)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn analyze(spec: &NetworkSpec) -> Result<Outcome, CliError> {
    let f = spec.lower_to_table()?;
    let global = f.stepping(None)?;
    let mut orbits = Vec::new();
    for s in f.states() {
        let orbit = f.orbit(&s)?;
        orbits.push(json!({
            "state": s,
            "image": f.step(&s)?,
            "tail": orbit.tail,
            "cycle": orbit.cycle,
            "classification": f.stepping(Some(&s))?.classification,
        }));
    }
    let attractors = f.attractors();
    let fixed = f.fixed_points();
    let slope = f.derrida_slope();
    let slope_value = *slope.numer() as f64 / *slope.denom() as f64;
    let periods: Vec<usize> = attractors.iter().map(Vec::len).collect();
    let shape =
        if fixed.len() as u64 == f.num_states() { "all states fixed".to_string() } else { format!("attractor periods {periods:?}") };
    let summary = format!(
        "one-stepping: {}; monotone-stepping: {}; {shape}; Derrida slope {slope_value}",
        yes(global.is_one_stepping()),
        yes(global.is_monotone_stepping())
    );
    let report = json!({
        "n": f.dim(),
        "table": f.to_table_text(),
        "fixed_points": fixed,
        "attractors": attractors,
        "stepping": global,
        "one_stepping": global.is_one_stepping(),
        "monotone_stepping": global.is_monotone_stepping(),
        "derrida_slope": { "exact": slope.to_string(), "value": slope_value },
        "orbits": orbits,
    });
    Ok(Outcome::checked(true, String::new, report, summary))
}

pub fn convert(spec: &NetworkSpec, scheme: Scheme) -> Result<Outcome, CliError> {
    let f = spec.lower_to_table()?;
    let conv = ContinuousConversion::build(spec, scheme)?;
    let report = conv.report(&f);
    let mut summary: Vec<String> = report.coords.iter().map(|c| format!("P{} = {}", c.index, c.text)).collect();
    summary.push(format!(
        "corner check: {} (max error {:e})",
        if report.corner_check.passed { "pass" } else { "FAIL" },
        report.corner_check.max_error
    ));
    let passed = report.corner_check.passed;
    let mismatches = report.corner_check.mismatches.len();
    Ok(Outcome::checked(
        passed,
        || format!("corner check failed at {mismatches} corner(s)"),
        serde_json::to_value(&report).expect("plain data"),
        summary.join("\n"),
    ))
}

/// Draws a start from the region `U^s` used by the time-scale argument.
fn sample_region(f: &BooleanFunction, conv: &ContinuousConversion, gamma: &[f64], state: &str, seed: u64) -> Result<Vec<f64>, CliError> {
    let n = f.dim();
    let s: BooleanState = state.parse()?;
    if s.dim() != n {
        return Err(CliError::Usage(format!("--sample-us state `{state}` has {} bits, network has {n}", s.dim())));
    }
    let delta = admissible_delta(conv, f, SweepConfig::default().delta)
        .ok_or_else(|| CliError::Usage("no admissible delta for this conversion".into()))?;
    let constants = estimate_constants(f, conv, &gamma[..n], delta)?;
    let region = build_region(f, s, delta, constants.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(region.sample(&mut rng)?)
}

pub struct SimulateArgs {
    pub scheme: Scheme,
    pub kind: FlowKind,
    pub gamma: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub sample_us: Option<String>,
    pub t_end: f64,
    pub require: Option<ConsistencyLevel>,
    pub seed: u64,
}

pub fn simulate(spec: &NetworkSpec, args: &SimulateArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let flow = FlowSpec::from_network(spec, args.scheme, args.kind, args.gamma.clone())?;
    let x0 = match (&args.x0, &args.sample_us) {
        (Some(x0), None) => x0.clone(),
        (None, Some(state)) => {
            if args.kind != FlowKind::D2 {
                return Err(CliError::Usage("--sample-us needs --kind D2".into()));
            }
            sample_region(flow.function(), flow.conversion(), flow.gamma(), state, args.seed)?
        }
        _ => return Err(CliError::Usage("give exactly one of --x0 and --sample-us".into())),
    };
    let opts = IntegrationOptions::default().with_t_end(args.t_end);
    cfg.gamma = Some(flow.gamma().to_vec());
    cfg.x0 = Some(x0.clone());
    cfg.integration = Some(opts.clone());
    let traj = integrate(&flow, &x0, &opts)?;
    let indices: Vec<usize> = (0..flow.n()).collect();
    let verdict = VerdictReport::build(&traj, &indices, flow.function());
    let summary = format!(
        "{:?}: trace {} ({} switches by t = {})",
        verdict.level,
        verdict.trace.join(" -> "),
        verdict.switching_times.len().saturating_sub(1),
        traj.t_final()
    );
    let passed = args.require.is_none_or(|r| verdict.level >= r);
    let require = args.require;
    let level = verdict.level;
    let report = json!({
        "flow": flow.describe(),
        "x0": x0,
        "stats": traj.stats(),
        "events": traj.events().len(),
        "verdict": verdict,
    });
    let mut out = Outcome::checked(passed, || format!("verdict {level:?} below required {:?}", require.expect("set")), report, summary);
    out.csv.push(("trajectory.csv", traj.to_csv(&[cfg.csv_preamble()])));
    Ok(out)
}

pub fn sweep(
    spec: &NetworkSpec,
    scheme: Scheme,
    gamma_minus: Option<Vec<f64>>,
    mu_grid: &[f64],
    samples: usize,
    seed: u64,
    cfg: &mut RunConfig,
) -> Result<Outcome, CliError> {
    let f = spec.lower_to_table()?;
    let conv = ContinuousConversion::build(spec, scheme)?;
    let gamma_minus = gamma_minus.unwrap_or_else(|| vec![1.0; f.dim()]);
    if gamma_minus.len() != f.dim() {
        return Err(CliError::Usage(format!("sweep --gamma takes the {} signature rates, got {}", f.dim(), gamma_minus.len())));
    }
    cfg.gamma = Some(gamma_minus.clone());
    let sweep_cfg = SweepConfig { samples_per_state: samples, seed, ..SweepConfig::default() };
    cfg.integration = Some(sweep_cfg.options.clone());
    let result = verify_theorem_with(&f, &conv, &gamma_minus, mu_grid, &sweep_cfg)?;
    let mut summary = vec![format!(
        "delta {:.2}, alpha {:.4e}, beta {:.4e}, mu_bound {:.4e}",
        result.constants.delta, result.constants.alpha, result.constants.beta, result.constants.mu_bound
    )];
    for c in &result.cells {
        summary.push(format!(
            "mu {:.3e}{}: consistent {}/{}, strong {}/{}, claim met {:.3}",
            c.mu,
            if c.below_bound { "" } else { " (above bound)" },
            c.consistent,
            c.samples,
            c.strongly_consistent,
            c.samples,
            c.frac_claim
        ));
    }
    let passed = result.theorem_reproduced();
    let anomalies = result.anomalies;
    let mut out = Outcome::checked(
        passed,
        || format!("a start below the bound missed its claim or {anomalies} anomalies were found"),
        result.summary_json(),
        summary.join("\n"),
    );
    out.csv.push(("sweep.csv", result.to_csv(&[cfg.csv_preamble()])));
    Ok(out)
}

pub struct LyapunovArgs {
    pub scheme: Scheme,
    pub kind: FlowKind,
    pub gamma: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub horizon: f64,
    pub renorm: f64,
    pub seed: u64,
}

pub fn lyapunov(spec: &NetworkSpec, args: &LyapunovArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let flow = FlowSpec::from_network(spec, args.scheme, args.kind, args.gamma.clone())?;
    let x0 = args.x0.clone().unwrap_or_else(|| {
        let (lo, hi) = state_box();
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        (0..flow.dim()).map(|_| rng.random_range(lo..=hi)).collect()
    });
    cfg.gamma = Some(flow.gamma().to_vec());
    cfg.x0 = Some(x0.clone());
    let opts = LyapunovOptions { horizon: args.horizon, renorm_interval: args.renorm, transient: 0.1 * args.horizon, ..Default::default() };
    let est = lyapunov_with(&flow, &x0, &opts)?;
    let summary = format!("largest Lyapunov exponent {:.5} over {} renormalizations", est.exponent, est.renormalizations);
    Ok(Outcome::checked(true, String::new, json!({ "flow": flow.describe(), "x0": x0, "options": opts, "estimate": est }), summary))
}

pub fn examples(seed: u64) -> Result<Outcome, CliError> {
    let report = run_example_suite_seeded(seed)?;
    let summary: Vec<String> = report
        .claims
        .iter()
        .map(|c| format!("{} {}: expected {}, observed {}", if c.passed { "pass" } else { "FAIL" }, c.id, c.expected, c.observed))
        .collect();
    let failed: Vec<String> = report.claims.iter().filter(|c| !c.passed).map(|c| c.id.clone()).collect();
    Ok(Outcome::checked(
        report.passed,
        || format!("claims failed: {}", failed.join(", ")),
        serde_json::to_value(&report).expect("plain data"),
        summary.join("\n"),
    ))
}
