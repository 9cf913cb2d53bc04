use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::constants::{admissible_delta, check_delta, estimate_constants, TheoremConstants};
use super::region::{build_region, RegionSpec};
use super::HarnessError;
use crate::boolean::BooleanFunction;
use crate::conversion::ContinuousConversion;
use crate::flow::{FlowKind, FlowSpec};
use crate::integrator::{integrate, IntegrationOptions};
use crate::trace::{discretize, judge, strong_implies_onestep_audit, Anomaly, ConsistencyLevel, Witness};

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    /// Starting `δ`; lowered in steps of 0.01 until `Q` is regime-constant.
    pub delta: f64,
    pub samples_per_state: usize,
    pub seed: u64,
    /// Base integrator settings; horizons and event limits are set per cell.
    pub options: IntegrationOptions,
    /// Switches recorded after the trace first reaches `f(s)`.
    pub extra_switches: usize,
    /// Horizon for fixed points of `f`, in units of `1/μ`.
    pub fixed_horizon: f64,
    /// Hard horizon for moving states, in units of `1/μ`.
    pub horizon_cap: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            delta: 0.3,
            samples_per_state: 20,
            seed: 0,
            options: IntegrationOptions { store_every: 4000, guard: 0.5, max_steps: 200_000_000, ..Default::default() },
            extra_switches: 1,
            fixed_horizon: 2.0,
            horizon_cap: 60.0,
        }
    }
}

/// One integrated start.
#[derive(Debug, Clone, Serialize)]
pub struct SampleOutcome {
    pub mu: f64,
    pub state: String,
    pub sample_id: usize,
    pub x0: Vec<f64>,
    pub verdict: ConsistencyLevel,
    /// What the theorem promises for this start.
    pub claim: ConsistencyLevel,
    pub switches: usize,
    pub trace: Vec<String>,
    /// Shortest gap between any two switches.
    pub min_gap: Option<f64>,
    /// Shortest gap between successive switches of one coordinate.
    pub min_same_coord_gap: Option<f64>,
    pub t_final: f64,
    pub steps: usize,
    pub witness: Option<Witness>,
    /// Set when a strongly consistent trace fails the one-stepping audit.
    pub anomaly: Option<Anomaly>,
}

impl SampleOutcome {
    pub fn meets_claim(&self) -> bool {
        self.verdict >= self.claim
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MuCell {
    pub mu: f64,
    pub below_bound: bool,
    pub samples: usize,
    pub consistent: usize,
    pub strongly_consistent: usize,
    pub frac_consistent: f64,
    pub frac_strong: f64,
    /// Fraction of starts that reached the level the theorem promises.
    pub frac_claim: f64,
    pub failures: Vec<SampleOutcome>,
}

/// Which states were swept and why others were not.
#[derive(Debug, Clone, Serialize)]
pub struct StatePlan {
    pub state: String,
    pub target: String,
    pub claim: Option<ConsistencyLevel>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub constants: TheoremConstants,
    pub gamma_minus: Vec<f64>,
    pub seed: u64,
    pub samples_per_state: usize,
    pub states: Vec<StatePlan>,
    pub cells: Vec<MuCell>,
    pub anomalies: usize,
    #[serde(skip)]
    pub outcomes: Vec<SampleOutcome>,
}

impl SweepResult {
    /// `mu,state,sample_id,verdict,claim,switches` rows after `# ` preamble lines.
    pub fn to_csv(&self, preamble: &[String]) -> String {
        let mut out = String::new();
        for line in preamble {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("mu,state,sample_id,verdict,claim,switches\n");
        for o in &self.outcomes {
            out.push_str(&format!("{:e},{},{},{:?},{:?},{}\n", o.mu, o.state, o.sample_id, o.verdict, o.claim, o.switches));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    /// Every start at or below the rate bound met its claim.
    pub fn theorem_reproduced(&self) -> bool {
        self.cells.iter().filter(|c| c.below_bound).all(|c| c.frac_claim == 1.0) && self.anomalies == 0
    }

    /// Shortest same-coordinate switch gap over all starts.
    pub fn min_same_coord_gap(&self) -> Option<f64> {
        self.outcomes.iter().filter_map(|o| o.min_same_coord_gap).min_by(f64::total_cmp)
    }

    /// Shortest switch gap over all starts.
    pub fn min_gap(&self) -> Option<f64> {
        self.outcomes.iter().filter_map(|o| o.min_gap).min_by(f64::total_cmp)
    }

    /// Strongly consistent traces, for auditing against the one-stepping corollary.
    pub fn strong_count(&self) -> usize {
        self.cells.iter().map(|c| c.strongly_consistent).sum()
    }
}

/// Sweep with default settings and `samples_per_state` starts per state.
pub fn verify_theorem(
    f: &BooleanFunction,
    conversion: &ContinuousConversion,
    gamma_minus: &[f64],
    mu_values: &[f64],
    samples_per_state: usize,
) -> Result<SweepResult, HarnessError> {
    let cfg = SweepConfig { samples_per_state, ..SweepConfig::default() };
    verify_theorem_with(f, conversion, gamma_minus, mu_values, &cfg)
}

/// Integrates the D2 flow with rates `(γ⁻, μ, …, μ)` from sampled points of
/// every `U^s` whose Boolean orbit is monotone-stepping, for each `μ`
/// (`μ_bound/10` when `mu_values` is empty).
pub fn verify_theorem_with(
    f: &BooleanFunction,
    conversion: &ContinuousConversion,
    gamma_minus: &[f64],
    mu_values: &[f64],
    cfg: &SweepConfig,
) -> Result<SweepResult, HarnessError> {
    let n = f.dim();
    let delta = match admissible_delta(conversion, f, cfg.delta) {
        Some(d) => d,
        None => {
            check_delta(conversion, f, 0.01)?;
            return Err(HarnessError::BadInput("no admissible delta".into()));
        }
    };
    let constants = estimate_constants(f, conversion, gamma_minus, delta)?;
    let mus: Vec<f64> = if mu_values.is_empty() { vec![constants.mu_bound / 10.0] } else { mu_values.to_vec() };
    if let Some(bad) = mus.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(HarnessError::BadInput(format!("mu must be positive, got {bad}")));
    }

    let mut plans = Vec::new();
    let mut regions: Vec<(RegionSpec, ConsistencyLevel)> = Vec::new();
    for s in f.states() {
        let report = f.stepping(Some(&s))?;
        let target = f.step(&s)?;
        let claim = if report.is_one_stepping() {
            Some(ConsistencyLevel::StronglyConsistent)
        } else if report.is_monotone_stepping() {
            Some(ConsistencyLevel::Consistent)
        } else {
            None
        };
        let note = match claim {
            Some(_) => format!("{:?}", report.classification),
            None => "orbit is not monotone-stepping; skipped".into(),
        };
        plans.push(StatePlan { state: s.to_string(), target: target.to_string(), claim, note });
        if let Some(c) = claim {
            regions.push((build_region(f, s, delta, constants.alpha)?, c));
        }
    }

    // starts depend only on (seed, state, sample), so every μ sees the same points
    let mut starts = Vec::with_capacity(regions.len() * cfg.samples_per_state);
    for (region, claim) in &regions {
        for sample in 0..cfg.samples_per_state {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(region.s.index() * cfg.samples_per_state as u64 + sample as u64);
            let x0 = region.sample(&mut rng)?;
            if discretize(&x0, n) != region.s {
                return Err(HarnessError::BadInput(format!("sample outside the Boolean region of {}", region.s)));
            }
            starts.push((region, *claim, sample, x0));
        }
    }

    let flows = mus
        .iter()
        .map(|&mu| {
            let mut gamma = gamma_minus.to_vec();
            gamma.extend(std::iter::repeat_n(mu, n));
            FlowSpec::new(FlowKind::D2, f.clone(), conversion.clone(), gamma)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let tasks: Vec<(usize, usize)> = (0..mus.len()).flat_map(|m| (0..starts.len()).map(move |k| (m, k))).collect();
    let outcomes = tasks
        .par_iter()
        .map(|&(m, k)| {
            let (region, claim, sample, x0) = &starts[k];
            run_cell(&flows[m], mus[m], region, *claim, *sample, x0, cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let cells = mus
        .iter()
        .enumerate()
        .map(|(m, &mu)| {
            let mine: Vec<&SampleOutcome> = outcomes[m * starts.len()..(m + 1) * starts.len()].iter().collect();
            let samples = mine.len();
            let consistent = mine.iter().filter(|o| o.verdict >= ConsistencyLevel::Consistent).count();
            let strongly = mine.iter().filter(|o| o.verdict == ConsistencyLevel::StronglyConsistent).count();
            let met = mine.iter().filter(|o| o.meets_claim()).count();
            let frac = |k: usize| if samples == 0 { 0.0 } else { k as f64 / samples as f64 };
            MuCell {
                mu,
                below_bound: mu < constants.mu_bound,
                samples,
                consistent,
                strongly_consistent: strongly,
                frac_consistent: frac(consistent),
                frac_strong: frac(strongly),
                frac_claim: frac(met),
                failures: mine.into_iter().filter(|o| !o.meets_claim() || o.anomaly.is_some()).cloned().collect(),
            }
        })
        .collect();
    let anomalies = outcomes.iter().filter(|o| o.anomaly.is_some()).count();
    Ok(SweepResult {
        constants,
        gamma_minus: gamma_minus.to_vec(),
        seed: cfg.seed,
        samples_per_state: cfg.samples_per_state,
        states: plans,
        cells,
        anomalies,
        outcomes,
    })
}

fn run_cell(
    flow: &FlowSpec,
    mu: f64,
    region: &RegionSpec,
    claim: ConsistencyLevel,
    sample: usize,
    x0: &[f64],
    cfg: &SweepConfig,
) -> Result<SampleOutcome, HarnessError> {
    let n = region.n();
    let moves = region.delta_set.len();
    let mut opts = cfg.options.clone();
    if moves == 0 {
        opts.t_end = cfg.fixed_horizon / mu;
        opts.max_events = None;
    } else {
        opts.t_end = cfg.horizon_cap / mu;
        opts.max_events = Some(moves + cfg.extra_switches);
    }
    let traj = integrate(flow, x0, &opts)
        .map_err(|source| HarnessError::Integration { context: format!("mu = {mu:e}, state {}, sample {sample}", region.s), source })?;
    let indices: Vec<usize> = (0..n).collect();
    let (verdict, seq) = judge(&traj, &indices, flow.function());
    let anomaly = match (&seq, verdict.is_strong()) {
        (Some(seq), true) => strong_implies_onestep_audit(seq, flow.function()),
        _ => None,
    };
    Ok(SampleOutcome {
        mu,
        state: region.s.to_string(),
        sample_id: sample,
        x0: x0.to_vec(),
        verdict: verdict.level,
        claim,
        switches: seq.as_ref().map_or(0, |s| s.num_switches()),
        trace: seq.as_ref().map(|s| s.trace_strings()).unwrap_or_default(),
        min_gap: seq.as_ref().and_then(|s| s.min_gap()),
        min_same_coord_gap: seq.as_ref().and_then(|s| s.min_gap_same_coordinate()),
        t_final: traj.t_final(),
        steps: traj.stats().accepted,
        witness: verdict.witness,
        anomaly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::Scheme;

    #[test]
    fn fixed_point_starts_never_switch() {
        // copy with a fixed point at 1: f(s) = 1
        let f = BooleanFunction::from_pairs(1, &[("0", "1"), ("1", "1")]).unwrap();
        let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
        let cfg = SweepConfig { samples_per_state: 3, ..SweepConfig::default() };
        let r = verify_theorem_with(&f, &conv, &[1.0], &[], &cfg).unwrap();
        assert!(r.theorem_reproduced(), "{:#?}", r.cells);
        let fixed: Vec<_> = r.outcomes.iter().filter(|o| o.state == "1").collect();
        assert_eq!(fixed.len(), 3);
        assert!(fixed.iter().all(|o| o.switches == 0 && o.verdict == ConsistencyLevel::StronglyConsistent));
        let moving: Vec<_> = r.outcomes.iter().filter(|o| o.state == "0").collect();
        assert!(moving.iter().all(|o| o.trace == ["0", "1"]));
    }

    #[test]
    fn csv_has_one_row_per_start() {
        let f = BooleanFunction::from_pairs(1, &[("0", "1"), ("1", "0")]).unwrap();
        let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
        let cfg = SweepConfig { samples_per_state: 2, ..SweepConfig::default() };
        let r = verify_theorem_with(&f, &conv, &[1.0], &[], &cfg).unwrap();
        let csv = r.to_csv(&["seed=0".into()]);
        assert_eq!(csv.lines().count(), 2 + 4);
        assert!(csv.starts_with("# seed=0\nmu,state,sample_id,verdict"));
        assert!(r.theorem_reproduced());
    }
}
