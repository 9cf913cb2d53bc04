use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HarnessError;
use crate::boolean::BooleanFunction;
use crate::conversion::Scheme;
use crate::flow::{fixed_points_1d_nonconst, state_box, Equilibrium, FlowKind, FlowSpec};
use crate::formula::NetworkSpec;
use crate::integrator::{integrate, IntegrationOptions};
use crate::trace::{judge, strong_implies_onestep_audit, Anomaly, ConsistencyLevel, ConsistencyVerdict, SwitchingSequence};

/// Interior roots of `g(x) + 6L(x)⁴(1 − L(x)⁴)` quoted to five places.
pub const QUARTIC_ROOTS: [f64; 2] = [0.58875, 0.87703];
const ROOT_TOL: f64 = 1e-3;
const EXCLUDED_BALL: f64 = 1e-3;
const CYCLE_SWITCHES: usize = 20;

/// Strongly consistent traces seen so far and any that broke the
/// one-stepping corollary.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StudyTraces {
    pub strong: usize,
    pub anomalies: Vec<Anomaly>,
}

impl StudyTraces {
    pub fn record(&mut self, verdict: &ConsistencyVerdict, seq: Option<&SwitchingSequence>, f: &BooleanFunction) {
        if let (true, Some(seq)) = (verdict.is_strong(), seq) {
            self.strong += 1;
            if let Some(a) = strong_implies_onestep_audit(seq, f) {
                self.anomalies.push(a);
            }
        }
    }

    pub fn merge(&mut self, other: &StudyTraces) {
        self.strong += other.strong;
        self.anomalies.extend(other.anomalies.iter().cloned());
    }
}

fn network(formulas: &[&str]) -> NetworkSpec {
    NetworkSpec::from_formulas(formulas.len(), formulas).expect("built-in formulas parse")
}

fn flow(formulas: &[&str], scheme: Scheme, gamma: Vec<f64>) -> Result<FlowSpec, HarnessError> {
    Ok(FlowSpec::from_network(&network(formulas), scheme, FlowKind::D1, Some(gamma))?)
}

fn run(spec: &FlowSpec, x0: &[f64], opts: &IntegrationOptions, what: &str) -> Result<crate::integrator::Trajectory, HarnessError> {
    integrate(spec, x0, opts).map_err(|source| HarnessError::Integration { context: format!("{what} from {x0:?}"), source })
}

/// Uniform start in the box, away from the origin of each listed block.
fn start_off_origins(rng: &mut impl Rng, dim: usize, blocks: &[[usize; 2]]) -> Vec<f64> {
    let (lo, hi) = state_box();
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
        if blocks.iter().all(|b| x[b[0]].hypot(x[b[1]]) > EXCLUDED_BALL) {
            return x;
        }
    }
}

/// One-dimensional contradiction `σ ∧ ¬σ` with `σ = s ∧ s ∧ s ∧ s`, converted
/// recursively: three equilibria, and the trace is strongly consistent only
/// left of the middle one.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointStudy {
    pub roots: Vec<f64>,
    pub stable: Vec<bool>,
    pub below: Vec<ConsistencyLevel>,
    pub above: Vec<ConsistencyLevel>,
    pub audit: StudyTraces,
}

impl FixedPointStudy {
    pub fn roots_match(&self) -> bool {
        let (lo, _) = state_box();
        self.roots.len() == 3
            && (self.roots[0] - lo).abs() < ROOT_TOL
            && (self.roots[1] - QUARTIC_ROOTS[0]).abs() < ROOT_TOL
            && (self.roots[2] - QUARTIC_ROOTS[1]).abs() < ROOT_TOL
    }

    pub fn below_all_strong(&self) -> bool {
        !self.below.is_empty() && self.below.iter().all(|l| *l == ConsistencyLevel::StronglyConsistent)
    }

    pub fn above_none_strong(&self) -> bool {
        !self.above.is_empty() && self.above.iter().all(|l| *l != ConsistencyLevel::StronglyConsistent)
    }
}

pub fn fixed_point_study(samples: usize, seed: u64) -> Result<FixedPointStudy, HarnessError> {
    let spec = flow(&["(s1 & s1 & s1 & s1) & !(s1 & s1 & s1 & s1)"], Scheme::Rc, vec![1.0])?;
    let found = fixed_points_1d_nonconst(spec.conversion(), 1.0)?;
    let roots: Vec<f64> = found.iter().map(|r| r.x).collect();
    let stable = found.iter().map(|r| r.stable).collect();
    let r2 = roots.get(1).copied().unwrap_or(QUARTIC_ROOTS[0]);
    let (lo, hi) = state_box();
    let opts = IntegrationOptions::default().with_t_end(60.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = StudyTraces::default();
    let mut sweep = |a: f64, b: f64, rng: &mut ChaCha8Rng| -> Result<Vec<ConsistencyLevel>, HarnessError> {
        (0..samples)
            .map(|_| {
                let x0 = rng.random_range(a..=b);
                let traj = run(&spec, &[x0], &opts, "quartic contradiction")?;
                let (v, seq) = judge(&traj, &[0], spec.function());
                audit.record(&v, seq.as_ref(), spec.function());
                Ok(v.level)
            })
            .collect()
    };
    let below = sweep(lo, r2 - 0.01, &mut rng)?;
    let above = sweep(r2 + 0.01, hi, &mut rng)?;
    Ok(FixedPointStudy { roots, stable, below, above, audit })
}

/// The two-variable copy-negation loop `f = (¬s2, s1)` as a D1 flow.
#[derive(Debug, Clone, Serialize)]
pub struct CopyNegationStudy {
    pub equilibria: Vec<Equilibrium>,
    pub verdicts: Vec<ConsistencyLevel>,
    pub min_switches: usize,
    /// Every trace visits `00 → 10 → 11 → 01` in order.
    pub cycle_ok: bool,
    pub audit: StudyTraces,
}

impl CopyNegationStudy {
    pub fn only_origin(&self) -> bool {
        matches!(self.equilibria.as_slice(), [e] if e.x.iter().all(|v| v.abs() < 1e-6) && e.residual < 1e-8)
    }

    pub fn origin_repels(&self) -> bool {
        self.only_origin() && self.equilibria[0].eigenvalues.iter().all(|(re, _)| *re > 0.0)
    }

    pub fn all_strong(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|l| *l == ConsistencyLevel::StronglyConsistent)
    }
}

pub fn copy_negation_study(starts: usize, seed: u64) -> Result<CopyNegationStudy, HarnessError> {
    let spec = flow(&["!s2", "s1"], Scheme::W, vec![1.0, 1.0])?;
    let equilibria = spec.find_equilibria(15);
    let opts = IntegrationOptions { max_events: Some(CYCLE_SWITCHES + 4), ..IntegrationOptions::default().with_t_end(1e4) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = StudyTraces::default();
    let mut verdicts = Vec::with_capacity(starts);
    let mut min_switches = usize::MAX;
    let mut cycle_ok = true;
    let order = ["00", "10", "11", "01"];
    for _ in 0..starts {
        let x0 = start_off_origins(&mut rng, 2, &[[0, 1]]);
        let traj = run(&spec, &x0, &opts, "copy-negation")?;
        let (v, seq) = judge(&traj, &[0, 1], spec.function());
        audit.record(&v, seq.as_ref(), spec.function());
        match &seq {
            Some(seq) => {
                min_switches = min_switches.min(seq.num_switches());
                let trace = seq.trace_strings();
                let start = order.iter().position(|s| *s == trace[0]).expect("2-bit state");
                cycle_ok &= trace.iter().enumerate().all(|(k, s)| s == order[(start + k) % 4]);
            }
            None => {
                min_switches = 0;
                cycle_ok = false;
            }
        }
        verdicts.push(v.level);
    }
    Ok(CopyNegationStudy { equilibria, verdicts, min_switches: if starts == 0 { 0 } else { min_switches }, cycle_ok, audit })
}

/// Two uncoupled copy-negation loops. With rates in ratio √2 the combined
/// trace can only be consistent; with equal rates and identical blocks each
/// block on its own follows its factor exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ProductStudy {
    pub generic: Vec<ConsistencyLevel>,
    pub symmetric_blocks: Vec<[ConsistencyLevel; 2]>,
    pub symmetric_whole: Vec<ConsistencyLevel>,
    pub audit: StudyTraces,
}

impl ProductStudy {
    pub fn generic_consistent_not_strong(&self) -> bool {
        !self.generic.is_empty() && self.generic.iter().all(|l| *l == ConsistencyLevel::Consistent)
    }

    pub fn blocks_strong(&self) -> bool {
        !self.symmetric_blocks.is_empty() && self.symmetric_blocks.iter().flatten().all(|l| *l == ConsistencyLevel::StronglyConsistent)
    }
}

pub fn product_study(samples: usize, seed: u64) -> Result<ProductStudy, HarnessError> {
    let formulas = ["!s2", "s1", "!s4", "s3"];
    let r = std::f64::consts::SQRT_2;
    let generic_flow = flow(&formulas, Scheme::W, vec![1.0, 1.0, r, r])?;
    let equal_flow = flow(&formulas, Scheme::W, vec![1.0; 4])?;
    let factor = flow(&["!s2", "s1"], Scheme::W, vec![1.0, 1.0])?;
    let opts = IntegrationOptions { max_events: Some(CYCLE_SWITCHES + 4), ..IntegrationOptions::default().with_t_end(1e4) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = StudyTraces::default();
    let mut generic = Vec::with_capacity(samples);
    let mut symmetric_blocks = Vec::with_capacity(samples);
    let mut symmetric_whole = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x0 = start_off_origins(&mut rng, 4, &[[0, 1], [2, 3]]);
        let traj = run(&generic_flow, &x0, &opts, "product, generic rates")?;
        let (v, seq) = judge(&traj, &[0, 1, 2, 3], generic_flow.function());
        audit.record(&v, seq.as_ref(), generic_flow.function());
        generic.push(v.level);

        let x0 = [x0[0], x0[1], x0[0], x0[1]];
        let traj = run(&equal_flow, &x0, &opts, "product, equal rates")?;
        let (whole, seq) = judge(&traj, &[0, 1, 2, 3], equal_flow.function());
        audit.record(&whole, seq.as_ref(), equal_flow.function());
        symmetric_whole.push(whole.level);
        let mut blocks = [ConsistencyLevel::TransversalityFailure; 2];
        for (b, idx) in [[0, 1], [2, 3]].iter().enumerate() {
            let (v, seq) = judge(&traj, idx, factor.function());
            audit.record(&v, seq.as_ref(), factor.function());
            blocks[b] = v.level;
        }
        symmetric_blocks.push(blocks);
    }
    Ok(ProductStudy { generic, symmetric_blocks, symmetric_whole, audit })
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub id: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub claims: Vec<Claim>,
    pub audit: StudyTraces,
    pub passed: bool,
}

fn claim(id: &str, expected: impl Into<String>, observed: impl Into<String>, passed: bool) -> Claim {
    Claim { id: id.into(), expected: expected.into(), observed: observed.into(), passed }
}

fn count(levels: &[ConsistencyLevel], level: ConsistencyLevel) -> usize {
    levels.iter().filter(|l| **l == level).count()
}

/// Runs every worked example end to end and compares with the known facts.
pub fn run_example_suite() -> Result<ExampleReport, HarnessError> {
    run_example_suite_seeded(0)
}

pub fn run_example_suite_seeded(seed: u64) -> Result<ExampleReport, HarnessError> {
    use ConsistencyLevel::*;
    let mut claims = Vec::new();
    let mut audit = StudyTraces::default();

    // s ∧ ¬s under the recursive scheme keeps a single equilibrium
    let single = flow(&["s1 & !s1"], Scheme::Rc, vec![1.0])?;
    let roots = fixed_points_1d_nonconst(single.conversion(), 1.0)?;
    let (lo, hi) = state_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = Vec::new();
    for _ in 0..20 {
        let x0 = rng.random_range(lo..=hi);
        let traj = run(&single, &[x0], &IntegrationOptions::default().with_t_end(60.0), "s & !s")?;
        let (v, seq) = judge(&traj, &[0], single.function());
        audit.record(&v, seq.as_ref(), single.function());
        levels.push(v.level);
    }
    claims.push(claim(
        "square-contradiction.strong-everywhere",
        "one equilibrium at x-, 20/20 strongly consistent",
        format!("{} equilibria, {}/20 strongly consistent", roots.len(), count(&levels, StronglyConsistent)),
        roots.len() == 1 && count(&levels, StronglyConsistent) == 20,
    ));

    let fp = fixed_point_study(20, seed)?;
    audit.merge(&fp.audit);
    claims.push(claim(
        "quartic-contradiction.roots",
        format!("[{lo:.4}, {}, {}] within {ROOT_TOL}", QUARTIC_ROOTS[0], QUARTIC_ROOTS[1]),
        format!("{:?}", fp.roots),
        fp.roots_match(),
    ));
    claims.push(claim(
        "quartic-contradiction.strong-left-of-middle-root",
        "20/20 strongly consistent",
        format!("{}/{} strongly consistent", count(&fp.below, StronglyConsistent), fp.below.len()),
        fp.below_all_strong(),
    ));
    claims.push(claim(
        "quartic-contradiction.fails-right-of-middle-root",
        "0/20 strongly consistent",
        format!("{}/{} strongly consistent", count(&fp.above, StronglyConsistent), fp.above.len()),
        fp.above_none_strong(),
    ));

    let cn = copy_negation_study(50, seed)?;
    audit.merge(&cn.audit);
    claims.push(claim(
        "copy-negation.single-equilibrium",
        "only (0, 0), residual < 1e-8",
        format!("{:?}", cn.equilibria.iter().map(|e| (&e.x, e.residual)).collect::<Vec<_>>()),
        cn.only_origin(),
    ));
    claims.push(claim(
        "copy-negation.origin-repels",
        "eigenvalues with positive real part",
        format!("{:?}", cn.equilibria.first().map(|e| &e.eigenvalues)),
        cn.origin_repels(),
    ));
    claims.push(claim(
        "copy-negation.limit-cycle",
        format!("50/50 strongly consistent along 00>10>11>01 for >= {CYCLE_SWITCHES} switches"),
        format!(
            "{}/{} strongly consistent, min switches {}, cycle order {}",
            count(&cn.verdicts, StronglyConsistent),
            cn.verdicts.len(),
            cn.min_switches,
            cn.cycle_ok
        ),
        cn.all_strong() && cn.cycle_ok && cn.min_switches >= CYCLE_SWITCHES,
    ));

    let pr = product_study(20, seed)?;
    audit.merge(&pr.audit);
    claims.push(claim(
        "product.generic-rates",
        "20/20 consistent, none strongly consistent",
        format!("{}/{} consistent, {} strongly", count(&pr.generic, Consistent), pr.generic.len(), count(&pr.generic, StronglyConsistent)),
        pr.generic_consistent_not_strong(),
    ));
    claims.push(claim(
        "product.equal-rates-per-block",
        "every block trace strongly consistent with its factor",
        format!(
            "{}/{} block traces strongly consistent",
            pr.symmetric_blocks.iter().flatten().filter(|l| **l == StronglyConsistent).count(),
            2 * pr.symmetric_blocks.len()
        ),
        pr.blocks_strong(),
    ));
    claims.push(claim(
        "strong-implies-one-stepping",
        "no anomalies",
        format!("{} strong traces, {} anomalies", audit.strong, audit.anomalies.len()),
        audit.anomalies.is_empty(),
    ));
    let passed = claims.iter().all(|c| c.passed);
    Ok(ExampleReport { claims, audit, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_roots_and_split() {
        let fp = fixed_point_study(4, 11).unwrap();
        assert!(fp.roots_match(), "{:?}", fp.roots);
        assert_eq!(fp.stable, vec![true, false, true]);
        assert!(fp.below_all_strong(), "{:?}", fp.below);
        assert!(fp.above_none_strong(), "{:?}", fp.above);
        assert!(fp.audit.anomalies.is_empty());
    }

    #[test]
    fn copy_negation_cycles_strongly() {
        let cn = copy_negation_study(4, 5).unwrap();
        assert!(cn.only_origin() && cn.origin_repels());
        assert!(cn.all_strong() && cn.cycle_ok && cn.min_switches >= CYCLE_SWITCHES, "{cn:?}");
    }

    #[test]
    fn product_splits_by_rates() {
        let pr = product_study(3, 9).unwrap();
        assert!(pr.generic_consistent_not_strong(), "{:?}", pr.generic);
        assert!(pr.blocks_strong(), "{:?}", pr.symmetric_blocks);
    }
}
