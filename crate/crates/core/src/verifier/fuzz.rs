use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::{
    random_disjoint_pair, random_function, random_model, random_non_member, random_region, InstanceShape,
};
use super::{
    verify_disjoint_support, verify_gks_pair, verify_monotone, verify_real_nonneg, Coordinate, VerificationReport,
    VerifyOptions, DEFAULT_VERIFY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::function_classes::{check_fq_i, default_moment_bound, DEFAULT_TOLERANCE};
use crate::model::{Cap, DEFAULT_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzConfig {
    pub q_min: usize,
    pub q_max: usize,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub edge_density: f64,
    pub j_max: f64,
    pub h_max: f64,
    pub boundary_prob: f64,
    /// Fraction of trials whose function is drawn to fail membership.
    pub adversarial_fraction: f64,
    pub trials: u64,
    pub seed: u64,
    pub tol: f64,
    pub cap: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            q_min: 2,
            q_max: 5,
            min_vertices: 1,
            max_vertices: 5,
            edge_density: 0.5,
            j_max: 3.0,
            h_max: 3.0,
            boundary_prob: 0.1,
            adversarial_fraction: 0.0,
            trials: 1000,
            seed: 0,
            tol: DEFAULT_VERIFY_TOLERANCE,
            cap: DEFAULT_CAP,
        }
    }
}

impl FuzzConfig {
    fn validate(&self) -> Result<()> {
        if self.q_min < 2 || self.q_min > self.q_max {
            return Err(Error::Parse(format!("bad q range {}..={}", self.q_min, self.q_max)));
        }
        if self.min_vertices < 1 || self.min_vertices > self.max_vertices || self.max_vertices > 63 {
            return Err(Error::Parse(format!("bad vertex range {}..={}", self.min_vertices, self.max_vertices)));
        }
        for (name, p) in [
            ("edge density", self.edge_density),
            ("boundary probability", self.boundary_prob),
            ("adversarial fraction", self.adversarial_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parse(format!("{name} {p} outside [0, 1]")));
            }
        }
        if !(self.j_max >= 0.0 && self.h_max >= 0.0 && self.j_max.is_finite() && self.h_max.is_finite()) {
            return Err(Error::Parse("parameter ranges must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub trials: u64,
    pub seed: u64,
    pub checks_run: u64,
    pub violations: u64,
    /// Trials whose function failed certification and was not checked.
    pub not_certified: u64,
    /// Trials beyond the enumeration cap.
    pub infeasible: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzOutcome {
    pub summary: FuzzSummary,
    /// Failing reports only, in trial order.
    pub violations: Vec<VerificationReport>,
}

#[derive(Default)]
struct TrialResult {
    checks: u64,
    not_certified: bool,
    infeasible: bool,
    failures: Vec<VerificationReport>,
}

impl TrialResult {
    fn record(&mut self, report: VerificationReport) {
        self.checks += 1;
        if !report.passed() {
            self.failures.push(report);
        }
    }
}

/// Runs every applicable check on randomized instances. Trial `i` draws from
/// its own ChaCha stream, so the outcome is a function of the config alone.
pub fn fuzz(config: &FuzzConfig) -> Result<FuzzOutcome> {
    config.validate()?;
    let results: Vec<TrialResult> = (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect();
    let mut summary = FuzzSummary { trials: config.trials, seed: config.seed, ..Default::default() };
    let mut violations = Vec::new();
    for r in results {
        summary.checks_run += r.checks;
        summary.not_certified += u64::from(r.not_certified);
        summary.infeasible += u64::from(r.infeasible);
        violations.extend(r.failures);
    }
    summary.violations = violations.len() as u64;
    Ok(FuzzOutcome { summary, violations })
}

fn run_trial(config: &FuzzConfig, trial: u64) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let mut result = TrialResult::default();

    let shape = InstanceShape {
        q: rng.gen_range(config.q_min..=config.q_max),
        n: rng.gen_range(config.min_vertices..=config.max_vertices),
        edge_density: config.edge_density,
        j_max: config.j_max,
        h_max: config.h_max,
        boundary_prob: config.boundary_prob,
    };
    let cap = Cap(config.cap);
    if cap.admit(shape.q, shape.n).is_err() {
        result.infeasible = true;
        return result;
    }
    let model = random_model(&mut rng, &shape);
    let field_free = !model.has_field();
    let opts = VerifyOptions { tol: config.tol, cap, ..Default::default() };

    let f = if rng.gen_bool(config.adversarial_fraction) {
        random_non_member(&mut rng, shape.q)
    } else {
        random_function(&mut rng, shape.q, field_free)
    };
    let r = random_region(&mut rng, &model);
    let s = random_region(&mut rng, &model);
    let (f0, f1) = random_disjoint_pair(&mut rng, shape.q, field_free);
    let r0 = random_region(&mut rng, &model);
    let s0 = random_region(&mut rng, &model);

    // monotonicity in a field coordinate needs the index-0 class even
    // without a field
    let bound = default_moment_bound(r.len() + s.len());
    let index_zero = check_fq_i(&f, 0, bound, DEFAULT_TOLERANCE).is_ok_and(|rep| rep.passed());
    let coordinates: Vec<Coordinate> =
        Coordinate::all(&model).into_iter().filter(|c| index_zero || matches!(c, Coordinate::Coupling(_))).collect();
    let coordinate = if coordinates.is_empty() { None } else { Some(coordinates[rng.gen_range(0..coordinates.len())]) };

    let first = (|| -> Result<()> {
        result.record(verify_real_nonneg(&model, &f, &r, &opts)?);
        result.record(verify_gks_pair(&model, &f, &r, &s, &opts)?);
        if let Some(c) = coordinate {
            for report in verify_monotone(&model, &f, &r, c, &opts)?.into_reports() {
                result.record(report);
            }
        }
        Ok(())
    })();
    match first {
        Ok(()) => {}
        Err(Error::NotCertified(_)) => result.not_certified = true,
        Err(Error::EnumerationTooLarge { .. }) => result.infeasible = true,
        Err(e) => panic!("fuzz trial {trial}: unexpected error {e}"),
    }

    match verify_disjoint_support(&model, &f0, &f1, &r0, &s0, &opts) {
        Ok(report) => result.record(report),
        Err(Error::NotCertified(_)) => result.not_certified = true,
        Err(Error::EnumerationTooLarge { .. }) => result.infeasible = true,
        Err(e) => panic!("fuzz trial {trial}: unexpected error {e}"),
    }
    result
}
