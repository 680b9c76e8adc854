//! Exact checks of the correlation inequalities on concrete instances.
//!
//! Each check refuses to run unless the functions satisfy the hypotheses of
//! the claim: for models with a positive field the function must be in the
//! class at index 0, while for field-free models class membership suffices.
//! Every check produces a [`VerificationReport`] whose margin is negative
//! exactly when the claim is violated.

mod fuzz;
pub mod generators;

pub use fuzz::{fuzz, FuzzConfig, FuzzOutcome, FuzzSummary};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function_classes::{
    check_fq, check_fq_i, check_power_sums, default_moment_bound, MembershipReport, DEFAULT_TOLERANCE,
};
use crate::io::{FunctionSpec, ModelFile};
use crate::model::{expectations_with, Cap, PottsModel, Region, SpinFunction};

pub const DEFAULT_VERIFY_TOLERANCE: f64 = 1e-8;
pub const MONOTONE_STEPS: [f64; 2] = [0.1, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `<f^R>` is real and non-negative.
    RealNonneg,
    /// `d<f^R>/dJ_e = cov(f^R, delta_e) >= 0`, or likewise for `h_v`.
    MonotoneDerivative,
    /// `<f^R>` at a raised coordinate is at least its current value.
    MonotoneStep,
    /// `<f^R f^S> >= <f^R><f^S>`.
    ProductCorrelation,
    /// `<f0^R f1^S> <= <f0^R><f1^S>` for `f0 f1 = 0`.
    DisjointSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim: Claim,
    /// Truncated SHA-256 of the canonical JSON of the inputs.
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    /// Largest imaginary part among the means involved.
    pub imag_residual: f64,
    /// `lhs - rhs`, or `-imag_residual` when that is lower and the
    /// residual exceeds the tolerance.
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl VerificationReport {
    fn new(claim: Claim, digest: String, detail: Option<String>, lhs: f64, rhs: f64, imag: f64, tol: f64) -> Self {
        let margin = if imag > tol { (lhs - rhs).min(-imag) } else { lhs - rhs };
        let verdict = if margin >= -tol { Verdict::Pass } else { Verdict::Fail };
        VerificationReport { claim, digest, detail, lhs, rhs, imag_residual: imag, margin, tolerance: tol, verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Tolerance on the inequality margins.
    pub tol: f64,
    /// Tolerance used when certifying class membership.
    pub moment_tol: f64,
    /// Exponent bound for membership; `None` picks it from the regions.
    pub moment_bound: Option<usize>,
    pub cap: Cap,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: DEFAULT_VERIFY_TOLERANCE,
            moment_tol: DEFAULT_TOLERANCE,
            moment_bound: None,
            cap: Cap::default(),
        }
    }
}

/// A coordinate of the parameter vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Coupling(usize),
    Field(usize),
}

impl Coordinate {
    fn describe(&self, model: &PottsModel) -> String {
        match *self {
            Coordinate::Coupling(e) => {
                let edge = &model.edges()[e];
                format!("J<{},{}>", model.vertices()[edge.u], model.vertices()[edge.v])
            }
            Coordinate::Field(v) => format!("h[{}]", model.vertices()[v]),
        }
    }

    fn value(&self, model: &PottsModel) -> f64 {
        match *self {
            Coordinate::Coupling(e) => model.edges()[e].coupling,
            Coordinate::Field(v) => model.fields()[v],
        }
    }

    fn shifted(&self, model: &PottsModel, delta: f64) -> Result<PottsModel> {
        match *self {
            Coordinate::Coupling(e) => model.with_coupling(e, model.edges()[e].coupling + delta),
            Coordinate::Field(v) => model.with_field(v, model.fields()[v] + delta),
        }
    }

    fn check(&self, model: &PottsModel) -> Result<()> {
        match *self {
            Coordinate::Coupling(e) if e >= model.num_edges() => Err(Error::BadEdge(format!("no edge with index {e}"))),
            Coordinate::Field(v) if v >= model.num_vertices() => Err(Error::UnknownVertex(format!("#{v}"))),
            _ => Ok(()),
        }
    }

    /// Indicator whose covariance with the observable is the derivative.
    #[inline]
    fn indicator(&self, model: &PottsModel, spins: &[usize]) -> bool {
        match *self {
            Coordinate::Coupling(e) => {
                let edge = &model.edges()[e];
                spins[edge.u] == spins[edge.v]
            }
            Coordinate::Field(v) => spins[v] == 0,
        }
    }

    /// Every coupling, then every field.
    pub fn all(model: &PottsModel) -> Vec<Coordinate> {
        (0..model.num_edges())
            .map(Coordinate::Coupling)
            .chain((0..model.num_vertices()).map(Coordinate::Field))
            .collect()
    }
}

/// Certifies `f` for use on `model`: membership in the class at index 0 when
/// a field is present (or will be, `needs_field`), plain class membership
/// otherwise.
pub fn certify(
    model: &PottsModel,
    f: &SpinFunction,
    total_region_size: usize,
    needs_field: bool,
    opts: &VerifyOptions,
) -> Result<MembershipReport> {
    if f.q() != model.q() {
        return Err(Error::FunctionLength { expected: model.q(), got: f.q() });
    }
    let bound = opts.moment_bound.unwrap_or_else(|| default_moment_bound(total_region_size));
    if model.has_field() || needs_field {
        let report = check_fq_i(f, 0, bound, opts.moment_tol)?;
        if !report.passed() {
            return Err(Error::NotCertified(format!(
                "not in the class at index 0 up to M = {bound} ({})",
                describe_failure(&report)
            )));
        }
        Ok(report)
    } else {
        let report = check_fq(f, bound, opts.moment_tol);
        if !report.passed() {
            return Err(Error::NotCertified(format!(
                "power-sum conditions fail up to M = {bound} ({})",
                describe_failure(&report)
            )));
        }
        Ok(report)
    }
}

fn describe_failure(report: &MembershipReport) -> String {
    match (&report.first_violation, report.index_margin) {
        (Some(v), _) => format!("{:?} at m = {}, n = {:?}, margin {:e}", v.condition, v.m, v.n, v.margin),
        (None, Some(m)) => format!("f(0) falls short of max |f| by {:e}", -m),
        (None, None) => "unknown".into(),
    }
}

fn digest(claim: Claim, model: &PottsModel, functions: &[&SpinFunction], regions: &[&Region], extra: &str) -> String {
    let canonical = json!({
        "claim": claim,
        "model": ModelFile::from_model(model),
        "functions": functions.iter().map(|f| FunctionSpec::from_function(f)).collect::<Vec<_>>(),
        "regions": regions.iter().map(|r| r.vertices()).collect::<Vec<_>>(),
        "extra": extra,
    });
    let bytes = serde_json::to_vec(&canonical).expect("digest input serializes");
    let hash = Sha256::digest(&bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn region_product(f: &SpinFunction, r: &Region, spins: &[usize]) -> Complex64 {
    f.region_product(r, spins)
}

/// `<f^R>` is real and at least zero.
pub fn verify_real_nonneg(
    model: &PottsModel,
    f: &SpinFunction,
    r: &Region,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    certify(model, f, r.len(), false, opts)?;
    let mean = expectations_with(model, opts.cap, 1, |s, out| out[0] = region_product(f, r, s))?[0];
    Ok(VerificationReport::new(
        Claim::RealNonneg,
        digest(Claim::RealNonneg, model, &[f], &[r], ""),
        None,
        mean.re,
        0.0,
        mean.im.abs(),
        opts.tol,
    ))
}

/// Derivative-sign and finite-step checks of monotonicity along one
/// coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub derivative: VerificationReport,
    pub steps: Vec<VerificationReport>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.derivative.passed() && self.steps.iter().all(VerificationReport::passed)
    }

    pub fn into_reports(self) -> Vec<VerificationReport> {
        std::iter::once(self.derivative).chain(self.steps).collect()
    }
}

/// `<f^R>` is non-decreasing in the given coordinate: the covariance of
/// `f^R` with the coordinate's indicator is non-negative, and raising the
/// coordinate by each of [`MONOTONE_STEPS`] does not lower the mean.
pub fn verify_monotone(
    model: &PottsModel,
    f: &SpinFunction,
    r: &Region,
    coordinate: Coordinate,
    opts: &VerifyOptions,
) -> Result<MonotoneReport> {
    coordinate.check(model)?;
    let field_coordinate = matches!(coordinate, Coordinate::Field(_));
    certify(model, f, r.len(), field_coordinate, opts)?;
    let label = coordinate.describe(model);

    let means = expectations_with(model, opts.cap, 3, |s, out| {
        let fr = region_product(f, r, s);
        let d = if coordinate.indicator(model, s) { 1.0 } else { 0.0 };
        out[0] = fr * d;
        out[1] = fr;
        out[2] = Complex64::new(d, 0.0);
    })?;
    let cov = means[0] - means[1] * means[2];
    let derivative = VerificationReport::new(
        Claim::MonotoneDerivative,
        digest(Claim::MonotoneDerivative, model, &[f], &[r], &label),
        Some(format!("d/d{label} at {}", coordinate.value(model))),
        cov.re,
        0.0,
        cov.im.abs(),
        opts.tol,
    );

    let base = means[1];
    let mut steps = Vec::with_capacity(MONOTONE_STEPS.len());
    for delta in MONOTONE_STEPS {
        let raised = coordinate.shifted(model, delta)?;
        let mean = expectations_with(&raised, opts.cap, 1, |s, out| out[0] = region_product(f, r, s))?[0];
        let extra = format!("{label}+{delta}");
        steps.push(VerificationReport::new(
            Claim::MonotoneStep,
            digest(Claim::MonotoneStep, model, &[f], &[r], &extra),
            Some(extra),
            mean.re,
            base.re,
            mean.im.abs().max(base.im.abs()),
            opts.tol,
        ));
    }
    Ok(MonotoneReport { derivative, steps })
}

/// `<f^R f^S> >= <f^R><f^S>`.
pub fn verify_gks_pair(
    model: &PottsModel,
    f: &SpinFunction,
    r: &Region,
    s: &Region,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    certify(model, f, r.len() + s.len(), false, opts)?;
    let m = expectations_with(model, opts.cap, 3, |spins, out| {
        let fr = region_product(f, r, spins);
        let fs = region_product(f, s, spins);
        out[0] = fr * fs;
        out[1] = fr;
        out[2] = fs;
    })?;
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(VerificationReport::new(
        Claim::ProductCorrelation,
        digest(Claim::ProductCorrelation, model, &[f], &[r, s], ""),
        None,
        m[0].re,
        m[1].re * m[2].re,
        imag,
        opts.tol,
    ))
}

/// `<f0^R f1^S> <= <f0^R><f1^S>` when `f0 f1 = 0` pointwise. The report's
/// `lhs` is the product of means and `rhs` the joint mean.
pub fn verify_disjoint_support(
    model: &PottsModel,
    f0: &SpinFunction,
    f1: &SpinFunction,
    r: &Region,
    s: &Region,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if f1.q() != model.q() {
        return Err(Error::FunctionLength { expected: model.q(), got: f1.q() });
    }
    if let Some(x) = (0..model.q()).find(|&x| f0.at(x) * f1.at(x) != Complex64::new(0.0, 0.0)) {
        return Err(Error::NotDisjoint(x));
    }
    certify(model, f0, r.len() + s.len(), false, opts)?;
    let bound = opts.moment_bound.unwrap_or_else(|| default_moment_bound(r.len() + s.len()));
    if let Some(v) = check_power_sums(f1, bound, opts.moment_tol) {
        return Err(Error::NotCertified(format!(
            "second function has a non-real or negative power sum at m = {} (margin {:e})",
            v.m, v.margin
        )));
    }
    let m = expectations_with(model, opts.cap, 3, |spins, out| {
        let a = region_product(f0, r, spins);
        let b = region_product(f1, s, spins);
        out[0] = a * b;
        out[1] = a;
        out[2] = b;
    })?;
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(VerificationReport::new(
        Claim::DisjointSupport,
        digest(Claim::DisjointSupport, model, &[f0, f1], &[r, s], ""),
        None,
        m[1].re * m[2].re,
        m[0].re,
        imag,
        opts.tol,
    ))
}
