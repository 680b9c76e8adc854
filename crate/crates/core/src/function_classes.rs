//! Power-sum moment tables and membership tests for the classes of spin
//! functions whose products have non-negative, positively correlated means.
//!
//! A function `f` belongs to the class when every power sum
//! `S_m = sum_x f(x)^m` is real and non-negative and `q S_{m+n} >= S_m S_n`.
//! It belongs to the class at index `i` when additionally
//! `f(i) = max_x |f(x)|`. Both conditions quantify over all exponents; here
//! they are certified for `m + n <= M` only, and every report states `M`.
//!
//! Both conditions are invariant under multiplication by a positive constant,
//! so the checks run on `f / max|f|`. This keeps the absolute tolerance
//! meaningful when `|f|` is large and `M` is 48.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SpinFunction;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MIN_MOMENT_BOUND: usize = 16;

/// `M = max(2 * total_region_size, 16)`: products of regions only ever
/// raise a cluster's spin to a power bounded by the total region size.
pub fn default_moment_bound(total_region_size: usize) -> usize {
    (2 * total_region_size).max(MIN_MOMENT_BOUND)
}

/// Power sums `S_0..=S_M` of a spin function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTable {
    q: usize,
    sums: Vec<Complex64>,
}

impl MomentTable {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn max_exponent(&self) -> usize {
        self.sums.len() - 1
    }

    /// `S_m`.
    pub fn get(&self, m: usize) -> Complex64 {
        self.sums[m]
    }

    /// `E f(X)^m = S_m / q` for `X` uniform on the states.
    pub fn mean(&self, m: usize) -> Complex64 {
        self.sums[m] / self.q as f64
    }

    pub fn sums(&self) -> &[Complex64] {
        &self.sums
    }
}

/// `S_m = sum_x f(x)^m` for `m = 0..=max_m`, with `0^0 = 1`.
pub fn moments(f: &SpinFunction, max_m: usize) -> MomentTable {
    let mut sums = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let s: Complex64 = f.values().iter().map(|z| z.powu(m as u32)).sum();
        sums.push(s);
    }
    // exact by convention
    sums[0] = Complex64::new(f.q() as f64, 0.0);
    MomentTable { q: f.q(), sums }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `S_m` has an imaginary part.
    Realness,
    /// `Re S_m < 0`.
    NonNegativity,
    /// `q S_{m+n} < S_m S_n`.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub m: usize,
    pub n: Option<usize>,
    /// Signed slack on the normalized function; negative beyond `-tol` fails.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub in_fq: bool,
    /// `Some(i)` when the index condition at `i` was requested and holds
    /// together with class membership.
    pub in_fq_i: Option<usize>,
    pub moment_bound: usize,
    pub tolerance: f64,
    /// `max |f|`, the factor the checks divided out.
    pub scale: f64,
    pub first_violation: Option<Violation>,
    /// `Re f(i) - max|f|` (normalized) when the index condition was checked.
    pub index_margin: Option<f64>,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.in_fq && (self.index_margin.is_none() || self.in_fq_i.is_some())
    }
}

fn normalized(f: &SpinFunction) -> (SpinFunction, f64) {
    let scale = f.sup_norm();
    if scale > 0.0 {
        (f.scaled(1.0 / scale), scale)
    } else {
        (f.clone(), scale)
    }
}

/// Checks condition (2) alone: every `S_m`, `m <= max_m`, is real and
/// non-negative. Returns the first failure.
pub fn check_power_sums(f: &SpinFunction, max_m: usize, tol: f64) -> Option<Violation> {
    let (g, _) = normalized(f);
    first_power_sum_violation(&moments(&g, max_m), tol)
}

fn first_power_sum_violation(table: &MomentTable, tol: f64) -> Option<Violation> {
    for (m, s) in table.sums().iter().enumerate() {
        if s.im.abs() > tol {
            return Some(Violation { condition: Condition::Realness, m, n: None, margin: -s.im.abs() });
        }
        if s.re < -tol {
            return Some(Violation { condition: Condition::NonNegativity, m, n: None, margin: s.re });
        }
    }
    None
}

/// Membership in the class, certified for exponents up to `max_m`.
pub fn check_fq(f: &SpinFunction, max_m: usize, tol: f64) -> MembershipReport {
    let (g, scale) = normalized(f);
    let table = moments(&g, max_m);
    let q = f.q() as f64;
    let mut violation = first_power_sum_violation(&table, tol);
    if violation.is_none() {
        'outer: for m in 0..=max_m {
            for n in 0..=(max_m - m) {
                let margin = q * table.get(m + n).re - table.get(m).re * table.get(n).re;
                if margin < -tol {
                    violation = Some(Violation { condition: Condition::Product, m, n: Some(n), margin });
                    break 'outer;
                }
            }
        }
    }
    MembershipReport {
        in_fq: violation.is_none(),
        in_fq_i: None,
        moment_bound: max_m,
        tolerance: tol,
        scale,
        first_violation: violation,
        index_margin: None,
    }
}

/// Membership in the class at index `i`: class membership plus
/// `f(i) = max_x |f(x)|`, which forces `f(i)` real and non-negative.
pub fn check_fq_i(f: &SpinFunction, i: usize, max_m: usize, tol: f64) -> Result<MembershipReport> {
    if i >= f.q() {
        return Err(Error::Parse(format!("state index {i} outside 0..{}", f.q())));
    }
    let mut report = check_fq(f, max_m, tol);
    let (g, _) = normalized(f);
    let fi = g.at(i);
    let sup = g.sup_norm();
    let margin = (fi.re - sup).min(-fi.im.abs());
    report.index_margin = Some(margin);
    if report.in_fq && margin >= -tol {
        report.in_fq_i = Some(i);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `f(x) = (q-1)/2 - x`
    A,
    /// `f(x) = exp(2 pi i x / q)`
    B,
    /// caller-supplied non-negative values with `f(x) <= f(0)`
    C,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" | "familyA" => Ok(FamilyKind::A),
            "B" | "b" | "familyB" => Ok(FamilyKind::B),
            "C" | "c" | "familyC" => Ok(FamilyKind::C),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::A => "A",
            FamilyKind::B => "B",
            FamilyKind::C => "C",
        };
        f.write_str(s)
    }
}

pub fn root_of_unity(k: usize, q: usize) -> Complex64 {
    let k = k % q;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64)
}

pub fn make_family(kind: FamilyKind, q: usize, values: Option<&[f64]>) -> Result<SpinFunction> {
    if q < 2 {
        return Err(Error::BadQ(q));
    }
    match kind {
        FamilyKind::A => {
            let c = 0.5 * (q as f64 - 1.0);
            Ok(SpinFunction::from_real(&(0..q).map(|x| c - x as f64).collect::<Vec<_>>()))
        }
        FamilyKind::B => Ok(SpinFunction::new((0..q).map(|x| root_of_unity(x, q)).collect())),
        FamilyKind::C => {
            let values = values.ok_or_else(|| Error::BadFamilyC("values are required".into()))?;
            if values.len() != q {
                return Err(Error::FunctionLength { expected: q, got: values.len() });
            }
            if let Some(x) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::BadFamilyC(format!("f({x}) = {} is not a non-negative number", values[x])));
            }
            if let Some(x) = values.iter().position(|v| *v > values[0]) {
                return Err(Error::BadFamilyC(format!("f({x}) = {} exceeds f(0) = {}", values[x], values[0])));
            }
            Ok(SpinFunction::from_real(values))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_unity_moments() {
        let f = make_family(FamilyKind::B, 3, None).unwrap();
        let t = moments(&f, 6);
        assert!(t.get(1).norm() < 1e-12);
        assert!(t.get(2).norm() < 1e-12);
        assert!((t.get(3) - c(3.0, 0.0)).norm() < 1e-12);
        assert!((t.get(6) - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn family_a_moments() {
        let t = moments(&make_family(FamilyKind::A, 2, None).unwrap(), 4);
        assert_eq!(t.get(1), c(0.0, 0.0));
        assert_eq!(t.get(2), c(0.5, 0.0));
        assert_eq!(t.get(3), c(0.0, 0.0));
        assert_eq!(t.get(4), c(0.125, 0.0));

        let t = moments(&make_family(FamilyKind::A, 3, None).unwrap(), 5);
        let re: Vec<f64> = t.sums().iter().map(|z| z.re).collect();
        assert_eq!(re, vec![3.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        let t = moments(&SpinFunction::from_real(&[0.0, 0.0, 0.0]), 2);
        assert_eq!(t.get(0), c(3.0, 0.0));
        assert_eq!(t.get(1), c(0.0, 0.0));
    }

    #[test]
    fn constant_function_is_tight() {
        for q in 2..6 {
            let f = SpinFunction::constant(q, 1.0);
            let r = check_fq(&f, 20, DEFAULT_TOLERANCE);
            assert!(r.in_fq);
            let t = moments(&f, 20);
            for m in 0..=10 {
                for n in 0..=10 {
                    assert_eq!(q as f64 * t.get(m + n).re, t.get(m).re * t.get(n).re);
                }
            }
        }
    }

    #[test]
    fn negative_power_sum_fails() {
        let r = check_fq(&SpinFunction::from_real(&[1.0, -2.0]), 16, DEFAULT_TOLERANCE);
        assert!(!r.in_fq);
        let v = r.first_violation.unwrap();
        assert_eq!(v.condition, Condition::NonNegativity);
        assert_eq!(v.m, 1);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn fourth_roots_pass() {
        let f = SpinFunction::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]);
        let r = check_fq(&f, 48, DEFAULT_TOLERANCE);
        assert!(r.in_fq, "{r:?}");
        let t = moments(&f, 48);
        for m in 0..=48 {
            let expected = if m % 4 == 0 { 4.0 } else { 0.0 };
            assert!((t.get(m) - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn index_condition() {
        let r = check_fq_i(&SpinFunction::from_real(&[1.0, 0.0, -1.0]), 0, 16, DEFAULT_TOLERANCE).unwrap();
        assert!(r.passed() && r.in_fq_i == Some(0));

        let r = check_fq_i(&SpinFunction::from_real(&[0.0, 1.0, 0.0]), 0, 16, DEFAULT_TOLERANCE).unwrap();
        assert!(r.in_fq);
        assert_eq!(r.in_fq_i, None);
        assert!(!r.passed());
        assert!(r.index_margin.unwrap() < 0.0);

        let r = check_fq_i(&SpinFunction::from_real(&[1.0, 1.0]), 0, 16, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.in_fq_i, Some(0));

        assert!(check_fq_i(&SpinFunction::from_real(&[1.0, 1.0]), 2, 16, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn family_constructors() {
        assert_eq!(make_family(FamilyKind::A, 3, None).unwrap(), SpinFunction::from_real(&[1.0, 0.0, -1.0]));
        let b = make_family(FamilyKind::B, 4, None).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (z, e) in b.values().iter().zip(expected) {
            assert!((z - e).norm() < 1e-15);
        }
        assert!(make_family(FamilyKind::C, 3, Some(&[1.0, 0.5, 0.0])).is_ok());
        assert!(matches!(make_family(FamilyKind::C, 3, Some(&[1.0, 2.0, 0.0])), Err(Error::BadFamilyC(_))));
        assert!(matches!(make_family(FamilyKind::C, 3, Some(&[1.0, -0.5, 0.0])), Err(Error::BadFamilyC(_))));
        assert!(matches!(make_family(FamilyKind::C, 3, None), Err(Error::BadFamilyC(_))));
    }

    #[test]
    fn scaling_is_reported() {
        let r = check_fq(&SpinFunction::from_real(&[4.0, -4.0, 0.0]), 16, DEFAULT_TOLERANCE);
        assert_eq!(r.scale, 4.0);
        assert!(r.in_fq);
    }

    #[test]
    fn default_bound() {
        assert_eq!(default_moment_bound(0), 16);
        assert_eq!(default_moment_bound(12), 24);
    }
}
