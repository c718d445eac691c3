//! Closed forms and inequality checks for `m(V)`.
//!
//! Every check consumes `m` values computed elsewhere and reports them
//! against a bracket `[lower, upper]`; nothing here runs a solver.

use std::fmt;

use crate::error::{Error, Result};
use crate::potential::{Measure, Potential};

/// Default absolute tolerance for the checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    Comparison,
    Perturbation,
    Delta,
    Nondecreasing,
    Invariance,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Comparison => "comparison",
            Theorem::Perturbation => "perturbation",
            Theorem::Delta => "delta",
            Theorem::Nondecreasing => "nondecreasing",
            Theorem::Invariance => "invariance",
        })
    }
}

/// `computed` checked against `[lower, upper]`.
///
/// `pass` holds iff `lower − tol ≤ computed ≤ upper + tol`. `slack` is the
/// distance to the nearer bound, negative when violated. A report whose
/// precondition does not hold is not applicable; it passes vacuously and
/// its numbers are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub lower: f64,
    pub computed: f64,
    pub upper: f64,
    pub pass: bool,
    pub slack: f64,
    pub applicable: bool,
}

impl BoundReport {
    pub fn new(theorem: Theorem, lower: f64, computed: f64, upper: f64, tol: f64) -> Self {
        let slack = (computed - lower).min(upper - computed);
        let pass = computed.is_finite() && lower - tol <= computed && computed <= upper + tol;
        Self { theorem, lower, computed, upper, pass, slack, applicable: true }
    }

    pub fn not_applicable(theorem: Theorem) -> Self {
        Self {
            theorem,
            lower: f64::NAN,
            computed: f64::NAN,
            upper: f64::NAN,
            pass: true,
            slack: f64::NAN,
            applicable: false,
        }
    }
}

/// Pointwise dominance `p1 ≥ p2` gives `m2 ≤ m1`. Reported with
/// `lower = m2`, `computed = m1` and no upper bound.
pub fn comparison_check(p1: &Potential, p2: &Potential, m1: f64, m2: f64, tol: f64) -> BoundReport {
    if !p1.pointwise_geq(p2) {
        return BoundReport::not_applicable(Theorem::Comparison);
    }
    BoundReport::new(Theorem::Comparison, m2, m1, f64::INFINITY, tol)
}

/// `[m − |μ₋|, m + |μ₊|]`, the range of `m(V + μ)` given `m(V) = m`.
pub fn perturbation_bounds(base_m: f64, mu: &Measure) -> (f64, f64) {
    let tv = mu.total_variation();
    (base_m - tv.minus, base_m + tv.plus)
}

/// `max(|μ₊|, |μ₋|)`, which bounds `|m(V + μ) − m(V)|`.
pub fn symmetric_perturbation_bound(mu: &Measure) -> f64 {
    let tv = mu.total_variation();
    tv.plus.max(tv.minus)
}

pub fn perturbation_check(base_m: f64, mu: &Measure, perturbed_m: f64, tol: f64) -> BoundReport {
    if !base_m.is_finite() {
        return BoundReport::not_applicable(Theorem::Perturbation);
    }
    let (lo, hi) = perturbation_bounds(base_m, mu);
    BoundReport::new(Theorem::Perturbation, lo, perturbed_m, hi, tol)
}

/// `m(α + βδ₀) = 2√α − max(−β, 0)`.
pub fn delta_closed_form(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite, got {beta}")));
    }
    Ok(2.0 * alpha.sqrt() - (-beta).max(0.0))
}

pub fn delta_check(alpha: f64, beta: f64, m: f64, tol: f64) -> Result<BoundReport> {
    let exact = delta_closed_form(alpha, beta)?;
    Ok(BoundReport::new(Theorem::Delta, exact, m, exact, tol))
}

/// The constant `C = m^{-1/2}` of `‖u‖∞ ≤ C·I(u;V)^{1/2}`.
pub fn best_constant(m: f64) -> Result<f64> {
    if m.is_nan() {
        return Err(Error::InvalidInput("m is NaN".into()));
    }
    if m <= 0.0 {
        return Err(Error::NoInequality(m));
    }
    Ok(m.powf(-0.5))
}

/// `2√v₀` for a non-decreasing bounded potential with positive infimum `v₀`
/// and no measure part.
pub fn nondecreasing_limit(p: &Potential) -> Result<f64> {
    if p.has_measure_part() {
        return Err(Error::NotApplicable("potential has a measure part".into()));
    }
    if !p.bounded().is_non_decreasing() {
        return Err(Error::NotApplicable("bounded part is not non-decreasing".into()));
    }
    let v0 = p.bounded().left_tail();
    if v0 <= 0.0 {
        return Err(Error::NotApplicable(format!("infimum {v0} is not positive")));
    }
    Ok(2.0 * v0.sqrt())
}

pub fn nondecreasing_check(p: &Potential, m: f64, tol: f64) -> BoundReport {
    match nondecreasing_limit(p) {
        Ok(exact) => BoundReport::new(Theorem::Nondecreasing, exact, m, exact, tol),
        Err(_) => BoundReport::not_applicable(Theorem::Nondecreasing),
    }
}

/// Adding a nonnegative compactly supported `μ` to a monotone bounded
/// potential with positive infimum leaves `m` unchanged. Reported with
/// `lower = upper = m_base` and `computed = m_pert`.
pub fn invariance_check(p: &Potential, mu: &Measure, m_base: f64, m_pert: f64, tol: f64) -> BoundReport {
    let b = p.bounded();
    let monotone = b.is_non_decreasing() || b.is_non_increasing();
    let positive = b.all_values().all(|v| v > 0.0);
    if p.has_measure_part() || !monotone || !positive || !mu.is_nonnegative() {
        return BoundReport::not_applicable(Theorem::Invariance);
    }
    BoundReport::new(Theorem::Invariance, m_base, m_pert, m_base, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::DensityPart;

    const TOL: f64 = DEFAULT_TOLERANCE;

    #[test]
    fn comparison_examples() {
        let (c4, c1) = (Potential::constant(4.0), Potential::constant(1.0));
        let r = comparison_check(&c4, &c1, 4.0, 2.0, TOL);
        assert!(r.applicable && r.pass);
        let same = comparison_check(&c1, &c1, 2.0, 2.0 + 1e-9, TOL);
        assert!(same.pass && same.slack.abs() < 1e-8);
        let d = Potential::delta(1.0, 1.0);
        assert!(comparison_check(&d, &c1, 2.0, 2.0, TOL).pass);
        let bad = comparison_check(&c4, &c1, 1.0, 2.0, TOL);
        assert!(bad.applicable && !bad.pass && bad.slack < 0.0);
        let na = comparison_check(&c1, &c4, 2.0, 4.0, TOL);
        assert!(!na.applicable && na.pass);
    }

    #[test]
    fn perturbation_examples() {
        assert_eq!(perturbation_bounds(2.0, &Measure::atom(0.0, -1.0)), (1.0, 2.0));
        assert_eq!(perturbation_bounds(2.0, &Measure::zero()), (2.0, 2.0));
        let mu = Measure::from_density(DensityPart::interval(0.0, 1.0, 0.5).unwrap());
        assert_eq!(perturbation_bounds(2.0, &mu), (2.0, 2.5));
        assert!(perturbation_check(2.0, &Measure::atom(0.0, -1.0), 1.0, 0.0).pass);
        assert!(!perturbation_check(2.0, &Measure::atom(0.0, -1.0), 0.9, TOL).pass);
        let mixed = &Measure::atom(0.0, -1.0) + &Measure::atom(1.0, 0.25);
        assert_eq!(symmetric_perturbation_bound(&mixed), 1.0);
        assert!(!perturbation_check(f64::NAN, &mixed, 1.0, TOL).applicable);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_closed_form(1.0, -1.0).unwrap(), 1.0);
        assert_eq!(delta_closed_form(4.0, 9.0).unwrap(), 4.0);
        assert_eq!(delta_closed_form(1.0, 0.0).unwrap(), 2.0);
        assert!(matches!(delta_closed_form(0.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(delta_check(1.0, -1.0, 1.0004, TOL).unwrap().pass);
        assert!(!delta_check(1.0, -1.0, 1.01, TOL).unwrap().pass);
    }

    #[test]
    fn best_constant_examples() {
        assert!((best_constant(2.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-15);
        assert_eq!(best_constant(4.0).unwrap(), 0.5);
        assert_eq!(best_constant(-1.0), Err(Error::NoInequality(-1.0)));
        assert!(best_constant(0.0).is_err());
    }

    #[test]
    fn nondecreasing_examples() {
        assert_eq!(nondecreasing_limit(&Potential::step(1.0, 4.0, 0.0).unwrap()).unwrap(), 2.0);
        assert_eq!(nondecreasing_limit(&Potential::constant(9.0)).unwrap(), 6.0);
        let dec = Potential::step(4.0, 1.0, 0.0).unwrap();
        assert!(matches!(nondecreasing_limit(&dec), Err(Error::NotApplicable(_))));
        assert!(nondecreasing_limit(&Potential::delta(1.0, 1.0)).is_err());
        assert!(nondecreasing_limit(&Potential::constant(0.0)).is_err());
        assert!(!nondecreasing_check(&dec, 2.0, TOL).applicable);
        assert!(nondecreasing_check(&Potential::constant(9.0), 6.0002, TOL).pass);
    }

    #[test]
    fn invariance_examples() {
        let v = Potential::constant(1.0);
        assert!(invariance_check(&v, &Measure::atom(0.0, 1.0), 2.0, 2.0001, TOL).pass);
        let mu = Measure::from_density(DensityPart::interval(-1.0, 1.0, 2.0).unwrap());
        assert!(invariance_check(&v, &mu, 2.0, 2.0, TOL).pass);
        assert!(invariance_check(&v, &Measure::zero(), 2.0, 2.0, TOL).pass);
        assert!(!invariance_check(&v, &Measure::atom(0.0, 1.0), 2.0, 2.1, TOL).pass);
        assert!(!invariance_check(&v, &Measure::atom(0.0, -1.0), 2.0, 1.0, TOL).applicable);
        let well = Potential::well(1.0, 2.0, 0.0, 1.0).unwrap();
        assert!(!invariance_check(&well, &Measure::zero(), 0.0, 0.0, TOL).applicable);
    }

    #[test]
    fn report_pass_matches_definition() {
        let r = BoundReport::new(Theorem::Delta, 1.0, 1.0 + 5e-4, 1.0, TOL);
        assert!(r.pass && r.slack < 0.0);
        assert!(!BoundReport::new(Theorem::Delta, 1.0, f64::NAN, 1.0, TOL).pass);
    }
}
