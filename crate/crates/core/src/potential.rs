//! Generalized potentials `V = V₀ + V₁` on the real line.
//!
//! `V₀` is a bounded piecewise-constant function with constant tails and
//! `V₁` is a finite signed measure made of a compactly supported
//! piecewise-constant density plus a finite list of Dirac atoms. The
//! potential acts on `H¹(ℝ)` through the bilinear form
//!
//! ```text
//! V(u, v) = ∫ (V₀ + ρ) u v dx + Σ_j w_j u(x_j) v(x_j).
//! ```
//!
//! # Text schema
//!
//! Potentials (de)serialize through TOML with the following keys:
//!
//! ```toml
//! atoms = [[0.0, -1.0], [2.0, 0.5]]   # [location, weight] pairs
//!
//! [bounded]
//! breakpoints = [-1.0, 1.0]           # strictly increasing
//! values = [-4.0]                     # one per interval between breakpoints
//! left_tail = 1.0                     # value on (-inf, first breakpoint)
//! right_tail = 1.0                    # value on (last breakpoint, inf)
//!
//! [density]                           # optional, compactly supported
//! breakpoints = [0.0, 2.0]
//! values = [3.0]
//! ```
//!
//! With no breakpoints the bounded part is the constant `left_tail`, which
//! must then equal `right_tail`. Density tails, when given, must be zero.
//! Unknown keys are rejected. Atoms sharing a location are merged.

use std::ops::{Add, Deref, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A piecewise-constant function on ℝ with constant tails.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    left_tail: f64,
    right_tail: f64,
}

/// One constant piece `(start, end, value)`; tails have infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, left_tail: f64, right_tail: f64) -> Result<Self> {
        if breakpoints.iter().chain(&values).chain([&left_tail, &right_tail]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("piecewise-constant data must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        if breakpoints.is_empty() {
            if !values.is_empty() {
                return Err(Error::InvalidInput("values given without breakpoints".into()));
            }
            if left_tail != right_tail {
                return Err(Error::InvalidInput("without breakpoints the left and right tails must agree".into()));
            }
        } else if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        Ok(Self { breakpoints, values, left_tail, right_tail })
    }

    pub fn constant(value: f64) -> Self {
        Self { breakpoints: Vec::new(), values: Vec::new(), left_tail: value, right_tail: value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_tail(&self) -> f64 {
        self.left_tail
    }

    pub fn right_tail(&self) -> f64 {
        self.right_tail
    }

    /// All pieces from left to right, tails included.
    pub fn pieces(&self) -> Vec<Piece> {
        let Some((&first, &last)) = self.breakpoints.first().zip(self.breakpoints.last()) else {
            return vec![Piece { start: f64::NEG_INFINITY, end: f64::INFINITY, value: self.left_tail }];
        };
        let mut out = Vec::with_capacity(self.values.len() + 2);
        out.push(Piece { start: f64::NEG_INFINITY, end: first, value: self.left_tail });
        out.extend(self.breakpoints.windows(2).zip(&self.values).map(|(w, &value)| Piece {
            start: w[0],
            end: w[1],
            value,
        }));
        out.push(Piece { start: last, end: f64::INFINITY, value: self.right_tail });
        out
    }

    /// Value at `x`, taking the piece to the right at a breakpoint.
    pub fn value_at(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        if idx == 0 {
            self.left_tail
        } else if idx == self.breakpoints.len() {
            self.right_tail
        } else {
            self.values[idx - 1]
        }
    }

    /// Value just left of `x`.
    pub fn left_limit(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < x);
        if idx == 0 {
            self.left_tail
        } else if idx == self.breakpoints.len() {
            self.right_tail
        } else {
            self.values[idx - 1]
        }
    }

    /// Exact (min, max) over the pieces meeting `[lo, hi]` in a set of
    /// positive length. For `lo == hi` the one-sided limits are used.
    pub fn bounds_on(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInput(format!("empty or non-finite interval [{lo}, {hi}]")));
        }
        let vals: Vec<f64> = if lo == hi {
            vec![self.left_limit(lo), self.value_at(lo)]
        } else {
            self.pieces().into_iter().filter(|p| p.start < hi && p.end > lo).map(|p| p.value).collect()
        };
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((min, max))
    }

    /// Pointwise combination on the union of both breakpoint sets.
    pub fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let values = bps
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                f(self.value_at(mid), other.value_at(mid))
            })
            .collect();
        let left_tail = f(self.left_tail, other.left_tail);
        let right_tail = f(self.right_tail, other.right_tail);
        if bps.is_empty() {
            return Self::constant(left_tail);
        }
        Self { breakpoints: bps, values, left_tail, right_tail }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            left_tail: f(self.left_tail),
            right_tail: f(self.right_tail),
        }
    }

    pub fn shifted(&self, h: f64) -> Self {
        Self { breakpoints: self.breakpoints.iter().map(|b| b + h).collect(), ..self.clone() }
    }

    /// Every value the function takes on a set of positive measure.
    pub fn all_values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.left_tail).chain(self.values.iter().copied()).chain(std::iter::once(self.right_tail))
    }

    pub fn is_non_decreasing(&self) -> bool {
        let v: Vec<f64> = self.all_values().collect();
        v.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_non_increasing(&self) -> bool {
        let v: Vec<f64> = self.all_values().collect();
        v.windows(2).all(|w| w[0] >= w[1])
    }

    /// `(∫ f₊, ∫ f₋)` over the finite pieces; tails are not integrated.
    fn signed_masses(&self) -> (f64, f64) {
        self.breakpoints.windows(2).zip(&self.values).fold((0.0, 0.0), |(p, m), (w, &v)| {
            let mass = v.abs() * (w[1] - w[0]);
            if v > 0.0 {
                (p + mass, m)
            } else {
                (p, m + mass)
            }
        })
    }
}

/// The bounded part `V₀ ∈ L∞(ℝ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedPart(PiecewiseConstant);

impl BoundedPart {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, left_tail: f64, right_tail: f64) -> Result<Self> {
        PiecewiseConstant::new(breakpoints, values, left_tail, right_tail).map(Self)
    }

    pub fn constant(value: f64) -> Self {
        Self(PiecewiseConstant::constant(value))
    }

    pub fn as_piecewise(&self) -> &PiecewiseConstant {
        &self.0
    }
}

impl From<PiecewiseConstant> for BoundedPart {
    fn from(p: PiecewiseConstant) -> Self {
        Self(p)
    }
}

impl Deref for BoundedPart {
    type Target = PiecewiseConstant;
    fn deref(&self) -> &PiecewiseConstant {
        &self.0
    }
}

/// A compactly supported piecewise-constant density, the `L¹` part of `V₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPart(PiecewiseConstant);

impl DensityPart {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        PiecewiseConstant::new(breakpoints, values, 0.0, 0.0).map(Self)
    }

    pub fn zero() -> Self {
        Self(PiecewiseConstant::zero())
    }

    /// Density equal to `value` on `[start, end]` and zero elsewhere.
    pub fn interval(start: f64, end: f64, value: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![value])
    }

    pub fn as_piecewise(&self) -> &PiecewiseConstant {
        &self.0
    }

    /// `Σ |value_i| · width_i`.
    pub fn total_variation(&self) -> f64 {
        let (p, m) = self.0.signed_masses();
        p + m
    }

    pub fn is_zero(&self) -> bool {
        self.0.values.iter().all(|&v| v == 0.0)
    }
}

impl TryFrom<PiecewiseConstant> for DensityPart {
    type Error = Error;
    fn try_from(p: PiecewiseConstant) -> Result<Self> {
        if p.left_tail != 0.0 || p.right_tail != 0.0 {
            return Err(Error::InvalidInput("density tails must be zero".into()));
        }
        Ok(Self(p))
    }
}

impl Deref for DensityPart {
    type Target = PiecewiseConstant;
    fn deref(&self) -> &PiecewiseConstant {
        &self.0
    }
}

/// A Dirac atom `weight · δ_location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: f64, weight: f64) -> Self {
        Self { location, weight }
    }
}

impl From<[f64; 2]> for Atom {
    fn from([location, weight]: [f64; 2]) -> Self {
        Self { location, weight }
    }
}

impl From<Atom> for [f64; 2] {
    fn from(a: Atom) -> Self {
        [a.location, a.weight]
    }
}

/// Sort by location, add weights at equal locations and drop zero atoms.
fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for atom in atoms {
        match out.last_mut() {
            Some(last) if last.location == atom.location => last.weight += atom.weight,
            _ => out.push(atom),
        }
    }
    out.retain(|a| a.weight != 0.0);
    out
}

/// Total variation with its Jordan split, `total = plus + minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalVariation {
    pub total: f64,
    pub plus: f64,
    pub minus: f64,
}

/// A finite signed measure: density plus atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Measure {
    density: DensityPart,
    atoms: Vec<Atom>,
}

impl Default for DensityPart {
    fn default() -> Self {
        Self::zero()
    }
}

impl Measure {
    pub fn new(density: DensityPart, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !a.location.is_finite() || !a.weight.is_finite()) {
            return Err(Error::InvalidInput("atoms must be finite".into()));
        }
        Ok(Self { density, atoms: merge_atoms(atoms) })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atom(location: f64, weight: f64) -> Self {
        Self { density: DensityPart::zero(), atoms: merge_atoms(vec![Atom::new(location, weight)]) }
    }

    pub fn from_density(density: DensityPart) -> Self {
        Self { density, atoms: Vec::new() }
    }

    pub fn density(&self) -> &DensityPart {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_variation(&self) -> TotalVariation {
        let (dp, dm) = self.density.0.signed_masses();
        let (ap, am) =
            self.atoms.iter().fold(
                (0.0, 0.0),
                |(p, m), a| {
                    if a.weight > 0.0 {
                        (p + a.weight, m)
                    } else {
                        (p, m - a.weight)
                    }
                },
            );
        let plus = dp + ap;
        let minus = dm + am;
        TotalVariation { total: plus + minus, plus, minus }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.density.values.iter().all(|&v| v >= 0.0) && self.atoms.iter().all(|a| a.weight >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.density.is_zero() && self.atoms.is_empty()
    }

    pub fn shifted(&self, h: f64) -> Self {
        Self {
            density: DensityPart(self.density.0.shifted(h)),
            atoms: self.atoms.iter().map(|a| Atom::new(a.location + h, a.weight)).collect(),
        }
    }
}

impl Neg for &Measure {
    type Output = Measure;
    fn neg(self) -> Measure {
        Measure {
            density: DensityPart(self.density.0.map(|v| -v)),
            atoms: self.atoms.iter().map(|a| Atom::new(a.location, -a.weight)).collect(),
        }
    }
}

impl Add for &Measure {
    type Output = Measure;
    fn add(self, rhs: &Measure) -> Measure {
        Measure {
            density: DensityPart(self.density.0.combine(&rhs.density.0, |a, b| a + b)),
            atoms: merge_atoms(self.atoms.iter().chain(&rhs.atoms).copied().collect()),
        }
    }
}

/// A generalized potential `V = V₀ + ρ + Σ w_j δ_{x_j}`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct Potential {
    bounded: BoundedPart,
    density: DensityPart,
    atoms: Vec<Atom>,
}

impl Potential {
    pub fn new(bounded: BoundedPart, density: DensityPart, atoms: Vec<Atom>) -> Result<Self> {
        let measure = Measure::new(density, atoms)?;
        Ok(Self { bounded, density: measure.density, atoms: measure.atoms })
    }

    pub fn from_parts(bounded: BoundedPart, measure: Measure) -> Self {
        Self { bounded, density: measure.density, atoms: measure.atoms }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self { bounded: BoundedPart::constant(value), density: DensityPart::zero(), atoms: Vec::new() }
    }

    /// `alpha + beta · δ₀`.
    pub fn delta(alpha: f64, beta: f64) -> Self {
        Self::from_parts(BoundedPart::constant(alpha), Measure::atom(0.0, beta))
    }

    /// `left` on `(-∞, at)` and `right` on `(at, ∞)`.
    pub fn step(left: f64, right: f64, at: f64) -> Result<Self> {
        let bounded = BoundedPart::new(vec![at], Vec::new(), left, right)?;
        Ok(Self::from_parts(bounded, Measure::zero()))
    }

    /// `alpha` outside `(b, c)` and `-beta` inside.
    pub fn well(alpha: f64, beta: f64, b: f64, c: f64) -> Result<Self> {
        let bounded = BoundedPart::new(vec![b, c], vec![-beta], alpha, alpha)?;
        Ok(Self::from_parts(bounded, Measure::zero()))
    }

    pub fn bounded(&self) -> &BoundedPart {
        &self.bounded
    }

    pub fn density(&self) -> &DensityPart {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The measure part `V₁`.
    pub fn measure(&self) -> Measure {
        Measure { density: self.density.clone(), atoms: self.atoms.clone() }
    }

    pub fn has_measure_part(&self) -> bool {
        !self.density.is_zero() || !self.atoms.is_empty()
    }

    /// `V + μ`.
    pub fn perturbed(&self, mu: &Measure) -> Self {
        Self::from_parts(self.bounded.clone(), &self.measure() + mu)
    }

    /// `V₀ + ρ` as one piecewise-constant function.
    pub fn profile(&self) -> PiecewiseConstant {
        self.bounded.0.combine(&self.density.0, |a, b| a + b)
    }

    /// Exact essential infimum and supremum of `V₀` on `[lo, hi]`.
    /// Atoms and the density are excluded.
    pub fn essential_bounds(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        self.bounded.bounds_on(lo, hi)
    }

    pub fn total_variation(&self) -> TotalVariation {
        self.measure().total_variation()
    }

    pub fn shift(&self, h: f64) -> Self {
        Self {
            bounded: BoundedPart(self.bounded.0.shifted(h)),
            density: DensityPart(self.density.0.shifted(h)),
            atoms: self.atoms.iter().map(|a| Atom::new(a.location + h, a.weight)).collect(),
        }
    }

    /// Convex hull of all breakpoints and atom locations, `None` when the
    /// potential is a plain constant.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        self.bounded
            .breakpoints
            .iter()
            .chain(&self.density.breakpoints)
            .copied()
            .chain(self.atoms.iter().map(|a| a.location))
            .fold(None, |acc, x| match acc {
                None => Some((x, x)),
                Some((lo, hi)) => Some((f64::min(lo, x), f64::max(hi, x))),
            })
    }

    /// Values of `V` on the two tails.
    pub fn tails(&self) -> (f64, f64) {
        (self.bounded.left_tail, self.bounded.right_tail)
    }

    /// Smallest tail value; the decay rate of minimizers far out is its root.
    pub fn tail_infimum(&self) -> f64 {
        let (l, r) = self.tails();
        l.min(r)
    }

    /// Sufficient test for `(p1 − p2)(u, u) ≥ 0` on all of `H¹`: the
    /// difference has a nonnegative profile and nonnegative atoms.
    pub fn pointwise_geq(&self, other: &Potential) -> bool {
        let diff = self - other;
        diff.profile().all_values().all(|v| v >= 0.0) && diff.atoms.iter().all(|a| a.weight >= 0.0)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("potential always serializes")
    }
}

impl Add for &Potential {
    type Output = Potential;
    fn add(self, rhs: &Potential) -> Potential {
        Potential::from_parts(
            BoundedPart(self.bounded.0.combine(&rhs.bounded.0, |a, b| a + b)),
            &self.measure() + &rhs.measure(),
        )
    }
}

impl Sub for &Potential {
    type Output = Potential;
    fn sub(self, rhs: &Potential) -> Potential {
        Potential::from_parts(
            BoundedPart(self.bounded.0.combine(&rhs.bounded.0, |a, b| a - b)),
            &self.measure() + &(-&rhs.measure()),
        )
    }
}

/// Split a piecewise-constant function at the threshold `|V| > 1` into a
/// part bounded by 1 and an integrable excess supported where `|V| > 1`.
pub fn decompose_threshold(samples: &PiecewiseConstant) -> Result<(BoundedPart, DensityPart)> {
    for tail in [samples.left_tail, samples.right_tail] {
        if tail.abs() > 1.0 {
            return Err(Error::NonIntegrableExcess(tail));
        }
    }
    let bounded = samples.map(|v| if v.abs() > 1.0 { 0.0 } else { v });
    let excess = samples.map(|v| if v.abs() > 1.0 { v } else { 0.0 });
    Ok((BoundedPart(bounded), DensityPart(excess)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseSpec {
    #[serde(default)]
    breakpoints: Vec<f64>,
    #[serde(default)]
    values: Vec<f64>,
    left_tail: f64,
    right_tail: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DensitySpec {
    #[serde(default)]
    breakpoints: Vec<f64>,
    #[serde(default)]
    values: Vec<f64>,
    #[serde(default, skip_serializing)]
    left_tail: f64,
    #[serde(default, skip_serializing)]
    right_tail: f64,
}

impl DensitySpec {
    fn build(self) -> Result<DensityPart> {
        if self.breakpoints.is_empty() && self.values.is_empty() && self.left_tail == 0.0 && self.right_tail == 0.0 {
            return Ok(DensityPart::zero());
        }
        PiecewiseConstant::new(self.breakpoints, self.values, self.left_tail, self.right_tail)?.try_into()
    }

    fn from_part(d: &DensityPart) -> Option<Self> {
        (!d.breakpoints.is_empty()).then(|| Self {
            breakpoints: d.breakpoints.clone(),
            values: d.values.clone(),
            left_tail: 0.0,
            right_tail: 0.0,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSpec {
    #[serde(default)]
    atoms: Vec<Atom>,
    bounded: PiecewiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<DensitySpec>,
}

impl TryFrom<PotentialSpec> for Potential {
    type Error = Error;
    fn try_from(s: PotentialSpec) -> Result<Self> {
        let b = s.bounded;
        let bounded = BoundedPart::new(b.breakpoints, b.values, b.left_tail, b.right_tail)?;
        let density = s.density.map(DensitySpec::build).transpose()?.unwrap_or_default();
        Potential::new(bounded, density, s.atoms)
    }
}

impl From<Potential> for PotentialSpec {
    fn from(p: Potential) -> Self {
        PotentialSpec {
            atoms: p.atoms.clone(),
            bounded: PiecewiseSpec {
                breakpoints: p.bounded.breakpoints.clone(),
                values: p.bounded.values.clone(),
                left_tail: p.bounded.left_tail,
                right_tail: p.bounded.right_tail,
            },
            density: DensitySpec::from_part(&p.density),
        }
    }
}

/// Serialized form of a [`Measure`]: optional `density` table and `atoms`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureSpec {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<DensitySpec>,
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureSpec { atoms: self.atoms.clone(), density: DensitySpec::from_part(&self.density) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = MeasureSpec::deserialize(d)?;
        let density = spec.density.map(DensitySpec::build).transpose().map_err(serde::de::Error::custom)?;
        Measure::new(density.unwrap_or_default(), spec.atoms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well() -> Potential {
        Potential::well(1.0, 4.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn essential_bounds_examples() {
        let c = Potential::constant(4.0);
        assert_eq!(c.essential_bounds(-1.0, 1.0).unwrap(), (4.0, 4.0));
        let s = Potential::step(1.0, 4.0, 0.0).unwrap();
        assert_eq!(s.essential_bounds(-1.0, 1.0).unwrap(), (1.0, 4.0));
        assert_eq!(well().essential_bounds(0.0, 3.0).unwrap(), (-4.0, 1.0));
        // pieces touching only at an endpoint do not count
        assert_eq!(s.essential_bounds(0.0, 1.0).unwrap(), (4.0, 4.0));
        assert_eq!(s.essential_bounds(0.0, 0.0).unwrap(), (1.0, 4.0));
    }

    #[test]
    fn essential_bounds_rejects_empty_interval() {
        let c = Potential::constant(4.0);
        assert!(matches!(c.essential_bounds(1.0, -1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn essential_bounds_ignore_measure_part() {
        let p = Potential::new(
            BoundedPart::constant(2.0),
            DensityPart::interval(-1.0, 1.0, 10.0).unwrap(),
            vec![Atom::new(0.0, -5.0)],
        )
        .unwrap();
        assert_eq!(p.essential_bounds(-2.0, 2.0).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn total_variation_examples() {
        let tv = Potential::delta(1.0, -1.0).total_variation();
        assert_eq!((tv.total, tv.plus, tv.minus), (1.0, 0.0, 1.0));

        let p = Potential::new(
            BoundedPart::constant(1.0),
            DensityPart::interval(0.0, 2.0, 3.0).unwrap(),
            vec![Atom::new(5.0, -0.5)],
        )
        .unwrap();
        let tv = p.total_variation();
        assert_eq!((tv.total, tv.plus, tv.minus), (6.5, 6.0, 0.5));

        let tv = Potential::constant(3.0).total_variation();
        assert_eq!((tv.total, tv.plus, tv.minus), (0.0, 0.0, 0.0));
    }

    #[test]
    fn threshold_split_examples() {
        let f = PiecewiseConstant::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.5, 3.0, 0.8], 0.5, 0.8).unwrap();
        let (b, d) = decompose_threshold(&f).unwrap();
        assert_eq!(b.values(), &[0.5, 0.0, 0.8]);
        assert_eq!(d.values(), &[0.0, 3.0, 0.0]);

        let g = PiecewiseConstant::new(vec![0.0, 1.0], vec![-1.0], 0.2, 1.0).unwrap();
        let (b, d) = decompose_threshold(&g).unwrap();
        assert_eq!(b.as_piecewise(), &g);
        assert_eq!(d.total_variation(), 0.0);

        let h = PiecewiseConstant::new(vec![0.0, 3.0], vec![-2.0], 0.0, 0.0).unwrap();
        let (_, d) = decompose_threshold(&h).unwrap();
        assert_eq!(d.total_variation(), 6.0);
    }

    #[test]
    fn threshold_split_rejects_large_tail() {
        let f = PiecewiseConstant::new(vec![0.0, 1.0], vec![0.5], 2.0, 0.0).unwrap();
        assert_eq!(decompose_threshold(&f), Err(Error::NonIntegrableExcess(2.0)));
    }

    #[test]
    fn shift_examples() {
        let p = Potential::delta(1.0, -1.0).shift(2.0);
        assert_eq!(p.atoms(), &[Atom::new(2.0, -1.0)]);
        assert_eq!(well().shift(0.0), well());
        let w = well().shift(1.0);
        assert_eq!(w.bounded().breakpoints(), &[0.0, 2.0]);
        assert_eq!(w.bounded().values(), &[-4.0]);
    }

    #[test]
    fn pointwise_geq_examples() {
        assert!(Potential::constant(4.0).pointwise_geq(&Potential::constant(1.0)));
        assert!(!Potential::delta(1.0, -1.0).pointwise_geq(&Potential::constant(1.0)));
        let w = well();
        assert!(w.pointwise_geq(&w));
    }

    #[test]
    fn coincident_atoms_merge() {
        let p = Potential::new(
            BoundedPart::constant(1.0),
            DensityPart::zero(),
            vec![Atom::new(0.0, 1.0), Atom::new(1.0, 2.0), Atom::new(0.0, 0.5)],
        )
        .unwrap();
        assert_eq!(p.atoms(), &[Atom::new(0.0, 1.5), Atom::new(1.0, 2.0)]);
    }

    #[test]
    fn constructor_validation() {
        assert!(BoundedPart::new(vec![1.0, 0.0], vec![2.0], 1.0, 1.0).is_err());
        assert!(BoundedPart::new(vec![0.0, 1.0], vec![], 1.0, 1.0).is_err());
        assert!(BoundedPart::new(vec![], vec![], 1.0, 2.0).is_err());
        assert!(BoundedPart::new(vec![0.0], vec![], f64::NAN, 2.0).is_err());
    }

    #[test]
    fn profile_adds_density() {
        let p = Potential::new(
            BoundedPart::new(vec![0.0], vec![], 1.0, 4.0).unwrap(),
            DensityPart::interval(-1.0, 1.0, 2.0).unwrap(),
            vec![],
        )
        .unwrap();
        let prof = p.profile();
        assert_eq!(prof.breakpoints(), &[-1.0, 0.0, 1.0]);
        assert_eq!(prof.values(), &[3.0, 6.0]);
        assert_eq!(prof.value_at(-5.0), 1.0);
        assert_eq!(prof.value_at(5.0), 4.0);
    }

    #[test]
    fn toml_schema() {
        let text = r#"
atoms = [[0.0, -1.0]]

[bounded]
breakpoints = [-1.0, 1.0]
values = [-4.0]
left_tail = 1.0
right_tail = 1.0

[density]
breakpoints = [0.0, 2.0]
values = [3.0]
"#;
        let p = Potential::from_toml_str(text).unwrap();
        assert_eq!(p.atoms(), &[Atom::new(0.0, -1.0)]);
        assert_eq!(p.density().total_variation(), 6.0);
        assert_eq!(Potential::from_toml_str(&p.to_toml_string()).unwrap(), p);

        let bad = "[bounded]\nleft_tail = 1.0\nright_tail = 1.0\nwidth = 3\n";
        assert!(Potential::from_toml_str(bad).is_err());
        let bad_tail = "[bounded]\nleft_tail = 1.0\nright_tail = 1.0\n[density]\nbreakpoints=[0.0,1.0]\nvalues=[1.0]\nleft_tail=1.0\n";
        assert!(Potential::from_toml_str(bad_tail).is_err());
    }
}
