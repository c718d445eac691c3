#![allow(dead_code)]

use rand::Rng;
use sobolev_core::potential::{Atom, BoundedPart, DensityPart, Measure};
use sobolev_core::Potential;

/// Sorted, well separated breakpoints in `[lo, hi]`.
pub fn breakpoints<R: Rng>(rng: &mut R, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..hi)).collect();
    xs.sort_by(f64::total_cmp);
    for i in 1..xs.len() {
        if xs[i] - xs[i - 1] < 0.05 {
            xs[i] = xs[i - 1] + 0.05;
        }
    }
    xs
}

/// Bounded piecewise-constant part with values in `[lo, hi]`.
pub fn bounded<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> BoundedPart {
    bounded_with_tails(rng, (lo, hi), (lo, hi))
}

/// Inner values drawn from `inner`, tail values from `tails`.
pub fn bounded_with_tails<R: Rng>(rng: &mut R, inner: (f64, f64), tails: (f64, f64)) -> BoundedPart {
    let n = rng.gen_range(1..=4);
    let bps = breakpoints(rng, n, -3.0, 3.0);
    let vals = (0..n - 1).map(|_| rng.gen_range(inner.0..inner.1)).collect();
    BoundedPart::new(bps, vals, rng.gen_range(tails.0..tails.1), rng.gen_range(tails.0..tails.1)).unwrap()
}

/// Compactly supported density with `|μ|_TV = tv`.
pub fn density<R: Rng>(rng: &mut R, tv: f64) -> DensityPart {
    let n = rng.gen_range(2..=5);
    let bps = breakpoints(rng, n, -2.0, 2.0);
    let raw: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mass: f64 = raw.iter().zip(bps.windows(2)).map(|(v, w)| v.abs() * (w[1] - w[0])).sum();
    let vals = raw.iter().map(|v| v * tv / mass).collect();
    DensityPart::new(bps, vals).unwrap()
}

/// Up to `max` atoms with weights in `[0, w]` on `[-2, 2]`.
pub fn nonnegative_atoms<R: Rng>(rng: &mut R, max: usize, w: f64) -> Vec<Atom> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| Atom::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.0..w))).collect()
}

/// Positive piecewise-constant potential with nonnegative atoms.
pub fn positive_with_atoms<R: Rng>(rng: &mut R) -> Potential {
    let b = bounded(rng, 0.3, 3.0);
    let atoms = nonnegative_atoms(rng, 2, 1.5);
    Potential::from_parts(b, Measure::new(DensityPart::zero(), atoms).unwrap())
}

/// Positive bounded potential, no measure part.
pub fn positive_bounded<R: Rng>(rng: &mut R) -> Potential {
    Potential::from_parts(bounded(rng, 0.3, 3.0), Measure::zero())
}

pub fn sup_distance(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
