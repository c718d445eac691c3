//! Grid-free inner solutions for piecewise-constant potentials with atoms.
//!
//! On each half-line the minimizer is the solution of `u″ = V u` decaying at
//! infinity, propagated piece by piece toward the peak: hyperbolic functions
//! where `V > 0`, trigonometric where `V < 0`, affine where `V = 0`, and a
//! derivative jump `u′(x⁺) − u′(x⁻) = w u(x)` across an atom. Integrating by
//! parts on both sides gives
//!
//! ```text
//! F(a;V) = u′(a⁻) − u′(a⁺) + w_a      (u(a) = 1),
//! ```
//!
//! valid as long as both propagated solutions stay in `(0, 1]`.
//!
//! States are renormalized after every piece and magnitudes are tracked in
//! log scale, so long pieces cannot overflow.

use std::f64::consts::FRAC_PI_2;

use super::{contact_set, InnerOptions, InnerSolution, Method, SolveCertificate};
use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::potential::{Atom, PiecewiseConstant, Potential};

/// Longest hyperbolic chunk, in decay lengths.
const MAX_CHUNK: f64 = 20.0;

/// Local solution on one piece with `u(0) = 1`, `u′(0) = slope`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    v: f64,
    slope: f64,
    log_scale: f64,
}

impl Piece {
    /// `(u, u′)` at offset `s` from the piece start, before scaling.
    fn local(&self, s: f64) -> (f64, f64) {
        let (v, d) = (self.v, self.slope);
        if v > 0.0 {
            let k = v.sqrt();
            let (sh, ch) = ((k * s).sinh(), (k * s).cosh());
            (ch + d / k * sh, k * sh + d * ch)
        } else if v < 0.0 {
            let k = (-v).sqrt();
            let (sn, cs) = (k * s).sin_cos();
            (cs + d / k * sn, -k * sn + d * cs)
        } else {
            (1.0 + d * s, d)
        }
    }

    /// Whether the local solution stays positive on `[0, len]`, and its max
    /// there.
    fn positivity_and_max(&self, len: f64) -> (bool, f64) {
        let (end, _) = self.local(len);
        if self.v < 0.0 {
            let k = (-self.v).sqrt();
            let phase = (self.slope / k).atan();
            let positive = k * len < FRAC_PI_2 + phase && end > 0.0;
            let max =
                if phase > 0.0 && k * len >= phase { (1.0 + (self.slope / k).powi(2)).sqrt() } else { end.max(1.0) };
            (positive, max)
        } else {
            // convex (or affine) while positive: endpoints bound everything
            (end > 0.0, end.max(1.0))
        }
    }
}

/// Decaying solution on `(−∞, target]` in a coordinate increasing toward
/// the peak.
#[derive(Debug, Clone)]
struct HalfLine {
    tail_end: f64,
    tail_rate: f64,
    pieces: Vec<Piece>,
    target: f64,
    /// `u′/u` at the target.
    slope_ratio: f64,
    /// `ln u` at the target.
    log_peak: f64,
}

impl HalfLine {
    fn propagate(profile: &PiecewiseConstant, atoms: &[Atom], target: f64) -> Result<Self> {
        let tail_v = profile.left_tail();
        if !(tail_v > 0.0) {
            return Err(Error::InvalidPotential(format!("tail value {tail_v} admits no decaying solution")));
        }
        let mut points: Vec<f64> = profile
            .breakpoints()
            .iter()
            .copied()
            .chain(atoms.iter().map(|a| a.location))
            .filter(|&x| x < target)
            .collect();
        points.push(target);
        points.sort_by(f64::total_cmp);
        points.dedup();

        let tail_end = points[0];
        let tail_rate = tail_v.sqrt();
        let mut slope = tail_rate;
        let mut log_scale = 0.0;
        let mut log_max = 0.0_f64;
        let mut pieces = Vec::new();

        for w in points.windows(2) {
            let (s, e) = (w[0], w[1]);
            slope += atoms.iter().filter(|a| a.location == s).map(|a| a.weight).sum::<f64>();
            let v = profile.value_at(0.5 * (s + e));
            let chunks = if v > 0.0 { ((e - s) * v.sqrt() / MAX_CHUNK).ceil().max(1.0) as usize } else { 1 };
            for c in 0..chunks {
                let cs = s + (e - s) * c as f64 / chunks as f64;
                let ce = if c + 1 == chunks { e } else { s + (e - s) * (c + 1) as f64 / chunks as f64 };
                let piece = Piece { start: cs, v, slope, log_scale };
                let (positive, local_max) = piece.positivity_and_max(ce - cs);
                if !positive {
                    return Err(Error::MethodInapplicable(format!(
                        "propagated solution leaves (0, 1] on [{cs}, {ce}]"
                    )));
                }
                log_max = log_max.max(log_scale + local_max.ln());
                let (u1, du1) = piece.local(ce - cs);
                pieces.push(piece);
                log_scale += u1.ln();
                slope = du1 / u1;
            }
        }
        if log_max > log_scale + 1e-12 {
            return Err(Error::MethodInapplicable(format!(
                "propagated solution exceeds its peak value by a factor {:.6}",
                (log_max - log_scale).exp()
            )));
        }
        Ok(Self { tail_end, tail_rate, pieces, target, slope_ratio: slope, log_peak: log_scale })
    }

    /// `u(y)/u(target)` for `y ≤ target`.
    fn eval(&self, y: f64) -> f64 {
        let y = y.min(self.target);
        if y <= self.tail_end {
            return (self.tail_rate * (y - self.tail_end) - self.log_peak).exp();
        }
        let idx = self.pieces.partition_point(|p| p.start <= y).saturating_sub(1);
        let piece = &self.pieces[idx];
        piece.local(y - piece.start).0 * (piece.log_scale - self.log_peak).exp()
    }
}

fn reflect(p: &PiecewiseConstant) -> PiecewiseConstant {
    let bps: Vec<f64> = p.breakpoints().iter().rev().map(|b| -b).collect();
    let vals: Vec<f64> = p.values().iter().rev().copied().collect();
    PiecewiseConstant::new(bps, vals, p.right_tail(), p.left_tail()).expect("reflection preserves validity")
}

/// Exact inner solution on the real line.
#[derive(Debug, Clone)]
pub struct TransferSolution {
    a: f64,
    value: f64,
    left: HalfLine,
    right: HalfLine,
}

/// `F(a;V)` and the minimizer profile in closed form.
///
/// Fails with [`Error::MethodInapplicable`] when a propagated half-line
/// solution leaves `(0, 1]` (the contact set is then nontrivial) and with
/// [`Error::InvalidPotential`] when a tail value is not positive.
pub fn solve_transfer(p: &Potential, a: f64) -> Result<TransferSolution> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("peak location must be finite".into()));
    }
    let profile = p.profile();
    let left = HalfLine::propagate(&profile, p.atoms(), a)?;
    let mirrored: Vec<Atom> = p.atoms().iter().map(|at| Atom::new(-at.location, at.weight)).collect();
    let right = HalfLine::propagate(&reflect(&profile), &mirrored, -a)?;
    let peak_weight: f64 = p.atoms().iter().filter(|at| at.location == a).map(|at| at.weight).sum();
    let value = left.slope_ratio + right.slope_ratio + peak_weight;
    Ok(TransferSolution { a, value, left, right })
}

impl TransferSolution {
    pub fn peak(&self) -> f64 {
        self.a
    }

    /// `F(a;V)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `u_a(x)`, normalized so that `u_a(a) = 1`.
    pub fn profile(&self, x: f64) -> f64 {
        if x <= self.a {
            self.left.eval(x)
        } else {
            self.right.eval(-x)
        }
    }

    /// `(u′(a⁻), u′(a⁺))`.
    pub fn peak_slopes(&self) -> (f64, f64) {
        (self.left.slope_ratio, -self.right.slope_ratio)
    }

    /// Profile sampled on a grid, ends set to zero. The value stays exact.
    pub fn sample(&self, grid: &Grid, opts: &InnerOptions) -> InnerSolution {
        let nodes = grid.nodes().to_vec();
        let n = nodes.len();
        let mut u: Vec<f64> = nodes.iter().map(|&x| self.profile(x)).collect();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        let peak_index = grid.node_index(self.a).unwrap_or_else(|| {
            let i = nodes.partition_point(|&x| x < self.a).min(n - 1);
            if i > 0 && (self.a - nodes[i - 1]) < (nodes[i] - self.a) {
                i - 1
            } else {
                i
            }
        });
        let contact_set = contact_set(&u, peak_index, opts.feasibility);
        InnerSolution {
            nodes,
            u,
            peak_index,
            value: self.value,
            contact_set,
            kkt_residual: 0.0,
            iterations: 0,
            method: Method::Transfer,
            certificate: SolveCertificate::Exact,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{BoundedPart, DensityPart};

    #[test]
    fn constant_potential() {
        for alpha in [0.25, 1.0, 4.0, 9.0] {
            let t = solve_transfer(&Potential::constant(alpha), 0.7).unwrap();
            assert!((t.value() - 2.0 * alpha.sqrt()).abs() < 1e-14);
            for x in [-3.0, 0.0, 0.7, 2.5] {
                let expect = (-alpha.sqrt() * (x - 0.7_f64).abs()).exp();
                assert!((t.profile(x) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn delta_at_peak() {
        for (alpha, beta) in [(1.0, 1.0), (4.0, -1.0), (0.5, 0.25)] {
            let t = solve_transfer(&Potential::delta(alpha, beta), 0.0).unwrap();
            assert!((t.value() - (2.0 * f64::sqrt(alpha) + beta)).abs() < 1e-14);
        }
    }

    #[test]
    fn step_potential() {
        let t = solve_transfer(&Potential::step(1.0, 4.0, 0.0).unwrap(), 0.0).unwrap();
        assert!((t.value() - 3.0).abs() < 1e-14);
        let (l, r) = t.peak_slopes();
        assert!((l - 1.0).abs() < 1e-14 && (r + 2.0).abs() < 1e-14);
    }

    #[test]
    fn step_far_away_and_overflow_safe() {
        let p = Potential::step(1.0, 4.0, 0.0).unwrap();
        let t = solve_transfer(&p, -1000.0).unwrap();
        assert!((t.value() - 2.0).abs() < 1e-12);
        let t = solve_transfer(&p, 1000.0).unwrap();
        assert!((t.value() - 4.0).abs() < 1e-12);
        assert!(t.profile(0.0) >= 0.0 && t.profile(0.0) < 1e-300);
    }

    #[test]
    fn atom_jump_in_profile() {
        // atom off the peak: derivative jump w·u at the atom
        let p = Potential::new(BoundedPart::constant(1.0), DensityPart::zero(), vec![Atom::new(-1.0, 2.0)]).unwrap();
        let t = solve_transfer(&p, 0.0).unwrap();
        let eps = 1e-7;
        let x0 = -1.0;
        let dl = (t.profile(x0) - t.profile(x0 - eps)) / eps;
        let dr = (t.profile(x0 + eps) - t.profile(x0)) / eps;
        assert!(((dr - dl) - 2.0 * t.profile(x0)).abs() < 1e-5);
        // a positive atom off the peak can only raise F
        assert!(t.value() > 2.0);
    }

    #[test]
    fn negative_atom_off_peak_with_overshoot_is_inapplicable() {
        let p = Potential::delta(0.5, -1.0);
        assert!(matches!(solve_transfer(&p, 0.01), Err(Error::MethodInapplicable(_))));
    }

    #[test]
    fn deep_well_is_inapplicable() {
        let p = Potential::well(1.0, 4.0, -1.0, 1.0).unwrap();
        assert!(matches!(solve_transfer(&p, 0.0), Err(Error::MethodInapplicable(_))));
    }

    #[test]
    fn shallow_well_uses_trigonometric_pieces() {
        // sqrt(beta)·width = 0.5, well below the trapping threshold
        let p = Potential::well(1.0, 0.25, -0.5, 0.5).unwrap();
        let t = solve_transfer(&p, 3.0).unwrap();
        assert!(t.value() > 0.0 && t.value() < 2.0);
    }

    #[test]
    fn non_positive_tail_is_invalid() {
        let p = Potential::step(0.0, 1.0, 0.0).unwrap();
        assert!(matches!(solve_transfer(&p, 1.0), Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn profile_solves_ode_between_breakpoints() {
        let p = Potential::new(
            BoundedPart::new(vec![-2.0, -1.0, 1.0], vec![3.0, 0.0], 1.0, 2.0).unwrap(),
            DensityPart::interval(1.5, 2.5, 1.0).unwrap(),
            vec![],
        )
        .unwrap();
        let t = solve_transfer(&p, 0.5).unwrap();
        let profile = p.profile();
        let h = 1e-4;
        for x in [-3.0, -1.5, -0.5, 0.2, 0.8, 1.2, 2.0, 3.0] {
            let d2 = (t.profile(x + h) - 2.0 * t.profile(x) + t.profile(x - h)) / (h * h);
            assert!((d2 - profile.value_at(x) * t.profile(x)).abs() < 1e-5, "x={x}");
        }
    }
}
