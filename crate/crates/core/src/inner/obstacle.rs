use super::{
    free_blocks_spd, kkt_residual, solve_pinned, InnerOptions, InnerProblem, InnerSolution, Method, NonPositivePivot,
    SolveCertificate,
};
use crate::discretization::Tridiagonal;
use crate::error::{Error, Result};

/// Warm start decay rate when the potential has no positive lower bound.
const WARM_START_FLOOR: f64 = 0.1;
const ARMIJO: f64 = 1e-4;

/// Minimize the discrete energy over `−1 ≤ u ≤ 1`, `u(a) = 1`, zero ends,
/// from the clipped exponential warm start `exp(−√v₀ |x − a|)`.
pub fn solve_obstacle(pr: &InnerProblem<'_>, opts: &InnerOptions) -> Result<InnerSolution> {
    let v0 = pr.form.element_potential().iter().copied().fold(f64::INFINITY, f64::min);
    let rate = if v0 > 0.0 { v0.sqrt() } else { WARM_START_FLOOR.sqrt() };
    let a = pr.peak();
    let warm: Vec<f64> = pr.grid.nodes().iter().map(|x| (-rate * (x - a).abs()).exp()).collect();
    solve_obstacle_warm(pr, opts, &warm)
}

/// Obstacle solve from a caller-provided starting vector.
///
/// Projected SOR sweeps alternate with an active-set polish: the bound
/// nodes of the current iterate are frozen, the remaining tridiagonal
/// system is solved exactly, and the active set is updated from the sign of
/// the multipliers until it settles. A polished point replaces the iterate
/// only when it is feasible and does not increase the energy, so the energy
/// decreases monotonically. When some diagonal entry is not positive the
/// relaxation is replaced by projected gradient steps with Armijo
/// backtracking. After a failed polish the next attempts are spaced out
/// geometrically.
pub fn solve_obstacle_warm(pr: &InnerProblem<'_>, opts: &InnerOptions, warm: &[f64]) -> Result<InnerSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let n = pr.grid.len();
    if warm.len() != n {
        return Err(Error::InvalidInput(format!("warm start has {} entries, grid has {n}", warm.len())));
    }
    let op = pr.form.operator();
    let peak = pr.peak_index;
    let mut u: Vec<f64> = warm.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    u[peak] = 1.0;

    let fixed = pr.fixed_values();
    let convex = free_blocks_spd(op, &fixed);
    let relaxable = (1..n - 1).filter(|&i| i != peak).all(|i| op.diag[i] > 0.0);

    let mut energy = pr.form.energy_unchecked(&u);
    let mut iterations = 0;
    let mut step = 1.0 / (1..n - 1).map(|i| op.row_abs_sum(i)).fold(0.0, f64::max);
    let mut skip = 0;
    let mut backoff = 1;
    let converged = loop {
        if skip == 0 {
            match polish(op, &u, &fixed, opts.feasibility) {
                Some(v) if pr.form.energy_unchecked(&v) <= energy + 1e-12 * energy.abs().max(1.0) => {
                    energy = pr.form.energy_unchecked(&v);
                    u = v;
                }
                _ => {
                    skip = backoff;
                    backoff *= 2;
                }
            }
        } else {
            skip -= 1;
        }
        if kkt_residual(op, &u, peak, opts.feasibility) <= opts.tol {
            break true;
        }
        if iterations >= opts.max_iter {
            break false;
        }
        let sweeps = opts.sweeps_per_round.max(1).min(opts.max_iter - iterations);
        for _ in 0..sweeps {
            if relaxable {
                psor_sweep(op, &mut u, peak, opts.omega);
            } else {
                step = projected_gradient_step(pr, &mut u, &mut energy, step);
            }
        }
        iterations += sweeps;
        energy = pr.form.energy_unchecked(&u);
    };

    let certificate = match (converged, convex) {
        (false, _) => SolveCertificate::NotConverged,
        (true, true) => SolveCertificate::Global,
        (true, false) => SolveCertificate::KktPoint,
    };
    Ok(InnerSolution::from_vector(pr, u, opts, iterations, Method::Obstacle, certificate))
}

fn psor_sweep(op: &Tridiagonal, u: &mut [f64], peak: usize, omega: f64) {
    let n = u.len();
    for i in 1..n - 1 {
        if i == peak {
            continue;
        }
        let g = op.row_dot(i, u);
        u[i] = (u[i] - omega * g / op.diag[i]).clamp(-1.0, 1.0);
    }
}

/// One projected gradient step on `uᵀAu` with backtracking; returns the
/// step length to try next.
fn projected_gradient_step(pr: &InnerProblem<'_>, u: &mut [f64], energy: &mut f64, step: f64) -> f64 {
    let op = pr.form.operator();
    let n = u.len();
    let grad = op.apply(u);
    let mut t = 2.0 * step;
    for _ in 0..60 {
        let mut v = u.to_vec();
        for i in 1..n - 1 {
            if i != pr.peak_index {
                v[i] = (u[i] - t * grad[i]).clamp(-1.0, 1.0);
            }
        }
        let dist2: f64 = v.iter().zip(u.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let ev = pr.form.energy_unchecked(&v);
        if dist2 == 0.0 {
            return t;
        }
        if ev <= *energy - ARMIJO * dist2 / t {
            u.copy_from_slice(&v);
            *energy = ev;
            return t;
        }
        t *= 0.5;
    }
    t
}

/// Primal-dual active-set iteration started from the bound nodes of `u`.
/// Returns the fixed point when it is reached and feasible.
fn polish(op: &Tridiagonal, u: &[f64], base: &[Option<f64>], feasibility: f64) -> Option<Vec<f64>> {
    let n = u.len();
    let mut fixed = base.to_vec();
    for i in 0..n {
        if fixed[i].is_none() {
            if u[i] >= 1.0 - feasibility {
                fixed[i] = Some(1.0);
            } else if u[i] <= -1.0 + feasibility {
                fixed[i] = Some(-1.0);
            }
        }
    }
    let mut pins = 0;
    let mut rounds = 0;
    // one round moves each free boundary by about one node
    while rounds < n {
        let v = match solve_pinned(op, &fixed) {
            Ok(v) => v,
            // an indefinite free block: pin the offending node at its bound
            Err(NonPositivePivot(k)) if fixed[k].is_none() && pins < n => {
                fixed[k] = Some(if u[k] < 0.0 { -1.0 } else { 1.0 });
                pins += 1;
                continue;
            }
            Err(_) => return None,
        };
        rounds += 1;
        let mut changed = false;
        for i in 0..n {
            if base[i].is_some() {
                continue;
            }
            match fixed[i] {
                None if v[i] > 1.0 + feasibility => {
                    fixed[i] = Some(1.0);
                    changed = true;
                }
                None if v[i] < -1.0 - feasibility => {
                    fixed[i] = Some(-1.0);
                    changed = true;
                }
                Some(b) => {
                    // release when the multiplier has the wrong sign
                    if b * op.row_dot(i, &v) > 0.0 {
                        fixed[i] = None;
                        changed = true;
                    }
                }
                None => {}
            }
        }
        if !changed {
            return v.iter().all(|x| x.abs() <= 1.0 + feasibility).then_some(v);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_grid, Grid, QuadraticForm};
    use crate::inner::solve_linear;
    use crate::potential::Potential;

    fn setup(p: &Potential, a: f64, margin: f64, h: f64) -> (Grid, QuadraticForm) {
        let g = build_grid(p, a, margin, h).unwrap();
        let f = assemble(p, &g).unwrap();
        (g, f)
    }

    #[test]
    fn agrees_with_linear_when_no_contact() {
        let opts = InnerOptions::default();
        for p in
            [Potential::constant(1.0), Potential::step(1.0, 4.0, 0.3).unwrap(), Potential::delta(2.0, 1.5).shift(-0.4)]
        {
            let (g, f) = setup(&p, 0.0, 20.0, 0.01);
            let pr = InnerProblem::new(&f, &g);
            let lin = solve_linear(&pr, &opts).unwrap();
            let obs = solve_obstacle(&pr, &opts).unwrap();
            assert!(obs.converged());
            assert!((lin.value - obs.value).abs() <= 10.0 * opts.tol);
            let du = lin.u.iter().zip(&obs.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(du < 10.0 * opts.tol, "max |du| = {du}");
        }
    }

    #[test]
    fn well_has_symmetric_contact_interval() {
        let p = Potential::well(1.0, 4.0, -1.0, 1.0).unwrap();
        let (g, f) = setup(&p, 0.0, 20.0, 0.01);
        let pr = InnerProblem::new(&f, &g);
        let sol = solve_obstacle(&pr, &InnerOptions::default()).unwrap();
        assert!(sol.converged());
        assert!(sol.kkt_residual <= 1e-8);
        assert!(!sol.contact_set.is_empty());
        // contact nodes form one interval containing the peak, symmetric about 0
        let xs: Vec<f64> = sol.contact_set.iter().map(|&i| g.nodes()[i]).collect();
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        assert!((lo + hi).abs() < 0.02, "contact [{lo}, {hi}]");
        let count = sol.contact_set.len();
        assert_eq!(sol.contact_set[count - 1] - sol.contact_set[0], count);
        // free boundary from u = cos(2(x - s)) matched to e^{-(x-1)}: tan(2(1 - s)) = 1/2
        let s = 1.0 - 0.5_f64.atan() / 2.0;
        assert!((hi - s).abs() < 0.02, "contact edge {hi} vs {s}");
        assert!(sol.u.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn warm_start_at_solution_needs_no_sweeps() {
        let p = Potential::constant(1.0);
        let (g, f) = setup(&p, 0.0, 30.0, 0.01);
        let pr = InnerProblem::new(&f, &g);
        let opts = InnerOptions::default();
        let exact = solve_linear(&pr, &opts).unwrap();
        let sol = solve_obstacle_warm(&pr, &opts, &exact.u).unwrap();
        assert!(sol.iterations <= 2);
        assert!((sol.value - 2.0).abs() < 1e-4);
    }

    #[test]
    fn coarse_deep_well_uses_projected_gradient() {
        // h = 1 with V = -4 makes the diagonal 2 - 8/3 < 0
        let p = Potential::well(1.0, 4.0, -3.0, 3.0).unwrap();
        let (g, f) = setup(&p, 0.0, 6.0, 1.0);
        assert!(f.operator().diag.iter().any(|&d| d <= 0.0));
        let pr = InnerProblem::new(&f, &g);
        let opts = InnerOptions { max_iter: 20_000, ..Default::default() };
        let sol = solve_obstacle(&pr, &opts).unwrap();
        assert!(sol.converged(), "kkt {}", sol.kkt_residual);
        assert_eq!(sol.certificate, SolveCertificate::KktPoint);
        assert!(sol.u.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn budget_exhaustion_gives_upper_bound() {
        let p = Potential::well(1.0, 4.0, -1.0, 1.0).unwrap();
        let (g, f) = setup(&p, 0.0, 20.0, 0.01);
        let pr = InnerProblem::new(&f, &g);
        let tight = solve_obstacle(&pr, &InnerOptions::default()).unwrap();
        let warm: Vec<f64> = g.nodes().iter().map(|x| (-x.abs()).exp()).collect();
        let loose = solve_obstacle_warm(&pr, &InnerOptions { max_iter: 0, ..Default::default() }, &warm).unwrap();
        if !loose.converged() {
            assert_eq!(loose.certificate, SolveCertificate::NotConverged);
        }
        assert!(loose.value >= tight.value - 1e-12);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let p = Potential::constant(1.0);
        let (g, f) = setup(&p, 0.0, 5.0, 0.1);
        let pr = InnerProblem::new(&f, &g);
        let opts = InnerOptions { tol: 0.0, ..Default::default() };
        assert!(matches!(solve_obstacle(&pr, &opts), Err(Error::InvalidInput(_))));
    }
}
