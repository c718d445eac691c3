use super::{solve_pinned, InnerOptions, InnerProblem, InnerSolution, Method, SolveCertificate};
use crate::error::{Error, Result};

/// Pinned linear solve: `u(a) = 1`, zero Dirichlet ends, `(A u)_i = 0`
/// elsewhere. Applies when the result stays in `[0, 1]`; the reduced matrix
/// is then positive definite, so the solution is the global minimizer.
pub fn solve_linear(pr: &InnerProblem<'_>, opts: &InnerOptions) -> Result<InnerSolution> {
    let op = pr.form.operator();
    let u = solve_pinned(op, &pr.fixed_values())
        .map_err(|p| Error::MethodInapplicable(format!("non-positive pivot at node {}", p.0)))?;
    if let Some((i, v)) = u.iter().enumerate().find(|(_, &v)| v > 1.0 + opts.feasibility) {
        return Err(Error::MethodInapplicable(format!("unconstrained solution exceeds 1 at node {i} (u = {v})")));
    }
    if let Some((i, v)) = u.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::MethodInapplicable(format!("unconstrained solution is negative at node {i} (u = {v})")));
    }
    Ok(InnerSolution::from_vector(pr, u, opts, 1, Method::Linear, SolveCertificate::Global))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_grid};
    use crate::potential::Potential;

    fn solve(p: &Potential, a: f64, margin: f64, h: f64) -> Result<InnerSolution> {
        let g = build_grid(p, a, margin, h)?;
        let f = assemble(p, &g)?;
        solve_linear(&InnerProblem::new(&f, &g), &InnerOptions::default())
    }

    #[test]
    fn unit_constant_potential() {
        let sol = solve(&Potential::constant(1.0), 0.0, 30.0, 0.01).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-4);
        let sup = sol.nodes.iter().zip(&sol.u).map(|(x, u)| (u - (-x.abs()).exp()).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-4, "sup error {sup}");
        assert!(sol.contact_set.is_empty());
        assert!(sol.kkt_residual < 1e-12);
        assert_eq!(sol.certificate, SolveCertificate::Global);
    }

    #[test]
    fn constant_four_any_peak() {
        for a in [-2.0, 0.0, 1.7] {
            let sol = solve(&Potential::constant(4.0), a, 15.0, 0.005).unwrap();
            assert!((sol.value - 4.0).abs() < 1e-4, "a={a} F={}", sol.value);
            let sup =
                sol.nodes.iter().zip(&sol.u).map(|(x, u)| (u - (-2.0 * (x - a).abs()).exp()).abs()).fold(0.0, f64::max);
            assert!(sup < 1e-4);
        }
    }

    #[test]
    fn positive_atom_at_peak() {
        let sol = solve(&Potential::delta(1.0, 1.0), 0.0, 30.0, 0.01).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-4);
    }

    #[test]
    fn negative_atom_off_peak_is_rejected() {
        let p = Potential::delta(0.5, -1.0);
        let err = solve(&p, 0.01, 30.0, 0.01).unwrap_err();
        assert!(matches!(err, Error::MethodInapplicable(_)));
    }

    #[test]
    fn deep_well_is_rejected() {
        let p = Potential::well(1.0, 4.0, -1.0, 1.0).unwrap();
        assert!(matches!(solve(&p, 0.0, 20.0, 0.01), Err(Error::MethodInapplicable(_))));
    }
}
