//! Fixtures shared by the solver benchmarks.

use sobolev_core::{assemble, build_grid, Grid, Potential, QuadraticForm};

/// Potentials of increasing difficulty for the inner solvers.
pub fn potentials() -> Vec<(&'static str, Potential)> {
    let bump = Potential::step(1.0, 4.0, 0.0).expect("valid step");
    let well = Potential::well(1.0, 4.0, -1.0, 1.0).expect("valid well");
    vec![("delta", Potential::delta(1.0, -1.0)), ("step", bump), ("well", well)]
}

/// Grid and assembled form for a peak at `a` with element width `h`.
pub fn discretize(p: &Potential, a: f64, h: f64) -> (Grid, QuadraticForm) {
    let grid = build_grid(p, a, 12.0, h).expect("grid");
    let form = assemble(p, &grid).expect("assembly");
    (grid, form)
}
