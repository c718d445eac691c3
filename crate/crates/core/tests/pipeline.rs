use sobolev_core::analysis::{
    comparison_check, delta_closed_form, invariance_check, nondecreasing_check, perturbation_check,
};
use sobolev_core::export::{write_bounds, write_sweep};
use sobolev_core::outer::{minimize, sweep};
use sobolev_core::potential::{DensityPart, Measure};
use sobolev_core::{MethodChoice, OuterOptions, PointStatus, Potential, SolveCertificate};

fn m(p: &Potential) -> f64 {
    minimize(p, &OuterOptions::default()).unwrap().m_estimate
}

#[test]
fn sweep_values_bound_m_from_above() {
    let p = Potential::delta(1.0, -1.0);
    let s = sweep(&p, (-3.0, 3.0), 0.25, &OuterOptions::default()).unwrap();
    let exact = delta_closed_form(1.0, -1.0).unwrap();
    assert!(s.f_values.iter().all(|&f| f >= exact - 1e-12));
    assert_eq!(s.a_values[s.best().unwrap()], 0.0);
}

#[test]
fn transfer_sweep_matches_grid_sweep() {
    let p = Potential::step(1.0, 4.0, 0.0).unwrap();
    let grid = sweep(&p, (-2.0, 2.0), 0.5, &OuterOptions::default()).unwrap();
    let opts = OuterOptions { method: MethodChoice::Transfer, ..Default::default() };
    let exact = sweep(&p, (-2.0, 2.0), 0.5, &opts).unwrap();
    for (g, e) in grid.f_values.iter().zip(&exact.f_values) {
        assert!(g >= e && g - e < 1e-4);
    }
    assert!(exact.status.iter().all(|s| *s == PointStatus::Solved(SolveCertificate::Exact)));
}

#[test]
fn validators_on_computed_values() {
    let (c1, c4) = (Potential::constant(1.0), Potential::constant(4.0));
    let (m1, m4) = (m(&c1), m(&c4));
    let mut reports = vec![comparison_check(&c4, &c1, m4, m1, 1e-3)];

    let minus = Measure::atom(0.0, -1.0);
    let m_minus = m(&c1.perturbed(&minus));
    let r = perturbation_check(m1, &minus, m_minus, 1e-3);
    assert!((r.computed - r.lower).abs() < 1e-3, "lower end is attained");
    reports.push(r);

    let bump = Measure::from_density(DensityPart::interval(0.0, 1.0, 0.5).unwrap());
    reports.push(perturbation_check(m1, &bump, m(&c1.perturbed(&bump)), 1e-3));
    reports.push(invariance_check(&c1, &bump, m1, m(&c1.perturbed(&bump)), 1e-3));

    let step = Potential::step(1.0, 4.0, 0.0).unwrap();
    reports.push(nondecreasing_check(&step, m(&step), 1e-3));

    assert!(reports.iter().all(|r| r.applicable && r.pass), "{reports:?}");

    let mut csv = Vec::new();
    write_bounds(&mut csv, &reports).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("theorem,lower,computed,upper,pass,slack\ncomparison,"));
    assert_eq!(text.lines().count(), reports.len() + 1);
}

#[test]
fn monotone_chain_of_constants() {
    let ms: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&a| m(&Potential::constant(a))).collect();
    assert!(ms.windows(2).all(|w| w[0] < w[1]));
    for (m, a) in ms.iter().zip([0.5_f64, 1.0, 2.0]) {
        assert!((m - 2.0 * a.sqrt()).abs() < 1e-3);
    }
}

#[test]
fn sweep_csv_is_reproducible() {
    let p = Potential::well(1.0, 2.0, -0.5, 0.5).unwrap();
    let render = || {
        let s = sweep(&p, (-2.0, 2.0), 0.25, &OuterOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_sweep(&mut buf, &s).unwrap();
        buf
    };
    let first = render();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let second = pool.install(render);
    assert_eq!(first, second);
}

#[test]
fn deep_well_has_no_inequality() {
    let p = Potential::well(1.0, 9.0, -1.0, 1.0).unwrap();
    let r = minimize(&p, &OuterOptions::default()).unwrap();
    assert!(r.m_estimate < 0.0);
    assert!(sobolev_core::analysis::best_constant(r.m_estimate).is_err());
}
