use std::time::Instant;

use sobolev_core::analysis::{
    best_constant, comparison_check, delta_check, invariance_check, nondecreasing_check, perturbation_check,
};
use sobolev_core::export::{write_bounds, write_profile, write_sweep, write_trapped_grid};
use sobolev_core::inner::{positivity_and_ode_check, solve_with};
use sobolev_core::outer::{minimize, minimize_well, sweep, trapped_grid, trapped_mode_criterion};
use sobolev_core::{assemble, BoundReport, InnerProblem, OuterResult, Potential, Summary};

use crate::config::RunConfig;
use crate::{core_failure, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NotConverged,
    ValidationFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::NotConverged => 2,
            Status::ValidationFailed => 3,
        }
    }
}

/// What a command produced: optional CSV bytes and a summary block.
pub struct Output {
    pub csv: Option<Vec<u8>>,
    pub summary: Summary,
    pub status: Status,
}

fn csv_with(f: impl FnOnce(&mut Vec<u8>) -> sobolev_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(core_failure)?;
    Ok(buf)
}

fn finish(mut summary: Summary, start: Instant, csv: Option<Vec<u8>>, status: Status) -> Output {
    summary.push("status", status_name(status));
    summary.push("wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    Output { csv, summary, status }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Success => "ok",
        Status::NotConverged => "not-converged",
        Status::ValidationFailed => "validation-failed",
    }
}

pub fn cmd_inner(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = Instant::now();
    let p = cfg.potential()?;
    let a = cfg.a.unwrap_or(0.0);
    let grid = cfg.resolution().grid(&p, &[a]).map_err(core_failure)?;
    let form = assemble(&p, &grid).map_err(core_failure)?;
    let pr = InnerProblem::new(&form, &grid);
    let sol = solve_with(&p, &pr, cfg.method_choice()?, &cfg.inner_options()).map_err(core_failure)?;
    let check = positivity_and_ode_check(&sol, &pr, f64::INFINITY);

    let mut s = Summary::new();
    s.push("command", "inner")
        .push("a", a)
        .push("F", sol.value)
        .push("method", sol.method)
        .push("certificate", sol.certificate)
        .push("kkt_residual", sol.kkt_residual)
        .push("iterations", sol.iterations)
        .push("contact_nodes", sol.contact_set.len())
        .push("nodes", grid.len())
        .push("h", grid.max_width())
        .push("left", grid.left())
        .push("right", grid.right());
    if check.applicable {
        s.push("min_u_near_support", check.min_value).push("ode_residual", check.max_ode_residual);
    }
    let csv = csv_with(|b| write_profile(b, &sol.nodes, &sol.u))?;
    let status = if sol.converged() { Status::Success } else { Status::NotConverged };
    Ok(finish(s, start, Some(csv), status))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = Instant::now();
    let p = cfg.potential()?;
    let (Some([lo, hi]), Some(step)) = (cfg.window, cfg.step) else {
        return Err(Failure::Config("sweep needs window and step".into()));
    };
    let result = sweep(&p, (lo, hi), step, &cfg.outer_options()?).map_err(core_failure)?;
    let mut s = Summary::new();
    s.push("command", "sweep").push("points", result.len()).push("flagged", result.flagged());
    if let Some(i) = result.best() {
        s.push("min_F", result.f_values[i]).push("min_a", result.a_values[i]);
    }
    s.push("nodes", result.nodes).push("h", result.h);
    let csv = csv_with(|b| write_sweep(b, &result))?;
    let status = if result.flagged() == 0 { Status::Success } else { Status::NotConverged };
    Ok(finish(s, start, Some(csv), status))
}

fn describe_minimum(s: &mut Summary, r: &OuterResult) {
    s.push("m_estimate", r.m_estimate)
        .push("argmin", r.argmin)
        .push("attained", r.attained)
        .push("escape", r.escape().map_or("none".to_string(), |e| e.to_string()))
        .push("refinement", r.refinement)
        .push("refinement_width", r.refinement_width)
        .push("certificate", r.certificate)
        .push("near_minima", r.near_minima.len());
    if let (Some(first), Some(last)) = (r.near_minima.first(), r.near_minima.last()) {
        s.push("near_minima_range", format!("[{first}, {last}]"));
    }
    s.push("window", format!("[{}, {}]", r.window.0, r.window.1))
        .push("samples", r.sweep.len())
        .push("flagged", r.sweep.flagged())
        .push("nodes", r.sweep.nodes)
        .push("h", r.sweep.h);
    match best_constant(r.m_estimate) {
        Ok(c) => s.push("best_constant", c),
        Err(_) => s.push("best_constant", "none").push("notice", "no-inequality: m <= 0, no finite constant exists"),
    };
}

fn minimize_output(cfg: &RunConfig, r: &OuterResult) -> Result<(Option<Vec<u8>>, Status), Failure> {
    let csv = match cfg.out {
        Some(_) => Some(csv_with(|b| write_sweep(b, &r.sweep))?),
        None => None,
    };
    let status = if r.sweep.flagged() == 0 { Status::Success } else { Status::NotConverged };
    Ok((csv, status))
}

pub fn cmd_minimize(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = Instant::now();
    let p = cfg.potential()?;
    let r = minimize(&p, &cfg.outer_options()?).map_err(core_failure)?;
    let mut s = Summary::new();
    s.push("command", "minimize");
    describe_minimum(&mut s, &r);
    let (csv, status) = minimize_output(cfg, &r)?;
    Ok(finish(s, start, csv, status))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = Instant::now();
    let tol = cfg.validation_tol();
    let opts = cfg.outer_options()?;
    let m_of = |p: &Potential| minimize(p, &opts).map(|r| r.m_estimate).map_err(core_failure);
    let needs_base = !cfg.perturbation.is_empty() || cfg.nondecreasing;
    let base = if needs_base { Some(cfg.potential()?) } else { None };
    let m_base = base.as_ref().map(&m_of).transpose()?;

    let mut reports: Vec<BoundReport> = Vec::new();
    if let (Some(p), Some(mb)) = (&base, m_base) {
        for pert in &cfg.perturbation {
            let mu = pert.measure()?;
            let mp = match pert.m {
                Some(m) => m,
                None => m_of(&p.perturbed(&mu))?,
            };
            reports.push(perturbation_check(mb, &mu, mp, tol));
            if mu.is_nonnegative() {
                reports.push(invariance_check(p, &mu, mb, mp, tol));
            }
        }
        if cfg.nondecreasing {
            reports.push(nondecreasing_check(p, mb, tol));
        }
    }
    for c in &cfg.comparison {
        let m1 = match c.m_upper {
            Some(m) => m,
            None => m_of(&c.upper)?,
        };
        let m2 = match c.m_lower {
            Some(m) => m,
            None => m_of(&c.lower)?,
        };
        reports.push(comparison_check(&c.upper, &c.lower, m1, m2, tol));
    }
    for d in &cfg.delta {
        let m = match d.m {
            Some(m) => m,
            None => m_of(&Potential::delta(d.alpha, d.beta))?,
        };
        reports.push(delta_check(d.alpha, d.beta, m, tol).map_err(core_failure)?);
    }
    if reports.is_empty() {
        return Err(Failure::Config("nothing to verify: add [[perturbation]], [[comparison]] or [[delta]]".into()));
    }

    let failed = reports.iter().filter(|r| r.applicable && !r.pass).count();
    let skipped = reports.iter().filter(|r| !r.applicable).count();
    let mut s = Summary::new();
    s.push("command", "verify");
    if let Some(mb) = m_base {
        s.push("m_base", mb);
    }
    s.push("reports", reports.len())
        .push("passed", reports.len() - failed - skipped)
        .push("failed", failed)
        .push("not_applicable", skipped)
        .push("tolerance", tol);
    let csv = csv_with(|b| write_bounds(b, &reports))?;
    let status = if failed == 0 { Status::Success } else { Status::ValidationFailed };
    Ok(finish(s, start, Some(csv), status))
}

pub fn cmd_trapped(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = Instant::now();
    let opts = cfg.outer_options()?;
    let mut s = Summary::new();
    s.push("command", "trapped");
    if let Some(g) = &cfg.trapped_grid {
        let rows = trapped_grid(g.alpha, &g.betas, &g.widths, &opts).map_err(core_failure)?;
        s.push("mode", "grid")
            .push("cells", rows.len())
            .push("criterion_true", rows.iter().filter(|r| r.criterion).count())
            .push("interior", rows.iter().filter(|r| r.attained.is_interior()).count());
        let csv = csv_with(|b| write_trapped_grid(b, &rows))?;
        return Ok(finish(s, start, Some(csv), Status::Success));
    }
    let Some(well) = &cfg.well else {
        return Err(Failure::Config("trapped needs a [well] or [trapped_grid] table".into()));
    };
    let criterion = trapped_mode_criterion(well).map_err(core_failure)?;
    let (_, r) = minimize_well(well, &opts).map_err(core_failure)?;
    s.push("mode", "single")
        .push("alpha", well.alpha)
        .push("beta", well.beta)
        .push("b", well.b)
        .push("c", well.c)
        .push("sqrt_beta_width", well.beta.sqrt() * well.width())
        .push("criterion", criterion)
        .push("claim", if criterion { "minimum attained in [b, c]" } else { "none" })
        .push("argmin_in_well", well.b <= r.argmin && r.argmin <= well.c);
    describe_minimum(&mut s, &r);
    let (csv, status) = minimize_output(cfg, &r)?;
    Ok(finish(s, start, csv, status))
}
