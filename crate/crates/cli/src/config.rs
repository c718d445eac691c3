use std::path::{Path, PathBuf};

use serde::Deserialize;
use sobolev_core::potential::{Atom, DensityPart, Measure};
use sobolev_core::{InnerOptions, MethodChoice, OuterOptions, Potential, Resolution, WellParams};

use crate::Failure;

/// Run configuration. Scalars may be overridden from the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<Potential>,
    pub well: Option<WellParams>,
    /// Peak location for `inner`.
    pub a: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub step: Option<f64>,
    pub h_target: Option<f64>,
    pub margin: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub method: Option<String>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub validation_tol: Option<f64>,
    #[serde(default)]
    pub nondecreasing: bool,
    pub trapped_grid: Option<TrappedGridConfig>,
    #[serde(default)]
    pub perturbation: Vec<PerturbationConfig>,
    #[serde(default)]
    pub comparison: Vec<ComparisonConfig>,
    #[serde(default)]
    pub delta: Vec<DeltaConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrappedGridConfig {
    #[serde(default = "one")]
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub widths: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// `m(V + μ)` against `m(V)` for the configured base potential. `m` replaces
/// the computed perturbed value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    pub density: Option<DensityTable>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityTable {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PerturbationConfig {
    pub fn measure(&self) -> Result<Measure, Failure> {
        let density = match &self.density {
            Some(d) => DensityPart::new(d.breakpoints.clone(), d.values.clone()),
            None => Ok(DensityPart::zero()),
        };
        density.and_then(|d| Measure::new(d, self.atoms.clone())).map_err(|e| Failure::Config(e.to_string()))
    }
}

/// `upper ≥ lower` pointwise; `m_upper` and `m_lower` replace computed values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub upper: Potential,
    pub lower: Potential,
    pub m_upper: Option<f64>,
    pub m_lower: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaConfig {
    pub alpha: f64,
    pub beta: f64,
    pub m: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub h: Option<f64>,
    pub margin: Option<f64>,
    pub tol: Option<f64>,
    pub method: Option<String>,
    pub jobs: Option<usize>,
}

fn positive(name: &str, v: Option<f64>) -> Result<(), Failure> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Failure::Config(format!("{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: Overrides) -> Result<Self, Failure> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        cfg.h_target = overrides.h.or(cfg.h_target);
        cfg.margin = overrides.margin.or(cfg.margin);
        cfg.tol = overrides.tol.or(cfg.tol);
        cfg.method = overrides.method.or(cfg.method);
        cfg.jobs = overrides.jobs.or(cfg.jobs);
        cfg.out = overrides.out.or(cfg.out);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        positive("h_target", self.h_target)?;
        positive("margin", self.margin)?;
        positive("tol", self.tol)?;
        positive("step", self.step)?;
        positive("validation_tol", self.validation_tol)?;
        if self.jobs == Some(0) {
            return Err(Failure::Config("jobs must be at least 1".into()));
        }
        if self.max_iter == Some(0) {
            return Err(Failure::Config("max_iter must be at least 1".into()));
        }
        if let Some([lo, hi]) = self.window {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Failure::Config(format!("window [{lo}, {hi}] is empty or not finite")));
            }
        }
        if let Some(a) = self.a {
            if !a.is_finite() {
                return Err(Failure::Config("a must be finite".into()));
            }
        }
        if let Some(w) = &self.well {
            w.validate().map_err(|e| Failure::Config(e.to_string()))?;
        }
        for p in &self.perturbation {
            p.measure()?;
        }
        if let Some(g) = &self.trapped_grid {
            if g.betas.is_empty() || g.widths.is_empty() {
                return Err(Failure::Config("trapped_grid needs at least one beta and one width".into()));
            }
        }
        self.method_choice()?;
        Ok(())
    }

    pub fn method_choice(&self) -> Result<MethodChoice, Failure> {
        match &self.method {
            None => Ok(MethodChoice::Auto),
            Some(m) => m.parse().map_err(|e: sobolev_core::Error| Failure::Config(e.to_string())),
        }
    }

    /// The `[potential]` table, or the `[well]` potential when only that is
    /// given.
    pub fn potential(&self) -> Result<Potential, Failure> {
        match (&self.potential, &self.well) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(w)) => w.potential().map_err(|e| Failure::Config(e.to_string())),
            (None, None) => Err(Failure::Config("no [potential] or [well] table".into())),
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution { margin: self.margin, h_target: self.h_target }
    }

    pub fn inner_options(&self) -> InnerOptions {
        let d = InnerOptions::default();
        InnerOptions { tol: self.tol.unwrap_or(d.tol), max_iter: self.max_iter.unwrap_or(d.max_iter), ..d }
    }

    pub fn outer_options(&self) -> Result<OuterOptions, Failure> {
        Ok(OuterOptions {
            window: self.window.map(|[lo, hi]| (lo, hi)),
            step: self.step,
            resolution: self.resolution(),
            method: self.method_choice()?,
            inner: self.inner_options(),
            ..OuterOptions::default()
        })
    }

    pub fn validation_tol(&self) -> f64 {
        self.validation_tol.unwrap_or(sobolev_core::analysis::DEFAULT_TOLERANCE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_potential_and_overrides() {
        let text = r#"
            a = 0.5
            h_target = 0.01
            [potential]
            atoms = [[0.0, -1.0]]
            [potential.bounded]
            left_tail = 1.0
            right_tail = 1.0
        "#;
        let cfg = RunConfig::parse(text, Overrides { h: Some(0.02), ..Default::default() }).unwrap();
        assert_eq!(cfg.h_target, Some(0.02));
        assert_eq!(cfg.potential().unwrap(), Potential::delta(1.0, -1.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(matches!(RunConfig::parse("bogus = 1", Overrides::default()), Err(Failure::Config(_))));
        assert!(matches!(RunConfig::parse("h_target = -1.0", Overrides::default()), Err(Failure::Config(_))));
        assert!(matches!(RunConfig::parse("method = \"fast\"", Overrides::default()), Err(Failure::Config(_))));
        assert!(matches!(RunConfig::parse("window = [1.0, 0.0]", Overrides::default()), Err(Failure::Config(_))));
        let o = Overrides { jobs: Some(0), ..Default::default() };
        assert!(matches!(RunConfig::parse("", o), Err(Failure::Config(_))));
    }

    #[test]
    fn well_stands_in_for_potential() {
        let cfg = RunConfig::parse("[well]\nalpha = 1.0\nbeta = 4.0\nb = -1.0\nc = 1.0", Overrides::default()).unwrap();
        assert_eq!(cfg.potential().unwrap(), Potential::well(1.0, 4.0, -1.0, 1.0).unwrap());
    }

    #[test]
    fn verify_tables() {
        let text = r#"
            [potential.bounded]
            left_tail = 1.0
            right_tail = 1.0
            [[perturbation]]
            atoms = [[0.0, 1.0]]
            [[perturbation]]
            m = 0.5
            [perturbation.density]
            breakpoints = [0.0, 1.0]
            values = [0.5]
            [[delta]]
            alpha = 1.0
            beta = -1.0
        "#;
        let cfg = RunConfig::parse(text, Overrides::default()).unwrap();
        assert_eq!(cfg.perturbation.len(), 2);
        assert_eq!(cfg.perturbation[1].m, Some(0.5));
        assert_eq!(cfg.perturbation[1].measure().unwrap().total_variation().plus, 0.5);
        assert_eq!(cfg.delta.len(), 1);
    }
}
