//! Experiment configuration, read from TOML.
//!
//! ```toml
//! kind = "sweep"
//! dim = 2
//! eps = [0.1, 0.05, 0.025]
//! seed = 7
//!
//! [well]
//! kind = "quartic"
//!
//! [grid]
//! points_per_eps = 128
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::minimizer::MinimizerOptions;
use crate::potentials::{chain, make_reference_well, normalize_well, DoubleWell, PiecewisePolynomial, PotentialChain};
use crate::radial::GridSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Constants,
    Minimize,
    Sweep,
    Stability,
    Fuglede,
    Alexandrov,
    VerifyAll,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WellSpec {
    #[default]
    Quartic,
    /// Raw piecewise polynomial, normalized on load.
    Pieces { breaks: Vec<f64>, coeffs: Vec<Vec<f64>> },
}

impl WellSpec {
    pub fn build(&self) -> Result<DoubleWell> {
        match self {
            WellSpec::Quartic => Ok(make_reference_well()),
            WellSpec::Pieces { breaks, coeffs } => {
                let raw = DoubleWell::from_pieces(&PiecewisePolynomial { breaks: breaks.clone(), coeffs: coeffs.clone() })?;
                normalize_well(&raw)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub flow_tol: f64,
    pub max_flow_steps: usize,
    pub max_newton_steps: usize,
    pub flow_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = MinimizerOptions::default();
        SolverConfig {
            tol: o.tol,
            flow_tol: o.flow_tol,
            max_flow_steps: o.max_flow_steps,
            max_newton_steps: o.max_newton_steps,
            flow_step: o.flow_step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dim: usize,
    pub well: WellSpec,
    pub eps: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mass: Vec<f64>,
    /// Multipliers for the shooting comparison.
    pub ell: Vec<f64>,
    /// Random samples per ε for the stability experiments.
    pub samples: usize,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Constants,
            dim: 2,
            well: WellSpec::Quartic,
            eps: vec![0.1, 0.05, 0.025],
            sigma: Vec::new(),
            mass: Vec::new(),
            ell: vec![3.0, 3.5, 4.0],
            samples: 200,
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Defaults with the parameter lists `kind` needs.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let mut c = Self { kind, ..Self::default() };
        if kind == ExperimentKind::Alexandrov {
            c.sigma = vec![0.05];
        }
        c
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        let positive = |name: &str, xs: &[f64]| -> Result<()> {
            match xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(x) => Err(Error::Config(format!("{name} entries must be positive, got {x}"))),
                None => Ok(()),
            }
        };
        positive("eps", &self.eps)?;
        positive("sigma", &self.sigma)?;
        positive("mass", &self.mass)?;
        positive("ell", &self.ell)?;
        let grid_kind = matches!(self.kind, ExperimentKind::Minimize | ExperimentKind::Sweep);
        if grid_kind && self.sigma.is_empty() != self.mass.is_empty() {
            return bad("sigma and mass must be given together".into());
        }
        let g = &self.grid;
        if !(g.points_per_eps >= 2.0 && g.layer_factor > 0.0 && g.tail_factor > g.layer_factor && g.growth >= 1.0) {
            return bad(format!("inconsistent grid parameters {g:?}"));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.flow_tol > 0.0 && s.flow_step > 0.0) {
            return bad(format!("solver tolerances must be positive {s:?}"));
        }
        let needs_eps = matches!(self.kind, ExperimentKind::Minimize | ExperimentKind::Stability | ExperimentKind::Fuglede);
        if needs_eps && self.eps.is_empty() && self.sigma.is_empty() {
            return bad("no eps values given".into());
        }
        if self.kind == ExperimentKind::Sweep && self.eps.len() < 2 && self.sigma.is_empty() {
            return bad("a sweep needs at least two eps values or a (sigma, mass) grid".into());
        }
        if self.kind == ExperimentKind::Alexandrov && (self.ell.is_empty() || self.sigma.is_empty()) {
            return bad("alexandrov needs sigma and ell lists".into());
        }
        Ok(())
    }

    pub fn chain(&self) -> Result<PotentialChain> {
        chain(&self.well.build()?, self.dim)
    }

    pub fn minimizer_options(&self) -> MinimizerOptions {
        let s = &self.solver;
        MinimizerOptions {
            tol: s.tol,
            flow_tol: s.flow_tol,
            max_flow_steps: s.max_flow_steps,
            max_newton_steps: s.max_newton_steps,
            flow_step: s.flow_step,
            grid: self.grid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let cfg = ExperimentConfig::parse(
            "kind = \"sweep\"\neps = [0.1, 0.05]\nseed = 3\n[grid]\npoints_per_eps = 64.0\n[solver]\ntol = 1e-9\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Sweep);
        assert_eq!(cfg.grid.points_per_eps, 64.0);
        assert_eq!(cfg.grid.growth, GridSpec::default().growth);
        assert_eq!(cfg.minimizer_options().tol, 1e-9);
        assert_eq!(cfg.well, WellSpec::Quartic);
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn kind_defaults_validate() {
        use ExperimentKind::*;
        for k in [Constants, Minimize, Sweep, Stability, Fuglede, Alexandrov, VerifyAll] {
            ExperimentConfig::for_kind(k).validate().unwrap();
        }
    }

    #[test]
    fn user_well_is_normalized() {
        // 36t²(1−t)² scaled by 4 expanded in powers of t.
        let cfg = ExperimentConfig::parse(
            "[well]\nkind = \"pieces\"\nbreaks = [0.0, 1.0]\ncoeffs = [[0.0, 0.0, 144.0, -288.0, 144.0]]\n",
        )
        .unwrap();
        let ch = cfg.chain().unwrap();
        assert!((ch.well.w(0.5) - 36.0 / 16.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "dim = 1",
            "eps = [0.1, -0.05]",
            "kind = \"sweep\"\nsigma = [0.1]",
            "unknown = 3",
            "kind = \"alexandrov\"\nsigma = []\nmass = []",
            "[grid]\ngrowth = 0.5",
            "kind = \"nonsense\"",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
