//! Sweep configuration: JSON file with per-suite defaults, strict key
//! checking and named-field validation errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use euler_rates::operator::Generator;
use euler_rates::stieltjes::{ProductStieltjes, StieltjesRep};
use euler_rates::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernel,
    Norms,
    Rates,
    Sharpness,
    Limits,
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Suite::Kernel => "kernel",
            Suite::Norms => "norms",
            Suite::Rates => "rates",
            Suite::Sharpness => "sharpness",
            Suite::Limits => "limits",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[serde(rename = "svg-data")]
    #[clap(name = "svg-data")]
    SvgData,
}

/// Either an inline generator object or a path to a JSON file holding one.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GeneratorRef {
    Inline(Generator),
    Path(String),
}

/// A Stieltjes representation or a product of two order-1 representations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionConfig {
    Product(ProductStieltjes),
    Rep(StieltjesRep),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputConfig {
    path: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigWire {
    suite: Option<Suite>,
    n_grid: Option<Vec<u32>>,
    t_grid: Option<Vec<f64>>,
    tau_grid: Option<Vec<f64>>,
    alpha_list: Option<Vec<f64>>,
    generator: Option<GeneratorRef>,
    function: Option<FunctionConfig>,
    quadrature: Option<QuadratureSpec>,
    output: Option<OutputConfig>,
    seed: Option<u64>,
}

/// Validated sweep configuration with defaults filled per suite.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub suite: Suite,
    pub n_grid: Vec<u32>,
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub generator: Option<Generator>,
    pub function: Option<FunctionConfig>,
    pub quadrature: QuadratureSpec,
    pub out_path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: u64,
}

fn default_n_grid(suite: Suite) -> Vec<u32> {
    match suite {
        Suite::Kernel => (1..=16).chain([32, 64]).collect(),
        Suite::Norms => (1..=32).collect(),
        Suite::Rates => (4..=12).map(|k| 1u32 << k).collect(),
        Suite::Sharpness => vec![1, 4, 16, 64],
        Suite::Limits => vec![1, 4],
    }
}

fn default_t_grid(suite: Suite) -> Vec<f64> {
    match suite {
        // the rates default keeps the critical scale sqrt(n)/t inside the
        // default spectral window over the whole n grid
        Suite::Rates => vec![44.0],
        Suite::Limits => vec![1.0],
        _ => vec![0.5, 1.0, 2.0],
    }
}

fn default_tau_grid() -> Vec<f64> {
    vec![0.0, 0.01, 0.1, 1.0, 10.0, 100.0]
}

fn default_alpha_list(suite: Suite) -> Vec<f64> {
    match suite {
        Suite::Limits => vec![3.0],
        _ => vec![0.5, 1.0, 1.5, 2.0],
    }
}

/// Loads, validates, and fills defaults. `suite` comes from the subcommand;
/// a `suite` key in the file must agree with it.
pub fn load_config(path: &Path, suite: Suite) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let wire: ConfigWire = serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!("{}: parse error at line {}, column {}: {e}", path.display(), e.line(), e.column())
    })?;
    build_config(wire, suite, path.parent().unwrap_or(Path::new(".")))
}

/// Parses an inline JSON document (used by tests and `--config -`).
pub fn parse_config(text: &str, suite: Suite) -> Result<SweepConfig> {
    let wire: ConfigWire = serde_json::from_str(text)
        .map_err(|e| anyhow::anyhow!("parse error at line {}, column {}: {e}", e.line(), e.column()))?;
    build_config(wire, suite, Path::new("."))
}

fn build_config(wire: ConfigWire, suite: Suite, base: &Path) -> Result<SweepConfig> {
    if let Some(s) = wire.suite {
        if s != suite {
            bail!("validation error: field `suite` is {s}, but the {suite} suite was requested");
        }
    }
    let n_grid = wire.n_grid.unwrap_or_else(|| default_n_grid(suite));
    if n_grid.is_empty() {
        bail!("validation error: field `n_grid`: grid must be nonempty");
    }
    if n_grid.iter().any(|&n| n < 1) {
        bail!("validation error: field `n_grid`: n must be >= 1");
    }
    let t_grid = wire.t_grid.unwrap_or_else(|| default_t_grid(suite));
    if t_grid.is_empty() {
        bail!("validation error: field `t_grid`: grid must be nonempty");
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        bail!("validation error: field `t_grid`: t must be > 0");
    }
    let tau_grid = wire.tau_grid.unwrap_or_else(default_tau_grid);
    if tau_grid.iter().any(|&tau| tau < 0.0) {
        bail!("validation error: field `tau_grid`: tau must be >= 0");
    }
    let alpha_list = wire.alpha_list.unwrap_or_else(|| default_alpha_list(suite));
    if alpha_list.is_empty() {
        bail!("validation error: field `alpha_list`: list must be nonempty");
    }
    let quadrature = wire.quadrature.unwrap_or_default();
    quadrature
        .validate()
        .map_err(|e| anyhow::anyhow!("validation error: field `quadrature`: {e}"))?;

    let generator = match wire.generator {
        None => None,
        Some(GeneratorRef::Inline(g)) => Some(g),
        Some(GeneratorRef::Path(p)) => {
            let full = base.join(&p);
            let text = std::fs::read_to_string(&full)
                .with_context(|| format!("cannot read generator file {}", full.display()))?;
            Some(serde_json::from_str(&text).with_context(|| {
                format!("validation error: field `generator`: bad file {}", full.display())
            })?)
        }
    };

    let (out_path, format) = match wire.output {
        Some(o) => (o.path, o.format),
        None => (None, None),
    };

    Ok(SweepConfig {
        suite,
        n_grid,
        t_grid,
        tau_grid,
        alpha_list,
        generator,
        function: wire.function,
        quadrature,
        out_path,
        format,
        seed: wire.seed.unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("{}", Suite::Rates).unwrap();
        assert_eq!(c.n_grid, vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096]);
        assert_eq!(c.t_grid, vec![44.0]);
        assert_eq!(c.quadrature.rel_tol, 1e-10);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn rejects_invalid_n() {
        let err = parse_config(r#"{"n_grid": [0]}"#, Suite::Rates).unwrap_err();
        assert!(err.to_string().contains("n must be >= 1"), "{err}");
        let err = parse_config(r#"{"n_grid": []}"#, Suite::Kernel).unwrap_err();
        assert!(err.to_string().contains("nonempty"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_config(r#"{"bogus": 1}"#, Suite::Kernel).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn rejects_suite_mismatch() {
        let err = parse_config(r#"{"suite": "kernel"}"#, Suite::Rates).unwrap_err();
        assert!(err.to_string().contains("suite"), "{err}");
    }

    #[test]
    fn accepts_inline_function_with_inf_piece() {
        let c = parse_config(
            r#"{"function": {"a": 0.0, "alpha": 2.0, "atoms": [], "pieces": [[0.0, "inf", 0.5, -0.5]]}}"#,
            Suite::Norms,
        )
        .unwrap();
        match c.function {
            Some(FunctionConfig::Rep(f)) => assert!(f.pieces()[0].hi.is_infinite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn accepts_inline_product() {
        let c = parse_config(
            r#"{"function": {"f1": {"a":0.0,"alpha":1.0,"atoms":[[0.0,1.0]],"pieces":[]},
                             "f2": {"a":0.0,"alpha":1.0,"atoms":[[1.0,1.0]],"pieces":[]}}}"#,
            Suite::Sharpness,
        )
        .unwrap();
        assert!(matches!(c.function, Some(FunctionConfig::Product(_))));
    }

    #[test]
    fn accepts_inline_generator() {
        let c = parse_config(
            r#"{"generator": {"type": "diagonal", "eigenvalues": [[0.0, 1.0], [0.0, 2.0]]}}"#,
            Suite::Rates,
        )
        .unwrap();
        assert_eq!(c.generator.unwrap().dim(), 2);
    }
}
