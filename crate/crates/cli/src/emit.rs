//! Byte-deterministic emission: CSV with stable column order, JSON arrays,
//! and two-column log-log data with the envelope polyline for plotting.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::config::OutputFormat;
use crate::suites::RecordSet;

fn f(x: f64) -> String {
    // shortest round-trip formatting; deterministic across runs
    format!("{x}")
}

impl RecordSet {
    pub fn is_empty(&self) -> bool {
        match self {
            Self::Rates(r) => r.is_empty(),
            Self::Kernel(r) => r.is_empty(),
            Self::Norms(r) => r.is_empty(),
            Self::Sharpness(r) => r.is_empty(),
            Self::Limits(r) => r.is_empty(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Self::Rates(rows) => {
                out.push_str("n,t,alpha,error,envelope,ratio,tail_budget\n");
                for r in rows {
                    let alpha = r.alpha.map(f).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        r.n,
                        f(r.t),
                        alpha,
                        f(r.error),
                        f(r.envelope),
                        f(r.ratio),
                        f(r.tail_budget)
                    );
                }
            }
            Self::Kernel(rows) => {
                out.push_str("n,t,tau,q1,q2,q_total,bound_a,bound_b,bound_main,pass\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.n,
                        f(r.t),
                        f(r.tau),
                        f(r.q1),
                        f(r.q2),
                        f(r.q_total),
                        f(r.bound_tau),
                        f(r.bound_n),
                        f(r.bound_main),
                        r.pass
                    );
                }
            }
            Self::Norms(rows) => {
                out.push_str(
                    "n,t,lambda,l_one,bound_one,l_linear,bound_linear,composite,composite_bound,delta_a1,pass\n",
                );
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.n,
                        f(r.t),
                        f(r.lambda),
                        f(r.l_one),
                        f(r.bound_one),
                        f(r.l_linear),
                        f(r.bound_linear),
                        f(r.composite),
                        f(r.composite_bound),
                        f(r.delta_a1),
                        r.pass
                    );
                }
            }
            Self::Sharpness(rows) => {
                out.push_str("function,n,t,opnorm,lower,sandwich_ratio,holds\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        r.function,
                        r.n,
                        f(r.t),
                        f(r.opnorm),
                        f(r.lower),
                        f(r.sandwich_ratio),
                        r.holds
                    );
                }
            }
            Self::Limits(rows) => {
                out.push_str("check,param,value,reference,pass\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        r.check,
                        f(r.param),
                        f(r.value),
                        f(r.reference),
                        r.pass
                    );
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let text = match self {
            Self::Rates(r) => serde_json::to_string_pretty(r)?,
            Self::Kernel(r) => serde_json::to_string_pretty(r)?,
            Self::Norms(r) => serde_json::to_string_pretty(r)?,
            Self::Sharpness(r) => serde_json::to_string_pretty(r)?,
            Self::Limits(r) => serde_json::to_string_pretty(r)?,
        };
        Ok(text + "\n")
    }

    /// Two-column `log10 n` vs `log10 error` point sections plus the
    /// envelope polyline, one block per `(alpha, t)` series.
    pub fn to_svg_data(&self) -> Result<String> {
        let rows = match self {
            Self::Rates(r) => r,
            _ => bail!("svg-data output is defined for rate sweeps only"),
        };
        let mut out = String::new();
        let mut series: Vec<(Option<f64>, f64)> = Vec::new();
        for r in rows {
            let key = (r.alpha, r.t);
            if !series.contains(&key) {
                series.push(key);
            }
        }
        for (alpha, t) in series {
            let label = alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "# points alpha={label} t={t}");
            for r in rows.iter().filter(|r| r.alpha == alpha && r.t == t) {
                if r.error > 0.0 {
                    let _ = writeln!(out, "{} {}", f(f64::from(r.n).log10()), f(r.error.log10()));
                }
            }
            let _ = writeln!(out, "# envelope alpha={label} t={t}");
            for r in rows.iter().filter(|r| r.alpha == alpha && r.t == t) {
                if r.envelope > 0.0 {
                    let _ =
                        writeln!(out, "{} {}", f(f64::from(r.n).log10()), f(r.envelope.log10()));
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Writes the records in the requested format; refuses empty record sets.
pub fn emit(records: &RecordSet, format: OutputFormat, path: &Path) -> Result<()> {
    if records.is_empty() {
        bail!("nothing to emit: record set is empty");
    }
    let payload = match format {
        OutputFormat::Csv => records.to_csv(),
        OutputFormat::Json => records.to_json()?,
        OutputFormat::SvgData => records.to_svg_data()?,
    };
    std::fs::write(path, payload).with_context(|| format!("cannot write {}", path.display()))
}
