//! Verification reports and their JSON / table renderings.

use std::fmt::Write as _;

use serde::Serialize;

use mcforge_core::numerics::{Discretization, RuleKind};
use mcforge_core::poisson::SIGN_CONVENTION;

use crate::scenario::{FixtureRef, Scenario};

/// One check at one sample point.
///
/// `pass` is `residual <= tolerance`. `residual` is `null` when the check
/// could not be evaluated, in which case `error` holds the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub point: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    /// Residual `‖lhs − rhs‖_∞`.
    pub fn compare(name: &str, point: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, tolerance: f64) -> Self {
        let residual = if lhs.len() != rhs.len() {
            f64::NAN
        } else {
            lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0_f64, |m, d| if m.is_nan() || d.is_nan() { f64::NAN } else { m.max(d) })
        };
        Self::with_residual(name, point, lhs, rhs, residual, tolerance)
    }

    pub fn with_residual(name: &str, point: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            point,
            lhs,
            rhs,
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            detail: None,
            error: None,
        }
    }

    pub fn failed(name: &str, point: Vec<f64>, tolerance: f64, reason: String) -> Self {
        Self {
            name: name.to_string(),
            point,
            lhs: vec![],
            rhs: vec![],
            residual: None,
            tolerance,
            pass: false,
            detail: None,
            error: Some(reason),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: String,
    pub quadrature: String,
    pub quad_order: usize,
    pub ode_method: String,
    pub ode_steps: usize,
    pub fd_step: f64,
    pub fd_richardson: bool,
    pub sign_convention: String,
    /// Where the Poisson solution is differentiated in the `bridge` suite.
    pub bridge_gradient_point: String,
}

impl Environment {
    pub fn new(disc: &Discretization) -> Self {
        let quadrature = match disc.rule.kind() {
            RuleKind::GaussLegendre => "gauss-legendre",
            RuleKind::CompositeSimpson => "composite-simpson",
        };
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            quadrature: quadrature.to_string(),
            quad_order: disc.rule.len(),
            ode_method: "rk4".to_string(),
            ode_steps: disc.ode.step_count,
            fd_step: disc.fd.step,
            fd_richardson: disc.fd.richardson,
            sign_convention: SIGN_CONVENTION.to_string(),
            bridge_gradient_point: "base point x".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub max_residual: f64,
    pub pass: usize,
    pub fail: usize,
}

impl Summary {
    pub fn of(checks: &[CheckRecord]) -> Self {
        let pass = checks.iter().filter(|c| c.pass).count();
        let max_residual = checks.iter().filter_map(|c| c.residual).fold(0.0_f64, f64::max);
        Self { max_residual, pass, fail: checks.len() - pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(scenario: Scenario, environment: Environment, checks: Vec<CheckRecord>) -> Self {
        let summary = Summary::of(&checks);
        Self { scenario, environment, checks, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Table => to_table(report),
    }
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn fmt_point(p: &[f64]) -> String {
    const SHOWN: usize = 4;
    let mut s = p.iter().take(SHOWN).map(|v| format!("{v:+.3}")).collect::<Vec<_>>().join(" ");
    if p.len() > SHOWN {
        s.push_str(&format!(" +{}", p.len() - SHOWN));
    }
    s
}

fn fmt_num(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn to_table(report: &Report) -> String {
    let env = &report.environment;
    let fixture = match &report.scenario.fixture {
        FixtureRef::Name(n) => n.clone(),
        FixtureRef::Inline(f) => format!("inline (dim {})", f.dim),
    };
    let mut out = String::new();
    let _ = writeln!(out, "scenario    {} / {}  seed {}  points {}", report.scenario.kind, fixture, report.scenario.sample.seed, report.scenario.sample.points);
    let _ = writeln!(
        out,
        "numerics    {}({})  {} x{}  fd {}{}",
        env.quadrature,
        env.quad_order,
        env.ode_method,
        env.ode_steps,
        fmt_num(env.fd_step),
        if env.fd_richardson { " richardson" } else { "" }
    );
    if !report.checks.is_empty() {
        let rows: Vec<[String; 5]> = report
            .checks
            .iter()
            .map(|c| {
                [
                    c.name.clone(),
                    fmt_point(&c.point),
                    c.residual.map(fmt_num).unwrap_or_else(|| "-".into()),
                    fmt_num(c.tolerance),
                    if c.pass { "ok".into() } else { "FAIL".into() },
                ]
            })
            .collect();
        let header = ["check", "point", "residual", "tolerance", "status"];
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            format!(
                "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}  {:<w4$}",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                cells[4],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3],
                w4 = widths[4],
            )
            .trim_end()
            .to_string()
        };
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", line(header));
        for (row, check) in rows.iter().zip(&report.checks) {
            let mut l = line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
            if let Some(e) = &check.error {
                l.push_str("  ");
                l.push_str(e);
            }
            let _ = writeln!(out, "{l}");
        }
    }
    let s = &report.summary;
    let _ = writeln!(out);
    let _ = writeln!(out, "summary     {} passed, {} failed, max residual {}", s.pass, s.fail, fmt_num(s.max_residual));
    out
}
