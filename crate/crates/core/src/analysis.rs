//! Norms, final-time errors and convergence tables.

use std::fmt::Write as _;

use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::fespace::{DensityField, FeSpace, Tabulation};
use crate::solver::RunReport;

fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::Domain(format!("L^q norm needs q ≥ 1 (got {q})")));
    }
    Ok(())
}

/// Calls `visit(x, uh, ∇uh)` at every quadrature point of `tab`, with weight `w`.
fn for_each_point(field: &DensityField, tab: &Tabulation, mut visit: impl FnMut(f64, [f64; 2], f64, [f64; 2])) {
    let space = field.space();
    for t in 0..space.element_count() {
        let geo = space.geometry(t);
        for q in 0..tab.rule.len() {
            let x = geo.map(tab.rule.reference_point(q));
            let (v, g) = field.combine(t, &tab.values[q], &tab.gradients[q]);
            visit(tab.rule.weights[q] * geo.det, x, v, g);
        }
    }
}

fn power_mean(field: &DensityField, tab: &Tabulation, q: f64, pointwise: impl Fn([f64; 2], f64, [f64; 2]) -> f64) -> f64 {
    if q.is_infinite() {
        let mut max = 0.0f64;
        for_each_point(field, tab, |_, x, v, g| max = max.max(pointwise(x, v, g).abs()));
        return max;
    }
    let mut sum = 0.0;
    for_each_point(field, tab, |w, x, v, g| sum += w * pointwise(x, v, g).abs().powf(q));
    sum.powf(1.0 / q)
}

fn tabulation_for(space: &FeSpace, degree: Option<usize>) -> Result<Tabulation> {
    match degree {
        Some(d) => space.tabulate(d),
        None => Ok(space.tabulation().clone()),
    }
}

/// Largest `|exact - uh|` over the dof nodes, where the field equals its coefficients.
fn nodal_max(field: &DensityField, exact: &impl Fn([f64; 2]) -> f64) -> f64 {
    field
        .space()
        .dof_coords()
        .iter()
        .zip(field.coeffs())
        .map(|(&x, &c)| (exact(x) - c).abs())
        .fold(0.0, f64::max)
}

/// `‖uh - exact‖_{L^q}` using quadrature of the given degree (default `2r+2`).
/// For `q = ∞` the maximum is taken over the dof nodes and the quadrature points.
pub fn lq_error_with_degree(
    field: &DensityField,
    exact: impl Fn([f64; 2]) -> f64,
    q: f64,
    degree: Option<usize>,
) -> Result<f64> {
    check_exponent(q)?;
    let tab = tabulation_for(field.space(), degree)?;
    let value = power_mean(field, &tab, q, |x, v, _| v - exact(x));
    if q.is_infinite() {
        return Ok(value.max(nodal_max(field, &exact)));
    }
    Ok(value)
}

pub fn lq_error(field: &DensityField, exact: impl Fn([f64; 2]) -> f64, q: f64) -> Result<f64> {
    lq_error_with_degree(field, exact, q, None)
}

/// `‖uh‖_{L^q}`, with `q ≥ 1` or `q = ∞`.
pub fn lq_norm(field: &DensityField, q: f64) -> Result<f64> {
    lq_error(field, |_| 0.0, q)
}

/// `‖∇uh - grad_exact‖_{L^β}` by quadrature of the given degree.
pub fn grad_lbeta_error_with_degree(
    field: &DensityField,
    grad_exact: impl Fn([f64; 2]) -> [f64; 2],
    beta: f64,
    degree: Option<usize>,
) -> Result<f64> {
    check_exponent(beta)?;
    let tab = tabulation_for(field.space(), degree)?;
    Ok(power_mean(field, &tab, beta, |x, _, g| {
        let e = grad_exact(x);
        (g[0] - e[0]).hypot(g[1] - e[1])
    }))
}

pub fn grad_lbeta_error(field: &DensityField, grad_exact: impl Fn([f64; 2]) -> [f64; 2], beta: f64) -> Result<f64> {
    grad_lbeta_error_with_degree(field, grad_exact, beta, None)
}

/// `‖∇uh‖_{L^β}`.
pub fn grad_lbeta_norm(field: &DensityField, beta: f64) -> Result<f64> {
    grad_lbeta_error(field, |_| [0.0, 0.0], beta)
}

/// `‖w‖_{L^q}` of a plain function over the mesh of `space`.
pub fn lq_norm_of_function(space: &std::sync::Arc<FeSpace>, w: impl Fn([f64; 2]) -> f64, q: f64) -> Result<f64> {
    lq_error(&DensityField::constant(space.clone(), 0.0), |x| -w(x), q)
}

/// Final-time errors of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub l2_error: f64,
    pub grad_lbeta_error: f64,
    /// `(q, ‖ρ - ρh‖_{L^q})` for each extra monitored exponent.
    pub lq_errors: Vec<(f64, f64)>,
    pub linf_error: Option<f64>,
}

/// Errors of the final field of `run` against the exact solution of `case` at the final time.
pub fn error_at_final_time(run: &RunReport, case: &ManufacturedCase) -> Result<ErrorRecord> {
    let exact = case
        .exact
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("case '{}' has no exact solution", case.name)))?;
    let t = run.t_final;
    let field = &run.final_field;
    let value = |x| (exact.value)(x, t);
    let lq_errors = run
        .monitor_q
        .iter()
        .filter(|q| q.is_finite())
        .map(|&q| Ok((q, lq_error(field, value, q)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorRecord {
        n: field.space().mesh().n(),
        h: field.space().mesh().h(),
        dt: run.dt,
        l2_error: lq_error(field, value, 2.0)?,
        grad_lbeta_error: grad_lbeta_error(field, |x| (exact.gradient)(x, t), run.beta)?,
        lq_errors,
        linf_error: Some(lq_error(field, value, f64::INFINITY)?),
    })
}

/// `log₂(previous / current)`, or `None` when either error is not positive and finite.
pub fn rate(previous: f64, current: f64) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    (ok(previous) && ok(current)).then(|| (previous / current).log2())
}

/// Error records over doubling `N` with the observed rates between consecutive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorRecord>,
    /// `l2_rates[i]` compares row `i` with row `i-1`; the first entry is always `None`.
    pub l2_rates: Vec<Option<f64>>,
    pub grad_lbeta_rates: Vec<Option<f64>>,
}

pub const CSV_HEADER: &str = "N,h,dt,l2_error,l2_rate,grad_lbeta_error,grad_lbeta_rate";

/// Builds the table; rows must be sorted by `N` with each `N` double the previous.
pub fn convergence_rates(rows: Vec<ErrorRecord>) -> Result<ConvergenceTable> {
    if rows.is_empty() {
        return Err(Error::Domain("convergence table needs at least one row".into()));
    }
    for pair in rows.windows(2) {
        if pair[1].n != 2 * pair[0].n {
            return Err(Error::Domain(format!(
                "convergence rows must double N (got {} after {})",
                pair[1].n, pair[0].n
            )));
        }
    }
    let rates = |pick: fn(&ErrorRecord) -> f64| {
        std::iter::once(None)
            .chain(rows.windows(2).map(|p| rate(pick(&p[0]), pick(&p[1]))))
            .collect::<Vec<_>>()
    };
    let l2_rates = rates(|r| r.l2_error);
    let grad_lbeta_rates = rates(|r| r.grad_lbeta_error);
    Ok(ConvergenceTable { rows, l2_rates, grad_lbeta_rates })
}

fn rate_cell(r: Option<f64>) -> String {
    r.map(|r| format!("{r:.2}")).unwrap_or_default()
}

/// `6.33E-02` style: two decimals and a signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x:.2E}");
    }
    let s = format!("{x:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("formatted with an exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", e.abs())
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let l2_rate = self.l2_rates[i].map(|v| format!("{v:.6}")).unwrap_or_default();
            let grad_rate = self.grad_lbeta_rates[i].map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.6e},{:.6e},{:.6e},{},{:.6e},{}",
                r.n, r.h, r.dt, r.l2_error, l2_rate, r.grad_lbeta_error, grad_rate
            );
        }
        out
    }

    /// Markdown table with the column layout `N | L² error | Rate | gradient error | Rate`.
    pub fn to_markdown(&self, beta: f64) -> String {
        let mut out = format!("| N | ‖ρ−ρh‖_L² | Rate | ‖∇(ρ−ρh)‖_L^{beta} | Rate |\n");
        out.push_str("|---:|---:|---:|---:|---:|\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.n,
                sci(r.l2_error),
                rate_cell(self.l2_rates[i]),
                sci(r.grad_lbeta_error),
                rate_cell(self.grad_lbeta_rates[i])
            );
        }
        out
    }
}
