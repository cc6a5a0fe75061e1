//! Backward Euler in time with a Picard (or Newton) solve at every step.
//!
//! Step `n` finds `c` with
//! `M(c - c_prev)/Δt + A(c) c = F(tₙ) - Ψ(tₙ)`, where `A(c)` is the stiffness matrix
//! with the kernel frozen at `c`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::assembly;
use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::fespace::{l2_project, DensityField, FeSpace};
use crate::law::GeneralizedPolynomial;
use crate::sparse::CsrMatrix;

pub use crate::sparse::{linear_solve, linear_solve_from, LinearSolveStats};

/// Smallest damping factor the automatic retry will go down to.
pub const MIN_DAMPING: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Linearization {
    #[default]
    Picard,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub nonlinear_tol: f64,
    pub max_nonlinear_iters: usize,
    pub linear_tol: f64,
    pub linearization: Linearization,
    pub damping: f64,
    /// Extra exponents `q` for the `‖ρh‖_{L^q}` monitors.
    pub monitor_q: Vec<f64>,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            nonlinear_tol: 1e-6,
            max_nonlinear_iters: 50,
            linear_tol: 1e-12,
            linearization: Linearization::Picard,
            damping: 1.0,
            monitor_q: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("{field}: {why}")));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", "must be positive and finite");
        }
        if !(self.t_final >= self.dt) || !self.t_final.is_finite() {
            return bad("T", "must be finite and at least dt");
        }
        if !(self.nonlinear_tol > 0.0) {
            return bad("nonlinear_tol", "must be positive");
        }
        if !(self.linear_tol > 0.0) {
            return bad("linear_tol", "must be positive");
        }
        if self.max_nonlinear_iters == 0 {
            return bad("max_nonlinear_iters", "must be at least 1");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", "must lie in (0, 1]");
        }
        if let Some(q) = self.monitor_q.iter().find(|q| q.is_nan() || **q < 1.0) {
            return bad("q_list", &format!("exponent {q} is below 1"));
        }
        Ok(())
    }

    /// Number of steps `round(T/dt)` and the step that divides `T` exactly.
    pub fn steps(&self) -> (usize, f64) {
        let steps = ((self.t_final / self.dt).round() as usize).max(1);
        (steps, self.t_final / steps as f64)
    }
}

/// Convergence data of one nonlinear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    /// `‖c^{k+1} - c^k‖₂` of the accepted iterate.
    pub last_update: f64,
    /// `‖M(c - c_prev)/Δt + A(c)c + Ψ - F‖₂` at the accepted iterate.
    pub residual: f64,
    /// Damping in effect when the iteration stopped.
    pub damping: f64,
    /// `|(c - c_prev, 1)/Δt - (f, 1) + ⟨ψ, 1⟩|`.
    pub mass_defect: f64,
}

/// Norms of the discrete density recorded after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitors {
    pub l2: f64,
    /// `(q, ‖ρh‖_{L^q})` for each configured `q`.
    pub lq: Vec<(f64, f64)>,
    pub grad_lbeta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub stats: StepStats,
    pub monitors: Monitors,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dt: f64,
    pub t_final: f64,
    /// Exponent of the gradient monitor, `β = 2 - a` of the law.
    pub beta: f64,
    pub monitor_q: Vec<f64>,
    pub initial: Monitors,
    pub steps: Vec<StepRecord>,
    pub final_field: DensityField,
}

impl RunReport {
    pub fn max_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.stats.iterations).max().unwrap_or(0)
    }

    pub fn max_mass_defect(&self) -> f64 {
        self.steps.iter().map(|s| s.stats.mass_defect).fold(0.0, f64::max)
    }

    pub fn max_l2(&self) -> f64 {
        self.steps.iter().map(|s| s.monitors.l2).fold(self.initial.l2, f64::max)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn monitors(field: &DensityField, beta: f64, qs: &[f64]) -> Result<Monitors> {
    Ok(Monitors {
        l2: analysis::lq_norm(field, 2.0)?,
        lq: qs.iter().map(|&q| Ok((q, analysis::lq_norm(field, q)?))).collect::<Result<_>>()?,
        grad_lbeta: analysis::grad_lbeta_norm(field, beta)?,
    })
}

/// Time-independent data of a run: the space, the law and the mass matrix values.
pub struct TimeStepper<'a> {
    space: &'a Arc<FeSpace>,
    law: &'a GeneralizedPolynomial,
    config: &'a SolverConfig,
    mass: Vec<f64>,
}

impl<'a> TimeStepper<'a> {
    pub fn new(space: &'a Arc<FeSpace>, law: &'a GeneralizedPolynomial, config: &'a SolverConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { space, law, config, mass: assembly::mass_values(space) })
    }

    fn matrix(&self, values: Vec<f64>) -> CsrMatrix {
        CsrMatrix::from_pattern(self.space.pattern(), values, true)
    }

    /// Advances `prev` by one step of length `dt` to time `t`.
    pub fn step(
        &self,
        prev: &DensityField,
        t: f64,
        dt: f64,
        f: impl Fn([f64; 2], f64) -> f64,
        psi: impl Fn([f64; 2], f64, [f64; 2]) -> f64,
    ) -> Result<(DensityField, StepStats)> {
        if prev.coeffs().len() != self.space.dof_count() {
            return Err(Error::Domain("previous field lives on a different space".into()));
        }
        let n = self.space.dof_count();
        let mass_over_dt: Vec<f64> = self.mass.iter().map(|m| m / dt).collect();
        let m_dt = self.matrix(mass_over_dt.clone());
        let load = assembly::volume_load(self.space, &f, t);
        let flux = assembly::boundary_load(self.space, &psi, t);
        let mut rhs = m_dt.mul_vec(prev.coeffs());
        for i in 0..n {
            rhs[i] += load[i] - flux[i];
        }
        let load_total: f64 = load.iter().sum::<f64>() - flux.iter().sum::<f64>();

        let tol = self.config.nonlinear_tol;
        let mut damping = self.config.damping;
        let mut current = DensityField::new(self.space.clone(), prev.coeffs().to_vec())?;
        let mut last_update = f64::INFINITY;
        let mut iterations = 0;
        loop {
            // System matrix (M/Δt + A(c^k)) and residual at the current iterate.
            let stiff = assembly::picard_values(self.space, self.law, &current)?;
            let system = self.matrix(mass_over_dt.iter().zip(&stiff).map(|(m, a)| m + a).collect());
            let mut residual = system.mul_vec(current.coeffs());
            for i in 0..n {
                residual[i] -= rhs[i];
            }
            let residual_norm = norm(&residual);
            if iterations > 0 && last_update <= tol && residual_norm <= tol {
                let delta: Vec<f64> = current.coeffs().iter().zip(prev.coeffs()).map(|(c, p)| c - p).collect();
                let mass_change: f64 = m_dt.mul_vec(&delta).iter().sum();
                let stats = StepStats {
                    iterations,
                    last_update,
                    residual: residual_norm,
                    damping,
                    mass_defect: (mass_change - load_total).abs(),
                };
                return Ok((current, stats));
            }
            if iterations >= self.config.max_nonlinear_iters {
                return Err(Error::NonConvergence {
                    iterations,
                    last_update,
                    residual: residual_norm,
                    last_iterate: current.into_coeffs(),
                });
            }
            let step = match self.config.linearization {
                Linearization::Picard => {
                    let mut next = current.coeffs().to_vec();
                    linear_solve_from(&system, &rhs, &mut next, self.config.linear_tol)?;
                    next.iter().zip(current.coeffs()).map(|(x, c)| x - c).collect::<Vec<_>>()
                }
                Linearization::Newton => {
                    let jac = assembly::newton_values(self.space, self.law, &current)?;
                    let jacobian = self.matrix(mass_over_dt.iter().zip(&jac).map(|(m, a)| m + a).collect());
                    let minus_r: Vec<f64> = residual.iter().map(|r| -r).collect();
                    let mut delta = vec![0.0; n];
                    linear_solve_from(&jacobian, &minus_r, &mut delta, self.config.linear_tol)?;
                    delta
                }
            };
            // The update norm should not grow after the first iteration; halve the damping if it does.
            if iterations >= 1 && damping * norm(&step) > last_update && damping > MIN_DAMPING {
                damping = (damping * 0.5).max(MIN_DAMPING);
            }
            for (c, d) in current.coeffs_mut().iter_mut().zip(&step) {
                *c += damping * d;
            }
            last_update = damping * norm(&step);
            iterations += 1;
        }
    }
}

/// One backward Euler step from `prev` (time `t - dt`) to time `t = t_n`.
pub fn backward_euler_step(
    space: &Arc<FeSpace>,
    law: &GeneralizedPolynomial,
    prev: &DensityField,
    t_n: f64,
    config: &SolverConfig,
    f: impl Fn([f64; 2], f64) -> f64,
    psi: impl Fn([f64; 2], f64, [f64; 2]) -> f64,
) -> Result<DensityField> {
    let stepper = TimeStepper::new(space, law, config)?;
    Ok(stepper.step(prev, t_n, config.dt, f, psi)?.0)
}

/// Runs from `π ρ⁰` at `t = 0` to `T`, recording monitors after every step.
pub fn run_simulation(
    space: &Arc<FeSpace>,
    law: &GeneralizedPolynomial,
    case: &ManufacturedCase,
    config: &SolverConfig,
) -> Result<RunReport> {
    run_simulation_with(space, law, case, config, |_, _| {})
}

/// As [`run_simulation`], calling `observer` after each accepted step.
pub fn run_simulation_with(
    space: &Arc<FeSpace>,
    law: &GeneralizedPolynomial,
    case: &ManufacturedCase,
    config: &SolverConfig,
    mut observer: impl FnMut(&StepRecord, &DensityField),
) -> Result<RunReport> {
    let stepper = TimeStepper::new(space, law, config)?;
    let (steps, dt) = config.steps();
    let beta = law.derived_exponents().beta;
    let mut field = l2_project(space, |x| (case.rho0)(x))?;
    let initial = monitors(&field, beta, &config.monitor_q)?;
    let mut records = Vec::with_capacity(steps);
    for step in 1..=steps {
        let time = if step == steps { config.t_final } else { step as f64 * dt };
        let wrap = |e: Error| Error::Step { step, time, source: Box::new(e) };
        let (next, stats) = stepper.step(&field, time, dt, &*case.f, &*case.psi).map_err(wrap)?;
        let record = StepRecord { step, time, stats, monitors: monitors(&next, beta, &config.monitor_q).map_err(wrap)? };
        observer(&record, &next);
        records.push(record);
        field = next;
    }
    Ok(RunReport {
        dt,
        t_final: config.t_final,
        beta,
        monitor_q: config.monitor_q.clone(),
        initial,
        steps: records,
        final_field: field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::mesh::Mesh;

    fn space(n: usize, r: usize) -> Arc<FeSpace> {
        Arc::new(FeSpace::new(Mesh::unit_square(n).unwrap(), r).unwrap())
    }

    #[test]
    fn config_validation_names_fields() {
        let mut c = SolverConfig::new(-0.1, 1.0);
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.starts_with("dt")));
        c.dt = 2.0;
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.starts_with("T")));
        c.dt = 0.1;
        c.damping = 0.0;
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.starts_with("damping")));
        c.damping = 1.0;
        c.validate().unwrap();
    }

    #[test]
    fn step_count_divides_final_time() {
        assert_eq!(SolverConfig::new(0.3, 1.0).steps(), (3, 1.0 / 3.0));
        assert_eq!(SolverConfig::new(0.25, 1.0).steps(), (4, 0.25));
    }

    #[test]
    fn constant_is_a_fixed_point() {
        let s = space(3, 2);
        let law = GeneralizedPolynomial::forchheimer_two_term();
        let prev = DensityField::constant(s.clone(), 1.7);
        let config = SolverConfig::new(0.1, 1.0);
        let stepper = TimeStepper::new(&s, &law, &config).unwrap();
        let (next, stats) = stepper.step(&prev, 0.1, 0.1, |_, _| 0.0, |_, _, _| 0.0).unwrap();
        assert_eq!(stats.iterations, 1);
        assert!(next.coeffs().iter().all(|c| (c - 1.7).abs() < 1e-12));
    }

    #[test]
    fn steady_linear_state_is_preserved() {
        let case = cases::steady_linear();
        for r in [1, 2] {
            let s = space(4, r);
            let prev = DensityField::interpolate(s.clone(), |x| x[0]);
            for dt in [1e-3, 0.5] {
                for lin in [Linearization::Picard, Linearization::Newton] {
                    let mut config = SolverConfig::new(dt, 1.0);
                    config.linearization = lin;
                    let next = backward_euler_step(&s, &case.law, &prev, dt, &config, &*case.f, &*case.psi).unwrap();
                    let diff = next.coeffs().iter().zip(prev.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(diff <= 1e-6, "r={r} dt={dt} {lin:?}: {diff}");
                }
            }
        }
    }

    #[test]
    fn newton_and_picard_agree() {
        let case = cases::example2();
        let s = space(4, 2);
        let prev = l2_project(&s, |x| (case.rho0)(x)).unwrap();
        let mut config = SolverConfig::new(0.25, 1.0);
        config.nonlinear_tol = 1e-10;
        let picard = TimeStepper::new(&s, &case.law, &config).unwrap();
        let (a, sa) = picard.step(&prev, 0.25, 0.25, &*case.f, &*case.psi).unwrap();
        config.linearization = Linearization::Newton;
        let newton = TimeStepper::new(&s, &case.law, &config).unwrap();
        let (b, sb) = newton.step(&prev, 0.25, 0.25, &*case.f, &*case.psi).unwrap();
        assert!(sb.iterations <= sa.iterations);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let case = cases::example2();
        let s = space(2, 1);
        let prev = l2_project(&s, |x| (case.rho0)(x)).unwrap();
        let mut config = SolverConfig::new(0.5, 1.0);
        config.max_nonlinear_iters = 1;
        config.nonlinear_tol = 1e-14;
        let err = backward_euler_step(&s, &case.law, &prev, 0.5, &config, &*case.f, &*case.psi).unwrap_err();
        match err {
            Error::NonConvergence { iterations, last_iterate, .. } => {
                assert_eq!(iterations, 1);
                assert_eq!(last_iterate.len(), s.dof_count());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_data_run_is_constant() {
        let case = cases::constant(1.0);
        let s = space(4, 1);
        let mut config = SolverConfig::new(0.25, 1.0);
        config.monitor_q = vec![4.0];
        let report = run_simulation(&s, &case.law, &case, &config).unwrap();
        assert_eq!(report.steps.len(), 4);
        assert!(report.final_field.coeffs().iter().all(|c| (c - 1.0).abs() < 1e-12));
        for rec in &report.steps {
            assert!((rec.monitors.l2 - 1.0).abs() < 1e-12);
            assert!((rec.monitors.lq[0].1 - 1.0).abs() < 1e-12);
            assert!(rec.monitors.grad_lbeta < 1e-10);
        }
        assert!(report.max_mass_defect() < 1e-10);
    }
}
