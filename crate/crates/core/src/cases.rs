//! Manufactured problems on the unit square and their consistency oracle.
//!
//! Every case carries the law it was manufactured for. The oracle recomputes
//! `ρ_t - ∇·(K(|∇ρ|)∇ρ) - f` with central finite differences of the analytic
//! solution and flux, which catches transcription errors in long forcing formulas.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::law::GeneralizedPolynomial;

pub type ScalarFn = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;
/// Boundary data `ψ(x, t, ν)`; `ν` is the outward normal of the edge holding `x`.
pub type BoundaryFn = Arc<dyn Fn([f64; 2], f64, [f64; 2]) -> f64 + Send + Sync>;

/// Floor applied to denominators that vanish only at isolated boundary points.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Tolerance on the finite-difference PDE residual.
pub const PDE_RESIDUAL_TOL: f64 = 1e-4;
/// Tolerance on `K(|∇ρ|)∇ρ·ν + ψ`.
pub const BOUNDARY_RESIDUAL_TOL: f64 = 1e-8;
/// Finite-difference step of the oracle.
pub const FD_STEP: f64 = 1e-5;

/// Analytic solution and its spatial gradient.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarFn,
    pub gradient: VectorFn,
}

/// Data of an initial boundary value problem, optionally with its exact solution.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub law: GeneralizedPolynomial,
    pub rho0: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    pub f: ScalarFn,
    pub psi: BoundaryFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("law", &self.law)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: [&str; 4] = ["example1", "example2", "constant", "steady_linear"];

pub fn case_by_name(name: &str) -> Result<ManufacturedCase> {
    match name {
        "example1" => Ok(example1()),
        "example2" => Ok(example2()),
        "constant" => Ok(constant(1.0)),
        "steady_linear" => Ok(steady_linear()),
        other => Err(Error::Config(format!(
            "unknown case '{other}' (expected one of {})",
            CASE_NAMES.join(", ")
        ))),
    }
}

/// `2 / (1 + √(1 + 4ξ))`, the two-term kernel in closed form.
fn two_term_kernel(xi: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 * xi).sqrt())
}

/// Zero-flux problem with `ρ = e^{-2t}[½(x₁²+x₂²) - ⅓(x₁³+x₂³)] + 1`, so that
/// `|∇ρ| = e^{-2t} W(x)` with `W = √(x₁²(1-x₁)² + x₂²(1-x₂)²)`.
pub fn example1() -> ManufacturedCase {
    fn profile(x: [f64; 2]) -> f64 {
        let [a, b] = x;
        0.5 * (a * a + b * b) - (a * a * a + b * b * b) / 3.0
    }
    let value: ScalarFn = Arc::new(|x, t| (-2.0 * t).exp() * profile(x) + 1.0);
    let gradient: VectorFn = Arc::new(|x, t| {
        let e = (-2.0 * t).exp();
        [e * x[0] * (1.0 - x[0]), e * x[1] * (1.0 - x[1])]
    });
    let f: ScalarFn = Arc::new(|x, t| {
        let [a, b] = x;
        let e2 = (-2.0 * t).exp();
        let e4 = (-4.0 * t).exp();
        let w = ((a * (1.0 - a)).powi(2) + (b * (1.0 - b)).powi(2)).sqrt().max(DENOMINATOR_FLOOR);
        let root = (1.0 + 4.0 * e2 * w).sqrt();
        let cubic = a * a * (1.0 - a).powi(2) * (1.0 - 2.0 * a) + b * b * (1.0 - b).powi(2) * (1.0 - 2.0 * b);
        -2.0 * e2 * profile(x) - 4.0 * e2 * (1.0 - a - b) / (1.0 + root)
            + 4.0 * e4 * cubic / (w * (1.0 + root).powi(2) * root)
    });
    ManufacturedCase {
        name: "example1".into(),
        law: GeneralizedPolynomial::forchheimer_two_term(),
        rho0: Arc::new(|x| profile(x) + 1.0),
        f,
        psi: Arc::new(|_, _, _| 0.0),
        exact: Some(ExactSolution { value, gradient }),
    }
}

/// Non-zero flux problem with `ρ = x₁x₂e^{-t} + 1`.
pub fn example2() -> ManufacturedCase {
    let value: ScalarFn = Arc::new(|x, t| x[0] * x[1] * (-t).exp() + 1.0);
    let gradient: VectorFn = Arc::new(|x, t| {
        let e = (-t).exp();
        [e * x[1], e * x[0]]
    });
    let f: ScalarFn = Arc::new(|x, t| {
        let [a, b] = x;
        let e1 = (-t).exp();
        let r = a.hypot(b).max(DENOMINATOR_FLOOR);
        let root = (1.0 + 4.0 * e1 * r).sqrt();
        -e1 * a * b + 8.0 * (-2.0 * t).exp() * a * b / (r * (1.0 + root).powi(2) * root)
    });
    let psi: BoundaryFn = Arc::new(|x, t, normal| {
        let [a, b] = x;
        let e1 = (-t).exp();
        let scale = 2.0 * e1 / (1.0 + (1.0 + 4.0 * e1 * a.hypot(b)).sqrt());
        let side = match normal {
            [n, _] if n < 0.0 => b,
            [n, _] if n > 0.0 => -b,
            [_, n] if n > 0.0 => -a,
            _ => a,
        };
        scale * side
    });
    ManufacturedCase {
        name: "example2".into(),
        law: GeneralizedPolynomial::forchheimer_two_term(),
        rho0: Arc::new(|x| x[0] * x[1] + 1.0),
        f,
        psi,
        exact: Some(ExactSolution { value, gradient }),
    }
}

/// `ρ ≡ c` with no forcing and no flux.
pub fn constant(c: f64) -> ManufacturedCase {
    ManufacturedCase {
        name: "constant".into(),
        law: GeneralizedPolynomial::forchheimer_two_term(),
        rho0: Arc::new(move |_| c),
        f: Arc::new(|_, _| 0.0),
        psi: Arc::new(|_, _, _| 0.0),
        exact: Some(ExactSolution {
            value: Arc::new(move |_, _| c),
            gradient: Arc::new(|_, _| [0.0, 0.0]),
        }),
    }
}

/// Steady `ρ = x₁`: flux `-K(1)` leaves through `x₁ = 1` and enters through `x₁ = 0`.
pub fn steady_linear() -> ManufacturedCase {
    let k1 = two_term_kernel(1.0);
    ManufacturedCase {
        name: "steady_linear".into(),
        law: GeneralizedPolynomial::forchheimer_two_term(),
        rho0: Arc::new(|x| x[0]),
        f: Arc::new(|_, _| 0.0),
        psi: Arc::new(move |_, _, normal| -k1 * normal[0]),
        exact: Some(ExactSolution {
            value: Arc::new(|x, _| x[0]),
            gradient: Arc::new(|_, _| [1.0, 0.0]),
        }),
    }
}

/// Worst residuals found by [`check_consistency`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ConsistencyReport {
    pub max_pde_residual: f64,
    pub max_boundary_residual: f64,
    pub max_gradient_mismatch: f64,
    pub max_initial_mismatch: f64,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.max_pde_residual <= PDE_RESIDUAL_TOL
            && self.max_boundary_residual <= BOUNDARY_RESIDUAL_TOL
            && self.max_gradient_mismatch <= PDE_RESIDUAL_TOL
            && self.max_initial_mismatch == 0.0
    }
}

fn exact_of(case: &ManufacturedCase) -> Result<&ExactSolution> {
    case.exact
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("case '{}' has no exact solution", case.name)))
}

/// `ρ_t - ∇·(K(|∇ρ|)∇ρ) - f` at `(x, t)` by central differences with step `FD_STEP`.
pub fn pde_residual(case: &ManufacturedCase, x: [f64; 2], t: f64) -> Result<f64> {
    let exact = exact_of(case)?;
    let h = FD_STEP;
    let rho_t = ((exact.value)(x, t + h) - (exact.value)(x, t - h)) / (2.0 * h);
    let flux = |p: [f64; 2]| case.law.flux((exact.gradient)(p, t));
    let div = (flux([x[0] + h, x[1]])?[0] - flux([x[0] - h, x[1]])?[0]) / (2.0 * h)
        + (flux([x[0], x[1] + h])?[1] - flux([x[0], x[1] - h])?[1]) / (2.0 * h);
    Ok(rho_t - div - (case.f)(x, t))
}

/// `K(|∇ρ|)∇ρ·ν + ψ` at boundary point `x` with outward normal `normal`.
pub fn boundary_residual(case: &ManufacturedCase, x: [f64; 2], t: f64, normal: [f64; 2]) -> Result<f64> {
    let exact = exact_of(case)?;
    let q = case.law.flux((exact.gradient)(x, t))?;
    Ok(q[0] * normal[0] + q[1] * normal[1] + (case.psi)(x, t, normal))
}

/// Samples interior and boundary points and reports the worst residuals.
pub fn check_consistency(case: &ManufacturedCase, seed: u64, samples: usize) -> Result<ConsistencyReport> {
    let exact = exact_of(case)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConsistencyReport::default();
    let h = FD_STEP;
    for _ in 0..samples {
        let x = [rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
        let t = rng.random_range(0.01..1.0);
        report.max_pde_residual = report.max_pde_residual.max(pde_residual(case, x, t)?.abs());

        let g = (exact.gradient)(x, t);
        let fd = [
            ((exact.value)([x[0] + h, x[1]], t) - (exact.value)([x[0] - h, x[1]], t)) / (2.0 * h),
            ((exact.value)([x[0], x[1] + h], t) - (exact.value)([x[0], x[1] - h], t)) / (2.0 * h),
        ];
        report.max_gradient_mismatch = report.max_gradient_mismatch.max((g[0] - fd[0]).abs().max((g[1] - fd[1]).abs()));
        report.max_initial_mismatch = report.max_initial_mismatch.max(((case.rho0)(x) - (exact.value)(x, 0.0)).abs());

        let s: f64 = rng.random_range(0.0..1.0);
        for (p, normal) in [
            ([s, 0.0], [0.0, -1.0]),
            ([1.0, s], [1.0, 0.0]),
            ([s, 1.0], [0.0, 1.0]),
            ([0.0, s], [-1.0, 0.0]),
        ] {
            report.max_boundary_residual = report.max_boundary_residual.max(boundary_residual(case, p, t, normal)?.abs());
        }
    }
    Ok(report)
}
