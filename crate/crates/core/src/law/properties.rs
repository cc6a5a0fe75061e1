//! Sampled checks of the structural inequalities every law must satisfy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GeneralizedPolynomial, ROOT_RTOL};
use crate::error::Result;

/// Outcome of one sampled property.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub samples: usize,
    pub detail: String,
}

/// Sample counts for the suite.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSize {
    pub scalar_samples: usize,
    pub pair_samples: usize,
    pub bracket_points: usize,
    pub h_samples: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        Self {
            scalar_samples: 100_000,
            pair_samples: 100_000,
            bracket_points: 1000,
            h_samples: 100,
        }
    }
}

/// Slack on the vector monotonicity inequality.
pub const MONOTONICITY_SLACK: f64 = 1e-12;
/// Slack on the Lipschitz ratio bound `1/a₀`.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;
/// Tolerance of the closed-form kernel comparison for affine laws.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Relative tolerance of the finite-difference derivative check.
pub const DERIVATIVE_FD_RTOL: f64 = 1e-6;

fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

fn random_vector(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let r = log_uniform(rng, -4.0, 4.0);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    [r * theta.cos(), r * theta.sin()]
}

/// Random pair: half independent, half a relative perturbation of the first vector.
fn random_pair(rng: &mut ChaCha8Rng) -> ([f64; 2], [f64; 2]) {
    let y = random_vector(rng);
    if rng.random_bool(0.5) {
        (y, random_vector(rng))
    } else {
        let norm = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let d = norm * log_uniform(rng, -3.0, 0.0);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        (y, [y[0] + d * theta.cos(), y[1] + d * theta.sin()])
    }
}

/// A random valid multi-term law: 1 to 3 positive-exponent terms in (0, 3].
pub fn random_law(rng: &mut ChaCha8Rng) -> GeneralizedPolynomial {
    let extra = rng.random_range(1..=3);
    let mut exponents: Vec<f64> = (0..extra).map(|_| rng.random_range(0.05..3.0)).collect();
    exponents.sort_by(f64::total_cmp);
    exponents.dedup();
    let mut pairs = vec![(0.0, rng.random_range(0.2..3.0))];
    pairs.extend(exponents.into_iter().map(|e| (e, rng.random_range(0.1..5.0))));
    GeneralizedPolynomial::new(&pairs).expect("generated law is valid")
}

/// Seeded random law, for reproducible suites.
pub fn seeded_random_law(seed: u64) -> GeneralizedPolynomial {
    random_law(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn outcome(name: &'static str, samples: usize, worst: f64, limit: f64, what: &str) -> PropertyOutcome {
    PropertyOutcome {
        name,
        passed: worst <= limit,
        samples,
        detail: format!("{what} {worst:.3e} (limit {limit:.1e})"),
    }
}

/// Runs every law property on `law` with `seed`-driven sampling.
pub fn run_property_suite(law: &GeneralizedPolynomial, seed: u64, size: SuiteSize) -> Result<Vec<PropertyOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = law.derived_exponents();
    let k_max = 1.0 / law.a0();
    let mut out = Vec::new();

    // s·g(s) = ξ to relative accuracy.
    let mut worst = 0.0f64;
    for _ in 0..size.scalar_samples {
        let xi = log_uniform(&mut rng, -8.0, 12.0);
        let s = law.solve_s(xi)?;
        worst = worst.max((s * law.eval_g(s)? - xi).abs() / xi.max(1.0));
    }
    out.push(outcome("root_consistency", size.scalar_samples, worst, ROOT_RTOL, "max |s g(s) - xi|/max(xi,1)"));

    if law.is_affine() {
        let mut worst = 0.0f64;
        for _ in 0..size.scalar_samples {
            let xi = log_uniform(&mut rng, -8.0, 12.0);
            let closed = law.closed_form_k(xi).expect("affine law");
            worst = worst.max((law.eval_k(xi)? - closed).abs());
        }
        out.push(outcome("closed_form_kernel", size.scalar_samples, worst, CLOSED_FORM_TOL, "max |K - closed form|"));
    }

    // K ∈ (0, 1/a₀], non-increasing; K ξⁿ non-decreasing for n = 1, 2.
    let mut bound_violations = 0usize;
    let mut decrease_violations = 0usize;
    let mut power_violations = 0usize;
    for _ in 0..size.pair_samples {
        let a = log_uniform(&mut rng, -8.0, 12.0);
        let b = log_uniform(&mut rng, -8.0, 12.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (k_lo, k_hi) = (law.eval_k(lo)?, law.eval_k(hi)?);
        if !(k_lo > 0.0 && k_lo <= k_max && k_hi > 0.0 && k_hi <= k_max) {
            bound_violations += 1;
        }
        if k_lo < k_hi {
            decrease_violations += 1;
        }
        if k_lo * lo > k_hi * hi || k_lo * lo * lo > k_hi * hi * hi {
            power_violations += 1;
        }
    }
    for (name, count) in [
        ("kernel_range", bound_violations),
        ("kernel_decreasing", decrease_violations),
        ("kernel_times_power_increasing", power_violations),
    ] {
        out.push(PropertyOutcome {
            name,
            passed: count == 0,
            samples: size.pair_samples,
            detail: format!("{count} violations"),
        });
    }

    // -a K(ξ) ≤ K'(ξ) ξ ≤ 0 on a log-spaced grid.
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    let n = size.bracket_points.max(2);
    for i in 0..n {
        let xi = 10f64.powf(-6.0 + 18.0 * i as f64 / (n - 1) as f64);
        let k = law.eval_k(xi)?;
        let kpx = law.eval_k_prime(xi)? * xi;
        if !(-exps.a * k <= kpx && kpx <= 0.0) {
            violations += 1;
        }
        tightest = tightest.min(kpx + exps.a * k);
    }
    out.push(PropertyOutcome {
        name: "derivative_bracket",
        passed: violations == 0,
        samples: n,
        detail: format!("{violations} violations, min K'xi + aK = {tightest:.3e}"),
    });

    let mut worst = 0.0f64;
    for xi in [0.1, 1.0, 10.0, 100.0] {
        let h = 1e-5 * xi;
        let fd = (law.eval_k(xi + h)? - law.eval_k(xi - h)?) / (2.0 * h);
        let exact = law.eval_k_prime(xi)?;
        worst = worst.max(((fd - exact) / exact).abs());
    }
    out.push(outcome("derivative_finite_difference", 4, worst, DERIVATIVE_FD_RTOL, "max relative deviation"));

    // (F(y') - F(y))·(y' - y) ≥ (β-1) K(max |y|,|y'|) |y' - y|², and |F(y') - F(y)| ≤ |y' - y| / a₀.
    let mut worst_mono = f64::NEG_INFINITY;
    let mut worst_lip = 0.0f64;
    for _ in 0..size.pair_samples {
        let (y, z) = random_pair(&mut rng);
        let (fy, fz) = (law.flux(y)?, law.flux(z)?);
        let d = [z[0] - y[0], z[1] - y[1]];
        let df = [fz[0] - fy[0], fz[1] - fy[1]];
        let d2 = d[0] * d[0] + d[1] * d[1];
        if d2 == 0.0 {
            continue;
        }
        let ny = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let nz = (z[0] * z[0] + z[1] * z[1]).sqrt();
        let lhs = df[0] * d[0] + df[1] * d[1];
        let rhs = (exps.beta - 1.0) * law.eval_k(ny.max(nz))? * d2;
        worst_mono = worst_mono.max(rhs - lhs);
        worst_lip = worst_lip.max((df[0] * df[0] + df[1] * df[1]).sqrt() / d2.sqrt());
    }
    out.push(outcome(
        "vector_monotonicity",
        size.pair_samples,
        worst_mono,
        MONOTONICITY_SLACK,
        "max (beta-1)K(max)|dy|^2 - dF.dy",
    ));
    out.push(PropertyOutcome {
        name: "lipschitz",
        passed: worst_lip <= k_max + LIPSCHITZ_SLACK,
        samples: size.pair_samples,
        detail: format!("max ratio {worst_lip:.12} (bound 1/a0 = {k_max:.12})"),
    });

    // K ξ² ≤ H(ξ) ≤ 2 K ξ².
    let mut violations = 0usize;
    for _ in 0..size.h_samples {
        let xi = log_uniform(&mut rng, -3.0, 6.0);
        let h = law.eval_h(xi)?;
        let kx2 = law.eval_k(xi)? * xi * xi;
        if !(kx2 <= h && h <= 2.0 * kx2) {
            violations += 1;
        }
    }
    out.push(PropertyOutcome {
        name: "h_sandwich",
        passed: violations == 0,
        samples: size.h_samples,
        detail: format!("{violations} violations"),
    });

    // Degeneracy envelope, only for g(s) = 1 + s where both limits of K(ξ)(1+ξ)^½ are 1.
    if *law == GeneralizedPolynomial::forchheimer_two_term() {
        let n = size.bracket_points.max(2);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let xi = if i == 0 { 0.0 } else { 10f64.powf(-6.0 + 18.0 * (i - 1) as f64 / (n - 1) as f64) };
            let v = law.eval_k(xi)? * (1.0 + xi).sqrt();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        out.push(PropertyOutcome {
            name: "degeneracy_envelope",
            passed: lo >= 0.5 && hi <= 1.5,
            samples: n + 1,
            detail: format!("K(xi)(1+xi)^0.5 in [{lo:.4}, {hi:.4}] (required [0.5, 1.5])"),
        });
    }

    Ok(out)
}
