//! The constitutive nonlinearity of the generalized Forchheimer model.
//!
//! A law is a generalized polynomial `g(s) = Σ aᵢ s^αᵢ` with `α₀ = 0 < α₁ < … < α_N`.
//! The diffusion kernel is `K(ξ) = 1 / g(s(ξ))`, where `s(ξ) ≥ 0` is the unique root
//! of `s·g(s) = ξ`. `K` is bounded by `1/a₀` at zero gradient and decays like
//! `ξ^(-a)` with `a = α_N / (α_N + 1)` as the gradient grows.

pub mod properties;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Relative tolerance on `|s·g(s) - ξ| / max(ξ, 1)` accepted by [`GeneralizedPolynomial::solve_s`].
pub const ROOT_RTOL: f64 = 1e-12;

/// Relative tolerance of the adaptive quadrature behind [`GeneralizedPolynomial::eval_h`].
pub const H_RTOL: f64 = 1e-8;

const ROOT_MAX_ITERS: usize = 200;

/// One term `coefficient · s^exponent` of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: f64,
    pub coefficient: f64,
}

/// The law `g(s) = a₀ + a₁ s^α₁ + … + a_N s^α_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPolynomial {
    terms: Vec<Term>,
}

/// Exponents derived from the degree `α_N` of the law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedExponents {
    /// Degeneracy exponent `α_N / (α_N + 1)`.
    pub a: f64,
    /// Natural gradient integrability exponent `2 - a`.
    pub beta: f64,
    /// Conjugate exponent `β / (β - 1)`.
    pub lambda: f64,
    /// `a / β`.
    pub gamma: f64,
}

impl GeneralizedPolynomial {
    /// Builds a law from `(exponent, coefficient)` pairs.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let terms: Vec<Term> = pairs
            .iter()
            .map(|&(exponent, coefficient)| Term { exponent, coefficient })
            .collect();
        Self::from_terms(terms)
    }

    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::Domain(format!(
                "a law needs at least two terms (N >= 1), got {}",
                terms.len()
            )));
        }
        if terms.iter().any(|t| !t.exponent.is_finite() || !t.coefficient.is_finite()) {
            return Err(Error::Domain("law exponents and coefficients must be finite".into()));
        }
        if terms[0].exponent != 0.0 {
            return Err(Error::Domain(format!(
                "first exponent must be exactly 0, got {}",
                terms[0].exponent
            )));
        }
        if let Some(w) = terms.windows(2).find(|w| w[1].exponent <= w[0].exponent) {
            return Err(Error::Domain(format!(
                "exponents must be strictly increasing ({} followed by {})",
                w[0].exponent, w[1].exponent
            )));
        }
        if let Some(t) = terms.iter().find(|t| t.coefficient < 0.0) {
            return Err(Error::Domain(format!(
                "coefficients must be non-negative, got {} for exponent {}",
                t.coefficient, t.exponent
            )));
        }
        if terms[0].coefficient <= 0.0 {
            return Err(Error::Domain(format!(
                "leading coefficient a0 must be positive, got {}",
                terms[0].coefficient
            )));
        }
        let last = terms[terms.len() - 1];
        if last.coefficient <= 0.0 {
            return Err(Error::Domain(format!(
                "top coefficient a_N must be positive, got {}",
                last.coefficient
            )));
        }
        Ok(Self { terms })
    }

    /// The two-term Forchheimer law `g(s) = 1 + s`.
    pub fn forchheimer_two_term() -> Self {
        Self::new(&[(0.0, 1.0), (1.0, 1.0)]).expect("valid law")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `a₀ = g(0)`.
    pub fn a0(&self) -> f64 {
        self.terms[0].coefficient
    }

    /// Degree `α_N` of the law.
    pub fn degree(&self) -> f64 {
        self.terms[self.terms.len() - 1].exponent
    }

    /// `Σ aᵢ s^αᵢ`.
    pub fn eval_g(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("g is defined for finite s >= 0, got {s}")));
        }
        Ok(self.g(s))
    }

    fn g(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient * pow(s, t.exponent)).sum()
    }

    /// `s·g'(s) = Σ aᵢ αᵢ s^αᵢ`, finite at zero for every law.
    fn s_dg(&self, s: f64) -> f64 {
        self.terms[1..]
            .iter()
            .map(|t| t.coefficient * t.exponent * pow(s, t.exponent))
            .sum()
    }

    /// `g'(s)`; infinite at zero when some active exponent lies in (0, 1).
    fn dg(&self, s: f64) -> f64 {
        self.terms[1..]
            .iter()
            .filter(|t| t.coefficient > 0.0)
            .map(|t| {
                if s == 0.0 {
                    match t.exponent.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => t.coefficient,
                        _ => 0.0,
                    }
                } else {
                    t.coefficient * t.exponent * pow(s, t.exponent - 1.0)
                }
            })
            .sum()
    }

    /// Unique non-negative root of `s·g(s) = ξ`.
    ///
    /// `φ(s) = s·g(s) - ξ` is increasing and convex on `[0, ∞)`, so Newton's
    /// method started from an upper bound decreases monotonically onto the root.
    /// A bisection step replaces any iterate that leaves the current bracket.
    pub fn solve_s(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::Domain(format!("s(xi) is defined for finite xi >= 0, got {xi}")));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let phi = |s: f64| s * self.g(s) - xi;
        let top = self.terms[self.terms.len() - 1];
        // Both are upper bounds: φ(s) ≥ a₀ s - ξ and φ(s) ≥ a_N s^(1+α_N) - ξ.
        let mut hi = (xi / self.a0()).min((xi / top.coefficient).powf(1.0 / (1.0 + top.exponent)));
        let mut grow = 0;
        while phi(hi) < 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 2000 || !hi.is_finite() {
                return Err(Error::Solver(format!("could not bracket the root of s*g(s) = {xi}")));
            }
        }
        let mut lo = 0.0;
        let mut s = hi;
        let tol = ROOT_RTOL * xi.max(1.0);
        for _ in 0..ROOT_MAX_ITERS {
            let f = phi(s);
            if f == 0.0 {
                return Ok(s);
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            // φ'(s) = g(s) + s g'(s) ≥ a₀ > 0.
            let slope = self.g(s) + self.s_dg(s);
            let mut next = s - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let converged = (next - s).abs() <= 4.0 * f64::EPSILON * s;
            s = next;
            if converged || hi - lo <= 4.0 * f64::EPSILON * hi {
                if phi(s).abs() <= tol {
                    return Ok(s);
                }
                break;
            }
        }
        let residual = phi(s).abs();
        if residual <= tol {
            return Ok(s);
        }
        Err(Error::Solver(format!(
            "root of s*g(s) = {xi} not found (|residual| = {residual:.3e})"
        )))
    }

    /// `K(ξ) = 1 / g(s(ξ))`.
    pub fn eval_k(&self, xi: f64) -> Result<f64> {
        let s = self.solve_s(xi)?;
        Ok(1.0 / self.g(s))
    }

    /// `K'(ξ)` by implicit differentiation: `-g'(s) s'(ξ) / g(s)²`, `s'(ξ) = 1 / (g + s g')`.
    ///
    /// Equals `-∞` at `ξ = 0` for laws with an active exponent in (0, 1); use
    /// [`Self::eval_k_and_k_prime_xi`] where the bounded product `K'(ξ)·ξ` suffices.
    pub fn eval_k_prime(&self, xi: f64) -> Result<f64> {
        let s = self.solve_s(xi)?;
        let g = self.g(s);
        let dg = self.dg(s);
        if dg == 0.0 {
            return Ok(0.0);
        }
        let ds = 1.0 / (g + self.s_dg(s));
        Ok(-dg * ds / (g * g))
    }

    /// Returns `(K(ξ), K'(ξ)·ξ)`; the product is `-K · s g' / (g + s g')`, bounded
    /// below by `-a·K`.
    pub fn eval_k_and_k_prime_xi(&self, xi: f64) -> Result<(f64, f64)> {
        let s = self.solve_s(xi)?;
        let g = self.g(s);
        let sdg = self.s_dg(s);
        let k = 1.0 / g;
        Ok((k, -k * sdg / (g + sdg)))
    }

    /// `H(ξ) = ∫₀^{ξ²} K(√τ) dτ`, computed as `∫₀^ξ 2u K(u) du` by adaptive
    /// Gauss–Kronrod quadrature.
    pub fn eval_h(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::Domain(format!("H is defined for finite xi >= 0, got {xi}")));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        integrate_adaptive(|u| Ok(2.0 * u * self.eval_k(u)?), 0.0, xi, H_RTOL, 0.0)
    }

    /// Flux map `y ↦ K(|y|) y`.
    pub fn flux<const D: usize>(&self, y: [f64; D]) -> Result<[f64; D]> {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k = self.eval_k(norm)?;
        Ok(y.map(|v| k * v))
    }

    pub fn derived_exponents(&self) -> DerivedExponents {
        let alpha_n = self.degree();
        let a = alpha_n / (alpha_n + 1.0);
        let beta = 2.0 - a;
        DerivedExponents {
            a,
            beta,
            lambda: beta / (beta - 1.0),
            gamma: a / beta,
        }
    }

    /// True for laws of the form `a₀ + a₁ s`, whose kernel has a closed form.
    pub fn is_affine(&self) -> bool {
        self.terms.len() == 2 && self.terms[1].exponent == 1.0
    }

    /// Closed-form kernel for affine laws: `K(ξ) = 2 / (a₀ + √(a₀² + 4 a₁ ξ))`.
    pub fn closed_form_k(&self, xi: f64) -> Option<f64> {
        if !self.is_affine() {
            return None;
        }
        let a0 = self.terms[0].coefficient;
        let a1 = self.terms[1].coefficient;
        Some(2.0 / (a0 + (a0 * a0 + 4.0 * a1 * xi).sqrt()))
    }
}

#[inline]
fn pow(s: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if exponent == 1.0 {
        s
    } else if exponent == 2.0 {
        s * s
    } else {
        s.powf(exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term() -> GeneralizedPolynomial {
        GeneralizedPolynomial::forchheimer_two_term()
    }

    #[test]
    fn g_examples() {
        assert_eq!(two_term().eval_g(1.0).unwrap(), 2.0);
        let law = GeneralizedPolynomial::new(&[(0.0, 1.0), (1.0, 2.0), (1.5, 1.0)]).unwrap();
        assert_eq!(law.eval_g(0.0).unwrap(), 1.0);
        assert!((law.eval_g(4.0).unwrap() - 17.0).abs() < 1e-14);
        assert!(matches!(law.eval_g(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_laws_rejected() {
        for pairs in [
            vec![(0.0, 1.0)],
            vec![(0.0, 0.0), (1.0, 1.0)],
            vec![(0.0, 1.0), (1.0, 0.0)],
            vec![(0.5, 1.0), (1.0, 1.0)],
            vec![(0.0, 1.0), (2.0, 1.0), (1.0, 1.0)],
            vec![(0.0, 1.0), (1.0, -1.0), (2.0, 1.0)],
            vec![(0.0, 1.0), (f64::NAN, 1.0)],
        ] {
            assert!(matches!(GeneralizedPolynomial::new(&pairs), Err(Error::Domain(_))), "{pairs:?}");
        }
        // interior zero coefficients are allowed
        assert!(GeneralizedPolynomial::new(&[(0.0, 1.0), (0.5, 0.0), (2.0, 1.0)]).is_ok());
    }

    #[test]
    fn root_examples() {
        let law = two_term();
        assert_eq!(law.solve_s(0.0).unwrap(), 0.0);
        assert!((law.solve_s(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((law.solve_s(6.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(law.solve_s(-1.0), Err(Error::Domain(_))));
        assert!(matches!(law.solve_s(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_examples() {
        let law = two_term();
        assert_eq!(law.eval_k(0.0).unwrap(), 1.0);
        assert!((law.eval_k(2.0).unwrap() - 0.5).abs() < 1e-15);
        let scaled = GeneralizedPolynomial::new(&[(0.0, 4.0), (2.0, 1.0)]).unwrap();
        assert_eq!(scaled.eval_k(0.0).unwrap(), 0.25);
    }

    #[test]
    fn kernel_derivative_at_zero() {
        assert!((two_term().eval_k_prime(0.0).unwrap() + 1.0).abs() < 1e-15);
        let sub_linear = GeneralizedPolynomial::new(&[(0.0, 1.0), (0.5, 1.0)]).unwrap();
        assert_eq!(sub_linear.eval_k_prime(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(sub_linear.eval_k_and_k_prime_xi(0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn kernel_derivative_matches_finite_differences() {
        let laws = [
            two_term(),
            GeneralizedPolynomial::new(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap(),
            GeneralizedPolynomial::new(&[(0.0, 0.7), (0.4, 2.0), (2.5, 0.3)]).unwrap(),
        ];
        for law in &laws {
            for xi in [0.1, 1.0, 10.0, 100.0] {
                let h = 1e-5 * xi;
                let fd = (law.eval_k(xi + h).unwrap() - law.eval_k(xi - h).unwrap()) / (2.0 * h);
                let exact = law.eval_k_prime(xi).unwrap();
                assert!(((fd - exact) / exact).abs() < 1e-6, "xi={xi}: fd {fd} vs {exact}");
                let (_, kpx) = law.eval_k_and_k_prime_xi(xi).unwrap();
                assert!((kpx - exact * xi).abs() <= 1e-13 * kpx.abs());
            }
        }
    }

    #[test]
    fn h_at_zero_and_against_composite_rule() {
        let law = two_term();
        assert_eq!(law.eval_h(0.0).unwrap(), 0.0);
        // Composite midpoint rule on the original form ∫₀^1 K(√τ) dτ.
        let panels = 200_000;
        let dx = 1.0 / panels as f64;
        let oracle: f64 = (0..panels)
            .map(|i| {
                let tau = (i as f64 + 0.5) * dx;
                2.0 / (1.0 + (1.0 + 4.0 * tau.sqrt()).sqrt()) * dx
            })
            .sum();
        assert!((law.eval_h(1.0).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn flux_examples() {
        let law = two_term();
        assert_eq!(law.flux([0.0, 0.0]).unwrap(), [0.0, 0.0]);
        let f = law.flux([2.0, 0.0]).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1] == 0.0);
        let f3 = law.flux([0.0, 0.0, 2.0]).unwrap();
        assert!((f3[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derived_exponent_examples() {
        let e = two_term().derived_exponents();
        assert_eq!((e.a, e.beta), (0.5, 1.5));
        let e = GeneralizedPolynomial::new(&[(0.0, 1.0), (2.0, 1.0)]).unwrap().derived_exponents();
        assert!((e.a - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.beta - 4.0 / 3.0).abs() < 1e-15);
        assert!((e.lambda - 4.0).abs() < 1e-13);
        assert!((e.gamma - 0.5).abs() < 1e-15);
        assert!((e.lambda * (e.beta - 1.0) - e.beta).abs() < 1e-14);
        assert!((e.lambda - (2.0 - e.a) / (1.0 - e.a)).abs() < 1e-13);
    }

    #[test]
    fn closed_form_only_for_affine_laws() {
        let law = two_term();
        for xi in [0.0f64, 0.3, 2.0, 1e3, 1e9] {
            let expected = 2.0 / (1.0 + (1.0 + 4.0 * xi).sqrt());
            assert!((law.closed_form_k(xi).unwrap() - expected).abs() < 1e-16);
            assert!((law.eval_k(xi).unwrap() - expected).abs() < 1e-10);
        }
        let quad = GeneralizedPolynomial::new(&[(0.0, 1.0), (2.0, 1.0)]).unwrap();
        assert!(quad.closed_form_k(1.0).is_none());
    }
}
