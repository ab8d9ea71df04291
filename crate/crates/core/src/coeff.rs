//! The mass-ratio integrals `J`, `L`, `N` and the entanglement coefficient
//! `E(mu1)`.
//!
//! All three start life as integrals over two momentum 3-vectors. Rotational
//! invariance collapses them: `L` and `N` reduce to two nested radial
//! integrals, while `J` keeps a squared inner integral and needs three
//! nested one-dimensional rules,
//!
//! ```text
//! J  = 4 pi^(-7/2) int_0^inf rho^2 g(rho)^2 drho,
//! ```
//!
//! with `g` itself a radial-by-radial integral. The inner angular variable
//! is traded for the magnitude `m = |mu2 q1 - mu1 q2|`, which turns the
//! integrand into an analytic function of the quadrature variables (the
//! `sinh(x)/x` kernel is even in `x`), so the nested Gauss rules converge
//! exponentially. The `omega` axis is split where the lower `m` limit
//! `|mu2 omega - nu rho|` loses smoothness.
//!
//! The closed forms
//!
//! ```text
//! L = sqrt(2/pi) (1 + (2 mu1 - 1)^2)^(-1/2)
//! N = ((1 + d^2)^(3/2) - 1) / (2 d^2 sqrt(1 + d^2)),   d = 2 mu1 - 1
//! ```
//!
//! are exact; the quadrature paths `l_quad` / `n_quad` exist to cross-check
//! them and the shared reduction machinery.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::quad::{self, Estimate, QuadratureSpec};
use crate::{Error, Result};

/// Mass fractions below this are treated as the exact massless limit in the
/// `J` reduction (the general path divides by `mu2`).
const MU2_LIMIT: f64 = 1e-10;

/// Everything computed for one mass fraction.
#[derive(Debug, Clone, Serialize)]
pub struct CoeffResult {
    pub mu1: f64,
    /// `J(mu1, 1-mu1)`.
    pub j_fwd: Estimate,
    /// `J(1-mu1, mu1)`.
    pub j_rev: Estimate,
    /// Closed-form `L(mu1, 1-mu1)`.
    pub l: Estimate,
    /// Closed-form `N(mu1, 1-mu1)`.
    pub n: Estimate,
    /// `E = 8 (L^2 + N - J_fwd - J_rev)` with the quadrature errors
    /// propagated as `8 (err_fwd + err_rev)`.
    pub e: Estimate,
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// J
// ---------------------------------------------------------------------------

/// Inner integral of the `J` reduction at fixed outer radius `rho`, general
/// `mu2 > 0` path.
///
/// With `omega = |q1 + q2|` and `m = |mu2 q1 - mu1 q2|` as variables:
///
/// ```text
/// g(rho) = 2 pi / (mu2 nu rho) *
///          int domega omega int_{|mu2 omega - nu rho|}^{mu2 omega + nu rho} dm
///          m^2 exp(-a omega^2 / 2 - m^2 - q1^2 / 2) sinhc(d omega m)
/// ```
///
/// where `q1^2 = omega^2 + rho^2 - (mu2^2 omega^2 + nu^2 rho^2 - m^2)/(mu2 nu)`,
/// `a = mu1^2 + mu2^2`, `d = mu1 - mu2`, `nu = mu1 + mu2`.
#[allow(clippy::too_many_arguments)]
fn j_inner(
    rho: f64,
    mu2: f64,
    a: f64,
    d: f64,
    nu: f64,
    cutoff: f64,
    base: &(Vec<f64>, Vec<f64>),
    m_rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let split = nu * rho / mu2;
    let segments: &[(f64, f64)] = if split < cutoff {
        &[(0.0, split), (split, cutoff)]
    } else {
        &[(0.0, cutoff)]
    };
    let mut total = 0.0;
    for &(lo, hi) in segments {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&t, &wt) in base.0.iter().zip(base.1.iter()) {
            let omega = mid + half * t;
            let w_omega = half * wt;
            let m_lo = (mu2 * omega - nu * rho).abs();
            let m_hi = mu2 * omega + nu * rho;
            let m_half = 0.5 * (m_hi - m_lo);
            let m_mid = 0.5 * (m_hi + m_lo);
            let mut inner = 0.0;
            for (&tm, &wm) in m_rule.0.iter().zip(m_rule.1.iter()) {
                let m = m_mid + m_half * tm;
                let q1_sq = omega * omega + rho * rho
                    - (mu2 * mu2 * omega * omega + nu * nu * rho * rho - m * m) / (mu2 * nu);
                let folded = 0.5 * a * omega * omega + m * m + 0.5 * q1_sq;
                inner += wm * m * m * quad::exp_sinhc(folded, d * omega * m);
            }
            total += w_omega * omega * m_half * inner;
        }
    }
    2.0 * PI / (mu2 * nu * rho) * total
}

/// Inner integral in the `mu2 -> 0` limit, where `|mu2 q1 - mu1 q2| = nu rho`
/// is constant over the inner integration and the angular integral closes to
/// a second `sinhc` factor.
fn j_inner_mu2_zero(
    rho: f64,
    a: f64,
    d: f64,
    nu: f64,
    cutoff: f64,
    base: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let (omegas, w_omegas) = quad::map_rule(&base.0, &base.1, 0.0, cutoff);
    let mut total = 0.0;
    for (&omega, &w) in omegas.iter().zip(w_omegas.iter()) {
        let folded = nu * nu * rho * rho + 0.5 * rho * rho + 0.5 * (a + 1.0) * omega * omega;
        total += w * omega * omega * quad::exp_sinhc2(folded, d * nu * rho * omega, omega * rho);
    }
    4.0 * PI * nu * rho * total
}

fn j_level(mu1: f64, mu2: f64, n_radial: usize, n_m: usize, cutoff: f64) -> Result<f64> {
    let nu = mu1 + mu2;
    if nu == 0.0 {
        return Ok(0.0);
    }
    let a = mu1 * mu1 + mu2 * mu2;
    let d = mu1 - mu2;
    let base = quad::gauss_legendre(n_radial)?;
    let m_rule = quad::gauss_legendre(n_m)?;
    let (rhos, w_rhos) = quad::map_rule(&base.0, &base.1, 0.0, cutoff);

    let contributions: Vec<f64> = rhos
        .par_iter()
        .zip(w_rhos.par_iter())
        .map(|(&rho, &w)| {
            let g = if mu2 < MU2_LIMIT {
                j_inner_mu2_zero(rho, a, d, nu, cutoff, &base)
            } else {
                j_inner(rho, mu2, a, d, nu, cutoff, &base, &m_rule)
            };
            w * rho * rho * g * g
        })
        .collect();
    Ok(4.0 / PI.powf(3.5) * contributions.iter().sum::<f64>())
}

/// The squared-inner-integral coefficient `J(mu1, mu2)`.
///
/// Golden values: `J(1/2, 1/2) = 1/4 + 3 sqrt(3)/(4 pi) = 0.663497` and
/// `J(1, 0) = 2 (1 + 1/sqrt(3) - sqrt(2)) = 0.32627`.
pub fn j_integral(mu1: f64, mu2: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    check_fraction("mu1", mu1)?;
    check_fraction("mu2", mu2)?;
    spec.validate()?;
    let mut n_radial = spec.radial_nodes;
    let mut n_m = spec.angular_nodes;
    let mut coarse = j_level(mu1, mu2, n_radial, n_m, spec.radial_cutoff)?;
    let mut refinements = 0;
    loop {
        n_radial *= 2;
        n_m *= 2;
        let fine = j_level(mu1, mu2, n_radial, n_m, spec.radial_cutoff)?;
        let abs_err = (fine - coarse).abs();
        refinements += 1;
        if abs_err <= spec.target_rel_err * fine.abs() {
            return Ok(Estimate::quadrature(fine, abs_err, true));
        }
        if refinements >= spec.max_refinements {
            return Ok(Estimate::quadrature(fine, abs_err, false));
        }
        coarse = fine;
    }
}

// ---------------------------------------------------------------------------
// L and N
// ---------------------------------------------------------------------------

/// Closed form `L(mu1, 1-mu1) = sqrt(2/pi) / sqrt(1 + (2 mu1 - 1)^2)`.
pub fn l_closed(mu1: f64) -> Result<Estimate> {
    check_fraction("mu1", mu1)?;
    let d = 2.0 * mu1 - 1.0;
    Ok(Estimate::closed_form(
        (2.0 / PI).sqrt() / (1.0 + d * d).sqrt(),
    ))
}

/// Closed form `N(mu1, 1-mu1)`; the removable singularity at `mu1 = 1/2` is
/// handled by its second-order series, `N = 3/4 (1 - d^2/4) + O(d^4)`.
pub fn n_closed(mu1: f64) -> Result<Estimate> {
    check_fraction("mu1", mu1)?;
    let d = 2.0 * mu1 - 1.0;
    let d_sq = d * d;
    let value = if d.abs() < 1e-4 {
        0.75 * (1.0 - 0.25 * d_sq)
    } else {
        let one_plus = 1.0 + d_sq;
        (one_plus.powf(1.5) - 1.0) / (2.0 * d_sq * one_plus.sqrt())
    };
    Ok(Estimate::closed_form(value))
}

/// Quadrature cross-check of `l_closed` through the radial reduction
///
/// ```text
/// L = 16 / (pi nu^3) int dQ int dP Q^2 P^3 e^(-a Q^2 - 2 P^2) sinhc(d Q P)^2.
/// ```
pub fn l_quad(mu1: f64, mu2: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    check_fraction("mu1", mu1)?;
    check_fraction("mu2", mu2)?;
    let nu = mu1 + mu2;
    if nu == 0.0 {
        return Ok(Estimate::quadrature(0.0, 0.0, true));
    }
    let a = mu1 * mu1 + mu2 * mu2;
    let d = mu1 - mu2;
    let cut = spec.radial_cutoff;
    let est = quad::integrate_radial_angular(
        |q, u| {
            let p = 0.5 * cut * (u + 1.0);
            let jac = 0.5 * cut;
            jac * q * q * p * p * p * quad::exp_sinhc_sq(a * q * q + 2.0 * p * p, d * q * p)
        },
        spec,
    )?;
    Ok(est.scaled(16.0 / (PI * nu * nu * nu)))
}

/// Quadrature cross-check of `n_closed`:
///
/// ```text
/// N = 16 / pi int dQ int dq Q^2 q^4 e^(-a Q^2 - 2 q^2) sinhc(d Q q)^2.
/// ```
pub fn n_quad(mu1: f64, mu2: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    check_fraction("mu1", mu1)?;
    check_fraction("mu2", mu2)?;
    let a = mu1 * mu1 + mu2 * mu2;
    let d = mu1 - mu2;
    let cut = spec.radial_cutoff;
    let est = quad::integrate_radial_angular(
        |bigq, u| {
            let q = 0.5 * cut * (u + 1.0);
            let jac = 0.5 * cut;
            let q4 = q * q * q * q;
            jac * bigq * bigq * q4 * quad::exp_sinhc_sq(a * bigq * bigq + 2.0 * q * q, d * bigq * q)
        },
        spec,
    )?;
    Ok(est.scaled(16.0 / PI))
}

// ---------------------------------------------------------------------------
// E
// ---------------------------------------------------------------------------

/// The entanglement coefficient `E(mu1) = 8 (L^2 + N - J(mu1, 1-mu1)
/// - J(1-mu1, mu1))`, assembled from the closed forms for `L`, `N` and two
/// `J` quadratures.
pub fn entanglement_coefficient(mu1: f64, spec: &QuadratureSpec) -> Result<CoeffResult> {
    check_fraction("mu1", mu1)?;
    let mu2 = 1.0 - mu1;
    let (j_fwd, j_rev) = rayon::join(
        || j_integral(mu1, mu2, spec),
        || j_integral(mu2, mu1, spec),
    );
    let j_fwd = j_fwd?;
    let j_rev = j_rev?;
    let l = l_closed(mu1)?;
    let n = n_closed(mu1)?;
    let value = 8.0 * (l.value * l.value + n.value - j_fwd.value - j_rev.value);
    let abs_err = 8.0 * (j_fwd.abs_err + j_rev.abs_err);
    let converged = j_fwd.converged && j_rev.converged;
    Ok(CoeffResult {
        mu1,
        e: Estimate::quadrature(value, abs_err, converged),
        j_fwd,
        j_rev,
        l,
        n,
    })
}

/// Evaluates `E` on a grid of mass fractions, in parallel; per-point domain
/// failures are reported in place without aborting the rest.
pub fn table(mu1_grid: &[f64], spec: &QuadratureSpec) -> Vec<Result<CoeffResult>> {
    mu1_grid
        .par_iter()
        .map(|&mu1| entanglement_coefficient(mu1, spec))
        .collect()
}

/// The standard tabulation grid: `mu1` from 0.5 to 1.0 in steps of 0.025
/// (21 points).
pub fn default_table_grid() -> Vec<f64> {
    // exact integer quotients so the abscissae equal the decimal literals
    (0..21).map(|i| (500 + 25 * i) as f64 / 1000.0).collect()
}

/// Uniform grid of `points` values covering `[lo, hi]`, for curve exports.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}
