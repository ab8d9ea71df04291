//! The purity of the post-scattering two-particle state, evaluated three
//! independent ways.
//!
//! 1. [`purity_formula`] — the closed leading-order law
//!    `P = 1 - (c0 sigma / hbar)^2 E(mu1)`.
//! 2. [`expansion_terms`] — the four second-order expansion terms computed
//!    by quadrature of their radial reductions; they assemble to the same
//!    coefficient, `E = -(P11 + P12 + P13 + P2)` up to sign bookkeeping
//!    (`P11 = -8 J_fwd`, `P12 = -8 J_rev`, `P13 = 8 L^2`, `P2 = 8 N` in the
//!    dimensionless convention).
//! 3. [`purity_mc`] — a direct Monte-Carlo evaluation of the full
//!    12-dimensional purity integral of the truncated-S outgoing state,
//!    with no small-`s` expansion beyond the truncation of S itself.
//!
//! The Monte-Carlo route importance-samples the four squared packet
//! Gaussians (each variable pair is drawn from the exact product density of
//! the incoming state), leaving the smooth ratio
//! `R = phi_out / phi_in` to be averaged:
//!
//! ```text
//! P = E[ R(q1, q2) conj(R(q1', q2)) R(q1', q2') conj(R(q1, q2')) ].
//! ```
//!
//! Applying the truncated S-matrix to a Gaussian needs only its l = 0 and
//! l = 1 angular projections on the relative-momentum sphere, which close
//! to `sinh`-type kernels evaluated per sample; no quadrature runs inside
//! the Monte-Carlo loop.

use serde::Serialize;

use crate::coeff;
use crate::quad::{self, Estimate, MCSpec, Method, QuadratureSpec};
use crate::smatrix::LowEnergySMatrix;
use crate::vec3;
use crate::{Error, Result};

/// Momentum spread ratios above this make the truncated S-matrix expansion
/// untrustworthy; results are still computed but carry a warning.
pub const S_EXPANSION_WARN: f64 = 0.3;

/// Inputs a purity value was computed at.
#[derive(Debug, Clone, Serialize)]
pub struct PurityParams {
    pub mu1: f64,
    pub c0: f64,
    pub sigma_over_hbar: f64,
    pub p0_over_hbar: [f64; 3],
}

/// A purity value with its error estimate and provenance.
#[derive(Debug, Clone, Serialize)]
pub struct PurityResult {
    pub value: f64,
    pub abs_err: f64,
    pub method: Method,
    pub params: PurityParams,
    /// Present when a documented guard fired (large deficit, large `s`).
    pub warning: Option<String>,
    /// Order of the neglected remainder, recorded for formula results.
    pub remainder_order: Option<String>,
}

/// Leading-order purity `1 - (c0 s)^2 E`, with the error of the coefficient
/// estimate propagated through the prefactor.
pub fn purity_formula(mu1: f64, c0: f64, s: f64, e_coeff: &Estimate) -> Result<PurityResult> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "sigma/hbar ratio must be positive, got {s}"
        )));
    }
    if !(0.0..=1.0).contains(&mu1) {
        return Err(Error::Domain(format!("mu1 must lie in [0, 1], got {mu1}")));
    }
    let prefactor = (c0 * s) * (c0 * s);
    let deficit = prefactor * e_coeff.value;
    let warning = (deficit > 0.1).then(|| {
        format!(
            "leading-order deficit (c0 s)^2 E = {deficit:.3} exceeds 0.1; \
             the expansion is no longer trustworthy here"
        )
    });
    Ok(PurityResult {
        value: 1.0 - deficit,
        abs_err: prefactor * e_coeff.abs_err,
        method: Method::ClosedForm,
        params: PurityParams {
            mu1,
            c0,
            sigma_over_hbar: s,
            p0_over_hbar: [0.0; 3],
        },
        warning,
        remainder_order: Some("O((sigma/hbar)^3) beyond the (c0 sigma/hbar)^2 term".into()),
    })
}

/// The four second-order expansion terms in the dimensionless convention
/// (units of `(c0 sigma/hbar)^2`), each from its own quadrature.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionTerms {
    /// `-8 J(mu1, 1-mu1)`.
    pub p11: Estimate,
    /// `-8 J(1-mu1, mu1)`.
    pub p12: Estimate,
    /// `+8 L^2`.
    pub p13: Estimate,
    /// `+8 N`.
    pub p2: Estimate,
}

impl ExpansionTerms {
    /// Reassembles the entanglement coefficient, `E = -(p11 + p12) + p13 + p2`
    /// ... all four terms simply add with their built-in signs.
    pub fn coefficient(&self) -> Estimate {
        let value = self.p11.value + self.p12.value + self.p13.value + self.p2.value;
        let abs_err =
            self.p11.abs_err + self.p12.abs_err + self.p13.abs_err + self.p2.abs_err;
        let converged = self.p11.converged
            && self.p12.converged
            && self.p13.converged
            && self.p2.converged;
        Estimate::quadrature(value, abs_err, converged)
    }
}

/// Computes the expansion terms by quadrature of their reduced forms.
pub fn expansion_terms(mu1: f64, spec: &QuadratureSpec) -> Result<ExpansionTerms> {
    if !(0.0..=1.0).contains(&mu1) {
        return Err(Error::Domain(format!("mu1 must lie in [0, 1], got {mu1}")));
    }
    let mu2 = 1.0 - mu1;
    let j_fwd = coeff::j_integral(mu1, mu2, spec)?;
    let j_rev = coeff::j_integral(mu2, mu1, spec)?;
    let l = coeff::l_quad(mu1, mu2, spec)?;
    let n = coeff::n_quad(mu1, mu2, spec)?;
    let l_sq = Estimate::quadrature(
        l.value * l.value,
        2.0 * l.value.abs() * l.abs_err,
        l.converged,
    );
    Ok(ExpansionTerms {
        p11: j_fwd.scaled(-8.0),
        p12: j_rev.scaled(-8.0),
        p13: l_sq.scaled(8.0),
        p2: n.scaled(8.0),
    })
}

/// Scattering data folded into the dimensionless sampling frame.
struct ScatterFrame {
    mu1: f64,
    mu2: f64,
    /// `c0 sigma / hbar`.
    c0s: f64,
    /// Cartesian `Y1 (sigma/hbar)^2`.
    y1s2: [f64; 3],
    /// `p0 / sigma`.
    q0: [f64; 3],
}

impl ScatterFrame {
    /// `phi_out / phi_in` at dimensionless momenta `(q1, q2)`.
    ///
    /// At fixed centre-of-mass momentum and relative radius the incoming
    /// Gaussian restricted to the relative sphere is `A exp(-w . nu)` with
    /// `w = |q| b`, `b = (mu1 - mu2) q_cm - 2 q0`; the truncated S-matrix
    /// only needs its l = 0 projection `A sinhc(|w|)` and l = 1 projection
    /// `-A (c . w_hat) j(|w|)` against the anisotropy coefficients, so the
    /// ratio closes over elementary functions of the sample.
    fn ratio(&self, q1: [f64; 3], q2: [f64; 3]) -> (f64, f64) {
        let q_cm = vec3::add(q1, q2);
        let q = vec3::sub(vec3::scale(self.mu2, q1), vec3::scale(self.mu1, q2));
        let q_norm = vec3::norm(q);
        if q_norm == 0.0 {
            return (1.0, 0.0);
        }
        let b = vec3::sub(
            vec3::scale(self.mu1 - self.mu2, q_cm),
            vec3::scale(2.0, self.q0),
        );
        let w_norm = q_norm * vec3::norm(b);
        let w_dot_nu = vec3::dot(b, q);
        let shc = quad::sinhc(w_norm);
        let kappa = self.c0s * q_norm;

        // -2 i kappa sinhc - k^2 (2 c0^2 sinhc - sqrt3 (c.w_hat) j - sqrt3 sinhc (c.nu))
        let mut re = -2.0 * kappa * kappa * shc;
        let im = -2.0 * kappa * shc;
        if self.y1s2 != [0.0; 3] {
            let sqrt3 = 3.0_f64.sqrt();
            let c_dot_b = vec3::dot(self.y1s2, b);
            let c_dot_q = vec3::dot(self.y1s2, q);
            re += sqrt3 * q_norm * q_norm * q_norm * c_dot_b * quad::jc(w_norm)
                + sqrt3 * q_norm * c_dot_q * shc;
        }
        let boost = w_dot_nu.exp();
        (1.0 + boost * re, boost * im)
    }
}

fn mc_params(mu1: f64, sm: &LowEnergySMatrix, s: f64, p0_over_hbar: [f64; 3]) -> Result<(ScatterFrame, PurityParams, Option<String>)> {
    if !(0.0..=1.0).contains(&mu1) {
        return Err(Error::Domain(format!("mu1 must lie in [0, 1], got {mu1}")));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "sigma/hbar ratio must be positive, got {s}"
        )));
    }
    let warning = (s > S_EXPANSION_WARN).then(|| {
        format!(
            "sigma/hbar = {s} exceeds {S_EXPANSION_WARN}; the truncated \
             S-matrix is not a controlled approximation at this spread"
        )
    });
    let y1 = sm.y1();
    let frame = ScatterFrame {
        mu1,
        mu2: 1.0 - mu1,
        c0s: sm.c0() * s,
        y1s2: [y1[0] * s * s, y1[1] * s * s, y1[2] * s * s],
        q0: vec3::scale(1.0 / s, p0_over_hbar),
    };
    let params = PurityParams {
        mu1,
        c0: sm.c0(),
        sigma_over_hbar: s,
        p0_over_hbar,
    };
    Ok((frame, params, warning))
}

/// Monte-Carlo evaluation of the purity of the truncated-S outgoing state.
///
/// Draws `(q1, q1', q2, q2')` from the product of the four squared packet
/// Gaussians (12 standard-normal dimensions) and averages the four-factor
/// ratio product. `abs_err` is the Monte-Carlo standard error;
/// bit-reproducible for a fixed `MCSpec` at any worker count.
pub fn purity_mc(
    mu1: f64,
    sm: &LowEnergySMatrix,
    s: f64,
    p0_over_hbar: [f64; 3],
    mc: &MCSpec,
) -> Result<PurityResult> {
    let (frame, params, warning) = mc_params(mu1, sm, s, p0_over_hbar)?;
    let q0 = frame.q0;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let est = quad::mc_gaussian(
        |z: &[f64]| {
            let q1 = [
                q0[0] + inv_sqrt2 * z[0],
                q0[1] + inv_sqrt2 * z[1],
                q0[2] + inv_sqrt2 * z[2],
            ];
            let q1p = [
                q0[0] + inv_sqrt2 * z[3],
                q0[1] + inv_sqrt2 * z[4],
                q0[2] + inv_sqrt2 * z[5],
            ];
            let q2 = [
                -q0[0] + inv_sqrt2 * z[6],
                -q0[1] + inv_sqrt2 * z[7],
                -q0[2] + inv_sqrt2 * z[8],
            ];
            let q2p = [
                -q0[0] + inv_sqrt2 * z[9],
                -q0[1] + inv_sqrt2 * z[10],
                -q0[2] + inv_sqrt2 * z[11],
            ];
            let (a_re, a_im) = frame.ratio(q1, q2);
            let (b_re, b_im) = frame.ratio(q1p, q2);
            let (c_re, c_im) = frame.ratio(q1p, q2p);
            let (d_re, d_im) = frame.ratio(q1, q2p);
            // Re(a * conj(b) * c * conj(d))
            let ab_re = a_re * b_re + a_im * b_im;
            let ab_im = a_im * b_re - a_re * b_im;
            let cd_re = c_re * d_re + c_im * d_im;
            let cd_im = c_im * d_re - c_re * d_im;
            ab_re * cd_re - ab_im * cd_im
        },
        12,
        mc,
    )?;
    Ok(PurityResult {
        value: est.value,
        abs_err: est.abs_err,
        method: Method::MonteCarlo,
        params,
        warning,
        remainder_order: None,
    })
}

/// A scan of the purity over mean relative momenta.
#[derive(Debug, Clone, Serialize)]
pub struct MomentumScan {
    /// Purity at `p0 = 0`, same seed as every scan entry.
    pub baseline: PurityResult,
    /// One purity per requested `|p0/hbar|`, in input order.
    pub results: Vec<PurityResult>,
    /// Least-squares slope of `log |P(p0) - P(0)|` against `log |p0/hbar|`
    /// over the entries with a resolvable difference; `None` when fewer
    /// than two points resolve.
    pub exponent: Option<f64>,
}

/// Scans the purity over `|p0/hbar|` magnitudes (along the z axis) and fits
/// the decay exponent of `|P(p0) - P(0)|`.
pub fn p0_scan(
    mu1: f64,
    sm: &LowEnergySMatrix,
    s: f64,
    p0_magnitudes: &[f64],
    mc: &MCSpec,
) -> Result<MomentumScan> {
    if p0_magnitudes.iter().any(|&m| m < 0.0) {
        return Err(Error::Domain("p0 magnitudes must be >= 0".into()));
    }
    let baseline = purity_mc(mu1, sm, s, [0.0; 3], mc)?;
    let mut results = Vec::with_capacity(p0_magnitudes.len());
    for &mag in p0_magnitudes {
        results.push(purity_mc(mu1, sm, s, [0.0, 0.0, mag], mc)?);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for res in &results {
        let mag = vec3::norm(res.params.p0_over_hbar);
        let diff = (res.value - baseline.value).abs();
        if mag > 0.0 && diff > 0.0 {
            xs.push(mag.ln());
            ys.push(diff.ln());
        }
    }
    let exponent = fit_slope(&xs, &ys);
    Ok(MomentumScan {
        baseline,
        results,
        exponent,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smatrix;
    use approx::assert_relative_eq;

    fn quick_mc(samples: u64, seed: u64) -> MCSpec {
        MCSpec {
            samples,
            seed,
            chunk_size: 1 << 14,
        }
    }

    #[test]
    fn formula_arithmetic() {
        let e = Estimate::quadrature(0.4770, 1e-6, true);
        let p = purity_formula(0.5, 1.0, 0.05, &e).unwrap();
        assert_relative_eq!(p.value, 0.99880750, max_relative = 1e-9);
        assert!(p.warning.is_none());
        assert!(p.remainder_order.is_some());

        let e1 = Estimate::quadrature(2.0287, 1e-6, true);
        let p1 = purity_formula(1.0, 1.0, 0.05, &e1).unwrap();
        assert_relative_eq!(p1.value, 0.99492825, max_relative = 1e-9);

        // no interaction: exactly one
        let p_free = purity_formula(0.5, 0.0, 0.05, &e).unwrap();
        assert_eq!(p_free.value, 1.0);
    }

    #[test]
    fn formula_warns_outside_leading_order() {
        let e = Estimate::quadrature(2.0, 0.0, true);
        let p = purity_formula(0.5, 1.0, 0.5, &e).unwrap();
        assert!(p.warning.is_some());
    }

    #[test]
    fn expansion_terms_equal_mass_golden_values() {
        let spec = QuadratureSpec::default();
        let terms = expansion_terms(0.5, &spec).unwrap();
        // P13 = 8 (2/pi), P2 = 8 (3/4) = 6, P11 = P12 = -8 J(1/2,1/2)
        assert_relative_eq!(
            terms.p13.value,
            8.0 * 2.0 / std::f64::consts::PI,
            epsilon = 1e-7
        );
        assert_relative_eq!(terms.p2.value, 6.0, epsilon = 1e-7);
        assert_relative_eq!(terms.p11.value, terms.p12.value, epsilon = 1e-9);
        assert_relative_eq!(terms.p11.value, -8.0 * 0.663497, epsilon = 1e-4);
    }

    #[test]
    fn expansion_terms_assemble_to_the_coefficient() {
        let spec = QuadratureSpec::default();
        for &mu1 in &[0.5, 0.68] {
            let terms = expansion_terms(mu1, &spec).unwrap();
            let assembled = terms.coefficient();
            let reference = coeff::entanglement_coefficient(mu1, &spec).unwrap();
            assert!(
                (assembled.value - reference.e.value).abs()
                    <= assembled.abs_err + reference.e.abs_err + 1e-9
            );
        }
    }

    #[test]
    fn identity_smatrix_gives_exact_unit_purity() {
        let sm = smatrix::build(0.0, [0.0; 3], 1).unwrap();
        let p = purity_mc(0.5, &sm, 0.05, [0.0; 3], &quick_mc(50_000, 3)).unwrap();
        assert_eq!(p.value, 1.0);
        assert_eq!(p.abs_err, 0.0);
    }

    #[test]
    fn mc_agrees_with_formula_at_leading_order() {
        // 1e-4 slack covers the O(s^3) remainder of the truncated state
        let spec = QuadratureSpec::default();
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        for &mu1 in &[0.5, 0.75] {
            let e = coeff::entanglement_coefficient(mu1, &spec).unwrap();
            let formula = purity_formula(mu1, 1.0, 0.05, &e.e).unwrap();
            let mc = purity_mc(mu1, &sm, 0.05, [0.0; 3], &quick_mc(2_000_000, 12345)).unwrap();
            let slack = 3.0 * mc.abs_err + 1e-4;
            assert!(
                (mc.value - formula.value).abs() < slack,
                "mu1 = {mu1}: mc {} vs formula {} (slack {slack})",
                mc.value,
                formula.value
            );
        }
    }

    #[test]
    fn purity_stays_in_physical_range() {
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let p = purity_mc(0.75, &sm, 0.05, [0.0; 3], &quick_mc(500_000, 9)).unwrap();
        assert!(p.value > 0.0);
        assert!(p.value <= 1.0 + p.abs_err);
    }

    #[test]
    fn exchange_symmetry_of_the_masses() {
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let a = purity_mc(0.3, &sm, 0.05, [0.0; 3], &quick_mc(1_000_000, 77)).unwrap();
        let b = purity_mc(0.7, &sm, 0.05, [0.0; 3], &quick_mc(1_000_000, 77)).unwrap();
        assert!(
            (a.value - b.value).abs() < 3.0 * (a.abs_err + b.abs_err) + 1e-5,
            "P(0.3) = {}, P(0.7) = {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn warning_raised_for_large_spread() {
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let p = purity_mc(0.5, &sm, 0.5, [0.0; 3], &quick_mc(10_000, 5)).unwrap();
        assert!(p.warning.is_some());
    }

    #[test]
    fn scan_baseline_is_bit_identical_to_direct_call() {
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let mc = quick_mc(200_000, 31);
        let scan = p0_scan(0.5, &sm, 0.05, &[0.0, 1e-3], &mc).unwrap();
        let direct = purity_mc(0.5, &sm, 0.05, [0.0; 3], &mc).unwrap();
        assert_eq!(scan.baseline.value.to_bits(), direct.value.to_bits());
        // a zero entry in the magnitude list reproduces the baseline exactly
        assert_eq!(scan.results[0].value.to_bits(), direct.value.to_bits());
    }

    #[test]
    fn scan_purities_stay_in_the_deficit_envelope() {
        let spec = QuadratureSpec::default();
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let s = 0.05;
        let e = coeff::entanglement_coefficient(0.5, &spec).unwrap().e.value;
        let scan = p0_scan(
            0.5,
            &sm,
            s,
            &[0.01 * s, 0.04 * s],
            &quick_mc(400_000, 2024),
        )
        .unwrap();
        let floor = 1.0 - 2.0 * s * s * e;
        for res in scan.results.iter().chain(std::iter::once(&scan.baseline)) {
            assert!(res.value >= floor && res.value <= 1.0 + 3.0 * res.abs_err);
        }
    }

    #[test]
    fn slope_fit_recovers_known_exponent() {
        let xs: Vec<f64> = [0.01f64, 0.02, 0.04].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [0.01f64, 0.02, 0.04]
            .iter()
            .map(|x| (3.0 * x * x).ln())
            .collect();
        let slope = fit_slope(&xs, &ys).unwrap();
        assert_relative_eq!(slope, 2.0, max_relative = 1e-12);
        assert!(fit_slope(&xs[..1], &ys[..1]).is_none());
    }

    #[test]
    fn domain_checks() {
        let sm = smatrix::build(1.0, [0.0; 3], 1).unwrap();
        let e = Estimate::closed_form(0.5);
        assert!(purity_formula(1.5, 1.0, 0.05, &e).is_err());
        assert!(purity_formula(0.5, 1.0, 0.0, &e).is_err());
        assert!(purity_mc(0.5, &sm, -0.1, [0.0; 3], &quick_mc(10, 1)).is_err());
        assert!(p0_scan(0.5, &sm, 0.05, &[-1.0], &quick_mc(10, 1)).is_err());
    }
}
