//! Deterministic quadrature engines and a seedable Gaussian-measure
//! Monte-Carlo integrator.
//!
//! Three engines cover every integral in the crate:
//!
//! * [`gauss_legendre`] / [`gauss_hermite`] — classical rules generated by
//!   the Golub-Welsch eigenvalue method,
//! * [`integrate_radial_angular`] — nested `(0, cutoff] x [-1, 1]`
//!   quadrature with two-level error estimation and refinement,
//! * [`mc_gaussian`] — expectation over a standard normal in `dims`
//!   dimensions, bit-reproducible for a fixed `(seed, samples, chunk_size)`
//!   regardless of how many worker threads execute it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Largest node count for which rule generation is accepted.
pub const MAX_GAUSS_NODES: usize = 1024;

/// Controls for the deterministic quadrature engines.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureSpec {
    /// Nodes per radial (mapped `[0, radial_cutoff]`) direction.
    pub radial_nodes: usize,
    /// Nodes per angular (`[-1, 1]`) direction.
    pub angular_nodes: usize,
    /// Upper limit of mapped radial integrals, in the dimensionless units of
    /// the integrand. Gaussian-decaying tails beyond 8 carry mass below
    /// 1e-27 and are dropped.
    pub radial_cutoff: f64,
    /// Relative error target for the two-level refinement loop.
    pub target_rel_err: f64,
    /// How many node doublings are attempted before giving up and returning
    /// the achieved error with `converged = false`.
    pub max_refinements: usize,
    /// Nodes per axis for tensor Gauss-Hermite integrals over all of R^n.
    pub hermite_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            angular_nodes: 32,
            radial_cutoff: 8.0,
            target_rel_err: 1e-9,
            max_refinements: 3,
            hermite_nodes: 12,
        }
    }
}

impl QuadratureSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.radial_nodes < 2 || self.angular_nodes < 2 {
            return Err(Error::Domain("quadrature node counts must be >= 2".into()));
        }
        if !(self.radial_cutoff > 0.0) {
            return Err(Error::Domain("radial_cutoff must be positive".into()));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(Error::Domain("target_rel_err must be positive".into()));
        }
        if self.hermite_nodes < 2 {
            return Err(Error::Domain("hermite_nodes must be >= 2".into()));
        }
        Ok(())
    }
}

/// Controls for the Monte-Carlo engine.
#[derive(Debug, Clone, Serialize)]
pub struct MCSpec {
    /// Total number of samples.
    pub samples: u64,
    /// Base seed; every chunk derives its own independent stream from it.
    pub seed: u64,
    /// Samples per chunk. Chunks are the unit of deterministic parallel
    /// partitioning: results depend on the chunk size but never on the
    /// number of workers.
    pub chunk_size: u64,
}

impl Default for MCSpec {
    fn default() -> Self {
        Self {
            samples: 10_000_000,
            seed: 0x5ca7_7e2e,
            chunk_size: 1 << 16,
        }
    }
}

impl MCSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Domain("samples must be >= 1".into()));
        }
        if self.chunk_size < 1 {
            return Err(Error::Domain("chunk_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// How a numeric estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

/// A value paired with an error estimate and the method that produced it.
///
/// Closed forms carry `abs_err = 0`. Quadrature errors come from comparing
/// two refinement levels; Monte-Carlo errors are one sample standard error.
/// `converged` is false when a refinement loop hit `max_refinements` without
/// meeting its target (the achieved error is still reported).
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
    pub method: Method,
    pub converged: bool,
}

impl Estimate {
    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            abs_err: 0.0,
            method: Method::ClosedForm,
            converged: true,
        }
    }

    pub fn quadrature(value: f64, abs_err: f64, converged: bool) -> Self {
        Self {
            value,
            abs_err,
            method: Method::Quadrature,
            converged,
        }
    }

    pub fn monte_carlo(value: f64, std_err: f64) -> Self {
        Self {
            value,
            abs_err: std_err,
            method: Method::MonteCarlo,
            converged: true,
        }
    }

    /// Scales value and error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: factor * self.value,
            abs_err: factor.abs() * self.abs_err,
            ..self
        }
    }
}

// ---------------------------------------------------------------------------
// Gauss rules (Golub-Welsch)
// ---------------------------------------------------------------------------

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn rule_cache() -> &'static Mutex<HashMap<(u8, usize), Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights from the eigen-decomposition of the Jacobi matrix with
/// off-diagonals `beta`, scaled so the weights sum to `mu0`.
fn golub_welsch(beta: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = beta.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in beta.iter().enumerate() {
        m[(i + 1, i)] = b;
        m[(i, i + 1)] = b;
    }
    let eigen = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(|| {
        Error::Domain(format!("Gauss rule generation failed to converge for n = {n}"))
    })?;
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.row(0).iter())
        .map(|(&x, &v0)| (x, mu0 * v0 * v0))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

fn cached_rule(kind: u8, n: usize, make: impl FnOnce() -> Result<(Vec<f64>, Vec<f64>)>) -> Result<Rule> {
    if let Some(rule) = rule_cache().lock().unwrap().get(&(kind, n)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(make()?);
    rule_cache()
        .lock()
        .unwrap()
        .entry((kind, n))
        .or_insert_with(|| rule.clone());
    Ok(rule)
}

fn legendre_rule(n: usize) -> Result<Rule> {
    cached_rule(0, n, || {
        let beta: Vec<f64> = (1..n)
            .map(|i| {
                let i = i as f64;
                i / (4.0 * i * i - 1.0).sqrt()
            })
            .collect();
        golub_welsch(&beta, 2.0)
    })
}

fn hermite_rule(n: usize) -> Result<Rule> {
    cached_rule(1, n, || {
        let beta: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
        golub_welsch(&beta, std::f64::consts::PI.sqrt())
    })
}

fn check_node_count(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("Gauss rule needs n >= 2, got {n}")));
    }
    if n > MAX_GAUSS_NODES {
        return Err(Error::Domain(format!(
            "n = {n} is too large for stable rule generation (max {MAX_GAUSS_NODES})"
        )));
    }
    Ok(())
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`: exact for polynomials of
/// degree `<= 2n-1`, positive weights summing to 2.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_node_count(n)?;
    let rule = legendre_rule(n)?;
    Ok((rule.0.clone(), rule.1.clone()))
}

/// `n`-point Gauss-Hermite rule for the weight `exp(-x^2)` on the real line:
/// `sum_i w_i f(x_i) ~ int f(x) exp(-x^2) dx`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_node_count(n)?;
    let rule = hermite_rule(n)?;
    Ok((rule.0.clone(), rule.1.clone()))
}

/// Maps a `[-1, 1]` rule to `[a, b]`.
pub fn map_rule(nodes: &[f64], weights: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        nodes.iter().map(|&x| mid + half * x).collect(),
        weights.iter().map(|&w| half * w).collect(),
    )
}

// ---------------------------------------------------------------------------
// Nested radial-angular quadrature
// ---------------------------------------------------------------------------

fn radial_angular_level<F>(f: &F, nr: usize, na: usize, cutoff: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let radial = legendre_rule(nr)?;
    let angular = legendre_rule(na)?;
    let (rs, wr) = map_rule(&radial.0, &radial.1, 0.0, cutoff);
    let mut total = 0.0;
    for (&r, &wrr) in rs.iter().zip(wr.iter()) {
        let mut inner = 0.0;
        for (&u, &wu) in angular.0.iter().zip(angular.1.iter()) {
            inner += wu * f(r, u);
        }
        total += wrr * inner;
    }
    Ok(total)
}

/// Evaluates `int_0^inf dr int_{-1}^{1} du f(r, u)` with the radial axis
/// truncated at `spec.radial_cutoff`.
///
/// The error estimate compares two refinement levels (node counts doubled);
/// refinement continues until `target_rel_err` is met or `max_refinements`
/// doublings have been spent, in which case the achieved error is returned
/// with `converged = false`.
pub fn integrate_radial_angular<F>(f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
{
    spec.validate()?;
    let mut nr = spec.radial_nodes;
    let mut na = spec.angular_nodes;
    let mut coarse = radial_angular_level(&f, nr, na, spec.radial_cutoff)?;
    let mut refinements = 0;
    loop {
        nr *= 2;
        na *= 2;
        let fine = radial_angular_level(&f, nr, na, spec.radial_cutoff)?;
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
// Tensor Gauss-Hermite over R^dims
// ---------------------------------------------------------------------------

/// Evaluates `int_{R^dims} g(x) dx` for an integrand with Gaussian decay by
/// a tensor Gauss-Hermite rule with `nodes` points per axis.
///
/// Internally the engine computes `sum W * g(x) * exp(|x|^2)`; `g` must decay
/// at least as fast as `exp(-|x|^2)` towards the node hull for the product
/// to stay bounded.
pub fn integrate_gauss_hermite<F>(g: F, dims: usize, nodes: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dims < 1 {
        return Err(Error::Domain("dims must be >= 1".into()));
    }
    check_node_count(nodes)?;
    let rule = hermite_rule(nodes)?;
    let (xs, ws) = (&rule.0, &rule.1);
    let log_ws: Vec<f64> = ws.iter().map(|&w| w.ln()).collect();

    // Parallel over the first axis; each sub-sum walks the remaining axes
    // with a fixed odometer order, then the per-slice results are reduced
    // sequentially so the total is independent of the worker count.
    let slices: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i0| {
            let mut point = vec![0.0; dims];
            let mut idx = vec![0usize; dims];
            point[0] = xs[i0];
            let mut acc = 0.0;
            loop {
                for d in 1..dims {
                    point[d] = xs[idx[d]];
                }
                let mut log_w = log_ws[i0];
                let mut xsq = xs[i0] * xs[i0];
                for d in 1..dims {
                    log_w += log_ws[idx[d]];
                    xsq += point[d] * point[d];
                }
                acc += (log_w + xsq).exp() * g(&point);
                // odometer over axes 1..dims
                let mut d = 1;
                loop {
                    if d >= dims {
                        return acc;
                    }
                    idx[d] += 1;
                    if idx[d] < nodes {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
            }
        })
        .collect();
    Ok(slices.iter().sum())
}

// ---------------------------------------------------------------------------
// Monte-Carlo over a standard normal
// ---------------------------------------------------------------------------

/// Estimates `E[f(Z)]` for `Z ~ N(0, I_dims)`.
///
/// Sampling is partitioned into chunks of `spec.chunk_size`; chunk `c` draws
/// from an independent ChaCha stream derived from `(seed, c)`, and chunk
/// results are combined in index order. The estimate is therefore
/// bit-identical across runs and across any number of worker threads.
///
/// `abs_err` is the sample standard error. A non-finite integrand value
/// aborts the whole integration with the offending global sample index.
pub fn mc_gaussian<F>(f: F, dims: usize, spec: &MCSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    if dims < 1 {
        return Err(Error::Domain("dims must be >= 1".into()));
    }
    let n_chunks = spec.samples.div_ceil(spec.chunk_size);
    let partials: Result<Vec<(f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * spec.chunk_size;
            let len = spec.chunk_size.min(spec.samples - start);
            let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
            rng.set_stream(chunk);
            let mut point = vec![0.0; dims];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in 0..len {
                for x in point.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                let v = f(&point);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { index: start + i });
                }
                sum += v;
                sum_sq += v * v;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let partials = partials?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (s, ss) in partials {
        sum += s;
        sum_sq += ss;
    }
    let n = spec.samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(Estimate::monte_carlo(mean, (var / n).sqrt()))
}

// ---------------------------------------------------------------------------
// Stable sinh-based kernels shared by the coefficient and purity integrands
// ---------------------------------------------------------------------------

/// `sinh(x)/x`, by a 4-term Taylor series for `|x| < 1e-4`.
#[inline]
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0))
    } else {
        x.sinh() / x
    }
}

/// `exp(-e) * sinh(x)/x`. Direct evaluation below `|x| = 1` (no overflow,
/// and the library `sinh` carries no cancellation); the folded exponential
/// difference above, where the terms are well separated and folding keeps
/// large `x` from overflowing.
#[inline]
pub(crate) fn exp_sinhc(e: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (-e).exp() * sinhc(x)
    } else {
        ((x - e).exp() - (-x - e).exp()) / (2.0 * x)
    }
}

/// `exp(-e) * (sinh(x)/x)^2`, same branch structure as [`exp_sinhc`].
#[inline]
pub(crate) fn exp_sinhc_sq(e: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        let s = sinhc(x);
        (-e).exp() * s * s
    } else {
        ((2.0 * x - e).exp() - 2.0 * (-e).exp() + (-2.0 * x - e).exp()) / (4.0 * x * x)
    }
}

/// `exp(-e) * sinhc(x) * sinhc(y)`.
#[inline]
pub(crate) fn exp_sinhc2(e: f64, x: f64, y: f64) -> f64 {
    if x.abs() < 1e-4 {
        sinhc(x) * exp_sinhc(e, y)
    } else if y.abs() < 1e-4 {
        sinhc(y) * exp_sinhc(e, x)
    } else if x.abs().max(y.abs()) < 300.0 {
        (-e).exp() * sinhc(x) * sinhc(y)
    } else {
        ((x + y - e).exp() - (x - y - e).exp() - (-x + y - e).exp() + (-x - y - e).exp())
            / (4.0 * x * y)
    }
}

/// `(x cosh x - sinh x) / x^3`, the kernel of the l = 1 angular projection;
/// tends to 1/3 as `x -> 0`.
#[inline]
pub(crate) fn jc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 / 3.0 + x2 / 30.0 + x2 * x2 / 840.0
    } else {
        (x * x.cosh() - x.sinh()) / (x * x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_point_rule_is_textbook() {
        let (x, w) = gauss_legendre(2).unwrap();
        let inv_sqrt3 = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(x[0], -inv_sqrt3, max_relative = 1e-14);
        assert_relative_eq!(x[1], inv_sqrt3, max_relative = 1e-14);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn three_point_rule_integrates_quartic_exactly() {
        let (x, w) = gauss_legendre(3).unwrap();
        let integral: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(4)).sum();
        assert_relative_eq!(integral, 2.0 / 5.0, max_relative = 1e-14);
    }

    #[test]
    fn degree_exactness_up_to_2n_minus_1() {
        for n in 2..=64usize {
            let (x, w) = gauss_legendre(n).unwrap();
            assert!(w.iter().all(|&w| w > 0.0));
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-12);
            for k in (0..2 * n).step_by(2) {
                let integral: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(k as i32)).sum();
                let exact = 2.0 / (k as f64 + 1.0);
                assert_relative_eq!(integral, exact, max_relative = 1e-11);
            }
            // odd monomials vanish by symmetry of the exact integral
            let odd: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(2 * (n as i32) - 1)).sum();
            assert!(odd.abs() < 1e-12);
        }
    }

    #[test]
    fn node_count_limits() {
        assert!(gauss_legendre(1).is_err());
        assert!(gauss_legendre(MAX_GAUSS_NODES + 1).is_err());
    }

    #[test]
    fn mapped_rule_reproduces_gaussian_halfline_integral() {
        // int_0^inf exp(-a x^2) dx = sqrt(pi/a)/2
        for a in [1.0f64, 0.25, 3.0] {
            let (x, w) = gauss_legendre(80).unwrap();
            let cutoff = 30.0 / a.sqrt().max(1.0);
            let (xs, ws) = map_rule(&x, &w, 0.0, cutoff);
            let got: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (-a * x * x).exp()).sum();
            assert_relative_eq!(got, 0.5 * (PI / a).sqrt(), max_relative = 1e-10);
        }
    }

    #[test]
    fn radial_angular_gaussian_second_moment() {
        // f = r^2 exp(-r^2), u-independent: value is 2 * sqrt(pi)/4
        let est = integrate_radial_angular(|r, _| r * r * (-r * r).exp(), &QuadratureSpec::default())
            .unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.value, 2.0 * PI.sqrt() / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn radial_angular_shifted_gaussian_matches_erf_form() {
        // int_0^inf exp(-a x^2 - 2 b x) dx = sqrt(pi/a)/2 exp(b^2/a) (1 - erf(b/sqrt(a)))
        let (a, b) = (1.0, 1.0);
        let est = integrate_radial_angular(
            |r, _| (-a * r * r - 2.0 * b * r).exp(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let exact = 2.0 * (0.5 * (PI / a).sqrt() * (b * b / a).exp() * (1.0 - statrs::function::erf::erf(b / a.sqrt())));
        assert_relative_eq!(est.value, exact, epsilon = 1e-10);
    }

    #[test]
    fn radial_angular_zero_integrand() {
        let est = integrate_radial_angular(|_, _| 0.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.abs_err, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn appendix_gaussian_oracles() {
        // The five base integrals every reduced form rests on, all within
        // 1e-9 relative of their closed values.
        let erf = statrs::function::erf::erf;
        let (x, w) = gauss_legendre(120).unwrap();

        // int_0^inf e^{-a x^2} dx and int_0^inf x^2 e^{-a x^2} dx
        let a = 1.7;
        let (xs, ws) = map_rule(&x, &w, 0.0, 12.0);
        let i1: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (-a * x * x).exp()).sum();
        assert_relative_eq!(i1, 0.5 * (PI / a).sqrt(), max_relative = 1e-9);
        let i3: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * x * x * (-a * x * x).exp()).sum();
        assert_relative_eq!(i3, 0.25 / a * (PI / a).sqrt(), max_relative = 1e-9);

        // int_{-inf}^{inf} e^{-a x^2 - 2 b x} dx = sqrt(pi/a) e^{b^2/a}
        let b = 0.8;
        let (xf, wf) = map_rule(&x, &w, -12.0, 12.0);
        let i4: f64 = xf.iter().zip(&wf).map(|(&x, &w)| w * (-a * x * x - 2.0 * b * x).exp()).sum();
        assert_relative_eq!(i4, (PI / a).sqrt() * (b * b / a).exp(), max_relative = 1e-9);

        // half-line variant with the erf closed form
        let i5: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (-a * x * x - 2.0 * b * x).exp()).sum();
        let exact5 = 0.5 * (PI / a).sqrt() * (b * b / a).exp() * (1.0 - erf(b / a.sqrt()));
        assert_relative_eq!(i5, exact5, max_relative = 1e-9);

        // erf(z)^2 = 1 - (4/pi) int_0^1 exp(-z^2 (y^2+1)) / (y^2+1) dy
        let z = 0.9;
        let (xu, wu) = map_rule(&x, &w, 0.0, 1.0);
        let i8: f64 = xu
            .iter()
            .zip(&wu)
            .map(|(&y, &w)| w * (-z * z * (y * y + 1.0)).exp() / (y * y + 1.0))
            .sum();
        assert_relative_eq!(erf(z) * erf(z), 1.0 - 4.0 / PI * i8, max_relative = 1e-9);
    }

    #[test]
    fn hermite_rule_second_moment() {
        let (x, w) = gauss_hermite(20).unwrap();
        let got: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x * x).sum();
        assert_relative_eq!(got, PI.sqrt() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn tensor_hermite_normalized_gaussian() {
        // int (pi)^{-3/2} exp(-|x|^2) dx = 1 over R^3
        let v = integrate_gauss_hermite(
            |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() / PI.powf(1.5),
            3,
            10,
        )
        .unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    fn mc_spec(samples: u64, seed: u64) -> MCSpec {
        MCSpec {
            samples,
            seed,
            chunk_size: 1 << 14,
        }
    }

    #[test]
    fn mc_constant_has_zero_error() {
        let est = mc_gaussian(|_| 1.0, 3, &mc_spec(100_000, 7)).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.abs_err, 0.0);
    }

    #[test]
    fn mc_normal_second_moment() {
        let est = mc_gaussian(|z| z[0] * z[0], 3, &mc_spec(400_000, 11)).unwrap();
        assert!((est.value - 1.0).abs() < 3.0 * est.abs_err);
    }

    #[test]
    fn mc_chi_distribution_mean() {
        // E|Z| for Z ~ N(0, I_3) is 2 sqrt(2/pi)
        let est = mc_gaussian(
            |z| (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt(),
            3,
            &mc_spec(400_000, 13),
        )
        .unwrap();
        let exact = 2.0 * (2.0 / PI).sqrt();
        assert!((est.value - exact).abs() < 3.0 * est.abs_err);
    }

    #[test]
    fn mc_is_bit_reproducible_across_worker_counts() {
        let f = |z: &[f64]| (z[0] + 0.3 * z[1]).tanh() * (-0.1 * z[2]).exp();
        let spec = mc_spec(200_000, 42);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| mc_gaussian(f, 3, &spec).unwrap())
        };
        let single = run(1);
        let quad_workers = run(4);
        assert_eq!(single.value.to_bits(), quad_workers.value.to_bits());
        assert_eq!(single.abs_err.to_bits(), quad_workers.abs_err.to_bits());
    }

    #[test]
    fn mc_error_scales_like_inverse_sqrt_samples() {
        let f = |z: &[f64]| (z[0] * z[1]).sin() + z[2];
        let small = mc_gaussian(f, 3, &mc_spec(20_000, 3)).unwrap();
        let large = mc_gaussian(f, 3, &mc_spec(2_000_000, 3)).unwrap();
        let ratio = small.abs_err / large.abs_err;
        assert!(ratio > 5.0 && ratio < 20.0, "ratio = {ratio}");
    }

    #[test]
    fn mc_rejects_non_finite_samples() {
        let err = mc_gaussian(|z| 1.0 / (z[0] - z[0]), 1, &mc_spec(100, 1)).unwrap_err();
        match err {
            Error::NonFiniteSample { index } => assert_eq!(index, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sinh_kernels_match_naive_forms() {
        for &x in &[1e-6, 1e-3, 0.5, 3.0, 40.0] {
            assert_relative_eq!(sinhc(x), x.sinh() / x, max_relative = 1e-12);
            assert_relative_eq!(exp_sinhc(2.0, x), (-2.0f64).exp() * x.sinh() / x, max_relative = 1e-11);
            assert_relative_eq!(
                exp_sinhc_sq(5.0, x),
                (-5.0f64).exp() * (x.sinh() / x).powi(2),
                max_relative = 1e-11
            );
            assert_relative_eq!(
                exp_sinhc2(4.0, x, 0.7),
                (-4.0f64).exp() * (x.sinh() / x) * (0.7f64.sinh() / 0.7),
                max_relative = 1e-11
            );
        }
        // the naive jc form cancels catastrophically below ~1e-2; compare
        // where it is trustworthy and check series continuity at the switch
        for &x in &[0.05, 0.5, 3.0, 40.0] {
            assert_relative_eq!(
                jc(x),
                (x * x.cosh() - x.sinh()) / (x * x * x),
                max_relative = 1e-9
            );
        }
        // just above the series switch the direct form must match the
        // (essentially exact) truncated series
        let x = 0.011f64;
        let series = 1.0 / 3.0 + x * x / 30.0 + x.powi(4) / 840.0;
        assert_relative_eq!(jc(x), series, max_relative = 1e-10);
        // no overflow for large folded exponents
        assert!(exp_sinhc(500.0, 450.0).is_finite());
        assert!(exp_sinhc2(900.0, 400.0, 420.0).is_finite());
    }
}
