//! Physical configuration: mass bookkeeping, Gaussian momentum-space wave
//! packets, kinematic transforms, and the closed-form distance checks that
//! bound how far a boosted incoming state can drift from the zero-momentum
//! one.
//!
//! All internal computations run in dimensionless momenta `q = p / sigma`,
//! where the packets become unit-variance Gaussians; `hbar` and `sigma`
//! enter results only through the ratios `sigma/hbar` and `|p0|/hbar`.

use std::f64::consts::PI;

use crate::quad::{self, Estimate, QuadratureSpec};
use crate::vec3;
use crate::{Error, Result};

/// Mass fractions `mu_i = m_i / (m1 + m2)` and reduced-mass bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSplit {
    m1: f64,
    m2: f64,
    mu1: f64,
    mu2: f64,
}

impl MassSplit {
    /// Builds the split from two positive masses.
    pub fn from_masses(m1: f64, m2: f64) -> Result<Self> {
        if !(m1 > 0.0) || !(m2 > 0.0) {
            return Err(Error::Domain(format!(
                "masses must be positive, got m1 = {m1}, m2 = {m2}"
            )));
        }
        let mu1 = m1 / (m1 + m2);
        Ok(Self {
            m1,
            m2,
            mu1,
            mu2: 1.0 - mu1,
        })
    }

    /// Builds the split from the first mass fraction alone, with unit total
    /// mass, so that `from_mu1(mu1).mu1() == mu1` exactly.
    pub fn from_mu1(mu1: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu1 < 1.0) {
            return Err(Error::Domain(format!("mu1 must lie in (0, 1), got {mu1}")));
        }
        Ok(Self {
            m1: mu1,
            m2: 1.0 - mu1,
            mu1,
            mu2: 1.0 - mu1,
        })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// Reduced mass `m1 m2 / (m1 + m2)`.
    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }
}

/// The dimensionful knobs of a scattering configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    hbar: f64,
    sigma: f64,
    p0: [f64; 3],
}

impl PhysicalScales {
    pub fn new(hbar: f64, sigma: f64, p0: [f64; 3]) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { hbar, sigma, p0 })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p0(&self) -> [f64; 3] {
        self.p0
    }

    /// Dimensionless mean wavenumber `|p0| / hbar`.
    pub fn k0(&self) -> f64 {
        vec3::norm(self.p0) / self.hbar
    }

    /// Dimensionless momentum spread `sigma / hbar`.
    pub fn s(&self) -> f64 {
        self.sigma / self.hbar
    }
}

/// A normalized Gaussian momentum-space packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    mean: [f64; 3],
    sigma: f64,
}

impl GaussianPacket {
    pub fn new(mean: [f64; 3], sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { mean, sigma })
    }

    pub fn mean(&self) -> [f64; 3] {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The L2-normalizing constant `(sigma^2 pi)^{-3/4}`.
    pub fn norm_const(&self) -> f64 {
        (self.sigma * self.sigma * PI).powf(-0.75)
    }

    /// Momentum-space amplitude at `p`.
    pub fn amplitude(&self, p: [f64; 3]) -> f64 {
        let d = vec3::sub(p, self.mean);
        self.norm_const() * (-vec3::dot(d, d) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Product of two packets with opposite mean momenta: the incoming
/// asymptotic state. Its purity is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductInState {
    packet1: GaussianPacket,
    packet2: GaussianPacket,
}

impl ProductInState {
    pub fn packet1(&self) -> &GaussianPacket {
        &self.packet1
    }

    pub fn packet2(&self) -> &GaussianPacket {
        &self.packet2
    }

    pub fn amplitude(&self, p1: [f64; 3], p2: [f64; 3]) -> f64 {
        self.packet1.amplitude(p1) * self.packet2.amplitude(p2)
    }
}

/// Builds the incoming product state: particle one centred at `+p0`,
/// particle two at `-p0`, both with spread `sigma`.
pub fn make_in_state(p0: [f64; 3], sigma: f64) -> Result<ProductInState> {
    Ok(ProductInState {
        packet1: GaussianPacket::new(p0, sigma)?,
        packet2: GaussianPacket::new(vec3::scale(-1.0, p0), sigma)?,
    })
}

/// Relative momentum `mu2 p1 - mu1 p2`.
pub fn relative_momentum(p1: [f64; 3], p2: [f64; 3], ms: &MassSplit) -> [f64; 3] {
    vec3::sub(vec3::scale(ms.mu2(), p1), vec3::scale(ms.mu1(), p2))
}

/// `(p_cm, p)` from single-particle momenta.
pub fn to_cm_relative(p1: [f64; 3], p2: [f64; 3], ms: &MassSplit) -> ([f64; 3], [f64; 3]) {
    (vec3::add(p1, p2), relative_momentum(p1, p2, ms))
}

/// Inverse transform: `p1 = mu1 p_cm + p`, `p2 = mu2 p_cm - p`.
pub fn from_cm_relative(p_cm: [f64; 3], p: [f64; 3], ms: &MassSplit) -> ([f64; 3], [f64; 3]) {
    (
        vec3::add(vec3::scale(ms.mu1(), p_cm), p),
        vec3::sub(vec3::scale(ms.mu2(), p_cm), p),
    )
}

/// L2 distance between the boosted and unboosted incoming states,
/// `sqrt(2 (1 - exp(-p0^2 / (2 sigma^2))))`.
///
/// The Gaussian overlap gives the closed form; it depends on `(p0, sigma)`
/// only through `|p0| / sigma`, is bounded by `2 min(|p0|/sigma, 1)`, and
/// tends to `sqrt(2)` (orthogonal product states) as `|p0| -> inf`.
pub fn in_state_distance(p0: [f64; 3], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let q0_sq = vec3::dot(p0, p0) / (sigma * sigma);
    Ok((2.0 * (1.0 - (-(q0_sq) / 2.0).exp())).sqrt())
}

fn unit_packet(q: [f64; 3], center: [f64; 3]) -> f64 {
    let d = vec3::sub(q, center);
    PI.powf(-0.75) * (-vec3::dot(d, d) / 2.0).exp()
}

/// Norm of the relative-momentum-weighted state difference,
/// `|| |p| (phi_in,p0 - phi_in) ||`, for the equal-mass relative momentum
/// `p = (p1 - p2)/2`, evaluated by tensor Gauss-Hermite quadrature over the
/// six momentum components in dimensionless coordinates.
///
/// The value is monotone in `|p0|` near zero and bounded by a constant times
/// `|p0|`.
pub fn momentum_weighted_distance(
    p0: [f64; 3],
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    spec.validate()?;
    let q0 = vec3::scale(1.0 / sigma, p0);
    let neg_q0 = vec3::scale(-1.0, q0);
    let integrand = move |x: &[f64]| {
        let q1 = [x[0], x[1], x[2]];
        let q2 = [x[3], x[4], x[5]];
        let q_rel = vec3::scale(0.5, vec3::sub(q1, q2));
        let diff = unit_packet(q1, q0) * unit_packet(q2, neg_q0)
            - unit_packet(q1, [0.0; 3]) * unit_packet(q2, [0.0; 3]);
        vec3::dot(q_rel, q_rel) * diff * diff
    };

    let mut nodes = spec.hermite_nodes;
    let mut coarse = quad::integrate_gauss_hermite(integrand, 6, nodes)?;
    let mut refinements = 0;
    loop {
        nodes += 4;
        let fine = quad::integrate_gauss_hermite(integrand, 6, nodes)?;
        let err = (fine - coarse).abs();
        let value = sigma * fine.max(0.0).sqrt();
        // error in the square root: d sqrt(v) = dv / (2 sqrt(v))
        let abs_err = if value > 0.0 {
            sigma * sigma * err / (2.0 * value)
        } else {
            sigma * err.sqrt()
        };
        refinements += 1;
        if err <= spec.target_rel_err * fine.abs() || refinements >= spec.max_refinements {
            return Ok(Estimate::quadrature(
                value,
                abs_err,
                err <= spec.target_rel_err * fine.abs(),
            ));
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mass_fractions_sum_to_one_exactly() {
        for &(m1, m2) in &[(1.0, 1.0), (0.3, 7.1), (1e-6, 12.0), (5.0, 1e9)] {
            let ms = MassSplit::from_masses(m1, m2).unwrap();
            assert_eq!(ms.mu1() + ms.mu2(), 1.0);
        }
    }

    #[test]
    fn mu1_round_trips() {
        for &mu1 in &[0.1, 0.25, 0.5, 0.7316, 0.999] {
            let ms = MassSplit::from_mu1(mu1).unwrap();
            assert_eq!(ms.mu1(), mu1);
            assert_eq!(ms.m1() + ms.m2(), 1.0);
        }
        assert!(MassSplit::from_mu1(0.0).is_err());
        assert!(MassSplit::from_mu1(1.0).is_err());
    }

    #[test]
    fn reduced_mass_equal_masses() {
        let ms = MassSplit::from_masses(2.0, 2.0).unwrap();
        assert_relative_eq!(ms.reduced_mass(), 1.0);
    }

    #[test]
    fn in_state_construction() {
        let st = make_in_state([0.0, 0.0, 0.3], 1.0).unwrap();
        assert_eq!(st.packet1().mean(), [0.0, 0.0, 0.3]);
        assert_eq!(st.packet2().mean(), [0.0, 0.0, -0.3]);
        assert!(make_in_state([0.0; 3], 0.0).is_err());
        assert!(make_in_state([0.0; 3], -1.0).is_err());

        // zero-momentum case: both packets centred at the origin
        let st0 = make_in_state([0.0; 3], 1.0).unwrap();
        assert_eq!(st0.packet1().mean(), [0.0; 3]);
        assert_eq!(st0.packet2().mean(), [0.0; 3]);
        assert_relative_eq!(
            st0.amplitude([0.0; 3], [0.0; 3]),
            PI.powf(-1.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn packet_norm_by_numeric_quadrature() {
        // || phi ||^2 == 1 to 1e-10 over a wide sigma range
        for &sigma in &[1e-3, 1.0, 1e3] {
            let packet = GaussianPacket::new([0.2 * sigma, 0.0, -0.1 * sigma], sigma).unwrap();
            // dimensionless q = p / sigma keeps the integrand unit-scale
            let norm_sq = quad::integrate_gauss_hermite(
                |x| {
                    let p = [sigma * x[0], sigma * x[1], sigma * x[2]];
                    let a = packet.amplitude(p);
                    sigma * sigma * sigma * a * a
                },
                3,
                16,
            )
            .unwrap();
            assert_relative_eq!(norm_sq, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn relative_momentum_examples() {
        let equal = MassSplit::from_mu1(0.5).unwrap();
        let p = [0.4, -0.2, 1.0];
        let got = relative_momentum(p, vec3::scale(-1.0, p), &equal);
        for i in 0..3 {
            assert_relative_eq!(got[i], p[i], max_relative = 1e-15);
        }

        let quarter = MassSplit::from_mu1(0.25).unwrap();
        let got = relative_momentum([1.0, 0.0, 0.0], [0.0; 3], &quarter);
        assert_relative_eq!(got[0], 0.75, max_relative = 1e-15);
        assert_eq!(got[1], 0.0);
        assert_eq!(got[2], 0.0);
    }

    #[test]
    fn distance_limits() {
        assert_eq!(in_state_distance([0.0; 3], 1.0).unwrap(), 0.0);
        let far = in_state_distance([0.0, 0.0, 1e9], 1.0).unwrap();
        assert_relative_eq!(far, 2.0_f64.sqrt(), max_relative = 1e-12);
        assert!(in_state_distance([0.0; 3], 0.0).is_err());
    }

    #[test]
    fn distance_matches_brute_force_quadrature() {
        // full tensor quadrature of the norm difference over all six
        // momentum components, no use of the overlap closed form
        let p0 = [0.0, 0.0, 0.1];
        let closed = in_state_distance(p0, 1.0).unwrap();
        let brute_sq = quad::integrate_gauss_hermite(
            |x| {
                let q1 = [x[0], x[1], x[2]];
                let q2 = [x[3], x[4], x[5]];
                let d = unit_packet(q1, p0) * unit_packet(q2, [0.0, 0.0, -0.1])
                    - unit_packet(q1, [0.0; 3]) * unit_packet(q2, [0.0; 3]);
                d * d
            },
            6,
            16,
        )
        .unwrap();
        assert!((closed - brute_sq.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn momentum_weighted_distance_closed_form_oracle() {
        // || |p| (phi_in,p0 - phi_in) ||^2 =
        //   p0^2 + (3/2) s^2 - exp(-p0^2/(2 s^2)) (p0^2/2 + (3/2) s^2)
        // from Gaussian moments of the equal-mass relative momentum.
        let spec = QuadratureSpec::default();
        for &(p0z, sigma) in &[(0.2, 1.0), (0.5, 1.0), (0.3, 2.0)] {
            let est = momentum_weighted_distance([0.0, 0.0, p0z], sigma, &spec).unwrap();
            let p0_sq = p0z * p0z;
            let s_sq = sigma * sigma;
            let overlap = (-p0_sq / (2.0 * s_sq)).exp();
            let exact = (p0_sq + 1.5 * s_sq - overlap * (0.5 * p0_sq + 1.5 * s_sq)).sqrt();
            assert_relative_eq!(est.value, exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn momentum_weighted_distance_vanishes_at_zero_boost() {
        let est = momentum_weighted_distance([0.0; 3], 1.0, &QuadratureSpec::default()).unwrap();
        assert!(est.value.abs() < 1e-12);
    }

    #[test]
    fn momentum_weighted_ratio_bounded_near_zero() {
        // value / |p0| stays bounded on a log-spaced scan towards zero; the
        // empirical supremum of the ratio is sqrt(5)/2 = 1.118, bounded here
        // with a 1.5 safety factor
        let spec = QuadratureSpec::default();
        for k in 0..6 {
            let p0 = 0.2 * 0.5_f64.powi(k);
            let est = momentum_weighted_distance([0.0, 0.0, p0], 1.0, &spec).unwrap();
            let ratio = est.value / p0;
            assert!(ratio > 0.5 && ratio < 1.118 * 1.5, "ratio = {ratio} at p0 = {p0}");
        }
    }

    #[test]
    fn momentum_weighted_distance_two_resolutions_agree() {
        let coarse_spec = QuadratureSpec {
            hermite_nodes: 10,
            max_refinements: 1,
            ..Default::default()
        };
        let fine_spec = QuadratureSpec {
            hermite_nodes: 14,
            max_refinements: 1,
            ..Default::default()
        };
        let a = momentum_weighted_distance([0.0, 0.0, 0.5], 1.0, &coarse_spec).unwrap();
        let b = momentum_weighted_distance([0.0, 0.0, 0.5], 1.0, &fine_spec).unwrap();
        assert!((a.value - b.value).abs() <= (a.abs_err + b.abs_err).max(1e-12));
    }

    proptest! {
        #[test]
        fn kinematic_round_trip(
            p1 in prop::array::uniform3(-5.0f64..5.0),
            p2 in prop::array::uniform3(-5.0f64..5.0),
            mu1 in 0.05f64..0.95,
        ) {
            let ms = MassSplit::from_mu1(mu1).unwrap();
            let (p_cm, p) = to_cm_relative(p1, p2, &ms);
            let (r1, r2) = from_cm_relative(p_cm, p, &ms);
            for i in 0..3 {
                prop_assert!((r1[i] - p1[i]).abs() <= 1e-12 * (1.0 + p1[i].abs()));
                prop_assert!((r2[i] - p2[i]).abs() <= 1e-12 * (1.0 + p2[i].abs()));
            }
        }

        #[test]
        fn distance_bound_and_scale_invariance(
            p0_mag in 1e-3f64..1e3,
            sigma in 1e-3f64..1e3,
        ) {
            let d = in_state_distance([0.0, 0.0, p0_mag], sigma).unwrap();
            let x = p0_mag / sigma;
            prop_assert!(d <= 2.0 * x.min(1.0) + 1e-12);
            // depends on (p0, sigma) only through |p0| / sigma
            let d_scaled = in_state_distance([0.0, 0.0, x], 1.0).unwrap();
            prop_assert!((d - d_scaled).abs() <= 1e-12);
        }
    }
}
