//! Golden-value verification suite behind `entscat verify` and the
//! acceptance tests.
//!
//! Each check pins its tolerances in code and returns a structured result;
//! nothing is calibrated at run time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::coeff;
use crate::model;
use crate::purity;
use crate::quad::{self, MCSpec, QuadratureSpec};
use crate::scatlen::{self, Potential};
use crate::smatrix;
use crate::Error;

/// Outcome of a single verification check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Reference values for E(mu1) on the 0.025 grid from 0.5 to 1.0.
///
/// The entry at mu1 = 0.85 in the published listing (1.3228) is internally
/// inconsistent: cubic interpolation of its own neighbouring rows gives
/// 1.3331, and two independent recomputations of the defining integrals
/// (the nested reduction used here and a brute-force cartesian-grid
/// evaluation) both converge to 1.332959 — a transcription slip of 1.3328.
/// That row is therefore checked against the recomputed value; see
/// `E_085_RECOMPUTED`.
pub const REFERENCE_TABLE: [(f64, f64); 21] = [
    (0.500, 0.4770),
    (0.525, 0.4813),
    (0.550, 0.4937),
    (0.575, 0.5144),
    (0.600, 0.5434),
    (0.625, 0.5816),
    (0.650, 0.6296),
    (0.675, 0.6880),
    (0.700, 0.7550),
    (0.725, 0.8320),
    (0.750, 0.9179),
    (0.775, 1.0120),
    (0.800, 1.1130),
    (0.825, 1.2208),
    (0.850, 1.3228), // see note above: checked against E_085_RECOMPUTED
    (0.875, 1.4488),
    (0.900, 1.5659),
    (0.925, 1.6832),
    (0.950, 1.8010),
    (0.975, 1.9168),
    (1.000, 2.0287),
];

/// Independently recomputed E(0.85); replaces the inconsistent listed row.
pub const E_085_RECOMPUTED: f64 = 1.332959;

pub const TABLE_TOL: f64 = 5e-3;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// Closed-form golden values: J(1/2,1/2), J(1,0), N(1/2,1/2) and the
/// L quadrature against its closed form.
pub fn check_closed_form_goldens() -> Check {
    let spec = spec();
    let mut fails = Vec::new();

    match coeff::j_integral(0.5, 0.5, &spec) {
        Ok(j) if (j.value - 0.663497).abs() < 1e-5 => {}
        Ok(j) => fails.push(format!("J(1/2,1/2) = {} (want 0.663497 +- 1e-5)", j.value)),
        Err(e) => fails.push(format!("J(1/2,1/2): {e}")),
    }
    match coeff::j_integral(1.0, 0.0, &spec) {
        Ok(j) if (j.value - 0.32627).abs() < 1e-5 => {}
        Ok(j) => fails.push(format!("J(1,0) = {} (want 0.32627 +- 1e-5)", j.value)),
        Err(e) => fails.push(format!("J(1,0): {e}")),
    }
    match coeff::n_quad(0.5, 0.5, &spec) {
        Ok(n) if (n.value - 0.75).abs() < 1e-8 => {}
        Ok(n) => fails.push(format!("N(1/2,1/2) = {} (want 3/4 +- 1e-8)", n.value)),
        Err(e) => fails.push(format!("N(1/2,1/2): {e}")),
    }
    for mu1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let closed = coeff::l_closed(mu1).unwrap().value;
        match coeff::l_quad(mu1, 1.0 - mu1, &spec) {
            Ok(l) if ((l.value - closed) / closed).abs() < 1e-8 => {}
            Ok(l) => fails.push(format!(
                "L_quad({mu1}) = {} vs closed {closed} (rel > 1e-8)",
                l.value
            )),
            Err(e) => fails.push(format!("L_quad({mu1}): {e}")),
        }
    }
    if fails.is_empty() {
        Check::new(
            "closed-form goldens",
            true,
            "J(1/2,1/2), J(1,0), N(1/2,1/2), L_quad == L_closed at 5 points".into(),
        )
    } else {
        Check::new("closed-form goldens", false, fails.join("; "))
    }
}

/// E(1/2) to 5e-4 and the full 21-row reference table to 5e-3 per row,
/// with the recomputed value standing in for the inconsistent 0.85 entry;
/// the computed curve must also be monotone nondecreasing.
pub fn check_reference_table() -> Check {
    let spec = spec();
    let grid = coeff::default_table_grid();
    let results = coeff::table(&grid, &spec);
    let mut values = Vec::with_capacity(grid.len());
    for res in &results {
        match res {
            Ok(r) => values.push(r.e.value),
            Err(e) => return Check::new("reference table", false, format!("{e}")),
        }
    }
    let mut fails = Vec::new();
    if (values[0] - 0.4770).abs() >= 5e-4 {
        fails.push(format!("E(1/2) = {} (want 0.4770 +- 5e-4)", values[0]));
    }
    let mut note = String::new();
    for (i, &(mu1, listed)) in REFERENCE_TABLE.iter().enumerate() {
        let (reference, label) = if mu1 == 0.850 {
            note = format!(
                " [mu1=0.85: listed {listed} is a transcription slip, deviates \
                 {:.1e} from the recomputed {E_085_RECOMPUTED}; checked against \
                 the recomputed value]",
                (values[i] - listed).abs()
            );
            (E_085_RECOMPUTED, "recomputed")
        } else {
            (listed, "listed")
        };
        if (values[i] - reference).abs() >= TABLE_TOL {
            fails.push(format!(
                "E({mu1}) = {:.6} vs {label} {reference} (|diff| >= {TABLE_TOL})",
                values[i]
            ));
        }
    }
    for w in values.windows(2) {
        if w[1] < w[0] {
            fails.push(format!("curve not monotone: {} -> {}", w[0], w[1]));
        }
    }
    if fails.is_empty() {
        Check::new(
            "reference table",
            true,
            format!("21 rows within {TABLE_TOL}, curve monotone{note}"),
        )
    } else {
        Check::new("reference table", false, fails.join("; "))
    }
}

/// |E(mu) - E(1-mu)| below the combined quadrature error for small mu.
pub fn check_mass_exchange_symmetry() -> Check {
    let spec = spec();
    let mut worst: f64 = 0.0;
    for &mu1 in &[0.1, 0.2, 0.3, 0.4] {
        let a = match coeff::entanglement_coefficient(mu1, &spec) {
            Ok(a) => a,
            Err(e) => return Check::new("mass-exchange symmetry", false, format!("{e}")),
        };
        let b = match coeff::entanglement_coefficient(1.0 - mu1, &spec) {
            Ok(b) => b,
            Err(e) => return Check::new("mass-exchange symmetry", false, format!("{e}")),
        };
        let diff = (a.e.value - b.e.value).abs();
        let budget = a.e.abs_err + b.e.abs_err + 1e-12;
        if diff > budget {
            return Check::new(
                "mass-exchange symmetry",
                false,
                format!("|E({mu1}) - E({})| = {diff} > {budget}", 1.0 - mu1),
            );
        }
        worst = worst.max(diff);
    }
    Check::new(
        "mass-exchange symmetry",
        true,
        format!("max |E(mu) - E(1-mu)| = {worst:.2e} within combined error"),
    )
}

/// Unitarity operator identity over 1000 random draws.
pub fn check_unitarity_identity() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(0xdef4c7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c0 = rng.random_range(-10.0..10.0);
        let y1 = [
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        ];
        let sm = smatrix::build(c0, y1, 1).expect("lmax = 1 is valid");
        worst = worst.max(sm.unitarity_defect());
    }
    Check::new(
        "unitarity identity",
        worst < 1e-12,
        format!("max ||S2 + S2^T - S1^2|| = {worst:.2e} over 1000 draws (want < 1e-12)"),
    )
}

const PURITY_SEED: u64 = 0x00e1_7a5c;

fn purity_mc_spec(samples: u64) -> MCSpec {
    MCSpec {
        samples,
        seed: PURITY_SEED,
        chunk_size: 1 << 16,
    }
}

/// Monte-Carlo purity against the leading-order law at s = 0.05, c0 = 1,
/// p0 = 0 for three mass splits (1e7 samples each).
pub fn check_purity_law() -> Check {
    let spec = spec();
    let sm = smatrix::build(1.0, [0.0; 3], 1).expect("valid");
    let mc = purity_mc_spec(10_000_000);
    let mut details = Vec::new();
    let mut passed = true;
    for &mu1 in &[0.5, 0.75, 1.0] {
        let e = match coeff::entanglement_coefficient(mu1, &spec) {
            Ok(e) => e,
            Err(e) => return Check::new("purity law", false, format!("{e}")),
        };
        let formula = purity::purity_formula(mu1, 1.0, 0.05, &e.e).expect("valid");
        let sampled = match purity::purity_mc(mu1, &sm, 0.05, [0.0; 3], &mc) {
            Ok(p) => p,
            Err(e) => return Check::new("purity law", false, format!("{e}")),
        };
        let slack = 3.0 * sampled.abs_err + 1e-4;
        let diff = (sampled.value - formula.value).abs();
        if diff >= slack {
            passed = false;
        }
        details.push(format!(
            "mu1={mu1}: |mc - formula| = {diff:.2e} (slack {slack:.2e})"
        ));
    }
    Check::new("purity law", passed, details.join("; "))
}

/// Log-log slope of the purity deficit against the packet spread.
pub fn check_second_order_onset() -> Check {
    let sm = smatrix::build(1.0, [0.0; 3], 1).expect("valid");
    let mc = purity_mc_spec(2_000_000);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &s in &[0.02, 0.04, 0.08] {
        let sampled = match purity::purity_mc(0.5, &sm, s, [0.0; 3], &mc) {
            Ok(p) => p,
            Err(e) => return Check::new("second-order onset", false, format!("{e}")),
        };
        let deficit = 1.0 - sampled.value;
        if deficit <= 0.0 {
            return Check::new(
                "second-order onset",
                false,
                format!("no deficit resolved at s = {s}"),
            );
        }
        xs.push(s.ln());
        ys.push(deficit.ln());
    }
    let slope = purity::fit_slope(&xs, &ys).unwrap_or(f64::NAN);
    Check::new(
        "second-order onset",
        (slope - 2.0).abs() <= 0.1,
        format!("fitted slope of (1 - P) vs s is {slope:.3} (want 2.0 +- 0.1)"),
    )
}

/// Purity with and without anisotropy coefficients, same seed.
pub fn check_anisotropy_null() -> Check {
    let mc = purity_mc_spec(2_000_000);
    let s = 0.05;
    let with = smatrix::build(1.0, [0.0, 0.0, 0.2], 1).expect("valid");
    let without = smatrix::build(1.0, [0.0; 3], 1).expect("valid");
    let a = match purity::purity_mc(0.75, &with, s, [0.0; 3], &mc) {
        Ok(p) => p,
        Err(e) => return Check::new("anisotropy null result", false, format!("{e}")),
    };
    let b = match purity::purity_mc(0.75, &without, s, [0.0; 3], &mc) {
        Ok(p) => p,
        Err(e) => return Check::new("anisotropy null result", false, format!("{e}")),
    };
    let diff = (a.value - b.value).abs();
    let slack = 3.0 * a.abs_err.max(b.abs_err) + 1e-4;
    Check::new(
        "anisotropy null result",
        diff < slack,
        format!("|P(Y1 = 0.2 c0) - P(Y1 = 0)| = {diff:.2e} (slack {slack:.2e})"),
    )
}

/// Decay of |P(p0) - P(0)| with the boost momentum: fitted exponent >= 1.
pub fn check_boost_stability() -> Check {
    let sm = smatrix::build(1.0, [0.0; 3], 1).expect("valid");
    let mc = purity_mc_spec(2_000_000);
    let s = 0.05;
    let magnitudes: Vec<f64> = [0.01, 0.02, 0.04].iter().map(|f| f * s).collect();
    let scan = match purity::p0_scan(0.5, &sm, s, &magnitudes, &mc) {
        Ok(scan) => scan,
        Err(e) => return Check::new("boost stability", false, format!("{e}")),
    };
    match scan.exponent {
        Some(exp) if exp >= 1.0 => Check::new(
            "boost stability",
            true,
            format!("|P(p0) - P(0)| decays with fitted exponent {exp:.3} (want >= 1)"),
        ),
        Some(exp) => Check::new(
            "boost stability",
            false,
            format!("fitted exponent {exp:.3} < 1"),
        ),
        None => Check::new(
            "boost stability",
            false,
            "differences did not resolve above the noise floor".into(),
        ),
    }
}

/// Square-well scattering length against the textbook closed form, the
/// zero potential, and resonance detection at k0 R = pi/2.
pub fn check_scattering_length() -> Check {
    let mut fails = Vec::new();
    for &k0r in &[0.5, 1.0, 1.3] {
        // m = 1/2, hbar = 1: depth = k0^2
        let pot = Potential::square_well(k0r * k0r, 1.0, 0.5, 1.0).expect("valid");
        let exact = 1.0 - k0r.tan() / k0r;
        match scatlen::solve_zero_energy(&pot, 400) {
            Ok(sol) if ((sol.c0 - exact) / exact).abs() < 1e-3 => {}
            Ok(sol) => fails.push(format!(
                "k0R = {k0r}: c0 = {} vs oracle {exact} (rel > 1e-3)",
                sol.c0
            )),
            Err(e) => fails.push(format!("k0R = {k0r}: {e}")),
        }
    }
    let zero = Potential::square_well(0.0, 1.0, 0.5, 1.0).expect("valid");
    match scatlen::solve_zero_energy(&zero, 400) {
        Ok(sol) if sol.c0 == 0.0 => {}
        Ok(sol) => fails.push(format!("V = 0 gave c0 = {} (want exactly 0)", sol.c0)),
        Err(e) => fails.push(format!("V = 0: {e}")),
    }
    let resonant = Potential::square_well(
        std::f64::consts::FRAC_PI_2 * std::f64::consts::FRAC_PI_2,
        1.0,
        0.5,
        1.0,
    )
    .expect("valid");
    match scatlen::scattering_length(&resonant) {
        Err(Error::Resonance { .. }) => {}
        Ok(est) => fails.push(format!(
            "resonant well solved without error (c0 = {})",
            est.value
        )),
        Err(e) => fails.push(format!("resonant well: unexpected error {e}")),
    }
    if fails.is_empty() {
        Check::new(
            "scattering length",
            true,
            "square-well oracle at 3 depths, exact zero for V = 0, resonance detected".into(),
        )
    } else {
        Check::new("scattering length", false, fails.join("; "))
    }
}

/// Packet-distance closed form against brute-force quadrature and the
/// explicit-constant bound over a log-spaced sweep.
pub fn check_packet_distance() -> Check {
    // brute force: full tensor quadrature of the norm difference
    let p0 = [0.0, 0.0, 0.1];
    let closed = model::in_state_distance(p0, 1.0).expect("valid");
    let packet = |q: [f64; 3], c: [f64; 3]| {
        let d = [q[0] - c[0], q[1] - c[1], q[2] - c[2]];
        std::f64::consts::PI.powf(-0.75)
            * (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / 2.0).exp()
    };
    let brute_sq = quad::integrate_gauss_hermite(
        |x| {
            let q1 = [x[0], x[1], x[2]];
            let q2 = [x[3], x[4], x[5]];
            let diff = packet(q1, p0) * packet(q2, [0.0, 0.0, -0.1])
                - packet(q1, [0.0; 3]) * packet(q2, [0.0; 3]);
            diff * diff
        },
        6,
        18,
    )
    .expect("valid");
    let brute = brute_sq.max(0.0).sqrt();
    let quadrature_gap = (closed - brute).abs();
    if quadrature_gap >= 1e-8 {
        return Check::new(
            "packet distance",
            false,
            format!("closed {closed} vs quadrature {brute} (|diff| >= 1e-8)"),
        );
    }
    // explicit-constant bound over 20 log-spaced ratios
    for k in 0..20 {
        let ratio = 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0);
        let d = model::in_state_distance([0.0, 0.0, ratio], 1.0).expect("valid");
        if d > 2.0 * ratio.min(1.0) {
            return Check::new(
                "packet distance",
                false,
                format!("bound violated at |p0|/sigma = {ratio}: {d}"),
            );
        }
    }
    Check::new(
        "packet distance",
        true,
        format!("quadrature gap {quadrature_gap:.1e}, bound holds over 20 points"),
    )
}

/// Runs every check; `quick` skips the Monte-Carlo ones.
pub fn run_all(quick: bool) -> Vec<Check> {
    let mut checks = vec![
        check_closed_form_goldens(),
        check_reference_table(),
        check_mass_exchange_symmetry(),
        check_unitarity_identity(),
    ];
    if !quick {
        checks.push(check_purity_law());
        checks.push(check_second_order_onset());
        checks.push(check_anisotropy_null());
        checks.push(check_boost_stability());
    }
    checks.push(check_scattering_length());
    checks.push(check_packet_distance());
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_runs_clean() {
        for check in run_all(true) {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn tampered_tolerance_is_caught() {
        // the reported detail must carry enough information to spot a
        // deliberate golden-value change; emulate by checking the guard
        let spec = QuadratureSpec::default();
        let j = coeff::j_integral(0.5, 0.5, &spec).unwrap();
        assert!((j.value - 0.663497).abs() < 1e-5);
        assert!((j.value - 0.664).abs() > 1e-5, "a wrong golden would fail");
    }
}
