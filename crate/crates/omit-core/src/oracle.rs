//! Independent checks on the closed-form response: the assembled 8x8
//! first-order sideband systems solved densely, and direct time-domain
//! integration of the linearized equations of motion with Fourier
//! projection onto the probe sideband.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::linalg::{condition_1norm, eigenvalues, lu_factor, CMatrix};
use crate::model::{SteadyState, SystemParams};
use crate::response::susceptibilities;
use crate::{Error, Result};

/// Variable order shared by every 8-dimensional object in this module:
/// displacement, momentum, cavity field, both atomic coherences, then the
/// three mechanical second moments.
pub const PLUS_LABELS: [&str; 8] = ["dq+", "dp+", "dc+", "dA+", "dC+", "dQ+", "dP+", "dX+"];

/// Lower-sideband counterpart of [`PLUS_LABELS`].
pub const MINUS_LABELS: [&str; 8] = ["dq-", "dp-", "dc-", "dA-", "dC-", "dQ-", "dP-", "dX-"];

/// One assembled sideband system `matrix * x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSystem {
    pub delta: f64,
    pub matrix: [[Complex64; 8]; 8],
    pub rhs: [Complex64; 8],
    pub labels: [&'static str; 8],
}

/// Solution of a [`SidebandSystem`], in the same variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSolution {
    pub delta: f64,
    pub values: [Complex64; 8],
    pub labels: [&'static str; 8],
    /// Euclidean norm of `matrix * values - rhs`.
    pub residual_norm: f64,
}

impl SidebandSolution {
    /// Upper-sideband cavity coefficient, the quantity the response
    /// formulas predict.
    pub fn delta_c(&self) -> Complex64 {
        self.values[2]
    }

    /// Looks a component up by its label.
    pub fn value(&self, label: &str) -> Option<Complex64> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|k| self.values[k])
    }
}

/// Assembles the upper-sideband system at detuning `delta`.
///
/// Row by row: the two mechanical mean equations, the cavity equation
/// (carrying the probe drive), the two atomic coherences, and the three
/// second-moment equations. The phonon pump drives the momentum row; the
/// probe drives the cavity row. Diagonal entries reuse the same
/// susceptibility values the closed form is built from, so the two
/// evaluators can only differ through the elimination algebra.
pub fn assemble_plus(p: &SystemParams, ss: &SteadyState, delta: f64) -> SidebandSystem {
    let sus = susceptibilities(p, ss, delta);
    let i = Complex64::i();
    let z = Complex64::ZERO;
    let w_eff = ss.omega_m_eff;
    let gm = p.gamma_m;

    let mut m = [[z; 8]; 8];
    let mut rhs = [z; 8];

    m[0][0] = Complex64::new(0.0, -delta);
    m[0][1] = Complex64::new(-p.omega_m, 0.0);

    m[1][0] = Complex64::new(w_eff, 0.0);
    m[1][1] = Complex64::new(gm, -delta);
    m[1][2] = Complex64::new(sus.g, 0.0);
    rhs[1] = p.phonon_pump();

    m[2][0] = i * p.g1;
    m[2][2] = sus.chi_c;
    m[2][3] = i * p.ga;
    m[2][5] = i * p.g2;
    rhs[2] = Complex64::new(p.eps_p, 0.0);

    m[3][2] = i * p.ga;
    m[3][3] = sus.chi_a;
    m[3][4] = i * p.rabi;

    m[4][3] = i * p.rabi;
    m[4][4] = sus.chi_b;

    m[5][5] = Complex64::new(0.0, -delta);
    m[5][7] = Complex64::new(-p.omega_m, 0.0);

    m[6][1] = Complex64::new(sus.g_sm, 0.0);
    m[6][6] = Complex64::new(2.0 * gm, -delta);
    m[6][7] = Complex64::new(w_eff, 0.0);

    m[7][0] = Complex64::new(sus.g_sm, 0.0);
    m[7][2] = Complex64::new(sus.g_t, 0.0);
    m[7][5] = Complex64::new(2.0 * w_eff, 0.0);
    m[7][6] = Complex64::new(-2.0 * p.omega_m, 0.0);
    m[7][7] = Complex64::new(gm, -delta);

    SidebandSystem {
        delta,
        matrix: m,
        rhs,
        labels: PLUS_LABELS,
    }
}

/// Assembles the lower-sideband system: same couplings, detuning negated
/// in every diagonal, phonon pump still driving the momentum row, and no
/// probe drive.
pub fn assemble_minus(p: &SystemParams, ss: &SteadyState, delta: f64) -> SidebandSystem {
    let mut sys = assemble_plus(p, ss, -delta);
    sys.delta = delta;
    sys.labels = MINUS_LABELS;
    sys.rhs[2] = Complex64::ZERO;
    SidebandSystem { ..sys }
}

/// Solves an assembled sideband system by partial-pivot LU.
///
/// A zero pivot, a 1-norm condition estimate above 1e12, or a residual
/// above `1e-10 * |rhs|` all reject the solve as unreliable rather than
/// returning a polluted value.
pub fn solve_sidebands(sys: &SidebandSystem) -> Result<SidebandSolution> {
    let rows: Vec<Vec<Complex64>> = sys.matrix.iter().map(|r| r.to_vec()).collect();
    let m = CMatrix::from_rows(&rows);
    let factors = lu_factor(&m).ok_or(Error::SingularSideband {
        delta: sys.delta,
        cond: f64::INFINITY,
    })?;
    let cond = condition_1norm(&m, &factors);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularSideband {
            delta: sys.delta,
            cond,
        });
    }
    let x = factors.solve(&sys.rhs);
    let mut residual_sq = 0.0;
    let mut rhs_sq = 0.0;
    for (row, &b) in m.matvec(&x).iter().zip(sys.rhs.iter()) {
        residual_sq += (row - b).norm_sqr();
        rhs_sq += b.norm_sqr();
    }
    let residual_norm = residual_sq.sqrt();
    if residual_norm > 1e-10 * rhs_sq.sqrt() {
        return Err(Error::SingularSideband {
            delta: sys.delta,
            cond,
        });
    }
    let mut values = [Complex64::ZERO; 8];
    values.copy_from_slice(&x);
    Ok(SidebandSolution {
        delta: sys.delta,
        values,
        labels: sys.labels,
        residual_norm,
    })
}

/// Homogeneous drift matrix of the linearized equations of motion, in the
/// [`PLUS_LABELS`] variable order; equals the negated upper-sideband
/// matrix at zero detuning.
pub fn drift_matrix(p: &SystemParams, ss: &SteadyState) -> [[Complex64; 8]; 8] {
    let sys = assemble_plus(p, ss, 0.0);
    let mut l = sys.matrix;
    for row in l.iter_mut() {
        for entry in row.iter_mut() {
            *entry = -*entry;
        }
    }
    l
}

/// Eigenvalues of the drift matrix. Any non-negative real part means
/// transients never decay and time-domain projection cannot converge.
pub fn drift_eigenvalues(p: &SystemParams, ss: &SteadyState) -> Vec<Complex64> {
    let l = drift_matrix(p, ss);
    let rows: Vec<Vec<Complex64>> = l.iter().map(|r| r.to_vec()).collect();
    eigenvalues(&CMatrix::from_rows(&rows))
}

/// Default integration step: one hundredth of the period of the fastest
/// frequency present (detuning, mechanical frequency, or cavity detuning).
pub fn default_dt(p: &SystemParams, delta: f64) -> f64 {
    TAU / (100.0 * delta.abs().max(p.omega_m).max(p.delta_o.abs()))
}

/// Default integration horizon: sixty mechanical periods.
pub fn default_horizon(p: &SystemParams) -> f64 {
    60.0 * TAU / p.omega_m
}

fn nonzero_triplets(l: &[[Complex64; 8]; 8]) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for (r, row) in l.iter().enumerate() {
        for (c, &a) in row.iter().enumerate() {
            if a != Complex64::ZERO {
                out.push((r, c, a));
            }
        }
    }
    out
}

fn rhs_at(
    triplets: &[(usize, usize, Complex64)],
    pump: Complex64,
    eps_p: f64,
    v: &[Complex64; 8],
    ph: Complex64,
) -> [Complex64; 8] {
    let mut out = [Complex64::ZERO; 8];
    for &(r, c, a) in triplets {
        out[r] += a * v[c];
    }
    // The pump drives at +delta and -delta with equal weight; the probe
    // only at +delta. ph is exp(-i*delta*t).
    out[1] += pump * (ph + ph.conj());
    out[2] += eps_p * ph;
    out
}

fn stepped(v: &[Complex64; 8], h: f64, k: &[Complex64; 8]) -> [Complex64; 8] {
    let mut out = *v;
    for j in 0..8 {
        out[j] += h * k[j];
    }
    out
}

/// Integrates the linearized equations of motion from rest with fixed-step
/// RK4 and projects the cavity trajectory onto `exp(+i*delta*t)`.
///
/// The projection averages over an integer number of beat periods (or ten
/// mechanical periods when `delta` is zero) placed at the end of the
/// horizon, in two half-windows; their disagreement above one part in 1e3
/// means the transient has not settled and is reported instead of a value.
/// The step must resolve the fastest frequency present with at least fifty
/// samples per period, and the drift matrix must be strictly stable.
pub fn time_domain_delta_c(
    p: &SystemParams,
    ss: &SteadyState,
    delta: f64,
    horizon: f64,
    dt: f64,
) -> Result<Complex64> {
    // Unlike the frequency-domain evaluators this routine tolerates zero
    // drives (it then returns exactly zero), so it checks only what decay
    // requires rather than the full parameter validation. The negated
    // comparisons send NaN inputs into the error branch too.
    #![allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p.gamma_m > 0.0) {
        return Err(Error::InvalidParams("gamma_m must be positive"));
    }
    if !(p.kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be positive"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams("horizon must be positive and finite"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams("dt must be positive and finite"));
    }
    let bound = TAU / (50.0 * delta.abs().max(p.omega_m).max(p.delta_o.abs()));
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let max_re = drift_eigenvalues(p, ss)
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::UnstableDrift { max_re });
    }

    // Projection window: even number of beat periods covering roughly the
    // final fifth of the horizon, so both half-windows average over whole
    // periods.
    let window = if delta.abs() > 1e-12 {
        let period = TAU / delta.abs();
        let k = ((0.1 * horizon / period) as usize).max(1);
        2.0 * k as f64 * period
    } else {
        20.0 * TAU / p.omega_m
    };
    let total = horizon.max(0.8 * horizon + window);
    let n = (total / dt).ceil() as usize;
    let dt = total / n as f64;
    let t_open = total - window;
    let split = t_open + 0.5 * window;

    let triplets = nonzero_triplets(&drift_matrix(p, ss));
    let pump = p.phonon_pump();
    let rot_half = Complex64::from_polar(1.0, -delta * dt * 0.5);

    let mut v = [Complex64::ZERO; 8];
    let mut ph = Complex64::ONE;
    let (mut acc1, mut w1) = (Complex64::ZERO, 0.0);
    let (mut acc2, mut w2) = (Complex64::ZERO, 0.0);

    for step in 0..n {
        let t = step as f64 * dt;
        if step % 4096 == 0 {
            ph = Complex64::from_polar(1.0, -delta * t);
        }
        if t >= t_open - 1e-12 {
            let wgt = if step == n - 1 || (t - t_open).abs() < 1e-12 {
                0.5 * dt
            } else {
                dt
            };
            let sample = ph.conj() * v[2];
            if t < split {
                acc1 += wgt * sample;
                w1 += wgt;
            } else {
                acc2 += wgt * sample;
                w2 += wgt;
            }
        }
        let ph_mid = ph * rot_half;
        let ph_end = ph_mid * rot_half;
        let k1 = rhs_at(&triplets, pump, p.eps_p, &v, ph);
        let k2 = rhs_at(
            &triplets,
            pump,
            p.eps_p,
            &stepped(&v, 0.5 * dt, &k1),
            ph_mid,
        );
        let k3 = rhs_at(
            &triplets,
            pump,
            p.eps_p,
            &stepped(&v, 0.5 * dt, &k2),
            ph_mid,
        );
        let k4 = rhs_at(&triplets, pump, p.eps_p, &stepped(&v, dt, &k3), ph_end);
        for j in 0..8 {
            v[j] += dt / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
        }
        ph = ph_end;
    }
    let ph_final = Complex64::from_polar(1.0, -delta * total);
    acc2 += 0.5 * dt * ph_final.conj() * v[2];
    w2 += 0.5 * dt;

    let c1 = acc1 / w1;
    let c2 = acc2 / w2;
    let drift = (c2 - c1).norm() / c2.norm().max(f64::MIN_POSITIVE);
    if drift > 1e-3 {
        return Err(Error::ProjectionDrift {
            drift,
            tolerance: 1e-3,
        });
    }
    Ok(c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{scenario, steady_state};
    use approx::assert_relative_eq;

    fn fig(name: &str) -> (SystemParams, SteadyState) {
        let p = scenario(name).unwrap().params;
        let ss = steady_state(&p).unwrap();
        (p, ss)
    }

    #[test]
    fn decoupled_system_is_block_diagonal() {
        let (p, ss) = fig("fig2");
        let sys = assemble_plus(&p, &ss, 1.0);
        // Cavity row reduces to chi_c * dc+ = eps_p.
        assert_eq!(sys.matrix[2][0], Complex64::ZERO);
        assert_eq!(sys.matrix[2][3], Complex64::ZERO);
        assert_eq!(sys.matrix[2][5], Complex64::ZERO);
        assert_eq!(sys.matrix[2][2], Complex64::new(0.1, 0.0));
        assert_eq!(sys.rhs[2], Complex64::new(1.0, 0.0));
        // Mechanics decouple from the field.
        assert_eq!(sys.matrix[1][2], Complex64::ZERO);
        assert_eq!(sys.matrix[7][2], Complex64::ZERO);

        let sol = solve_sidebands(&sys).unwrap();
        assert!((sol.delta_c() - Complex64::new(10.0, 0.0)).norm() < 1e-12);
        assert_eq!(sol.value("dc+"), Some(sol.values[2]));
    }

    #[test]
    fn pump_only_drive_sits_in_the_momentum_row() {
        let (mut p, ss) = fig("fig7");
        p.eps_p = 1.0; // keep params valid; zero the probe drive by hand
        let mut sys = assemble_plus(&p, &ss, 0.7);
        sys.rhs[2] = Complex64::ZERO;
        let nonzero: Vec<usize> = (0..8).filter(|&k| sys.rhs[k] != Complex64::ZERO).collect();
        assert_eq!(nonzero, vec![1]);
        assert_eq!(sys.rhs[1], p.phonon_pump());
    }

    #[test]
    fn minus_system_negates_the_detuning() {
        let (p, ss) = fig("fig6");
        let minus = assemble_minus(&p, &ss, 0.8);
        let plus_at_neg = assemble_plus(&p, &ss, -0.8);
        assert_eq!(minus.matrix, plus_at_neg.matrix);
        assert_eq!(minus.rhs[2], Complex64::ZERO);
        assert_eq!(minus.rhs[1], p.phonon_pump());
        assert_eq!(minus.delta, 0.8);
        assert_eq!(minus.labels[2], "dc-");
    }

    #[test]
    fn minus_moments_vanish_without_pump() {
        // With eps_m = 0 the lower-sideband system is fully homogeneous.
        let (p, ss) = fig("fig6");
        let sol = solve_sidebands(&assemble_minus(&p, &ss, 1.3)).unwrap();
        for value in sol.values {
            assert_eq!(value, Complex64::ZERO);
        }
    }

    #[test]
    fn diagonal_matches_response_susceptibilities() {
        let (p, ss) = fig("fig5");
        let sus = susceptibilities(&p, &ss, 1.0);
        let sys = assemble_plus(&p, &ss, 1.0);
        assert_eq!(sys.matrix[2][2], sus.chi_c);
        assert_eq!(sys.matrix[3][3], sus.chi_a);
        assert_eq!(sys.matrix[4][4], sus.chi_b);
    }

    #[test]
    fn solve_matches_closed_form_at_frozen_spot() {
        // Frozen from the independent prototype solve.
        let (p, ss) = fig("fig6");
        let sol = solve_sidebands(&assemble_plus(&p, &ss, 1.0)).unwrap();
        let frozen = Complex64::new(0.02221767743432822, 0.08644710133726856);
        assert!((sol.delta_c() - frozen).norm() < 1e-9);
        let closed = crate::response::delta_c_plus_closed_form(&p, &ss, 1.0).unwrap();
        assert!((sol.delta_c() - closed).norm() / closed.norm() < 1e-9);
        assert!(sol.residual_norm <= 1e-10);
    }

    #[test]
    fn degenerate_atom_block_is_rejected() {
        // Control off plus an undamped lower level tuned to delta zeroes an
        // entire matrix row; the factorization must refuse it.
        let mut p = scenario("fig2").unwrap().params;
        p.ga = 0.5;
        p.rabi = 0.0;
        p.gamma_1 = 0.3;
        p.gamma_2 = 0.0;
        p.delta_a = 1.0;
        p.delta_b = 1.0;
        let ss = steady_state(&p).unwrap();
        match solve_sidebands(&assemble_plus(&p, &ss, 1.0)) {
            Err(Error::SingularSideband { delta, .. }) => assert_eq!(delta, 1.0),
            other => panic!("expected singular system, got {other:?}"),
        }
        assert!(solve_sidebands(&assemble_plus(&p, &ss, 1.1)).is_ok());
    }

    #[test]
    fn drift_matrix_is_minus_the_zero_detuning_system() {
        let (p, ss) = fig("fig7");
        let l = drift_matrix(&p, &ss);
        let sys = assemble_plus(&p, &ss, 0.0);
        for (row, sys_row) in l.iter().zip(&sys.matrix) {
            for (&a, &b) in row.iter().zip(sys_row) {
                assert_eq!(a, -b);
            }
        }
    }

    #[test]
    fn drift_spectrum_splits_stable_and_unstable_presets() {
        let max_re = |name: &str| -> f64 {
            let (p, ss) = fig(name);
            drift_eigenvalues(&p, &ss)
                .iter()
                .map(|e| e.re)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        for name in ["fig2", "fig3", "fig4"] {
            assert!(max_re(name) < 0.0, "{name} should be stable");
        }
        // Frozen growth rates of the sideband-truncated moment system.
        assert_relative_eq!(max_re("fig5"), 1.81e-2, max_relative = 1e-2);
        assert_relative_eq!(max_re("fig6"), 4.09e-4, max_relative = 1e-2);
        assert_relative_eq!(max_re("fig7"), 2.95e-3, max_relative = 1e-2);
    }

    #[test]
    fn time_domain_recovers_bare_resonance() {
        let (p, ss) = fig("fig2");
        let dt = default_dt(&p, 1.0);
        let dc = time_domain_delta_c(&p, &ss, 1.0, default_horizon(&p), dt).unwrap();
        // Bare cavity at resonance: eps_p / kappa.
        assert!((dc - Complex64::new(10.0, 0.0)).norm() / 10.0 < 1e-3);
    }

    #[test]
    fn time_domain_is_quiet_without_drives() {
        // From rest with both drives off the state stays identically zero.
        let (mut p, ss) = fig("fig2");
        p.eps_p = 0.0;
        p.eps_m = 0.0;
        let dt = default_dt(&p, 0.5);
        let dc = time_domain_delta_c(&p, &ss, 0.5, default_horizon(&p), dt).unwrap();
        assert_eq!(dc, Complex64::ZERO);
    }

    #[test]
    fn step_bound_is_enforced() {
        let (p, ss) = fig("fig2");
        let too_big = TAU / (50.0 * 1.0) * 1.5;
        match time_domain_delta_c(&p, &ss, 1.0, default_horizon(&p), too_big) {
            Err(Error::StepTooLarge { .. }) => {}
            other => panic!("expected step rejection, got {other:?}"),
        }
    }

    #[test]
    fn unstable_preset_is_refused() {
        let (p, ss) = fig("fig5");
        match time_domain_delta_c(&p, &ss, 1.0, default_horizon(&p), default_dt(&p, 1.0)) {
            Err(Error::UnstableDrift { max_re }) => assert!(max_re > 0.0),
            other => panic!("expected unstable drift, got {other:?}"),
        }
    }
}
