//! Closed-form probe response: the susceptibility ladder, the sideband
//! coefficient `delta_c_plus`, and the output quantities derived from it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{SteadyState, SystemParams};
use crate::{Error, Result};

/// The output quadrature is normalized by `sqrt(2 * kappa)`.
pub const EPS_OUT_DECAY_FACTOR: f64 = 2.0;

/// The transmission subtracts `sqrt(kappa) * delta_c_plus` from the probe.
///
/// The two output conventions deliberately carry different decay factors;
/// they are defined that way, and these two constants are the single place
/// the factors live.
pub const T_P_DECAY_FACTOR: f64 = 1.0;

/// Susceptibility chain and collapsed coupling factors at one detuning.
///
/// `chi_a`, `chi_b`, `chi_c` are the atomic and cavity responses at the
/// upper sideband; the `_o` variants are the same responses at the lower
/// sideband (`delta` negated). `chi_d` through `chi_g` are the mechanical
/// factors that appear once the moment equations are eliminated. `alpha`,
/// `beta` and the prefactor `s` bundle the quadratic-coupling channel:
/// `alpha` enters the response denominator, `beta` (proportional to the
/// phonon pump) the numerator.
#[derive(Debug, Clone, Copy)]
pub struct Susceptibilities {
    pub delta: f64,
    pub chi_a: Complex64,
    pub chi_b: Complex64,
    pub chi_c: Complex64,
    pub chi_d: Complex64,
    pub chi_e: Complex64,
    pub chi_f: Complex64,
    pub chi_g: Complex64,
    pub chi_a_o: Complex64,
    pub chi_b_o: Complex64,
    pub chi_c_o: Complex64,
    pub s: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Net linear coupling `2 * (G1 + 2 * G2 * q_s)`.
    pub g: f64,
    /// Second-moment drive coupling `2 * c_hat * G1`.
    pub g_sm: f64,
    /// Second-moment cavity coupling `4 * (G1 * q_s + 2 * G2 * Q_s)`.
    pub g_t: f64,
}

/// Evaluates the susceptibility chain at detuning `delta`.
pub fn susceptibilities(p: &SystemParams, ss: &SteadyState, delta: f64) -> Susceptibilities {
    let amp = ss.cavity_amplitude();
    let q = ss.displacement;
    let g = 2.0 * (p.g1 + 2.0 * p.g2 * q);
    let g_sm = 2.0 * amp * p.g1;
    let g_t = 4.0 * (p.g1 * q + 2.0 * p.g2 * ss.q_sq);

    let w2 = p.omega_m * ss.omega_m_eff;
    let gm = p.gamma_m;
    let slow = Complex64::new(gm, -delta); // gamma_m - i*delta
    let mid = Complex64::new(2.0 * gm, -delta); // 2*gamma_m - i*delta
    let fast = Complex64::new(2.0 * gm, -3.0 * delta); // 2*gamma_m - 3i*delta

    let chi_d = Complex64::new(w2 - delta * delta, -gm * delta);
    let chi_e = Complex64::new(2.0 * w2, 0.0) + slow * mid;
    let chi_f = 2.0 * w2 * mid - Complex64::new(0.0, delta) * chi_e;
    let chi_g = Complex64::new(delta * delta - 2.0 * gm * gm + 2.0 * w2, 3.0 * gm * delta);

    let s = (chi_d * chi_f * slow).inv();
    let alpha = slow * (g * g_sm * p.omega_m * fast - g_t * chi_d * mid);
    let beta = p.phonon_pump() * g_sm * p.omega_m * p.omega_m * fast * slow;

    Susceptibilities {
        delta,
        chi_a: Complex64::new(p.gamma_1, p.delta_a - delta),
        chi_b: Complex64::new(p.gamma_2, p.delta_b - delta),
        chi_c: Complex64::new(p.kappa, p.delta_o - delta),
        chi_d,
        chi_e,
        chi_f,
        chi_g,
        chi_a_o: Complex64::new(p.gamma_1, p.delta_a + delta),
        chi_b_o: Complex64::new(p.gamma_2, p.delta_b + delta),
        chi_c_o: Complex64::new(p.kappa, p.delta_o + delta),
        s,
        alpha,
        beta,
        g,
        g_sm,
        g_t,
    }
}

/// Upper-sideband cavity coefficient from the eliminated ladder.
///
/// Each coupling contributes its own denominator term; terms whose coupling
/// is switched off are skipped rather than multiplied by zero, so disabled
/// channels can never poison the result through a degenerate
/// sub-denominator. The atomic ladder enters in cleared-fraction form,
/// `(rest * pair + Ga^2 chi_b)` with `pair = chi_a chi_b + Omega^2`, so the
/// response stays finite where the two lower levels tune through each other
/// (`pair = 0` is a zero of the response, not a pole). A total denominator
/// within 1e-14 of the summed term magnitudes is reported as a pole.
pub fn delta_c_plus_closed_form(
    p: &SystemParams,
    ss: &SteadyState,
    delta: f64,
) -> Result<Complex64> {
    let sus = susceptibilities(p, ss, delta);
    let i = Complex64::i();

    let mut denom = sus.chi_c;
    let mut scale = sus.chi_c.norm();
    if p.g1 > 0.0 {
        let term = i * (sus.g * p.g1 * p.omega_m) / sus.chi_d;
        denom -= term;
        scale += term.norm();
    }
    if p.g2 > 0.0 {
        let term = i * sus.alpha * (p.g2 * p.omega_m) * sus.s;
        denom += term;
        scale += term.norm();
    }

    let mut numer = Complex64::new(p.eps_p, 0.0);
    if p.eps_m > 0.0 {
        let pump = p.phonon_pump();
        numer -= i * (p.g1 * p.omega_m) * pump / sus.chi_d;
        numer += i * sus.beta * p.g2 * sus.s;
    }

    if p.ga > 0.0 {
        let pair = sus.chi_a * sus.chi_b + Complex64::new(p.rabi * p.rabi, 0.0);
        let atoms = (p.ga * p.ga) * sus.chi_b;
        let total = denom * pair + atoms;
        let total_scale = scale * pair.norm() + atoms.norm();
        if total.norm() <= 1e-14 * total_scale {
            return Err(Error::Pole {
                delta,
                magnitude: total.norm(),
            });
        }
        return Ok(numer * pair / total);
    }
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::Pole {
            delta,
            magnitude: denom.norm(),
        });
    }
    Ok(numer / denom)
}

/// A variant grouping of the closed-form response in which the phonon-pump
/// drive is folded into the denominator rather than the numerator, and the
/// quadratic-channel factors are collapsed differently.
///
/// Retained for diagnostic comparison; the sideband solve arbitrates. With
/// the quadratic coupling or the pump off, the groupings coincide; with
/// both on they do not, and [`crate::analysis::compare_evaluators`] reports
/// the measured gap.
pub fn delta_c_plus_alt_form(p: &SystemParams, ss: &SteadyState, delta: f64) -> Result<Complex64> {
    let sus = susceptibilities(p, ss, delta);
    let i = Complex64::i();
    let gm = p.gamma_m;
    let pump = p.phonon_pump();

    let collapsed = 2.0 * sus.chi_d - sus.chi_e * sus.chi_g;
    let quad = Complex64::new(delta * delta - 2.0 * gm * gm, 3.0 * gm * delta);
    let alpha = (sus.g * sus.g_sm * p.omega_m) * collapsed + sus.g_t * sus.chi_d * quad;
    let beta = pump * (sus.g_sm * p.omega_m * p.omega_m) * collapsed
        / (sus.chi_d * sus.chi_f * Complex64::new(delta, gm));

    let mut denom = sus.chi_c;
    let mut scale = sus.chi_c.norm();
    if p.g1 > 0.0 {
        let term = i * (p.g1 * p.omega_m) * (Complex64::new(sus.g, 0.0) - pump) / sus.chi_d;
        denom -= term;
        scale += term.norm();
    }
    if p.g2 > 0.0 {
        let term = i * alpha * (p.g2 * p.omega_m) * sus.s;
        denom += term;
        scale += term.norm();
    }

    let mut numer = Complex64::new(p.eps_p, 0.0);
    if p.eps_m > 0.0 && p.g2 > 0.0 {
        numer += i * beta * p.g2 * sus.s;
    }

    if p.ga > 0.0 {
        let pair = sus.chi_a * sus.chi_b + Complex64::new(p.rabi * p.rabi, 0.0);
        let atoms = (p.ga * p.ga) * sus.chi_b;
        let total = denom * pair + atoms;
        let total_scale = scale * pair.norm() + atoms.norm();
        if total.norm() <= 1e-14 * total_scale {
            return Err(Error::Pole {
                delta,
                magnitude: total.norm(),
            });
        }
        return Ok(numer * pair / total);
    }
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::Pole {
            delta,
            magnitude: denom.norm(),
        });
    }
    Ok(numer / denom)
}

/// Which evaluator computes `delta_c_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Algebraic elimination of the sideband ladder.
    ClosedForm,
    /// Dense linear solve of the assembled sideband system.
    LinearSolve,
}

/// Probe-field observables at one detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResponse {
    pub delta: f64,
    /// Upper-sideband cavity coefficient the outputs derive from.
    pub delta_c_plus: Complex64,
    /// Output quadrature `sqrt(2*kappa) * delta_c_plus / eps_p`.
    pub eps_out: Complex64,
    /// Transmission `(eps_p - sqrt(kappa) * delta_c_plus) / eps_p`.
    pub t_p: Complex64,
    /// Absorption: real part of `eps_out`.
    pub nu_p: f64,
    /// Dispersion: imaginary part of `eps_out`.
    pub rho_p: f64,
}

pub(crate) fn response_from_delta_c(
    p: &SystemParams,
    delta: f64,
    delta_c_plus: Complex64,
) -> ProbeResponse {
    let eps_out = (EPS_OUT_DECAY_FACTOR * p.kappa).sqrt() * delta_c_plus / p.eps_p;
    let t_p = (Complex64::new(p.eps_p, 0.0) - (T_P_DECAY_FACTOR * p.kappa).sqrt() * delta_c_plus)
        / p.eps_p;
    ProbeResponse {
        delta,
        delta_c_plus,
        eps_out,
        t_p,
        nu_p: eps_out.re,
        rho_p: eps_out.im,
    }
}

/// Full probe response at one detuning, by either evaluator.
pub fn probe_response(
    p: &SystemParams,
    ss: &SteadyState,
    delta: f64,
    method: Method,
) -> Result<ProbeResponse> {
    let dc = match method {
        Method::ClosedForm => delta_c_plus_closed_form(p, ss, delta)?,
        Method::LinearSolve => {
            crate::oracle::solve_sidebands(&crate::oracle::assemble_plus(p, ss, delta))?.delta_c()
        }
    };
    Ok(response_from_delta_c(p, delta, dc))
}

pub(crate) fn require_off(coupling: &'static str, value: f64) -> Result<()> {
    if value != 0.0 {
        return Err(Error::ReducedPrecondition { coupling, value });
    }
    Ok(())
}

fn checked_ratio(numer: Complex64, denom: Complex64, scale: f64, delta: f64) -> Result<Complex64> {
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::Pole {
            delta,
            magnitude: denom.norm(),
        });
    }
    Ok(numer / denom)
}

/// Output quadrature of the empty cavity (all couplings and the pump off):
/// `sqrt(2*kappa) * eps_p / chi_c`.
pub fn reduced_bare(p: &SystemParams, delta: f64) -> Result<Complex64> {
    require_off("G1", p.g1)?;
    require_off("G2", p.g2)?;
    require_off("Ga", p.ga)?;
    require_off("eps_m", p.eps_m)?;
    let chi_c = Complex64::new(p.kappa, p.delta_o - delta);
    let numer = Complex64::new((EPS_OUT_DECAY_FACTOR * p.kappa).sqrt() * p.eps_p, 0.0);
    checked_ratio(numer, chi_c, p.kappa + p.delta_o.abs() + delta.abs(), delta)
}

/// Output quadrature with only the atomic ensemble coupled:
/// `sqrt(2*kappa) * (chi_a*chi_b + Omega^2) / (Ga^2*chi_b + chi_c*(chi_a*chi_b + Omega^2))`.
///
/// As printed, the probe amplitude does not appear; the expression is the
/// `eps_p = 1` normalization of the general response.
pub fn reduced_atoms(p: &SystemParams, delta: f64) -> Result<Complex64> {
    require_off("G1", p.g1)?;
    require_off("G2", p.g2)?;
    require_off("eps_m", p.eps_m)?;
    let chi_a = Complex64::new(p.gamma_1, p.delta_a - delta);
    let chi_b = Complex64::new(p.gamma_2, p.delta_b - delta);
    let chi_c = Complex64::new(p.kappa, p.delta_o - delta);
    let pair = chi_a * chi_b + Complex64::new(p.rabi * p.rabi, 0.0);
    let atom_term = (p.ga * p.ga) * chi_b;
    let denom = atom_term + chi_c * pair;
    let scale = atom_term.norm() + chi_c.norm() * pair.norm();
    checked_ratio(
        (EPS_OUT_DECAY_FACTOR * p.kappa).sqrt() * pair,
        denom,
        scale,
        delta,
    )
}

/// Output quadrature with only the linear optomechanical coupling:
/// `sqrt(2*kappa) * chi_d / (i*em*G1*omega_m - i*G*G1*omega_m + chi_c*chi_d)`.
///
/// As printed, the probe amplitude does not appear (same `eps_p = 1`
/// normalization as [`reduced_atoms`]), while the phonon pump `em` does
/// enter the denominator.
pub fn reduced_linear(p: &SystemParams, ss: &SteadyState, delta: f64) -> Result<Complex64> {
    require_off("G2", p.g2)?;
    require_off("Ga", p.ga)?;
    let g = 2.0 * (p.g1 + 2.0 * p.g2 * ss.displacement);
    let chi_c = Complex64::new(p.kappa, p.delta_o - delta);
    let chi_d = Complex64::new(
        p.omega_m * ss.omega_m_eff - delta * delta,
        -p.gamma_m * delta,
    );
    let i = Complex64::i();
    let pump_term = i * p.phonon_pump() * (p.g1 * p.omega_m);
    let coupling_term = i * (g * p.g1 * p.omega_m);
    let denom = pump_term - coupling_term + chi_c * chi_d;
    let scale = pump_term.norm() + coupling_term.norm() + chi_c.norm() * chi_d.norm();
    checked_ratio(
        (EPS_OUT_DECAY_FACTOR * p.kappa).sqrt() * chi_d,
        denom,
        scale,
        delta,
    )
}

/// Output quadrature with linear optomechanics plus atoms (pump off):
/// `sqrt(2*kappa) * eps_p * chi_d * (chi_a*chi_b + Omega^2)` over
/// `chi_b*chi_d*Ga^2 + (chi_a*chi_b + Omega^2) * (chi_c*chi_d - 2i*G1^2*omega_m)`.
pub fn reduced_linear_atoms(p: &SystemParams, ss: &SteadyState, delta: f64) -> Result<Complex64> {
    require_off("G2", p.g2)?;
    require_off("eps_m", p.eps_m)?;
    let chi_a = Complex64::new(p.gamma_1, p.delta_a - delta);
    let chi_b = Complex64::new(p.gamma_2, p.delta_b - delta);
    let chi_c = Complex64::new(p.kappa, p.delta_o - delta);
    let chi_d = Complex64::new(
        p.omega_m * ss.omega_m_eff - delta * delta,
        -p.gamma_m * delta,
    );
    let pair = chi_a * chi_b + Complex64::new(p.rabi * p.rabi, 0.0);
    let atom_term = (p.ga * p.ga) * chi_b * chi_d;
    let cavity_term = chi_c * chi_d - Complex64::new(0.0, 2.0 * p.g1 * p.g1 * p.omega_m);
    let denom = atom_term + pair * cavity_term;
    let scale = atom_term.norm() + pair.norm() * cavity_term.norm();
    checked_ratio(
        (EPS_OUT_DECAY_FACTOR * p.kappa).sqrt() * p.eps_p * chi_d * pair,
        denom,
        scale,
        delta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{scenario, steady_state};
    use crate::oracle::{assemble_plus, solve_sidebands};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig(name: &str) -> (SystemParams, SteadyState) {
        let p = scenario(name).unwrap().params;
        let ss = steady_state(&p).unwrap();
        (p, ss)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn susceptibility_spot_values() {
        let (p, ss) = fig("fig2");
        let at_zero = susceptibilities(&p, &ss, 0.0);
        assert_eq!(at_zero.chi_a, Complex64::new(p.gamma_1, p.delta_a));
        assert_eq!(at_zero.chi_d, Complex64::new(p.omega_m * 1.0006, 0.0));

        let at_res = susceptibilities(&p, &ss, 1.0);
        assert_eq!(at_res.chi_c, Complex64::new(0.1, 0.0));

        let d = 0.37;
        let fwd = susceptibilities(&p, &ss, d);
        let back = susceptibilities(&p, &ss, -d);
        assert_eq!(fwd.chi_a_o, back.chi_a);
        assert_eq!(fwd.chi_b_o, back.chi_b);
        assert_eq!(fwd.chi_c_o, back.chi_c);
    }

    #[test]
    fn bare_cavity_collapses_to_single_susceptibility() {
        let (p, ss) = fig("fig2");
        let dc = delta_c_plus_closed_form(&p, &ss, 1.0).unwrap();
        assert_relative_eq!(dc.re, 10.0, max_relative = 1e-12);
        assert_abs_diff_eq!(dc.im, 0.0, epsilon = 1e-12);

        let d = 1.73;
        let expect = Complex64::new(p.eps_p, 0.0) / Complex64::new(p.kappa, p.delta_o - d);
        assert!(rel(delta_c_plus_closed_form(&p, &ss, d).unwrap(), expect) < 1e-15);
    }

    #[test]
    fn bare_resonance_outputs() {
        let (p, ss) = fig("fig2");
        let r = probe_response(&p, &ss, 1.0, Method::ClosedForm).unwrap();
        assert_abs_diff_eq!(r.nu_p, 4.4721, epsilon = 1e-4);
        assert_abs_diff_eq!(r.t_p.re, -2.1623, epsilon = 1e-4);
        assert_abs_diff_eq!(r.t_p.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_sideband_means_no_output() {
        let (p, _) = fig("fig2");
        let r = response_from_delta_c(&p, 0.5, Complex64::ZERO);
        assert_eq!(r.eps_out, Complex64::ZERO);
        assert_eq!(r.t_p, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn transmission_identity() {
        // eps_p * (1 - t_p) = sqrt(kappa) * delta_c_plus. Subtracting t_p
        // from 1 cancels leading bits when the sideband is weak, so the
        // identity holds to ~ulp / |sideband|, not to machine epsilon.
        let (p, ss) = fig("fig6");
        for d in [0.3, 1.0, 2.2] {
            let r = probe_response(&p, &ss, d, Method::ClosedForm).unwrap();
            let lhs = (Complex64::new(1.0, 0.0) - r.t_p) * p.eps_p;
            let rhs = p.kappa.sqrt() * r.delta_c_plus;
            assert!(rel(lhs, rhs) < 1e-13, "delta {d}: {lhs} vs {rhs}");
        }

        let mut p_scaled = p;
        p_scaled.eps_p = 1.7;
        let r = probe_response(&p_scaled, &ss, 1.1, Method::ClosedForm).unwrap();
        let lhs = (Complex64::new(1.0, 0.0) - r.t_p) * p_scaled.eps_p;
        let rhs = p_scaled.kappa.sqrt() * r.delta_c_plus;
        assert!(rel(lhs, rhs) < 1e-13);
    }

    #[test]
    fn reduced_bare_matches_hand_value() {
        let (p, _) = fig("fig2");
        let out = reduced_bare(&p, 1.0).unwrap();
        assert_relative_eq!(out.re, 0.2_f64.sqrt() / 0.1, max_relative = 1e-12);
        assert_abs_diff_eq!(out.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_preconditions_are_enforced() {
        let (p4, _) = fig("fig4");
        assert_eq!(
            reduced_bare(&p4, 1.0).unwrap_err(),
            Error::ReducedPrecondition {
                coupling: "G1",
                value: 0.15
            }
        );
        let (p6, ss6) = fig("fig6");
        assert!(matches!(
            reduced_linear(&p6, &ss6, 1.0),
            Err(Error::ReducedPrecondition { coupling: "G2", .. })
        ));
        assert!(matches!(
            reduced_linear_atoms(&p6, &ss6, 1.0),
            Err(Error::ReducedPrecondition { coupling: "G2", .. })
        ));
        let (p3, _) = fig("fig3");
        assert!(reduced_atoms(&p3, 1.0).is_ok());
    }

    #[test]
    fn reduced_atoms_collapses_without_atoms() {
        let mut p = scenario("fig2").unwrap().params;
        p.ga = 0.0;
        p.rabi = 0.0;
        for d in [0.0, 0.5, 1.0, 1.5] {
            let a = reduced_atoms(&p, d).unwrap();
            let b = reduced_bare(&p, d).unwrap();
            assert!(rel(a, b) < 1e-12, "delta {d}");
        }
    }

    #[test]
    fn reduced_linear_atoms_collapses_without_atoms() {
        let (p, ss) = fig("fig4");
        for k in 0..200 {
            let d = 2.0 * k as f64 / 199.0;
            let a = reduced_linear_atoms(&p, &ss, d).unwrap();
            let b = reduced_linear(&p, &ss, d).unwrap();
            assert!(rel(a, b) < 1e-10, "delta {d}");
        }
    }

    #[test]
    #[allow(clippy::type_complexity)]
    fn reduced_forms_agree_with_closed_form() {
        // Convert each reduced output quadrature back to delta_c_plus and
        // compare against the full evaluator on the same parameters.
        let cases: [(
            &str,
            fn(&SystemParams, &SteadyState, f64) -> Result<Complex64>,
        ); 4] = [
            ("fig2", |p, _, d| reduced_bare(p, d)),
            ("fig3", |p, _, d| reduced_atoms(p, d)),
            ("fig4", reduced_linear),
            ("fig5", reduced_linear_atoms),
        ];
        for (name, f) in cases {
            let (p, ss) = fig(name);
            let norm = (EPS_OUT_DECAY_FACTOR * p.kappa).sqrt();
            for k in 0..=200 {
                let d = 2.0 * k as f64 / 200.0;
                let via_reduced = f(&p, &ss, d).unwrap() * p.eps_p / norm;
                let full = delta_c_plus_closed_form(&p, &ss, d).unwrap();
                assert!(
                    rel(via_reduced, full) < 1e-12,
                    "{name} at delta {d}: {:.3e}",
                    rel(via_reduced, full)
                );
            }
        }
    }

    #[test]
    fn alt_grouping_coincides_when_quadratic_channel_is_off() {
        for name in ["fig2", "fig3", "fig4", "fig5"] {
            let (p, ss) = fig(name);
            for k in 0..=200 {
                let d = 2.0 * k as f64 / 200.0;
                let a = delta_c_plus_alt_form(&p, &ss, d).unwrap();
                let c = delta_c_plus_closed_form(&p, &ss, d).unwrap();
                assert!(rel(a, c) < 1e-12, "{name} at delta {d}");
            }
        }
    }

    #[test]
    fn alt_grouping_departs_with_quadratic_coupling_on() {
        let (p6, ss6) = fig("fig6");
        let mut worst6 = 0.0_f64;
        for k in 0..=200 {
            let d = 4.0 * k as f64 / 200.0;
            let a = delta_c_plus_alt_form(&p6, &ss6, d).unwrap();
            let c = delta_c_plus_closed_form(&p6, &ss6, d).unwrap();
            worst6 = worst6.max(rel(a, c));
        }
        assert!(worst6 > 1e-3, "fig6 max deviation {worst6:.3e}");

        let (p7, ss7) = fig("fig7");
        let mut worst7 = 0.0_f64;
        for k in 0..=200 {
            let d = 4.0 * k as f64 / 200.0;
            let a = delta_c_plus_alt_form(&p7, &ss7, d).unwrap();
            let c = delta_c_plus_closed_form(&p7, &ss7, d).unwrap();
            worst7 = worst7.max(rel(a, c));
        }
        assert!(worst7 > 1e3, "fig7 max deviation {worst7:.3e}");
    }

    #[test]
    fn pump_phase_is_inert_without_pump_amplitude() {
        let mut p = scenario("fig6").unwrap().params;
        assert_eq!(p.eps_m, 0.0);
        let base_ss = steady_state(&p).unwrap();
        p.phi_m = 1.234;
        let turned_ss = steady_state(&p).unwrap();
        assert_eq!(base_ss, turned_ss);
        let q = scenario("fig6").unwrap().params;
        for d in [0.2, 0.9, 1.7, 3.1] {
            let a = delta_c_plus_closed_form(&q, &base_ss, d).unwrap();
            let b = delta_c_plus_closed_form(&p, &turned_ss, d).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn drive_terms_enter_affinely() {
        let (p, ss) = fig("fig7");
        let d = 1.3;

        let mut p1 = p;
        p1.eps_p = 1.0;
        let mut p2 = p;
        p2.eps_p = 2.0;
        let mut p3 = p;
        p3.eps_p = 3.0;
        let inc_a = delta_c_plus_closed_form(&p2, &ss, d).unwrap()
            - delta_c_plus_closed_form(&p1, &ss, d).unwrap();
        let inc_b = delta_c_plus_closed_form(&p3, &ss, d).unwrap()
            - delta_c_plus_closed_form(&p2, &ss, d).unwrap();
        assert!(rel(inc_a, inc_b) < 1e-12);
    }

    #[test]
    fn degenerate_atomic_pair_yields_zero_response() {
        // gamma_1 = gamma_2 = Delta_a = Delta_b = 0 with Omega = 1 makes
        // chi_a * chi_b + Omega^2 vanish exactly at delta = 1. The cavity
        // stays well-defined there: the atoms absorb the whole sideband and
        // the response is zero, not a pole.
        let mut p = scenario("fig2").unwrap().params;
        p.ga = 0.5;
        p.rabi = 1.0;
        p.gamma_1 = 0.0;
        p.gamma_2 = 0.0;
        p.delta_a = 0.0;
        p.delta_b = 0.0;
        let ss = steady_state(&p).unwrap();
        let closed = delta_c_plus_closed_form(&p, &ss, 1.0).unwrap();
        assert_eq!(closed, Complex64::ZERO);
        let solved = solve_sidebands(&assemble_plus(&p, &ss, 1.0)).unwrap();
        assert!(solved.delta_c().norm() < 1e-14);
        assert!(delta_c_plus_closed_form(&p, &ss, 1.1).is_ok());
    }

    #[test]
    fn lower_level_resonance_with_control_off_is_a_pole() {
        // With the control beam off and the undamped lower level tuned to
        // delta, chi_b and the whole cleared denominator vanish together:
        // a genuine pole of the response.
        let mut p = scenario("fig2").unwrap().params;
        p.ga = 0.5;
        p.rabi = 0.0;
        p.gamma_1 = 0.3;
        p.gamma_2 = 0.0;
        p.delta_a = 1.0;
        p.delta_b = 1.0;
        let ss = steady_state(&p).unwrap();
        match delta_c_plus_closed_form(&p, &ss, 1.0) {
            Err(Error::Pole { delta, .. }) => assert_eq!(delta, 1.0),
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(delta_c_plus_closed_form(&p, &ss, 1.1).is_ok());
    }
}
