//! Probe-field optical response of a hybrid atom-optomechanical cavity.
//!
//! The system is a driven optical cavity coupled to a mechanical mode both
//! linearly (`G1`) and quadratically (`G2`), and to a three-level
//! lambda-type atomic ensemble (`Ga`, control Rabi frequency `Omega`). A
//! strong pump at `eps_l`, a weak probe at `eps_p` detuned by `delta`, and
//! an optional phonon pump `eps_m * exp(i*Phi_m)` drive it. The observable
//! of interest is the first-order probe sideband of the intracavity field,
//! `delta_c_plus`, from which the output quadrature `eps_out` (absorption
//! `nu_p`, dispersion `rho_p`) and the transmission `t_p` follow.
//!
//! Three independent evaluators compute `delta_c_plus`:
//!
//! - [`response::delta_c_plus_closed_form`]: the algebraic solution of the
//!   sideband ladder, expressed through the susceptibility chain.
//! - [`oracle::solve_sidebands`]: a dense 8x8 complex linear solve of the
//!   first-order sideband equations, assembled row by row.
//! - [`oracle::time_domain_delta_c`]: RK4 integration of the linearized
//!   equations of motion followed by Fourier projection onto the probe
//!   sideband.
//!
//! Agreement between them is the correctness argument; [`analysis`] adds
//! detuning sweeps, transparency-window detection, denominator-root
//! reports, and phonon-pump phase studies on top.

mod linalg;

pub mod analysis;
pub mod model;
pub mod oracle;
pub mod response;

pub use analysis::{
    compare_evaluators, default_prominence, denominator_roots, detect_features, phase_study, sweep,
    Deviation, EvaluatorComparison, FeatureKind, Grid, PhaseStudy, Profile, RootCase, RootReport,
    SpectralFeature,
};
pub use model::{
    scenario, scenario_names, stationary_residual, steady_state, validate_params, ScenarioPreset,
    SteadyState, SystemParams,
};
pub use oracle::{
    assemble_minus, assemble_plus, drift_eigenvalues, drift_matrix, solve_sidebands,
    time_domain_delta_c, SidebandSolution, SidebandSystem,
};
pub use response::{
    delta_c_plus_alt_form, delta_c_plus_closed_form, probe_response, susceptibilities, Method,
    ProbeResponse, Susceptibilities,
};

/// Unified error type for the whole crate.
///
/// Validation and precondition failures are usage errors; the remaining
/// variants report genuine numerical conditions (a response pole, a singular
/// sideband system, an unstable drift matrix) that callers such as sweeps
/// are expected to handle point by point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A system parameter violates its declared range.
    #[error("{0}")]
    InvalidParams(&'static str),

    /// Scenario name not in the preset registry.
    #[error("unknown scenario `{name}`; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: &'static str },

    /// The steady-state denominator is too close to zero to divide by.
    #[error(
        "degenerate operating point: steady-state denominator magnitude {magnitude:.3e} \
         is below 1e-14 of its scale {scale:.3e}"
    )]
    DegenerateOperatingPoint { magnitude: f64, scale: f64 },

    /// The closed-form response denominator vanishes at this detuning.
    #[error(
        "response pole at delta = {delta}: denominator magnitude {magnitude:.3e} \
         is below 1e-14 of its scale"
    )]
    Pole { delta: f64, magnitude: f64 },

    /// A reduced-case evaluator was called with a coupling it requires off.
    #[error("reduced form requires {coupling} = 0, got {value}")]
    ReducedPrecondition { coupling: &'static str, value: f64 },

    /// The sideband coefficient matrix cannot be solved reliably.
    #[error(
        "sideband system is numerically singular at delta = {delta} \
         (1-norm condition estimate {cond:.3e})"
    )]
    SingularSideband { delta: f64, cond: f64 },

    /// The homogeneous drift matrix has a non-decaying mode, so time-domain
    /// transients never settle and the Fourier projection is meaningless.
    #[error(
        "drift matrix is not asymptotically stable: an eigenvalue has \
         real part {max_re:+.6e}; time-domain transients do not decay"
    )]
    UnstableDrift { max_re: f64 },

    /// Integration step too coarse for the fastest frequency present.
    #[error("time step {dt:.6e} exceeds the resolution bound {bound:.6e}")]
    StepTooLarge { dt: f64, bound: f64 },

    /// The projected sideband coefficient has not settled between the last
    /// two projection windows; the horizon is too short.
    #[error(
        "projected coefficient drifted by {drift:.3e} (relative) between the \
         last two projection windows, above the {tolerance:.1e} tolerance; \
         increase the horizon"
    )]
    ProjectionDrift { drift: f64, tolerance: f64 },

    /// A sweep grid fails its shape requirements.
    #[error("{0}")]
    InvalidGrid(&'static str),

    /// A phase study was requested with unusable inputs.
    #[error("{0}")]
    InvalidPhaseStudy(&'static str),

    /// Feature tracking across phases lost its target.
    #[error("no dip detected at phase {phase}; cannot align the tracked window")]
    FeatureLost { phase: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
