//! Detuning sweeps and what they contain: transparency-window detection,
//! response-denominator root reports, evaluator cross-comparison, and
//! phonon-pump phase studies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{companion_roots, poly_add, poly_eval, poly_mul, poly_scale};
use crate::model::{steady_state, validate_params, SteadyState, SystemParams};
use crate::oracle::{assemble_plus, solve_sidebands};
use crate::response::{
    delta_c_plus_alt_form, delta_c_plus_closed_form, probe_response, require_off, Method,
    ProbeResponse,
};
use crate::{Error, Result};

/// Uniform detuning grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub const DEFAULT: Grid = Grid {
        min: 0.0,
        max: 4.0,
        count: 801,
    };

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidGrid("grid bounds must be finite"));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid("grid needs at least two points"));
        }
        if self.min >= self.max {
            return Err(Error::InvalidGrid("grid min must be below grid max"));
        }
        Ok(())
    }

    /// Grid nodes; both endpoints are produced exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Spacing between adjacent nodes.
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::DEFAULT
    }
}

/// A swept response: detunings and responses run in parallel; detunings
/// whose evaluation hit a pole or a singular system are listed in
/// `skipped` instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub method: Method,
    pub deltas: Vec<f64>,
    pub responses: Vec<ProbeResponse>,
    pub skipped: Vec<f64>,
}

impl Profile {
    /// All grid rows in detuning order; a skipped detuning carries no
    /// response.
    pub fn rows(&self) -> Vec<(f64, Option<&ProbeResponse>)> {
        let mut out = Vec::with_capacity(self.deltas.len() + self.skipped.len());
        let (mut i, mut j) = (0, 0);
        while i < self.deltas.len() || j < self.skipped.len() {
            let take_valid = match (self.deltas.get(i), self.skipped.get(j)) {
                (Some(&d), Some(&s)) => d <= s,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_valid {
                out.push((self.deltas[i], Some(&self.responses[i])));
                i += 1;
            } else {
                out.push((self.skipped[j], None));
                j += 1;
            }
        }
        out
    }
}

/// Sweeps the probe response over a detuning grid.
///
/// Pole and singular-system detunings are recorded and skipped; any other
/// error aborts the sweep.
pub fn sweep(p: &SystemParams, ss: &SteadyState, grid: &Grid, method: Method) -> Result<Profile> {
    validate_params(p)?;
    grid.validate()?;
    let results: Vec<(f64, Result<ProbeResponse>)> = grid
        .points()
        .into_par_iter()
        .map(|d| (d, probe_response(p, ss, d, method)))
        .collect();
    let mut deltas = Vec::with_capacity(results.len());
    let mut responses = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (d, outcome) in results {
        match outcome {
            Ok(r) => {
                deltas.push(d);
                responses.push(r);
            }
            Err(Error::Pole { .. }) | Err(Error::SingularSideband { .. }) => skipped.push(d),
            Err(e) => return Err(e),
        }
    }
    Ok(Profile {
        method,
        deltas,
        responses,
        skipped,
    })
}

/// Whether a spectral feature is a local maximum or minimum of the
/// absorption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

/// One detected absorption extremum, refined off-grid by a parabola
/// through the extremal sample and its neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    pub location: f64,
    pub value: f64,
    /// Topographic prominence: height above the higher of the two key
    /// saddles separating this extremum from taller terrain.
    pub prominence: f64,
}

/// Default prominence floor: two percent of the absorption span.
pub fn default_prominence(profile: &Profile) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in &profile.responses {
        lo = lo.min(r.nu_p);
        hi = hi.max(r.nu_p);
    }
    if hi > lo {
        0.02 * (hi - lo)
    } else {
        0.0
    }
}

/// Vertex of the parabola through three samples; falls back to the middle
/// sample when the three are collinear.
fn refine_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let h1 = x[0] - x[1];
    let h2 = x[2] - x[1];
    let d1 = y[0] - y[1];
    let d2 = y[2] - y[1];
    let det = h1 * h1 * h2 - h2 * h2 * h1;
    if det == 0.0 {
        return (x[1], y[1]);
    }
    let a = (d1 * h2 - d2 * h1) / det;
    let b = (d2 * h1 * h1 - d1 * h2 * h2) / det;
    if a == 0.0 || !a.is_finite() || !b.is_finite() {
        return (x[1], y[1]);
    }
    (x[1] - b / (2.0 * a), y[1] - b * b / (4.0 * a))
}

/// Prominence of the strict extremum at `i` in an already sign-adjusted
/// series (extremum is a maximum of `y`): walk out on each side until the
/// first strictly higher sample or the boundary, track the minimum over
/// each stretch, and measure against the higher of the two.
fn walk_out_prominence(y: &[f64], i: usize) -> f64 {
    let yi = y[i];
    let mut left_min = yi;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if y[j] > yi {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = yi;
    let mut k = i;
    while k + 1 < y.len() {
        k += 1;
        if y[k] > yi {
            break;
        }
        right_min = right_min.min(y[k]);
    }
    yi - left_min.max(right_min)
}

/// Finds strict interior absorption extrema with at least
/// `min_prominence` of topographic prominence.
///
/// Pole-skipped grid points are excised before scanning, so a feature
/// whose neighborhood spans a gap reflects the surviving samples.
pub fn detect_features(profile: &Profile, min_prominence: f64) -> Vec<SpectralFeature> {
    let xs = &profile.deltas;
    let nu: Vec<f64> = profile.responses.iter().map(|r| r.nu_p).collect();
    let mut features = Vec::new();
    if xs.len() < 3 {
        return features;
    }
    for i in 1..xs.len() - 1 {
        for (kind, sign) in [(FeatureKind::Peak, 1.0), (FeatureKind::Dip, -1.0)] {
            let y = |k: usize| sign * nu[k];
            if !(y(i) > y(i - 1) && y(i) > y(i + 1)) {
                continue;
            }
            let signed: Vec<f64> = nu.iter().map(|v| sign * v).collect();
            let prominence = walk_out_prominence(&signed, i);
            if prominence < min_prominence {
                continue;
            }
            let (location, value) =
                refine_vertex([xs[i - 1], xs[i], xs[i + 1]], [y(i - 1), y(i), y(i + 1)]);
            features.push(SpectralFeature {
                kind,
                location,
                value: sign * value,
                prominence,
            });
        }
    }
    features.sort_by(|a, b| a.location.total_cmp(&b.location));
    features
}

/// Which reduced response denominator to report the roots of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    /// Empty cavity; degree 1.
    #[serde(rename = "bare")]
    BareCavity,
    /// Atoms only; degree 3.
    #[serde(rename = "atoms")]
    AtomsOnly,
    /// Linear optomechanics plus atoms; degree 5.
    #[serde(rename = "linear-atoms")]
    LinearAtoms,
}

/// Complex detuning roots of a reduced response denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub case: RootCase,
    /// Polynomial coefficients in the detuning, ascending order.
    pub coefficients: Vec<Complex64>,
    /// All complex roots, sorted by real part then imaginary part.
    pub roots: Vec<Complex64>,
    /// Roots close enough to the real axis to shape the swept response.
    pub resonant: Vec<Complex64>,
    /// Resonance cutoff on |Im root|: five times the widest linewidth.
    pub threshold: f64,
    /// Largest |polynomial(root)| over the reported roots.
    pub max_residual: f64,
    /// Set when the leading coefficient is so small relative to the rest
    /// that the root count itself is doubtful.
    pub ill_conditioned: bool,
}

/// Builds the reduced-denominator polynomial for `case` and reports its
/// roots via the companion eigenproblem.
pub fn denominator_roots(p: &SystemParams, case: RootCase) -> Result<RootReport> {
    validate_params(p)?;
    let neg_i = Complex64::new(0.0, -1.0);
    let chi_a = vec![Complex64::new(p.gamma_1, p.delta_a), neg_i];
    let chi_b = vec![Complex64::new(p.gamma_2, p.delta_b), neg_i];
    let chi_c = vec![Complex64::new(p.kappa, p.delta_o), neg_i];
    let chi_d = vec![
        Complex64::new(p.omega_m * p.omega_m_eff, 0.0),
        Complex64::new(0.0, -p.gamma_m),
        Complex64::new(-1.0, 0.0),
    ];
    let pair = poly_add(
        &poly_mul(&chi_a, &chi_b),
        &[Complex64::new(p.rabi * p.rabi, 0.0)],
    );
    let atoms = poly_add(
        &poly_mul(&chi_c, &pair),
        &poly_scale(&chi_b, Complex64::new(p.ga * p.ga, 0.0)),
    );

    let (coefficients, expected_degree) = match case {
        RootCase::BareCavity => {
            require_off("G1", p.g1)?;
            require_off("G2", p.g2)?;
            require_off("Ga", p.ga)?;
            require_off("eps_m", p.eps_m)?;
            (chi_c, 1)
        }
        RootCase::AtomsOnly => {
            require_off("G1", p.g1)?;
            require_off("G2", p.g2)?;
            require_off("eps_m", p.eps_m)?;
            (atoms, 3)
        }
        RootCase::LinearAtoms => {
            require_off("G2", p.g2)?;
            require_off("eps_m", p.eps_m)?;
            let shift = poly_scale(&pair, Complex64::new(0.0, -2.0 * p.g1 * p.g1 * p.omega_m));
            (poly_add(&poly_mul(&chi_d, &atoms), &shift), 5)
        }
    };
    debug_assert_eq!(coefficients.len(), expected_degree + 1);

    let coeff_scale = coefficients
        .iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    let ill_conditioned =
        coefficients.last().map(|c| c.norm()).unwrap_or(0.0) < 1e-12 * coeff_scale;

    let mut roots = companion_roots(&coefficients);
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let threshold = 5.0 * p.kappa.max(p.gamma_1).max(p.gamma_m);
    let resonant: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| r.im.abs() <= threshold)
        .collect();
    let max_residual = roots
        .iter()
        .map(|&r| poly_eval(&coefficients, r).norm())
        .fold(0.0_f64, f64::max);

    Ok(RootReport {
        case,
        coefficients,
        roots,
        resonant,
        threshold,
        max_residual,
        ill_conditioned,
    })
}

/// Worst relative disagreement between two evaluators over a grid, and
/// where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub max_rel: f64,
    pub at_delta: f64,
}

impl Deviation {
    fn new() -> Self {
        Deviation {
            max_rel: 0.0,
            at_delta: f64::NAN,
        }
    }

    fn update(&mut self, rel: f64, delta: f64) {
        if self.at_delta.is_nan() || rel > self.max_rel {
            self.max_rel = rel;
            self.at_delta = delta;
        }
    }
}

/// Cross-comparison of the response evaluators over one grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluatorComparison {
    /// Grid points that produced values from all evaluators.
    pub compared: usize,
    /// Grid points skipped because some evaluator hit a pole or a
    /// singular system.
    pub skipped: Vec<f64>,
    pub closed_vs_solve: Deviation,
    pub alt_vs_solve: Deviation,
    pub alt_vs_closed: Deviation,
    /// Relative shift of the solved sideband when the phonon-pump drive
    /// amplitude is halved; measures how strongly the result depends on
    /// the pump drive convention. Absent when the pump is off.
    pub half_pump_shift: Option<Deviation>,
}

fn rel_err(value: Complex64, reference: Complex64) -> f64 {
    (value - reference).norm() / reference.norm().max(f64::MIN_POSITIVE)
}

/// Evaluates closed form, variant grouping, and dense solve over a grid
/// and reports their worst pairwise disagreements.
pub fn compare_evaluators(
    p: &SystemParams,
    ss: &SteadyState,
    grid: &Grid,
) -> Result<EvaluatorComparison> {
    validate_params(p)?;
    grid.validate()?;
    let mut compared = 0;
    let mut skipped = Vec::new();
    let mut closed_vs_solve = Deviation::new();
    let mut alt_vs_solve = Deviation::new();
    let mut alt_vs_closed = Deviation::new();
    let mut half_pump = Deviation::new();

    for d in grid.points() {
        let sys = assemble_plus(p, ss, d);
        let outcome = (
            delta_c_plus_closed_form(p, ss, d),
            delta_c_plus_alt_form(p, ss, d),
            solve_sidebands(&sys),
        );
        let (closed, alt, solved) = match outcome {
            (Ok(c), Ok(a), Ok(s)) => (c, a, s),
            (Err(Error::Pole { .. }), _, _)
            | (_, Err(Error::Pole { .. }), _)
            | (_, _, Err(Error::SingularSideband { .. })) => {
                skipped.push(d);
                continue;
            }
            (Err(e), _, _) => return Err(e),
            (_, Err(e), _) => return Err(e),
            (_, _, Err(e)) => return Err(e),
        };
        let reference = solved.delta_c();
        closed_vs_solve.update(rel_err(closed, reference), d);
        alt_vs_solve.update(rel_err(alt, reference), d);
        alt_vs_closed.update(rel_err(alt, closed), d);
        if p.eps_m > 0.0 {
            let mut half = sys.clone();
            half.rhs[1] *= 0.5;
            let half_solved = solve_sidebands(&half)?;
            half_pump.update(rel_err(half_solved.delta_c(), reference), d);
        }
        compared += 1;
    }

    Ok(EvaluatorComparison {
        compared,
        skipped,
        closed_vs_solve,
        alt_vs_solve,
        alt_vs_closed,
        half_pump_shift: (p.eps_m > 0.0).then_some(half_pump),
    })
}

/// Sweeps run at several phonon-pump phases, with one dip tracked across
/// them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseStudy {
    pub phases: Vec<f64>,
    /// One closed-form profile per phase, same order.
    pub profiles: Vec<Profile>,
    /// Detected features per phase, same order.
    pub features: Vec<Vec<SpectralFeature>>,
    /// The dip nearest the quadratic-channel beat detuning
    /// `2*sqrt(omega_m * omega_m_eff)` at the first phase, then chained to
    /// the nearest dip at each following phase.
    pub tracked: Vec<SpectralFeature>,
}

/// Runs one sweep per pump phase and tracks the quadratic-channel dip.
///
/// The steady state shifts with the phase (the pump's zero-frequency
/// component enters the displacement variance), so it is recomputed per
/// phase; the passed `ss` is reused only for a phase bit-equal to
/// `p.phi_m`.
pub fn phase_study(
    p: &SystemParams,
    ss: &SteadyState,
    phases: &[f64],
    grid: &Grid,
    min_prominence: Option<f64>,
) -> Result<PhaseStudy> {
    validate_params(p)?;
    grid.validate()?;
    if p.eps_m <= 0.0 {
        return Err(Error::InvalidPhaseStudy(
            "phase study requires a running phonon pump (eps_m > 0)",
        ));
    }
    if phases.len() < 2 {
        return Err(Error::InvalidPhaseStudy(
            "phase study requires at least two phases",
        ));
    }

    let mut profiles = Vec::with_capacity(phases.len());
    let mut features = Vec::with_capacity(phases.len());
    for &phi in phases {
        let mut p_phase = *p;
        p_phase.phi_m = phi;
        let ss_phase = if phi == p.phi_m {
            *ss
        } else {
            steady_state(&p_phase)?
        };
        let profile = sweep(&p_phase, &ss_phase, grid, Method::ClosedForm)?;
        let floor = min_prominence.unwrap_or_else(|| default_prominence(&profile));
        features.push(detect_features(&profile, floor));
        profiles.push(profile);
    }

    let beat = 2.0 * (p.omega_m * p.omega_m_eff).sqrt();
    let mut tracked = Vec::with_capacity(phases.len());
    let mut target = beat;
    for (phase_features, &phi) in features.iter().zip(phases) {
        let nearest = phase_features
            .iter()
            .filter(|f| f.kind == FeatureKind::Dip)
            .min_by(|a, b| {
                (a.location - target)
                    .abs()
                    .total_cmp(&(b.location - target).abs())
            })
            .copied()
            .ok_or(Error::FeatureLost { phase: phi })?;
        target = nearest.location;
        tracked.push(nearest);
    }

    Ok(PhaseStudy {
        phases: phases.to_vec(),
        profiles,
        features,
        tracked,
    })
}
