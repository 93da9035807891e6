//! Dense complex linear algebra sized for this crate's needs: the 8x8
//! sideband systems, their drift spectra, and companion matrices of the
//! reduced denominator polynomials (degree <= 5).
//!
//! Everything here is written against row-major `Vec<Complex64>` storage and
//! favors plain, checkable loops over generality. The matrices are tiny, so
//! partial-pivot LU with an explicit inverse gives the 1-norm condition
//! number directly, and an explicit-shift QR iteration on the Hessenberg
//! form is more than accurate enough for the spectra we classify.

// The factorizations walk several arrays in lockstep from a pivot index;
// the index form keeps them aligned with the textbook algebra.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

pub(crate) type C64 = Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CMatrix {
    pub n: usize,
    pub a: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = CMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged matrix rows");
            m.a[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.a[i * self.n + j]
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            let mut acc = C64::new(0.0, 0.0);
            for (aij, xj) in row.iter().zip(x) {
                acc += aij * xj;
            }
            y[i] = acc;
        }
        y
    }
}

/// Packed LU decomposition with partial pivoting: `lu` holds L below the
/// diagonal (unit diagonal implied) and U on and above it; `perm[k]` is the
/// row swapped into position k at step k.
pub(crate) struct LuFactors {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

/// Factors `m`; `None` when a pivot is exactly zero (structurally singular).
pub(crate) fn lu_factor(m: &CMatrix) -> Option<LuFactors> {
    let n = m.n;
    let mut lu = m.a.clone();
    let mut perm = vec![0usize; n];
    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].norm();
        for i in k + 1..n {
            let mag = lu[i * n + k].norm();
            if mag > best {
                best = mag;
                p = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        perm[k] = p;
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let factor = lu[i * n + k] / pivot;
            lu[i * n + k] = factor;
            for j in k + 1..n {
                let ukj = lu[k * n + j];
                lu[i * n + j] -= factor * ukj;
            }
        }
    }
    Some(LuFactors { n, lu, perm })
}

impl LuFactors {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.perm[k]);
        }
        // Ly = Pb with unit lower-triangular L.
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // Ux = y.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.n;
        let mut inv = CMatrix::zeros(n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = C64::new(0.0, 0.0);
            for i in 0..n {
                *inv.at_mut(i, j) = col[i];
            }
        }
        inv
    }
}

/// 1-norm condition number via the explicit inverse. Exact rather than
/// estimated; affordable because every matrix here is at most 8x8.
pub(crate) fn condition_1norm(m: &CMatrix, factors: &LuFactors) -> f64 {
    m.norm1() * factors.inverse().norm1()
}

/// All eigenvalues of a general complex matrix: Householder reduction to
/// upper Hessenberg form, then explicit single-shift QR with Givens
/// rotations, deflating from the bottom. Order of the returned values is
/// not specified.
pub(crate) fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    let n = m.n;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m.at(0, 0)];
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    qr_eigenvalues(&mut h)
}

/// In-place unitary similarity reduction to upper Hessenberg form.
fn hessenberg(h: &mut CMatrix) {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        // Householder vector for the column below the subdiagonal.
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h.at(i, k).norm_sqr();
        }
        let mut tail_sq = 0.0;
        for i in k + 2..n {
            tail_sq += h.at(i, k).norm_sqr();
        }
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = h.at(k + 1, k);
        let norm = norm_sq.sqrt();
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h.at(i, k);
        }
        let vhv: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vhv == 0.0 {
            continue;
        }
        let tau = 2.0 / vhv;
        // Left: H -= tau * v * (v^H H), rows k+1..n.
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in k + 1..n {
                dot += v[i].conj() * h.at(i, j);
            }
            let scaled = dot * tau;
            for i in k + 1..n {
                let vi = v[i];
                *h.at_mut(i, j) -= vi * scaled;
            }
        }
        // Right: H -= tau * (H v) * v^H, columns k+1..n.
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += h.at(i, j) * v[j];
            }
            let scaled = dot * tau;
            for j in k + 1..n {
                let vj_conj = v[j].conj();
                *h.at_mut(i, j) -= scaled * vj_conj;
            }
        }
        // The transformed column is alpha by construction; store it exactly
        // and keep the zeros explicit.
        *h.at_mut(k + 1, k) = alpha;
        for i in k + 2..n {
            *h.at_mut(i, k) = C64::new(0.0, 0.0);
        }
    }
}

/// Explicit-shift QR iteration on an upper Hessenberg matrix, consuming it.
fn qr_eigenvalues(h: &mut CMatrix) -> Vec<C64> {
    let n = h.n;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let mut stagnation = 0usize;
    let mut total_sweeps = 0usize;
    while hi > 0 {
        // Deflate every negligible subdiagonal at the bottom of the block.
        if hi == 1 {
            eigs.push(h.at(0, 0));
            hi = 0;
            continue;
        }
        let sub = h.at(hi - 1, hi - 2).norm();
        let scale = h.at(hi - 2, hi - 2).norm() + h.at(hi - 1, hi - 1).norm();
        if sub <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            eigs.push(h.at(hi - 1, hi - 1));
            *h.at_mut(hi - 1, hi - 2) = C64::new(0.0, 0.0);
            hi -= 1;
            stagnation = 0;
            continue;
        }
        // Find the top of the unreduced block containing hi-1.
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h.at(lo, lo - 1).norm();
            let sc = h.at(lo - 1, lo - 1).norm() + h.at(lo, lo).norm();
            if s <= f64::EPSILON * sc.max(f64::MIN_POSITIVE) {
                *h.at_mut(lo, lo - 1) = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        stagnation += 1;
        total_sweeps += 1;
        assert!(
            total_sweeps <= 200 * n,
            "QR eigenvalue iteration exceeded {} sweeps without deflating",
            200 * n
        );
        let shift = if stagnation.is_multiple_of(30) {
            // Exceptional shift to break symmetric stalls.
            h.at(hi - 1, hi - 1) + C64::new(0.75 * h.at(hi - 1, hi - 2).norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };
        qr_sweep(h, lo, hi, shift);
    }
    eigs
}

/// Eigenvalue of the trailing 2x2 block closest to the bottom-right entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> C64 {
    let a = h.at(hi - 2, hi - 2);
    let b = h.at(hi - 2, hi - 1);
    let c = h.at(hi - 1, hi - 2);
    let d = h.at(hi - 1, hi - 1);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = (tr + disc) * 0.5;
    let r2 = (tr - disc) * 0.5;
    if (r1 - d).norm() < (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// One shifted QR step on the unreduced block [lo, hi): factor H - mu*I with
/// Givens rotations, then multiply back in reverse order and restore mu.
fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..hi {
        *h.at_mut(i, i) -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let f = h.at(k, k);
        let g = h.at(k + 1, k);
        let (c, s) = givens(f, g);
        rotations.push((c, s));
        // Rows k, k+1 of the block.
        for j in k..hi {
            let a = h.at(k, j);
            let b = h.at(k + 1, j);
            *h.at_mut(k, j) = c * a + s * b;
            *h.at_mut(k + 1, j) = -s.conj() * a + c * b;
        }
    }
    for (idx, (c, s)) in rotations.iter().enumerate() {
        let k = lo + idx;
        // Columns k, k+1; rows above the next subdiagonal only.
        let top = (k + 2).min(hi - 1) + 1;
        for i in lo..top {
            let a = h.at(i, k);
            let b = h.at(i, k + 1);
            *h.at_mut(i, k) = a * c + b * s.conj();
            *h.at_mut(i, k + 1) = -a * s + b * c;
        }
    }
    for i in lo..hi {
        *h.at_mut(i, i) += mu;
    }
}

/// Complex Givens rotation with real cosine: [c s; -conj(s) c] maps (f, g)
/// to (r, 0) with |r| = hypot(|f|, |g|).
fn givens(f: C64, g: C64) -> (f64, C64) {
    let fm = f.norm();
    let gm = g.norm();
    if gm == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let r = fm.hypot(gm);
    if fm == 0.0 {
        return (0.0, g.conj() / r);
    }
    let c = fm / r;
    let s = (f / fm) * g.conj() / r;
    (c, s)
}

// ---- Polynomials (ascending coefficient order) ----

/// Product of two polynomials given by ascending coefficients.
pub(crate) fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len().max(b.len())];
    for (o, ai) in out.iter_mut().zip(a) {
        *o += ai;
    }
    for (o, bi) in out.iter_mut().zip(b) {
        *o += bi;
    }
    out
}

pub(crate) fn poly_scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|c| c * s).collect()
}

/// Horner evaluation of an ascending-coefficient polynomial.
pub(crate) fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

pub(crate) fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * C64::new(k as f64, 0.0))
        .collect()
}

/// Roots of a polynomial via the companion-matrix eigensolve, followed by a
/// fixed number of Newton corrections on the original coefficients. The
/// leading coefficient must be nonzero; callers decide how to handle
/// near-degenerate leading terms.
pub(crate) fn companion_roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    assert!(deg >= 1, "constant polynomial has no roots");
    let lead = coeffs[deg];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let mut comp = CMatrix::zeros(deg);
    for i in 1..deg {
        *comp.at_mut(i, i - 1) = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        *comp.at_mut(i, deg - 1) = -coeffs[i] / lead;
    }
    let mut roots = eigenvalues(&comp);
    let dp = poly_derivative(coeffs);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = poly_eval(&dp, *r);
            if d.norm() == 0.0 {
                break;
            }
            *r -= poly_eval(coeffs, *r) / d;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lu_solves_a_known_system() {
        let m = CMatrix::from_rows(&[
            vec![c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(-1.0, 2.0)],
            vec![c(1.0, -1.0), c(0.5, 0.0), c(4.0, 1.0)],
        ]);
        let x_true = vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -3.0)];
        let b = m.matvec(&x_true);
        let lu = lu_factor(&m).expect("nonsingular");
        let x = lu.solve(&b);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-13);
        }
    }

    #[test]
    fn exactly_singular_matrix_is_rejected() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        assert!(lu_factor(&m).is_none());
    }

    #[test]
    fn identity_has_unit_condition_number() {
        let mut m = CMatrix::zeros(4);
        for i in 0..4 {
            *m.at_mut(i, i) = c(1.0, 0.0);
        }
        let lu = lu_factor(&m).unwrap();
        assert!((condition_1norm(&m, &lu) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_a_triangular_matrix_are_its_diagonal() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(5.0, -2.0), c(0.5, 0.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.5), c(3.0, 3.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, -4.0)],
        ]);
        let mut eigs = eigenvalues(&m);
        eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expect = [c(1.0, 1.0), c(-2.0, 0.5), c(0.0, -4.0)];
        expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (e, t) in eigs.iter().zip(&expect) {
            assert!((e - t).norm() < 1e-12, "got {e}, want {t}");
        }
    }

    #[test]
    fn eigenvalue_sum_and_product_match_trace_and_determinant() {
        // Dense 4x4 with no special structure; trace and determinant pin the
        // spectrum's elementary symmetric functions.
        let m = CMatrix::from_rows(&[
            vec![c(1.2, 0.3), c(-0.7, 1.1), c(0.4, 0.0), c(2.0, -0.5)],
            vec![c(0.9, -0.2), c(0.1, 0.8), c(-1.3, 0.6), c(0.0, 1.0)],
            vec![c(-0.4, 0.4), c(1.5, 0.0), c(0.7, -0.9), c(0.3, 0.2)],
            vec![c(0.8, 0.1), c(-0.6, -0.3), c(1.1, 1.2), c(-0.2, 0.5)],
        ]);
        let eigs = eigenvalues(&m);
        assert_eq!(eigs.len(), 4);
        let trace = m.at(0, 0) + m.at(1, 1) + m.at(2, 2) + m.at(3, 3);
        let sum: C64 = eigs.iter().sum();
        assert!(
            (sum - trace).norm() < 1e-11,
            "trace mismatch: {sum} vs {trace}"
        );
        // Determinant via the LU pivots, tracking row-swap parity.
        let lu = lu_factor(&m).unwrap();
        let mut det = c(1.0, 0.0);
        let mut swaps = 0;
        for k in 0..4 {
            det *= lu.lu[k * 4 + k];
            if lu.perm[k] != k {
                swaps += 1;
            }
        }
        if swaps % 2 == 1 {
            det = -det;
        }
        let prod: C64 = eigs.iter().product();
        assert!((prod - det).norm() < 1e-11, "det mismatch: {prod} vs {det}");
    }

    #[test]
    fn companion_roots_recover_known_roots() {
        // (z - 1)(z - 2i)(z + 3) expanded in ascending order.
        let poly = poly_mul(
            &poly_mul(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(0.0, -2.0), c(1.0, 0.0)]),
            &[c(3.0, 0.0), c(1.0, 0.0)],
        );
        let mut roots = companion_roots(&poly);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [c(-3.0, 0.0), c(0.0, 2.0), c(1.0, 0.0)];
        for (r, t) in roots.iter().zip(&expect) {
            assert!((r - t).norm() < 1e-12, "got {r}, want {t}");
        }
    }

    #[test]
    fn polynomial_helpers_agree_with_direct_evaluation() {
        let a = [c(1.0, 0.0), c(0.0, -1.0), c(2.0, 0.5)];
        let b = [c(-0.5, 0.0), c(1.0, 1.0)];
        let prod = poly_mul(&a, &b);
        let z = c(0.7, -1.3);
        let lhs = poly_eval(&prod, z);
        let rhs = poly_eval(&a, z) * poly_eval(&b, z);
        assert!((lhs - rhs).norm() < 1e-14);
        let sum = poly_add(&a, &b);
        assert!((poly_eval(&sum, z) - (poly_eval(&a, z) + poly_eval(&b, z))).norm() < 1e-14);
        let scaled = poly_scale(&a, c(0.0, 2.0));
        assert!((poly_eval(&scaled, z) - poly_eval(&a, z) * c(0.0, 2.0)).norm() < 1e-14);
    }
}
