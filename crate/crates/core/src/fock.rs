//! Truncated Fock-basis linear algebra.
//!
//! Operators live on the span of |0>..|n_cut>. Quadrature conventions are
//! hbar-free: [x, p] = i, annihilation a = (x + i p)/sqrt(2), and the
//! displacement D(xi, eta) = exp(i eta x - i xi p) shifts phase space by
//! (xi, eta), i.e. D(xi, eta) = exp(alpha a^dag - alpha^* a) with
//! alpha = (xi + i eta)/sqrt(2).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{assoc_laguerre_row, ln_factorial};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Maximum per-mode cutoff accepted by [`beamsplitter_half`]; the two-mode
/// matrix dimension grows as (n_cut + 1)^2.
pub const MAX_TWO_MODE_CUTOFF: usize = 60;

/// The displacement parameters (xi, eta): a shift (x, p) -> (x + xi, p + eta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementParams {
    pub xi: f64,
    pub eta: f64,
}

impl DisplacementParams {
    pub fn new(xi: f64, eta: f64) -> Result<Self> {
        if !(xi.is_finite() && eta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "displacement parameters must be finite, got ({xi}, {eta})"
            )));
        }
        Ok(Self { xi, eta })
    }

    /// Complex amplitude alpha = (xi + i eta)/sqrt(2).
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.xi, self.eta) / std::f64::consts::SQRT_2
    }

    pub fn norm(&self) -> f64 {
        self.xi.hypot(self.eta)
    }
}

/// A complex square matrix on the truncated Fock basis {|0>, .., |n_cut>}.
/// Represents states, POVM elements and unitaries alike.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    n_cut: usize,
    mat: Array2<Complex64>,
}

impl TruncatedOperator {
    pub fn new(n_cut: usize, mat: Array2<Complex64>) -> Result<Self> {
        let dim = n_cut + 1;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim}x{dim} matrix for n_cut = {n_cut}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { n_cut, mat })
    }

    pub fn zeros(n_cut: usize) -> Self {
        Self {
            n_cut,
            mat: Array2::from_elem((n_cut + 1, n_cut + 1), C_ZERO),
        }
    }

    pub fn identity(n_cut: usize) -> Self {
        let mut op = Self::zeros(n_cut);
        for i in 0..=n_cut {
            op.mat[[i, i]] = C_ONE;
        }
        op
    }

    /// |n><n| on the truncated space.
    pub fn fock_projector(n: usize, n_cut: usize) -> Result<Self> {
        if n > n_cut {
            return Err(Error::OutOfRange(format!(
                "fock_projector: n = {n} exceeds n_cut = {n_cut}"
            )));
        }
        let mut op = Self::zeros(n_cut);
        op.mat[[n, n]] = C_ONE;
        Ok(op)
    }

    /// Density matrix of the normalized pure state with the given Fock
    /// amplitudes (padded with zeros up to the cutoff).
    pub fn pure_state(amplitudes: &[Complex64], n_cut: usize) -> Result<Self> {
        let ket = normalized_ket(amplitudes, n_cut)?;
        let dim = n_cut + 1;
        let mut op = Self::zeros(n_cut);
        for m in 0..dim {
            for n in 0..dim {
                op.mat[[m, n]] = ket[m] * ket[n].conj();
            }
        }
        Ok(op)
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn dim(&self) -> usize {
        self.n_cut + 1
    }

    pub fn mat(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.mat
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.n_cut);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out.mat[[i, j]] = self.mat[[j, i]].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Self {
        Self {
            n_cut: self.n_cut,
            mat: self.mat.mapv(|z| z.conj()),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n_cut != other.n_cut {
            return Err(Error::ShapeMismatch(format!(
                "matmul: cutoffs differ ({} vs {})",
                self.n_cut, other.n_cut
            )));
        }
        Ok(Self {
            n_cut: self.n_cut,
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n_cut: self.n_cut,
            mat: self.mat.mapv(|z| z * c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_cut != other.n_cut {
            return Err(Error::ShapeMismatch("add: cutoffs differ".into()));
        }
        Ok(Self {
            n_cut: self.n_cut,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    /// Tr(self . other).
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.n_cut != other.n_cut {
            return Err(Error::ShapeMismatch("trace_product: cutoffs differ".into()));
        }
        let dim = self.dim();
        let mut acc = C_ZERO;
        for i in 0..dim {
            for j in 0..dim {
                acc += self.mat[[i, j]] * other.mat[[j, i]];
            }
        }
        Ok(acc)
    }

    /// max |A - A^dag| over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let d = (self.mat[[i, j]] - self.mat[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// (A + A^dag)/2 when the asymmetry is below `tol`, otherwise an error.
    pub fn symmetrized_hermitian(&self, tol: f64) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let mut out = Self::zeros(self.n_cut);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let avg = 0.5 * (self.mat[[i, j]] + self.mat[[j, i]].conj());
                out.mat[[i, j]] = avg;
            }
        }
        Ok(out)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        let sym = self.symmetrized_hermitian(1e-10)?;
        let (vals, _) = jacobi_hermitian(&sym.mat, false);
        Ok(vals)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self
            .eigenvalues_hermitian()?
            .first()
            .copied()
            .expect("non-empty spectrum"))
    }

    /// Extract the state vector of a rank-1 PSD operator. Fails when the
    /// spectrum has more than one eigenvalue above `tol` (relative to trace).
    pub fn rank_one_vector(&self, tol: f64) -> Result<Vec<Complex64>> {
        let sym = self.symmetrized_hermitian(1e-10)?;
        let (vals, vecs) = jacobi_hermitian(&sym.mat, true);
        let vecs = vecs.expect("eigenvectors requested");
        let trace: f64 = vals.iter().sum();
        if trace <= 0.0 {
            return Err(Error::InvalidInput("rank_one_vector: zero trace".into()));
        }
        let (top_idx, top) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        for (i, v) in vals.iter().enumerate() {
            if i != top_idx && v.abs() > tol * trace {
                return Err(Error::InvalidInput(format!(
                    "rank_one_vector: secondary eigenvalue {v:.3e} (trace {trace:.3e})"
                )));
            }
        }
        let scale = Complex64::new(top.sqrt(), 0.0);
        Ok((0..self.dim()).map(|i| vecs[[i, top_idx]] * scale).collect())
    }
}

/// Normalize Fock amplitudes into a ket of length n_cut + 1.
pub fn normalized_ket(amplitudes: &[Complex64], n_cut: usize) -> Result<Array1<Complex64>> {
    let dim = n_cut + 1;
    if amplitudes.is_empty() || amplitudes.len() > dim {
        return Err(Error::ShapeMismatch(format!(
            "ket with {} amplitudes does not fit dimension {dim}",
            amplitudes.len()
        )));
    }
    let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(Error::InvalidInput("ket has zero or non-finite norm".into()));
    }
    let scale = norm_sq.sqrt().recip();
    let mut ket = Array1::from_elem(dim, C_ZERO);
    for (i, a) in amplitudes.iter().enumerate() {
        ket[i] = a * scale;
    }
    Ok(ket)
}

// ---------------------------------------------------------------------------
// Ladder and quadrature operators
// ---------------------------------------------------------------------------

/// Annihilation operator a on the truncated space.
pub fn annihilation(n_cut: usize) -> TruncatedOperator {
    let mut op = TruncatedOperator::zeros(n_cut);
    for n in 1..=n_cut {
        op.mat[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    op
}

/// x = (a + a^dag)/sqrt(2).
pub fn position_op(n_cut: usize) -> TruncatedOperator {
    let a = annihilation(n_cut);
    let mut op = TruncatedOperator::zeros(n_cut);
    for i in 0..=n_cut {
        for j in 0..=n_cut {
            op.mat[[i, j]] =
                (a.mat[[i, j]] + a.mat[[j, i]].conj()) / std::f64::consts::SQRT_2;
        }
    }
    op
}

/// p = i (a^dag - a)/sqrt(2).
pub fn momentum_op(n_cut: usize) -> TruncatedOperator {
    let a = annihilation(n_cut);
    let i_unit = Complex64::new(0.0, 1.0);
    let mut op = TruncatedOperator::zeros(n_cut);
    for r in 0..=n_cut {
        for c in 0..=n_cut {
            op.mat[[r, c]] =
                i_unit * (a.mat[[c, r]].conj() - a.mat[[r, c]]) / std::f64::consts::SQRT_2;
        }
    }
    op
}

/// Number operator a^dag a.
pub fn number_op(n_cut: usize) -> TruncatedOperator {
    let mut op = TruncatedOperator::zeros(n_cut);
    for n in 0..=n_cut {
        op.mat[[n, n]] = Complex64::new(n as f64, 0.0);
    }
    op
}

// ---------------------------------------------------------------------------
// Displacement operator
// ---------------------------------------------------------------------------

/// Matrix elements <m| D(alpha) |n| on an arbitrary dimension, computed from
/// the Laguerre closed form. With `with_envelope = false` the common factor
/// e^{-|alpha|^2 / 2} is dropped, leaving a polynomial in alpha, conj(alpha).
pub(crate) fn displacement_table(
    alpha: Complex64,
    dim: usize,
    with_envelope: bool,
) -> Array2<Complex64> {
    let s = alpha.norm_sqr();
    let envelope = if with_envelope { (-0.5 * s).exp() } else { 1.0 };
    let mut mat = Array2::from_elem((dim, dim), C_ZERO);

    for d in 0..dim {
        let lag = assoc_laguerre_row(dim - 1 - d, d, s);
        let alpha_pow = alpha.powu(d as u32);
        let alpha_conj_pow = (-alpha.conj()).powu(d as u32);
        for n in 0..(dim - d) {
            let m = n + d;
            let ratio = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
            let base = ratio * envelope * lag[n];
            // <n+d| D |n>
            mat[[m, n]] = alpha_pow * base;
            // <n| D |n+d> = sqrt(n!/m!) (-conj(alpha))^d e^{-s/2} L_n^{(d)}(s)
            mat[[n, m]] = alpha_conj_pow * base;
        }
    }
    mat
}

/// Displacement operator D(xi, eta) on the truncated basis, from the Laguerre
/// closed form for <m| D |n>.
pub fn displacement_matrix(params: DisplacementParams, n_cut: usize) -> Result<TruncatedOperator> {
    if n_cut < 1 {
        return Err(Error::OutOfRange(
            "displacement_matrix: n_cut must be at least 1".into(),
        ));
    }
    let mat = displacement_table(params.alpha(), n_cut + 1, true);
    TruncatedOperator::new(n_cut, mat)
}

// ---------------------------------------------------------------------------
// Loss mixture
// ---------------------------------------------------------------------------

/// (1 - l) |1><1| + l |0><0|: a single photon after a loss channel of rate l.
pub fn lossy_single_photon(l: f64, n_cut: usize) -> Result<TruncatedOperator> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::OutOfRange(format!(
            "loss rate must lie in [0, 1], got {l}"
        )));
    }
    if n_cut < 1 {
        return Err(Error::OutOfRange("lossy_single_photon: n_cut >= 1".into()));
    }
    let mut op = TruncatedOperator::zeros(n_cut);
    op.mat[[0, 0]] = Complex64::new(l, 0.0);
    op.mat[[1, 1]] = Complex64::new(1.0 - l, 0.0);
    Ok(op)
}

// ---------------------------------------------------------------------------
// Wigner function
// ---------------------------------------------------------------------------

/// Wigner function of an arbitrary truncated operator at a phase-space point,
/// from the closed form of W_{|m><n|} in Laguerre polynomials and Gaussians.
pub fn wigner_eval(op: &TruncatedOperator, x: f64, p: f64) -> Complex64 {
    let gauss = (-(x * x + p * p)).exp();
    if gauss == 0.0 {
        return C_ZERO;
    }
    wigner_poly_eval(op, x, p) * gauss
}

/// The polynomial factor of the Wigner function: W(x, p) divided by its
/// Gaussian envelope e^{-(x^2 + p^2)}. Free of under/overflow at any radius.
pub fn wigner_poly_eval(op: &TruncatedOperator, x: f64, p: f64) -> Complex64 {
    let dim = op.dim();
    let r2 = x * x + p * p;
    let zeta = Complex64::new(x, -p) * std::f64::consts::SQRT_2;
    let inv_pi = std::f64::consts::FRAC_1_PI;

    let mut acc = C_ZERO;
    let mut zeta_pow = C_ONE;
    for d in 0..dim {
        let lag = assoc_laguerre_row(dim - 1 - d, d, 2.0 * r2);
        for (n, &lag_n) in lag.iter().enumerate() {
            let m = n + d;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let ratio = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
            let w_upper = zeta_pow * (sign * inv_pi * ratio * lag_n);
            if d == 0 {
                acc += op.mat[[n, n]] * w_upper;
            } else {
                acc += op.mat[[m, n]] * w_upper + op.mat[[n, m]] * w_upper.conj();
            }
        }
        zeta_pow *= zeta;
    }
    acc
}

/// Wigner function of a Hermitian operator; the imaginary part must vanish
/// within tolerance and is dropped.
pub fn wigner_eval_real(op: &TruncatedOperator, x: f64, p: f64) -> Result<f64> {
    let w = wigner_eval(op, x, p);
    let scale = w.re.abs().max(1.0);
    if w.im.abs() > 1e-12 * scale {
        return Err(Error::NotHermitian(w.im.abs()));
    }
    Ok(w.re)
}

// ---------------------------------------------------------------------------
// Two-mode operators
// ---------------------------------------------------------------------------

/// Operator on the tensor product of two truncated modes with a common
/// cutoff. Flat index: (m, n) -> m * (n_cut + 1) + n.
#[derive(Debug, Clone)]
pub struct TwoModeOperator {
    n_cut: usize,
    mat: Array2<Complex64>,
}

impl TwoModeOperator {
    pub fn from_matrix(n_cut: usize, mat: Array2<Complex64>) -> Result<Self> {
        let dim = (n_cut + 1) * (n_cut + 1);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim}x{dim} two-mode matrix for n_cut = {n_cut}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { n_cut, mat })
    }

    pub fn zeros(n_cut: usize) -> Self {
        let dim = (n_cut + 1) * (n_cut + 1);
        Self {
            n_cut,
            mat: Array2::from_elem((dim, dim), C_ZERO),
        }
    }

    pub fn identity(n_cut: usize) -> Self {
        let mut op = Self::zeros(n_cut);
        for i in 0..op.dim() {
            op.mat[[i, i]] = C_ONE;
        }
        op
    }

    /// a (x) b on modes 1 and 2.
    pub fn kron(a: &TruncatedOperator, b: &TruncatedOperator) -> Result<Self> {
        if a.n_cut() != b.n_cut() {
            return Err(Error::ShapeMismatch("kron: cutoffs differ".into()));
        }
        let n_cut = a.n_cut();
        let d1 = n_cut + 1;
        let mut out = Self::zeros(n_cut);
        for m in 0..d1 {
            for mp in 0..d1 {
                let amm = a.mat()[[m, mp]];
                if amm == C_ZERO {
                    continue;
                }
                for n in 0..d1 {
                    for np in 0..d1 {
                        out.mat[[m * d1 + n, mp * d1 + np]] = amm * b.mat()[[n, np]];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn dim(&self) -> usize {
        (self.n_cut + 1) * (self.n_cut + 1)
    }

    pub fn mat(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn dagger(&self) -> Self {
        let dim = self.dim();
        let mut out = Self::zeros(self.n_cut);
        for i in 0..dim {
            for j in 0..dim {
                out.mat[[i, j]] = self.mat[[j, i]].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n_cut != other.n_cut {
            return Err(Error::ShapeMismatch("two-mode matmul: cutoffs differ".into()));
        }
        Ok(Self {
            n_cut: self.n_cut,
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n_cut != other.n_cut {
            return Err(Error::ShapeMismatch("two-mode sub: cutoffs differ".into()));
        }
        Ok(Self {
            n_cut: self.n_cut,
            mat: &self.mat - &other.mat,
        })
    }

    /// n_1 + n_2 on the tensor space.
    pub fn total_number(n_cut: usize) -> Self {
        let d1 = n_cut + 1;
        let mut op = Self::zeros(n_cut);
        for m in 0..d1 {
            for n in 0..d1 {
                let idx = m * d1 + n;
                op.mat[[idx, idx]] = Complex64::new((m + n) as f64, 0.0);
            }
        }
        op
    }

    /// Partial trace over the first tensor factor.
    pub fn partial_trace_first(&self) -> TruncatedOperator {
        let d1 = self.n_cut + 1;
        let mut out = TruncatedOperator::zeros(self.n_cut);
        for n in 0..d1 {
            for np in 0..d1 {
                let mut acc = C_ZERO;
                for m in 0..d1 {
                    acc += self.mat[[m * d1 + n, m * d1 + np]];
                }
                out.mat_mut()[[n, np]] = acc;
            }
        }
        out
    }
}

/// Tr_1 of a two-mode operator. Trace-preserving by construction.
pub fn partial_trace_first(op: &TwoModeOperator) -> TruncatedOperator {
    op.partial_trace_first()
}

/// The half beamsplitter B with B^dag x_1 B = (x_1 + x_2)/sqrt(2),
/// B^dag x_2 B = (x_1 - x_2)/sqrt(2) (same for p). Photon-number conserving,
/// built block-by-block: B = exp(i pi n_2) exp((pi/4)(a_1^dag a_2 - a_2^dag a_1)).
pub fn beamsplitter_half(n_cut: usize) -> Result<TwoModeOperator> {
    if n_cut < 1 {
        return Err(Error::OutOfRange("beamsplitter_half: n_cut >= 1".into()));
    }
    if n_cut > MAX_TWO_MODE_CUTOFF {
        return Err(Error::OutOfRange(format!(
            "beamsplitter_half: n_cut = {n_cut} exceeds the two-mode limit {MAX_TWO_MODE_CUTOFF}"
        )));
    }
    let d1 = n_cut + 1;
    let mut out = TwoModeOperator::zeros(n_cut);

    for total in 0..=(2 * n_cut) {
        let k_min = total.saturating_sub(n_cut);
        let k_max = total.min(n_cut);
        let len = k_max - k_min + 1;

        // Generator K = a_1^dag a_2 - a_2^dag a_1 restricted to the block of
        // total photon number `total`; basis |k, total - k>, k ascending.
        let mut gen = Array2::from_elem((len, len), C_ZERO);
        for (row, k) in (k_min..=k_max).enumerate() {
            if k < k_max {
                let amp = (((k + 1) * (total - k)) as f64).sqrt();
                gen[[row + 1, row]] += Complex64::new(amp, 0.0);
            }
            if k > k_min {
                let amp = ((k * (total - k + 1)) as f64).sqrt();
                gen[[row - 1, row]] -= Complex64::new(amp, 0.0);
            }
        }
        let block = expm(&gen.mapv(|z| z * std::f64::consts::FRAC_PI_4));

        for (row, k) in (k_min..=k_max).enumerate() {
            // Row phase from exp(i pi n_2): (-1)^{total - k}.
            let phase = if (total - k) % 2 == 0 { 1.0 } else { -1.0 };
            let flat_row = k * d1 + (total - k);
            for (col, kp) in (k_min..=k_max).enumerate() {
                let flat_col = kp * d1 + (total - kp);
                out.mat[[flat_row, flat_col]] = block[[row, col]] * phase;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Dense helpers: matrix exponential, Hermitian eigensolver
// ---------------------------------------------------------------------------

/// exp(A) for a dense complex matrix by scaling-and-squaring with a Taylor
/// series. Adequate for the modest dimensions used here.
pub(crate) fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let dim = a.nrows();
    assert_eq!(dim, a.ncols(), "expm: square matrix required");

    // 1-norm based scaling.
    let mut norm: f64 = 0.0;
    for j in 0..dim {
        let col_sum: f64 = (0..dim).map(|i| a[[i, j]].norm()).sum();
        norm = norm.max(col_sum);
    }
    let squarings = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as i32).max(0) as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));

    let mut result = Array2::from_shape_fn((dim, dim), |(i, j)| {
        if i == j {
            C_ONE
        } else {
            C_ZERO
        }
    });
    let mut term = result.clone();
    for k in 1..=80usize {
        term = term.dot(&scaled).mapv(|z| z / (k as f64));
        result = &result + &term;
        let t_norm: f64 = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if t_norm < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Eigen-decomposition of a complex Hermitian matrix by cyclic Jacobi with
/// complex rotations. Returns eigenvalues ascending, optionally with the
/// matching eigenvector columns.
pub(crate) fn jacobi_hermitian(
    mat: &Array2<Complex64>,
    want_vectors: bool,
) -> (Vec<f64>, Option<Array2<Complex64>>) {
    let dim = mat.nrows();
    let mut a = mat.clone();
    let mut v = if want_vectors {
        Some(Array2::from_shape_fn((dim, dim), |(i, j)| {
            if i == j {
                C_ONE
            } else {
                C_ZERO
            }
        }))
    } else {
        None
    };

    let scale: f64 = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-14 * scale;

    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off.max(a[[p, q]].norm());
            }
        }
        if off < tol {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[[p, q]];
                let r = apq.norm();
                if r < tol * 1e-2 {
                    continue;
                }
                let phase = apq / r;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J = [[c, s*phase], [-s*conj(phase), c]] acting on (p, q).
                let jpp = Complex64::new(c, 0.0);
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                let jqq = Complex64::new(c, 0.0);

                // A <- A J (columns p, q)
                for i in 0..dim {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * jpp + aiq * jqp;
                    a[[i, q]] = aip * jpq + aiq * jqq;
                }
                // A <- J^dag A (rows p, q)
                for j in 0..dim {
                    let apj = a[[p, j]];
                    let aqj = a[[q, j]];
                    a[[p, j]] = jpp.conj() * apj + jqp.conj() * aqj;
                    a[[q, j]] = jpq.conj() * apj + jqq.conj() * aqj;
                }
                if let Some(vm) = v.as_mut() {
                    for i in 0..dim {
                        let vip = vm[[i, p]];
                        let viq = vm[[i, q]];
                        vm[[i, p]] = vip * jpp + viq * jqp;
                        vm[[i, q]] = vip * jpq + viq * jqq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.total_cmp(&a[[j, j]].re));
    let vals: Vec<f64> = order.iter().map(|&i| a[[i, i]].re).collect();
    let vecs = v.map(|vm| {
        Array2::from_shape_fn((dim, dim), |(i, j)| vm[[i, order[j]]])
    });
    (vals, vecs)
}
