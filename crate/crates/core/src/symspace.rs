//! Numerical geometry of the symmetric space `SL(d,R)/SO(d)`.
//!
//! The base point is the identity coset. Orbit points `g.o` are described by
//! their Cartan vector (sorted log singular values of `g`) and the left
//! orthogonal factor of the Cartan decomposition `g = k1 exp(H) k2`, read as a
//! full flag. Axial elements are described by their Jordan vector (sorted log
//! eigenvalue moduli) and their attracting/repelling fixed flags.
//!
//! Matrices coming out of long words are badly conditioned, so every routine
//! that has to resolve the small end of a spectrum has a `*_with_inverse`
//! form. The top half of a spectrum is read from `g`, the bottom half from the
//! top of `g^-1`, and for odd `d` the middle coordinate is fixed by `det = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by the geometry routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative tolerance on `det g = 1`.
    pub det: f64,
    /// Tolerance on `F^T F = I` for flag frames.
    pub orth: f64,
    /// Minimal gap between consecutive Jordan/Cartan coordinates for regularity.
    pub gap: f64,
    /// Smallest singular value below which two flags count as non-transverse.
    pub transverse: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            det: 1e-9,
            orth: 1e-9,
            gap: 1e-6,
            transverse: 1e-8,
        }
    }
}

/// An element of `SL(d,R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    /// Builds a matrix from row-major entries, checking finiteness and `det = 1`
    /// within relative tolerance `tol_det`.
    pub fn from_row_major(dim: usize, entries: &[f64], tol_det: f64) -> Result<Self> {
        let m = Self::from_row_major_unchecked(dim, entries)?;
        let det = m.det();
        if (det - 1.0).abs() > tol_det {
            return Err(Error::NotUnimodular { det });
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries without the determinant check.
    pub fn from_row_major_unchecked(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parse(format!("dimension must be at least 2, got {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteResult("matrix entry is not finite".into()));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Rotation by `angle` in the `(i, j)` coordinate plane.
    pub fn rotation(dim: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(dim, dim);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn det(&self) -> f64 {
        if self.dim() == 2 {
            let m = &self.0;
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        } else {
            self.0.clone().determinant()
        }
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn scale(&mut self, factor: f64) {
        self.0 *= factor;
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Matrix inverse. Exact adjugate formula in dimension two, LU otherwise.
    pub fn inverse(&self) -> Result<Self> {
        if self.dim() == 2 {
            let m = &self.0;
            let det = self.det();
            if det == 0.0 || !det.is_finite() {
                return Err(Error::NonFiniteResult("singular matrix".into()));
            }
            let inv = DMatrix::from_row_slice(
                2,
                2,
                &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det],
            );
            return Ok(Self(inv));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| Error::NonFiniteResult("singular matrix".into()))
    }

    /// `self^k` for `k >= 0` by repeated squaring.
    pub fn pow(&self, k: u32) -> Self {
        let mut result = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.0.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self(result)
    }

    /// Frobenius norm of `self - other`.
    pub fn distance_to(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// A vector in the closed Weyl chamber: sorted non-increasing, zero sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylVector(Vec<f64>);

impl WeylVector {
    /// Sorts `coords` into the chamber. Fails if the sum is not within `tol_sum` of zero.
    pub fn new(mut coords: Vec<f64>, tol_sum: f64) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteResult("Weyl vector coordinate".into()));
        }
        let sum: f64 = coords.iter().sum();
        if sum.abs() > tol_sum {
            return Err(Error::NonFiniteResult(format!(
                "Weyl vector coordinates sum to {sum}"
            )));
        }
        coords.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(coords))
    }

    pub(crate) fn from_sorted(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Consecutive differences `c_i - c_{i+1}`.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.windows(2).map(|w| w[0] - w[1])
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().fold(f64::INFINITY, f64::min)
    }

    /// True iff every consecutive gap exceeds `gap_tol`.
    pub fn is_regular(&self, gap_tol: f64) -> bool {
        self.gaps().all(|g| g > gap_tol)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self(self.0.iter().map(|x| x / n).collect()))
    }

    /// Euclidean distance between two chamber vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|x| x * factor).collect())
    }

    /// The image under `g -> g^-1`: negated and reversed.
    pub fn opposite(&self) -> Self {
        Self(self.0.iter().rev().map(|x| -x).collect())
    }
}

/// A full flag in `R^d`, stored as an orthonormal frame whose leading `i`
/// columns span the `i`-dimensional subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag(DMatrix<f64>);

impl Flag {
    /// `e1 ⊂ <e1,e2> ⊂ ...`
    pub fn standard(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// `ed ⊂ <ed,e(d-1)> ⊂ ...`
    pub fn reversed(dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(dim - 1 - i, i)] = 1.0;
        }
        Self(m)
    }

    /// Wraps an orthonormal frame, checking `F^T F = I` within `tol_orth`.
    pub fn from_frame(frame: DMatrix<f64>, tol_orth: f64) -> Result<Self> {
        if !frame.is_square() {
            return Err(Error::DimensionMismatch {
                expected: frame.nrows(),
                found: frame.ncols(),
            });
        }
        let d = frame.nrows();
        let err = (frame.transpose() * &frame - DMatrix::<f64>::identity(d, d)).amax();
        if !(err <= tol_orth) {
            return Err(Error::NonFiniteResult(format!(
                "flag frame is not orthonormal (error {err:e})"
            )));
        }
        Ok(Self(frame))
    }

    /// Orthonormalizes the columns of `basis` in order (Gram-Schmidt via QR).
    pub fn from_basis(basis: &DMatrix<f64>) -> Result<Self> {
        let d = basis.nrows();
        if basis.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.ncols(),
            });
        }
        let qr = basis.clone().qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..d {
            let rjj = r[(j, j)];
            if !rjj.is_finite() || rjj == 0.0 {
                return Err(Error::NonFiniteResult("degenerate flag basis".into()));
            }
            if rjj < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Ok(Self(q))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Column-major frame entries.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn from_column_major(dim: usize, data: &[f64]) -> Self {
        Self(DMatrix::from_column_slice(dim, dim, data))
    }

    /// The flag `g.F`: multiply the frame and re-orthonormalize in order.
    pub fn act(&self, g: &SquareMatrix) -> Result<Self> {
        Self::from_basis(&(g.as_matrix() * &self.0))
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Singular values sorted descending.
fn singular_values_desc(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut sv: Vec<f64> = if m.nrows() == 2 {
        // closed form, no cancellation in the larger value
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let p = (a + d).hypot(c - b);
        let q = (a - d).hypot(b + c);
        vec![(p + q) / 2.0, (p - q).abs() / 2.0]
    } else {
        m.clone()
            .try_svd(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::NonFiniteResult("SVD did not converge".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Eigenvalues as (real, imag) pairs sorted by descending modulus.
fn eigenvalues_desc(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let mut ev: Vec<(f64, f64)> = if m.nrows() == 2 {
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let big = (tr.abs() + disc.sqrt()) / 2.0 * tr.signum();
            let small = if big != 0.0 { det / big } else { 0.0 };
            vec![(big, 0.0), (small, 0.0)]
        } else {
            let im = (-disc).sqrt() / 2.0;
            vec![(tr / 2.0, im), (tr / 2.0, -im)]
        }
    } else {
        m.clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()
    };
    if ev.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(Error::NonFiniteResult("eigenvalue computation".into()));
    }
    ev.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)));
    Ok(ev)
}

/// Assembles a chamber vector from the descending spectrum of `g` (`top`) and of
/// `g^-1` (`bottom`).
fn split_log_spectrum(top: &[f64], bottom: &[f64]) -> Result<WeylVector> {
    let d = top.len();
    let half = d / 2;
    let mut coords = vec![0.0; d];
    for i in 0..half {
        if !(top[i] > 0.0) || !(bottom[i] > 0.0) {
            return Err(Error::NonFiniteResult("non-positive spectral value".into()));
        }
        coords[i] = top[i].ln();
        coords[d - 1 - i] = -bottom[i].ln();
    }
    if d % 2 == 1 {
        coords[half] = -coords.iter().sum::<f64>();
    }
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteResult("log spectrum".into()));
    }
    coords.sort_by(|a, b| b.total_cmp(a));
    Ok(WeylVector::from_sorted(coords))
}

/// The Cartan vector `H(o, g.o)`: sorted log singular values.
pub fn cartan_projection(g: &SquareMatrix) -> Result<WeylVector> {
    cartan_projection_with_inverse(g, &g.inverse()?)
}

pub fn cartan_projection_with_inverse(g: &SquareMatrix, g_inv: &SquareMatrix) -> Result<WeylVector> {
    check_dims(g.dim(), g_inv.dim())?;
    let top = singular_values_desc(&g.0)?;
    let bottom = singular_values_desc(&g_inv.0)?;
    split_log_spectrum(&top, &bottom)
}

/// Riemannian distance `d(o, g.o)`.
pub fn orbit_distance(g: &SquareMatrix) -> Result<f64> {
    Ok(cartan_projection(g)?.norm())
}

/// The Jordan vector `L(g)`: sorted log eigenvalue moduli.
pub fn jordan_projection(g: &SquareMatrix) -> Result<WeylVector> {
    jordan_projection_with_inverse(g, &g.inverse()?)
}

pub fn jordan_projection_with_inverse(g: &SquareMatrix, g_inv: &SquareMatrix) -> Result<WeylVector> {
    check_dims(g.dim(), g_inv.dim())?;
    let moduli = |m: &DMatrix<f64>| -> Result<Vec<f64>> {
        let ev = eigenvalues_desc(m)?;
        let out: Vec<f64> = ev.iter().map(|(re, im)| re.hypot(*im)).collect();
        // only the leading half enters the split spectrum; the tail of an
        // ill-conditioned product is rounding noise
        if out[..out.len() / 2].iter().any(|x| *x < f64::MIN_POSITIVE) {
            return Err(Error::ZeroModulus);
        }
        Ok(out)
    };
    split_log_spectrum(&moduli(&g.0)?, &moduli(&g_inv.0)?)
}

/// Translation length `l(g) = |L(g)|`.
pub fn translation_length(g: &SquareMatrix) -> Result<f64> {
    Ok(jordan_projection(g)?.norm())
}

pub fn is_regular_axial(g: &SquareMatrix, gap_tol: f64) -> Result<bool> {
    Ok(jordan_projection(g)?.is_regular(gap_tol))
}

/// Number of leading subspaces read directly from the forward matrix.
fn leading_count(d: usize) -> usize {
    d / 2
}

/// Builds a flag from vectors spanning its leading subspaces (`top`, in order)
/// and from normals to its trailing subspaces (`bottom[0]` is orthogonal to
/// `V_(d-1)`, `bottom[1]` to `V_(d-2)`, ...).
fn flag_from_halves(d: usize, top: &[DVector<f64>], bottom: &[DVector<f64>]) -> Result<Flag> {
    debug_assert!(top.len() + bottom.len() < d);
    let mut cols: Vec<Option<DVector<f64>>> = vec![None; d];
    let mut placed: Vec<DVector<f64>> = Vec::with_capacity(d);

    let orthonormalize = |v: &DVector<f64>, basis: &[DVector<f64>]| -> Result<DVector<f64>> {
        let mut w = v.clone();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let n = w.norm();
        if !(n > 1e-12 * v.norm().max(f64::MIN_POSITIVE)) || !n.is_finite() {
            return Err(Error::NonFiniteResult("degenerate flag vectors".into()));
        }
        Ok(w / n)
    };

    for (k, b) in bottom.iter().enumerate() {
        let w = orthonormalize(b, &placed)?;
        placed.push(w.clone());
        cols[d - 1 - k] = Some(w);
    }
    for (k, a) in top.iter().enumerate() {
        let w = orthonormalize(a, &placed)?;
        placed.push(w.clone());
        cols[k] = Some(w);
    }
    // remaining column(s): complete with coordinate vectors
    for slot in 0..d {
        if cols[slot].is_some() {
            continue;
        }
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for e in 0..d {
            let mut v = DVector::zeros(d);
            v[e] = 1.0;
            for b in &placed {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
            let n = v.norm();
            if n > best_norm {
                best_norm = n;
                best = Some(v);
            }
        }
        let w = orthonormalize(&best.expect("dimension >= 1"), &placed)?;
        placed.push(w.clone());
        cols[slot] = Some(w);
    }
    let cols: Vec<DVector<f64>> = cols.into_iter().map(|c| c.expect("filled")).collect();
    Ok(Flag(DMatrix::from_columns(&cols)))
}

/// Left singular vectors of `m` for its `count` largest singular values.
fn top_left_singular_vectors(m: &DMatrix<f64>, count: usize) -> Result<Vec<DVector<f64>>> {
    let svd = m
        .clone()
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::NonFiniteResult("SVD did not converge".into()))?;
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    Ok(order[..count].iter().map(|&j| u.column(j).into_owned()).collect())
}

/// The left orthogonal factor `k1` of `g = k1 exp(H) k2`, as a flag.
pub fn cartan_flag(g: &SquareMatrix, gap_tol: f64) -> Result<Flag> {
    cartan_flag_with_inverse(g, &g.inverse()?, gap_tol)
}

pub fn cartan_flag_with_inverse(g: &SquareMatrix, g_inv: &SquareMatrix, gap_tol: f64) -> Result<Flag> {
    let h = cartan_projection_with_inverse(g, g_inv)?;
    if !h.is_regular(gap_tol) {
        return Err(Error::NotRegular(format!(
            "Cartan vector {:?} has a gap below {gap_tol:e}",
            h.coords()
        )));
    }
    cartan_flag_unchecked(g, g_inv)
}

/// Cartan flag without the regularity check; callers guarantee a regular Cartan vector.
pub(crate) fn cartan_flag_unchecked(g: &SquareMatrix, g_inv: &SquareMatrix) -> Result<Flag> {
    let d = g.dim();
    let lead = leading_count(d);
    let trail = d - 1 - lead;
    let top = top_left_singular_vectors(&g.0, lead)?;
    // left singular vectors of g^-T are the right singular vectors of g^-1
    let bottom = top_left_singular_vectors(&g_inv.0.transpose(), trail)?;
    flag_from_halves(d, &top, &bottom)
}

/// Eigenvectors of `m` for its `count` eigenvalues of largest modulus, which
/// must be real.
fn top_eigenvectors(m: &DMatrix<f64>, count: usize) -> Result<Vec<DVector<f64>>> {
    let ev = eigenvalues_desc(m)?;
    let scale = ev[0].0.hypot(ev[0].1).max(1.0);
    let d = m.nrows();
    let mut out = Vec::with_capacity(count);
    for &(re, im) in &ev[..count] {
        if im.abs() > 1e-9 * scale {
            return Err(Error::NotRegular("complex eigenvalue in the top spectrum".into()));
        }
        let shifted = m - DMatrix::<f64>::identity(d, d) * re;
        let svd = shifted
            .try_svd(false, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::NonFiniteResult("SVD did not converge".into()))?;
        let v_t = svd.v_t.expect("requested V^T");
        let (j, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        out.push(v_t.row(j).transpose());
    }
    Ok(out)
}

/// Attracting and repelling fixed flags of a regular axial element.
pub fn fixed_flags(g: &SquareMatrix, gap_tol: f64) -> Result<(Flag, Flag)> {
    fixed_flags_with_inverse(g, &g.inverse()?, gap_tol)
}

pub fn fixed_flags_with_inverse(
    g: &SquareMatrix,
    g_inv: &SquareMatrix,
    gap_tol: f64,
) -> Result<(Flag, Flag)> {
    let l = jordan_projection_with_inverse(g, g_inv)?;
    if !l.is_regular(gap_tol) {
        return Err(Error::NotRegular(format!(
            "Jordan vector {:?} has a gap below {gap_tol:e}",
            l.coords()
        )));
    }
    Ok((attracting_flag(g, g_inv)?, attracting_flag(g_inv, g)?))
}

fn attracting_flag(g: &SquareMatrix, g_inv: &SquareMatrix) -> Result<Flag> {
    let d = g.dim();
    let lead = leading_count(d);
    let trail = d - 1 - lead;
    let top = top_eigenvectors(&g.0, lead)?;
    // left eigenvectors for the smallest eigenvalues of g = eigenvectors of g^-T
    let bottom = top_eigenvectors(&g_inv.0.transpose(), trail)?;
    flag_from_halves(d, &top, &bottom)
}

/// Largest singular value of a small dense matrix.
fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.singular_values().iter().fold(0.0_f64, |a, &b| a.max(b))
}

fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Max over `i` of the sine of the largest principal angle between the
/// `i`-dimensional subspaces of the two flags.
pub fn flag_distance(f1: &Flag, f2: &Flag) -> Result<f64> {
    check_dims(f1.dim(), f2.dim())?;
    let d = f1.dim();
    let mut worst = 0.0_f64;
    for i in 1..d {
        let lead = f1.0.columns(0, i);
        let complement = f2.0.columns(i, d - i);
        let cross = complement.transpose() * lead;
        worst = worst.max(spectral_norm(&cross));
    }
    Ok(worst.min(1.0))
}

/// Smallest singular value over `i` of `[V_i(F1) | V_(d-i)(F2)]`; positive
/// exactly when the flags are in general position.
pub fn transversality_margin(f1: &Flag, f2: &Flag) -> Result<f64> {
    check_dims(f1.dim(), f2.dim())?;
    let d = f1.dim();
    let mut worst = f64::INFINITY;
    for i in 1..d {
        let mut joined = DMatrix::zeros(d, d);
        joined.columns_mut(0, i).copy_from(&f1.0.columns(0, i));
        joined.columns_mut(i, d - i).copy_from(&f2.0.columns(0, d - i));
        worst = worst.min(smallest_singular_value(&joined));
    }
    Ok(worst)
}

pub fn is_transverse(f1: &Flag, f2: &Flag, tol: f64) -> Result<bool> {
    Ok(transversality_margin(f1, f2)? > tol)
}

/// Angle between two chamber vectors, in `[0, pi]`.
pub fn chamber_angle(h1: &WeylVector, h2: &WeylVector) -> Result<f64> {
    check_dims(h1.dim(), h2.dim())?;
    let (n1, n2) = (h1.norm(), h2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = h1.0.iter().zip(&h2.0).map(|(a, b)| a * b).sum();
    Ok((dot / (n1 * n2)).clamp(-1.0, 1.0).acos())
}
