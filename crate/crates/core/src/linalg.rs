//! Dense complex linear algebra: state vectors, Hermitian operators, a
//! cyclic Jacobi eigensolver with degeneracy grouping, and unitary maps.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used when an operation requires a normalized input.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Relative tolerance of the Hermiticity check, scaled by `max(1, ‖M‖_F)`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default eigenvalue grouping tolerance, relative to `max(1, |λ|_max)`.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Adjacent groups must be separated by more than this multiple of the
/// grouping tolerance.
pub const GROUP_GAP_FACTOR: f64 = 10.0;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Amplitude vector of a register with a power-of-two dimension.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter()).finish()
    }
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if !is_power_of_two(amps.len()) {
            return Err(Error::Dimension(format!(
                "state dimension {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![ZERO; dim])
    }

    /// Computational basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = Self::zeros(dim)?;
        v.amps[index] = ONE;
        Ok(v)
    }

    pub(crate) fn from_vec_unchecked(amps: Vec<C64>) -> Self {
        debug_assert!(is_power_of_two(amps.len()));
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Normalization { norm: self.norm() })
        }
    }

    /// Returns `self / ‖self‖`; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Normalization { norm: n });
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &StateVector) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.axpy(-ONE, other)
    }

    /// Euclidean distance `‖self − other‖₂`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// `|⟨self|other⟩|`, the fidelity used for comparisons up to global phase.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(inner(self, other)?.norm())
    }

    /// Outcome probabilities `|amp_i|²` of a computational-basis readout.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// `⟨u|v⟩ = Σ conj(u_i)·v_i`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    check_dims(u.dim(), v.dim())?;
    Ok(inner_slices(&u.amps, &v.amps))
}

pub(crate) fn inner_slices(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Square dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[C64]> = self.entries.chunks(self.dim.max(1)).collect();
        f.debug_struct("Matrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

impl Matrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries do not form a non-empty {dim}×{dim} matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        let dim = cols.len();
        if dim == 0 {
            return Err(Error::Dimension("no columns".into()));
        }
        for c in cols {
            check_dims(c.dim(), dim)?;
        }
        Ok(Self::from_fn(dim, |i, j| cols[j].amps[i]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = other.row(k);
                let dst = &mut out.entries[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dims(self.dim, v.dim())?;
        Ok(StateVector::from_vec_unchecked(
            (0..self.dim)
                .map(|i| self.row(i).iter().zip(&v.amps).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Singular values in descending order, from the eigenvalues of `M†M`.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = self.adjoint().matmul(self).expect("square");
        let (vals, _) = jacobi_eigen(gram);
        let mut sv: Vec<f64> = vals.into_iter().map(|x| x.max(0.0).sqrt()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Number of singular values above `threshold`.
    pub fn numeric_rank(&self, threshold: f64) -> usize {
        self.singular_values()
            .into_iter()
            .filter(|&s| s > threshold)
            .count()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// A dense self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix,
}

impl HermitianOperator {
    /// Validates `‖M − M†‖_F ≤ 1e−12 · max(1, ‖M‖_F)`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Matrix::identity(dim),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            matrix: Matrix::diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.matrix.apply(v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

/// One eigenvalue group: a distinct eigenvalue and the eigenvectors spanning
/// its eigenspace.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// Indices into [`SpectralDecomposition::vectors`].
    pub members: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Vec<StateVector>,
    groups: Vec<EigenGroup>,
    group_tol: f64,
}

impl SpectralDecomposition {
    /// Eigenvalues in ascending order, one per eigenvector.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn group_tol(&self) -> f64 {
        self.group_tol
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn group_vectors(&self, group: usize) -> &[StateVector] {
        &self.vectors[self.groups[group].members.clone()]
    }

    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        self.groups
            .iter()
            .map(|g| (g.eigenvalue, g.multiplicity))
            .collect()
    }

    /// Largest `‖M v_j − λ_j v_j‖₂` over all eigenpairs.
    pub fn max_residual(&self, m: &HermitianOperator) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (v, &l) in self.vectors.iter().zip(&self.eigenvalues) {
            let r = m.apply(v)?.axpy(C64::new(-l, 0.0), v)?.norm();
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// Cyclic Jacobi sweeps on a Hermitian matrix. Returns unsorted eigenvalues
/// and the unitary whose columns are the matching eigenvectors.
fn jacobi_eigen(mut a: Matrix) -> (Vec<f64>, Matrix) {
    const MAX_SWEEPS: usize = 100;
    let n = a.dim;
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase-rotate column q so the (p, q) entry becomes real, then
                // apply the real symmetric Jacobi rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let conj_phase = phase.conj();
                let vpp = C64::new(c, 0.0);
                let vpq = C64::new(s, 0.0);
                let vqp = conj_phase * (-s);
                let vqq = conj_phase * c;

                // A ← A·V
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * vpp + y * vqp;
                    a[(i, q)] = x * vpq + y * vqq;
                }
                // A ← V†·A
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = vpp.conj() * x + vqp.conj() * y;
                    a[(q, j)] = vpq.conj() * x + vqq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * vpp + y * vqp;
                    v[(i, q)] = x * vpq + y * vqq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Eigendecomposition of a Hermitian operator with eigenvalues grouped into
/// degenerate eigenspaces.
///
/// Eigenvalues closer than `group_tol · max(1, |λ|_max)` are merged; adjacent
/// groups must be separated by more than ten times that amount, otherwise the
/// grouping is considered unsafe and [`Error::DegeneracyAmbiguity`] is
/// returned. Groups are sorted by ascending eigenvalue.
pub fn eig_hermitian(m: &HermitianOperator, group_tol: f64) -> Result<SpectralDecomposition> {
    if group_tol.is_nan() || group_tol <= 0.0 {
        return Err(Error::Param(format!(
            "group_tol must be positive, got {group_tol}"
        )));
    }
    // Re-validate in case the operator was built from a slightly perturbed matrix.
    let defect = m.matrix.hermiticity_defect();
    if defect > HERMITICITY_TOL * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }

    let (vals, vecs) = jacobi_eigen(m.matrix.clone());
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let vectors: Vec<StateVector> = order
        .iter()
        .map(|&j| StateVector::from_vec_unchecked(vecs.column(j)))
        .collect();

    let groups = group_eigenvalues(&eigenvalues, group_tol)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
        groups,
        group_tol,
    })
}

/// Groups sorted eigenvalues; see [`eig_hermitian`] for the tolerance rules.
pub(crate) fn group_eigenvalues(sorted: &[f64], group_tol: f64) -> Result<Vec<EigenGroup>> {
    let scale = sorted.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let tol = group_tol * scale;
    let guard = GROUP_GAP_FACTOR * tol;

    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        let split = i == sorted.len() || sorted[i] - sorted[i - 1] > tol;
        if !split {
            continue;
        }
        let members = start..i;
        let spread = sorted[i - 1] - sorted[start];
        if spread > tol {
            return Err(Error::DegeneracyAmbiguity {
                lower: sorted[start],
                upper: sorted[i - 1],
                gap: spread,
                guard,
            });
        }
        if let Some(prev) = groups.last() {
            let gap = sorted[start] - sorted[prev.members.end - 1];
            if gap <= guard {
                return Err(Error::DegeneracyAmbiguity {
                    lower: sorted[prev.members.end - 1],
                    upper: sorted[start],
                    gap,
                    guard,
                });
            }
        }
        let mean = sorted[members.clone()].iter().sum::<f64>() / members.len() as f64;
        groups.push(EigenGroup {
            eigenvalue: mean,
            multiplicity: members.len(),
            members,
        });
        start = i;
    }
    Ok(groups)
}

/// A unitary that can be applied (and inverted) on state vectors.
#[derive(Clone, Debug)]
pub enum UnitaryMap {
    Identity(usize),
    /// `I − 2 w w†` with unit `w`.
    Householder(StateVector),
    Dense(Matrix),
}

impl UnitaryMap {
    pub fn dim(&self) -> usize {
        match self {
            UnitaryMap::Identity(d) => *d,
            UnitaryMap::Householder(w) => w.dim(),
            UnitaryMap::Dense(m) => m.dim(),
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), v.dim())?;
        match self {
            UnitaryMap::Identity(_) => Ok(v.clone()),
            UnitaryMap::Householder(w) => {
                let coeff = inner_slices(&w.amps, &v.amps) * -2.0;
                v.axpy(coeff, w)
            }
            UnitaryMap::Dense(m) => m.apply(v),
        }
    }

    pub fn apply_adjoint(&self, v: &StateVector) -> Result<StateVector> {
        match self {
            UnitaryMap::Dense(m) => m.adjoint().apply(v),
            // Identity and reflections are self-adjoint.
            _ => self.apply(v),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let d = self.dim();
        let cols = (0..d)
            .map(|j| self.apply(&StateVector::basis(d, j)?))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(&cols)
    }
}

/// Householder reflection sending `phi` to `e₀` up to a global phase.
///
/// With `θ = arg φ₀` the reflection is taken through `φ − e^{iθ} e₀`, which
/// maps `φ ↦ e^{iθ} e₀` and `e₀ ↦ e^{−iθ} φ`. When `φ` already equals
/// `e^{iθ} e₀` the identity is returned.
pub fn householder_to_e0(phi: &StateVector) -> Result<UnitaryMap> {
    phi.require_normalized()?;
    let phi0 = phi.amps[0];
    let phase = if phi0.norm() > 0.0 {
        phi0 / phi0.norm()
    } else {
        ONE
    };
    let mut w = phi.clone();
    w.amps[0] -= phase;
    let wn = w.norm();
    if wn <= 1e-14 {
        return Ok(UnitaryMap::Identity(phi.dim()));
    }
    Ok(UnitaryMap::Householder(w.scaled(C64::new(1.0 / wn, 0.0))))
}
