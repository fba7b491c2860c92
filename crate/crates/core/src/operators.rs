//! Builders for the search observables.
//!
//! * `Â = R† G R` with `R` the Walsh-Hadamard matrix and
//!   `G = diag(a1, a1, a2, …, a2)`: eigenvalue `a1` on the span of the
//!   all-ones and alternating-sign vectors (equivalently the even-position
//!   and odd-position sums `û1`, `û2`), `a2` elsewhere.
//! * `B̂ = I − 2 e_k e_k†`, the phase-flip oracle for marked index `k`.
//! * `Ĉ = (ÂB̂ + B̂Â)/2 = Â − (Â e_k e_k† + e_k e_k† Â)`, a rank-≤2 update of `Â`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    inner, is_power_of_two, HermitianOperator, Matrix, StateVector, C64, GROUP_GAP_FACTOR,
};

/// Default splitting `δ`, with `a1 = 1 + δ` and `a2 = 1`.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Minimum separation `|a1 − a2|`.
pub const MIN_SPLITTING: f64 = 1e-6;

/// A register of `qubits` qubits, dimension `2^qubits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegisterSpec {
    qubits: u32,
}

impl RegisterSpec {
    pub fn new(qubits: u32) -> Result<Self> {
        if qubits == 0 || qubits >= usize::BITS {
            return Err(Error::Param(format!("qubit count {qubits} out of range")));
        }
        Ok(Self { qubits })
    }

    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim < 2 || !is_power_of_two(dim) {
            return Err(Error::Param(format!(
                "register dimension must be a power of two >= 2, got {dim}"
            )));
        }
        Self::new(dim.trailing_zeros())
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Parameters of `Â`, `B̂` and `Ĉ` on one register.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOperatorParams {
    pub dim: usize,
    pub a1: f64,
    pub a2: f64,
    /// Marked index within the register; `None` makes the oracle the identity.
    pub marked: Option<usize>,
}

impl SearchOperatorParams {
    pub fn new(dim: usize, a1: f64, a2: f64, marked: Option<usize>) -> Result<Self> {
        RegisterSpec::from_dim(dim)?;
        if !a1.is_finite() || !a2.is_finite() || a1 == 0.0 || a2 == 0.0 {
            return Err(Error::Param(format!(
                "a1 and a2 must be finite and nonzero (a1 = {a1}, a2 = {a2})"
            )));
        }
        if (a1 - a2).abs() <= MIN_SPLITTING {
            return Err(Error::Param(format!(
                "a1 and a2 must differ by more than {MIN_SPLITTING} (a1 = {a1}, a2 = {a2})"
            )));
        }
        if let Some(k) = marked {
            if k >= dim {
                return Err(Error::Param(format!(
                    "marked index {k} out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self {
            dim,
            a1,
            a2,
            marked,
        })
    }

    /// `a1 = 1 + delta`, `a2 = 1`.
    pub fn with_delta(dim: usize, delta: f64, marked: Option<usize>) -> Result<Self> {
        Self::new(dim, 1.0 + delta, 1.0, marked)
    }

    pub fn register(&self) -> RegisterSpec {
        RegisterSpec::from_dim(self.dim).expect("validated")
    }
}

/// In-place `H^{⊗q}` via the radix-2 butterfly, normalized by `1/√D`.
pub fn walsh_hadamard_in_place(data: &mut [C64]) -> Result<()> {
    let n = data.len();
    if !is_power_of_two(n) {
        return Err(Error::Dimension(format!(
            "Walsh-Hadamard needs a power-of-two length, got {n}"
        )));
    }
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for x in data.iter_mut() {
        *x *= scale;
    }
    Ok(())
}

pub fn walsh_hadamard(phi: &StateVector) -> Result<StateVector> {
    let mut out = phi.clone();
    walsh_hadamard_in_place(out.amps_mut())?;
    Ok(out)
}

/// Dense Walsh-Hadamard matrix, `H_ij = (−1)^{popcount(i & j)} / √D`.
pub fn walsh_hadamard_matrix(dim: usize) -> Result<Matrix> {
    if !is_power_of_two(dim) {
        return Err(Error::Dimension(format!(
            "Walsh-Hadamard needs a power-of-two dimension, got {dim}"
        )));
    }
    let s = 1.0 / (dim as f64).sqrt();
    Ok(Matrix::from_fn(dim, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { s } else { -s };
        C64::new(sign, 0.0)
    }))
}

/// Uniform superposition prepared as `H^{⊗q} e₀`.
pub fn uniform_superposition(reg: RegisterSpec) -> StateVector {
    let e0 = StateVector::basis(reg.dim(), 0).expect("dim >= 2");
    walsh_hadamard(&e0).expect("power of two")
}

fn parity_sum(dim: usize, parity: usize) -> StateVector {
    let s = (2.0 / dim as f64).sqrt();
    let amps = (0..dim)
        .map(|i| {
            if i % 2 == parity {
                C64::new(s, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::from_vec_unchecked(amps)
}

/// `û1`: normalized sum of the even-position basis states.
pub fn even_sum(dim: usize) -> StateVector {
    parity_sum(dim, 0)
}

/// `û2`: normalized sum of the odd-position basis states.
pub fn odd_sum(dim: usize) -> StateVector {
    parity_sum(dim, 1)
}

/// Normalized `(+1, −1, +1, −1, …)`.
pub fn alternating_vector(dim: usize) -> StateVector {
    let s = 1.0 / (dim as f64).sqrt();
    StateVector::from_vec_unchecked(
        (0..dim)
            .map(|i| C64::new(if i % 2 == 0 { s } else { -s }, 0.0))
            .collect(),
    )
}

pub fn build_a(p: &SearchOperatorParams) -> Result<HermitianOperator> {
    let d = p.dim;
    let r = walsh_hadamard_matrix(d)?;
    let g: Vec<f64> = (0..d).map(|i| if i < 2 { p.a1 } else { p.a2 }).collect();
    let a = r.adjoint().matmul(&Matrix::diagonal(&g))?.matmul(&r)?;
    HermitianOperator::new(a)
}

pub fn build_oracle(p: &SearchOperatorParams) -> Result<HermitianOperator> {
    let diag: Vec<f64> = (0..p.dim)
        .map(|i| if Some(i) == p.marked { -1.0 } else { 1.0 })
        .collect();
    Ok(HermitianOperator::diagonal(&diag))
}

/// `(AB + BA)/2`.
pub fn build_c(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let ab = a.matrix().matmul(b.matrix())?;
    let ba = b.matrix().matmul(a.matrix())?;
    HermitianOperator::new(ab.add(&ba)?.scaled(0.5))
}

/// Dense `Ĉ` for the given parameters.
pub fn build_c_dense(p: &SearchOperatorParams) -> Result<HermitianOperator> {
    build_c(&build_a(p)?, &build_oracle(p)?)
}

fn check_dim(p: &SearchOperatorParams, phi: &StateVector) -> Result<()> {
    if phi.dim() != p.dim {
        return Err(Error::Dimension(format!(
            "state dimension {} does not match operator dimension {}",
            phi.dim(),
            p.dim
        )));
    }
    Ok(())
}

/// `Âφ = a2·φ + (a1 − a2)(⟨û1|φ⟩û1 + ⟨û2|φ⟩û2)` in O(D).
pub fn apply_a_fast(p: &SearchOperatorParams, phi: &StateVector) -> Result<StateVector> {
    check_dim(p, phi)?;
    let mut sums = [C64::new(0.0, 0.0); 2];
    for (i, a) in phi.amps().iter().enumerate() {
        sums[i % 2] += a;
    }
    // ⟨û|φ⟩û has entries (2/D)·Σ_{same parity} φ_j.
    let w = 2.0 / p.dim as f64 * (p.a1 - p.a2);
    let amps = phi
        .amps()
        .iter()
        .enumerate()
        .map(|(i, a)| a * p.a2 + sums[i % 2] * w)
        .collect();
    Ok(StateVector::from_vec_unchecked(amps))
}

/// `Ĉφ` in O(D) using the rank-2 structure of `Ĉ − Â`.
pub fn apply_c_fast(p: &SearchOperatorParams, phi: &StateVector) -> Result<StateVector> {
    let mut out = apply_a_fast(p, phi)?;
    let Some(k) = p.marked else {
        return Ok(out);
    };
    let phi_k = phi.amps()[k];
    let a_phi_k = out.amps()[k];
    // Â e_k = a2 e_k + (a1 − a2)(2/D) Σ_{j ≡ k mod 2} e_j
    let w = phi_k * (2.0 / p.dim as f64 * (p.a1 - p.a2));
    let amps = out.amps_mut();
    for j in (k % 2..p.dim).step_by(2) {
        amps[j] -= w;
    }
    amps[k] -= phi_k * p.a2 + a_phi_k;
    Ok(out)
}

/// Role of an eigenvalue group of `Ĉ` in the closed-form spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralRole {
    /// The parity sum that remains an `a1`-eigenvector.
    Surviving,
    /// The untouched `a2` bulk of dimension `D − 3`.
    Bulk,
    /// Eigenpairs of the 2×2 block over `{û_broken, v̂}` (`λ₋`, `λ₊`).
    Perturbed,
}

#[derive(Clone, Debug)]
pub struct AnalyticEigenpair {
    pub eigenvalue: f64,
    pub vector: StateVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticGroup {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub role: SpectralRole,
}

/// Closed-form spectrum of `Ĉ` with a marked index present.
///
/// Let `û_b` be the parity sum containing `e_k` and `c = ⟨û_b|e_k⟩ = √(2/D)`.
/// With `v̂ = (e_k − c û_b)/√(1 − c²)`, `Ĉ` leaves `span{û_b, v̂}` invariant and
/// acts there as
///
/// ```text
/// [ a1(1 − 2c²)           −c√(1−c²)(a1 + a2) ]
/// [ −c√(1−c²)(a1 + a2)    a2(1 − 2(1 − c²))  ]
/// ```
///
/// so `Ĉ û_b = a1(1 − 4/D) û_b − (a1 + a2)√(2/D)√(1 − 2/D) v̂`. The other parity
/// sum stays an `a1`-eigenvector and the orthogonal complement of
/// `{û1, û2, e_k}` is the `a2` bulk. For `D = 2` there is no `v̂` and
/// `Ĉ = a1 B̂`.
#[derive(Clone, Debug)]
pub struct AnalyticSpectrum {
    params: SearchOperatorParams,
    surviving: AnalyticEigenpair,
    perturbed: Vec<AnalyticEigenpair>,
    broken: StateVector,
    partner: Option<StateVector>,
    block: [[f64; 2]; 2],
    groups: Vec<AnalyticGroup>,
}

pub fn analytic_spectrum(p: &SearchOperatorParams, group_tol: f64) -> Result<AnalyticSpectrum> {
    let Some(k) = p.marked else {
        return Err(Error::Param(
            "analytic spectrum requires a marked index".into(),
        ));
    };
    let d = p.dim;
    let (surviving_vec, broken) = if k % 2 == 1 {
        (even_sum(d), odd_sum(d))
    } else {
        (odd_sum(d), even_sum(d))
    };
    let surviving = AnalyticEigenpair {
        eigenvalue: p.a1,
        vector: surviving_vec,
    };

    let (perturbed, partner, block) = if d == 2 {
        let pair = AnalyticEigenpair {
            eigenvalue: -p.a1,
            vector: broken.clone(),
        };
        (vec![pair], None, [[-p.a1, 0.0], [0.0, 0.0]])
    } else {
        let c2 = 2.0 / d as f64;
        let c = c2.sqrt();
        let s = (1.0 - c2).sqrt();
        let e_k = StateVector::basis(d, k)?;
        let v_hat = e_k
            .axpy(C64::new(-c, 0.0), &broken)?
            .scaled(C64::new(1.0 / s, 0.0));
        let block = [
            [p.a1 * (1.0 - 2.0 * c2), -c * s * (p.a1 + p.a2)],
            [-c * s * (p.a1 + p.a2), p.a2 * (1.0 - 2.0 * s * s)],
        ];
        let pairs = sym2_eigen(block)
            .into_iter()
            .map(|(lambda, [w0, w1])| AnalyticEigenpair {
                eigenvalue: lambda,
                vector: broken
                    .scaled(C64::new(w0, 0.0))
                    .axpy(C64::new(w1, 0.0), &v_hat)
                    .expect("same dim"),
            })
            .collect();
        (pairs, Some(v_hat), block)
    };

    let mut groups = vec![AnalyticGroup {
        eigenvalue: p.a1,
        multiplicity: 1,
        role: SpectralRole::Surviving,
    }];
    if d >= 4 {
        groups.push(AnalyticGroup {
            eigenvalue: p.a2,
            multiplicity: d - 3,
            role: SpectralRole::Bulk,
        });
    }
    groups.extend(perturbed.iter().map(|e| AnalyticGroup {
        eigenvalue: e.eigenvalue,
        multiplicity: 1,
        role: SpectralRole::Perturbed,
    }));
    groups.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    check_separation(groups.iter().map(|g| g.eigenvalue), group_tol)?;

    Ok(AnalyticSpectrum {
        params: *p,
        surviving,
        perturbed,
        broken,
        partner,
        block,
        groups,
    })
}

/// Eigenpairs of a real symmetric 2×2 matrix, ascending.
fn sym2_eigen(m: [[f64; 2]; 2]) -> [(f64, [f64; 2]); 2] {
    let (p, r, s) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (p + s);
    let half_diff = 0.5 * (p - s);
    let rad = half_diff.hypot(r);
    let lo = mean - rad;
    let hi = mean + rad;
    let vec_for = |lambda: f64| -> [f64; 2] {
        let a = [r, lambda - p];
        let b = [lambda - s, r];
        let na = a[0].hypot(a[1]);
        let nb = b[0].hypot(b[1]);
        let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
        if n <= f64::EPSILON * (p.abs() + s.abs() + r.abs()).max(f64::MIN_POSITIVE) {
            // Already diagonal.
            return if (lambda - p).abs() <= (lambda - s).abs() {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            };
        }
        [v[0] / n, v[1] / n]
    };
    let v_lo = vec_for(lo);
    // Orthogonal completion keeps the pair orthonormal when rad ≈ 0.
    let v_hi = [-v_lo[1], v_lo[0]];
    [(lo, v_lo), (hi, v_hi)]
}

/// Ensures ascending eigenvalues are pairwise separated by more than the
/// grouping guard band.
pub(crate) fn check_separation(
    sorted: impl Iterator<Item = f64> + Clone,
    group_tol: f64,
) -> Result<()> {
    let scale = sorted.clone().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let guard = GROUP_GAP_FACTOR * group_tol * scale;
    let vals: Vec<f64> = sorted.collect();
    for w in vals.windows(2) {
        let gap = w[1] - w[0];
        if gap <= guard {
            return Err(Error::DegeneracyAmbiguity {
                lower: w[0],
                upper: w[1],
                gap,
                guard,
            });
        }
    }
    Ok(())
}

impl AnalyticSpectrum {
    pub fn params(&self) -> &SearchOperatorParams {
        &self.params
    }

    /// Groups sorted by ascending eigenvalue.
    pub fn groups(&self) -> &[AnalyticGroup] {
        &self.groups
    }

    pub fn surviving(&self) -> &AnalyticEigenpair {
        &self.surviving
    }

    /// `λ₋`, `λ₊` (a single pair `−a1` for `D = 2`).
    pub fn perturbed(&self) -> &[AnalyticEigenpair] {
        &self.perturbed
    }

    /// The parity sum whose degeneracy is broken.
    pub fn broken(&self) -> &StateVector {
        &self.broken
    }

    /// `v̂`, absent for `D = 2`.
    pub fn partner(&self) -> Option<&StateVector> {
        self.partner.as_ref()
    }

    /// The 2×2 block of `Ĉ` over `{û_broken, v̂}`.
    pub fn block(&self) -> [[f64; 2]; 2] {
        self.block
    }

    pub fn a2_multiplicity(&self) -> usize {
        self.params.dim.saturating_sub(3)
    }

    fn explicit_vectors(&self, group: usize) -> Option<Vec<&StateVector>> {
        let g = &self.groups[group];
        match g.role {
            SpectralRole::Surviving => Some(vec![&self.surviving.vector]),
            SpectralRole::Perturbed => self
                .perturbed
                .iter()
                .find(|e| e.eigenvalue == g.eigenvalue)
                .map(|e| vec![&e.vector]),
            SpectralRole::Bulk => None,
        }
    }

    /// Unit eigenvector of a simple group; `None` for the bulk.
    pub fn group_vector(&self, group: usize) -> Option<&StateVector> {
        self.explicit_vectors(group).map(|v| v[0])
    }

    /// Applies the spectral projector of `group`; the bulk projector is
    /// `I` minus the rank-one projectors of the other groups.
    pub fn project(&self, group: usize, v: &StateVector) -> Result<StateVector> {
        match self.explicit_vectors(group) {
            Some(vs) => {
                let mut out = StateVector::zeros(v.dim())?;
                for b in vs {
                    out = out.axpy(inner(b, v)?, b)?;
                }
                Ok(out)
            }
            None => {
                let mut out = v.clone();
                for b in std::iter::once(&self.surviving.vector)
                    .chain(self.perturbed.iter().map(|e| &e.vector))
                {
                    out = out.axpy(-inner(b, v)?, b)?;
                }
                Ok(out)
            }
        }
    }

    /// Lüders probabilities `‖P_k φ‖²` of every group.
    pub fn probabilities(&self, phi: &StateVector) -> Result<Vec<f64>> {
        let total = phi.norm_sqr();
        let mut probs = vec![0.0; self.groups.len()];
        let mut explicit = 0.0;
        let mut bulk = None;
        for (i, _) in self.groups.iter().enumerate() {
            match self.group_vector(i) {
                Some(b) => {
                    probs[i] = inner(b, phi)?.norm_sqr();
                    explicit += probs[i];
                }
                None => bulk = Some(i),
            }
        }
        if let Some(i) = bulk {
            probs[i] = (total - explicit).max(0.0);
        }
        Ok(probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
    }

    /// Matrix-free `Ĉ`, for residual checks.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        apply_c_fast(&self.params, v)
    }
}
