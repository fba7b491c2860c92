//! Measurement engine.
//!
//! A Lüders measurement of an observable projects the state onto the whole
//! eigenspace of the observed eigenvalue, `φ ↦ P_k φ / ‖P_k φ‖`, with
//! probability `p_k = ⟨φ|P_k|φ⟩`. The von Neumann variant instead collapses
//! onto a single vector of a full orthonormal basis. Mixed outcomes are
//! represented by sampling: each call returns one collapsed pure state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{sample_index, RandomStream};
use crate::linalg::{
    eig_hermitian, inner, inner_slices, HermitianOperator, Matrix, SpectralDecomposition,
    StateVector, C64,
};

/// Below this outcome probability a collapse is refused.
pub const COLLAPSE_THRESHOLD: f64 = 1e-14;

/// Orthogonal projector onto one eigenvalue group.
#[derive(Clone, Debug)]
pub struct EigenspaceProjector {
    pub group_id: usize,
    pub eigenvalue: f64,
    basis: Vec<StateVector>,
}

impl EigenspaceProjector {
    /// Projector onto the span of `basis`, which must be orthonormal.
    pub fn from_basis(group_id: usize, eigenvalue: f64, basis: Vec<StateVector>) -> Result<Self> {
        check_orthonormal(&basis)?;
        Ok(Self {
            group_id,
            eigenvalue,
            basis,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, StateVector::dim)
    }

    /// `P v = Σ_j |ψ_j⟩⟨ψ_j|v⟩`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zeros(v.dim())?;
        for b in &self.basis {
            let c = inner(b, v)?;
            for (o, a) in out.amps_mut().iter_mut().zip(b.amps()) {
                *o += c * a;
            }
        }
        Ok(out)
    }

    /// `⟨φ|P|φ⟩`, computed as `Σ_j |⟨ψ_j|φ⟩|²`.
    pub fn expectation(&self, phi: &StateVector) -> Result<f64> {
        let mut p = 0.0;
        for b in &self.basis {
            p += inner(b, phi)?.norm_sqr();
        }
        Ok(p)
    }

    pub fn to_matrix(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, |i, j| {
            self.basis
                .iter()
                .map(|b| b.amps()[i] * b.amps()[j].conj())
                .sum()
        })
    }
}

fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let g = inner_slices(a.amps(), b.amps());
            let expected = if i == j { 1.0 } else { 0.0 };
            if (g - C64::new(expected, 0.0)).norm() > 1e-10 {
                return Err(Error::Basis(format!(
                    "vectors {i} and {j} have Gram entry {g}, expected {expected}"
                )));
            }
        }
    }
    Ok(())
}

/// One projector per eigenvalue group, in group order.
pub fn projectors(dec: &SpectralDecomposition) -> Vec<EigenspaceProjector> {
    dec.groups()
        .iter()
        .enumerate()
        .map(|(k, g)| EigenspaceProjector {
            group_id: k,
            eigenvalue: g.eigenvalue,
            basis: dec.group_vectors(k).to_vec(),
        })
        .collect()
}

/// Outcome probabilities `p_k = ⟨φ|P_k|φ⟩`, clamped to `[0, 1]`.
pub fn probabilities(phi: &StateVector, ps: &[EigenspaceProjector]) -> Result<Vec<f64>> {
    phi.require_normalized()?;
    ps.iter()
        .map(|p| p.expectation(phi).map(|x| x.clamp(0.0, 1.0)))
        .collect()
}

/// Post-measurement state `P φ / ‖P φ‖`.
pub fn collapse(phi: &StateVector, p: &EigenspaceProjector) -> Result<StateVector> {
    let projected = p.apply(phi)?;
    let probability = projected.norm_sqr();
    if probability <= COLLAPSE_THRESHOLD {
        return Err(Error::ZeroProbabilityCollapse { probability });
    }
    Ok(projected.scaled(C64::new(1.0 / probability.sqrt(), 0.0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasurementRecord {
    pub group_id: usize,
    pub eigenvalue: f64,
    pub probability: f64,
    #[serde(skip)]
    pub post_state: StateVector,
}

/// An observable prepared for repeated Lüders measurements.
#[derive(Clone, Debug)]
pub struct LudersObservable {
    decomposition: SpectralDecomposition,
    projectors: Vec<EigenspaceProjector>,
}

impl LudersObservable {
    pub fn new(m: &HermitianOperator, group_tol: f64) -> Result<Self> {
        Ok(Self::from_decomposition(eig_hermitian(m, group_tol)?))
    }

    pub fn from_decomposition(decomposition: SpectralDecomposition) -> Self {
        let projectors = projectors(&decomposition);
        Self {
            decomposition,
            projectors,
        }
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn projectors(&self) -> &[EigenspaceProjector] {
        &self.projectors
    }

    pub fn probabilities(&self, phi: &StateVector) -> Result<Vec<f64>> {
        probabilities(phi, &self.projectors)
    }

    /// Samples an eigenvalue group with one uniform draw and collapses onto it.
    pub fn measure(&self, phi: &StateVector, rng: &mut RandomStream) -> Result<MeasurementRecord> {
        let probs = self.probabilities(phi)?;
        let k = sample_index(&probs, rng.uniform())
            .ok_or(Error::ZeroProbabilityCollapse { probability: 0.0 })?;
        let post_state = collapse(phi, &self.projectors[k])?;
        Ok(MeasurementRecord {
            group_id: k,
            eigenvalue: self.projectors[k].eigenvalue,
            probability: probs[k],
            post_state,
        })
    }
}

/// Lüders measurement of `m` on `phi`; consumes exactly one uniform draw.
pub fn measure_luders(
    phi: &StateVector,
    m: &HermitianOperator,
    group_tol: f64,
    rng: &mut RandomStream,
) -> Result<MeasurementRecord> {
    LudersObservable::new(m, group_tol)?.measure(phi, rng)
}

/// Apparatus-basis measurement: collapses onto basis vector `b_i` with
/// probability `|⟨b_i|φ⟩|²`; consumes exactly one uniform draw.
pub fn measure_von_neumann(
    phi: &StateVector,
    basis: &[StateVector],
    labels: &[f64],
    rng: &mut RandomStream,
) -> Result<MeasurementRecord> {
    phi.require_normalized()?;
    if basis.len() != phi.dim() || labels.len() != basis.len() {
        return Err(Error::Basis(format!(
            "need {} basis vectors and labels, got {} and {}",
            phi.dim(),
            basis.len(),
            labels.len()
        )));
    }
    for b in basis {
        if b.dim() != phi.dim() {
            return Err(Error::Basis("basis vector dimension mismatch".into()));
        }
    }
    check_orthonormal(basis)?;
    let probs: Vec<f64> = basis
        .iter()
        .map(|b| inner_slices(b.amps(), phi.amps()).norm_sqr().min(1.0))
        .collect();
    let i = sample_index(&probs, rng.uniform())
        .ok_or(Error::ZeroProbabilityCollapse { probability: 0.0 })?;
    Ok(MeasurementRecord {
        group_id: i,
        eigenvalue: labels[i],
        probability: probs[i],
        post_state: basis[i].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_GROUP_TOL;

    fn plus() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[s, s]).unwrap()
    }

    fn j_operator(delta: f64) -> HermitianOperator {
        HermitianOperator::diagonal(&[1.0, 1.0 + delta])
    }

    #[test]
    fn identity_has_single_identity_projector() {
        let obs =
            LudersObservable::new(&HermitianOperator::identity(2), DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(obs.projectors().len(), 1);
        let m = obs.projectors()[0].to_matrix();
        assert!(m.sub(&Matrix::identity(2)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn j_projectors_are_basis_projectors() {
        let obs = LudersObservable::new(&j_operator(0.1), DEFAULT_GROUP_TOL).unwrap();
        let ps = obs.projectors();
        assert_eq!(ps.len(), 2);
        assert!((ps[0].eigenvalue - 1.0).abs() < 1e-14);
        let p0 = ps[0].to_matrix();
        let p1 = ps[1].to_matrix();
        assert!(
            p0.sub(&Matrix::diagonal(&[1.0, 0.0]))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
        assert!(
            p1.sub(&Matrix::diagonal(&[0.0, 1.0]))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn j_probabilities() {
        let obs = LudersObservable::new(&j_operator(0.1), DEFAULT_GROUP_TOL).unwrap();
        let p = obs.probabilities(&plus()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
        let p = obs
            .probabilities(&StateVector::basis(2, 0).unwrap())
            .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14);
    }

    #[test]
    fn probabilities_reject_unnormalized_state() {
        let obs = LudersObservable::new(&j_operator(0.1), DEFAULT_GROUP_TOL).unwrap();
        let v = StateVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            obs.probabilities(&v),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn collapse_cases() {
        let obs = LudersObservable::new(&j_operator(0.1), DEFAULT_GROUP_TOL).unwrap();
        let e0 = StateVector::basis(2, 0).unwrap();
        let out = collapse(&plus(), &obs.projectors()[0]).unwrap();
        assert!((out.overlap(&e0).unwrap() - 1.0).abs() < 1e-12);
        let out = collapse(&e0, &obs.projectors()[0]).unwrap();
        assert!((out.overlap(&e0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            collapse(&e0, &obs.projectors()[1]),
            Err(Error::ZeroProbabilityCollapse { .. })
        ));
    }

    #[test]
    fn identity_measurement_is_a_no_op() {
        let mut rng = RandomStream::new(1);
        let phi = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let rec = measure_luders(&phi, &HermitianOperator::identity(2), 1e-9, &mut rng).unwrap();
        assert!((rec.probability - 1.0).abs() < 1e-12);
        assert!((rec.post_state.overlap(&phi).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rng.draws(), 1);
    }

    #[test]
    fn j_measurement_frequencies() {
        let obs = LudersObservable::new(&j_operator(0.1), DEFAULT_GROUP_TOL).unwrap();
        let mut rng = RandomStream::new(11);
        let n = 100_000u64;
        let hits = (0..n)
            .filter(|_| obs.measure(&plus(), &mut rng).unwrap().group_id == 0)
            .count() as u64;
        let (lo, hi) = crate::experiments::wilson_interval(hits, n, 0.99).unwrap();
        assert!(lo <= 0.5 && 0.5 <= hi, "{hits}");
        assert_eq!(rng.draws(), n);
    }

    #[test]
    fn von_neumann_on_basis_element() {
        let basis: Vec<_> = (0..4).map(|i| StateVector::basis(4, i).unwrap()).collect();
        let mut rng = RandomStream::new(3);
        for _ in 0..100 {
            let rec =
                measure_von_neumann(&basis[2], &basis, &[1.0, 2.0, 3.0, 4.0], &mut rng).unwrap();
            assert_eq!(rec.group_id, 2);
            assert_eq!(rec.eigenvalue, 3.0);
        }
    }

    #[test]
    fn von_neumann_rejects_bad_basis() {
        let e0 = StateVector::basis(2, 0).unwrap();
        let basis = vec![e0.clone(), e0.clone()];
        let mut rng = RandomStream::new(3);
        assert!(matches!(
            measure_von_neumann(&e0, &basis, &[0.0, 1.0], &mut rng),
            Err(Error::Basis(_))
        ));
    }

    #[test]
    fn von_neumann_matches_luders_on_nondegenerate_spectrum() {
        let m = HermitianOperator::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let obs = LudersObservable::new(&m, DEFAULT_GROUP_TOL).unwrap();
        let phi = StateVector::from_real(&[0.1, 0.3, 0.5, (1.0f64 - 0.35).sqrt()]).unwrap();
        let basis: Vec<_> = obs.decomposition().vectors().to_vec();
        let labels = obs.decomposition().eigenvalues().to_vec();
        let n = 100_000;
        let mut lc = [0u64; 4];
        let mut vc = [0u64; 4];
        let mut r1 = RandomStream::new(21);
        let mut r2 = RandomStream::new(21);
        for _ in 0..n {
            lc[obs.measure(&phi, &mut r1).unwrap().group_id] += 1;
            vc[measure_von_neumann(&phi, &basis, &labels, &mut r2)
                .unwrap()
                .group_id] += 1;
        }
        // Same stream, same inverse-CDF order: identical outcome counts.
        assert_eq!(lc, vc);
        let expected = [0.01, 0.09, 0.25, 0.65];
        for (c, p) in lc.iter().zip(expected) {
            let (lo, hi) = crate::experiments::wilson_interval(*c, n, 0.99).unwrap();
            assert!(lo <= p && p <= hi);
        }
    }
}
