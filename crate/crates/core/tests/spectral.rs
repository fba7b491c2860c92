//! Spectral structure of the symmetrized observable, checked against dense
//! eigendecompositions.

use luders_core::linalg::Matrix;
use luders_core::operators::{even_sum, odd_sum, SpectralRole};
use luders_core::{
    analytic_spectrum, apply_c_fast, build_a, build_c_dense, eig_hermitian, inner, projectors,
    uniform_superposition, LudersObservable, RandomStream, SearchOperatorParams, StateVector, C64,
    DEFAULT_GROUP_TOL,
};

fn params(dim: usize, marked: Option<usize>) -> SearchOperatorParams {
    SearchOperatorParams::with_delta(dim, 0.1, marked).unwrap()
}

fn random_state(dim: usize, rng: &mut RandomStream) -> StateVector {
    let amps = (0..dim)
        .map(|_| C64::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
        .collect();
    StateVector::new(amps).unwrap().normalized().unwrap()
}

#[test]
fn dense_c_dim8_marked3_grouping() {
    // Hand-derived block for D = 8, k = 3: [[0.55, −0.9093], [−0.9093, −0.5]]
    // has eigenvalues 0.025 ± 1.05.
    let c = build_c_dense(&params(8, Some(3))).unwrap();
    let dec = eig_hermitian(&c, DEFAULT_GROUP_TOL).unwrap();
    let got = dec.multiplicities();
    let expected = [(-1.025, 1), (1.0, 5), (1.075, 1), (1.1, 1)];
    assert_eq!(got.len(), expected.len());
    for ((lam, d), (elam, ed)) in got.iter().zip(expected) {
        assert!((lam - elam).abs() < 1e-12, "{lam} vs {elam}");
        assert_eq!(*d, ed);
    }
    assert!(dec.max_residual(&c).unwrap() <= 1e-10 * c.frobenius_norm());
}

#[test]
fn a_projector_fixes_constructed_vectors() {
    let a = build_a(&params(8, None)).unwrap();
    let obs = LudersObservable::new(&a, DEFAULT_GROUP_TOL).unwrap();
    let top = obs.projectors().last().unwrap();
    assert_eq!(top.rank(), 2);
    let ones = uniform_superposition(params(8, None).register());
    let alt = luders_core::operators::alternating_vector(8);
    for v in [ones, alt] {
        assert!(top.apply(&v).unwrap().distance(&v).unwrap() < 1e-12);
    }
}

#[test]
fn dense_multiplicities_match_structure_for_all_marks() {
    for d in [4usize, 8, 16, 32] {
        for k in 0..d {
            let p = params(d, Some(k));
            let c = build_c_dense(&p).unwrap();
            let dec = eig_hermitian(&c, DEFAULT_GROUP_TOL).unwrap();
            let mut mults: Vec<usize> = dec.groups().iter().map(|g| g.multiplicity).collect();
            mults.sort();
            assert_eq!(mults, vec![1, 1, 1, d - 3], "D={d} k={k}");
            let bulk = dec
                .groups()
                .iter()
                .find(|g| g.multiplicity == d - 3)
                .unwrap();
            if d > 4 {
                assert!((bulk.eigenvalue - p.a2).abs() < 1e-9);
            }
            assert!(dec
                .groups()
                .iter()
                .any(|g| (g.eigenvalue - p.a1).abs() < 1e-9));
        }
    }
}

#[test]
fn analytic_matches_dense_eigenvalues_and_projectors() {
    let mut rng = RandomStream::new(31);
    for d in [2usize, 4, 8, 16, 32] {
        for k in 0..d {
            let p = params(d, Some(k));
            let c = build_c_dense(&p).unwrap();
            let dec = eig_hermitian(&c, DEFAULT_GROUP_TOL).unwrap();
            let spec = analytic_spectrum(&p, DEFAULT_GROUP_TOL).unwrap();
            assert_eq!(dec.groups().len(), spec.groups().len(), "D={d} k={k}");
            let ps = projectors(&dec);
            let v = random_state(d, &mut rng);
            for (i, (g, a)) in dec.groups().iter().zip(spec.groups()).enumerate() {
                assert!((g.eigenvalue - a.eigenvalue).abs() <= 1e-9);
                assert_eq!(g.multiplicity, a.multiplicity);
                let dense = ps[i].apply(&v).unwrap();
                let fast = spec.project(i, &v).unwrap();
                assert!(
                    dense.distance(&fast).unwrap() <= 1e-9,
                    "D={d} k={k} group {i}"
                );
            }
        }
    }
}

#[test]
fn analytic_eigenpairs_have_small_residuals() {
    for d in [4usize, 8, 16, 32, 1024] {
        for k in [0, 1, d / 2, d - 1] {
            let p = params(d, Some(k));
            let spec = analytic_spectrum(&p, DEFAULT_GROUP_TOL).unwrap();
            let scale = (d as f64).sqrt() * 1.1;
            for e in std::iter::once(spec.surviving()).chain(spec.perturbed()) {
                let r = apply_c_fast(&p, &e.vector)
                    .unwrap()
                    .axpy(C64::new(-e.eigenvalue, 0.0), &e.vector)
                    .unwrap()
                    .norm();
                assert!(r <= 1e-9 * scale, "D={d} k={k} λ={} r={r}", e.eigenvalue);
            }
        }
    }
}

#[test]
fn surviving_vector_follows_marked_parity() {
    for d in [4usize, 8, 16, 32] {
        for k in 0..d {
            let p = params(d, Some(k));
            let expected = if k % 2 == 1 { even_sum(d) } else { odd_sum(d) };
            let spec = analytic_spectrum(&p, DEFAULT_GROUP_TOL).unwrap();
            assert!((spec.surviving().vector.overlap(&expected).unwrap() - 1.0).abs() < 1e-14);
            let c = build_c_dense(&p).unwrap();
            let r = c
                .apply(&expected)
                .unwrap()
                .axpy(C64::new(-p.a1, 0.0), &expected)
                .unwrap()
                .norm();
            assert!(r <= 1e-10, "D={d} k={k}: {r}");
            // The other parity sum is not an eigenvector.
            let broken = if k % 2 == 1 { odd_sum(d) } else { even_sum(d) };
            let img = c.apply(&broken).unwrap();
            let along = inner(&broken, &img).unwrap();
            let off = img.axpy(-along, &broken).unwrap().norm();
            assert!(off > 1e-3);
        }
    }
}

#[test]
fn perturbation_has_rank_two_with_rank_one_parts() {
    for d in [4usize, 8, 16] {
        for k in [0, 1, d - 1] {
            let p = params(d, Some(k));
            let a = build_a(&p).unwrap();
            let c = build_c_dense(&p).unwrap();
            let thresh = 1e-9 * a.frobenius_norm();
            let diff = c.matrix().sub(a.matrix()).unwrap();
            assert!(diff.numeric_rank(thresh) <= 2);

            let e_k = StateVector::basis(d, k).unwrap();
            let proj = Matrix::from_fn(d, |i, j| e_k.amps()[i] * e_k.amps()[j]);
            for part in [
                a.matrix().matmul(&proj).unwrap(),
                proj.matmul(a.matrix()).unwrap(),
            ] {
                assert_eq!(part.numeric_rank(thresh), 1);
                // Kernel dimension D − 1.
                assert_eq!(d - part.numeric_rank(thresh), d - 1);
            }

            // Range of the perturbation lies in span{e_k, Â e_k}.
            let ae_k = a.apply(&e_k).unwrap();
            let basis = [
                e_k.clone(),
                ae_k.axpy(-inner(&e_k, &ae_k).unwrap(), &e_k)
                    .unwrap()
                    .normalized()
                    .unwrap(),
            ];
            for j in 0..d {
                let col = StateVector::new(diff.column(j)).unwrap();
                let mut rest = col.clone();
                for b in &basis {
                    rest = rest.axpy(-inner(b, &col).unwrap(), b).unwrap();
                }
                assert!(rest.norm() <= 1e-9);
            }
        }
    }
}

#[test]
fn broken_vector_image_stays_in_block() {
    // Ĉ û_broken = a1(1 − 4/D) û_broken − (a1 + a2)√(2/D)√(1 − 2/D) v̂.
    for delta in [0.01, 0.1, 0.5] {
        for d in [4usize, 8, 16, 32] {
            for k in [0, 1, d - 2, d - 1] {
                let p = SearchOperatorParams::with_delta(d, delta, Some(k)).unwrap();
                let spec = analytic_spectrum(&p, DEFAULT_GROUP_TOL).unwrap();
                let c = build_c_dense(&p).unwrap();
                let ub = spec.broken();
                let v = spec.partner().unwrap();
                let img = c.apply(ub).unwrap();
                let cu = inner(ub, &img).unwrap();
                let cv = inner(v, &img).unwrap();
                let rest = img.axpy(-cu, ub).unwrap().axpy(-cv, v).unwrap();
                assert!(rest.norm() <= 1e-9);
                assert!(cv.norm() > 1e-9 * (p.a1 + p.a2).abs());

                let df = d as f64;
                let expected_u = p.a1 * (1.0 - 4.0 / df);
                let expected_v = -(p.a1 + p.a2) * (2.0 / df).sqrt() * (1.0 - 2.0 / df).sqrt();
                assert!((cu.re - expected_u).abs() < 1e-12 && cu.im.abs() < 1e-12);
                assert!((cv.re - expected_v).abs() < 1e-12 && cv.im.abs() < 1e-12);
                let block = spec.block();
                assert!((block[0][0] - expected_u).abs() < 1e-12);
                assert!((block[0][1] - expected_v).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn analytic_spectrum_roles() {
    let spec = analytic_spectrum(&params(8, Some(4)), DEFAULT_GROUP_TOL).unwrap();
    let roles: Vec<SpectralRole> = spec.groups().iter().map(|g| g.role).collect();
    assert_eq!(
        roles,
        vec![
            SpectralRole::Perturbed,
            SpectralRole::Bulk,
            SpectralRole::Perturbed,
            SpectralRole::Surviving
        ]
    );
    assert!((spec.surviving().vector.overlap(&odd_sum(8)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn fast_apply_matches_dense() {
    let mut rng = RandomStream::new(77);
    for d in [2usize, 4, 16, 32] {
        for k in [None, Some(0), Some(d - 1)] {
            let p = params(d, k);
            let c = build_c_dense(&p).unwrap();
            for _ in 0..5 {
                let v = random_state(d, &mut rng);
                let fast = apply_c_fast(&p, &v).unwrap();
                let dense = c.apply(&v).unwrap();
                assert!(fast.distance(&dense).unwrap() <= 1e-10 * dense.norm().max(1.0));
            }
        }
    }
}
