use num_complex::Complex64 as C64;
use qpip_core::clifford::{clifford_group_order, enumerate_cliffords};
use qpip_core::lemmas::*;
use qpip_core::linalg::Matrix;
use qpip_core::qsim::PauliLabel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Label of `U† P U` read off dense matrices by Hilbert-Schmidt overlap.
fn dense_image(u: &Matrix, p: &PauliLabel) -> usize {
    let m = u.adjoint().matmul(&p.to_matrix()).matmul(u);
    let dim = m.rows() as f64;
    let hits: Vec<usize> = PauliLabel::all(2, p.len())
        .enumerate()
        .filter(|(_, l)| (l.to_matrix().adjoint().matmul(&m).trace().norm() - dim).abs() < 1e-9)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(hits.len(), 1);
    hits[0]
}

#[test]
fn mix_counts_are_uniform() {
    for n in 1..=2 {
        let report = clifford_mix(n).unwrap();
        assert_eq!(report.group_size as u128, clifford_group_order(n));
        assert!(report.is_uniform());
        let expect = report.group_size / ((1 << (2 * n)) - 1);
        assert_eq!(expect, if n == 1 { 8 } else { 768 });
        // the same histogram from dense matrices
        let labels: Vec<PauliLabel> = PauliLabel::all(2, n).collect();
        let mut dense = vec![vec![0usize; labels.len()]; labels.len()];
        for c in enumerate_cliffords(n).unwrap() {
            let u = c.to_unitary().unwrap();
            for (i, p) in labels.iter().enumerate() {
                dense[i][dense_image(&u, p)] += 1;
            }
        }
        assert_eq!(dense, report.counts);
    }
}

#[test]
fn mix_report_rejects_a_skewed_histogram() {
    let mut r = clifford_mix(1).unwrap();
    r.counts[1][1] += 1;
    r.counts[1][2] -= 1;
    assert!(!r.is_uniform());
}

#[test]
fn clifford_twirl_cross_terms_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let rho = random_density(2, &mut rng);
        for p in PauliLabel::all(2, 1) {
            for p2 in PauliLabel::all(2, 1).filter(|p2| *p2 != p) {
                assert!(clifford_twirl_cross(&p, &p2, &rho).unwrap().max_abs() < 1e-9);
            }
        }
    }
}

#[test]
fn decomposition_weights_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let u = Matrix::random_unitary(4, &mut rng);
        let rho = random_density(2, &mut rng);
        let s = decomposition_trace_sum(&u, 2, 1, &rho).unwrap();
        assert!((s - 1.0).abs() < 1e-9, "{s}");
    }
    // a non-unitary operator breaks it
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let u = Matrix::random_unitary(4, &mut rng).scale(C64::new(2.0, 0.0));
    let rho = random_density(2, &mut rng);
    assert!((decomposition_trace_sum(&u, 2, 1, &rho).unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn generalized_pauli_twirls() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for q in [3u32, 5] {
        let rho = random_density(q as usize, &mut rng);
        let labels: Vec<PauliLabel> = PauliLabel::all(q, 1).collect();
        for p in &labels {
            for p2 in labels.iter().filter(|p2| *p2 != p) {
                assert!(pauli_twirl_cross(p, p2, &rho).unwrap().max_abs() < 1e-9);
            }
            let pm = p.to_matrix();
            let avg = pauli_twirl_cross(p, p, &rho).unwrap().scale(C64::new(1.0 / (q * q) as f64, 0.0));
            assert!(avg.max_abs_diff(&pm.matmul(&rho).matmul(&pm.adjoint())) < 1e-9);
        }
    }
}

#[test]
fn suite_passes() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let checks = lemma_suite(20, &mut rng).unwrap();
    assert_eq!(checks.len(), 6);
    for c in &checks {
        assert!(c.passed(), "{c:?}");
    }
}
