use qpip_core::code_poly::{SignKey, SignedCode};
use qpip_core::galois::{EvalPoints, FieldPolynomial, PrimeField};
use qpip_core::linalg::Matrix;
use qpip_core::qas_clifford::{AttackChannel, Verdict};
use qpip_core::qas_poly::*;
use qpip_core::qsim::{DensityMatrix, PauliLabel, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Q: u32 = 5;
const D: usize = 1;

/// Classical oracle for an X-type attack: it survives under key k iff
/// k∘x′ is the evaluation of some polynomial of degree ≤ d.
fn x_attack_oracle(x: &[u32]) -> f64 {
    let field = PrimeField::new(Q).unwrap();
    let points = EvalPoints::standard(field, 3).unwrap();
    let evals: Vec<Vec<u32>> = (0..Q)
        .flat_map(|c| FieldPolynomial::enumerate_with_constant(field, D, field.elem(c as i64)).collect::<Vec<_>>())
        .map(|f| points.evaluate(&f).iter().map(|v| v.value()).collect())
        .collect();
    let mut hits = 0;
    for key in SignKey::all(3) {
        let signed: Vec<u32> = x.iter().zip(key.values()).map(|(v, k)| field.elem(*v as i64 * k as i64).value()).collect();
        if evals.contains(&signed) {
            hits += 1;
        }
    }
    hits as f64 / 8.0
}

fn digits(i: u32) -> Vec<u32> {
    vec![i / 25, (i / 5) % 5, i % 5]
}

#[test]
fn x_attacks_match_classical_oracle() {
    for i in 1..125 {
        let x = digits(i);
        let got = pauli_attack_fooling(&x, &[0, 0, 0], Q, D).unwrap();
        assert!((got - x_attack_oracle(&x)).abs() < 1e-12, "{x:?}");
        assert!(got <= 0.5 + 1e-12);
        if x.iter().filter(|v| **v != 0).count() <= 1 {
            assert_eq!(got, 0.0);
        }
    }
    assert!((pauli_attack_fooling(&[2, 3, 4], &[0, 0, 0], Q, D).unwrap() - 0.25).abs() < 1e-12);
}

/// `F_c Z^z F_c† = X^{-z/c}` and `F̃` preserves every code space, so a Z
/// attack is caught exactly when the matching X attack is.
#[test]
fn z_attacks_are_dual_to_x_attacks() {
    let field = PrimeField::new(Q).unwrap();
    let code = SignedCode::new(Q, D, SignKey::all_plus(3)).unwrap();
    let c = code.interpolation_coefficients().to_vec();
    for i in 1..125 {
        let z = digits(i);
        let x: Vec<u32> = z.iter().zip(&c).map(|(v, ci)| (-(field.elem(*v as i64) * field.elem(*ci as i64).inv().unwrap())).value()).collect();
        let got = pauli_attack_fooling(&[0, 0, 0], &z, Q, D).unwrap();
        assert!((got - x_attack_oracle(&x)).abs() < 1e-12, "{z:?}");
    }
}

#[test]
fn every_nonidentity_pauli_bounded() {
    let mut worst: f64 = 0.0;
    for i in 0..125 {
        for j in 0..125 {
            if i == 0 && j == 0 {
                continue;
            }
            worst = worst.max(pauli_attack_fooling(&digits(i), &digits(j), Q, D).unwrap());
        }
    }
    assert!(worst <= 0.5 + 1e-12, "{worst}");
}

#[test]
fn concatenated_shared_key_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..200 {
        let attacks: Vec<(Vec<u32>, Vec<u32>)> = (0..3).map(|_| (digits(rng.gen_range(0..125)), digits(rng.gen_range(0..125)))).collect();
        if attacks.iter().all(|(x, z)| x.iter().chain(z).all(|v| *v == 0)) {
            continue;
        }
        assert!(concat_pauli_attack_fooling(&attacks, Q, D).unwrap() <= 0.5 + 1e-12);
    }
    // one block attacked: same as the single-register value
    let one = vec![(vec![0; 3], vec![0; 3]), (vec![2, 3, 4], vec![0; 3])];
    assert!((concat_pauli_attack_fooling(&one, Q, D).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn honest_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..20 {
        let psi = PureState::random(Q, 1, &mut rng).unwrap();
        let key = PolyAuthKey::random(Q, 3, &mut rng);
        let (verdict, out) = poly_decode(&poly_encode(&psi, &key, D).unwrap(), &key, D, &mut rng).unwrap();
        assert_eq!(verdict, Verdict::Valid);
        assert!(out.unwrap().fidelity(&psi) > 1.0 - 1e-10);
    }
}

#[test]
fn exact_outcome_over_two_registers() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let a = PureState::random(Q, 1, &mut rng).unwrap();
    let b = PureState::random(Q, 1, &mut rng).unwrap();
    let sign = SignKey::random(3, &mut rng);
    let k1 = PolyAuthKey::random_pad(sign.clone(), Q, &mut rng);
    let k2 = PolyAuthKey::random_pad(sign, Q, &mut rng);
    let sent = poly_encode(&a, &k1, D).unwrap().tensor(&poly_encode(&b, &k2, D).unwrap()).unwrap();
    let intended = a.tensor(&b).unwrap();
    let honest = poly_exact_outcome(&[k1.clone(), k2.clone()], &sent, &intended, D).unwrap();
    assert!((honest.p_valid - 1.0).abs() < 1e-10 && honest.p_fool < 1e-10);
    // logical X on the second register, through its pad
    let code = SignedCode::new(Q, D, k2.sign.clone()).unwrap();
    let mut x = vec![0; 6];
    x[3..].copy_from_slice(&code.x_powers());
    let mut attacked = sent.clone();
    attacked.apply_pauli(&PauliLabel::new(Q, x, vec![0; 6]).unwrap()).unwrap();
    let mut flipped = b.clone();
    flipped.apply_x(0, 1).unwrap();
    let out = poly_exact_outcome(&[k1, k2], &attacked, &intended, D).unwrap();
    let overlap = intended.fidelity(&a.tensor(&flipped).unwrap());
    assert!((out.p_valid - 1.0).abs() < 1e-10);
    assert!((out.p_fool - (1.0 - overlap)).abs() < 1e-9);
}

#[test]
fn random_unitary_attack_with_environment() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let attack = AttackChannel::Unitary { matrix: Matrix::random_unitary(625, &mut rng), env_qubits: 1 };
    let psi = PureState::random(Q, 1, &mut rng).unwrap();
    let est = estimate_poly_soundness(&attack, &psi, D, 400, &mut rng).unwrap();
    assert!(est.within(0.5, 3.0), "{est:?}");
}

#[test]
fn pad_is_necessary() {
    let perm = codeword_shift_permutation(Q, D).unwrap();
    let attack = AttackChannel::Unitary { matrix: permutation_matrix(&perm), env_qubits: 0 };
    let zero = PureState::basis(Q, &[0]).unwrap();
    // one key class keeps all q^d strings, the other three keep q^d − 1
    let expected = (1.0 + 3.0 * (4.0f64 / 5.0).powi(2)) / 4.0;
    let unpadded = sign_only_fooling(&attack, &zero, D).unwrap();
    assert!((unpadded - expected).abs() < 1e-9, "{unpadded}");
    assert!(unpadded > 0.5);
    let padded = padded_fooling_exact(&attack, &zero, D).unwrap();
    assert!(padded <= 0.5, "{padded}");
}

#[test]
fn prover_view_is_maximally_mixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let target = DensityMatrix::maximally_mixed(Q, 3).unwrap();
    for key in SignKey::all(3).step_by(3) {
        let psi = PureState::random(Q, 1, &mut rng).unwrap();
        let view = prover_view(&key, &psi, D).unwrap();
        assert!(view.matrix().max_abs_diff(target.matrix()) < 1e-12);
    }
    let msg = PureState::random(2, 1, &mut rng).unwrap();
    let cview = clifford_prover_view(&msg, 1).unwrap();
    assert!(cview.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2, 2).unwrap().matrix()) < 1e-12);
}

#[test]
fn interpretation_agrees_with_code_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for sign in SignKey::all(3) {
        let code = SignedCode::new(Q, D, sign.clone()).unwrap();
        let key = PolyAuthKey::random_pad(sign, Q, &mut rng);
        for i in 0..125 {
            let raw = digits(i);
            let padded: Vec<u32> = raw.iter().zip(&key.x).map(|(v, x)| (v + x) % Q).collect();
            assert_eq!(interpret_measurement(&padded, &key, Q, D).unwrap(), code.logical_value(&raw));
        }
    }
}
