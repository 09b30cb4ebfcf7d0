use qpip_core::protocol::clifford::run_clifford_qpip;
use qpip_core::protocol::{Circuit, Gate, Message, Party, ProtocolVerdict, Prover, ProverContext, RunConfig, StandardProver, Strategy};
use qpip_core::qas_clifford::{exact_clifford_twirl, pauli_attack};
use qpip_core::qsim::PureState;

fn honest(d: usize) -> StandardProver {
    StandardProver::clifford(d, Strategy::Honest).unwrap()
}

#[test]
fn x_on_zero_accepts() {
    let c = Circuit::new(2, vec![0], vec![Gate::X(0), Gate::Measure(0)], 0).unwrap();
    for seed in 0..50 {
        let t = run_clifford_qpip(&c, &mut honest(1), &RunConfig::new(1), seed).unwrap();
        assert_eq!(t.verdict, ProtocolVerdict::Accept);
        assert_eq!(t.output, Some(1));
    }
}

#[test]
fn bell_pair_parity_is_deterministic() {
    // K⁴ = I, so the second CNOT and H undo the first pair; X then sets wire 1
    let gates = vec![Gate::H(0), Gate::Cnot(0, 1), Gate::K(0), Gate::K(0), Gate::K(0), Gate::K(0), Gate::Cnot(0, 1), Gate::H(0), Gate::X(1), Gate::Measure(1)];
    let c = Circuit::new(2, vec![0, 0], gates, 1).unwrap();
    for seed in 0..30 {
        let t = run_clifford_qpip(&c, &mut honest(1), &RunConfig::new(1), seed).unwrap();
        assert_eq!(t.verdict, ProtocolVerdict::Accept, "{:?}", t.abort_reason);
    }
}

#[test]
fn occupancy_stays_at_three_for_d1() {
    let gates = vec![Gate::Cnot(0, 1), Gate::H(2), Gate::Cnot(2, 1), Gate::Cnot(1, 0), Gate::Measure(0)];
    let c = Circuit::new(2, vec![1, 0, 1], gates, 0).unwrap();
    for seed in 0..20 {
        let t = run_clifford_qpip(&c, &mut honest(1), &RunConfig::new(1), seed).unwrap();
        assert_ne!(t.verdict, ProtocolVerdict::Abort);
        assert_eq!(t.high_water, 3);
    }
}

#[test]
fn ownership_moves_with_every_register() {
    let c = Circuit::new(2, vec![0, 1], vec![Gate::Cnot(1, 0), Gate::Measure(0)], 0).unwrap();
    let t = run_clifford_qpip(&c, &mut honest(1), &RunConfig::new(1), 9).unwrap();
    let to_prover = t.ownership.iter().filter(|e| e.to == Party::Prover).count();
    let to_verifier = t.ownership.iter().filter(|e| e.to == Party::Verifier).count();
    // two inputs, two re-encodings; two returns for CNOT, one for the measurement
    assert_eq!((to_prover, to_verifier), (4, 3));
    for e in &t.ownership {
        assert!(matches!(t.entries[e.seq].message, Message::AuthState { .. } | Message::Return { .. }));
    }
}

#[test]
fn output_flip_matches_exact_twirl() {
    let attack = pauli_attack(&[1, 0], &[0, 0]).unwrap();
    let exact = exact_clifford_twirl(&attack, &PureState::basis(2, &[0]).unwrap(), 1).unwrap();
    assert!((exact.p_fool - 4.0 / 15.0).abs() < 1e-9);
    let c = Circuit::new(2, vec![0], vec![Gate::Measure(0)], 0).unwrap();
    let trials = 3000u64;
    let mut wrong = 0;
    for seed in 0..trials {
        let mut p = StandardProver::clifford(1, Strategy::OutputFlip).unwrap();
        if run_clifford_qpip(&c, &mut p, &RunConfig::new(1), seed).unwrap().verdict == ProtocolVerdict::Accept {
            wrong += 1;
        }
    }
    let rate = wrong as f64 / trials as f64;
    let se = (exact.p_fool * (1.0 - exact.p_fool) / trials as f64).sqrt();
    assert!((rate - exact.p_fool).abs() < 4.0 * se, "{rate}");
}

#[test]
fn state_swap_is_usually_caught() {
    let c = Circuit::new(2, vec![1], vec![Gate::H(0), Gate::H(0), Gate::Measure(0)], 0).unwrap();
    let mut aborted = 0;
    for seed in 0..200 {
        let mut p = StandardProver::clifford(1, Strategy::StateSwap { round: 0 }).unwrap();
        if run_clifford_qpip(&c, &mut p, &RunConfig::new(1), seed).unwrap().verdict == ProtocolVerdict::Abort {
            aborted += 1;
        }
    }
    // a random basis pair decodes to a valid ancilla half the time
    assert!((60..140).contains(&aborted), "{aborted}");
}

struct Forger;

impl Prover for Forger {
    fn handle(&mut self, ctx: &mut ProverContext<'_>, msg: &Message) -> qpip_core::Result<Vec<Message>> {
        Ok(match msg {
            Message::Request { registers, .. } => {
                // hands back wires it never received
                let fake = ctx.alloc(&[0, 0])?;
                registers.iter().map(|r| Message::Return { register: *r, wires: vec![fake[1] + 100, fake[0] + 100] }).collect()
            }
            _ => Vec::new(),
        })
    }
}

struct Stingy;

impl Prover for Stingy {
    fn handle(&mut self, _ctx: &mut ProverContext<'_>, msg: &Message) -> qpip_core::Result<Vec<Message>> {
        Ok(match msg {
            Message::Request { registers, .. } => vec![Message::Return { register: registers[0], wires: vec![0] }],
            _ => Vec::new(),
        })
    }
}

#[test]
fn protocol_violations_abort() {
    let c = Circuit::new(2, vec![0], vec![Gate::X(0), Gate::Measure(0)], 0).unwrap();
    let t = run_clifford_qpip(&c, &mut Forger, &RunConfig::new(1), 0).unwrap();
    assert_eq!(t.verdict, ProtocolVerdict::Abort);
    let t = run_clifford_qpip(&c, &mut Stingy, &RunConfig::new(1), 0).unwrap();
    assert_eq!(t.verdict, ProtocolVerdict::Abort);
    assert!(t.abort_reason.unwrap().contains("number of qubits"));
}

#[test]
fn deterministic_replay_and_d2() {
    let c = Circuit::new(2, vec![0, 1], vec![Gate::Cnot(1, 0), Gate::H(1), Gate::Measure(0)], 0).unwrap();
    let a = run_clifford_qpip(&c, &mut honest(2), &RunConfig::new(2), 77).unwrap();
    let b = run_clifford_qpip(&c, &mut honest(2), &RunConfig::new(2), 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.verdict, ProtocolVerdict::Accept);
    assert!(a.high_water <= 5);
}

#[test]
fn unsupported_requests_are_errors() {
    assert!(StandardProver::clifford(1, Strategy::RandomReport).is_err());
    let c = Circuit::new(5, vec![0], vec![Gate::Measure(0)], 0).unwrap();
    assert!(run_clifford_qpip(&c, &mut honest(1), &RunConfig::new(1), 0).is_err());
}
