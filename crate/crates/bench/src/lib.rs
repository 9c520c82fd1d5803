//! Synthetic systems for the benchmarks under `benches/`.

use csm_core::{Csm, CsmState, CsmTransition, Formula, SystemModel};

/// `n` machines passing a token around a ring. Machine 0 starts it on the
/// environment symbol `go`; every machine holds it for one step.
pub fn token_ring(n: usize) -> SystemModel {
    let token = |i: usize| format!("t{}", i % n);
    let machines = (0..n)
        .map(|i| {
            let trigger = if i == 0 {
                Formula::atom("go")
            } else {
                Formula::atom(token(i + n - 1))
            };
            let mut m = Csm::new(format!("R{i}"));
            m.inputs.insert(if i == 0 {
                "go".into()
            } else {
                token(i + n - 1).into()
            });
            m.outputs.insert(token(i).into());
            m.states.push(CsmState::new("idle"));
            m.states
                .push(CsmState::with_outputs("busy", [token(i).into()].into()));
            m.initial = "idle".into();
            m.transitions
                .push(CsmTransition::new("idle", trigger.clone(), "busy"));
            m.transitions
                .push(CsmTransition::new("idle", Formula::not(trigger), "idle"));
            m.transitions
                .push(CsmTransition::new("busy", Formula::True, "idle"));
            m
        })
        .collect();
    SystemModel::new("Ring", machines).expect("ring is well formed")
}

/// `x0*!x1 + x1*!x2 + ...` over `n` atoms.
pub fn chain(n: usize) -> Formula {
    let atoms: Vec<Formula> = (0..n).map(|i| Formula::atom(format!("x{i}"))).collect();
    Formula::or(
        atoms
            .windows(2)
            .map(|w| Formula::and(vec![w[0].clone(), Formula::not(w[1].clone())]))
            .collect(),
    )
}
