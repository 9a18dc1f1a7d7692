//! Fixtures shared by the benchmarks.

use sparc_core::amp::AmpState;
use sparc_core::experiment::Instance;
use sparc_core::model::CodeParams;

/// A decoding instance together with the AMP state after `warmup` iterations.
pub fn warm_instance(l: usize, b: usize, r: f64, snr: f64, warmup: usize) -> (Instance, AmpState) {
    let params = CodeParams::new(l, b, r, snr).expect("valid benchmark parameters");
    let inst = Instance::generate(params, 1).expect("instance generation");
    let mut state = AmpState::initial(&inst.f, &inst.y, b, 1.0 / b as f64).expect("initial state");
    for _ in 0..warmup {
        sparc_core::amp::amp_step(&mut state, &inst.f, &inst.y, snr).expect("stable warmup");
    }
    (inst, state)
}
