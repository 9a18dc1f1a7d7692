use sparc_bench::warm_instance;

#[test]
fn warm_state_has_advanced() {
    let (inst, state) = warm_instance(64, 4, 1.0, 15.0, 3);
    assert_eq!(state.t, 3);
    assert_eq!(state.a.len(), inst.x.values().len());
    let total: f64 = state.a.iter().sum();
    assert!((total - 64.0).abs() < 1e-9);
}
