use faer::Mat;
use purent_core::bounds::{f_arrow_upper, BoundOptions};
use purent_core::protocols::{
    conditional_states, steer_ensemble, swap_purity_protocol, SeparableChannel,
};
use purent_core::states::{haar_pure_from, haar_unitary, random_mixed_state, rng_for, Member};
use purent_core::variational::eg_upper_convex_roof;
use purent_core::{c64, DimList, HermitianOp};
use rand::Rng;

fn dl(v: &[usize]) -> DimList {
    DimList::new(v.to_vec()).unwrap()
}

/// Mixture of local unitaries: unital and separable.
fn random_unital(da: usize, db: usize, terms: usize, seed: u64) -> SeparableChannel {
    let mut rng = rng_for(seed, 0);
    let w: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let pairs = w
        .iter()
        .map(|p| {
            let s = c64::new((p / total).sqrt(), 0.0);
            let u = haar_unitary(da, &mut rng);
            let u = Mat::from_fn(da, da, |i, j| u[(i, j)] * s);
            (u, haar_unitary(db, &mut rng))
        })
        .collect();
    SeparableChannel::new(pairs).unwrap()
}

#[test]
fn channels_preserve_trace_and_positivity() {
    for i in 0..50u64 {
        let mut rng = rng_for(3, i);
        let (da, db) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let ch = random_unital(da, db, rng.gen_range(1..=4), i);
        let rho = random_mixed_state(dl(&[da, db]), rng.gen_range(1..=da * db), &mut rng);
        let out = ch.apply(&rho).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-9);
        assert!(out.lambda_min() > -1e-12);
    }
}

#[test]
fn unital_channels_fix_maximally_mixed_state() {
    for seed in 0..10 {
        let ch = random_unital(2, 3, 3, seed);
        assert!(ch.is_unital(1e-9));
        let mixed = HermitianOp::maximally_mixed(dl(&[2, 3]));
        assert!(ch.apply(&mixed).unwrap().sub(&mixed).unwrap().max_abs() < 1e-9);
        let adj = ch.adjoint().unwrap();
        assert!(adj.is_unital(1e-9));
    }
}

#[test]
fn adjoint_duality() {
    let ch = random_unital(2, 2, 3, 17);
    let adj = ch.adjoint().unwrap();
    let mut rng = rng_for(17, 1);
    for _ in 0..20 {
        let rho = random_mixed_state(dl(&[2, 2]), 4, &mut rng);
        let sigma = random_mixed_state(dl(&[2, 2]), 2, &mut rng);
        let lhs = ch.apply(&rho).unwrap().inner(&sigma).unwrap();
        let rhs = rho.inner(&adj.apply(&sigma).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }
}

#[test]
fn unitary_adjoint_inverts() {
    let mut rng = rng_for(5, 0);
    let u = haar_unitary(2, &mut rng);
    let v = haar_unitary(3, &mut rng);
    let ch = SeparableChannel::local_unitary(u, v).unwrap();
    let rho = random_mixed_state(dl(&[2, 3]), 3, &mut rng);
    let back = ch
        .adjoint()
        .unwrap()
        .apply(&ch.apply(&rho).unwrap())
        .unwrap();
    assert!(back.sub(&rho).unwrap().max_abs() < 1e-12);
}

#[test]
fn swap_protocol_fixes_maximally_mixed_sigma() {
    for d in [2usize, 3] {
        let mixed = HermitianOp::maximally_mixed(dl(&[d]));
        let ch = swap_purity_protocol(d, &mixed).unwrap();
        let input = mixed.tensor(&mixed);
        assert!(ch.apply(&input).unwrap().sub(&input).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn eigendecomposition_target_gives_projective_povm() {
    let psi = haar_pure_from(dl(&[2, 2, 2]), &mut rng_for(8, 0));
    let marginal = psi.reduced(&[1, 2]).unwrap();
    let e = marginal.eigh();
    let members = (0..2)
        .map(|k| {
            let phi = purent_core::PureState::from_unnormalized(
                e.vectors[k].clone(),
                marginal.dims().clone(),
            )
            .unwrap();
            (e.values[k], phi)
        })
        .collect();
    let target = purent_core::states::Ensemble::pure(members).unwrap();
    let povm = steer_ensemble(&psi, &target).unwrap();
    assert_eq!(povm.len(), 2);
    for m in &povm {
        let sq = HermitianOp::new(m.matrix() * m.matrix(), m.dims().clone()).unwrap();
        assert!(sq.sub(m).unwrap().max_abs() < 1e-9);
    }
}

#[test]
fn steering_optimal_decomposition_stays_below_one_way_bound() {
    let opts = BoundOptions::default();
    for seed in 0..3 {
        let psi = haar_pure_from(dl(&[2, 2, 2]), &mut rng_for(seed, 0));
        let roof = eg_upper_convex_roof(&psi.reduced(&[1, 2]).unwrap(), None, 6, seed).unwrap();
        let povm = steer_ensemble(&psi, &roof.ensemble).unwrap();
        let cond = conditional_states(&psi, &povm).unwrap();
        let mut achieved = 0.0;
        for ((q, member), st) in roof.ensemble.members().iter().zip(&cond) {
            let Member::Pure(phi) = member else {
                panic!("roof members are pure")
            };
            assert!(st.sub(&phi.projector().scaled(*q)).unwrap().max_abs() < 1e-8);
            achieved += q * phi.reduced(&[0]).unwrap().lambda_max();
        }
        let bound = f_arrow_upper(&psi.reduced(&[0, 1]).unwrap(), &opts).unwrap();
        assert!(achieved <= bound.upper + 1e-6);
        assert!((achieved - (1.0 - roof.value)).abs() < 1e-9);
    }
}
