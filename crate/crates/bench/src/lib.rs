//! Fixed inputs shared by the benchmarks.

use purent_core::states::{haar_random_pure, horodecki_state, random_mixed_state, rng_for};
use purent_core::{DimList, HermitianOp, PureState};

pub fn dims(v: &[usize]) -> DimList {
    DimList::new(v.to_vec()).expect("positive dims")
}

pub fn horodecki(a: f64) -> HermitianOp {
    horodecki_state(a).expect("a in [0, 1]")
}

pub fn pure(v: &[usize], seed: u64) -> PureState {
    haar_random_pure(dims(v), seed)
}

pub fn mixed(v: &[usize], rank: usize, seed: u64) -> HermitianOp {
    random_mixed_state(dims(v), rank, &mut rng_for(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_states() {
        horodecki(0.5).check_state(1e-9).unwrap();
        mixed(&[2, 3], 3, 1).check_state(1e-9).unwrap();
        assert_eq!(pure(&[3, 3, 3], 2).dims().total(), 27);
    }
}
