use easyq::models::{sample_classical, ClassicalGroup};
use easyq::tensor_rep::{is_intertwiner, t_matrix, IndexSpace, TImpl};
use easyq::{enumerate, CategoryId};
use proptest::prelude::*;

const TOL: f64 = 1e-8;

/// Every `T_π` with `π ∈ cat(0,k)`, `k ≤ max_k`, is fixed by the sample.
fn fixes_all(group: ClassicalGroup, cat: &str, imp: TImpl, p: usize, q: usize, seed: u64, max_k: usize) -> bool {
    let space = IndexSpace::new(p, q).unwrap();
    let u = sample_classical(group, p, q, seed).unwrap();
    let cat: CategoryId = cat.parse().unwrap();
    (1..=max_k).all(|k| {
        enumerate(&cat, 0, k).unwrap().iter().all(|d| {
            let t = t_matrix(d, &space, &imp).unwrap();
            is_intertwiner(&t, &u, 0, k, TOL).unwrap().holds
        })
    })
}

fn space() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((0, 3)), Just((1, 1)), Just((2, 1)), Just((1, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn orthogonal_samples_fix_pairings(seed in any::<u64>(), (p, q) in space()) {
        prop_assert!(fixes_all(ClassicalGroup::O, "nc2", TImpl::Plain, p, q, seed, 4));
    }

    #[test]
    fn bistochastic_samples_fix_singletons_and_pairs(seed in any::<u64>(), (p, q) in space()) {
        prop_assert!(fixes_all(ClassicalGroup::B, "nc12", TImpl::Plain, p, q, seed, 4));
    }

    #[test]
    fn torus_samples_fix_even_partitions(seed in any::<u64>(), (p, q) in space()) {
        prop_assert!(fixes_all(ClassicalGroup::TorusH, "nceven", TImpl::Plain, p, q, seed, 4));
    }

    #[test]
    fn h_times_s_samples_fix_bulleted_partitions(seed in any::<u64>(), (p, q) in space()) {
        prop_assert!(fixes_all(ClassicalGroup::HxS, "nc", TImpl::Plain, p, q, seed, 4));
        prop_assert!(fixes_all(ClassicalGroup::HxS, "ncbullet", TImpl::Bulleted, p, q, seed, 3));
    }

    #[test]
    fn permutation_samples_fix_everything(seed in any::<u64>(), q in 2usize..5) {
        prop_assert!(fixes_all(ClassicalGroup::Sq, "nc", TImpl::Plain, 0, q, seed, 4));
        prop_assert!(fixes_all(ClassicalGroup::Hq, "nceven", TImpl::Plain, 0, q, seed, 4));
    }
}

#[test]
fn orthogonal_sample_moves_a_singleton() {
    assert!(!fixes_all(ClassicalGroup::O, "nc12", TImpl::Plain, 1, 2, 11, 1));
}
