//! Invariants of the expansion kernels on random jets.

use bergman_core::expansion::{
    b01_second_order_route, b_coeff, check_degree, closed_j12, compute_f, jet_operators, origin_value, Engine,
};
use bergman_core::jets::{random_jets, PointJets};
use bergman_core::scalar::{Coeff, Mat, PiRat, Rat, Scalar};
use bergman_core::wick::KernelPoly;
use proptest::prelude::*;

fn engine_kernels<S: Scalar>(j: &PointJets<S>, r_max: usize) -> Vec<((usize, usize), KernelPoly<Mat<S>>)> {
    let m = j.model().unwrap();
    let ops = jet_operators(j).unwrap();
    let e = Engine::new(&m, &ops, Mat::identity(j.rank), r_max);
    let mut out = Vec::new();
    for q in 0..=r_max / 2 {
        for r in 2 * q..=r_max {
            // pairs that need 𝒪₃ or higher are out of reach
            if let Ok(f) = e.f(q, r) {
                out.push(((q, r), f));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernels_are_self_adjoint_with_bounded_degree(seed in 0u64..10_000, n in 1usize..=2, rank in 1usize..=2) {
        let j: PointJets<Rat> = random_jets(n, rank, seed, false).unwrap();
        for ((q, r), f) in engine_kernels(&j, if n == 1 { 4 } else { 3 }) {
            prop_assert_eq!(f.adjoint(), f.clone(), "F_({},{})", q, r);
            prop_assert!(check_degree(&f, r).is_ok(), "F_({},{})", q, r);
        }
    }

    #[test]
    fn leading_kahler_kernels_are_balanced(seed in 0u64..10_000, rank in 1usize..=2) {
        let j: PointJets<PiRat> = random_jets(1, rank, seed, true).unwrap();
        for ((q, r), f) in engine_kernels(&j, 4) {
            if r == 2 * q {
                prop_assert!(f.degrees().all(|d| d[1] == d[4]), "F_({},{})", q, r);
            }
        }
    }

    #[test]
    fn bq0_is_multiplicative(seed in 0u64..10_000, rank in 1usize..=2) {
        let j: PointJets<PiRat> = random_jets(1, rank, seed, true).unwrap();
        let m = j.model().unwrap();
        let ops = jet_operators(&j).unwrap();
        let zero = Mat::zeros(rank);
        let one = Mat::identity(rank);
        let j12 = origin_value(&compute_f(&m, &ops, one.clone(), 1, 2).unwrap(), &zero);
        prop_assert_eq!(&j12, &closed_j12(&j).unwrap());
        let j24 = origin_value(&compute_f(&m, &ops, one, 2, 4).unwrap(), &zero);
        prop_assert_eq!(j24, j12.mul(&j12));
    }

    #[test]
    fn b01_assembly_routes_agree(seed in 0u64..10_000, n in 1usize..=2) {
        let j: PointJets<PiRat> = random_jets(n, 1, seed, true).unwrap();
        let m = j.model().unwrap();
        let ops = jet_operators(&j).unwrap();
        let second = b01_second_order_route(&m, ops[1].as_ref().unwrap(), Mat::identity(1)).unwrap();
        let engine = b_coeff(&j, 0, 1).unwrap();
        prop_assert_eq!(second.scale(&m.pn_origin().unwrap()), engine);
    }
}
