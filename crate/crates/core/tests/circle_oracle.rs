//! Torsion of rank-one circle local systems against a brute-force oracle.

mod common;

use std::collections::BTreeMap;

use common::brute_force_tau_squared;
use num_traits::Signed;
use supertorsion::corpus::{circle, circle_graded, circle_holonomy, circle_lambda};
use supertorsion::linalg::{frac, q, Matrix};
use supertorsion::rep::RepUH;
use supertorsion::torsion::{torsion_direct, TorsionConfig};

#[test]
fn oracle_matches_closed_form() {
    for l in [q(2), q(3), q(5), frac(7, 2), frac(-1, 3)] {
        let expected = l.abs() / ((q(1) - &l) * (q(1) - &l));
        assert_eq!(brute_force_tau_squared(&l), expected);
    }
}

#[test]
fn circle_torsion_matches_brute_force() {
    for l in [q(2), q(3), q(5), frac(7, 2)] {
        let cfg = TorsionConfig::new(circle(), circle_lambda(l.clone()), None, None).unwrap();
        let r = torsion_direct(&cfg, None).unwrap();
        assert_eq!(r.tau_squared, brute_force_tau_squared(&l), "λ = {l}");
    }
}

#[test]
fn moving_the_twist_to_another_edge_is_a_gauge_change() {
    let l = q(3);
    for (edge, hol) in [(vec![0, 1], l.recip()), (vec![1, 2], l.recip())] {
        let mut ops = BTreeMap::new();
        for e in [vec![0, 1], vec![1, 2], vec![0, 2]] {
            let x = if e == edge { hol.clone() } else { q(1) };
            ops.insert(e, Matrix::diagonal(&[x]));
        }
        let moved = RepUH::new(&circle(), vec![(1, 0); 3], ops).unwrap();
        let r = torsion_direct(&TorsionConfig::new(circle(), moved, None, None).unwrap(), None).unwrap();
        assert_eq!(r.tau_squared, brute_force_tau_squared(&l), "twist on {edge:?}");
    }
}

#[test]
fn graded_line_pair_is_quotient_of_rank_one_torsions() {
    let (a, d) = (q(2), q(5));
    let cfg = TorsionConfig::new(circle(), circle_graded(a.clone(), d.clone()), None, None).unwrap();
    let r = torsion_direct(&cfg, None).unwrap();
    assert_eq!(r.tau_squared, brute_force_tau_squared(&a) / brute_force_tau_squared(&d));
}

#[test]
fn rank_two_upper_triangular_holonomy_factors() {
    // [[2,1],[0,3]] has a flag of invariant lines with holonomies 2 and 3.
    let e = circle_holonomy((2, 0), None, Matrix::from_i64(&[&[2, 1], &[0, 3]]));
    let r = torsion_direct(&TorsionConfig::new(circle(), e, None, None).unwrap(), None).unwrap();
    assert_eq!(r.tau_squared, brute_force_tau_squared(&q(2)) * brute_force_tau_squared(&q(3)));
}
