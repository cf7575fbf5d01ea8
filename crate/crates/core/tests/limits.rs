use std::sync::Arc;

use limitop::limit::{
    ghost_profile, limit_operator, limit_space, sample_spectrum, shift_limit, window_distance, Direction,
    LimitSpaceOutcome,
};
use limitop::operator::{gen, BandOperator};
use limitop::space::{Descriptor, Norm, Space};
use limitop::{Error, C64};

fn nat(max: i64) -> Arc<Space> {
    Arc::new(Space::build("nat", Descriptor::NatWindow { max }).unwrap())
}

fn zwin(r: i64) -> Arc<Space> {
    Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![-r], hi: vec![r], norm: Norm::L1 }).unwrap())
}

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[test]
fn nat_limit_space_is_an_interval_of_integers() {
    let s = nat(200);
    let LimitSpaceOutcome::Stabilized(ls) = limit_space(&s, &Direction::parse("10,10").unwrap(), 3, 5).unwrap() else {
        panic!("should stabilise");
    };
    assert_eq!(ls.template.len(), 7);
    let mut off: Vec<i64> = ls.template.offsets().unwrap().iter().map(|o| o[0]).collect();
    off.sort();
    assert_eq!(off, vec![-3, -2, -1, 0, 1, 2, 3]);
    // x_0 = 10 already has a full ball, so every window matches.
    assert_eq!(ls.stabilized_from, 0);
}

#[test]
fn quadrant_ray_stabilises_after_leaving_the_axis() {
    let s = Space::build("q", Descriptor::Quadrant { max: 40, norm: Norm::Linf }).unwrap();
    let LimitSpaceOutcome::Stabilized(ls) = limit_space(&s, &Direction::parse("0:2,1:0").unwrap(), 2, 5).unwrap() else {
        panic!("should stabilise");
    };
    assert_eq!(ls.stabilized_from, 2);
    assert_eq!(ls.template.len(), 25);
    let ys: Vec<i64> = ls.template.offsets().unwrap().iter().map(|o| o[1] + 2).collect();
    assert!(ys.iter().all(|y| (0..=4).contains(y)));
}

#[test]
fn divergent_windows_are_reported() {
    // Points alternate between a path end and a path middle.
    let d: Vec<Vec<f64>> = (0..40).map(|i: i32| (0..40).map(|j: i32| (i - j).abs() as f64).collect()).collect();
    let s = Space::from_distance_matrix("path", &d).unwrap();
    let dir = Direction::points("alt", vec![0, 20, 1, 21, 2, 22]);
    // Centre 0: distances must not decrease, so give a direction that stays ordered.
    assert!(matches!(limit_space(&s, &dir, 3, 4), Err(Error::BadDirection(_))));
    let dir = Direction::points("edge", vec![30, 35, 39]);
    match limit_space(&s, &dir, 3, 3).unwrap() {
        LimitSpaceOutcome::Diverged(d) => {
            assert_eq!(d.class_of, vec![0, 0, 1]);
            assert_eq!(d.class_sizes, vec![7, 4]);
        }
        LimitSpaceOutcome::Stabilized(_) => panic!("last ball is truncated"),
    }
}

#[test]
fn unilateral_shift_limits_to_bilateral_shift() {
    let s = nat(400);
    let a = gen::shift(s.clone(), 1);
    let w = limit_operator(&a, &Direction::parse("20,20").unwrap(), 3, 1e-12, 5).unwrap();
    assert_eq!(w.cauchy_tail, 0.0);
    let off = w.template.offsets().unwrap();
    for i in 0..w.template.len() {
        for j in 0..w.template.len() {
            let want = if off[i][0] == off[j][0] + 1 { 1.0 } else { 0.0 };
            assert_eq!(w.operator.get(i, j), c(want));
        }
    }
    assert!(w.contraction_ok());
    assert_eq!(w.propagation(), 1);
    assert!((w.stencil_nu(2.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_operator_gives_zero_window() {
    let s = nat(100);
    let w = limit_operator(&BandOperator::zero(s, 1), &Direction::parse("10,10").unwrap(), 2, 0.0, 5).unwrap();
    assert!(w.operator.is_zero());
    assert_eq!(w.cauchy_tail, 0.0);
}

#[test]
fn slowly_oscillating_multiplier_is_scalar_near_zero() {
    let s = nat(300_000);
    let a = gen::sin_log(s);
    let dir = Direction::parse("500,exp:pi").unwrap();
    let w = limit_operator(&a, &dir, 3, 1e-2, 3).unwrap();
    assert!(w.cauchy_tail < 1e-2);
    let last = w.deviations.last().unwrap();
    assert!(last.deviation < 1e-2);
    let sup = w.operator.entry_sup();
    assert!(sup < 1e-2, "{sup}");
    assert_eq!(w.propagation(), 0);
    // Non-convergent along a linear direction.
    assert!(matches!(
        limit_operator(&gen::sin_log(nat(2000)), &Direction::parse("100,100").unwrap(), 2, 1e-6, 5),
        Err(Error::CauchyFailure { .. })
    ));
}

#[test]
fn shift_extraction_agrees_with_matching() {
    let s = zwin(120);
    let taps = gen::random_stencil(1, 2, 7);
    let a = gen::stencil(s.clone(), &taps);
    let dir = Direction::parse("0,20").unwrap();
    let w1 = limit_operator(&a, &dir, 4, 1e-9, 5).unwrap();
    let w2 = shift_limit(&a, &dir, 4, 1e-9, 5).unwrap();
    assert!(window_distance(&w1, &w2).unwrap() <= 2e-9);
    // Stencil recovered exactly.
    let off = w1.template.offsets().unwrap();
    for (h, v) in &taps {
        let i = off.iter().position(|o| o[0] == 0).unwrap();
        let j = off.iter().position(|o| o[0] == h[0]).unwrap();
        assert_eq!(w1.operator.get(i, j), *v);
    }
}

#[test]
fn parity_along_even_basepoints() {
    let s = zwin(100);
    let a = gen::parity(s.clone());
    let w = shift_limit(&a, &Direction::parse("0,10").unwrap(), 3, 0.0, 5).unwrap();
    let off = w.template.offsets().unwrap();
    for i in 0..off.len() {
        assert_eq!(w.operator.get(i, i), c(off[i][0].rem_euclid(2) as f64));
    }
    let n = Arc::new(Space::from_distance_matrix("pt", &[vec![0.0]]).unwrap());
    assert!(matches!(
        shift_limit(&BandOperator::identity(n, 1), &Direction::points("p", vec![0]), 0, 0.0, 1),
        Err(Error::NotGroup)
    ));
}

#[test]
fn spectrum_of_shift_and_identity() {
    let s = nat(600);
    let dirs: Vec<Direction> = ["50,50", "30,40", "100,25"].iter().map(|d| Direction::parse(d).unwrap()).collect();
    let sp = sample_spectrum(&gen::shift(s.clone(), 1), &dirs, 4, 1e-12, 5, 2.0).unwrap();
    for w in &sp.windows[1..] {
        assert_eq!(window_distance(&sp.windows[0], w).unwrap(), 0.0);
    }
    assert!((sp.min_nu - 1.0).abs() < 1e-12);
    let sp = sample_spectrum(&BandOperator::identity(s, 1), &dirs, 4, 1e-12, 5, 2.0).unwrap();
    assert_eq!(sp.min_nu, 1.0);
}

#[test]
fn ghost_profiles() {
    let s = nat(200);
    let g = gen::ghost(s.clone());
    let prof = ghost_profile(&g, &[0, 1, 2, 5, 10]);
    for p in &prof {
        assert!((p.sup - (-(p.radius as f64 + 1.0)).exp2()).abs() < 1e-300);
    }
    let w = limit_operator(&g, &Direction::parse("100,20").unwrap(), 3, 1e-12, 5).unwrap();
    assert!(w.operator.entry_sup() <= prof.last().unwrap().sup);
    let id = ghost_profile(&BandOperator::identity(s.clone(), 1), &[0, 50, 150]);
    assert!(id.iter().all(|p| p.sup == 1.0));
    let fin = BandOperator::diagonal(s, |x| c(if x < 5 { 1.0 } else { 0.0 }));
    assert_eq!(ghost_profile(&fin, &[4, 10])[0].sup, 0.0);
}
