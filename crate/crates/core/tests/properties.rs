use std::sync::Arc;

use proptest::prelude::*;

use limitop::limit::{limit_operator, Direction};
use limitop::lower_norm::{nu, nu_s};
use limitop::operator::{decompose, gen, norm2, schur_bound, three_color, BandOperator};
use limitop::partition::{average, make_partition, weighted_sum, SumMode};
use limitop::space::{match_bijective, Descriptor, Norm, Space, Template};
use limitop::sparsify::sparsify;
use limitop::C64;

fn lattice(dim: usize, side: i64, norm: Norm) -> Arc<Space> {
    let lo = vec![0; dim];
    let hi = vec![side - 1; dim];
    Arc::new(Space::build("w", Descriptor::Lattice { lo, hi, norm }).unwrap())
}

fn norm_strategy() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Linf)]
}

fn graph_space() -> impl Strategy<Value = Space> {
    (4usize..30, any::<u64>()).prop_map(|(n, seed)| {
        // Random tree plus chords, weights 1..=3.
        let mut edges = Vec::new();
        let mut x = seed;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        for i in 1..n {
            edges.push(((next() % i as u64) as usize, i, (1 + next() % 3) as f64));
        }
        for _ in 0..n / 3 {
            let (a, b) = ((next() % n as u64) as usize, (next() % n as u64) as usize);
            if a != b {
                edges.push((a, b, (1 + next() % 3) as f64));
            }
        }
        Space::build("g", Descriptor::Graph { n, edges }).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn balls_are_symmetric_and_growth_is_monotone(s in graph_space(), r in 0u32..6) {
        for x in 0..s.len() {
            for y in s.ball(x, r).unwrap() {
                prop_assert!(s.ball(y, r).unwrap().contains(&x));
            }
        }
        prop_assert!(s.growth(r) <= s.growth(r + 1));
    }

    #[test]
    fn ball_templates_match_themselves(s in graph_space(), r in 0u32..5, c in 0usize..4) {
        let c = c % s.len();
        let (t, ids) = Template::from_ball(&s, c, r);
        let m = match_bijective(&s, &t, c, r).expect("a ball matches its own template");
        let mut got = m.target.clone();
        got.sort();
        let mut want = ids.clone();
        want.sort();
        prop_assert_eq!(got, want);
        for a in 0..t.len() {
            for b in 0..t.len() {
                prop_assert_eq!(s.dist(m.map(a), m.map(b)), t.dist(a, b));
            }
        }
    }

    #[test]
    fn decomposition_round_trip(dim in 1usize..3, side in 3i64..12, norm in norm_strategy(), prop in 0u32..4, density in 0.2f64..1.0, k in 1usize..3, seed: u64) {
        let s = lattice(dim, side, norm);
        let a = gen::random_sparse_band(s.clone(), k, prop, density, seed);
        let d = decompose(&a);
        prop_assert!(d.len() <= s.growth(prop));
        prop_assert_eq!(d.reconstruct(s.clone()), a);
    }

    #[test]
    fn three_colouring_of_derangements(n in 2usize..200, seed: u64) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<u64> = (0..n as u64).collect();
        let mut t: Vec<u64> = b.clone();
        loop {
            t.shuffle(&mut rng);
            if t.iter().zip(&b).all(|(x, y)| x != y) {
                break;
            }
        }
        let c = three_color(&b, &b, &t).unwrap();
        prop_assert!(c.verify(&b, &b, &t));
    }

    #[test]
    fn adjoint_reverses_products_and_norms_are_bounded(side in 4i64..30, seed: u64) {
        let s = lattice(1, side, Norm::L1);
        let a = gen::random_band(s.clone(), 1, 2, seed);
        let b = gen::random_band(s.clone(), 1, 1, seed ^ 1);
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        prop_assert!(lhs.max_entry_diff(&rhs).unwrap() < 1e-12);
        prop_assert!(norm2(&a).unwrap() <= schur_bound(&a, 2.0).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn lower_norm_relations(side in 5i64..24, seed: u64, p in prop_oneof![Just(1.5f64), Just(2.0), Just(3.0)], s_rad in 0u32..4) {
        let s = lattice(1, side, Norm::L1);
        let a = gen::random_band(s.clone(), 1, 1, seed).shift_by(C64::new(3.0, 0.0));
        let b = gen::random_band(s.clone(), 1, 1, seed ^ 7).shift_by(C64::new(3.0, 0.0));
        let all: Vec<usize> = (0..s.len()).collect();
        let na = nu(&a, &all, p).unwrap();
        let nb = nu(&b, &all, p).unwrap();
        let tol = if p == 2.0 { 1e-9 } else { 1e-6 };
        prop_assert!((na.value - nb.value).abs() <= schur_bound(&a.sub(&b).unwrap(), p).unwrap() + tol);
        let local = nu_s(&a, &all, s_rad, p).unwrap();
        prop_assert!(na.value <= local.value + tol);
        prop_assert!((na.witness_ratio(&a, p) - na.value).abs() <= tol * na.value.max(1.0));
    }

    #[test]
    fn sparsifications_verify(side in 10i64..120, m in 1u32..6, seed: u64) {
        use rand::{Rng, SeedableRng};
        let s = lattice(1, side, Norm::L1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mu: Vec<f64> = (0..s.len()).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0.0..2.0) } else { 0.0 }).collect();
        prop_assume!(mu.iter().sum::<f64>() > 0.0);
        let sp = sparsify(&s, &mu, m, 0.75).unwrap();
        prop_assert!(sp.verify(&s, 0.75));
    }

    #[test]
    fn partitions_normalise_and_commutators_are_bounded(side in 10i64..80, scale in 1u32..8, p in prop_oneof![Just(1.5f64), Just(2.0), Just(3.0)], seed: u64) {
        let s = lattice(1, side, Norm::L1);
        let part = make_partition(&s, scale, p).unwrap();
        for x in 0..s.len() {
            prop_assert!((part.power_sum(x) - 1.0).abs() < 1e-12);
        }
        let a = gen::random_band(s.clone(), 1, 1, seed);
        let locals: Vec<Option<BandOperator>> = (0..part.len()).map(|i| Some(gen::random_band(s.clone(), 1, 1, seed ^ i as u64))).collect();
        let m = locals.iter().flatten().map(|b| schur_bound(b, p).unwrap()).fold(0.0, f64::max);
        let t = weighted_sum(&part, &locals, SumMode::Commutator, Some(&a), m).unwrap();
        prop_assert!(schur_bound(&t.operator, p).unwrap() <= t.bound * (1.0 + 1e-9) + 1e-12);
        // The averaging map fixes diagonals.
        let d = BandOperator::diagonal(s.clone(), |x| C64::new(x as f64, 0.0));
        prop_assert!(average(&d, &part).unwrap().max_entry_diff(&d).unwrap() < 1e-9);
    }

    #[test]
    fn limit_operators_are_linear(seed: u64, prop in 0i64..3) {
        let s = lattice(1, 161, Norm::L1);
        let a = gen::stencil(s.clone(), &gen::random_stencil(1, prop, seed));
        let b = gen::stencil(s.clone(), &gen::random_stencil(1, 1, seed ^ 3));
        let dir = Direction::parse("20,20").unwrap();
        let r = 3;
        let wa = limit_operator(&a, &dir, r, 1e-9, 5).unwrap();
        let wb = limit_operator(&b, &dir, r, 1e-9, 5).unwrap();
        let ws = limit_operator(&a.add(&b).unwrap(), &dir, r, 1e-9, 5).unwrap();
        let sum = wa.operator.add(&wb.operator).unwrap();
        let diff = ws.operator.sub(&sum).unwrap().entry_sup();
        prop_assert!(diff <= 2e-9);
        prop_assert!(wa.propagation() <= a.propagation());
        prop_assert!(wa.norm <= norm2(&a).unwrap() + 1e-9);
    }
}
