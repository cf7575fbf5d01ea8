//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use limitop::fredholm::{parametrix, probe, ProbeConfig, Verdict};
use limitop::limit::{ghost_profile, limit_operator, Direction, LimitWindow};
use limitop::lower_norm::{localization_check, nu, nu_s};
use limitop::operator::{decompose, gen, norm2, schur_bound, three_color, BandOperator};
use limitop::partition::{average, make_partition, weighted_sum, SumMode};
use limitop::space::{Descriptor, Norm, Space};
use limitop::sparsify::BlockSparsifier;
use limitop::C64;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn lattice(lo: &[i64], hi: &[i64]) -> Arc<Space> {
    Arc::new(Space::build("w", Descriptor::Lattice { lo: lo.to_vec(), hi: hi.to_vec(), norm: Norm::L1 }).unwrap())
}

fn nat(max: i64) -> Arc<Space> {
    Arc::new(Space::build("n", Descriptor::NatWindow { max }).unwrap())
}

fn dir(s: &str) -> Direction {
    Direction::parse(s).unwrap()
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn random_space(rng: &mut ChaCha8Rng) -> Arc<Space> {
    let norm = [Norm::L1, Norm::L2, Norm::Linf][rng.gen_range(0..3)];
    let d = match rng.gen_range(0..4) {
        0 => Descriptor::NatWindow { max: rng.gen_range(0..400) },
        1 => {
            let lo = rng.gen_range(-50..50);
            Descriptor::Lattice { lo: vec![lo], hi: vec![lo + rng.gen_range(0..400)], norm }
        }
        2 => Descriptor::Lattice { lo: vec![0, 0], hi: vec![rng.gen_range(0..20), rng.gen_range(0..20)], norm },
        _ => Descriptor::Quadrant { max: rng.gen_range(0..20), norm },
    };
    Arc::new(Space::build("r", d).unwrap())
}

fn decomposition_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let s = random_space(&mut rng);
        let prop = rng.gen_range(0..=3);
        let k = rng.gen_range(1..=2);
        let density = rng.gen_range(0.1..=1.0);
        let a = gen::random_sparse_band(s.clone(), k, prop, density, i);
        let d = decompose(&a);
        if d.reconstruct(s.clone()) != a {
            return check(false, format!("operator {i} does not reconstruct"));
        }
        let growth = s.growth(prop);
        if d.len() > growth {
            return check(false, format!("operator {i}: {} summands > growth {growth}", d.len()));
        }
        worst = worst.max(d.len() as f64 / growth as f64);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("1000 exact, max summands/growth {worst:.3}, {secs:.1} s (limit 60 s)"))
}

fn bilateral_shift() -> Check {
    let a = gen::shift(nat(2000), 1);
    let w = limit_operator(&a, &dir("100,100"), 5, 1e-12, 5).unwrap();
    let off = w.template.offsets().unwrap();
    let mut exact = w.cauchy_tail == 0.0;
    for x in 0..w.template.len() {
        for y in 0..w.template.len() {
            let want = if off[x][0] - off[y][0] == 1 { re(1.0) } else { re(0.0) };
            exact &= w.operator.get(x, y) == want;
        }
    }
    let mut nus = Vec::new();
    for k in [5, 10, 20] {
        let w = limit_operator(&a, &dir("100,100"), k, 1e-12, 5).unwrap();
        let shifted = LimitWindow { operator: w.operator.shift_by(re(-1.0)), ..w.clone() };
        nus.push(shifted.window_nu(2.0).unwrap());
    }
    let decreasing = nus.windows(2).all(|p| p[1] <= p[0] + 1e-12) && nus[2] < nus[0];
    check(
        exact && decreasing,
        format!(
            "window equals bilateral stencil: {exact}, cauchy_tail {:e}; nu(W - 1) at k=5,10,20: {:.3e}, {:.3e}, {:.3e}",
            w.cauchy_tail, nus[0], nus[1], nus[2]
        ),
    )
}

fn limit_laws() -> Check {
    let tol = 1e-9;
    let s = lattice(&[0], &[240]);
    let d = dir("30,30");
    let r = 4;
    let (mut contraction, mut additive, mut multiplicative) = (0.0f64, 0.0f64, 0.0f64);
    let mut propagation_ok = true;
    for i in 0..100u64 {
        let pa = (i % 3) as i64;
        let pb = ((i / 3) % 3) as i64;
        let a = gen::stencil(s.clone(), &gen::random_stencil(1, pa, 2 * i));
        let b = gen::stencil(s.clone(), &gen::random_stencil(1, pb, 2 * i + 1));
        let wa = limit_operator(&a, &d, r, tol, 5).unwrap();
        let wb = limit_operator(&b, &d, r, tol, 5).unwrap();
        let ws = limit_operator(&a.add(&b).unwrap(), &d, r, tol, 5).unwrap();
        let wp = limit_operator(&a.compose(&b).unwrap(), &d, r, tol, 5).unwrap();
        contraction = contraction.max(wa.norm - norm2(&a).unwrap());
        propagation_ok &= wa.propagation() <= a.propagation() && wb.propagation() <= b.propagation();
        additive = additive.max(ws.operator.sub(&wa.operator.add(&wb.operator).unwrap()).unwrap().entry_sup());
        // Rows far enough inside that the truncated product is exact.
        let prod = wa.operator.compose(&wb.operator).unwrap();
        for x in wa.ball(r - a.propagation()) {
            for y in 0..wa.template.len() {
                multiplicative = multiplicative.max((wp.operator.get(x, y) - prod.get(x, y)).norm());
            }
        }
    }
    let pass = contraction <= tol && propagation_ok && additive <= 2.0 * tol && multiplicative <= 3.0 * tol;
    check(
        pass,
        format!(
            "100 pairs: norm excess {contraction:.2e} (<= {tol:e}), propagation ok {propagation_ok}, additivity {additive:.2e} (<= 2e-9), interior products {multiplicative:.2e} (<= 3e-9)"
        ),
    )
}

fn dense_operator(s: Arc<Space>, m: &nalgebra::DMatrix<C64>) -> BandOperator {
    let n = s.len();
    let mut trip = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            trip.push((x, y, m[(x, y)]));
        }
    }
    BandOperator::from_triplets(s, trip).unwrap()
}

fn lower_norm_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut inverse_gap, mut lipschitz_excess, mut local_excess) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..100u64 {
        let s = if i % 4 == 3 {
            let side = rng.gen_range(4..8);
            lattice(&[0, 0], &[side - 1, side - 1])
        } else {
            lattice(&[0], &[rng.gen_range(10..60)])
        };
        let all: Vec<usize> = (0..s.len()).collect();
        let a = gen::random_band(s.clone(), 1, 1, i).scale(re(0.5)).shift_by(re(4.0));
        let inv = a.to_dense().try_inverse().unwrap();
        let ninv = norm2(&dense_operator(s.clone(), &inv)).unwrap();
        let na = nu(&a, &all, 2.0).unwrap().value;
        inverse_gap = inverse_gap.max((na - 1.0 / ninv).abs());

        let p = [2.0, 1.5, 3.0][i as usize % 3];
        let tol = if p == 2.0 { 1e-9 } else { 1e-6 };
        let b = gen::random_band(s.clone(), 1, 1, i + 1000).scale(re(0.5)).shift_by(re(4.0));
        let (np_a, np_b) = (nu(&a, &all, p).unwrap().value, nu(&b, &all, p).unwrap().value);
        let lip = schur_bound(&a.sub(&b).unwrap(), p).unwrap();
        lipschitz_excess = lipschitz_excess.max((np_a - np_b).abs() - lip - tol);
        for sr in [0, 1, 2] {
            local_excess = local_excess.max(np_a - nu_s(&a, &all, sr, p).unwrap().value - tol);
        }
    }
    let pass = inverse_gap <= 1e-8 && lipschitz_excess <= 0.0 && local_excess <= 0.0;
    check(
        pass,
        format!(
            "max |nu - 1/|A^-1|| = {inverse_gap:.2e} (<= 1e-8); Lipschitz slack {:.2e}; nu - nu_s max {:.2e}",
            -lipschitz_excess, local_excess
        ),
    )
}

fn localization() -> Check {
    let start = Instant::now();
    let s = lattice(&[0], &[79]);
    let family: Vec<Vec<usize>> =
        (1..=60).flat_map(|len| (0..=s.len() - len).map(move |a| (a..a + len).collect())).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for seed in 0..3u64 {
        let a0 = gen::random_band(s.clone(), 1, 1, 500 + seed);
        let a = a0.scale(re(2.0 / schur_bound(&a0, 2.0).unwrap()));
        let rep = localization_check(&a, 0.1, &BlockSparsifier::default(), &family, 2.0, Some(2.0), seed == 0).unwrap();
        pass &= rep.verified;
        details.push(format!("s={} gap={:.1e}", rep.s, rep.worst_gap));
        if let Some(e) = rep.empirical_s {
            details.push(format!("smallest s meeting delta {e}"));
        }
        if seed == 0 {
            details.push(format!("{} sets", rep.sets_checked));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(pass && secs < 300.0, format!("{}; {secs:.1} s (limit 300 s)", details.join("; ")))
}

fn partitions() -> Check {
    let mut norm_err = 0.0f64;
    for (s, p) in [
        (lattice(&[-60], &[60]), 2.0),
        (lattice(&[-15, -15], &[15, 15]), 1.5),
        (nat(200), 3.0),
        (Arc::new(Space::build("q", Descriptor::Quadrant { max: 25, norm: Norm::Linf }).unwrap()), 2.0),
    ] {
        for scale in [1, 3, 7] {
            let part = make_partition(&s, scale, p).unwrap();
            for x in 0..s.len() {
                norm_err = norm_err.max((part.power_sum(x) - 1.0).abs());
            }
        }
    }
    let s = lattice(&[-200], &[200]);
    let a = gen::tridiagonal(s.clone(), re(3.0), re(-1.0));
    let diffs: Vec<f64> = [5, 10, 20, 40]
        .iter()
        .map(|&l| norm2(&average(&a, &make_partition(&s, l, 2.0).unwrap()).unwrap().sub(&a).unwrap()).unwrap())
        .collect();
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio = 0.0f64;
    for i in 0..200u64 {
        let p = [1.5, 2.0, 3.0][i as usize % 3];
        let s = lattice(&[0], &[rng.gen_range(20..90)]);
        let part = make_partition(&s, rng.gen_range(2..9), p).unwrap();
        let a = gen::random_band(s.clone(), 1, rng.gen_range(0..3), i);
        let locals: Vec<Option<BandOperator>> =
            (0..part.len()).map(|j| Some(gen::random_band(s.clone(), 1, 1, i * 1000 + j as u64))).collect();
        let m = locals.iter().flatten().map(|b| schur_bound(b, p).unwrap()).fold(0.0, f64::max);
        let t = weighted_sum(&part, &locals, SumMode::Commutator, Some(&a), m).unwrap();
        worst_ratio = worst_ratio.max(schur_bound(&t.operator, p).unwrap() / t.bound);
    }
    let pass = norm_err <= 1e-12 && decreasing && worst_ratio <= 1.0 + 1e-9;
    check(
        pass,
        format!(
            "normalization error {norm_err:.1e}; |M_L(A) - A| at L=5,10,20,40: {:.3e}, {:.3e}, {:.3e}, {:.3e}; commutator norm/bound max {worst_ratio:.3} over 200",
            diffs[0], diffs[1], diffs[2], diffs[3]
        ),
    )
}

fn parametrix_and_probe() -> Check {
    let s = lattice(&[-100], &[100]);
    let a = gen::tridiagonal(s.clone(), re(3.0), re(-1.0));
    let part = make_partition(&s, 10, 2.0).unwrap();
    let rep = parametrix(&a, &part, 1.2, 30).unwrap().report;
    let first = rep.norm <= 2.4 && rep.residual <= 1e-3;

    let b = gen::shift(nat(400), 1).shift_by(re(-1.0));
    let cfg = ProbeConfig { radius: 40, ..ProbeConfig::default() };
    let v = probe(&b, &[dir("100,50"), dir("110,40")], &cfg).unwrap();
    let witness = v.witness.as_ref().map_or(f64::INFINITY, |w| w.value);
    let second = v.verdict == Verdict::NotFredholm && witness <= 1e-3;
    check(
        first && second,
        format!(
            "|B| = {:.4} (<= 2.4), residual {:.2e} (<= 1e-3); shift - 1: {} with witness {:.2e} (<= 1e-3)",
            rep.norm,
            rep.residual,
            v.verdict.as_str(),
            witness
        ),
    )
}

fn ghosts() -> Check {
    let s = nat(300);
    let g = gen::ghost(s.clone());
    let radii: Vec<u32> = (0..=60).collect();
    let profile = ghost_profile(&g, &radii);
    let decay = profile.iter().all(|p| p.sup <= 2f64.powi(1 - p.radius as i32));
    let tail = profile.last().unwrap().sup;
    let mut window_sup = 0.0f64;
    for d in ["100,40", "120,30", "150,25"] {
        window_sup = window_sup.max(limit_operator(&g, &dir(d), 4, 1e-9, 5).unwrap().operator.entry_sup());
    }
    let id = BandOperator::identity(s.clone(), 1);
    let flat = ghost_profile(&id, &radii).iter().all(|p| p.sup == 1.0);
    let mut identity_windows = true;
    for d in ["100,40", "120,30"] {
        let w = limit_operator(&id, &dir(d), 4, 1e-9, 5).unwrap();
        identity_windows &= w.operator == BandOperator::identity(w.operator.space().clone(), 1);
    }
    check(
        decay && window_sup <= tail && flat && identity_windows,
        format!(
            "profile(k) <= 2^(1-k) for k <= 60: {decay}; window entries {window_sup:.2e} <= tail {tail:.2e}; identity profile 1: {flat}, windows identity: {identity_windows}"
        ),
    )
}

fn three_colouring() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..500 {
        let n = rng.gen_range(2..300);
        let b: Vec<u64> = (0..n).collect();
        let mut t = b.clone();
        while t.iter().zip(&b).any(|(x, y)| x == y) {
            t.shuffle(&mut rng);
        }
        let c = three_color(&b, &b, &t).unwrap();
        if !c.verify(&b, &b, &t) {
            return check(false, format!("derangement {i} fails verification"));
        }
    }
    let b = [0u64, 1, 2];
    let t = [1u64, 2, 0];
    let c = three_color(&b, &b, &t).unwrap();
    let all_used = c.classes.iter().all(|k| !k.is_empty());
    check(c.verify(&b, &b, &t) && all_used, format!("500 derangements verify; 3-cycle uses all three classes: {all_used}"))
}

fn determinism() -> Check {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut names: Vec<_> = std::fs::read_dir(&root).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for path in &names {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let command = v["command"].as_str().unwrap();
        let run = |threads: &str| {
            Command::new(env!("CARGO_BIN_EXE_limitop"))
                .args([command, "--threads", threads, "--config"])
                .arg(path)
                .output()
                .unwrap()
                .stdout
        };
        if run("1") != run("4") {
            return check(false, format!("{} differs between 1 and 4 threads", path.display()));
        }
    }
    check(true, format!("{} fixtures byte-identical at 1 and 4 threads", names.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("C1 decomposition round-trip", decomposition_round_trip),
        ("C2 bilateral shift limit", bilateral_shift),
        ("C3 limit operator laws", limit_laws),
        ("C4 lower norm identities", lower_norm_identities),
        ("C5 localization", localization),
        ("C6 partition machinery", partitions),
        ("C7 parametrix and probe", parametrix_and_probe),
        ("C8 ghost coherence", ghosts),
        ("C9 three-colouring", three_colouring),
        ("C10 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let c = f();
        println!("[{}] {name}: {}", if c.pass { "PASS" } else { "FAIL" }, c.detail);
        failed += usize::from(!c.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
