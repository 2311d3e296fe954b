//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs with `cargo test -p qisg --test acceptance`.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use qisg::analysis::{lp_block_norm, lq_norm, sobolev_norm_fourier};
use qisg::bspline::CardinalSpline;
use qisg::dyadic::{point_to_f64, Coord, GridPoint};
use qisg::experiment::{
    cardinality_table, run_benchmark, run_witness, BenchConfig, Fixture, WitnessConfig, WitnessKind,
};
use qisg::laurent::{binomial_rational, rational, rational_to_f64, LaurentPoly, ShiftOperator};
use qisg::quasi_interp::{detail_coeff, detail_coeff_oracle};
use qisg::smolyak::{count_points, SmolyakIndexSet};
use qisg::testfuncs::{mixed_smooth, random_mixed_smooth, witness_g1, Phases};
use qisg::QIScheme;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cubic() -> QIScheme {
    QIScheme::builtin("cubic").unwrap()
}

fn faber() -> QIScheme {
    QIScheme::builtin("faber").unwrap()
}

fn symbols_exact() -> Outcome {
    let r = |n, d| rational(n, d);
    let f = faber();
    let c = cubic();
    let (fs, cs) = (f.symbols(), c.symbols());
    let even = LaurentPoly::from_ints(-2, &[1, 4, 8, 4, 1]).scale(&r(1, 48));
    let odd = LaurentPoly::from_ints(0, &[1, 4, 1]).scale(&r(1, 12));
    let checks = [
        ("faber P*_even = -1/2", fs.p_even_star == LaurentPoly::monomial(r(-1, 2), 0)),
        ("faber P*_odd = 0", fs.p_odd_star.is_zero()),
        ("cubic P*_even", cs.p_even_star == even),
        ("cubic P*_odd", cs.p_odd_star == odd),
        ("‖P*_even‖ = 3/8", cs.p_even_star.coeff_abs_sum() == r(3, 8)),
        ("‖P*_odd‖ = 1/2", cs.p_odd_star.coeff_abs_sum() == r(1, 2)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    outcome(
        failed.is_empty(),
        format!("P*_even = {}, P*_odd = {}; mismatches: {failed:?}", cs.p_even_star, cs.p_odd_star),
    )
}

fn formula_vs_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for scheme in [faber(), cubic()] {
        for d in 1..=2 {
            for seed in 0..10 {
                let f = random_mixed_smooth(1.5, 12, d, 100 + seed).unwrap();
                // both sides read the same lattice points many times over
                let cache: RefCell<HashMap<Vec<u64>, f64>> = RefCell::default();
                let g = |x: &[f64]| {
                    let key: Vec<u64> = x.iter().map(|t| t.to_bits()).collect();
                    *cache.borrow_mut().entry(key).or_insert_with(|| f.eval(x))
                };
                let scale = lq_norm(g, f64::INFINITY, d, 64).unwrap().value;
                for k in SmolyakIndexSet::new(d, 4).iter() {
                    let shape = k.shape(scheme.ell());
                    let total: usize = shape.iter().product();
                    let mut s = vec![0; d];
                    for flat in 0..total {
                        let mut rem = flat;
                        for axis in (0..d).rev() {
                            s[axis] = rem % shape[axis];
                            rem /= shape[axis];
                        }
                        let a = detail_coeff(&scheme, k.levels(), &s, g).unwrap();
                        let b = detail_coeff_oracle(&scheme, k.levels(), &s, g).unwrap();
                        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(scale));
                        count += 1;
                    }
                }
            }
        }
    }
    outcome(worst < 1e-11, format!("{count} coefficients, max relative deviation {worst:.2e} (tol 1e-11)"))
}

fn structural() -> Outcome {
    let mut pou: f64 = 0.0;
    let mut refine: f64 = 0.0;
    for ell in [2u32, 4, 6] {
        let spline = CardinalSpline::new(ell).unwrap();
        for k in 0..=6 {
            for i in 0..997 {
                let x = (i as f64 + 0.31) / 997.0;
                let mut sum = 0.0;
                spline.for_each_active(k, x, |_, v| sum += v);
                pou = pou.max((sum - 1.0).abs());
            }
        }
        let binom: Vec<f64> = (0..=ell).map(|j| rational_to_f64(&binomial_rational(ell, j))).collect();
        for i in 0..10_000 {
            let x = -0.5 + (ell as f64 + 1.0) * i as f64 / 10_000.0;
            let fine: f64 = (0..=ell).map(|j| binom[j as usize] * spline.eval(2.0 * x - j as f64)).sum();
            refine = refine.max((spline.eval(x) - 2f64.powi(1 - ell as i32) * fine).abs());
        }
    }
    let repro = [faber(), cubic()].iter().map(|s| s.reproduction_residual()).fold(0.0, f64::max);
    let mut annihilate: f64 = 0.0;
    for ell in [2u32, 4, 6] {
        let op = ShiftOperator::new(&LaurentPoly::z_minus_one_pow(ell));
        for j in 0..ell as i32 {
            for i in 0..50 {
                let x = -1.0 + i as f64 / 25.0;
                let h = 0.01 + 0.002 * i as f64;
                let scale = (0..=ell).map(|t| (x + t as f64 * h).abs().powi(j)).fold(1.0, f64::max);
                annihilate = annihilate.max(op.apply(h, |t| t.powi(j), x).abs() / scale);
            }
        }
    }
    let pass = pou < 1e-12 && refine < 1e-13 && repro < 1e-10 && annihilate < 1e-12;
    outcome(
        pass,
        format!(
            "partition of unity {pou:.1e} (<1e-12), refinement {refine:.1e} (<1e-13), \
             reproduction {repro:.1e} (<1e-10), Δ^ℓ annihilation {annihilate:.1e} (<1e-12)"
        ),
    )
}

fn rate_line(label: &str, rep: &qisg::experiment::BenchReport) -> String {
    format!("{label}: rho {:.3}, beta {:.3}, residual {:.3}", rep.fit.rho, rep.fit.beta, rep.fit.residual)
}

fn rates_p_ge_q() -> Outcome {
    let scheme = cubic();
    let one = run_benchmark(&scheme, &BenchConfig::new(1, 1.25, 2.0, 2.0, 3, 9)).unwrap();
    let two = run_benchmark(&scheme, &BenchConfig::new(2, 1.25, 2.0, 2.0, 3, 7)).unwrap();
    let pass = (1.0..=1.5).contains(&one.fit.rho) && (two.fit.rho - 1.25).abs() <= 0.3 && two.fit.beta > 0.0;
    outcome(pass, format!("{}; {}", rate_line("d=1 [1.0,1.5]", &one), rate_line("d=2 ±0.3, beta>0", &two)))
}

fn rates_p_lt_q() -> Outcome {
    let scheme = cubic();
    let target = 1.25 - 0.5 + 0.25;
    let one = run_benchmark(&scheme, &BenchConfig::new(1, 1.25, 2.0, 4.0, 3, 9)).unwrap();
    let two = run_benchmark(&scheme, &BenchConfig::new(2, 1.25, 2.0, 4.0, 3, 7)).unwrap();
    let pass = (one.fit.rho - target).abs() <= 0.3 && (two.fit.rho - target).abs() <= 0.3;
    outcome(pass, format!("target {target}: {}; {}", rate_line("d=1", &one), rate_line("d=2", &two)))
}

fn witnesses() -> Outcome {
    let mut grid_max: f64 = 0.0;
    for scheme in [faber(), cubic()] {
        for m in 2..=5 {
            let g1 = witness_g1(&scheme, 2, m, 1.25).unwrap();
            for p in qisg::enumerate_grid(2, m, &scheme).points() {
                grid_max = grid_max.max(g1.eval(&point_to_f64(p)).abs());
            }
        }
    }
    let g1_cfg = WitnessConfig { kind: WitnessKind::G1, d: 2, m_lo: 2, m_hi: 8, r: 1.25, p: 2.0, q: 2.0, oversample: 4 };
    let g1 = run_witness(&faber(), &g1_cfg).unwrap();
    let fit = g1.fit.clone().unwrap();
    let g2_cfg = WitnessConfig { kind: WitnessKind::G2, d: 2, m_lo: 1, m_hi: 8, r: 1.25, p: 2.0, q: 4.0, oversample: 4 };
    let g2 = run_witness(&cubic(), &g2_cfg).unwrap();
    let worst_step = g2
        .rows
        .iter()
        .filter_map(|r| r.step_ratio)
        .map(|s| (s / g2.expected_step_ratio - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = grid_max < 1e-12 && fit.residual < 0.15 && worst_step < 0.1;
    outcome(
        pass,
        format!(
            "g1 grid max {grid_max:.1e} (<1e-12); ‖g1‖_2 fit rho {:.3}, beta {:.3}, residual {:.3} (<0.15); \
             g2 step ratio off by {:.2}% (<10%)",
            fit.rho,
            fit.beta,
            fit.residual,
            100.0 * worst_step
        ),
    )
}

fn norm_equivalence() -> Outcome {
    let scheme = cubic();
    let (r, p) = (1.25, 2.0);
    let mut ratios = Vec::new();
    for i in 0..20u64 {
        let d = 1 + (i % 2) as usize;
        let k_max = [4u64, 8, 12, 16][(i / 2 % 4) as usize];
        let smooth = 0.5 + 0.25 * (i % 5) as f64;
        let f = mixed_smooth(smooth, k_max, d, Phases::Random(1000 + i)).unwrap();
        let m = if d == 1 { 8 } else { 6 };
        let lp = lp_block_norm(|x| f.eval(x), &scheme, d, r, p, m, 4 << m).unwrap();
        ratios.push(lp / sobolev_norm_fourier(f.modes(), r));
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(hi / lo < 20.0, format!("ratio in [{lo:.3}, {hi:.3}], spread {:.2} (<20)", hi / lo))
}

fn brute_force_count(d: usize, m: u32, scheme: &QIScheme) -> usize {
    let mut pts: HashSet<GridPoint> = HashSet::new();
    for k in SmolyakIndexSet::new(d, m).iter() {
        let shape = k.shape(scheme.ell());
        let total: usize = shape.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut s = vec![0; d];
            for axis in (0..d).rev() {
                s[axis] = rem % shape[axis];
                rem /= shape[axis];
            }
            let offs: Vec<Vec<i64>> = (0..d).map(|i| scheme.read_offsets(k.levels()[i], s[i])).collect();
            let combos: usize = offs.iter().map(|o| o.len()).product();
            for c in 0..combos {
                let mut rem = c;
                let mut p = vec![Coord::ZERO; d];
                for i in (0..d).rev() {
                    let e = offs[i][rem % offs[i].len()];
                    rem /= offs[i].len();
                    p[i] = Coord::on_level(scheme.ell(), k.levels()[i], s[i] as i64 + e);
                }
                pts.insert(p);
            }
        }
    }
    pts.len()
}

fn cardinality() -> Outcome {
    let mut mismatches = Vec::new();
    for scheme in [faber(), cubic()] {
        for d in 1..=3 {
            for m in 0..=6 {
                let n = count_points(d, m, &scheme);
                let brute = brute_force_count(d, m, &scheme) as u64;
                if n != brute {
                    mismatches.push(format!("{} d={d} m={m}: {n} vs {brute}", scheme.name()));
                }
            }
        }
    }
    let mut spreads = Vec::new();
    for scheme in [faber(), cubic()] {
        let table = cardinality_table(&scheme, 2, 4, 12);
        let lo = table.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let hi = table.iter().map(|r| r.ratio).fold(0.0, f64::max);
        spreads.push((scheme.name().to_string(), lo, hi));
    }
    let bounded = spreads.iter().all(|(_, lo, hi)| hi / lo < 2.0);
    let desc: Vec<String> =
        spreads.iter().map(|(n, lo, hi)| format!("{n} n/(2^m m) in [{lo:.3}, {hi:.3}]")).collect();
    outcome(
        mismatches.is_empty() && bounded,
        format!("exact counts d≤3 m≤6, mismatches {mismatches:?}; d=2 m=4..12: {} (max/min < 2)", desc.join(", ")),
    )
}

fn sup_norm_rate() -> Outcome {
    let rep = run_benchmark(&cubic(), &BenchConfig::new(2, 1.25, 2.0, f64::INFINITY, 3, 7)).unwrap();
    assert_eq!(rep.fixture, Fixture::Coherent);
    let target = 1.25 - 0.5;
    let pass = (rep.fit.rho - target).abs() <= 0.3;
    outcome(pass, format!("target {target} ± 0.3: {}", rate_line("d=2 q=∞", &rep)))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact symbolic reproduction", Duration::from_secs(1), symbols_exact),
        ("formula/oracle equivalence", Duration::from_secs(30), formula_vs_oracle),
        ("structural invariants", Duration::from_secs(10), structural),
        ("rate reproduction p ≥ q", Duration::from_secs(300), rates_p_ge_q),
        ("rate reproduction p < q", Duration::from_secs(300), rates_p_lt_q),
        ("witness checks", Duration::from_secs(120), witnesses),
        ("norm equivalence sweep", Duration::from_secs(180), norm_equivalence),
        ("grid cardinality", Duration::from_secs(60), cardinality),
        ("sup-norm rate", Duration::from_secs(300), sup_norm_rate),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.2}s / {}s] {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
