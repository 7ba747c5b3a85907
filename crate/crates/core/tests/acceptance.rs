//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weyl_census::census::io::{write_census_csv, write_ratio_csv};
use weyl_census::census::{
    benoist_gap, build_census, build_census_with, count_orbit, estimate_delta, growth_report, limit_cone,
    theorem_report, theorem_report_with, CensusOptions, CensusTable, DirectionalCounter, FlagBall, ReportOptions,
};
use weyl_census::freegroup::{cyclic_reduce, enumerate_words, rotation_count, rotations, Letter, Word};
use weyl_census::schottky::{load_system, presets, SchottkySystem};
use weyl_census::symspace::{cartan_projection_with_inverse, jordan_projection_with_inverse, WeylVector};
use weyl_census::Execution;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

fn system(name: &str) -> SchottkySystem {
    load_system(&presets::get(name).unwrap())
        .unwrap()
        .into_validated()
        .unwrap()
}

fn c1_word_counts() -> Outcome {
    let mut worst = String::new();
    let mut ok = true;
    for l in 1..=3usize {
        for max_len in 0..=8usize {
            let mut expected: u64 = 1;
            let mut shell: u64 = 2 * l as u64;
            for _ in 1..=max_len {
                expected += shell;
                shell *= 2 * l as u64 - 1;
            }
            let found = enumerate_words(l, max_len).count() as u64;
            if found != expected {
                ok = false;
                worst = format!("l={l} L={max_len}: {found} != {expected}");
            }
        }
    }
    outcome(ok, if ok { "l in 1..=3, L <= 8 all match".into() } else { worst })
}

fn random_word(rng: &mut ChaCha8Rng, l: usize, max_len: usize) -> Word {
    let n = rng.random_range(1..=max_len);
    let mut letters: Vec<Letter> = Vec::with_capacity(n);
    while letters.len() < n {
        let x = Letter::from_code(rng.random_range(0..2 * l));
        if letters.last().is_some_and(|&p| p == x.inverse()) {
            continue;
        }
        letters.push(x);
    }
    Word::from_reduced(&letters).unwrap()
}

fn jordan(sys: &SchottkySystem, w: &Word) -> WeylVector {
    let e = sys.element(w).unwrap();
    jordan_projection_with_inverse(&e.matrix, &e.inverse).unwrap()
}

fn cartan(sys: &SchottkySystem, w: &Word) -> WeylVector {
    let e = sys.element(w).unwrap();
    cartan_projection_with_inverse(&e.matrix, &e.inverse).unwrap()
}

fn c2_invariants() -> Outcome {
    let mut violations: BTreeMap<&str, usize> = BTreeMap::new();
    for name in presets::NAMES {
        let sys = system(name);
        let l = sys.generator_count();
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_5500);
        for _ in 0..500 {
            let w = random_word(&mut rng, l, 8);
            let v = random_word(&mut rng, l, 8);
            let (core, _) = cyclic_reduce(&w);
            let lw = jordan(&sys, &core);
            let mut bad = |key, cond: bool| {
                if !cond {
                    *violations.entry(key).or_insert(0) += 1;
                }
            };

            // conjugation: every rotation of the core, and the original word
            for r in rotations(&core).unwrap() {
                bad("conjugation", jordan(&sys, &r).distance(&lw) <= 1e-7);
            }
            if w.is_very_reduced() {
                bad("conjugation", jordan(&sys, &w).distance(&lw) <= 1e-7);
            }
            for k in 2..=3usize {
                let lk = jordan(&sys, &core.pow(k));
                bad("power", lk.distance(&lw.scaled(k as f64)) <= 1e-7 * k as f64);
            }

            let h = cartan(&sys, &w);
            bad("length_le_distance", lw.norm() <= h.norm() + 1e-9);
            let sorted = h.coords().windows(2).all(|p| p[0] >= p[1]);
            bad("chamber", sorted && h.sum().abs() <= 1e-9 * (1.0 + h.norm()));

            let hv = cartan(&sys, &v);
            let hwv = cartan(&sys, &w.concat(&v));
            bad("triangle", hwv.norm() <= h.norm() + hv.norm() + 1e-9);
        }
    }
    let total: usize = violations.values().sum();
    let summary = if total == 0 {
        "500 words per demo, zero violations".into()
    } else {
        format!("violations {violations:?}")
    };
    outcome(total == 0, summary)
}

fn c3_lemma(sl2_12: &CensusTable) -> Outcome {
    let d = sl2_12.max_displacement();
    let mut violations = 0usize;
    let mut primitive_violations = 0usize;
    let mut example = None;
    for r in sl2_12.records().iter().filter(|r| !r.word.is_empty()) {
        let (core, _) = cyclic_reduce(&r.word);
        let n = rotation_count(&core).unwrap() as f64;
        if n < r.length / d - 2.0 {
            violations += 1;
            if r.primitive {
                primitive_violations += 1;
            }
            if example.is_none() {
                example = Some(format!(
                    "{} has {} rotation(s), l/d - 2 = {:.3}",
                    r.word.to_text(2),
                    n,
                    r.length / d - 2.0
                ));
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} words, {violations} violations ({primitive_violations} among primitive words){}",
            sl2_12.len() - 1,
            example.map(|e| format!("; e.g. {e}")).unwrap_or_default()
        ),
    )
}

fn c4_benoist(sl2_12: &CensusTable, sl3_12: &CensusTable) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, t) in [("sl2", sl2_12), ("sl3", sl3_12)] {
        let g = benoist_gap(t);
        let (m6, m12) = (g.per_length[6], g.per_length[12]);
        ok &= m12 < 1.25 * m6;
        parts.push(format!(
            "{name} max gap k=6 {m6:.6} k=12 {m12:.6} (+{:.2}%), per length {:?}",
            100.0 * (m12 / m6 - 1.0),
            g.per_length.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c5_orbit_growth(sl2: &CensusTable) -> Outcome {
    let h = sl2.horizon_r();
    let lo = estimate_delta(sl2, (0.4 * h, 0.7 * h), 24).unwrap();
    let hi = estimate_delta(sl2, (0.7 * h, h), 24).unwrap();
    let rel = (lo.delta_hat - hi.delta_hat).abs() / lo.delta_hat.max(hi.delta_hat);
    let full = estimate_delta(sl2, (0.4 * h, h), 24).unwrap();
    let report = theorem_report_with(sl2, full.delta_hat, (0.4 * h, h), (0.4 * sl2.horizon_t(), sl2.horizon_t()), 32)
        .unwrap();
    let (min, max) = report.orbit_ratio_range;
    outcome(
        rel <= 0.15 && max / min <= 10.0,
        format!(
            "delta [0.4H,0.7H] {:.4}, [0.7H,H] {:.4} (rel diff {:.1}%); N(R)e^(-dR) in [{min:.3}, {max:.3}], band x{:.2}",
            lo.delta_hat,
            hi.delta_hat,
            100.0 * rel,
            max / min
        ),
    )
}

fn c6_main_theorem(sl2: &CensusTable, sl3: &CensusTable) -> Outcome {
    let h2 = sl2.horizon_r();
    let d2 = estimate_delta(sl2, (0.5 * h2, h2), 24).unwrap().delta_hat;
    let r2 = theorem_report(sl2, d2).unwrap();
    let slope_rel = (r2.primitive_slope - d2).abs() / d2;
    let (u_min, u_max) = r2.upper_ratio_range;
    let sl2_ok = slope_rel <= 0.15 && u_max / u_min <= 10.0;

    let h3 = sl3.horizon_r();
    let d3 = estimate_delta(sl3, (0.5 * h3, h3), 24).unwrap().delta_hat;
    let r3 = theorem_report(sl3, d3).unwrap();
    let first = r3.class_rows.iter().find(|r| r.count > 0).unwrap();
    let (lower_min, _) = r3.lower_ratio_range;
    let (_, upper_max) = r3.upper_ratio_range;
    let sl3_ok = lower_min >= 0.1 * first.ratio_lower && upper_max <= 10.0 * first.ratio_upper;
    outcome(
        sl2_ok && sl3_ok,
        format!(
            "sl2 L={}: slope {:.4} vs delta {:.4} ({:.1}%), P t e^(-dt) band x{:.2}; \
             sl3 L={}: min P t^2 e^(-dt) {:.3} (start {:.3}), max P t e^(-dt) {:.3} (start {:.3})",
            sl2.max_word_length(),
            r2.primitive_slope,
            d2,
            100.0 * slope_rel,
            u_max / u_min,
            sl3.max_word_length(),
            lower_min,
            first.ratio_lower,
            upper_max,
            first.ratio_upper
        ),
    )
}

fn c7_directional(sl2: &CensusTable, sys: &SchottkySystem) -> Outcome {
    let a = Letter::new(0, false);
    let ball_a = FlagBall::new(sys.fixed_flag(a).unwrap().clone(), 0.2);
    let ball_b = FlagBall::new(sys.fixed_flag(a.inverse()).unwrap().clone(), 0.2);
    let counter = DirectionalCounter::new(sl2, &ball_a, &ball_b);
    let h = sl2.horizon_r();
    let mut worst = f64::INFINITY;
    for k in 0..16 {
        let r = 0.7 * h + 0.3 * h * k as f64 / 15.0;
        let n = count_orbit(sl2, r).value;
        let frac = counter.count(r).count as f64 / n as f64;
        worst = worst.min(frac);
    }
    outcome(
        worst >= 0.01,
        format!("min N(R;A,B)/N(R) over R in [0.7H, H]: {worst:.4}"),
    )
}

fn c8_cone(sl3: &CensusTable) -> Outcome {
    let cone = limit_cone(sl3, 6).unwrap();
    let at = |k: usize| cone.per_length_min_wall_gap.iter().find(|p| p.0 == k).unwrap().1;
    let (g6, g10) = (at(6), at(10));
    outcome(
        cone.min_wall_gap > 0.0 && g10 >= 0.5 * g6,
        format!(
            "{} directions, min wall gap {:.4} (k=6 {g6:.4}, k=10 {g10:.4}), alpha_hat {:.4}",
            cone.sample_count, cone.min_wall_gap, cone.alpha_hat
        ),
    )
}

/// Primitive cyclic words over `{a, A, b, B}` up to rotation and inversion,
/// by brute force over all letter strings.
fn necklace_oracle(n: usize) -> usize {
    let inv = |x: u8| x ^ 1;
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    for code in 0..4usize.pow(n as u32) {
        let w: Vec<u8> = (0..n).map(|i| ((code >> (2 * i)) & 3) as u8).collect();
        if (0..n).any(|i| w[(i + 1) % n] == inv(w[i])) {
            continue;
        }
        if (1..n).any(|p| n % p == 0 && (0..n).all(|i| w[i] == w[(i + p) % n])) {
            continue;
        }
        let inverse: Vec<u8> = w.iter().rev().map(|&x| inv(x)).collect();
        let key = (0..n)
            .flat_map(|j| {
                let a: Vec<u8> = w[j..].iter().chain(&w[..j]).copied().collect();
                let b: Vec<u8> = inverse[j..].iter().chain(&inverse[..j]).copied().collect();
                [a, b]
            })
            .min()
            .unwrap();
        seen.insert(key);
    }
    seen.len()
}

fn c9_necklaces(sl2: &CensusTable) -> Outcome {
    let t = sl2.truncated(6).unwrap();
    let mut by_len = [0usize; 7];
    for c in t.classes() {
        by_len[c.key.len()] += 1;
    }
    let oracle: Vec<usize> = (0..=6).map(|n| if n == 0 { 0 } else { necklace_oracle(n) }).collect();
    outcome(
        by_len.to_vec() == oracle,
        format!("census {:?} oracle {:?}", &by_len[1..], &oracle[1..]),
    )
}

fn run_outputs(name: &str, mode: Execution, threads: usize) -> Vec<u8> {
    let sys = system(name);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let t = build_census_with(
            &sys,
            8,
            &CensusOptions {
                execution: mode,
                ..Default::default()
            },
        )
        .unwrap();
        let mut out = Vec::new();
        write_census_csv(&t, &mut out).unwrap();
        let report = growth_report(&t, &ReportOptions::default()).unwrap();
        out.extend(serde_json::to_vec_pretty(&report).unwrap());
        write_ratio_csv(&report.theorem.orbit_rows, &mut out).unwrap();
        write_ratio_csv(&report.theorem.class_rows, &mut out).unwrap();
        out
    })
}

fn c10_determinism() -> Outcome {
    let mut ok = true;
    let mut sizes = Vec::new();
    for name in presets::NAMES {
        let reference = run_outputs(name, Execution::Sequential, 1);
        for (mode, threads) in [(Execution::Parallel, 1), (Execution::Parallel, 4), (Execution::Parallel, 4)] {
            ok &= run_outputs(name, mode, threads) == reference;
        }
        sizes.push(format!("{name} {} bytes", reference.len()));
    }
    outcome(
        ok,
        format!("sequential vs 1 and 4 threads, repeated: {}", sizes.join(", ")),
    )
}

fn main() {
    let started = Instant::now();
    let sl2_sys = system("sl2-demo");
    let sl3_sys = system("sl3-demo");
    let sl2_13 = build_census(&sl2_sys, 13).unwrap();
    let sl2_12 = sl2_13.truncated(12).unwrap();
    let sl3_12 = build_census(&sl3_sys, 12).unwrap();
    let sl3_10 = sl3_12.truncated(10).unwrap();
    eprintln!("tables built in {:.1?}", started.elapsed());

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("exact word counts", Box::new(c1_word_counts)),
        ("algebraic invariants", Box::new(c2_invariants)),
        ("conjugate count lower bound", Box::new(|| c3_lemma(&sl2_12))),
        ("Benoist gap plateau", Box::new(|| c4_benoist(&sl2_12, &sl3_12))),
        ("orbit growth", Box::new(|| c5_orbit_growth(&sl2_13))),
        ("primitive class growth", Box::new(|| c6_main_theorem(&sl2_13, &sl3_10))),
        ("directional counting", Box::new(|| c7_directional(&sl2_13, &sl2_sys))),
        ("limit cone regularity", Box::new(|| c8_cone(&sl3_10))),
        ("necklace oracle", Box::new(|| c9_necklaces(&sl2_12))),
        ("determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {} ({:.1?})",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.summary,
            t.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
