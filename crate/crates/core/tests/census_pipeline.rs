use weyl_census::census::{
    benoist_gap, build_census, class_multiplicity, cone_statistics, count_directional, count_orbit,
    count_primitive_classes, estimate_delta, fit_exponential_rate, growth_report, limit_cone, CensusTable, FlagBall,
    ReportOptions,
};
use weyl_census::freegroup::{cyclic_reduce, rotation_count, rotations, word_count, Letter, Word};
use weyl_census::schottky::{load_system, presets, SchottkySystem, SystemConfig};
use weyl_census::symspace::{Flag, SquareMatrix};
use weyl_census::Error;

fn sl2() -> SchottkySystem {
    load_system(&presets::sl2_demo()).unwrap().into_validated().unwrap()
}

fn sl2_table(len: usize) -> CensusTable {
    build_census(&sl2(), len).unwrap()
}

fn single_generator_sl3() -> SchottkySystem {
    // a non-normal conjugate of diag(4, 1, 1/4)
    let k = SquareMatrix::from_row_major(3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.3, 0.0, 0.0, 1.0], 1e-9).unwrap();
    let g = k.mul(&SquareMatrix::diagonal(&[4.0, 1.0, 0.25])).mul(&k.inverse().unwrap());
    let cfg = SystemConfig {
        dimension: 3,
        generators: vec![g.to_row_major()],
        power: Some(2),
        ball_radius: None,
        sample_count: Some(200),
        seed: None,
        tolerances: None,
    };
    load_system(&cfg).unwrap().into_validated().unwrap()
}

#[test]
fn orbit_count_examples() {
    let t = sl2_table(3);
    assert_eq!(count_orbit(&t, 0.0).value, 0);
    assert_eq!(count_orbit(&t, 1e-6).value, 1);
    let all = count_orbit(&t, f64::INFINITY);
    assert_eq!(all.value, 53);
    assert!(!all.complete);
    assert!(count_orbit(&t, t.horizon_r()).complete);
}

#[test]
fn counts_are_monotone() {
    let t = sl2_table(6);
    let mut last = (0, 0);
    for k in 0..200 {
        let x = k as f64 * 0.15;
        let now = (count_orbit(&t, x).value, count_primitive_classes(&t, x).value);
        assert!(now.0 >= last.0 && now.1 >= last.1);
        last = now;
    }
}

#[test]
fn primitive_class_examples() {
    let t = sl2_table(4);
    assert_eq!(count_primitive_classes(&t, 0.0).value, 0);
    let ab = Word::parse("a b", 2).unwrap();
    let i = t.index_of(&ab).unwrap();
    let j = t.index_of(&ab.inverse()).unwrap();
    assert_eq!(t.records()[i].class, t.records()[j].class);
    // a^2 belongs to the class of a
    let a2 = t.index_of(&Word::parse("a a", 2).unwrap()).unwrap();
    let a = t.index_of(&Word::parse("a", 2).unwrap()).unwrap();
    assert_eq!(t.records()[a2].class, t.records()[a].class);
    assert!(!t.records()[a2].primitive);
}

#[test]
fn records_satisfy_translation_bound() {
    let t = sl2_table(8);
    let m = benoist_gap(&t).m_hat;
    for r in t.records() {
        assert!(r.length <= r.distance + 1e-9);
        assert_eq!(r.very_reduced, r.word.is_very_reduced());
        if r.very_reduced {
            assert!(r.distance <= r.length + m + 1e-9);
        }
    }
}

#[test]
fn class_lengths_agree_across_conjugates() {
    let t = sl2_table(8);
    for (i, r) in t.records().iter().enumerate() {
        if let Some(c) = r.class {
            if r.primitive {
                let want = t.classes()[c as usize].length;
                assert!((r.length - want).abs() <= 1e-6, "record {i}");
            }
        }
    }
}

#[test]
fn conjugate_bound_holds_for_primitive_words() {
    let t = sl2_table(10);
    let d = t.max_displacement();
    for r in t.records().iter().filter(|r| r.primitive) {
        let (core, _) = cyclic_reduce(&r.word);
        assert!(rotation_count(&core).unwrap() as f64 >= r.length / d - 2.0);
    }
}

#[test]
fn conjugate_bound_fails_for_proper_powers_of_the_largest_generator() {
    // l(a^k) = k d when a is the generator of largest displacement and is
    // symmetric, while a^k has a single rotation
    let t = sl2_table(6);
    let d = t.max_displacement();
    let i = t.index_of(&Word::parse("a a a a a a", 2).unwrap()).unwrap();
    let r = &t.records()[i];
    assert!((r.length - 6.0 * d).abs() < 1e-9);
    assert_eq!(rotation_count(&r.word).unwrap(), 1);
    assert!(1.0 < r.length / d - 2.0);
}

#[test]
fn directional_count_examples() {
    let sys = sl2();
    let t = build_census(&sys, 8).unwrap();
    let r = t.horizon_r();
    let whole = FlagBall::new(Flag::standard(2), 1.0);
    let c = count_directional(&t, r, &whole, &whole);
    assert_eq!(c.count + c.undefined, count_orbit(&t, r).value);
    assert_eq!(c.undefined, 1);

    let lonely = FlagBall::new(
        Flag::from_frame(SquareMatrix::rotation(2, 0, 1, 1.234).into_matrix(), 1e-12).unwrap(),
        1e-9,
    );
    assert_eq!(count_directional(&t, r, &lonely, &whole).count, 0);

    let a = Letter::new(0, false);
    let ball_a = FlagBall::new(sys.fixed_flag(a).unwrap().clone(), 0.2);
    let ball_b = FlagBall::new(sys.fixed_flag(a.inverse()).unwrap().clone(), 0.2);
    let n = count_directional(&t, r, &ball_a, &ball_b).count as f64;
    assert!(n / count_orbit(&t, r).value as f64 > 0.01);
}

#[test]
fn delta_for_equal_displacements_approaches_log_three() {
    // every word of length k at distance k c: N(R) counts words of length < R / c
    let c = 1.7;
    let grid: Vec<f64> = (0..40).map(|i| 10.0 * c + 20.0 * c * i as f64 / 39.0).collect();
    let counts: Vec<u64> = grid
        .iter()
        .map(|&r| word_count(2, ((r / c).ceil() as usize).saturating_sub(1)) as u64)
        .collect();
    let est = fit_exponential_rate(&grid, &counts).unwrap();
    let want = 3f64.ln() / c;
    assert!((est.delta_hat - want).abs() < 0.03 * want, "{} vs {want}", est.delta_hat);
}

#[test]
fn delta_errors() {
    let t = sl2_table(6);
    let h = t.horizon_r();
    assert!(matches!(
        estimate_delta(&t, (0.5 * h, 1.1 * h), 10),
        Err(Error::WindowBeyondHorizon { .. })
    ));
    assert!(matches!(estimate_delta(&t, (0.5 * h, h), 3), Err(Error::DegenerateWindow(_))));
    let est = estimate_delta(&t, (0.5 * h, h), 12).unwrap();
    assert!(est.delta_hat > 0.0);
}

#[test]
fn limit_cone_examples() {
    let t = sl2_table(5);
    assert!(matches!(limit_cone(&t, 2), Err(Error::RankOne)));
    let dirs: Vec<_> = (1..t.len()).filter_map(|i| t.cartan_dir(i)).collect();
    let (alpha, gap) = cone_statistics(&dirs);
    assert!(alpha < 1e-9);
    assert!((gap - 2f64.sqrt()).abs() < 1e-9);

    let one = build_census(&single_generator_sl3(), 10).unwrap();
    let early = limit_cone(&one, 1).unwrap().alpha_hat;
    let late = limit_cone(&one, 8).unwrap().alpha_hat;
    assert!(late < early, "{late} vs {early}");
    assert!(late < 0.05);
}

#[test]
fn benoist_gap_examples() {
    let spd = SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0], 1e-9).unwrap();
    let cfg = SystemConfig {
        dimension: 2,
        generators: vec![spd.to_row_major()],
        power: None,
        ball_radius: None,
        sample_count: Some(100),
        seed: None,
        tolerances: None,
    };
    let t = build_census(&load_system(&cfg).unwrap().into_validated().unwrap(), 3).unwrap();
    assert!(benoist_gap(&t).m_hat < 1e-12);

    // not monotone in the last digits: the maximum at length 5 sits 4.5e-5 below
    // the one at length 4, but from length 4 on the table is flat
    let g = benoist_gap(&sl2_table(10));
    assert!(g.per_length[4..].iter().all(|&x| (g.m_hat - x).abs() < 1e-4));
    assert!(g.per_length[2] < g.per_length[3] && g.per_length[3] < g.per_length[4]);
}

#[test]
fn class_multiplicity_examples() {
    let t = sl2_table(8);
    let systole = t.classes().iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    assert_eq!(class_multiplicity(&t, 0.999 * systole).max_count, 0);

    let a = t.index_of(&Word::parse("a", 2).unwrap()).unwrap();
    let m = class_multiplicity(&t, t.records()[a].length);
    let id = t.records()[a].class.unwrap();
    assert!(m.counts.iter().any(|&(c, n)| c == id && n >= 1));

    // every rotation of a primitive core appears in the class
    let core = Word::parse("a a b", 2).unwrap();
    let i = t.index_of(&core).unwrap();
    let m = class_multiplicity(&t, t.records()[i].length + 1e-9);
    let id = t.records()[i].class.unwrap();
    let n = m.counts.iter().find(|p| p.0 == id).unwrap().1;
    assert!(n as usize >= rotations(&core).unwrap().len());
}

#[test]
fn growth_report_is_positive_for_the_demo() {
    let t = sl2_table(9);
    let report = growth_report(&t, &ReportOptions::default()).unwrap();
    assert!(report.delta.delta_hat > 0.0);
    assert!(report.cone.is_none());
    assert!(report.directional.is_none());
    assert_eq!(report.theorem.rank, 1);
}

#[test]
fn budget_and_validation_are_enforced() {
    let unvalidated = load_system(&presets::sl2_demo()).unwrap();
    assert!(matches!(build_census(&unvalidated, 2), Err(Error::NotValidated)));
}
