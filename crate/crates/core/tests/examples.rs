//! Worked examples for every public operation. Derived values are checked
//! against an independent computation (direct summation or the grid oracle).

use dmcic::channel::fixtures;
use dmcic::oracle::{csiszar_identity_check, grid_min_gap, grid_region, GridSpec};
use dmcic::{
    active_constraints, check_condition, classify, compute_region, hausdorff, random_channel,
    region_subset, weighted_sum_max, Budget, Channel, ChannelFamily, ConditionId, Error,
    ProbTensor, RateRegion, RegimeCondition, RegionId, Verdict, VarGroup, DEFAULT_ANGLES,
    TOL_CLASSIFY, TOL_REGION,
};

fn g(names: &[&str]) -> VarGroup {
    VarGroup::new(names).unwrap()
}

fn direct_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

fn family(f: ChannelFamily) -> Channel {
    f.build().unwrap()
}

fn identical(flip: f64) -> Channel {
    family(ChannelFamily::IdenticalOutputs { flip })
}

fn degraded() -> Channel {
    family(ChannelFamily::DegradedCognitive { inner_flip: 0.1, degrade_flip: 0.2 })
}

fn null_cognitive() -> Channel {
    family(ChannelFamily::NullCognitiveOutput { flip: 0.0 })
}

fn null_primary() -> Channel {
    family(ChannelFamily::NullPrimaryOutput { flip: 0.1 })
}

// prob_core

#[test]
fn marginalize_examples() {
    let u = ProbTensor::uniform(vec![("A", 2), ("B", 2)]).unwrap();
    assert_eq!(u.marginalize(&g(&["A"])).unwrap().values(), &[0.5, 0.5]);

    let copy = ProbTensor::new(vec![("X", 2), ("Y", 2)], vec![0.3, 0.0, 0.0, 0.7]).unwrap();
    let y = copy.marginalize(&g(&["Y"])).unwrap();
    assert!((y.values()[0] - 0.3).abs() < 1e-15 && (y.values()[1] - 0.7).abs() < 1e-15);

    let t = ProbTensor::uniform(vec![("U", 2), ("X1", 2), ("X2", 2)]).unwrap();
    let m = t.marginalize(&g(&["X1", "X2"])).unwrap();
    assert_eq!(m.variables().len(), 2);
    assert!(m.values().iter().all(|&v| (v - 0.25).abs() < 1e-15));

    assert!(matches!(u.marginalize(&g(&["Z"])), Err(Error::UnknownVariable(_))));
}

#[test]
fn entropy_examples() {
    let u = ProbTensor::uniform(vec![("A", 2)]).unwrap();
    assert!((u.entropy(&g(&["A"])).unwrap() - 1.0).abs() < 1e-15);
    let pm = ProbTensor::point_mass(vec![("A", 3)], &[1]).unwrap();
    assert_eq!(pm.entropy(&g(&["A"])).unwrap(), 0.0);
    let b = ProbTensor::new(vec![("A", 2)], vec![0.9, 0.1]).unwrap();
    let h = b.entropy(&g(&["A"])).unwrap();
    assert!((h - direct_entropy(&[0.9, 0.1])).abs() < 1e-15);
    assert!((h - 0.468996).abs() < 5e-7);
}

#[test]
fn mutual_information_examples() {
    let ind = ProbTensor::uniform(vec![("A", 2), ("B", 2)]).unwrap();
    assert!(ind.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap().abs() < 1e-15);

    let same = ProbTensor::new(vec![("A", 2), ("B", 2)], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    assert!((same.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap() - 1.0).abs() < 1e-15);

    let bsc = ProbTensor::new(vec![("A", 2), ("B", 2)], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
    let i = bsc.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap();
    // I = H(B) - H(B|A) by direct summation
    let expected = direct_entropy(&[0.5, 0.5]) - direct_entropy(&[0.9, 0.1]);
    assert!((i - expected).abs() < 1e-12);
    assert!((i - 0.531004).abs() < 5e-7);
    let j = bsc.mutual_information(&g(&["B"]), &g(&["A"]), None).unwrap();
    assert!((i - j).abs() < 1e-15);

    assert!(matches!(
        bsc.mutual_information(&g(&["A"]), &g(&["A", "B"]), None),
        Err(Error::Argument(_))
    ));
}

#[test]
fn attach_channel_examples() {
    let noiseless = fixtures::noiseless_pair();
    let input = ProbTensor::uniform(vec![("X1", 2), ("X2", 2)]).unwrap();
    let joint = input.attach_channel(&noiseless).unwrap();
    for x1 in 0..2 {
        for x2 in 0..2 {
            for y1 in 0..2 {
                for y2 in 0..2 {
                    let want = if y1 == x1 && y2 == x2 { 0.25 } else { 0.0 };
                    assert_eq!(joint.get(&[x1, x2, y1, y2]), want);
                }
            }
        }
    }

    let ch = random_channel(11, [2, 3, 2, 2]).unwrap();
    let pm = ProbTensor::point_mass(vec![("X1", 2), ("X2", 3)], &[1, 2]).unwrap();
    let joint = pm.attach_channel(&ch).unwrap();
    for y1 in 0..2 {
        for y2 in 0..2 {
            assert_eq!(joint.get(&[1, 2, y1, y2]), ch.prob(1, 2, y1, y2));
        }
    }

    // brute-force product for the degraded family
    let ch = degraded();
    let joint = input.attach_channel(&ch).unwrap();
    let inputs = joint.marginalize(&g(&["X1", "X2"])).unwrap();
    assert!(inputs.values().iter().all(|&v| (v - 0.25).abs() < 1e-12));
    for y1 in 0..2 {
        let mut want = 0.0;
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y2 in 0..2 {
                    want += 0.25 * ch.prob(x1, x2, y1, y2);
                }
            }
        }
        let got = joint.marginalize(&g(&["Y1"])).unwrap().values()[y1];
        assert!((got - want).abs() < 1e-12);
    }

    let wrong = ProbTensor::uniform(vec![("X1", 3), ("X2", 2)]).unwrap();
    assert!(matches!(wrong.attach_channel(&noiseless), Err(Error::Dimension(_))));
}

// channel_model

#[test]
fn load_save_examples() {
    let dir = std::env::temp_dir().join(format!("dmcic-examples-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pair.json");
    fixtures::noiseless_pair().save(&path).unwrap();
    let back = Channel::load(&path).unwrap();
    assert_eq!(back, fixtures::noiseless_pair());

    let mut text = fixtures::noiseless_pair().to_json();
    text = text.replacen("1.0", "0.98", 1);
    let err = Channel::from_json(&text).unwrap_err();
    assert!(matches!(err, Error::Format(_)), "{err}");
    assert!(err.to_string().contains("(x1, x2)") || err.to_string().contains("x1"), "{err}");

    let r = random_channel(42, [2, 2, 2, 2]).unwrap();
    r.save(&path).unwrap();
    let back = Channel::load(&path).unwrap();
    for x1 in 0..2 {
        for x2 in 0..2 {
            let (a, b) = (r.row(x1, x2), back.row(x1, x2));
            assert!(a.iter().zip(b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn family_examples() {
    let budget = Budget::default();
    let np = null_primary();
    let cmc = check_condition(&np, &RegimeCondition::new(ConditionId::Cmc), &budget).unwrap();
    assert_eq!(cmc.verdict, Verdict::Holds);
    let at = ProbTensor::uniform(vec![("X1", 2), ("X2", 2)]).unwrap().attach_channel(&np).unwrap();
    assert!(at.mutual_information(&g(&["X1", "X2"]), &g(&["Y1"]), None).unwrap() < 1e-12);

    let id = identical(0.1);
    for c in [ConditionId::Pmc, ConditionId::Cmc] {
        let r = check_condition(&id, &RegimeCondition::new(c), &budget).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.worst_gap.abs() < 1e-12);
    }

    let dg = degraded();
    let r = check_condition(&dg, &RegimeCondition::new(ConditionId::Cmc), &budget).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    let (grid, _) =
        grid_min_gap(&dg, &RegimeCondition::new(ConditionId::Cmc), &GridSpec::inputs(&dg, 64).unwrap()).unwrap();
    assert!(grid >= -1e-12);

    assert!(matches!(
        ChannelFamily::IdenticalOutputs { flip: 0.7 }.build(),
        Err(Error::Argument(_))
    ));
}

#[test]
fn random_channel_examples() {
    assert_eq!(random_channel(5, [2, 2, 2, 2]).unwrap(), random_channel(5, [2, 2, 2, 2]).unwrap());
    assert_ne!(random_channel(5, [2, 2, 2, 2]).unwrap(), random_channel(6, [2, 2, 2, 2]).unwrap());
    for seed in 0..20 {
        let ch = random_channel(seed, [2, 2, 2, 2]).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                let s: f64 = ch.row(x1, x2).iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
                assert!(ch.row(x1, x2).iter().all(|&p| p >= 0.0));
            }
        }
    }
}

// classifier

#[test]
fn check_condition_examples() {
    let budget = Budget::default();
    let cmc = RegimeCondition::new(ConditionId::Cmc);

    let r = check_condition(&identical(0.1), &cmc, &budget).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.worst_gap.abs() < 1e-12);

    let ch = null_cognitive();
    let r = check_condition(&ch, &cmc, &budget).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    let (grid, at) = grid_min_gap(&ch, &cmc, &GridSpec::inputs(&ch, 8).unwrap()).unwrap();
    assert!((grid + 1.0).abs() < 1e-12);
    assert!((r.worst_gap - grid).abs() < 1e-9);
    assert!((cmc.gap_at(&ch, &r.witness).unwrap() - r.worst_gap).abs() < 1e-9);
    let uniform = ProbTensor::uniform(vec![("X1", 2), ("X2", 2)]).unwrap();
    assert!((cmc.gap_at(&ch, &uniform).unwrap() + 1.0).abs() < 1e-12);
    assert!(at.values().iter().sum::<f64>() > 0.999);

    let r = check_condition(&degraded(), &cmc, &budget).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);

    let zero = Budget { restarts: 0, ..Budget::default() };
    assert!(matches!(check_condition(&ch, &cmc, &zero), Err(Error::Argument(_))));
}

#[test]
fn classify_examples() {
    let budget = Budget::default();
    let p = classify(&identical(0.1), &budget).unwrap();
    for id in ConditionId::ALL {
        assert_eq!(p.report(id).verdict, Verdict::Holds, "{id}");
    }
    assert!(p.alarms.is_empty());

    let p = classify(&null_primary(), &budget).unwrap();
    assert!(p.holds(ConditionId::Cmc));
    assert!(p.holds(ConditionId::Cln));
}

// regions

#[test]
fn weighted_sum_max_examples() {
    let budget = Budget::default();
    let ch = fixtures::noiseless_pair();
    let s = weighted_sum_max(&ch, &RegionId::CII.spec(), [1.0, 1.0], &budget).unwrap();
    assert!((s.value - 2.0).abs() < 1e-9, "{}", s.value);
    // independent: best R1 + R2 over the exhaustive grid union
    let grid = grid_region(&ch, &RegionId::CII.spec(), &GridSpec::inputs(&ch, 16).unwrap()).unwrap();
    let best = grid.vertices().iter().map(|v| v[0] + v[1]).fold(0.0, f64::max);
    assert!((s.value - best).abs() < 1e-9);

    let s = weighted_sum_max(&null_cognitive(), &RegionId::CIV.spec(), [0.0, 1.0], &budget).unwrap();
    assert!(s.value.abs() < 1e-9);

    let ch = identical(0.0);
    for id in RegionId::ALL {
        let s = weighted_sum_max(&ch, &id.spec(), [1.0, 0.0], &budget).unwrap();
        assert!((s.value - (ch.y1_card() as f64).log2()).abs() < 1e-6, "{id}: {}", s.value);
    }

    assert!(matches!(
        weighted_sum_max(&ch, &RegionId::CI.spec(), [0.0, 0.0], &budget),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        weighted_sum_max(&ch, &RegionId::CI.spec(), [-1.0, 1.0], &budget),
        Err(Error::Argument(_))
    ));
}

#[test]
fn compute_region_examples() {
    let budget = Budget::default();
    let ch = fixtures::noiseless_product();
    let r = compute_region(&ch, &RegionId::CIV.spec(), DEFAULT_ANGLES, &budget).unwrap();
    let oracle = grid_region(&ch, &RegionId::CIV.spec(), &GridSpec::auxiliary(&ch, 2, 8).unwrap()).unwrap();
    assert_eq!(oracle.vertices().len(), 3);
    for (v, w) in oracle.vertices().iter().zip([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]) {
        assert!((v[0] - w[0]).abs() < 1e-12 && (v[1] - w[1]).abs() < 1e-12, "{v:?}");
    }
    assert!(hausdorff(&r.region, &RateRegion::rectangle(1.0, 1.0)) < 1e-6);

    let zero = fixtures::zero_capacity();
    for id in RegionId::ALL {
        let r = compute_region(&zero, &id.spec(), DEFAULT_ANGLES, &budget).unwrap();
        assert!(r.region.is_zero(), "{id}");
    }

    let ch = identical(0.0);
    let r = compute_region(&ch, &RegionId::CI.spec(), DEFAULT_ANGLES, &budget).unwrap();
    let oracle = grid_region(&ch, &RegionId::CI.spec(), &GridSpec::auxiliary(&ch, 2, 8).unwrap()).unwrap();
    assert!(hausdorff(&r.region, &oracle) <= TOL_REGION);
    let (inside, _) = region_subset(&oracle, &r.region, TOL_REGION);
    assert!(inside);

    assert!(matches!(
        compute_region(&ch, &RegionId::CI.spec(), 2, &budget),
        Err(Error::Argument(_))
    ));
}

#[test]
fn region_subset_examples() {
    let sq = RateRegion::rectangle(1.0, 1.0);
    assert_eq!(region_subset(&sq, &sq, 0.0), (true, 0.0));
    let tri = RateRegion::from_boundary(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let (ok, v) = region_subset(&sq, &tri, TOL_REGION);
    assert!(!ok);
    assert!((v - 1.0).abs() < 1e-12);

    // a strong-interference channel: C_II inside C_IV
    let budget = Budget::default();
    let ch = identical(0.1);
    assert_eq!(
        check_condition(&ch, &RegimeCondition::new(ConditionId::SiPrimal), &budget).unwrap().verdict,
        Verdict::Holds
    );
    let c2 = compute_region(&ch, &RegionId::CII.spec(), DEFAULT_ANGLES, &budget).unwrap();
    let c4 = compute_region(&ch, &RegionId::CIV.spec(), DEFAULT_ANGLES, &budget).unwrap();
    assert!(region_subset(&c2.region, &c4.region, TOL_REGION).0);
}

#[test]
fn hausdorff_examples() {
    let sq = RateRegion::rectangle(1.0, 1.0);
    assert_eq!(hausdorff(&sq, &sq), 0.0);
    let wide = RateRegion::rectangle(2.0, 1.0);
    assert!((hausdorff(&sq, &wide) - 1.0).abs() < 1e-12);
    assert!((hausdorff(&wide, &sq) - 1.0).abs() < 1e-12);
}

#[test]
fn active_constraint_examples() {
    let budget = Budget::default();
    let ch = fixtures::noiseless_product();
    let rep = active_constraints(&ch, &RegionId::CIV.spec(), &budget).unwrap();
    // the sum constraint never cuts the boundary: it does not bind anywhere
    assert!(rep.inactive_everywhere("sum"));
    // at (R1_max, 0) the R1 bound is tight
    let first = &rep.vertices[0];
    assert!(first.vertex[1].abs() < 1e-9);
    assert!(first.tight.contains(&"r1"));

    // R_o where I(U,X1;Y1) + I(X2;Y2|U,X1) >= I(X1,X2;Y2) at every witness:
    // the split sum bound is redundant on the whole boundary
    let ch = null_cognitive();
    let spec = RegionId::Ro.spec();
    let swept = compute_region(&ch, &spec, DEFAULT_ANGLES, &budget).unwrap();
    let rep = swept.active_constraints();
    let bound = |id: &str, joint: &ProbTensor| {
        spec.constraints.iter().find(|c| c.id == id).unwrap().bound.eval(joint).unwrap()
    };
    for (v, &k) in rep.vertices.iter().zip(&swept.vertex_support) {
        let joint = swept.support[k].witness.attach_channel(&ch).unwrap();
        assert!(bound("sum_split", &joint) >= bound("sum", &joint) - 1e-9);
        assert!(!v.binding.contains(&"sum_split"), "{v:?}");
    }

    assert!(active_constraints(&ch, &RegionId::CI.spec().without("r2"), &budget).is_err());
}

#[test]
fn tolerances() {
    assert_eq!(TOL_CLASSIFY, 1e-6);
    assert_eq!(TOL_REGION, 5e-3);
    assert_eq!(DEFAULT_ANGLES, 64);
}

// oracle

#[test]
fn csiszar_examples() {
    let prod = ProbTensor::uniform(vec![("Y1_1", 2), ("Y1_2", 2), ("Y2_1", 2), ("Y2_2", 2)]).unwrap();
    assert!(csiszar_identity_check(&prod).unwrap() < 1e-15);
    // Y2_i = Y1_i with (Y1_1, Y1_2) correlated
    let mut v = vec![0.0; 16];
    for (a, b, p) in [(0, 0, 0.4), (0, 1, 0.1), (1, 0, 0.2), (1, 1, 0.3)] {
        v[a * 8 + b * 4 + a * 2 + b] = p;
    }
    let corr = ProbTensor::new(vec![("Y1_1", 2), ("Y1_2", 2), ("Y2_1", 2), ("Y2_2", 2)], v).unwrap();
    assert!(csiszar_identity_check(&corr).unwrap() < 1e-12);
}
