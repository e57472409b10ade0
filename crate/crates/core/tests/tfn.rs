use gbfsvm::svm::gbfsvm_dual_objective;
use gbfsvm::tfn::{
    chance_leq_zero, fuzzy_label_from_membership, pos_leq_zero, tfn_dual_objective, train_tfn, Side,
};
use gbfsvm::{BallTrainingSet, ConfidenceLevel, Label, PsoConfig, TfnBallTrainingSet, TriangularFuzzyNumber};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tfn_strategy() -> impl Strategy<Value = TriangularFuzzyNumber<f64>> {
    (-5.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0)
        .prop_map(|(r1, d2, d3)| TriangularFuzzyNumber::new(r1, r1 + d2, r1 + d2 + d3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn crisp_equivalent_matches_possibility(a in tfn_strategy(), l in 0.001f64..=1.0) {
        let lambda = ConfidenceLevel::new(l).unwrap();
        prop_assert_eq!(pos_leq_zero(&a) >= l, chance_leq_zero(&a, lambda));
    }

    #[test]
    fn fuzzy_labels_are_ordered(delta in 0.5f64..=1.0) {
        let p = fuzzy_label_from_membership(delta, Side::Positive).unwrap();
        prop_assert!(p.r1() <= p.r2() && p.r2() <= p.r3());
        prop_assert!((p.r2() - (2.0 * delta - 1.0)).abs() < 1e-12);
        let n = fuzzy_label_from_membership(-delta, Side::Negative).unwrap();
        prop_assert!(n.r1() <= n.r2() && n.r2() <= n.r3());
        prop_assert!((n.r2() - (1.0 - 2.0 * delta)).abs() < 1e-12);
    }
}

#[test]
fn full_membership_gives_crisp_labels() {
    let p = fuzzy_label_from_membership(1.0, Side::Positive).unwrap();
    assert_eq!((p.r1(), p.r2(), p.r3()), (1.0, 1.0, 1.0));
    let n = fuzzy_label_from_membership(-1.0, Side::Negative).unwrap();
    assert_eq!((n.r1(), n.r2(), n.r3()), (-1.0, -1.0, -1.0));
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, d: usize) -> (Vec<f64>, Vec<f64>, Vec<Label>) {
    let centers = (0..m * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let radii = (0..m).map(|_| rng.gen_range(0.0..0.3)).collect();
    let mut labels: Vec<Label> = (0..m).map(|_| if rng.gen() { Label::Pos } else { Label::Neg }).collect();
    labels[0] = Label::Neg;
    labels[m - 1] = Label::Pos;
    (centers, radii, labels)
}

#[test]
fn crisp_labels_reduce_to_ball_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let m = rng.gen_range(2..10);
        let d = rng.gen_range(1..4);
        let (centers, radii, labels) = random_instance(&mut rng, m, d);
        let tfn = TfnBallTrainingSet::crisp(d, &centers, &radii, &labels).unwrap();
        let ball = BallTrainingSet::new(d, centers, radii, labels, vec![1.0; m]).unwrap();
        let alpha: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
        let ordered: Vec<f64> = tfn.order().iter().map(|&i| alpha[i]).collect();
        let (beta, rest) = ordered.split_at(tfn.split_index());
        for l in [0.1, 0.5, 1.0] {
            let got = tfn_dual_objective(beta, rest, &tfn, ConfidenceLevel::new(l).unwrap()).unwrap();
            let want = gbfsvm_dual_objective(&alpha, &ball).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn tfn_training_separates_crisp_blobs() {
    let mut centers = Vec::new();
    let mut labels = Vec::new();
    for i in 0..5 {
        let t = i as f64 * 0.03;
        centers.extend_from_slice(&[0.15 + t, 0.2]);
        labels.push(Label::Neg);
        centers.extend_from_slice(&[0.85 - t, 0.8]);
        labels.push(Label::Pos);
    }
    let ts = TfnBallTrainingSet::crisp(2, &centers, &[0.02; 10], &labels).unwrap();
    let sol = train_tfn(&ts, ConfidenceLevel::new(0.5).unwrap(), 10.0, &PsoConfig::default()).unwrap();
    for (i, l) in labels.iter().enumerate() {
        assert_eq!(sol.predict(&centers[2 * i..2 * i + 2]), *l);
    }
}
