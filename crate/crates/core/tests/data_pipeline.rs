use std::collections::BTreeSet;

use gbfsvm::data::{inject_label_noise, load_csv, noise_indices, normalize_minmax, split_indices};
use gbfsvm::membership::{fit_class_geometry, membership_value};
use gbfsvm::{Dataset, Label, LabelColumn, NoiseSpec};
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = Dataset<f64>> {
    (1usize..=4, 6usize..=80).prop_flat_map(|(d, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, d), n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(rows, flags)| {
                let mut labels: Vec<Label> = flags
                    .into_iter()
                    .map(|f| if f { Label::Pos } else { Label::Neg })
                    .collect();
                labels[0] = Label::Pos;
                labels[1] = Label::Pos;
                labels[2] = Label::Neg;
                labels[3] = Label::Neg;
                Dataset::new("random", rows, labels, None).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn noise_flips_exactly_the_rounded_count(d in dataset_strategy(), f in 0.0f64..=0.5, seed in any::<u64>()) {
        let spec = NoiseSpec::new(f, seed).unwrap();
        let noisy = inject_label_noise(&d, &spec);
        let flipped: Vec<usize> = (0..d.len()).filter(|&i| noisy.label(i) != d.label(i)).collect();
        prop_assert_eq!(flipped.len(), (f * d.len() as f64 + 0.5).floor() as usize);
        prop_assert_eq!(&flipped, &noise_indices(d.len(), &spec));
        prop_assert_eq!(noisy.features(), d.features());
        prop_assert_eq!(inject_label_noise(&d, &spec), noisy);
    }

    #[test]
    fn normalization_maps_to_unit_box_and_is_idempotent(d in dataset_strategy()) {
        let n = normalize_minmax(&d);
        prop_assert!(n.features().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let twice = normalize_minmax(&n);
        for (a, b) in twice.features().iter().zip(n.features()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for j in 0..d.dim() {
            for i in 1..d.len() {
                let (x0, x1) = (d.row(i - 1)[j], d.row(i)[j]);
                let (y0, y1) = (n.row(i - 1)[j], n.row(i)[j]);
                if x0 < x1 {
                    prop_assert!(y0 <= y1);
                }
            }
        }
    }

    #[test]
    fn split_partitions_and_stratifies(d in dataset_strategy(), f in 0.1f64..0.9, seed in any::<u64>()) {
        let (tr, te) = split_indices(&d, f, seed).unwrap();
        let all: BTreeSet<usize> = tr.iter().chain(&te).copied().collect();
        prop_assert_eq!(all.len(), d.len());
        prop_assert_eq!(tr.len() + te.len(), d.len());
        for side in [&tr, &te] {
            prop_assert!(side.iter().any(|&i| d.label(i) == Label::Pos));
            prop_assert!(side.iter().any(|&i| d.label(i) == Label::Neg));
        }
        prop_assert_eq!(split_indices(&d, f, seed).unwrap(), (tr, te));
    }

    #[test]
    fn membership_in_range_and_monotone(d in dataset_strategy(), t in 0.0f64..3.0) {
        let g = fit_class_geometry(&d, 1e-6).unwrap();
        for y in [Label::Pos, Label::Neg] {
            for i in 0..d.len() {
                let m = membership_value(d.row(i), y, &g);
                prop_assert!(m > 0.0 && m <= 1.0);
            }
            let mean = g.mean(y).to_vec();
            let dir: Vec<f64> = (0..d.dim()).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
            let at = |s: f64| -> Vec<f64> { mean.iter().zip(&dir).map(|(m, u)| m + s * u).collect() };
            prop_assert!(membership_value(&at(t), y, &g) >= membership_value(&at(t + 0.5), y, &g));
            prop_assert!((membership_value(&mean, y, &g) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn membership_translation_covariant(d in dataset_strategy(), shift in -50.0f64..50.0) {
        let moved_rows: Vec<Vec<f64>> = d.rows().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let moved = Dataset::new("moved", moved_rows, d.labels().to_vec(), None).unwrap();
        let a = fit_class_geometry(&d, 1e-6).unwrap().memberships_for(&d);
        let b = fit_class_geometry(&moved, 1e-6).unwrap().memberships_for(&moved);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn membership_translation_exact_on_dyadic_grid() {
    let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.25, (i % 4) as f64 * 0.5]).collect();
    let labels = (0..8).map(|i| if i < 4 { Label::Pos } else { Label::Neg }).collect::<Vec<_>>();
    let d = Dataset::new("grid", rows.clone(), labels.clone(), None).unwrap();
    let moved = Dataset::new(
        "grid",
        rows.iter().map(|r| r.iter().map(|v| v + 4.0).collect()).collect(),
        labels,
        None,
    )
    .unwrap();
    let a = fit_class_geometry(&d, 1e-6).unwrap().memberships_for(&d);
    let b = fit_class_geometry(&moved, 1e-6).unwrap().memberships_for(&moved);
    assert_eq!(a, b);
}

#[test]
fn bundled_datasets_load() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let bc = load_csv::<f64>(root.join("breastcancer.csv"), &LabelColumn::default()).unwrap();
    assert_eq!((bc.len(), bc.dim()), (683, 9));
    let hb = load_csv::<f64>(root.join("haberman.csv"), &LabelColumn::default()).unwrap();
    assert_eq!((hb.len(), hb.dim()), (306, 3));
    assert!(hb.class_count(Label::Pos) > 0 && hb.class_count(Label::Neg) > 0);
}
