use hypercurate_core::metrics::*;
use hypercurate_core::oracle::{naive_f1, naive_miou, naive_normalized_mse};
use ndarray::{Array1, Array2, Array3, Axis};
use proptest::prelude::*;

fn bools(n: usize, k: usize, v: &[bool]) -> Array2<bool> {
    Array2::from_shape_vec((n, k), v[..n * k].to_vec()).unwrap()
}

fn multilabel() -> impl Strategy<Value = MultiLabelBatch> {
    (1usize..12, 1usize..8).prop_flat_map(|(n, k)| {
        (prop::collection::vec(any::<bool>(), n * k), prop::collection::vec(any::<bool>(), n * k))
            .prop_map(move |(p, t)| MultiLabelBatch::new(bools(n, k, &p), bools(n, k, &t)).unwrap())
    })
}

fn masks() -> impl Strategy<Value = MaskBatch> {
    (1usize..4, 1usize..6, 1usize..6, 1usize..6).prop_flat_map(|(n, h, w, k)| {
        let cell = prop_oneof![8 => 0..k as u8, 1 => Just(255u8)];
        (prop::collection::vec(cell.clone(), n * h * w), prop::collection::vec(cell, n * h * w)).prop_map(move |(p, t)| {
            MaskBatch::new(
                Array3::from_shape_vec((n, h, w), p).unwrap(),
                Array3::from_shape_vec((n, h, w), t).unwrap(),
                k,
            )
            .unwrap()
        })
    })
}

fn regression() -> impl Strategy<Value = RegressionBatch> {
    (2usize..10, 1usize..5).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(-100.0f64..100.0, n * p),
            prop::collection::vec(-100.0f64..100.0, n * p),
            prop::collection::vec(-100.0f64..100.0, p),
        )
            .prop_map(move |(a, b, m)| {
                RegressionBatch::new(
                    Array2::from_shape_vec((n, p), a).unwrap(),
                    Array2::from_shape_vec((n, p), b).unwrap(),
                    Array1::from(m),
                )
                .unwrap()
            })
    })
}

fn permute_rows<T: Clone>(a: &Array2<T>, order: &[usize]) -> Array2<T> {
    a.select(Axis(0), order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f1_matches_oracle(b in multilabel()) {
        let naive = naive_f1(&b);
        prop_assert!((f1_multilabel(&b, F1Mode::Micro).score - naive.micro).abs() <= 1e-9);
        prop_assert!((f1_multilabel(&b, F1Mode::Macro).score - naive.macro_f1).abs() <= 1e-9);
    }

    #[test]
    fn miou_matches_oracle(b in masks()) {
        prop_assert!((miou(&b, IoUMode::Pooled).miou - naive_miou(&b)).abs() <= 1e-9);
    }

    #[test]
    fn nmse_matches_oracle(b in regression()) {
        if let Some((sum, pct)) = naive_normalized_mse(&b) {
            let r = normalized_mse(&b).unwrap();
            prop_assert!((r.sum - sum).abs() <= 1e-9 * sum.max(1.0));
            prop_assert!((r.percent - pct).abs() <= 1e-9 * pct.max(1.0));
        }
    }

    #[test]
    fn single_class_micro_equals_macro(v in prop::collection::vec(any::<bool>(), 2..40)) {
        let n = v.len() / 2;
        let b = MultiLabelBatch::new(bools(n, 1, &v), bools(n, 1, &v[n..])).unwrap();
        let r = f1_multilabel(&b, F1Mode::Macro);
        prop_assert!((r.micro - r.macro_f1).abs() <= 1e-12);
    }

    #[test]
    fn sample_order_is_irrelevant(b in multilabel(), m in masks(), r in regression(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..b.targets.nrows()).collect();
        order.shuffle(&mut rng);
        let pb = MultiLabelBatch::new(permute_rows(&b.predictions, &order), permute_rows(&b.targets, &order)).unwrap();
        prop_assert!((f1_multilabel(&pb, F1Mode::Macro).score - f1_multilabel(&b, F1Mode::Macro).score).abs() <= 1e-12);
        prop_assert!((f1_multilabel(&pb, F1Mode::Micro).score - f1_multilabel(&b, F1Mode::Micro).score).abs() <= 1e-12);

        let mut order: Vec<usize> = (0..m.targets.dim().0).collect();
        order.shuffle(&mut rng);
        let pm = MaskBatch::new(m.predictions.select(Axis(0), &order), m.targets.select(Axis(0), &order), m.n_classes).unwrap();
        prop_assert!((miou(&pm, IoUMode::Pooled).miou - miou(&m, IoUMode::Pooled).miou).abs() <= 1e-12);
        prop_assert!((miou(&pm, IoUMode::PerImage).miou - miou(&m, IoUMode::PerImage).miou).abs() <= 1e-12);

        let mut order: Vec<usize> = (0..r.targets.nrows()).collect();
        order.shuffle(&mut rng);
        let pr = RegressionBatch::new(permute_rows(&r.predictions, &order), permute_rows(&r.targets, &order), r.baseline_means.clone()).unwrap();
        if let (Ok(a), Ok(b)) = (normalized_mse(&pr), normalized_mse(&r)) {
            prop_assert!((a.sum - b.sum).abs() <= 1e-9 * b.sum.max(1.0));
        }
    }

    #[test]
    fn miou_ignores_class_relabeling(m in masks(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<u8> = (0..m.n_classes as u8).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let relabel = |a: &Array3<u8>| a.mapv(|v| if v == 255 { 255 } else { perm[usize::from(v)] });
        let rm = MaskBatch::new(relabel(&m.predictions), relabel(&m.targets), m.n_classes).unwrap();
        prop_assert!((miou(&rm, IoUMode::Pooled).miou - miou(&m, IoUMode::Pooled).miou).abs() <= 1e-12);
    }

    #[test]
    fn nmse_is_scale_invariant(r in regression(), scales in prop::collection::vec(0.01f64..100.0, 5), shift in -50.0f64..50.0) {
        let p = r.targets.ncols();
        let s = Array1::from(scales[..p].to_vec());
        let f = |a: &Array2<f64>| a * &s + shift;
        let scaled = RegressionBatch::new(f(&r.predictions), f(&r.targets), &r.baseline_means * &s + shift).unwrap();
        if let (Ok(a), Ok(b)) = (normalized_mse(&scaled), normalized_mse(&r)) {
            prop_assert!((a.sum - b.sum).abs() <= 1e-6 * b.sum.max(1.0));
        }
    }
}
