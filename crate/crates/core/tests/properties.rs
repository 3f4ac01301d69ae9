//! Cross-module invariants: file-format round trips, cosine properties,
//! neighborhood structure, gradient correctness, Hamming metric behavior,
//! and Monte-Carlo checks on the LSH baseline and the PR curve.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ddh_core::data::{cosine_similarity, BinaryCodeSet, FeatureMatrix, LabelSet};
use ddh_core::eval::{hamming_distance, precision_recall_curve, retrieve};
use ddh_core::io;
use ddh_core::model::{lsh_init, HashModel};
use ddh_core::neighborhood::{
    build_pair_set, build_pairs, build_ranking_lists, expand_neighbors, label_precision,
};
use ddh_core::synth::{self, SynthConfig};
use ddh_core::train::{batch_gradient, batch_objective, TrainConfig};

fn f32_valued() -> impl Strategy<Value = f64> {
    // Values that survive the file format's f32 payload unchanged.
    (-1e6f32..1e6f32).prop_map(|v| v as f64)
}

proptest! {
    #[test]
    fn feature_file_round_trip(
        dim in 1usize..6,
        rows in prop::collection::vec(prop::collection::vec(f32_valued(), 5), 1..8)
    ) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r[..dim].to_vec()).collect();
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ddhf");
        io::write_features(&m, &path).unwrap();
        prop_assert_eq!(io::load_features(&path).unwrap(), m);
    }

    #[test]
    fn code_file_round_trip(
        code_len in 1usize..70,
        n in 1usize..6,
        seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..code_len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
            .collect();
        let codes = BinaryCodeSet::from_sign_rows(&rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ddhb");
        io::write_codes(&codes, &path).unwrap();
        let back = io::load_codes(&path).unwrap();
        prop_assert_eq!(&back, &codes);
        // Decoded values stay exactly +-1.
        for i in 0..n {
            prop_assert!(back.signs(i).iter().all(|&v| v == 1.0 || v == -1.0));
        }
    }

    #[test]
    fn label_file_round_trip(labels in prop::collection::vec(any::<i64>(), 1..40)) {
        let l = LabelSet::new(labels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.txt");
        io::write_labels(&l, &path).unwrap();
        prop_assert_eq!(io::load_labels(&path).unwrap(), l);
    }

    #[test]
    fn model_file_round_trip(dim in 1usize..5, code_len in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // f32-representable parameters round trip exactly.
        let weights: Vec<f64> = (0..dim * code_len)
            .map(|_| rng.random_range(-3.0f32..3.0f32) as f64)
            .collect();
        let bias: Vec<f64> = (0..code_len)
            .map(|_| rng.random_range(-3.0f32..3.0f32) as f64)
            .collect();
        let model = HashModel::new(dim, code_len, weights, bias).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ddhm");
        io::write_model(&model, &path).unwrap();
        prop_assert_eq!(io::load_model(&path).unwrap(), model);
    }

    #[test]
    fn pair_file_round_trip(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lists: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                (0..n as u32)
                    .filter(|_| rng.random::<bool>())
                    .collect()
            })
            .collect();
        let pairs = build_pair_set(&lists, n).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ddhp");
        io::write_pairs(&pairs, &path).unwrap();
        prop_assert_eq!(io::load_pairs(&path).unwrap(), pairs);
    }

    #[test]
    fn cosine_is_symmetric_and_bounded(
        a in prop::collection::vec(-100.0f64..100.0, 1..6),
        b in prop::collection::vec(-100.0f64..100.0, 1..6),
        k in 0.001f64..1000.0
    ) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        prop_assume!(a.iter().any(|&v| v != 0.0) && b.iter().any(|&v| v != 0.0));
        let ab = cosine_similarity(a, b).unwrap();
        let ba = cosine_similarity(b, a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab.abs() <= 1.0 + 1e-12);

        let scaled: Vec<f64> = a.iter().map(|v| v * k).collect();
        let self_sim = cosine_similarity(a, &scaled).unwrap();
        prop_assert!((self_sim - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn expansion_contains_own_list_without_duplicate_lists(
        n in 3usize..14,
        dim in 2usize..5,
        k1 in 1usize..4,
        k2 in 1usize..4,
        seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        prop_assume!(rows.iter().all(|r| r.iter().any(|&v| v != 0.0)));
        let features = FeatureMatrix::from_rows(&rows).unwrap();
        let rankings = build_ranking_lists(&features, k1).unwrap();

        let mut sorted_lists: Vec<Vec<u32>> = rankings
            .lists()
            .iter()
            .map(|l| {
                let mut s = l.clone();
                s.sort_unstable();
                s
            })
            .collect();
        let before = sorted_lists.len();
        sorted_lists.sort();
        sorted_lists.dedup();
        prop_assume!(sorted_lists.len() == before); // no duplicate lists

        let expanded = expand_neighbors(&rankings, k2).unwrap();
        for i in 0..n {
            for j in rankings.list(i) {
                prop_assert!(
                    expanded[i].binary_search(j).is_ok(),
                    "item {i}: {j} from L_i missing in expansion"
                );
            }
        }
    }

    #[test]
    fn pair_set_adjacency_is_an_undirected_graph(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lists: Vec<Vec<u32>> = (0..n)
            .map(|_| (0..n as u32).filter(|_| rng.random::<bool>()).collect())
            .collect();
        let pairs = build_pair_set(&lists, n).unwrap();
        for i in 0..n {
            prop_assert!(!pairs.is_positive(i, i));
            for &j in pairs.positives(i) {
                prop_assert!(pairs.is_positive(j as usize, i));
            }
        }
    }

    #[test]
    fn hamming_is_a_metric_on_random_triples(code_len in 1usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..code_len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
            .collect();
        let set = BinaryCodeSet::from_sign_rows(&rows).unwrap();
        let d = |a: usize, b: usize| hamming_distance(set.row(a), set.row(b)).unwrap();
        prop_assert_eq!(d(0, 0), 0);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2));
    }
}

#[test]
fn gradient_matches_central_finite_differences() {
    // The training module's signature property: analytic gradients against
    // central differences (h = 1e-5) on random small instances.
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let h = 1e-5;
    for trial in 0..20 {
        let d = rng.random_range(2..8);
        let l = rng.random_range(1..5);
        let n = rng.random_range(3..7);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let features = FeatureMatrix::from_rows(&rows).unwrap();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                if i < j && rng.random::<bool>() {
                    adj[i as usize].push(j);
                }
            }
        }
        let pairs = build_pair_set(&adj, n).unwrap();
        let model = HashModel::random_normal(d, l, 0.6, &mut rng);
        let cfg = TrainConfig {
            lambda1: 15.0,
            lambda2: 1e-5,
            ..TrainConfig::default()
        };
        let batch: Vec<usize> = (0..n).collect();

        let (dw, dc) = batch_gradient(&batch, &features, &pairs, &model, &cfg).unwrap();

        let check = |analytic: f64, perturbed: &dyn Fn(f64) -> HashModel| {
            let fp =
                batch_objective(&batch, &features, &pairs, &perturbed(h), &cfg).unwrap();
            let fm =
                batch_objective(&batch, &features, &pairs, &perturbed(-h), &cfg).unwrap();
            let numeric = (fp - fm) / (2.0 * h);
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                rel <= 1e-5,
                "trial {trial}: analytic {analytic} vs numeric {numeric} (rel {rel})"
            );
        };

        for idx in 0..d * l {
            check(dw[idx], &|eps| {
                let mut w = model.weights().to_vec();
                w[idx] += eps;
                HashModel::new(d, l, w, model.bias().to_vec()).unwrap()
            });
        }
        for idx in 0..l {
            check(dc[idx], &|eps| {
                let mut c = model.bias().to_vec();
                c[idx] += eps;
                HashModel::new(d, l, model.weights().to_vec(), c).unwrap()
            });
        }
    }
}

#[test]
fn encoded_code_similarity_stays_in_unit_range() {
    // (1/L) b_i^T b_j lies in [-1, 1], matching the range of s_ij.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..6).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let features = FeatureMatrix::from_rows(&rows).unwrap();
    let model = HashModel::random_normal(6, 12, 1.0, &mut rng);
    let codes = model.encode(&features).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            let ip: f64 = codes
                .signs(i)
                .iter()
                .zip(codes.signs(j))
                .map(|(a, b)| a * b)
                .sum();
            let sim = ip / codes.code_len() as f64;
            assert!((-1.0..=1.0).contains(&sim));
        }
    }
}

#[test]
fn lsh_codes_track_angular_distance() {
    // Monte-Carlo: over random unit-vector pairs, normalized Hamming
    // distance of LSH codes correlates positively with angular distance.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dim = 16;
    let model = lsh_init(dim, 64, 7).unwrap();
    let mut angles = Vec::new();
    let mut hams = Vec::new();
    for _ in 0..1000 {
        let a: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let b: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let angle = cosine_similarity(&a, &b).unwrap().clamp(-1.0, 1.0).acos();
        let codes = model
            .encode(&FeatureMatrix::from_rows(&[a, b]).unwrap())
            .unwrap();
        let ham = hamming_distance(codes.row(0), codes.row(1)).unwrap() as f64 / 64.0;
        angles.push(angle);
        hams.push(ham);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mh) = (mean(&angles), mean(&hams));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vh = 0.0;
    for (a, h) in angles.iter().zip(&hams) {
        cov += (a - ma) * (h - mh);
        va += (a - ma) * (a - ma);
        vh += (h - mh) * (h - mh);
    }
    let corr = cov / (va.sqrt() * vh.sqrt());
    assert!(corr > 0.5, "correlation {corr} too weak");
}

#[test]
fn positive_pairs_share_clusters_more_than_random_pairs() {
    let (features, labels) = synth::generate(&SynthConfig {
        clusters: 10,
        per_cluster: 20,
        dim: 32,
        ..SynthConfig::default()
    })
    .unwrap();
    let pairs = build_pairs(&features, 5, 3).unwrap();
    let coherence = label_precision(&pairs, &labels).unwrap();

    // Random-pair baseline: probability two random distinct items share a
    // cluster is (per_cluster - 1) / (n - 1).
    let random_rate = 19.0 / 199.0;
    assert!(
        coherence > random_rate,
        "pair coherence {coherence} not above random {random_rate}"
    );
}

#[test]
fn label_precision_degrades_as_k1_grows() {
    // Qualitative mirror of the constructed-label precision curve: on
    // clustered data, much larger K1 rakes in cross-cluster neighbors.
    let (features, labels) = synth::generate(&SynthConfig {
        clusters: 5,
        per_cluster: 30,
        dim: 16,
        noise: 2.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let precision_at = |k1: usize| {
        let rankings = build_ranking_lists(&features, k1).unwrap();
        let pairs = build_pair_set(rankings.lists(), features.n_items()).unwrap();
        label_precision(&pairs, &labels).unwrap()
    };
    let p5 = precision_at(5);
    let p29 = precision_at(29);
    let p60 = precision_at(60);
    assert!(p5 > p29 && p29 > p60, "precision not decreasing: {p5} {p29} {p60}");
}

#[test]
fn random_codes_on_balanced_classes_give_prior_level_precision() {
    // Monte-Carlo expectation: random codes on balanced 2-class data put
    // precision near the 0.5 class prior across the PR curve.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 400;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..32)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    let db = BinaryCodeSet::from_sign_rows(&rows).unwrap();
    let queries = BinaryCodeSet::from_sign_rows(&rows[..40]).unwrap();
    let labels: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
    let db_labels = LabelSet::new(labels.clone()).unwrap();
    let q_labels = LabelSet::new(labels[..40].to_vec()).unwrap();

    let result = retrieve(&queries, &db, n, false).unwrap();
    let curve = precision_recall_curve(&result, &q_labels, &db_labels).unwrap();
    // Skip the earliest ranks where averages are noisy.
    for &(_, precision) in &curve[20..] {
        assert!(
            (precision - 0.5).abs() <= 0.05,
            "precision {precision} drifted from the 0.5 prior"
        );
    }
}
