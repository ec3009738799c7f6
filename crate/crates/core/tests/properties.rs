use std::collections::HashMap;

use proptest::prelude::*;

use cover::analysis::{drift_ratio, Weighting};
use cover::corpus::{accumulate_cooccurrence, build, build_vocab, prune_tensor, CorpusConfig, CovariateDocs};
use cover::eval::{cluster_purity, spearman, subsample_slices, CategoryBenchmark, WordVectors};
use cover::factorization::{objective, slice_objective, TrainConfig};
use cover::io::{read_tensor_binary, read_tensor_text, write_tensor_binary, write_tensor_text};
use cover::{CoocTensor, CoverModel, Entry, Matrix};

const WORDS: [&str; 6] = ["ant", "bee", "cat", "dog", "eel", "fox"];

fn corpus_strategy() -> impl Strategy<Value = Vec<CovariateDocs>> {
    let doc = prop::collection::vec(prop::sample::select(WORDS.to_vec()), 0..14);
    let docs = prop::collection::vec(doc, 1..4);
    prop::collection::vec(docs, 1..4).prop_map(|covs| {
        covs.into_iter()
            .enumerate()
            .map(|(k, docs)| {
                let docs = docs.into_iter().map(|d| d.into_iter().map(String::from).collect()).collect();
                CovariateDocs::new(format!("cov{k}"), docs)
            })
            .collect()
    })
}

fn tensor_strategy() -> impl Strategy<Value = CoocTensor> {
    (1usize..7, 1usize..4).prop_flat_map(|(n, m)| {
        let cell = (0..n, 0..n, 0..m, 0.01f64..500.0);
        prop::collection::vec(cell, 1..25).prop_map(move |cells| {
            let mut upper: HashMap<(usize, usize, usize), f64> = HashMap::new();
            for (i, j, k, v) in cells {
                upper.insert((i.min(j), i.max(j), k), v);
            }
            let entries = upper.into_iter().map(|((i, j, k), v)| Entry::new(i, j, k, v)).collect();
            CoocTensor::from_upper(n, m, entries).unwrap()
        })
    })
}

fn model_for(n: usize, m: usize, d: usize, values: &[f64]) -> CoverModel {
    let mut it = values.iter().cycle().copied();
    let v = Matrix::from_vec(n, d, (0..n * d).map(|_| it.next().unwrap()).collect());
    let c = Matrix::from_vec(m, d, (0..m * d).map(|_| it.next().unwrap().abs() + 0.05).collect());
    let b = Matrix::from_vec(n, m, (0..n * m).map(|_| 0.3 * it.next().unwrap()).collect());
    CoverModel::new(v, c, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_symmetric(corpus in corpus_strategy(), window in 1usize..5) {
        let cfg = CorpusConfig { window, ..CorpusConfig::default() };
        if let Ok((_, t)) = build(&corpus, &cfg) {
            for e in t.entries() {
                prop_assert_eq!(t.get(e.j as usize, e.i as usize, e.k as usize).to_bits(), e.value.to_bits());
            }
        }
    }

    #[test]
    fn slice_mass_matches_brute_force(corpus in corpus_strategy(), window in 1usize..5) {
        let cfg = CorpusConfig { window, ..CorpusConfig::default() };
        let Ok(vocab) = build_vocab(&corpus, &cfg) else { return Ok(()) };
        let t = accumulate_cooccurrence(&corpus, &vocab, &cfg).unwrap();
        for (k, cov) in corpus.iter().enumerate() {
            let mut expected = 0.0;
            for doc in &cov.docs {
                for a in 0..doc.len() {
                    for b in a + 1..doc.len().min(a + window + 1) {
                        expected += 2.0 / (b - a) as f64;
                    }
                }
            }
            let got: f64 = t.slice(k).iter().map(|e| e.value).sum();
            prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn pruning_keeps_a_subset(t in tensor_strategy(), min in 0.0f64..300.0) {
        let p = prune_tensor(&t, min);
        prop_assert!(p.entries().iter().all(|e| e.value >= min));
        for e in t.entries() {
            let kept = p.get(e.i as usize, e.j as usize, e.k as usize);
            let expected = if e.value >= min { e.value } else { 0.0 };
            prop_assert_eq!(kept, expected);
        }
    }

    #[test]
    fn slices_partition_the_objective(t in tensor_strategy(), d in 1usize..5, vals in prop::collection::vec(-1.0f64..1.0, 8)) {
        let model = model_for(t.n(), t.m(), d, &vals);
        let cfg = TrainConfig { d, ..TrainConfig::default() };
        let total = objective(&model, &t, &cfg).unwrap();
        let parts: f64 = (0..t.m()).map(|k| slice_objective(&model, &t, k, &cfg).unwrap()).sum();
        prop_assert_eq!(total.to_bits(), parts.to_bits());
    }

    #[test]
    fn rescaling_and_sign_flip_leave_objective(
        t in tensor_strategy(),
        d in 1usize..5,
        vals in prop::collection::vec(-1.0f64..1.0, 8),
        alpha in 0.1f64..10.0,
    ) {
        let model = model_for(t.n(), t.m(), d, &vals);
        let cfg = TrainConfig { d, ..TrainConfig::default() };
        let base = objective(&model, &t, &cfg).unwrap();
        let mut moved = model.clone();
        for i in 0..t.n() {
            let row = moved.word_vectors.row_mut(i);
            row[0] *= -alpha;
        }
        for k in 0..t.m() {
            moved.covariate_weights.row_mut(k)[0] /= alpha;
        }
        let after = objective(&moved, &t, &cfg).unwrap();
        prop_assert!((after - base).abs() <= 1e-10 * base.max(1e-300));
    }

    #[test]
    fn tensor_round_trips(t in tensor_strategy()) {
        let mut text = Vec::new();
        write_tensor_text(&t, &mut text).unwrap();
        prop_assert_eq!(&read_tensor_text(&text[..]).unwrap(), &t);
        let mut bin = Vec::new();
        write_tensor_binary(&t, &mut bin).unwrap();
        prop_assert_eq!(&read_tensor_binary(&bin[..]).unwrap(), &t);
    }

    #[test]
    fn subsampling_conserves_rounded_counts(t in tensor_strategy(), copies in 2usize..5, seed in 0u64..1000) {
        let sub = subsample_slices(&t, 0, copies, seed).unwrap_or_else(|_| CoocTensor::empty(t.n(), copies));
        for e in t.slice(0) {
            let (i, j) = (e.i as usize, e.j as usize);
            let total: f64 = (0..copies).map(|c| sub.get(i, j, c)).sum();
            prop_assert_eq!(total, e.value.round().max(1.0));
        }
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        pairs in prop::collection::vec((-50i32..50, -50i32..50), 2..12),
        shift in -10.0f64..10.0,
    ) {
        let pred: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let gold: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let warped: Vec<f64> = pred.iter().map(|x| (x / 10.0).exp() + shift).collect();
        match (spearman(&pred, &gold), spearman(&warped, &gold)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "mismatch {:?}", other),
        }
    }

    #[test]
    fn drift_ratio_is_symmetric(vals in prop::collection::vec(-1.0f64..1.0, 30), k in 0usize..2) {
        let model = model_for(5, 2, 3, &vals);
        for i in 0..5 {
            for j in 0..5 {
                if let (Ok(a), Ok(b)) = (drift_ratio(&model, i, j, k), drift_ratio(&model, j, i, k)) {
                    prop_assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn base_weighting_matches_word_vectors(vals in prop::collection::vec(-1.0f64..1.0, 12)) {
        let model = model_for(4, 2, 3, &vals);
        for i in 0..4 {
            prop_assert_eq!(Weighting::Base.embed(&model, i), model.word_vectors.row(i).to_vec());
        }
    }
}

fn clustered_points(seed: u64) -> (Vec<String>, Vec<Vec<f64>>, CategoryBenchmark) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let centers = [[5.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 5.0]];
    let mut words = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for p in 0..5 {
            let w = format!("w{c}_{p}");
            points.push(center.iter().map(|x| x + rng.random_range(-0.3..0.3)).collect());
            labels.push((w.clone(), format!("cat{}", if p == 4 { (c + 1) % 3 } else { c })));
            words.push(w);
        }
    }
    (words, points, CategoryBenchmark::new(labels).unwrap())
}

#[test]
fn purity_is_rotation_and_translation_invariant() {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for trial in 0..5 {
        let (words, points, bench) = clustered_points(trial);
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        let base = cluster_purity(&WordVectors::new(words.clone(), Matrix::from_vec(15, 3, flat)), &bench, 3, 10).unwrap();

        let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let q = g.qr().q();
        let offset = [rng.random_range(-20.0..20.0), 3.0, -7.5];
        let moved: Vec<f64> = points
            .iter()
            .flat_map(|p| {
                let v = &q * nalgebra::DVector::from_column_slice(p);
                (0..3).map(move |t| v[t] + offset[t]).collect::<Vec<_>>()
            })
            .collect();
        let after = cluster_purity(&WordVectors::new(words, Matrix::from_vec(15, 3, moved)), &bench, 3, 10).unwrap();
        assert_eq!(base, after);
        assert_eq!(base, 12.0 / 15.0);
    }
}
