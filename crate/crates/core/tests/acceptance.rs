use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cover::analysis::{analogy_rank, drift_ratio, sparsity_report, specificity, Weighting, ZERO_THRESHOLD};
use cover::corpus::{build, load_corpus_dir, CorpusConfig, CovariateDocs};
use cover::eval::{
    cluster_purity, generate_synthetic, reconstruction_rmse, spearman, subsample_slices, CategoryBenchmark,
    SyntheticParams, WordVectors,
};
use cover::factorization::{
    gradients, init_model, objective, train, train_from, CovariateInit, TrainConfig,
};
use cover::io::{
    read_model, read_tensor_binary, read_tensor_text, write_model, write_tensor_binary, write_tensor_text,
    ModelBundle,
};
use cover::{CoocTensor, CoverModel, Entry, Matrix};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_tensor(rng: &mut ChaCha8Rng, n: usize, m: usize, target: usize, low: f64, high: f64) -> CoocTensor {
    let mut upper = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let target = target.min(n * (n + 1) / 2 * m);
    while upper.len() < target {
        let i = rng.random_range(0..n);
        let j = rng.random_range(i..n);
        let k = rng.random_range(0..m);
        if seen.insert((i, j, k)) {
            upper.push(Entry::new(i, j, k, rng.random_range(low..high)));
        }
    }
    CoocTensor::from_upper(n, m, upper).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize, d: usize) -> CoverModel {
    let mut fill = |r: usize, c: usize, lo: f64, hi: f64| {
        Matrix::from_vec(r, c, (0..r * c).map(|_| rng.random_range(lo..hi)).collect())
    };
    let v = fill(n, d, -1.0, 1.0);
    let c = fill(m, d, 0.1, 1.5);
    let b = fill(n, m, -0.5, 0.5);
    CoverModel::new(v, c, b).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (n, m, d) = (6, 3, 4);
    let tensor = random_tensor(&mut rng, n, m, 15, 0.5, 150.0);
    let model = random_model(&mut rng, n, m, d);
    let cfg = TrainConfig { d, ..TrainConfig::default() };
    let analytic = gradients(&model, &tensor, &cfg).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut coords = 0;
    let blocks: [(&str, fn(&mut CoverModel) -> &mut Matrix, &Matrix); 3] = [
        ("V", |m| &mut m.word_vectors, &analytic.word_vectors),
        ("C", |m| &mut m.covariate_weights, &analytic.covariate_weights),
        ("B", |m| &mut m.biases, &analytic.biases),
    ];
    for (_, pick, grad) in blocks {
        for idx in 0..grad.as_slice().len() {
            let mut plus = model.clone();
            pick(&mut plus).as_mut_slice()[idx] += h;
            let mut minus = model.clone();
            pick(&mut minus).as_mut_slice()[idx] -= h;
            let fd = (objective(&plus, &tensor, &cfg).unwrap() - objective(&minus, &tensor, &cfg).unwrap()) / (2.0 * h);
            worst = worst.max(rel(grad.as_slice()[idx], fd));
            coords += 1;
        }
    }
    outcome(
        worst < 1e-5,
        format!("{} stored entries, {coords} coordinates, max relative error {worst:.2e}", tensor.nnz()),
    )
}

fn glove_weight(x: f64) -> f64 {
    (x.min(100.0) / 100.0).powf(0.75)
}

fn glove_loss(w: &[Vec<f64>], b: &[f64], pairs: &[(usize, usize, f64)]) -> f64 {
    let mut loss = 0.0;
    for &(i, j, x) in pairs {
        let dot: f64 = w[i].iter().zip(&w[j]).map(|(a, c)| a * c).sum();
        let r = dot + b[i] + b[j] - x.ln();
        loss += glove_weight(x) * r * r;
    }
    loss
}

struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

fn adam(params: &mut [f64], grad: &[f64], mom: &mut Moments, t: i32, lr: f64) {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
    for p in 0..params.len() {
        mom.m[p] = b1 * mom.m[p] + (1.0 - b1) * grad[p];
        mom.v[p] = b2 * mom.v[p] + (1.0 - b2) * grad[p] * grad[p];
        let mh = mom.m[p] / (1.0 - b1.powi(t));
        let vh = mom.v[p] / (1.0 - b2.powi(t));
        params[p] -= lr * mh / (vh.sqrt() + eps);
    }
}

fn glove_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (n, d, epochs, lr) = (12, 5, 20, 0.01);
    let tensor = random_tensor(&mut rng, n, 1, 40, 0.5, 300.0);
    let cfg = TrainConfig {
        d,
        learning_rate: lr,
        epochs,
        seed: 3,
        freeze_covariates: true,
        deterministic: true,
        ..TrainConfig::default()
    };
    let cover = train(&tensor, &cfg).unwrap();

    let start = init_model(n, 1, d, 3, CovariateInit::default());
    let mut w: Vec<Vec<f64>> = (0..n).map(|i| start.word_vectors.row(i).to_vec()).collect();
    let mut b: Vec<f64> = (0..n).map(|i| start.biases[(i, 0)]).collect();
    let pairs: Vec<(usize, usize, f64)> =
        tensor.entries().iter().map(|e| (e.i as usize, e.j as usize, e.value)).collect();
    let mut wm = Moments { m: vec![0.0; n * d], v: vec![0.0; n * d] };
    let mut bm = Moments { m: vec![0.0; n], v: vec![0.0; n] };
    let mut trace = vec![glove_loss(&w, &b, &pairs)];
    for t in 1..=epochs as i32 {
        let mut gw = vec![0.0; n * d];
        let mut gb = vec![0.0; n];
        for &(i, j, x) in &pairs {
            let dot: f64 = w[i].iter().zip(&w[j]).map(|(a, c)| a * c).sum();
            let g = 2.0 * glove_weight(x) * (dot + b[i] + b[j] - x.ln());
            for s in 0..d {
                gw[i * d + s] += g * w[j][s];
                gw[j * d + s] += g * w[i][s];
            }
            gb[i] += g;
            gb[j] += g;
        }
        let mut flat: Vec<f64> = w.iter().flatten().copied().collect();
        adam(&mut flat, &gw, &mut wm, t, lr);
        for (i, row) in w.iter_mut().enumerate() {
            row.copy_from_slice(&flat[i * d..(i + 1) * d]);
        }
        adam(&mut b, &gb, &mut bm, t, lr);
        trace.push(glove_loss(&w, &b, &pairs));
    }

    let worst = cover.loss_trace.iter().zip(&trace).map(|(a, c)| rel(*a, *c)).fold(0.0, f64::max);
    let ones = cover.model.covariate_weights.as_slice().iter().all(|&c| c == 1.0);
    outcome(
        cover.loss_trace.len() == trace.len() && worst <= 1e-12 && ones,
        format!("{} epochs, max relative trace gap {worst:.2e}, covariates stayed all-ones: {ones}", epochs),
    )
}

fn recovery_config(seed: u64) -> TrainConfig {
    TrainConfig {
        d: 8,
        learning_rate: 0.05,
        epochs: 2000,
        seed,
        covariate_init: CovariateInit::NearOnes { spread: 0.3 },
        ..TrainConfig::default()
    }
}

fn synthetic_recovery() -> Outcome {
    let inst = generate_synthetic(&SyntheticParams::new(50, 4, 8, 0.2, 0.0, 1)).unwrap();
    let cfg = recovery_config(17);
    let out = train(&inst.tensor, &cfg).unwrap();
    let rmse = reconstruction_rmse(&out.model, &inst.tensor, &cfg).unwrap();
    outcome(
        rmse < 0.05 && out.final_loss() < out.initial_loss(),
        format!(
            "{} epochs, RMSE {rmse:.4}, objective {:.3e} -> {:.3e}",
            cfg.epochs,
            out.initial_loss(),
            out.final_loss()
        ),
    )
}

fn stuck_at_zero() -> Outcome {
    let inst = generate_synthetic(&SyntheticParams::new(50, 4, 8, 0.2, 0.0, 1)).unwrap();
    let cfg = recovery_config(23);
    let mut model = init_model(50, 4, 8, cfg.seed, cfg.covariate_init);
    for &(k, t) in &inst.mask {
        model.covariate_weights[(k, t)] = 0.0;
    }
    let out = train_from(model, &inst.tensor, &cfg).unwrap();
    let held = inst
        .mask
        .iter()
        .filter(|&&(k, t)| out.model.covariate_weights[(k, t)].to_bits() == 0)
        .count();
    outcome(
        held == inst.mask.len(),
        format!("{held}/{} masked weights bit-equal to 0 after {} epochs", inst.mask.len(), cfg.epochs),
    )
}

fn symmetries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..20 {
        let (n, m, d) = (rng.random_range(3..9), rng.random_range(1..4), rng.random_range(2..6));
        let tensor = random_tensor(&mut rng, n, m, 12, 0.5, 200.0);
        let model = random_model(&mut rng, n, m, d);
        let cfg = TrainConfig { d, ..TrainConfig::default() };
        let base = objective(&model, &tensor, &cfg).unwrap();
        let t = rng.random_range(0..d);
        for alpha in [0.5, 2.0, 10.0] {
            let mut scaled = model.clone();
            for i in 0..n {
                scaled.word_vectors.row_mut(i)[t] *= alpha;
            }
            for k in 0..m {
                scaled.covariate_weights.row_mut(k)[t] /= alpha;
            }
            worst = worst.max(rel(base, objective(&scaled, &tensor, &cfg).unwrap()));
            cases += 1;
        }
        let mut flipped = model.clone();
        for i in 0..n {
            flipped.word_vectors.row_mut(i)[t] = -flipped.word_vectors.row(i)[t];
        }
        worst = worst.max(rel(base, objective(&flipped, &tensor, &cfg).unwrap()));
        cases += 1;
    }
    outcome(worst <= 1e-12, format!("{cases} transformed instances, max relative change {worst:.2e}"))
}

fn null_control() -> Outcome {
    let mut params = SyntheticParams::new(100, 1, 10, 0.0, 0.0, 4);
    params.bias_mean = 2.5;
    let inst = generate_synthetic(&params).unwrap();
    let copies = subsample_slices(&inst.tensor, 0, 3, 9).unwrap();
    let cfg = TrainConfig {
        d: 50,
        learning_rate: 0.01,
        epochs: 300,
        seed: 5,
        covariate_init: CovariateInit::NearOnes { spread: 0.3 },
        ..TrainConfig::default()
    };
    let out = train(&copies, &cfg).unwrap();
    let report = sparsity_report(&out.model, ZERO_THRESHOLD).unwrap();
    outcome(
        report.counts.iter().all(|&c| c <= 2),
        format!(
            "sparse coordinates per copy {:?} (d=50), objective {:.3e} -> {:.3e}",
            report.counts,
            out.initial_loss(),
            out.final_loss()
        ),
    )
}

fn text_bytes(t: &CoocTensor) -> Vec<u8> {
    let mut buf = Vec::new();
    write_tensor_text(t, &mut buf).unwrap();
    buf
}

fn corpus_golden() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let golden = std::fs::read(root.join("tests/golden/demo_cooc.txt")).unwrap();
    let corpus = load_corpus_dir(&root.join("data/demo-corpus")).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (_, serial) = single.install(|| build(&corpus, &CorpusConfig::default())).unwrap();
    let (_, parallel) = build(&corpus, &CorpusConfig::default()).unwrap();
    let demo_ok = text_bytes(&serial) == golden && text_bytes(&parallel) == golden;

    let abca = vec![CovariateDocs::new("k", vec!["a b c a".split(' ').map(String::from).collect()])];
    let (vocab, t) = build(&abca, &CorpusConfig::default()).unwrap();
    let id = |w: &str| vocab.word_id(w).unwrap();
    let (a, b, c) = (id("a"), id("b"), id("c"));
    let hand = t.get(a, b, 0) == 1.5
        && t.get(a, c, 0) == 1.5
        && t.get(b, c, 0) == 1.0
        && t.get(a, a, 0) == 2.0 / 3.0
        && t.nnz() == 7;
    let abca_golden = std::fs::read(root.join("tests/golden/abca_cooc.txt")).unwrap();
    let abca_ok = text_bytes(&t) == abca_golden;
    outcome(
        demo_ok && hand && abca_ok,
        format!(
            "demo tensor nnz {} matches golden: {demo_ok}; [a,b,c,a] = 1.5/1.5/1.0/2/3: {hand}, golden: {abca_ok}",
            serial.nnz()
        ),
    )
}

fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut agree = 0;
    for _ in 0..100 {
        let len = rng.random_range(2..=8);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(0..5) as f64 * 0.5).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0f64).round()).collect();
        match (spearman(&x, &y).ok(), brute_spearman(&x, &y)) {
            (Some(a), Some(b)) if a.to_bits() == b.to_bits() => agree += 1,
            (None, None) => agree += 1,
            _ => {}
        }
    }

    let words: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
    let labels: Vec<(String, String)> =
        words.iter().enumerate().map(|(i, w)| (w.clone(), if i < 3 { "x" } else { "y" }.to_string())).collect();
    let bench = CategoryBenchmark::new(labels).unwrap();
    let far = Matrix::from_rows(
        &(0..6)
            .map(|i| if i < 3 { vec![0.0, i as f64 * 0.01] } else { vec![100.0, i as f64 * 0.01] })
            .collect::<Vec<_>>(),
    );
    let separable = cluster_purity(&WordVectors::new(words.clone(), far), &bench, 1, 10).unwrap();
    let same = Matrix::from_rows(&vec![vec![0.5, -0.5]; 6]);
    let degenerate = cluster_purity(&WordVectors::new(words, same), &bench, 1, 10).unwrap();
    outcome(
        agree == 100 && separable == 1.0 && degenerate == 0.5,
        format!("spearman bit-equal on {agree}/100 lists; purity separable {separable}, degenerate {degenerate}"),
    )
}

fn calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (n, m, d) = (20, 3, 6);
    let mut model = random_model(&mut rng, n, m, d);
    model.covariate_weights.fill(1.0);
    let spec_ok = (0..n).all(|i| specificity(&model, i).unwrap() == 0.0);
    let mut drift_ok = true;
    for k in 0..m {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                drift_ok &= drift_ratio(&model, i, j, k).unwrap() == 1.0;
            }
        }
    }
    let mut analogy_ok = true;
    for (a, b, c) in [(0, 1, 2), (3, 7, 11), (19, 4, 8)] {
        let base = analogy_rank(&model, a, b, c, Weighting::Base, None).unwrap();
        for k in 0..m {
            let cov = analogy_rank(&model, a, b, c, Weighting::Covariate(k), None).unwrap();
            analogy_ok &= cov == base;
        }
    }
    outcome(
        spec_ok && drift_ok && analogy_ok,
        format!("specificity 0: {spec_ok}, drift ratios 1: {drift_ok}, analogy ranks equal base: {analogy_ok}"),
    )
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

fn same_tensor(a: &CoocTensor, b: &CoocTensor) -> bool {
    a.n() == b.n()
        && a.m() == b.m()
        && a.entries().len() == b.entries().len()
        && a.entries()
            .iter()
            .zip(b.entries())
            .all(|(x, y)| (x.i, x.j, x.k, x.value.to_bits()) == (y.i, y.j, y.k, y.value.to_bits()))
}

fn awkward(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => f64::MIN_POSITIVE * rng.random_range(1.0..2.0),
        1 => 1e300 * rng.random_range(1.0..100.0),
        2 => 5e-324 * rng.random_range(1..1000) as f64,
        3 => rng.random_range(1..50) as f64,
        _ => rng.random::<f64>() * 10f64.powi(rng.random_range(-12..12)),
    }
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let dir = tempfile::tempdir().unwrap();
    let mut ok = 0;
    for round in 0..500 {
        let (n, m) = (rng.random_range(1..12), rng.random_range(1..4));
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..m {
                    if rng.random_bool(0.3) {
                        let v = awkward(&mut rng);
                        if v > 0.0 {
                            upper.push(Entry::new(i, j, k, v));
                        }
                    }
                }
            }
        }
        let tensor = CoocTensor::from_upper(n, m, upper).unwrap();
        let text = read_tensor_text(&text_bytes(&tensor)[..]).unwrap();
        let mut bin = Vec::new();
        write_tensor_binary(&tensor, &mut bin).unwrap();
        let binary = read_tensor_binary(&bin[..]).unwrap();

        let d = rng.random_range(1..6);
        let mut model = random_model(&mut rng, n, m, d);
        for x in model.word_vectors.as_mut_slice() {
            *x = match rng.random_range(0..4) {
                0 => -awkward(&mut rng),
                1 => awkward(&mut rng),
                2 => -0.0,
                _ => *x,
            };
        }
        let bundle = ModelBundle {
            words: (0..n).map(|i| format!("w{round}_{i}")).collect(),
            covariates: (0..m).map(|k| format!("c{k}")).collect(),
            model,
            config: TrainConfig { d, seed: round, ..TrainConfig::default() },
            loss_trace: (0..rng.random_range(0..4)).map(|_| awkward(&mut rng)).collect(),
        };
        let path: PathBuf = dir.path().join(format!("m{}", round % 4));
        write_model(&path, &bundle).unwrap();
        let back = read_model(&path).unwrap();
        let model_ok = back.words == bundle.words
            && back.covariates == bundle.covariates
            && back.config == bundle.config
            && bits(&back.loss_trace) == bits(&bundle.loss_trace)
            && bits(back.model.word_vectors.as_slice()) == bits(bundle.model.word_vectors.as_slice())
            && bits(back.model.covariate_weights.as_slice()) == bits(bundle.model.covariate_weights.as_slice())
            && bits(back.model.biases.as_slice()) == bits(bundle.model.biases.as_slice());
        if same_tensor(&tensor, &text) && same_tensor(&tensor, &binary) && model_ok {
            ok += 1;
        }
    }
    outcome(ok == 500, format!("{ok}/500 tensor (text and binary) and model round-trips bit-exact"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("gradient correctness", gradient_check, 1),
        ("GloVe reduction", glove_reduction, 5),
        ("synthetic recovery", synthetic_recovery, 60),
        ("stuck-at-zero", stuck_at_zero, 60),
        ("symmetries", symmetries, 1),
        ("null control", null_control, 120),
        ("corpus golden", corpus_golden, 10),
        ("metric oracles", metric_oracles, 1),
        ("analysis calibration", calibration, 1),
        ("I/O round-trips", round_trips, 10),
    ];
    let mut failed = 0;
    for (n, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{:>2}. {} {name}: {} [{:.2}s of {budget}s]",
            n + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
