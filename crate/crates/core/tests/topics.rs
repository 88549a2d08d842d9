use proptest::prelude::*;
use retrace_core::synthetic::{random_corpus, random_model, two_block_corpus, two_block_label};
use retrace_core::topics::{
    classical_mds, coherence, fit_lda, fit_lda_observed, jensen_shannon, relevance, select_k, topic_bundle, topic_map,
    LdaParams, TopicModel,
};

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&p, &q| x[p].total_cmp(&x[q]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for t in &idx[i..=j] {
                r[*t] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn block_purity(model: &TopicModel) -> f64 {
    let dom = model.dominant_topics();
    let mut agree = 0;
    for (id, &t) in model.doc_ids.iter().zip(&dom) {
        agree += usize::from(t == two_block_label(id));
    }
    let n = dom.len();
    agree.max(n - agree) as f64 / n as f64
}

#[test]
fn invariants_hold_after_every_sweep() {
    let corpus = random_corpus(25, 60, 30, 3);
    let params = LdaParams { iterations: 50, ..LdaParams::new(4, 11) };
    let mut sweeps = 0;
    fit_lda_observed(&corpus, &params, |s| {
        s.check_invariants().unwrap();
        sweeps += 1;
    })
    .unwrap();
    assert_eq!(sweeps, 50);
}

#[test]
fn fixed_seed_reruns_are_bit_identical() {
    let corpus = random_corpus(20, 40, 25, 5);
    let params = LdaParams { iterations: 100, ..LdaParams::new(3, 99) };
    let a = fit_lda(&corpus, &params).unwrap();
    let b = fit_lda(&corpus, &params).unwrap();
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    let c = fit_lda(&corpus, &LdaParams { seed: 100, ..params }).unwrap();
    assert_ne!(a.assignments, c.assignments);
}

#[test]
fn two_blocks_are_recovered_at_k2() {
    let corpus = two_block_corpus(20, 50, 7);
    let model = fit_lda(&corpus, &LdaParams::new(2, 42)).unwrap();
    assert!(block_purity(&model) >= 0.9, "purity {}", block_purity(&model));
}

#[test]
fn select_k_prefers_two_on_two_blocks() {
    let corpus = two_block_corpus(20, 50, 7);
    let report = select_k(&corpus, &[2, 3, 4, 5, 6], &LdaParams::new(2, 42), 10).unwrap();
    assert_eq!(report.chosen_k, 2, "{:?}", report.per_k);
    assert_eq!(report.per_k.len(), 5);
}

#[test]
fn coherence_matches_brute_force() {
    let corpus = random_corpus(15, 30, 20, 8);
    let model = random_model(&corpus, 3, 0.3, 8);
    let got = coherence(&model, &corpus, 6);
    let docs: Vec<Vec<usize>> = corpus.documents.iter().map(|d| d.tokens().collect()).collect();
    for t in 0..3 {
        let mut order: Vec<usize> = (0..corpus.vocab_size()).collect();
        order.sort_by(|&a, &b| model.phi[t][b].partial_cmp(&model.phi[t][a]).unwrap().then(a.cmp(&b)));
        let top = &order[..6];
        let mut s = 0.0;
        for i in 0..6 {
            for j in i + 1..6 {
                let df = docs.iter().filter(|d| d.contains(&top[j])).count() as f64;
                let co = docs.iter().filter(|d| d.contains(&top[i]) && d.contains(&top[j])).count() as f64;
                s += ((co + 1.0) / df).ln();
            }
        }
        assert!((got.per_topic[t] - s).abs() < 1e-12);
    }
}

#[test]
fn lambda_one_orders_by_phi_with_stable_ties() {
    let corpus = random_corpus(20, 80, 30, 2);
    for seed in 0..50 {
        let mut model = random_model(&corpus, 4, 0.5, seed);
        // coarse quantization creates ties in phi
        for row in &mut model.phi {
            for x in row.iter_mut() {
                *x = (*x * 200.0).round().max(1.0);
            }
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= z);
        }
        let ranking = relevance(&model, &corpus, 1.0, 80).unwrap();
        for (t, terms) in ranking.topics.iter().enumerate() {
            let mut expected: Vec<usize> = (0..80).collect();
            expected.sort_by(|&a, &b| model.phi[t][b].partial_cmp(&model.phi[t][a]).unwrap().then(a.cmp(&b)));
            let got: Vec<usize> = terms.iter().map(|r| r.index).collect();
            assert_eq!(got, expected, "seed {seed} topic {t}");
        }
    }
}

#[test]
fn lambda_zero_ranks_by_lift() {
    let corpus = random_corpus(20, 30, 30, 4);
    let model = random_model(&corpus, 2, 0.5, 4);
    let p = corpus.term_probabilities();
    let ranking = relevance(&model, &corpus, 0.0, 30).unwrap();
    let lifts: Vec<f64> = ranking.topics[0].iter().map(|r| model.phi[0][r.index] / p[r.index]).collect();
    assert!(lifts.windows(2).all(|w| w[0] >= w[1]));
    assert!(relevance(&model, &corpus, 1.5, 5).is_err());
}

#[test]
fn jsd_matrix_matches_brute_force() {
    let corpus = random_corpus(20, 50, 30, 6);
    for seed in 0..20 {
        let model = random_model(&corpus, 5, 0.2, seed);
        let map = topic_map(&model, &corpus);
        for i in 0..5 {
            for j in 0..5 {
                let (p, q) = (&model.phi[i], &model.phi[j]);
                let mut kl_p = 0.0;
                let mut kl_q = 0.0;
                for w in 0..p.len() {
                    let m = (p[w] + q[w]) / 2.0;
                    kl_p += p[w] * (p[w] / m).ln() / std::f64::consts::LN_2;
                    kl_q += q[w] * (q[w] / m).ln() / std::f64::consts::LN_2;
                }
                let brute = (0.5 * kl_p + 0.5 * kl_q).clamp(0.0, 1.0);
                assert!((map.distance_matrix[i][j] - brute).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mds_distances_track_jsd_ranks() {
    let corpus = random_corpus(30, 200, 40, 1);
    let mut sum = 0.0;
    for seed in 0..50 {
        let model = random_model(&corpus, 5, 0.1, seed);
        let map = topic_map(&model, &corpus);
        let (mut jsd, mut planar) = (vec![], vec![]);
        for i in 0..5 {
            for j in i + 1..5 {
                let (a, b) = (map.coords_2d[i], map.coords_2d[j]);
                jsd.push(map.distance_matrix[i][j]);
                planar.push(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        sum += spearman(&jsd, &planar);
    }
    assert!(sum / 50.0 >= 0.8, "mean rank correlation {}", sum / 50.0);
}

#[test]
fn mds_is_exact_for_planar_points() {
    let pts: [[f64; 2]; 4] = [[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [1.0, 1.0]];
    let d: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
        .collect();
    let c = classical_mds(&d);
    for i in 0..4 {
        for j in 0..4 {
            let e = ((c[i][0] - c[j][0]).powi(2) + (c[i][1] - c[j][1]).powi(2)).sqrt();
            assert!((e - d[i][j]).abs() < 1e-9);
        }
    }
}

#[test]
fn bundle_carries_shares_summing_to_one() {
    let corpus = random_corpus(20, 40, 30, 9);
    let model = fit_lda(&corpus, &LdaParams { iterations: 30, ..LdaParams::new(3, 1) }).unwrap();
    let bundle = topic_bundle(&model, &corpus, 0.3, 10).unwrap();
    let s: f64 = bundle.topic_map.topic_share.iter().sum();
    assert!((s - 1.0).abs() < 1e-9);
    assert_eq!(bundle.relevance.topics[0].len(), 10);
    assert_eq!(bundle.p_w.len(), corpus.vocab_size());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsd_is_symmetric_and_bounded(
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..20)
    ) {
        let (mut p, mut q): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
        let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
        prop_assume!(sp > 0.0 && sq > 0.0);
        p.iter_mut().for_each(|x| *x /= sp);
        q.iter_mut().for_each(|x| *x /= sq);
        let d = jensen_shannon(&p, &q);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - jensen_shannon(&q, &p)).abs() < 1e-12);
        prop_assert!(jensen_shannon(&p, &p).abs() < 1e-12);
    }

    #[test]
    fn short_fits_keep_distributions_normalized(seed in 0u64..1000, k in 2usize..5) {
        let corpus = random_corpus(8, 15, 12, seed);
        let model = fit_lda(&corpus, &LdaParams { iterations: 5, ..LdaParams::new(k, seed) }).unwrap();
        for row in model.phi.iter().chain(&model.theta) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
