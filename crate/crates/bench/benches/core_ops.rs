//! Criterion benchmarks for the hot paths: title matching, vote
//! aggregation, the forecasters, NDCG, and PageRank.

use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use instrank_core::evalrank::{ndcg_at_n, GroundTruth};
use instrank_core::forecast::{
    fit_arima, naive_es_forecast, simple_es_forecast, simulate_arima, ArimaOrder, Ranking,
};
use instrank_core::ingest::{match_title, PaperRecord};
use instrank_core::netrank::{pagerank, AffiliationGraph};
use instrank_core::relscore::compute_rel_scores;
use instrank_core::AuthorAffiliationRecord;

fn title_corpus(size: usize) -> Vec<PaperRecord> {
    let words = ["deep", "graph", "sparse", "neural", "stream", "causal", "robust", "latent"];
    (0..size)
        .map(|i| PaperRecord {
            paper_id: format!("P{i:04}"),
            normalized_title: format!(
                "{} {} models for {} {} study {i}",
                words[i % 8],
                words[(i / 8) % 8],
                words[(i / 3) % 8],
                words[(i / 5) % 8]
            ),
            conference_id: "C1".into(),
            year: 2010 + (i % 6) as i32,
            page_count: Some(10),
            section_name: None,
        })
        .collect()
}

fn bench_title_matching(c: &mut Criterion) {
    let corpus = title_corpus(500);
    let query = "deep graph modls for sparse neural study 42";
    c.bench_function("match_title/500 titles soft", |b| {
        b.iter(|| match_title(black_box(query), black_box(&corpus), 0.4))
    });
}

fn bench_rel_scores(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let papers: Vec<PaperRecord> = (0..1000)
        .map(|i| PaperRecord {
            paper_id: format!("P{i:04}"),
            normalized_title: format!("title {i}"),
            conference_id: "C1".into(),
            year: 2000 + (i % 16),
            page_count: None,
            section_name: None,
        })
        .collect();
    let mut rows = Vec::new();
    for paper in &papers {
        for a in 0..rng.random_range(1..=5usize) {
            for m in 0..rng.random_range(1..=2usize) {
                rows.push(AuthorAffiliationRecord {
                    paper_id: paper.paper_id.clone(),
                    author_id: format!("{}_{a}", paper.paper_id),
                    affiliation_id: format!("X{}", (a * 13 + m * 7) % 40),
                });
            }
        }
    }
    let ids: BTreeSet<String> = papers.iter().map(|p| p.paper_id.clone()).collect();
    c.bench_function("compute_rel_scores/1000 papers", |b| {
        b.iter(|| compute_rel_scores(black_box(&papers), black_box(&rows), black_box(&ids)))
    });
}

fn bench_forecasters(c: &mut Criterion) {
    let series: Vec<f64> = (0..45).map(|i| (i as f64 * 0.7).sin().abs() * 3.0).collect();
    c.bench_function("naive_es_forecast/45 years", |b| {
        b.iter(|| naive_es_forecast(black_box(&series)))
    });
    c.bench_function("simple_es_forecast/45 years", |b| {
        b.iter(|| simple_es_forecast(black_box(&series), 0.4))
    });

    let long = simulate_arima(ArimaOrder::new(1, 1, 1), 0.6, 0.3, 200, 0.1, 33);
    c.bench_function("fit_arima/(1,1,1) n=200", |b| {
        b.iter(|| fit_arima(black_box(&long), ArimaOrder::new(1, 1, 1)))
    });
}

fn bench_ndcg(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let truth = GroundTruth {
        conference_id: "C1".into(),
        year: 2016,
        rel_by_affiliation: (0..200)
            .map(|i| (format!("A{i:03}"), rng.random_range(0.0..5.0)))
            .collect(),
    };
    let mut ids: Vec<String> = truth.rel_by_affiliation.keys().cloned().collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let prediction = Ranking {
        conference_id: "C1".into(),
        year: 2016,
        entries: ids.into_iter().map(|a| (a, 1.0)).collect(),
    };
    c.bench_function("ndcg_at_n/200 affiliations @20", |b| {
        b.iter(|| ndcg_at_n(black_box(&prediction), black_box(&truth), 20))
    });
}

fn bench_pagerank(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut graph = AffiliationGraph::default();
    for i in 0..150usize {
        graph.add_node(&format!("N{i:03}"));
    }
    for _ in 0..600 {
        let a = rng.random_range(0..150usize);
        let b = rng.random_range(0..150usize);
        if a != b {
            graph.add_edge(&format!("N{a:03}"), &format!("N{b:03}"), rng.random_range(1..6));
        }
    }
    c.bench_function("pagerank/150 nodes", |b| {
        b.iter(|| pagerank(black_box(&graph), 0.85, 1e-10))
    });
}

criterion_group!(
    benches,
    bench_title_matching,
    bench_rel_scores,
    bench_forecasters,
    bench_ndcg,
    bench_pagerank
);
criterion_main!(benches);
