//! Subcommand implementations. Each one wires library operations together,
//! prints a short summary to stdout, and leaves error classification to
//! `CliError`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use instrank_core::evalrank::{
    cross_validate, default_alpha_grid, grid_search_alpha, ndcg_at_n, read_prediction_tsv,
    GroundTruth,
};
use instrank_core::forecast::{
    rank_affiliations, ArimaOrder, ModelSpec, Ranking, DEFAULT_ARIMA_CANDIDATES,
};
use instrank_core::ingest::{
    self, ingest_corpus, match_title, normalize_title, read_affiliations_tsv, read_papers_tsv,
    read_paper_id_list, IngestError, PaperRecord, TitleMatch,
};
use instrank_core::netrank::{build_graph, pagerank, write_pagerank_tsv};
use instrank_core::paperfilter::{
    classify_section, combine_filters, read_dictionary, read_page_labels, read_proceedings,
    read_section_labels, rule_filter, train_page_model, train_text_classifier, PageTrainConfig,
    PaperVotes, Policy, TextTrainConfig, DEFAULT_DICTIONARY,
};
use instrank_core::relscore::{build_series, compute_rel_scores, RelScoreSeries, RelScoreTable};

use crate::config::RunConfig;
use crate::error::{CliError, ErrorKind};
use crate::{
    CvArgs, EvaluateArgs, FilterPapersArgs, ForecastArgs, IngestArgs, NetrankArgs, PipelineArgs,
    RelscoreArgs,
};

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", parent.display())))?;
    }
    let file = File::create(path)
        .map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn parse_conferences(raw: &str) -> Result<BTreeSet<String>, CliError> {
    let set: BTreeSet<String> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if set.is_empty() {
        return Err(CliError::format("no conference ids given"));
    }
    Ok(set)
}

fn parse_years(raw: &str) -> Result<Vec<i32>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<i32>()
                .map_err(|_| CliError::format(format!("bad year {s:?}")))
        })
        .collect()
}

fn parse_orders(raw: &str) -> Result<Vec<ArimaOrder>, CliError> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<ArimaOrder>().map_err(CliError::format))
        .collect()
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    if raw.trim() == "default" {
        return Ok(default_alpha_grid());
    }
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::format(format!("bad grid value {s:?}")))
        })
        .collect()
}

fn build_model_spec(
    model: Option<&str>,
    alpha: Option<f64>,
    orders: Option<&str>,
) -> Result<ModelSpec, CliError> {
    let spec = match model.unwrap_or("naive-es") {
        "naive-es" | "naive" => ModelSpec::NaiveEs,
        "es" | "simple-es" => {
            let alpha = alpha
                .ok_or_else(|| CliError::format("--model es requires --alpha"))?;
            ModelSpec::SimpleEs { alpha }
        }
        "arima" => {
            let candidate_orders = match orders {
                Some(raw) => parse_orders(raw)?,
                None => DEFAULT_ARIMA_CANDIDATES.to_vec(),
            };
            ModelSpec::Arima { candidate_orders }
        }
        "last3" | "last3-avg" => ModelSpec::Last3Avg,
        other => {
            return Err(CliError::format(format!(
                "unknown model {other:?}; expected naive-es, es, arima, or last3"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_policy(raw: &str) -> Result<Policy, CliError> {
    match raw {
        "unanimous" => Ok(Policy::Unanimous),
        "majority" => Ok(Policy::Majority),
        other => Err(CliError::format(format!(
            "unknown policy {other:?}; expected unanimous or majority"
        ))),
    }
}

/// Zero-filled series ending the year before the prediction target, one
/// per affiliation that ever scored for the conference.
fn series_for_target(
    table: &RelScoreTable,
    conference_id: &str,
    year: i32,
) -> Result<Vec<RelScoreSeries>, CliError> {
    let (first, _) = table.year_range(conference_id).ok_or_else(|| {
        CliError::new(
            ErrorKind::Model,
            format!("no relevance scores for conference {conference_id:?}"),
        )
    })?;
    if first > year - 1 {
        return Err(CliError::new(
            ErrorKind::Model,
            format!("no history before {year} for conference {conference_id:?}"),
        ));
    }
    Ok(table
        .affiliations(conference_id)
        .iter()
        .map(|affiliation| build_series(table, conference_id, affiliation, first, year - 1))
        .collect())
}

pub fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let conferences = parse_conferences(&args.conferences)?;
    let corpus = ingest_corpus(&args.papers, &args.paa, &conferences, args.malformed_tolerance)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", args.out_dir.display())))?;

    let papers_out = args.out_dir.join("papers.tsv");
    let mut out = create_output(&papers_out)?;
    ingest::write_papers_tsv(&corpus.papers, &mut out)?;
    out.flush()?;

    let paa_out = args.out_dir.join("paper_author_affiliations.tsv");
    let mut out = create_output(&paa_out)?;
    ingest::write_affiliations_tsv(&corpus.affiliations, &mut out)?;
    out.flush()?;

    let r = &corpus.report;
    println!(
        "papers: {} rows, {} kept, {} filtered out, {} malformed, {} duplicate ids",
        r.papers.rows, r.papers.kept, r.papers.filtered_out, r.papers.malformed, r.papers.duplicates
    );
    println!(
        "attributions: {} rows, {} kept, {} malformed, {} duplicates, {} orphaned",
        r.affiliations.rows,
        r.affiliations.kept,
        r.affiliations.malformed,
        r.affiliations.duplicates,
        r.affiliations.orphaned
    );
    println!("wrote {} and {}", papers_out.display(), paa_out.display());
    Ok(())
}

struct FilterOutcome {
    full_ids: Vec<String>,
    review_queue: Vec<PaperVotes>,
    records: usize,
    rejected_outright: usize,
    matched: usize,
    unmatched: usize,
    rejected_after_vote: usize,
    malformed: usize,
}

struct FilterSettings<'a> {
    dictionary: &'a [String],
    policy: Policy,
    match_threshold: f64,
    trees: usize,
    seed: u64,
}

/// Shared filter flow: votes per proceedings record, title matching for
/// anything that might be a full paper, then combined decisions.
fn run_filter(
    proceedings: &Path,
    corpus: &[PaperRecord],
    section_labels: &Path,
    page_labels: &Path,
    settings: &FilterSettings,
) -> Result<FilterOutcome, CliError> {
    let (records, malformed) = read_proceedings(proceedings)?;
    let sections = read_section_labels(section_labels)?;
    let pages = read_page_labels(page_labels)?;
    let text_model = train_text_classifier(&sections, &TextTrainConfig::default())?;
    let page_model = train_page_model(
        &pages,
        &PageTrainConfig {
            trees: settings.trees,
            seed: settings.seed,
        },
    )?;

    let mut rejected_outright = 0;
    let mut unmatched = 0;
    // best match per paper id: minimal (cost, query title), as in dedupe
    let mut best: BTreeMap<String, (TitleMatch, PaperVotes)> = BTreeMap::new();
    for record in &records {
        let rule_vote = rule_filter(&record.section_name, settings.dictionary);
        let text_vote = classify_section(&text_model, &record.section_name);
        let page_vote = page_model.predict(record.page_count);
        if !rule_vote && !text_vote && !page_vote {
            rejected_outright += 1;
            continue;
        }
        let query = normalize_title(&record.title);
        let title_match = match match_title(&query, corpus, settings.match_threshold) {
            Ok(m) => m,
            Err(IngestError::NoMatch { .. }) => {
                unmatched += 1;
                continue;
            }
            Err(other) => return Err(other.into()),
        };
        let votes = PaperVotes {
            paper_id: title_match.matched_paper_id.clone(),
            section_name: record.section_name.clone(),
            page_count: record.page_count,
            rule_vote,
            text_vote,
            page_vote,
        };
        match best.entry(title_match.matched_paper_id.clone()) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert((title_match, votes));
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let (kept, _) = slot.get();
                if (title_match.cost, &title_match.query_title) < (kept.cost, &kept.query_title) {
                    slot.insert((title_match, votes));
                }
            }
        }
    }
    let matched = best.len();
    let votes: Vec<PaperVotes> = best.into_values().map(|(_, v)| v).collect();
    let decisions = combine_filters(&votes, settings.policy);
    Ok(FilterOutcome {
        rejected_after_vote: decisions.rejected.len(),
        full_ids: decisions.full_papers,
        review_queue: decisions.review_queue,
        records: records.len(),
        rejected_outright,
        matched,
        unmatched,
        malformed,
    })
}

pub fn filter_papers(args: FilterPapersArgs, seed: u64) -> Result<(), CliError> {
    let (corpus, _) = read_papers_tsv(&args.corpus_papers, None, 1.0)?;
    let dictionary = match &args.dictionary {
        Some(path) => read_dictionary(path)?,
        None => DEFAULT_DICTIONARY.iter().map(|s| s.to_string()).collect(),
    };
    let policy = parse_policy(&args.policy)?;
    let outcome = run_filter(
        &args.proceedings,
        &corpus,
        &args.section_labels,
        &args.page_labels,
        &FilterSettings {
            dictionary: &dictionary,
            policy,
            match_threshold: args.match_threshold,
            trees: args.trees,
            seed,
        },
    )?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", args.out_dir.display())))?;
    let ids_path = args.out_dir.join("full_papers.txt");
    let mut out = create_output(&ids_path)?;
    instrank_core::paperfilter::write_full_paper_ids(&outcome.full_ids, &mut out)?;
    out.flush()?;
    let queue_path = args.out_dir.join("review_queue.tsv");
    let mut out = create_output(&queue_path)?;
    instrank_core::paperfilter::write_review_queue(&outcome.review_queue, &mut out)?;
    out.flush()?;

    println!(
        "{} records ({} malformed skipped): {} rejected outright, {} matched, {} unmatched",
        outcome.records, outcome.malformed, outcome.rejected_outright, outcome.matched, outcome.unmatched
    );
    println!(
        "{} full papers -> {}, {} rejected after voting, {} queued -> {}",
        outcome.full_ids.len(),
        ids_path.display(),
        outcome.rejected_after_vote,
        outcome.review_queue.len(),
        queue_path.display()
    );
    Ok(())
}

pub fn relscore(args: RelscoreArgs) -> Result<(), CliError> {
    let (papers, _) = read_papers_tsv(&args.papers, None, 1.0)?;
    let retained: BTreeSet<String> = papers.iter().map(|p| p.paper_id.clone()).collect();
    let (affiliations, _) = read_affiliations_tsv(&args.paa, &retained, 1.0)?;
    let full_ids = read_paper_id_list(&args.full_papers)?;
    let table = compute_rel_scores(&papers, &affiliations, &full_ids)?;
    let mut out = create_output(&args.out)?;
    table.write_tsv(&mut out)?;
    out.flush()?;
    println!(
        "{} (conference, year, affiliation) scores -> {}",
        table.len(),
        args.out.display()
    );
    Ok(())
}

fn write_prediction(ranking: &Ranking, path: &Path) -> Result<(), CliError> {
    let mut out = create_output(path)?;
    ranking.write_tsv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn forecast(args: ForecastArgs) -> Result<(), CliError> {
    let spec = build_model_spec(Some(&args.model), args.alpha, args.orders.as_deref())?;
    let table = RelScoreTable::read_tsv(&args.rel_scores)?;
    let series = series_for_target(&table, &args.conference, args.year)?;
    let (ranking, diagnostics) = rank_affiliations(&series, &spec, args.year)?;
    write_prediction(&ranking, &args.out)?;
    println!(
        "{}: {} affiliations ranked for {} ({} fallbacks) -> {}",
        spec,
        ranking.entries.len(),
        args.year,
        diagnostics.fallbacks,
        args.out.display()
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let prediction = read_prediction_tsv(&args.prediction)?;
    let truth = GroundTruth::read_tsv(&args.truth)?;
    let score = ndcg_at_n(&prediction, &truth, args.n)?;
    println!("NDCG@{} = {:.6}", args.n, score);
    Ok(())
}

pub fn cv(args: CvArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let rel_scores = config
        .path(args.rel_scores, "rel_scores")
        .ok_or_else(|| CliError::format("--rel-scores is required"))?;
    let conference = config
        .string(args.conference, "conference")
        .ok_or_else(|| CliError::format("--conference is required"))?;
    let years_raw = config
        .string(args.years, "years")
        .ok_or_else(|| CliError::format("--years is required"))?;
    let years = parse_years(&years_raw)?;
    let n = config.parsed(args.n, "n")?.unwrap_or(20);
    let grid_raw = config.string(args.grid, "grid");
    let model = config.string(args.model, "model");
    let alpha = config.parsed(args.alpha, "alpha")?;
    let orders = config.string(args.orders, "orders");

    let table = RelScoreTable::read_tsv(&rel_scores)?;
    let series = table.series_for_conference(&conference);

    let report = if let Some(raw) = grid_raw {
        let grid = parse_grid(&raw)?;
        let (best_alpha, report) = grid_search_alpha(&series, &conference, &years, n, &grid)?;
        println!("grid search over {} alphas: best alpha = {}", grid.len(), best_alpha);
        report
    } else {
        let spec = build_model_spec(model.as_deref(), alpha, orders.as_deref())?;
        cross_validate(&series, &spec, &conference, &years, n)?
    };
    print!("{}", report.render_table());
    if let Some(out) = &args.out {
        let mut w = create_output(out)?;
        report.write_tsv(&mut w)?;
        w.flush()?;
        println!("report -> {}", out.display());
    }
    Ok(())
}

pub fn netrank(args: NetrankArgs) -> Result<(), CliError> {
    let filter: BTreeSet<String> = [args.conference.clone()].into();
    let (papers, _) = read_papers_tsv(&args.papers, Some(&filter), 1.0)?;
    let retained: BTreeSet<String> = papers.iter().map(|p| p.paper_id.clone()).collect();
    let (affiliations, _) = read_affiliations_tsv(&args.paa, &retained, 1.0)?;
    let graph = build_graph(&papers, &affiliations, &args.conference);
    let scores = pagerank(&graph, args.damping, args.tolerance)?;
    let mut out = create_output(&args.out)?;
    write_pagerank_tsv(&scores, &mut out)?;
    out.flush()?;
    println!(
        "{} nodes, {} edges -> {}",
        graph.nodes.len(),
        graph.edges.len(),
        args.out.display()
    );
    Ok(())
}

pub fn pipeline(args: PipelineArgs, seed: u64) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let papers_path = config
        .path(args.papers, "papers")
        .ok_or_else(|| CliError::format("--papers is required"))?;
    let paa_path = config
        .path(args.paa, "paa")
        .ok_or_else(|| CliError::format("--paa is required"))?;
    let conferences_raw = config
        .string(args.conferences, "conferences")
        .ok_or_else(|| CliError::format("--conferences is required"))?;
    let conferences = parse_conferences(&conferences_raw)?;
    let year = config
        .parsed(args.year, "year")?
        .ok_or_else(|| CliError::format("--year is required"))?;
    let out = config
        .path(args.out, "out")
        .ok_or_else(|| CliError::format("--out is required"))?;
    let target = match config.string(args.conference, "conference") {
        Some(c) => c,
        None if conferences.len() == 1 => conferences.first().unwrap().clone(),
        None => {
            return Err(CliError::format(
                "--conference is required when ingesting several conferences",
            ))
        }
    };
    let tolerance = config
        .parsed(args.malformed_tolerance, "malformed_tolerance")?
        .unwrap_or(ingest::DEFAULT_MALFORMED_RATIO);
    let model = config.string(args.model, "model");
    let alpha = config.parsed(args.alpha, "alpha")?;
    let orders = config.string(args.orders, "orders");
    let spec = build_model_spec(model.as_deref(), alpha, orders.as_deref())?;
    let n = config.parsed(args.n, "n")?.unwrap_or(20);
    let evaluate_flag = config.flag(args.evaluate, "evaluate");

    let corpus = ingest_corpus(&papers_path, &paa_path, &conferences, tolerance)?;
    println!(
        "ingest: {} papers, {} attributions",
        corpus.papers.len(),
        corpus.affiliations.len()
    );

    let full_ids: BTreeSet<String> = match config.path(args.full_papers, "full_papers") {
        Some(path) => read_paper_id_list(&path)?,
        None => {
            let proceedings = config
                .path(args.proceedings, "proceedings")
                .ok_or_else(|| {
                    CliError::format("need --full-papers, or --proceedings with label files")
                })?;
            let section_labels = config
                .path(args.section_labels, "section_labels")
                .ok_or_else(|| CliError::format("--section-labels is required for filtering"))?;
            let page_labels = config
                .path(args.page_labels, "page_labels")
                .ok_or_else(|| CliError::format("--page-labels is required for filtering"))?;
            let dictionary = match config.path(args.dictionary, "dictionary") {
                Some(path) => read_dictionary(&path)?,
                None => DEFAULT_DICTIONARY.iter().map(|s| s.to_string()).collect(),
            };
            let policy = parse_policy(
                &config.string(args.policy, "policy").unwrap_or_else(|| "unanimous".into()),
            )?;
            let threshold = config
                .parsed(args.match_threshold, "match_threshold")?
                .unwrap_or(ingest::DEFAULT_MATCH_THRESHOLD);
            let trees = config.parsed(args.trees, "trees")?.unwrap_or(25);
            let outcome = run_filter(
                &proceedings,
                &corpus.papers,
                &section_labels,
                &page_labels,
                &FilterSettings {
                    dictionary: &dictionary,
                    policy,
                    match_threshold: threshold,
                    trees,
                    seed,
                },
            )?;
            println!(
                "filter: {} full papers, {} rejected, {} queued for review, {} unmatched",
                outcome.full_ids.len(),
                outcome.rejected_outright + outcome.rejected_after_vote,
                outcome.review_queue.len(),
                outcome.unmatched
            );
            outcome.full_ids.into_iter().collect()
        }
    };

    let table = compute_rel_scores(&corpus.papers, &corpus.affiliations, &full_ids)?;
    println!("relscore: {} entries from {} full papers", table.len(), full_ids.len());

    let series = series_for_target(&table, &target, year)?;
    let (ranking, diagnostics) = rank_affiliations(&series, &spec, year)?;
    write_prediction(&ranking, &out)?;
    println!(
        "forecast: {} with {} series, {} fallbacks -> {}",
        spec,
        series.len(),
        diagnostics.fallbacks,
        out.display()
    );

    if evaluate_flag {
        let truth = GroundTruth::from_table(&table, &target, year);
        if !truth.has_positive() {
            return Err(CliError::new(
                ErrorKind::MissingTruth,
                format!("no observed scores for {target} in {year}"),
            ));
        }
        let score = ndcg_at_n(&ranking, &truth, n)?;
        println!("NDCG@{n} = {score:.6}");
    }
    Ok(())
}
