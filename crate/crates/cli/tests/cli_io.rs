//! Black-box tests of the `instrank` binary: exit codes, diagnostics, and
//! file outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_instrank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn ingest_writes_canonical_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = fixture_dir();
    let output = run(&[
        "ingest",
        "--papers",
        fixtures.join("papers.tsv").to_str().unwrap(),
        "--paa",
        fixtures.join("paper_author_affiliations.tsv").to_str().unwrap(),
        "--conferences",
        "C1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let papers = std::fs::read_to_string(dir.path().join("papers.tsv")).unwrap();
    assert_eq!(papers.lines().count(), 170);
    // canonical order: ascending paper id
    let ids: Vec<&str> = papers
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(dir.path().join("paper_author_affiliations.tsv").exists());
}

#[test]
fn missing_input_exits_2_with_io_diagnostic() {
    let output = run(&[
        "ingest",
        "--papers",
        "/definitely/missing.tsv",
        "--paa",
        "/also/missing.tsv",
        "--conferences",
        "C1",
        "--out-dir",
        "/tmp",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("IoError"));
}

#[test]
fn malformed_rows_beyond_tolerance_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let papers = dir.path().join("papers.tsv");
    std::fs::write(&papers, "P1\tT\tt\t2014\tC1\t\t\nbroken\n").unwrap();
    let paa = dir.path().join("paa.tsv");
    std::fs::write(&paa, "P1\tA1\tX\n").unwrap();
    let output = run(&[
        "ingest",
        "--papers",
        papers.to_str().unwrap(),
        "--paa",
        paa.to_str().unwrap(),
        "--conferences",
        "C1",
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_of(&output).contains("FormatError"));
}

#[test]
fn cv_without_truth_year_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("rel.tsv");
    std::fs::write(&rel, "C1\t2013\tA\t1.000000\nC1\t2014\tA\t1.000000\n").unwrap();
    let output = run(&[
        "cv",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--years",
        "2030",
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr_of(&output).contains("MissingTruth"));
}

#[test]
fn model_errors_exit_5() {
    let fixtures = fixture_dir();
    let output = run(&[
        "netrank",
        "--papers",
        fixtures.join("papers.tsv").to_str().unwrap(),
        "--paa",
        fixtures.join("paper_author_affiliations.tsv").to_str().unwrap(),
        "--conference",
        "C1",
        "--damping",
        "1.5",
        "--out",
        "/tmp/never_written.tsv",
    ]);
    assert_eq!(output.status.code(), Some(5));
    assert!(stderr_of(&output).contains("ModelError"));
}

/// Two-year histories chosen so the exponential-weight and smoothing
/// forecasts order the affiliations differently; expected file contents
/// were computed by hand from the two formulas.
#[test]
fn naive_and_smoothing_models_produce_the_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("rel.tsv");
    std::fs::write(
        &rel,
        "C1\t2014\tX\t1.000000\nC1\t2014\tY\t2.000000\nC1\t2014\tZ\t0.500000\n\
         C1\t2015\tX\t2.000000\nC1\t2015\tY\t1.000000\nC1\t2015\tZ\t0.500000\n",
    )
    .unwrap();

    let naive_out = dir.path().join("naive.tsv");
    let output = run(&[
        "forecast",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--year",
        "2016",
        "--model",
        "naive-es",
        "--out",
        naive_out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_eq!(
        std::fs::read_to_string(&naive_out).unwrap(),
        "C1\tX\t2.367879\nC1\tY\t1.735759\nC1\tZ\t0.683940\n"
    );

    let es_out = dir.path().join("es.tsv");
    let output = run(&[
        "forecast",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--year",
        "2016",
        "--model",
        "es",
        "--alpha",
        "0.4",
        "--out",
        es_out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    // smoothing with alpha 0.4 flips X and Y
    assert_eq!(
        std::fs::read_to_string(&es_out).unwrap(),
        "C1\tY\t1.600000\nC1\tX\t1.400000\nC1\tZ\t0.500000\n"
    );
}

#[test]
fn evaluate_scores_the_bundled_truth_file() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.tsv");
    std::fs::write(&pred, "C1\tA1\t9.0\nC1\tA2\t7.0\nC1\tA3\t5.0\nC1\tA4\t3.0\nC1\tA5\t1.0\n")
        .unwrap();
    let output = run(&[
        "evaluate",
        "--prediction",
        pred.to_str().unwrap(),
        "--truth",
        fixture_dir().join("truth_2015.tsv").to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("NDCG@20 = 1.000000"));

    // the two-column network-ranker output is accepted as a prediction
    let two_col = dir.path().join("net.tsv");
    std::fs::write(&two_col, "A1\t0.9\nA2\t0.5\nA3\t0.4\nA4\t0.3\nA5\t0.1\n").unwrap();
    let output = run(&[
        "evaluate",
        "--prediction",
        two_col.to_str().unwrap(),
        "--truth",
        fixture_dir().join("truth_2015.tsv").to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("NDCG@20 = 1.000000"));
}

#[test]
fn cv_reports_three_years_and_mean() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.tsv");
    let output = run(&[
        "cv",
        "--rel-scores",
        {
            // build a relevance table from the bundled corpus first
            let rel = dir.path().join("rel.tsv");
            let fixtures = fixture_dir();
            let status = Command::new(env!("CARGO_BIN_EXE_instrank"))
                .args([
                    "relscore",
                    "--papers",
                    fixtures.join("papers.tsv").to_str().unwrap(),
                    "--paa",
                    fixtures.join("paper_author_affiliations.tsv").to_str().unwrap(),
                    "--full-papers",
                    fixtures.join("full_papers.txt").to_str().unwrap(),
                    "--out",
                    rel.to_str().unwrap(),
                ])
                .status()
                .unwrap();
            assert!(status.success());
            Box::leak(rel.into_boxed_path()).to_str().unwrap()
        },
        "--conference",
        "C1",
        "--years",
        "2013,2014,2015",
        "--model",
        "naive-es",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let report = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 4, "three year rows plus the mean row");
    assert!(lines[3].starts_with("mean\t"));
}

#[test]
fn cv_singleton_grid_equals_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("rel.tsv");
    std::fs::write(
        &rel,
        "C1\t2011\tA\t3.000000\nC1\t2011\tB\t1.000000\n\
         C1\t2012\tA\t2.000000\nC1\t2012\tB\t1.500000\n\
         C1\t2013\tA\t2.500000\nC1\t2013\tB\t1.000000\n\
         C1\t2014\tA\t2.000000\nC1\t2014\tB\t1.200000\n",
    )
    .unwrap();
    let grid_report = dir.path().join("grid.tsv");
    let output = run(&[
        "cv",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--years",
        "2013,2014",
        "--grid",
        "0.3",
        "--out",
        grid_report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("best alpha = 0.3"));

    let plain_report = dir.path().join("plain.tsv");
    let output = run(&[
        "cv",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--years",
        "2013,2014",
        "--model",
        "es",
        "--alpha",
        "0.3",
        "--out",
        plain_report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_eq!(
        std::fs::read(&grid_report).unwrap(),
        std::fs::read(&plain_report).unwrap()
    );
}

#[test]
fn grid_search_prints_one_on_the_designed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("rel.tsv");
    // order reverses after the first year, so only alpha = 1 ranks the
    // recent leader first in every target year
    std::fs::write(
        &rel,
        "C1\t2011\tA\t99.000000\nC1\t2011\tB\t0.500000\n\
         C1\t2012\tA\t1.000000\nC1\t2012\tB\t2.000000\n\
         C1\t2013\tA\t1.000000\nC1\t2013\tB\t2.000000\n\
         C1\t2014\tA\t1.000000\nC1\t2014\tB\t2.000000\n\
         C1\t2015\tA\t1.000000\nC1\t2015\tB\t2.000000\n",
    )
    .unwrap();
    let output = run(&[
        "cv",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--years",
        "2013,2014,2015",
        "--grid",
        "0.2,0.4,0.6,0.8,0.95,1.0",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("best alpha = 1"));
}

#[test]
fn filter_papers_recovers_the_bundled_full_list() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = fixture_dir();
    let output = run(&[
        "filter-papers",
        "--proceedings",
        fixtures.join("proceedings.tsv").to_str().unwrap(),
        "--corpus-papers",
        fixtures.join("papers.tsv").to_str().unwrap(),
        "--section-labels",
        fixtures.join("section_labels.tsv").to_str().unwrap(),
        "--page-labels",
        fixtures.join("page_labels.tsv").to_str().unwrap(),
        "--dictionary",
        fixtures.join("dictionary.txt").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    // soft matching (typo'd titles included) recovers exactly the bundled list
    let got = std::fs::read_to_string(dir.path().join("full_papers.txt")).unwrap();
    let mut want: Vec<String> = std::fs::read_to_string(fixtures.join("full_papers.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    want.sort();
    assert_eq!(got.lines().count(), want.len());
    assert_eq!(got.lines().map(str::to_string).collect::<Vec<_>>(), want);
    assert!(dir.path().join("review_queue.tsv").exists());
}

#[test]
fn pipeline_config_file_matches_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = fixture_dir();
    let config = dir.path().join("run.conf");
    let config_out = dir.path().join("from_config.tsv");
    std::fs::write(
        &config,
        format!(
            "# mini-dataset run\n\
             papers = {}\n\
             paa = {}\n\
             conferences = C1\n\
             full_papers = {}\n\
             model = naive-es\n\
             year = 2016\n\
             out = {}\n",
            fixtures.join("papers.tsv").display(),
            fixtures.join("paper_author_affiliations.tsv").display(),
            fixtures.join("full_papers.txt").display(),
            config_out.display(),
        ),
    )
    .unwrap();
    let output = run(&["pipeline", "--config", config.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let flag_out = dir.path().join("from_flags.tsv");
    let output = run(&[
        "pipeline",
        "--papers",
        fixtures.join("papers.tsv").to_str().unwrap(),
        "--paa",
        fixtures.join("paper_author_affiliations.tsv").to_str().unwrap(),
        "--conferences",
        "C1",
        "--full-papers",
        fixtures.join("full_papers.txt").to_str().unwrap(),
        "--year",
        "2016",
        "--out",
        flag_out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_eq!(
        std::fs::read(&config_out).unwrap(),
        std::fs::read(&flag_out).unwrap()
    );

    // a flag overrides the config value for the same key
    let override_out = dir.path().join("override.tsv");
    let output = run(&[
        "pipeline",
        "--config",
        config.to_str().unwrap(),
        "--model",
        "last3",
        "--out",
        override_out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_ne!(
        std::fs::read(&override_out).unwrap(),
        std::fs::read(&flag_out).unwrap(),
        "last3 output should differ from the exponential-weight output"
    );
}

#[test]
fn pipeline_evaluate_prints_retrospective_ndcg() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = fixture_dir();
    let output = run(&[
        "pipeline",
        "--papers",
        fixtures.join("papers.tsv").to_str().unwrap(),
        "--paa",
        fixtures.join("paper_author_affiliations.tsv").to_str().unwrap(),
        "--conferences",
        "C1",
        "--full-papers",
        fixtures.join("full_papers.txt").to_str().unwrap(),
        "--year",
        "2015",
        "--evaluate",
        "--out",
        dir.path().join("pred.tsv").to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("NDCG@20 = 1.000000"));
}

#[test]
fn arima_pipeline_on_two_point_series_reports_fallbacks() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("rel.tsv");
    std::fs::write(&rel, "C1\t2014\tA\t1.000000\nC1\t2015\tA\t2.000000\n").unwrap();
    let out = dir.path().join("pred.tsv");
    let output = run(&[
        "forecast",
        "--rel-scores",
        rel.to_str().unwrap(),
        "--conference",
        "C1",
        "--year",
        "2016",
        "--model",
        "arima",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("1 fallbacks"));
    // the fallback is the mean of the two observations
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "C1\tA\t1.500000\n");
}
