//! Full-paper identification from proceedings metadata.
//!
//! Three independent signals vote on whether a proceedings entry is a full
//! research paper: a keyword dictionary over section names, a tf-idf
//! linear classifier trained on labelled section names, and a bootstrap
//! ensemble of one-dimensional page-count stumps. Unanimous votes decide
//! automatically; disagreements land in a review queue for a human, or are
//! resolved by majority when the caller opts in.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Section-name keywords that mark non-full-paper content. The first four
/// come with the method; the rest are common proceedings filler.
pub const DEFAULT_DICTIONARY: [&str; 7] = [
    "keynote",
    "panel",
    "industry track",
    "posters",
    "demo",
    "tutorial",
    "workshop",
];

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("training data must contain both labels")]
    DegenerateLabels,
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

/// One labelled section name; `label` is true for full-paper sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionExample {
    pub section_name: String,
    pub label: bool,
}

/// Returns true when the section may hold full papers, i.e. no dictionary
/// keyword occurs (case-insensitively) inside the section name.
pub fn rule_filter(section_name: &str, dictionary: &[String]) -> bool {
    let lower = section_name.to_lowercase();
    !dictionary
        .iter()
        .any(|keyword| lower.contains(&keyword.to_lowercase()))
}

/// Lowercase alphanumeric token runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Linear classifier over L2-normalized tf-idf section-name vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Hinge-loss training settings.
#[derive(Debug, Clone, Copy)]
pub struct TextTrainConfig {
    /// Weight of the hinge term relative to the L2 penalty.
    pub regularization: f64,
    /// Relative objective-change stopping tolerance.
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for TextTrainConfig {
    fn default() -> Self {
        TextTrainConfig {
            regularization: 1.0,
            tolerance: 1e-6,
            max_epochs: 10_000,
        }
    }
}

impl TfidfModel {
    /// Dense tf-idf vector of `text`, L2-normalized; tokens outside the
    /// vocabulary are ignored and an all-unknown input maps to zero.
    pub fn vectorize(&self, text: &str) -> Vec<f64> {
        let mut vector = vec![0.0; self.vocabulary.len()];
        for token in tokenize(text) {
            if let Some(&idx) = self.vocabulary.get(&token) {
                vector[idx] += self.idf[idx];
            }
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            vector.iter_mut().for_each(|v| *v /= norm);
        }
        vector
    }

    pub fn decision_value(&self, text: &str) -> f64 {
        let vector = self.vectorize(text);
        self.weights
            .iter()
            .zip(vector.iter())
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }
}

/// Train the section-name classifier.
///
/// Feature vectors use raw token counts scaled by the smoothed idf
/// `ln((1 + N) / (1 + df)) + 1` and are L2-normalized. The weights
/// minimize `0.5*||w||^2 + C * sum(hinge)` by deterministic full-batch
/// subgradient descent; examples are canonicalized by sorting first, so
/// training is reproducible regardless of input order.
pub fn train_text_classifier(
    examples: &[SectionExample],
    config: &TextTrainConfig,
) -> Result<TfidfModel, FilterError> {
    let mut examples: Vec<&SectionExample> = examples.iter().collect();
    examples.sort_by(|a, b| (&a.section_name, a.label).cmp(&(&b.section_name, b.label)));
    if !examples.iter().any(|e| e.label) || examples.iter().all(|e| e.label) {
        return Err(FilterError::DegenerateLabels);
    }

    let n = examples.len();
    let mut document_frequency: BTreeMap<String, usize> = BTreeMap::new();
    for example in &examples {
        let unique: BTreeSet<String> = tokenize(&example.section_name).into_iter().collect();
        for token in unique {
            *document_frequency.entry(token).or_insert(0) += 1;
        }
    }
    let vocabulary: BTreeMap<String, usize> = document_frequency
        .keys()
        .enumerate()
        .map(|(idx, token)| (token.clone(), idx))
        .collect();
    let mut idf = vec![0.0; vocabulary.len()];
    for (token, &idx) in &vocabulary {
        let df = document_frequency[token];
        idf[idx] = ((1.0 + n as f64) / (1.0 + df as f64)).ln() + 1.0;
    }

    let mut model = TfidfModel {
        vocabulary,
        idf,
        weights: vec![0.0; document_frequency.len()],
        bias: 0.0,
    };
    let vectors: Vec<Vec<f64>> = examples
        .iter()
        .map(|e| model.vectorize(&e.section_name))
        .collect();
    let labels: Vec<f64> = examples
        .iter()
        .map(|e| if e.label { 1.0 } else { -1.0 })
        .collect();

    let c = config.regularization;
    let objective = |w: &[f64], b: f64| -> f64 {
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let hinge: f64 = vectors
            .iter()
            .zip(labels.iter())
            .map(|(x, &y)| {
                let margin = y * (dot(w, x) + b);
                (1.0 - margin).max(0.0)
            })
            .sum();
        reg + c * hinge
    };

    let mut previous = objective(&model.weights, model.bias);
    for epoch in 0..config.max_epochs {
        let step = 0.5 / (1.0 + 0.01 * epoch as f64);
        let mut grad_w = model.weights.clone();
        let mut grad_b = 0.0;
        for (x, &y) in vectors.iter().zip(labels.iter()) {
            let margin = y * (dot(&model.weights, x) + model.bias);
            if margin < 1.0 {
                for (g, &xi) in grad_w.iter_mut().zip(x.iter()) {
                    *g -= c * y * xi;
                }
                grad_b -= c * y;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(grad_w.iter()) {
            *w -= step * g;
        }
        model.bias -= step * grad_b;
        let current = objective(&model.weights, model.bias);
        if (previous - current).abs() <= config.tolerance * previous.abs().max(1.0) && epoch > 10 {
            break;
        }
        previous = current;
    }
    Ok(model)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// True when the model places the section on the full-paper side.
pub fn classify_section(model: &TfidfModel, section_name: &str) -> bool {
    model.decision_value(section_name) > 0.0
}

/// Page-count vote table: fraction of ensemble trees voting "full paper"
/// on each interval between consecutive thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct PageLengthModel {
    /// Strictly increasing split points.
    pub thresholds: Vec<f64>,
    /// One fraction per interval; `thresholds.len() + 1` entries.
    pub vote_fractions: Vec<f64>,
}

impl PageLengthModel {
    pub fn vote_fraction(&self, page_count: u32) -> f64 {
        let x = page_count as f64;
        let interval = self.thresholds.partition_point(|&t| t <= x);
        self.vote_fractions[interval]
    }

    pub fn predict(&self, page_count: u32) -> bool {
        self.vote_fraction(page_count) >= 0.5
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PageTrainConfig {
    pub trees: usize,
    pub seed: u64,
}

impl Default for PageTrainConfig {
    fn default() -> Self {
        PageTrainConfig { trees: 25, seed: 42 }
    }
}

/// Bootstrap index sets used by page-model training: `n` draws with
/// replacement per tree, all from one seeded stream.
pub fn bootstrap_samples(seed: u64, trees: usize, n: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trees)
        .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
        .collect()
}

/// Depth-1 threshold rule: items at or above the threshold take the right
/// label.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Stump {
    Constant(bool),
    Split { threshold: f64, left: bool, right: bool },
}

impl Stump {
    fn vote(&self, page_count: f64) -> bool {
        match *self {
            Stump::Constant(label) => label,
            Stump::Split { threshold, left, right } => {
                if page_count >= threshold {
                    right
                } else {
                    left
                }
            }
        }
    }
}

fn majority(sample: &[(u32, bool)]) -> bool {
    let trues = sample.iter().filter(|(_, label)| *label).count();
    trues * 2 > sample.len()
}

fn fit_stump(sample: &[(u32, bool)]) -> Stump {
    let mut values: Vec<u32> = sample.iter().map(|(pc, _)| *pc).collect();
    values.sort_unstable();
    values.dedup();
    if values.len() < 2 {
        return Stump::Constant(majority(sample));
    }
    let mut best: Option<(usize, Stump)> = None;
    for pair in values.windows(2) {
        let threshold = (pair[0] as f64 + pair[1] as f64) / 2.0;
        let below: Vec<(u32, bool)> = sample
            .iter()
            .copied()
            .filter(|(pc, _)| (*pc as f64) < threshold)
            .collect();
        let above: Vec<(u32, bool)> = sample
            .iter()
            .copied()
            .filter(|(pc, _)| (*pc as f64) >= threshold)
            .collect();
        let left = majority(&below);
        let right = majority(&above);
        let errors = below.iter().filter(|(_, l)| *l != left).count()
            + above.iter().filter(|(_, l)| *l != right).count();
        // thresholds scan ascending, so strict < keeps the smallest on ties
        if best.as_ref().is_none_or(|(e, _)| errors < *e) {
            best = Some((errors, Stump::Split { threshold, left, right }));
        }
    }
    match best.expect("at least one split candidate").1 {
        // a split whose sides agree is just a constant
        Stump::Split { left, right, .. } if left == right => Stump::Constant(left),
        stump => stump,
    }
}

/// Train the page-count ensemble: one depth-1 stump per bootstrap sample,
/// folded into per-interval vote fractions.
pub fn train_page_model(
    examples: &[(u32, bool)],
    config: &PageTrainConfig,
) -> Result<PageLengthModel, FilterError> {
    if !examples.iter().any(|(_, l)| *l) || examples.iter().all(|(_, l)| *l) {
        return Err(FilterError::DegenerateLabels);
    }
    let mut examples = examples.to_vec();
    examples.sort_unstable();

    let samples = bootstrap_samples(config.seed, config.trees, examples.len());
    let stumps: Vec<Stump> = samples
        .iter()
        .map(|indices| {
            let sample: Vec<(u32, bool)> = indices.iter().map(|&i| examples[i]).collect();
            fit_stump(&sample)
        })
        .collect();

    let mut thresholds: Vec<f64> = stumps
        .iter()
        .filter_map(|s| match s {
            Stump::Split { threshold, .. } => Some(*threshold),
            Stump::Constant(_) => None,
        })
        .collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
    thresholds.dedup();

    let probes: Vec<f64> = if thresholds.is_empty() {
        vec![0.0]
    } else {
        let mut p = vec![thresholds[0] - 1.0];
        p.extend(thresholds.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        p.push(thresholds[thresholds.len() - 1] + 1.0);
        p
    };
    let vote_fractions: Vec<f64> = probes
        .iter()
        .map(|&probe| {
            stumps.iter().filter(|s| s.vote(probe)).count() as f64 / stumps.len() as f64
        })
        .collect();
    Ok(PageLengthModel {
        thresholds,
        vote_fractions,
    })
}

/// How disagreements between the three signals are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Unanimous votes decide; anything else goes to the review queue.
    Unanimous,
    /// Two out of three votes decide; the review queue stays empty.
    Majority,
}

/// The three votes collected for one paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperVotes {
    pub paper_id: String,
    pub section_name: String,
    pub page_count: u32,
    pub rule_vote: bool,
    pub text_vote: bool,
    pub page_vote: bool,
}

impl PaperVotes {
    fn tally(&self) -> usize {
        usize::from(self.rule_vote) + usize::from(self.text_vote) + usize::from(self.page_vote)
    }
}

/// Outcome of combining the three classifiers over a paper set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CombinedDecisions {
    pub full_papers: Vec<String>,
    pub rejected: Vec<String>,
    pub review_queue: Vec<PaperVotes>,
}

/// Label papers by combined vote; all outputs are sorted by paper id.
pub fn combine_filters(votes: &[PaperVotes], policy: Policy) -> CombinedDecisions {
    let mut ordered: Vec<&PaperVotes> = votes.iter().collect();
    ordered.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    let mut decisions = CombinedDecisions::default();
    for vote in ordered {
        match (vote.tally(), policy) {
            (3, _) => decisions.full_papers.push(vote.paper_id.clone()),
            (0, _) => decisions.rejected.push(vote.paper_id.clone()),
            (t, Policy::Majority) => {
                if t >= 2 {
                    decisions.full_papers.push(vote.paper_id.clone());
                } else {
                    decisions.rejected.push(vote.paper_id.clone());
                }
            }
            (_, Policy::Unanimous) => decisions.review_queue.push(vote.clone()),
        }
    }
    decisions
}

/// One proceedings-dump line: conference, year, section, title, pages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProceedingsRecord {
    pub conference_id: String,
    pub year: i32,
    pub section_name: String,
    pub title: String,
    pub page_count: u32,
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = Result<String, std::io::Error>>, FilterError> {
    let file = File::open(path).map_err(|source| FilterError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines())
}

/// Read a proceedings dump; malformed lines are returned in the error
/// count rather than aborting the run.
pub fn read_proceedings(path: &Path) -> Result<(Vec<ProceedingsRecord>, usize), FilterError> {
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in open_lines(path)? {
        let line = line.map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parsed = (|| {
            if fields.len() != 5 {
                return None;
            }
            Some(ProceedingsRecord {
                conference_id: fields[0].trim().to_string(),
                year: fields[1].trim().parse().ok()?,
                section_name: fields[2].trim().to_string(),
                title: fields[3].trim().to_string(),
                page_count: fields[4].trim().parse().ok()?,
            })
        })();
        match parsed {
            Some(record) => records.push(record),
            None => malformed += 1,
        }
    }
    Ok((records, malformed))
}

/// One keyword per line; blank lines ignored.
pub fn read_dictionary(path: &Path) -> Result<Vec<String>, FilterError> {
    let mut keywords = Vec::new();
    for line in open_lines(path)? {
        let line = line.map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let keyword = line.trim();
        if !keyword.is_empty() {
            keywords.push(keyword.to_string());
        }
    }
    Ok(keywords)
}

/// `section_name<TAB>label` rows with labels 0 or 1.
pub fn read_section_labels(path: &Path) -> Result<Vec<SectionExample>, FilterError> {
    let mut examples = Vec::new();
    for (idx, line) in open_lines(path)?.enumerate() {
        let line = line.map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let (name, label) = parse_labeled_row(&line, path, idx)?;
        examples.push(SectionExample {
            section_name: name.to_string(),
            label,
        });
    }
    Ok(examples)
}

/// `page_count<TAB>label` rows with labels 0 or 1.
pub fn read_page_labels(path: &Path) -> Result<Vec<(u32, bool)>, FilterError> {
    let mut examples = Vec::new();
    for (idx, line) in open_lines(path)?.enumerate() {
        let line = line.map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let (raw, label) = parse_labeled_row(&line, path, idx)?;
        let pages: u32 = raw.trim().parse().map_err(|_| {
            FilterError::Format(format!(
                "{}:{}: bad page count {raw:?}",
                path.display(),
                idx + 1
            ))
        })?;
        examples.push((pages, label));
    }
    Ok(examples)
}

fn parse_labeled_row<'a>(
    line: &'a str,
    path: &Path,
    idx: usize,
) -> Result<(&'a str, bool), FilterError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 2 {
        return Err(FilterError::Format(format!(
            "{}:{}: expected value<TAB>label",
            path.display(),
            idx + 1
        )));
    }
    let label = match fields[1].trim() {
        "0" => false,
        "1" => true,
        other => {
            return Err(FilterError::Format(format!(
                "{}:{}: label must be 0 or 1, got {other:?}",
                path.display(),
                idx + 1
            )))
        }
    };
    Ok((fields[0], label))
}

/// One paper id per line.
pub fn write_full_paper_ids<W: Write>(ids: &[String], mut out: W) -> std::io::Result<()> {
    for id in ids {
        writeln!(out, "{id}")?;
    }
    Ok(())
}

/// Review-queue TSV: paper, section, pages, and the three votes as 0/1.
pub fn write_review_queue<W: Write>(queue: &[PaperVotes], mut out: W) -> std::io::Result<()> {
    for item in queue {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            item.paper_id,
            item.section_name,
            item.page_count,
            u8::from(item.rule_vote),
            u8::from(item.text_vote),
            u8::from(item.page_vote),
        )?;
    }
    Ok(())
}
