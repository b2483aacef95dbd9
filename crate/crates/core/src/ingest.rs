//! Parsing of MAG-style tab-separated dumps into validated records.
//!
//! Input rows are restricted to the requested conference series, titles are
//! normalized to a canonical lowercase token form, and external title lists
//! are linked to corpus papers either exactly or through edit-distance soft
//! matching. All outputs are produced in ascending `paper_id` order so that
//! ingestion is independent of input row order.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Default acceptance threshold for soft title matches (normalized cost).
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.2;

/// Default tolerated fraction of malformed rows per input file.
pub const DEFAULT_MALFORMED_RATIO: f64 = 0.01;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("no title within cost threshold for query {query:?}")]
    NoMatch { query: String },
    #[error("title matching requires a non-empty corpus")]
    EmptyCorpus,
}

/// One published paper after validation and title normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub normalized_title: String,
    pub conference_id: String,
    pub year: i32,
    pub page_count: Option<u32>,
    pub section_name: Option<String>,
}

/// One (paper, author, affiliation) attribution row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AuthorAffiliationRecord {
    pub paper_id: String,
    pub author_id: String,
    pub affiliation_id: String,
}

/// Result of linking an external title to a corpus paper.
#[derive(Debug, Clone, PartialEq)]
pub struct TitleMatch {
    pub query_title: String,
    pub matched_paper_id: String,
    /// Unit-cost edit distance between query and matched title.
    pub cost: u32,
    pub exact: bool,
}

#[derive(Debug, Default, Clone)]
pub struct PaperFileStats {
    pub rows: usize,
    pub kept: usize,
    pub filtered_out: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

#[derive(Debug, Default, Clone)]
pub struct AffiliationFileStats {
    pub rows: usize,
    pub kept: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub orphaned: usize,
}

/// Row-level counters reported alongside an ingested corpus.
#[derive(Debug, Default, Clone)]
pub struct IngestReport {
    pub papers: PaperFileStats,
    pub affiliations: AffiliationFileStats,
}

/// A validated corpus: papers, attribution rows, and ingestion counters.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub papers: Vec<PaperRecord>,
    pub affiliations: Vec<AuthorAffiliationRecord>,
    pub report: IngestReport,
}

/// Canonical title form: lowercase, punctuation and whitespace runs
/// collapsed to single spaces, no leading or trailing whitespace.
///
/// Total and idempotent.
pub fn normalize_title(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_gap = false;
    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            if pending_gap && !out.is_empty() {
                out.push(' ');
            }
            pending_gap = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_gap = true;
        }
    }
    out
}

/// Unit-cost edit distance (insertion, deletion, substitution) over chars.
pub fn levenshtein(a: &str, b: &str) -> u32 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len() as u32;
    }
    if b.is_empty() {
        return a.len() as u32;
    }
    let mut prev: Vec<u32> = (0..=b.len() as u32).collect();
    let mut cur = vec![0u32; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i as u32 + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + u32::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Link a normalized query title to the closest corpus paper.
///
/// An exact normalized-title hit wins with cost 0; otherwise the corpus
/// title with minimum edit distance is selected (ties broken by ascending
/// `paper_id`) and rejected when `cost / max(title lengths)` exceeds
/// `max_normalized_cost`.
pub fn match_title(
    query: &str,
    corpus: &[PaperRecord],
    max_normalized_cost: f64,
) -> Result<TitleMatch, IngestError> {
    if corpus.is_empty() {
        return Err(IngestError::EmptyCorpus);
    }
    if let Some(paper) = corpus
        .iter()
        .filter(|p| p.normalized_title == query)
        .min_by(|a, b| a.paper_id.cmp(&b.paper_id))
    {
        return Ok(TitleMatch {
            query_title: query.to_string(),
            matched_paper_id: paper.paper_id.clone(),
            cost: 0,
            exact: true,
        });
    }
    let mut best: Option<(u32, &PaperRecord)> = None;
    for paper in corpus {
        let cost = levenshtein(query, &paper.normalized_title);
        let better = match &best {
            None => true,
            Some((c, p)) => cost < *c || (cost == *c && paper.paper_id < p.paper_id),
        };
        if better {
            best = Some((cost, paper));
        }
    }
    let (cost, paper) = best.expect("non-empty corpus");
    let max_len = query
        .chars()
        .count()
        .max(paper.normalized_title.chars().count())
        .max(1);
    if cost as f64 / max_len as f64 > max_normalized_cost {
        return Err(IngestError::NoMatch {
            query: query.to_string(),
        });
    }
    Ok(TitleMatch {
        query_title: query.to_string(),
        matched_paper_id: paper.paper_id.clone(),
        cost,
        exact: false,
    })
}

/// Collapse matches to at most one entry per matched paper, keeping the
/// cheapest (ties broken by ascending query title). Output is ordered by
/// matched `paper_id`.
pub fn dedupe(matches: Vec<TitleMatch>) -> Vec<TitleMatch> {
    let mut best: BTreeMap<String, TitleMatch> = BTreeMap::new();
    for m in matches {
        match best.entry(m.matched_paper_id.clone()) {
            Entry::Vacant(slot) => {
                slot.insert(m);
            }
            Entry::Occupied(mut slot) => {
                let cur = slot.get();
                if (m.cost, &m.query_title) < (cur.cost, &cur.query_title) {
                    slot.insert(m);
                }
            }
        }
    }
    best.into_values().collect()
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = Result<String, std::io::Error>>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines())
}

fn parse_year(field: &str) -> Option<i32> {
    let year: i32 = field.trim().parse().ok()?;
    (1900..=2100).contains(&year).then_some(year)
}

/// Read a papers TSV (paper_id, original_title, normalized_title, year,
/// conference_id, page_count, section_name). Rows outside
/// `conference_filter` are dropped; `None` keeps every conference.
///
/// Malformed rows are counted, not fatal, unless their fraction exceeds
/// `max_malformed_ratio`. Output is sorted by ascending `paper_id` with
/// duplicate ids collapsed to the smallest record.
pub fn read_papers_tsv(
    path: &Path,
    conference_filter: Option<&BTreeSet<String>>,
    max_malformed_ratio: f64,
) -> Result<(Vec<PaperRecord>, PaperFileStats), IngestError> {
    let mut stats = PaperFileStats::default();
    let mut rows: Vec<PaperRecord> = Vec::new();
    for line in open_lines(path)? {
        let line = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        stats.rows += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        match parse_paper_row(&fields) {
            None => stats.malformed += 1,
            Some(record) => {
                if conference_filter.is_none_or(|f| f.contains(&record.conference_id)) {
                    rows.push(record);
                } else {
                    stats.filtered_out += 1;
                }
            }
        }
    }
    if stats.rows > 0 && stats.malformed as f64 / stats.rows as f64 > max_malformed_ratio {
        return Err(IngestError::Format(format!(
            "{}: {} of {} rows malformed (tolerance {:.2}%)",
            path.display(),
            stats.malformed,
            stats.rows,
            max_malformed_ratio * 100.0
        )));
    }
    // Canonical order, then collapse duplicate ids to the smallest record so
    // the result is independent of input row order.
    rows.sort_by(|a, b| paper_sort_key(a).cmp(&paper_sort_key(b)));
    let mut papers: Vec<PaperRecord> = Vec::with_capacity(rows.len());
    for record in rows {
        if papers.last().map(|p: &PaperRecord| p.paper_id.as_str()) == Some(record.paper_id.as_str())
        {
            stats.duplicates += 1;
        } else {
            papers.push(record);
        }
    }
    stats.kept = papers.len();
    Ok((papers, stats))
}

fn paper_sort_key(p: &PaperRecord) -> (&str, i32, &str, &str) {
    (
        &p.paper_id,
        p.year,
        p.normalized_title.as_str(),
        p.conference_id.as_str(),
    )
}

fn parse_paper_row(fields: &[&str]) -> Option<PaperRecord> {
    if fields.len() != 7 {
        return None;
    }
    let paper_id = fields[0].trim();
    if paper_id.is_empty() {
        return None;
    }
    let year = parse_year(fields[3])?;
    let page_count = match fields[5].trim() {
        "" => None,
        raw => Some(raw.parse::<u32>().ok()?),
    };
    let normalized = if fields[2].trim().is_empty() {
        normalize_title(fields[1])
    } else {
        normalize_title(fields[2])
    };
    let section = fields[6].trim();
    Some(PaperRecord {
        paper_id: paper_id.to_string(),
        normalized_title: normalized,
        conference_id: fields[4].trim().to_string(),
        year,
        page_count,
        section_name: (!section.is_empty()).then(|| section.to_string()),
    })
}

/// Read an attribution TSV (paper_id, author_id, affiliation_id), collapse
/// duplicate triples, and drop rows whose paper is not in `retained`.
pub fn read_affiliations_tsv(
    path: &Path,
    retained: &BTreeSet<String>,
    max_malformed_ratio: f64,
) -> Result<(Vec<AuthorAffiliationRecord>, AffiliationFileStats), IngestError> {
    let mut stats = AffiliationFileStats::default();
    let mut triples: BTreeSet<AuthorAffiliationRecord> = BTreeSet::new();
    for line in open_lines(path)? {
        let line = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        stats.rows += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.trim().is_empty()) {
            stats.malformed += 1;
            continue;
        }
        let inserted = triples.insert(AuthorAffiliationRecord {
            paper_id: fields[0].trim().to_string(),
            author_id: fields[1].trim().to_string(),
            affiliation_id: fields[2].trim().to_string(),
        });
        if !inserted {
            stats.duplicates += 1;
        }
    }
    if stats.rows > 0 && stats.malformed as f64 / stats.rows as f64 > max_malformed_ratio {
        return Err(IngestError::Format(format!(
            "{}: {} of {} rows malformed (tolerance {:.2}%)",
            path.display(),
            stats.malformed,
            stats.rows,
            max_malformed_ratio * 100.0
        )));
    }
    let mut kept = Vec::with_capacity(triples.len());
    for record in triples {
        if retained.contains(&record.paper_id) {
            kept.push(record);
        } else {
            stats.orphaned += 1;
        }
    }
    stats.kept = kept.len();
    Ok((kept, stats))
}

/// Ingest a papers file and its attribution file, restricted to
/// `conference_ids`.
pub fn ingest_corpus(
    papers_path: &Path,
    paa_path: &Path,
    conference_ids: &BTreeSet<String>,
    max_malformed_ratio: f64,
) -> Result<Corpus, IngestError> {
    let (papers, paper_stats) =
        read_papers_tsv(papers_path, Some(conference_ids), max_malformed_ratio)?;
    let retained: BTreeSet<String> = papers.iter().map(|p| p.paper_id.clone()).collect();
    let (affiliations, affiliation_stats) =
        read_affiliations_tsv(paa_path, &retained, max_malformed_ratio)?;
    Ok(Corpus {
        papers,
        affiliations,
        report: IngestReport {
            papers: paper_stats,
            affiliations: affiliation_stats,
        },
    })
}

/// Write papers in the canonical 7-column TSV form (ascending `paper_id`).
pub fn write_papers_tsv<W: Write>(papers: &[PaperRecord], mut out: W) -> std::io::Result<()> {
    for p in papers {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.paper_id,
            p.normalized_title,
            p.normalized_title,
            p.year,
            p.conference_id,
            p.page_count.map(|c| c.to_string()).unwrap_or_default(),
            p.section_name.as_deref().unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Write attribution rows as a 3-column TSV in canonical triple order.
pub fn write_affiliations_tsv<W: Write>(
    affiliations: &[AuthorAffiliationRecord],
    mut out: W,
) -> std::io::Result<()> {
    for a in affiliations {
        writeln!(out, "{}\t{}\t{}", a.paper_id, a.author_id, a.affiliation_id)?;
    }
    Ok(())
}

/// Read a full-paper id list, one id per line, ignoring blank lines.
pub fn read_paper_id_list(path: &Path) -> Result<BTreeSet<String>, IngestError> {
    let mut ids = BTreeSet::new();
    for line in open_lines(path)? {
        let line = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let id = line.trim();
        if !id.is_empty() {
            ids.insert(id.to_string());
        }
    }
    Ok(ids)
}
