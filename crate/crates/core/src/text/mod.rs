//! Community content characterization: TF-IDF with probabilistic IDF,
//! similarity, interest indices, influencer matrices, sentiment aggregation,
//! per-community feature vectors with PCA, and lexicon attribute analysis.

pub mod dendrogram;
pub mod pca;
pub mod stats;
pub mod tokenize;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::community::CommunityAssignment;
use crate::ingest::{InteractionRecord, Snapshot};
use crate::{Error, Result};

pub use dendrogram::{influencer_dendrogram, pearson, MergeTree};
pub use pca::{pca_2d, Pca2d};
pub use stats::{gini, gini_rank, kruskal_filter, kruskal_h, zscore_matrix};
pub use tokenize::{is_emoji_char, tokenize, TokenizedComment};

/// Sparse term-weight vector keyed by term.
pub type SparseVector = BTreeMap<String, f64>;

/// Knobs of the text pipeline.
#[derive(Clone)]
pub struct TextConfig {
    pub stopwords: BTreeSet<String>,
    /// Terms with fewer total occurrences than this are dropped corpus-wide.
    pub rare_threshold: u64,
    /// This fraction of the most frequent vocabulary is dropped corpus-wide
    /// (floor semantics; ties by term).
    pub popular_fraction: f64,
    /// Per-document sparsification: keep this many highest-weight terms.
    pub top_terms: usize,
    /// Pluggable normalizer applied to each term; identity when absent.
    pub stemmer: Option<fn(&str) -> String>,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            stopwords: BTreeSet::new(),
            rare_threshold: 10,
            popular_fraction: 0.01,
            top_terms: 100,
            stemmer: None,
        }
    }
}

impl std::fmt::Debug for TextConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextConfig")
            .field("stopwords", &self.stopwords.len())
            .field("rare_threshold", &self.rare_threshold)
            .field("popular_fraction", &self.popular_fraction)
            .field("top_terms", &self.top_terms)
            .field("stemmer", &self.stemmer.is_some())
            .finish()
    }
}

/// Load a stopword list, one token per line.
pub fn load_stopwords(reader: impl BufRead) -> Result<BTreeSet<String>> {
    let mut set = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let token = line.trim();
        if !token.is_empty() {
            set.insert(token.to_lowercase());
        }
    }
    Ok(set)
}

/// Tokenize one comment into analysis terms: word tokens, lowercased, with
/// mentions, hashtags, punctuation and emoji removed, stopwords dropped and
/// the configured normalizer applied.
pub fn preprocess(text: &str, config: &TextConfig) -> Vec<String> {
    tokenize(text)
        .terms
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .map(|t| match config.stemmer {
            Some(stem) => stem(&t),
            None => t,
        })
        .collect()
}

/// One community's aggregated document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityDocument {
    pub community: u32,
    pub term_counts: BTreeMap<String, u64>,
    /// Sparse TF-IDF weights; populated by [`tfidf`].
    pub tfidf: SparseVector,
    pub total_terms: u64,
}

/// Group the window's comments into one document per community and apply the
/// corpus-wide pruning: the top `popular_fraction` of the vocabulary by
/// total count and terms rarer than `rare_threshold` are removed everywhere.
pub fn build_corpus(
    snapshot: &Snapshot,
    assignment: &CommunityAssignment,
    config: &TextConfig,
) -> Vec<CommunityDocument> {
    let n_communities = assignment.community_count as usize;
    let mut counts: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); n_communities];
    for record in &snapshot.comments {
        let Some(&community) = assignment.labels.get(&record.commenter) else {
            continue;
        };
        let Some(text) = &record.text else { continue };
        for term in preprocess(text, config) {
            *counts[community as usize].entry(term).or_insert(0) += 1;
        }
    }

    // Corpus-wide totals drive the popular/rare pruning.
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in &counts {
        for (term, &n) in doc {
            *totals.entry(term).or_insert(0) += n;
        }
    }
    let popular_k = (config.popular_fraction * totals.len() as f64).floor() as usize;
    let mut by_count: Vec<(&str, u64)> = totals.iter().map(|(&t, &n)| (t, n)).collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let banned: BTreeSet<String> = by_count[..popular_k]
        .iter()
        .map(|&(t, _)| t.to_string())
        .chain(
            totals
                .iter()
                .filter(|&(_, &n)| n < config.rare_threshold)
                .map(|(&t, _)| t.to_string()),
        )
        .collect();

    counts
        .into_iter()
        .enumerate()
        .map(|(community, mut term_counts)| {
            term_counts.retain(|term, _| !banned.contains(term));
            let total_terms = term_counts.values().sum();
            CommunityDocument {
                community: community as u32,
                term_counts,
                tfidf: SparseVector::new(),
                total_terms,
            }
        })
        .collect()
}

fn probabilistic_idf(n_docs: usize, doc_freq: usize) -> f64 {
    debug_assert!(doc_freq >= 1);
    if doc_freq >= n_docs {
        return 0.0;
    }
    (((n_docs - doc_freq) as f64) / doc_freq as f64).ln().max(0.0)
}

/// Fill the TF-IDF vectors of a corpus: weight = raw count times
/// max(0, ln((N - n_i) / n_i)), sparsified to the configured number of
/// highest-weight terms per document (ties by term).
pub fn tfidf(corpus: &mut [CommunityDocument], config: &TextConfig) -> Result<()> {
    let n_docs = corpus.len();
    if n_docs < 2 {
        return Err(Error::config(
            "TF-IDF needs at least two community documents",
        ));
    }
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus.iter() {
        for term in doc.term_counts.keys() {
            *doc_freq.entry(term).or_insert(0) += 1;
        }
    }
    let idf: BTreeMap<String, f64> = doc_freq
        .into_iter()
        .map(|(term, df)| (term.to_string(), probabilistic_idf(n_docs, df)))
        .collect();
    for doc in corpus.iter_mut() {
        doc.tfidf = sparsify(
            doc.term_counts
                .iter()
                .map(|(term, &count)| (term.clone(), count as f64 * idf[term])),
            config.top_terms,
        );
    }
    Ok(())
}

/// The "average community" of a window: term frequencies of the complete
/// document (all comments pooled) weighted by the per-community IDF values,
/// then sparsified identically to the real documents.
pub fn average_community_doc(corpus: &[CommunityDocument], config: &TextConfig) -> Result<SparseVector> {
    let n_docs = corpus.len();
    if n_docs < 2 {
        return Err(Error::config(
            "TF-IDF needs at least two community documents",
        ));
    }
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pooled: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in corpus {
        for (term, &count) in &doc.term_counts {
            *doc_freq.entry(term).or_insert(0) += 1;
            *pooled.entry(term).or_insert(0) += count;
        }
    }
    Ok(sparsify(
        pooled.into_iter().map(|(term, count)| {
            let idf = probabilistic_idf(n_docs, doc_freq[term]);
            (term.to_string(), count as f64 * idf)
        }),
        config.top_terms,
    ))
}

fn sparsify(weights: impl Iterator<Item = (String, f64)>, top: usize) -> SparseVector {
    let mut entries: Vec<(String, f64)> = weights.filter(|&(_, w)| w > 0.0).collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("weights are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    entries.truncate(top);
    entries.into_iter().collect()
}

/// Cosine similarity of sparse non-negative vectors; 0 when either is zero.
pub fn cosine_similarity(a: &SparseVector, b: &SparseVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut dot = 0.0;
    for (term, &w) in small {
        if let Some(&v) = large.get(term) {
            dot += w * v;
        }
    }
    let norm_a: f64 = a.values().map(|w| w * w).sum::<f64>().sqrt();
    let norm_b: f64 = b.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    dot / (norm_a * norm_b)
}

/// The ten highest-TF-IDF terms of each community.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopWords {
    pub community: u32,
    pub terms: Vec<(String, f64)>,
}

pub fn top_words(corpus: &[CommunityDocument], k: usize) -> Vec<TopWords> {
    corpus
        .iter()
        .map(|doc| {
            let mut entries: Vec<(String, f64)> =
                doc.tfidf.iter().map(|(t, &w)| (t.clone(), w)).collect();
            entries.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("weights are finite")
                    .then_with(|| a.0.cmp(&b.0))
            });
            entries.truncate(k);
            TopWords {
                community: doc.community,
                terms: entries,
            }
        })
        .collect()
}

/// Community-by-column fraction matrix; rows sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionMatrix {
    /// Communities with at least one comment, ascending.
    pub communities: Vec<u32>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Total comments per included community.
    pub totals: BTreeMap<u32, u64>,
}

pub type CommunityInfluencerMatrix = FractionMatrix;

fn fraction_matrix(
    snapshot: &Snapshot,
    assignment: &CommunityAssignment,
    columns: Vec<String>,
    column_of: impl Fn(&InteractionRecord) -> Option<&str>,
) -> FractionMatrix {
    let col_index: BTreeMap<&str, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut counts: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
    for record in &snapshot.comments {
        let Some(&community) = assignment.labels.get(&record.commenter) else {
            continue;
        };
        let Some(column) = column_of(record) else {
            continue;
        };
        let Some(&j) = col_index.get(column) else {
            continue;
        };
        counts.entry(community).or_insert_with(|| vec![0; columns.len()])[j] += 1;
        *totals.entry(community).or_insert(0) += 1;
    }
    // Communities with zero comments are omitted.
    let communities: Vec<u32> = counts.keys().copied().collect();
    let rows = communities
        .iter()
        .map(|c| {
            let total = totals[c] as f64;
            counts[c].iter().map(|&n| n as f64 / total).collect()
        })
        .collect();
    FractionMatrix {
        communities,
        columns,
        rows,
        totals,
    }
}

/// Per-post concentration of attention: the two most interested communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostConcentration {
    pub post: String,
    pub top1: f64,
    pub top2: f64,
    /// `None` when a single community holds all of the post's attention.
    pub ratio: Option<f64>,
}

/// Interest-index matrix: fraction of each community's comments per post,
/// plus the per-post concentration summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterestIndex {
    #[serde(flatten)]
    pub matrix: FractionMatrix,
    pub concentration: Vec<PostConcentration>,
}

pub fn interest_index(assignment: &CommunityAssignment, snapshot: &Snapshot) -> InterestIndex {
    let columns: Vec<String> = snapshot.posts.keys().cloned().collect();
    let matrix = fraction_matrix(snapshot, assignment, columns, |r| Some(&r.post));
    let mut concentration = Vec::new();
    for (j, post) in matrix.columns.iter().enumerate() {
        let mut top1 = 0.0;
        let mut top2 = 0.0;
        for row in &matrix.rows {
            let v = row[j];
            if v > top1 {
                top2 = top1;
                top1 = v;
            } else if v > top2 {
                top2 = v;
            }
        }
        if top1 > 0.0 {
            concentration.push(PostConcentration {
                post: post.clone(),
                top1,
                top2,
                ratio: (top2 > 0.0).then(|| top1 / top2),
            });
        }
    }
    InterestIndex {
        matrix,
        concentration,
    }
}

/// Fraction of each community's comments per influencer; rows sum to 1.
pub fn community_influencer_matrix(
    assignment: &CommunityAssignment,
    snapshot: &Snapshot,
) -> CommunityInfluencerMatrix {
    let columns: Vec<String> = snapshot.posts_by_influencer.keys().cloned().collect();
    fraction_matrix(snapshot, assignment, columns, |r| Some(&r.influencer))
}

/// Three-way sentiment classes of the pre-scored [-4, 4] scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

pub fn sentiment_classify(score: i8) -> Sentiment {
    match score.cmp(&0) {
        std::cmp::Ordering::Less => Sentiment::Negative,
        std::cmp::Ordering::Equal => Sentiment::Neutral,
        std::cmp::Ordering::Greater => Sentiment::Positive,
    }
}

/// Contrastive sentiment of a community toward an influencer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastiveScore {
    /// Fewer scored comments than the representativeness threshold.
    Insufficient { comments: usize },
    /// fraction positive minus fraction negative, in [-1, 1].
    Score { value: f64, comments: usize },
}

/// Difference between the fractions of positive and negative comments a
/// community left on an influencer's posts. Comments without a sentiment
/// score do not participate.
pub fn contrastive_score(
    assignment: &CommunityAssignment,
    snapshot: &Snapshot,
    community: u32,
    influencer: &str,
    min_comments: usize,
) -> ContrastiveScore {
    let mut positive = 0usize;
    let mut negative = 0usize;
    let mut scored = 0usize;
    for record in &snapshot.comments {
        if record.influencer != influencer {
            continue;
        }
        if assignment.labels.get(&record.commenter) != Some(&community) {
            continue;
        }
        let Some(score) = record.sentiment else { continue };
        scored += 1;
        match sentiment_classify(score) {
            Sentiment::Positive => positive += 1,
            Sentiment::Negative => negative += 1,
            Sentiment::Neutral => {}
        }
    }
    if scored < min_comments {
        return ContrastiveScore::Insufficient { comments: scored };
    }
    ContrastiveScore::Score {
        value: (positive as f64 - negative as f64) / scored as f64,
        comments: scored,
    }
}

/// The seven per-community behavioral metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub avg_comment_length: f64,
    pub frac_with_mention: f64,
    pub avg_hashtags_per_comment: f64,
    pub frac_with_uppercase_word: f64,
    pub avg_comments_per_commenter: f64,
    pub avg_emojis_per_comment: f64,
    pub frac_replies: f64,
}

impl FeatureVector {
    pub const METRIC_NAMES: [&'static str; 7] = [
        "avg_comment_length",
        "frac_with_mention",
        "avg_hashtags_per_comment",
        "frac_with_uppercase_word",
        "avg_comments_per_commenter",
        "avg_emojis_per_comment",
        "frac_replies",
    ];

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.avg_comment_length,
            self.frac_with_mention,
            self.avg_hashtags_per_comment,
            self.frac_with_uppercase_word,
            self.avg_comments_per_commenter,
            self.avg_emojis_per_comment,
            self.frac_replies,
        ]
    }
}

/// Compute the feature vector of one community over the window's comments.
/// Comments without text count as empty strings; a community without any
/// comments has no features.
pub fn feature_vector(
    assignment: &CommunityAssignment,
    snapshot: &Snapshot,
    community: u32,
) -> Result<FeatureVector> {
    let mut comments = 0usize;
    let mut commenters: BTreeSet<&str> = BTreeSet::new();
    let mut total_chars = 0usize;
    let mut with_mention = 0usize;
    let mut hashtags = 0usize;
    let mut with_uppercase = 0usize;
    let mut emojis = 0usize;
    let mut replies = 0usize;
    for record in &snapshot.comments {
        if assignment.labels.get(&record.commenter) != Some(&community) {
            continue;
        }
        comments += 1;
        commenters.insert(&record.commenter);
        let parsed = tokenize(record.text.as_deref().unwrap_or(""));
        total_chars += parsed.chars;
        with_mention += usize::from(parsed.mentions > 0);
        hashtags += parsed.hashtags;
        with_uppercase += usize::from(parsed.has_uppercase_word);
        emojis += parsed.emojis;
        replies += usize::from(record.is_reply == Some(true));
    }
    if comments == 0 {
        return Err(Error::undefined(format!(
            "community {community} has no comments in this window"
        )));
    }
    let n = comments as f64;
    Ok(FeatureVector {
        avg_comment_length: total_chars as f64 / n,
        frac_with_mention: with_mention as f64 / n,
        avg_hashtags_per_comment: hashtags as f64 / n,
        frac_with_uppercase_word: with_uppercase as f64 / n,
        avg_comments_per_commenter: n / commenters.len() as f64,
        avg_emojis_per_comment: emojis as f64 / n,
        frac_replies: replies as f64 / n,
    })
}

/// Lexicon attribute: literal words plus `stem*` prefix patterns.
#[derive(Debug, Clone, PartialEq)]
enum Pattern {
    Literal(String),
    Prefix(String),
}

impl Pattern {
    fn matches(&self, token: &str) -> bool {
        match self {
            Pattern::Literal(word) => token == word,
            Pattern::Prefix(prefix) => token.starts_with(prefix.as_str()),
        }
    }
}

/// A word-category dictionary: attribute name -> patterns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    attributes: BTreeMap<String, Vec<Pattern>>,
}

impl Lexicon {
    /// Parse the tab-separated `attribute<TAB>pattern` format; a trailing
    /// `*` marks a prefix pattern. Patterns are lowercased.
    pub fn parse(reader: impl BufRead) -> Result<Lexicon> {
        let mut attributes: BTreeMap<String, Vec<Pattern>> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (attribute, raw) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected attribute<TAB>pattern".into(),
            })?;
            let raw = raw.trim().to_lowercase();
            if raw.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty pattern".into(),
                });
            }
            let pattern = match raw.strip_suffix('*') {
                Some(prefix) if !prefix.is_empty() => Pattern::Prefix(prefix.to_string()),
                Some(_) => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: "bare '*' is not a valid pattern".into(),
                    })
                }
                None => Pattern::Literal(raw),
            };
            attributes
                .entry(attribute.trim().to_string())
                .or_default()
                .push(pattern);
        }
        if attributes.is_empty() {
            return Err(Error::invalid("lexicon has no attributes"));
        }
        Ok(Lexicon { attributes })
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    fn fraction_of(&self, tokens: &[String]) -> BTreeMap<String, f64> {
        let n = tokens.len() as f64;
        self.attributes
            .iter()
            .map(|(attribute, patterns)| {
                let hits = tokens
                    .iter()
                    .filter(|t| patterns.iter().any(|p| p.matches(t)))
                    .count();
                (attribute.clone(), hits as f64 / n)
            })
            .collect()
    }
}

/// Per-comment attribute fractions: one sample per comment with at least one
/// word token. Stopwords stay in; lexicons cover function words.
pub fn attribute_samples(texts: &[&str], lexicon: &Lexicon) -> BTreeMap<String, Vec<f64>> {
    let mut samples: BTreeMap<String, Vec<f64>> = lexicon
        .attribute_names()
        .map(|a| (a.to_string(), Vec::new()))
        .collect();
    for text in texts {
        let tokens = tokenize(text).terms;
        if tokens.is_empty() {
            continue;
        }
        for (attribute, fraction) in lexicon.fraction_of(&tokens) {
            samples.get_mut(&attribute).expect("known attribute").push(fraction);
        }
    }
    samples
}

/// Mean fraction of comment words matching each attribute.
pub fn lexicon_frequencies(texts: &[&str], lexicon: &Lexicon) -> BTreeMap<String, f64> {
    attribute_samples(texts, lexicon)
        .into_iter()
        .map(|(attribute, values)| {
            let mean = if values.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            (attribute, mean)
        })
        .collect()
}
