//! Pipeline stages. Stages communicate only through files in the output
//! directory, each writes a run manifest, and a failing stage removes the
//! partial outputs it created.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use cocomment_core::community::{
    assignment_export, assignment_from_export, louvain, AssignmentExport, CommunityAssignment,
};
use cocomment_core::dynamics::{transition, TransitionRecord, WindowArtifacts};
use cocomment_core::ingest::{
    filter_single_post_commenters, parse_records, window_partition, Snapshot,
};
use cocomment_core::nullmodel::{engagement_table, extract_backbone, Backbone};
use cocomment_core::projection::{build_graph_with, graph_stats, BuildOptions};
use cocomment_core::synth::{plant_groups, sample_null_trace, trace_to_jsonl};
use cocomment_core::text::{
    attribute_samples, average_community_doc, build_corpus, community_influencer_matrix,
    contrastive_score, feature_vector, gini_rank, influencer_dendrogram, interest_index,
    kruskal_filter, load_stopwords, pca_2d, tfidf, top_words, zscore_matrix, ContrastiveScore,
    FeatureVector, Lexicon, SparseVector, TextConfig,
};
use cocomment_core::{Error, Result};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::manifest::Manifest;

/// Book-keeping for one stage run: tracks written files so that a failure
/// leaves no partial outputs behind, and accumulates the manifest.
struct StageContext {
    outdir: PathBuf,
    manifest: Manifest,
    created: Vec<PathBuf>,
}

impl StageContext {
    fn new(stage: &str, config: &PipelineConfig) -> Result<StageContext> {
        fs::create_dir_all(&config.out)?;
        Ok(StageContext {
            outdir: config.out.clone(),
            manifest: Manifest::new(stage, config.manifest_parameters()),
            created: Vec::new(),
        })
    }

    fn record_input(&mut self, path: &Path) -> Result<()> {
        self.manifest.record_input(path)
    }

    fn write(&mut self, relative: impl AsRef<Path>, content: &[u8]) -> Result<()> {
        let relative = relative.as_ref();
        let path = self.outdir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, content)?;
        self.manifest.record_output(relative, content);
        self.created.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, relative: impl AsRef<Path>, value: &T) -> Result<()> {
        let mut data = serde_json::to_string_pretty(value)
            .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
        data.push('\n');
        self.write(relative, data.as_bytes())
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.outdir)?;
        Ok(())
    }

    fn cleanup(&self) {
        for path in &self.created {
            let _ = fs::remove_file(path);
        }
    }
}

fn run_stage(
    stage: &str,
    config: &PipelineConfig,
    body: impl FnOnce(&mut StageContext) -> Result<()>,
) -> Result<()> {
    let mut ctx = StageContext::new(stage, config)?;
    match body(&mut ctx) {
        Ok(()) => ctx.finish(),
        Err(err) => {
            ctx.cleanup();
            Err(err)
        }
    }
}

fn snapshot_path(window: u32) -> String {
    format!("snapshots/window_{window:03}.json")
}

fn load_snapshots(config: &PipelineConfig) -> Result<Vec<Snapshot>> {
    let dir = config.out.join("snapshots");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| {
            Error::invalid(format!(
                "no snapshots under {} (run the ingest stage first): {e}",
                dir.display()
            ))
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut snapshots = Vec::with_capacity(paths.len());
    for path in paths {
        let data = fs::read_to_string(&path)?;
        snapshots.push(Snapshot::from_json(&data)?);
    }
    if snapshots.is_empty() {
        return Err(Error::invalid(format!(
            "no snapshots under {}",
            dir.display()
        )));
    }
    Ok(snapshots)
}

fn load_backbone(config: &PipelineConfig, window: u32) -> Result<Backbone> {
    let path = config.out.join(format!("backbones/backbone_w{window:03}.tsv"));
    let data = fs::read_to_string(&path).map_err(|e| {
        Error::invalid(format!(
            "missing backbone for window {window} (run the backbone stage first): {e}"
        ))
    })?;
    Backbone::from_tsv(&data)
}

fn load_assignment(config: &PipelineConfig, window: u32) -> Result<CommunityAssignment> {
    let path = config
        .out
        .join(format!("communities/communities_w{window:03}.json"));
    let data = fs::read_to_string(&path).map_err(|e| {
        Error::invalid(format!(
            "missing communities for window {window} (run the communities stage first): {e}"
        ))
    })?;
    let export: AssignmentExport = serde_json::from_str(&data)
        .map_err(|e| Error::invalid(format!("bad communities file {}: {e}", path.display())))?;
    Ok(assignment_from_export(&export))
}

fn text_config(config: &PipelineConfig) -> Result<TextConfig> {
    let stopwords = match &config.stopwords {
        None => Default::default(),
        Some(path) => load_stopwords(BufReader::new(fs::File::open(path)?))?,
    };
    Ok(TextConfig {
        stopwords,
        rare_threshold: config.rare_threshold,
        popular_fraction: config.popular_fraction,
        top_terms: config.top_terms,
        stemmer: None,
    })
}

/// Parse the input trace, partition it into windows, pre-filter commenters
/// and write one snapshot file per window.
pub fn run_ingest(config: &PipelineConfig) -> Result<()> {
    run_stage("ingest", config, |ctx| {
        let input = config
            .input
            .clone()
            .ok_or_else(|| Error::config("ingest needs an input trace (--input)"))?;
        let file = fs::File::open(&input)
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", input.display())))?;
        ctx.record_input(&input)?;
        let outcome = parse_records(BufReader::new(file), config.format, config.strict_parse)?;
        if outcome.malformed > 0 {
            let (line, message) = outcome.first_error.as_ref().expect("first error recorded");
            eprintln!(
                "warning: {} malformed line(s); first at line {line}: {message}",
                outcome.malformed
            );
        }
        let snapshots = window_partition(&outcome.records, &config.window_spec())?;
        for snapshot in &snapshots {
            let filtered = filter_single_post_commenters(snapshot);
            ctx.write(snapshot_path(filtered.window_index), filtered.to_json().as_bytes())?;
        }
        println!(
            "ingest: {} records ({} malformed) into {} window(s)",
            outcome.records.len(),
            outcome.malformed,
            snapshots.len()
        );
        Ok(())
    })
}

/// Project each snapshot onto its co-commenter graph.
pub fn run_graph(config: &PipelineConfig) -> Result<()> {
    run_stage("graph", config, |ctx| {
        let opts = BuildOptions {
            max_clique: config.clique_cap,
        };
        for snapshot in load_snapshots(config)? {
            let graph = build_graph_with(&snapshot, &opts)?;
            let stats = graph_stats(&graph);
            ctx.write(
                format!("graphs/graph_w{:03}.tsv", snapshot.window_index),
                graph.to_tsv().as_bytes(),
            )?;
            ctx.write_json(
                format!("graphs/stats_w{:03}.json", snapshot.window_index),
                &stats,
            )?;
            println!(
                "graph w{}: {} vertices, {} edges",
                snapshot.window_index,
                graph.vertex_count(),
                graph.edge_count()
            );
        }
        Ok(())
    })
}

/// Extract the salient backbone of every window.
pub fn run_backbone(config: &PipelineConfig) -> Result<()> {
    run_stage("backbone", config, |ctx| {
        let build_opts = BuildOptions {
            max_clique: config.clique_cap,
        };
        let opts = config.backbone_options();
        for snapshot in load_snapshots(config)? {
            let graph = build_graph_with(&snapshot, &build_opts)?;
            let table = engagement_table(&snapshot)?;
            for warning in &table.warnings {
                eprintln!("warning: {warning}");
            }
            let (backbone, retention) = extract_backbone(&graph, &table, &opts)?;
            ctx.write(
                format!("backbones/backbone_w{:03}.tsv", snapshot.window_index),
                backbone.to_tsv().as_bytes(),
            )?;
            ctx.write_json(
                format!("backbones/retention_w{:03}.json", snapshot.window_index),
                &retention,
            )?;
            println!(
                "backbone w{}: kept {}/{} edges ({:.2}%), {} vertices",
                snapshot.window_index,
                retention.kept_edges,
                retention.total_edges,
                100.0 * retention.kept_fraction(),
                backbone.graph.vertex_count()
            );
        }
        Ok(())
    })
}

/// Louvain communities of every backbone.
pub fn run_communities(config: &PipelineConfig) -> Result<()> {
    run_stage("communities", config, |ctx| {
        for snapshot in load_snapshots(config)? {
            let window = snapshot.window_index;
            let backbone = load_backbone(config, window)?;
            if backbone.graph.vertex_count() == 0 {
                eprintln!("warning: backbone of window {window} is empty; skipped");
                continue;
            }
            let assignment = louvain(&backbone.graph, config.seed)?;
            ctx.write_json(
                format!("communities/communities_w{window:03}.json"),
                &assignment_export(window, &assignment),
            )?;
            println!(
                "communities w{window}: {} communities, modularity {:.4}",
                assignment.community_count, assignment.modularity
            );
        }
        Ok(())
    })
}

/// Per-community TF-IDF documents of one window plus the window baseline.
fn window_documents(
    snapshot: &Snapshot,
    assignment: &CommunityAssignment,
    text_cfg: &TextConfig,
) -> Result<(Vec<SparseVector>, SparseVector)> {
    let mut corpus = build_corpus(snapshot, assignment, text_cfg);
    if corpus.len() < 2 {
        // Matching needs at least two communities; signal "no documents".
        return Ok((Vec::new(), SparseVector::new()));
    }
    tfidf(&mut corpus, text_cfg)?;
    let baseline = average_community_doc(&corpus, text_cfg)?;
    Ok((corpus.into_iter().map(|d| d.tfidf).collect(), baseline))
}

/// Temporal report over consecutive windows.
pub fn run_dynamics(config: &PipelineConfig) -> Result<()> {
    run_stage("dynamics", config, |ctx| {
        let snapshots = load_snapshots(config)?;
        if snapshots.len() < 2 {
            return Err(Error::invalid(
                "dynamics needs at least two windows; got fewer snapshots",
            ));
        }
        let text_cfg = text_config(config)?;
        let mut windows = Vec::new();
        for snapshot in &snapshots {
            let backbone = load_backbone(config, snapshot.window_index)?;
            if backbone.graph.vertex_count() == 0 {
                return Err(Error::undefined(format!(
                    "backbone of window {} is empty; persistence and NMI are undefined",
                    snapshot.window_index
                )));
            }
            let assignment = load_assignment(config, snapshot.window_index)?;
            let (docs, baseline) = window_documents(snapshot, &assignment, &text_cfg)?;
            windows.push((snapshot, backbone, assignment, docs, baseline));
        }
        let mut report: Vec<TransitionRecord> = Vec::new();
        for pair in windows.windows(2) {
            let (snap_a, backbone_a, assignment_a, docs_a, baseline_a) = &pair[0];
            let (snap_b, backbone_b, assignment_b, docs_b, baseline_b) = &pair[1];
            let from = WindowArtifacts {
                snapshot: snap_a,
                backbone: backbone_a,
                assignment: assignment_a,
                docs: docs_a,
                baseline_doc: baseline_a,
            };
            let to = WindowArtifacts {
                snapshot: snap_b,
                backbone: backbone_b,
                assignment: assignment_b,
                docs: docs_b,
                baseline_doc: baseline_b,
            };
            report.extend(transition(&from, &to)?);
        }
        ctx.write_json("dynamics/temporal.json", &report)?;
        println!(
            "dynamics: {} transition record(s) over {} windows",
            report.len(),
            windows.len()
        );
        Ok(())
    })
}

#[derive(Serialize)]
struct SentimentCell {
    community: u32,
    influencer: String,
    comments: usize,
    /// `null` when below the representativeness threshold.
    value: Option<f64>,
}

#[derive(Serialize)]
struct FeatureRow {
    community: u32,
    #[serde(flatten)]
    features: FeatureVector,
}

#[derive(Serialize)]
struct LexiconReport {
    /// attribute -> community -> mean fraction.
    means: BTreeMap<String, BTreeMap<u32, f64>>,
    /// Attributes passing the Kruskal-Wallis filter.
    significant: Vec<String>,
    /// The most dispersed significant attributes by Gini.
    top: Vec<String>,
    zscores: Option<ZscoreBlock>,
}

#[derive(Serialize)]
struct ZscoreBlock {
    communities: Vec<u32>,
    attributes: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Content characterization reports for every window.
pub fn run_text(config: &PipelineConfig) -> Result<()> {
    run_stage("text", config, |ctx| {
        let text_cfg = text_config(config)?;
        let lexicon = match &config.lexicon {
            None => None,
            Some(path) => Some(Lexicon::parse(BufReader::new(fs::File::open(path)?))?),
        };
        for snapshot in load_snapshots(config)? {
            let window = snapshot.window_index;
            // An empty backbone has no communities to characterize.
            if load_backbone(config, window)?.graph.vertex_count() == 0 {
                eprintln!("note: backbone of window {window} is empty; text reports skipped");
                continue;
            }
            let assignment = load_assignment(config, window)?;
            let prefix = format!("text/w{window:03}");

            let mut corpus = build_corpus(&snapshot, &assignment, &text_cfg);
            if corpus.len() >= 2 {
                tfidf(&mut corpus, &text_cfg)?;
                ctx.write_json(
                    format!("{prefix}/topwords.json"),
                    &top_words(&corpus, config.top_words),
                )?;
            }

            let interest = interest_index(&assignment, &snapshot);
            ctx.write_json(format!("{prefix}/interest.json"), &interest)?;

            let matrix = community_influencer_matrix(&assignment, &snapshot);
            ctx.write_json(format!("{prefix}/influencer_matrix.json"), &matrix)?;

            if matrix.columns.len() >= 2 {
                match influencer_dendrogram(&matrix) {
                    Ok(tree) => ctx.write_json(format!("{prefix}/dendrogram.json"), &tree)?,
                    Err(Error::Undefined(reason)) => {
                        eprintln!("warning: w{window} dendrogram skipped: {reason}");
                    }
                    Err(other) => return Err(other),
                }
            }

            let mut sentiment = Vec::new();
            for &community in &matrix.communities {
                for influencer in &matrix.columns {
                    let cell = match contrastive_score(
                        &assignment,
                        &snapshot,
                        community,
                        influencer,
                        config.min_comments,
                    ) {
                        ContrastiveScore::Score { value, comments } => SentimentCell {
                            community,
                            influencer: influencer.clone(),
                            comments,
                            value: Some(value),
                        },
                        ContrastiveScore::Insufficient { comments } => SentimentCell {
                            community,
                            influencer: influencer.clone(),
                            comments,
                            value: None,
                        },
                    };
                    sentiment.push(cell);
                }
            }
            ctx.write_json(format!("{prefix}/sentiment.json"), &sentiment)?;

            let mut feature_rows = Vec::new();
            for &community in &matrix.communities {
                let features = feature_vector(&assignment, &snapshot, community)?;
                feature_rows.push(FeatureRow {
                    community,
                    features,
                });
            }
            ctx.write_json(format!("{prefix}/features.json"), &feature_rows)?;
            if feature_rows.len() >= 3 {
                let rows: Vec<Vec<f64>> = feature_rows
                    .iter()
                    .map(|r| r.features.as_array().to_vec())
                    .collect();
                match pca_2d(&rows, &FeatureVector::METRIC_NAMES) {
                    Ok(pca) => ctx.write_json(format!("{prefix}/pca.json"), &pca)?,
                    Err(Error::Undefined(reason)) => {
                        eprintln!("warning: w{window} PCA skipped: {reason}");
                    }
                    Err(other) => return Err(other),
                }
            }

            if let Some(lexicon) = &lexicon {
                let report = lexicon_report(&snapshot, &assignment, lexicon, config)?;
                ctx.write_json(format!("{prefix}/lexicon.json"), &report)?;
            }
            println!("text w{window}: reports written under {prefix}/");
        }
        Ok(())
    })
}

fn lexicon_report(
    snapshot: &Snapshot,
    assignment: &CommunityAssignment,
    lexicon: &Lexicon,
    config: &PipelineConfig,
) -> Result<LexiconReport> {
    // Group comment texts by community.
    let mut texts: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for record in &snapshot.comments {
        let (Some(&community), Some(text)) =
            (assignment.labels.get(&record.commenter), record.text.as_deref())
        else {
            continue;
        };
        texts.entry(community).or_default().push(text);
    }

    // Per-community per-comment samples; communities contributing fewer than
    // two token-bearing comments cannot enter the rank test.
    let mut communities: Vec<u32> = Vec::new();
    let mut samples: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let mut means: BTreeMap<String, BTreeMap<u32, f64>> = BTreeMap::new();
    for (&community, comment_texts) in &texts {
        let by_attr = attribute_samples(comment_texts, lexicon);
        let n_samples = by_attr.values().next().map_or(0, Vec::len);
        for (attribute, values) in &by_attr {
            let mean = if values.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            means
                .entry(attribute.clone())
                .or_default()
                .insert(community, mean);
        }
        if n_samples >= 2 {
            communities.push(community);
            for (attribute, values) in by_attr {
                samples.entry(attribute).or_default().push(values);
            }
        }
    }

    let significant = if communities.len() >= 2 {
        kruskal_filter(&samples, config.kruskal_p)?
    } else {
        Default::default()
    };

    let significant_means: BTreeMap<String, Vec<f64>> = significant
        .iter()
        .map(|attr| {
            let per_community = &means[attr];
            (
                attr.clone(),
                communities
                    .iter()
                    .map(|c| per_community.get(c).copied().unwrap_or(0.0))
                    .collect(),
            )
        })
        .collect();
    let top = gini_rank(&significant_means, config.gini_top);

    // Z-score heatmap over the selected attributes; constant columns cannot
    // be significant, but guard anyway.
    let usable: Vec<String> = top
        .iter()
        .filter(|attr| {
            let values = &significant_means[*attr];
            values.iter().any(|&v| v != values[0])
        })
        .cloned()
        .collect();
    let zscores = if !usable.is_empty() && communities.len() >= 2 {
        let rows: Vec<Vec<f64>> = communities
            .iter()
            .enumerate()
            .map(|(i, _)| usable.iter().map(|a| significant_means[a][i]).collect())
            .collect();
        Some(ZscoreBlock {
            communities: communities.clone(),
            attributes: usable.clone(),
            rows: zscore_matrix(&rows, &usable)?,
        })
    } else {
        None
    };

    Ok(LexiconReport {
        means,
        significant: significant.into_iter().collect(),
        top,
        zscores,
    })
}

/// Generate a synthetic trace (and ground truth when groups are planted).
pub fn run_synth(config: &PipelineConfig) -> Result<()> {
    run_stage("synth", config, |ctx| {
        let spec = config.synth_spec();
        let trace = sample_null_trace(&spec)?;
        let (trace, truth) = if spec.planted_groups.is_empty() {
            (trace, None)
        } else {
            let (trace, truth) = plant_groups(trace, &spec)?;
            (trace, Some(truth))
        };
        ctx.write("synth/trace.jsonl", trace_to_jsonl(&trace).as_bytes())?;
        if let Some(truth) = truth {
            ctx.write_json("synth/ground_truth.json", &truth)?;
        }
        println!("synth: {} records", trace.len());
        Ok(())
    })
}

/// All stages in order. The synthetic generator only runs when no input
/// trace is configured, in which case its output becomes the input.
pub fn run_pipeline(config: &PipelineConfig) -> Result<()> {
    let mut config = config.clone();
    if config.input.is_none() {
        run_synth(&config)?;
        config.input = Some(config.out.join("synth/trace.jsonl"));
    }
    run_ingest(&config)?;
    run_graph(&config)?;
    run_backbone(&config)?;
    run_communities(&config)?;
    let snapshots = load_snapshots(&config)?;
    let mut stages_run = vec!["ingest", "graph", "backbone", "communities"];
    let mut nonempty = true;
    for snapshot in &snapshots {
        nonempty &= load_backbone(&config, snapshot.window_index)?
            .graph
            .vertex_count()
            > 0;
    }
    if snapshots.len() < 2 {
        eprintln!("note: single window; dynamics stage skipped");
    } else if !nonempty {
        eprintln!("note: an empty backbone makes temporal metrics undefined; dynamics stage skipped");
    } else {
        run_dynamics(&config)?;
        stages_run.push("dynamics");
    }
    run_text(&config)?;
    stages_run.push("text");

    // Top-level manifest: the digests of the per-stage manifests pin the
    // whole run.
    let mut manifest = Manifest::new("pipeline", config.manifest_parameters());
    if let Some(input) = &config.input {
        manifest.record_input(input)?;
    }
    for stage in stages_run {
        let name = format!("manifest_{stage}.json");
        let content = fs::read(config.out.join(&name))?;
        manifest.record_output(Path::new(&name), &content);
    }
    manifest.write(&config.out)?;
    Ok(())
}
