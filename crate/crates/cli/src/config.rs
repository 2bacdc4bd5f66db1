//! Pipeline configuration: defaults, the key-value config file, and flag
//! overrides. Every file key has the same name as its CLI flag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cocomment_core::ingest::{TraceFormat, Weekday};
use cocomment_core::synth::{PlantedGroup, PostSizes};
use cocomment_core::{Error, Result};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub format: TraceFormat,
    pub strict_parse: bool,
    pub out: PathBuf,
    pub window_days: i64,
    pub anchor: Weekday,
    pub utc_offset_secs: i32,
    pub clique_cap: Option<usize>,
    pub alpha: f64,
    pub strict: bool,
    pub exact_cap: usize,
    pub seed: u64,
    pub threads: usize,
    pub stopwords: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub rare_threshold: u64,
    pub popular_fraction: f64,
    pub top_terms: usize,
    pub top_words: usize,
    pub min_comments: usize,
    pub kruskal_p: f64,
    pub gini_top: usize,
    pub synth_commenters: usize,
    pub synth_influencers: usize,
    pub synth_posts: usize,
    pub synth_skew: f64,
    pub synth_post_sizes: PostSizes,
    pub synth_groups: Vec<PlantedGroup>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            format: TraceFormat::Jsonl,
            strict_parse: false,
            out: PathBuf::from("out"),
            window_days: 7,
            anchor: Weekday::Monday,
            utc_offset_secs: 0,
            clique_cap: None,
            alpha: 0.05,
            strict: true,
            exact_cap: 64,
            seed: 42,
            threads: 0,
            stopwords: None,
            lexicon: None,
            rare_threshold: 10,
            popular_fraction: 0.01,
            top_terms: 100,
            top_words: 10,
            min_comments: 100,
            kruskal_p: 0.01,
            gini_top: 5,
            synth_commenters: 500,
            synth_influencers: 20,
            synth_posts: 200,
            synth_skew: 1.0,
            synth_post_sizes: PostSizes::Zipf {
                exponent: 1.0,
                max: 50,
            },
            synth_groups: Vec::new(),
        }
    }
}

impl PipelineConfig {
    /// Load defaults overridden by a `key = value` config file.
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default();
        let data = std::fs::read_to_string(path)?;
        for (idx, raw) in data.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::config(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        }
        Ok(config)
    }

    /// Set one configuration key from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::config(format!("bad value for {key}: {e}")))
        }
        match key {
            "input" => self.input = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "strict_parse" => self.strict_parse = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "window_days" => self.window_days = parse(key, value)?,
            "anchor" => self.anchor = value.parse()?,
            "utc_offset_secs" => self.utc_offset_secs = parse(key, value)?,
            "clique_cap" => {
                let cap: usize = parse(key, value)?;
                self.clique_cap = (cap > 0).then_some(cap);
            }
            "alpha" => self.alpha = parse(key, value)?,
            "strict" => self.strict = parse(key, value)?,
            "exact_cap" => self.exact_cap = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "stopwords" => self.stopwords = Some(PathBuf::from(value)),
            "lexicon" => self.lexicon = Some(PathBuf::from(value)),
            "rare_threshold" => self.rare_threshold = parse(key, value)?,
            "popular_fraction" => self.popular_fraction = parse(key, value)?,
            "top_terms" => self.top_terms = parse(key, value)?,
            "top_words" => self.top_words = parse(key, value)?,
            "min_comments" => self.min_comments = parse(key, value)?,
            "kruskal_p" => self.kruskal_p = parse(key, value)?,
            "gini_top" => self.gini_top = parse(key, value)?,
            "synth_commenters" => self.synth_commenters = parse(key, value)?,
            "synth_influencers" => self.synth_influencers = parse(key, value)?,
            "synth_posts" => self.synth_posts = parse(key, value)?,
            "synth_skew" => self.synth_skew = parse(key, value)?,
            "synth_post_sizes" => self.synth_post_sizes = parse_post_sizes(value)?,
            "synth_groups" => self.synth_groups = parse_groups(value)?,
            other => return Err(Error::config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    pub fn window_spec(&self) -> cocomment_core::ingest::WindowSpec {
        cocomment_core::ingest::WindowSpec {
            window_secs: self.window_days * 86_400,
            anchor: self.anchor,
            utc_offset_secs: self.utc_offset_secs,
        }
    }

    pub fn backbone_options(&self) -> cocomment_core::nullmodel::BackboneOptions {
        cocomment_core::nullmodel::BackboneOptions {
            alpha: self.alpha,
            strict: self.strict,
            exact_fallback_cap: self.exact_cap,
        }
    }

    pub fn synth_spec(&self) -> cocomment_core::synth::SynthSpec {
        cocomment_core::synth::SynthSpec {
            n_commenters: self.synth_commenters,
            n_influencers: self.synth_influencers,
            n_posts: self.synth_posts,
            engagement_skew: self.synth_skew,
            post_sizes: self.synth_post_sizes,
            planted_groups: self.synth_groups.clone(),
            seed: self.seed,
        }
    }

    /// The parameter block recorded in run manifests.
    pub fn manifest_parameters(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            p.insert(k.to_string(), v);
        };
        if let Some(input) = &self.input {
            put("input", input.display().to_string());
        }
        put(
            "format",
            match self.format {
                TraceFormat::Jsonl => "jsonl".into(),
                TraceFormat::Csv => "csv".into(),
            },
        );
        put("strict_parse", self.strict_parse.to_string());
        put("window_days", self.window_days.to_string());
        put("anchor", format!("{:?}", self.anchor).to_lowercase());
        put("utc_offset_secs", self.utc_offset_secs.to_string());
        put(
            "clique_cap",
            self.clique_cap.map_or("0".into(), |c| c.to_string()),
        );
        put("alpha", self.alpha.to_string());
        put("strict", self.strict.to_string());
        put("exact_cap", self.exact_cap.to_string());
        put("seed", self.seed.to_string());
        if let Some(path) = &self.stopwords {
            put("stopwords", path.display().to_string());
        }
        if let Some(path) = &self.lexicon {
            put("lexicon", path.display().to_string());
        }
        put("rare_threshold", self.rare_threshold.to_string());
        put("popular_fraction", self.popular_fraction.to_string());
        put("top_terms", self.top_terms.to_string());
        put("top_words", self.top_words.to_string());
        put("min_comments", self.min_comments.to_string());
        put("kruskal_p", self.kruskal_p.to_string());
        put("gini_top", self.gini_top.to_string());
        put("synth_commenters", self.synth_commenters.to_string());
        put("synth_influencers", self.synth_influencers.to_string());
        put("synth_posts", self.synth_posts.to_string());
        put("synth_skew", self.synth_skew.to_string());
        put("synth_post_sizes", format_post_sizes(&self.synth_post_sizes));
        put("synth_groups", format_groups(&self.synth_groups));
        p
    }
}

fn parse_post_sizes(value: &str) -> Result<PostSizes> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        ["const", k] => Ok(PostSizes::Constant(k.parse().map_err(|e| {
            Error::config(format!("bad constant post size {k:?}: {e}"))
        })?)),
        ["zipf", s, max] => Ok(PostSizes::Zipf {
            exponent: s
                .parse()
                .map_err(|e| Error::config(format!("bad zipf exponent {s:?}: {e}")))?,
            max: max
                .parse()
                .map_err(|e| Error::config(format!("bad zipf cap {max:?}: {e}")))?,
        }),
        _ => Err(Error::config(format!(
            "bad post size spec {value:?}; expected const:<k> or zipf:<s>:<max>"
        ))),
    }
}

fn format_post_sizes(sizes: &PostSizes) -> String {
    match sizes {
        PostSizes::Constant(k) => format!("const:{k}"),
        PostSizes::Zipf { exponent, max } => format!("zipf:{exponent}:{max}"),
    }
}

/// `20x15,10x5` means two groups: 20 members sharing 15 posts, 10 sharing 5.
fn parse_groups(value: &str) -> Result<Vec<PlantedGroup>> {
    if value.trim().is_empty() || value.trim() == "none" {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|part| {
            let (size, posts) = part
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::config(format!("bad group spec {part:?}; expected SIZExPOSTS")))?;
            Ok(PlantedGroup {
                size: size
                    .parse()
                    .map_err(|e| Error::config(format!("bad group size {size:?}: {e}")))?,
                shared_posts: posts
                    .parse()
                    .map_err(|e| Error::config(format!("bad group posts {posts:?}: {e}")))?,
            })
        })
        .collect()
}

fn format_groups(groups: &[PlantedGroup]) -> String {
    if groups.is_empty() {
        return "none".into();
    }
    groups
        .iter()
        .map(|g| format!("{}x{}", g.size, g.shared_posts))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_are_sane() {
        let c = PipelineConfig::default();
        assert_eq!(c.alpha, 0.05);
        assert!(c.strict);
        assert_eq!(c.window_days, 7);
    }

    #[test]
    fn config_file_overrides_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment line").unwrap();
        writeln!(file, "alpha = 0.01").unwrap();
        writeln!(file, "strict = false").unwrap();
        writeln!(file, "synth_post_sizes = const:10").unwrap();
        writeln!(file, "synth_groups = 20x15,5x3").unwrap();
        let c = PipelineConfig::from_file(file.path()).unwrap();
        assert_eq!(c.alpha, 0.01);
        assert!(!c.strict);
        assert_eq!(c.synth_post_sizes, PostSizes::Constant(10));
        assert_eq!(c.synth_groups.len(), 2);
        assert_eq!(c.synth_groups[1].size, 5);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let mut c = PipelineConfig::default();
        assert!(c.set("no_such_key", "1").is_err());
        assert!(c.set("alpha", "not-a-number").is_err());
    }

    #[test]
    fn zero_clique_cap_means_unlimited() {
        let mut c = PipelineConfig::default();
        c.set("clique_cap", "0").unwrap();
        assert_eq!(c.clique_cap, None);
        c.set("clique_cap", "1000").unwrap();
        assert_eq!(c.clique_cap, Some(1000));
    }
}
