//! Synthetic interaction traces: pure null-model samples for calibration
//! and traces with planted coordinated groups for recovery tests.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::InteractionRecord;
use crate::rng::{Categorical, SplitMix64};
use crate::{Error, Result};

/// Base of the generated window: 2018-09-03T00:00:00Z, a Monday.
pub const WINDOW_START: i64 = 1_535_932_800;
const WINDOW_SECS: i64 = 7 * 86_400;

/// Post-popularity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PostSizes {
    /// Every post draws this many commenter slots.
    Constant(u32),
    /// Slot counts in 1..=max with probability proportional to 1/k^exponent.
    Zipf { exponent: f64, max: u32 },
}

/// One coordinated group to plant: `size` members sharing `shared_posts`
/// dedicated posts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedGroup {
    pub size: usize,
    pub shared_posts: usize,
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_commenters: usize,
    pub n_influencers: usize,
    pub n_posts: usize,
    /// Zipf exponent of the per-influencer engagement profile; 0 is uniform.
    pub engagement_skew: f64,
    pub post_sizes: PostSizes,
    pub planted_groups: Vec<PlantedGroup>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_commenters == 0 || self.n_influencers == 0 {
            return Err(Error::config("need at least one commenter and influencer"));
        }
        if self.engagement_skew < 0.0 {
            return Err(Error::config("engagement skew must be non-negative"));
        }
        match self.post_sizes {
            PostSizes::Constant(0) => {
                return Err(Error::config("post size must be positive"))
            }
            PostSizes::Zipf { exponent, max } => {
                if max == 0 {
                    return Err(Error::config("post size cap must be positive"));
                }
                if exponent < 0.0 {
                    return Err(Error::config("post size exponent must be non-negative"));
                }
            }
            _ => {}
        }
        let planted: usize = self.planted_groups.iter().map(|g| g.size).sum();
        if planted > self.n_commenters {
            return Err(Error::config(
                "planted group sizes exceed the commenter population",
            ));
        }
        if self.planted_groups.iter().any(|g| g.size < 2) {
            return Err(Error::config("planted groups need at least two members"));
        }
        if self.planted_groups.iter().any(|g| g.shared_posts == 0) {
            return Err(Error::config("planted groups need at least one post"));
        }
        Ok(())
    }
}

fn commenter_name(idx: usize) -> String {
    format!("c{idx:06}")
}

fn influencer_name(idx: usize) -> String {
    format!("i{idx:03}")
}

/// Draw a pure null trace: every post assigns its commenter slots i.i.d.
/// from the owning influencer's engagement profile, duplicates collapse.
///
/// Randomness is consumed from four named streams in a fixed order
/// (engagement profiles, post layout, slot draws, timestamps), so a seed
/// pins the trace bit-for-bit on every platform.
pub fn sample_null_trace(spec: &SynthSpec) -> Result<Vec<InteractionRecord>> {
    spec.validate()?;

    // Per-influencer engagement profile: a random ranking of commenters
    // weighted 1/(rank+1)^skew.
    let mut rng_profiles = SplitMix64::stream(spec.seed, "engagement");
    let profiles: Vec<Categorical> = (0..spec.n_influencers)
        .map(|_| {
            let mut ranked: Vec<usize> = (0..spec.n_commenters).collect();
            rng_profiles.shuffle(&mut ranked);
            let mut weights = vec![0.0; spec.n_commenters];
            for (rank, &commenter) in ranked.iter().enumerate() {
                weights[commenter] = 1.0 / ((rank + 1) as f64).powf(spec.engagement_skew);
            }
            Categorical::new(&weights)
        })
        .collect();

    let size_sampler = match spec.post_sizes {
        PostSizes::Constant(_) => None,
        PostSizes::Zipf { exponent, max } => {
            let weights: Vec<f64> = (1..=max)
                .map(|k| 1.0 / f64::from(k).powf(exponent))
                .collect();
            Some(Categorical::new(&weights))
        }
    };

    let mut rng_posts = SplitMix64::stream(spec.seed, "posts");
    let mut rng_slots = SplitMix64::stream(spec.seed, "slots");
    let mut rng_times = SplitMix64::stream(spec.seed, "timestamps");

    let mut records = Vec::new();
    for post_idx in 0..spec.n_posts {
        let influencer = rng_posts.next_below(spec.n_influencers as u64) as usize;
        let slots = match (&spec.post_sizes, &size_sampler) {
            (PostSizes::Constant(k), _) => *k,
            (PostSizes::Zipf { .. }, Some(sampler)) => sampler.sample(&mut rng_posts) as u32 + 1,
            _ => unreachable!(),
        };
        let mut members = BTreeSet::new();
        for _ in 0..slots {
            members.insert(profiles[influencer].sample(&mut rng_slots));
        }
        for commenter in members {
            records.push(InteractionRecord {
                commenter: commenter_name(commenter),
                influencer: influencer_name(influencer),
                post: format!("p{post_idx:06}"),
                timestamp: WINDOW_START + rng_times.next_below(WINDOW_SECS as u64) as i64,
                text: None,
                is_reply: None,
                sentiment: None,
            });
        }
    }
    Ok(records)
}

/// Append the planted groups to a trace.
///
/// Each group gets a dedicated synthetic influencer and `shared_posts` fresh
/// posts on which exactly the group members comment, so planted engagement
/// never contaminates the background profiles. Returns the extended trace
/// and the ground truth: group index for members, -1 for background.
pub fn plant_groups(
    mut trace: Vec<InteractionRecord>,
    spec: &SynthSpec,
) -> Result<(Vec<InteractionRecord>, BTreeMap<String, i64>)> {
    spec.validate()?;
    if spec.planted_groups.is_empty() {
        return Err(Error::config("no planted groups in the spec"));
    }

    let mut rng_members = SplitMix64::stream(spec.seed, "plant-members");
    let mut rng_times = SplitMix64::stream(spec.seed, "plant-timestamps");

    let mut pool: Vec<usize> = (0..spec.n_commenters).collect();
    rng_members.shuffle(&mut pool);

    let mut truth: BTreeMap<String, i64> = (0..spec.n_commenters)
        .map(|c| (commenter_name(c), -1))
        .collect();

    let mut cursor = 0;
    for (group_idx, group) in spec.planted_groups.iter().enumerate() {
        let members = &pool[cursor..cursor + group.size];
        cursor += group.size;
        for &member in members {
            truth.insert(commenter_name(member), group_idx as i64);
        }
        let mut sorted_members: Vec<usize> = members.to_vec();
        sorted_members.sort_unstable();
        for post in 0..group.shared_posts {
            for &member in &sorted_members {
                trace.push(InteractionRecord {
                    commenter: commenter_name(member),
                    influencer: format!("planted{group_idx:02}"),
                    post: format!("planted{group_idx:02}_p{post:04}"),
                    timestamp: WINDOW_START + rng_times.next_below(WINDOW_SECS as u64) as i64,
                    text: None,
                    is_reply: None,
                    sentiment: None,
                });
            }
        }
    }
    Ok((trace, truth))
}

/// Serialize a trace in the same JSONL shape the ingest stage reads.
pub fn trace_to_jsonl(records: &[InteractionRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}
