//! Exact-match and soft-match scoring of predicted fact sets against gold.
//!
//! Exact match compares canonical-string multisets: order-insensitive,
//! multiplicity-sensitive, rule lines included. Canonicalization happens in
//! the fact serializer, so quote and spacing variants never cause spurious
//! mismatches; entity wording differences ("a laptop" vs "the laptop") do.
//!
//! Soft match keeps a hard structural gate — the skeleton multisets and rule
//! lines must match exactly — then scores the mean embedding cosine over
//! aligned entity slots. Predicted facts are aligned to gold facts of the
//! same skeleton greedily by maximal mean entity cosine; negative cosines
//! clamp to 0 so the score stays in [0, 1].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::embeddings::{cosine, EmbedError, Embedder};
use crate::proleg::{struct_of, FactSet};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no samples to aggregate")]
    EmptyInput,
    #[error("{scores} scores but {labels} seed labels")]
    LabelMismatch { scores: usize, labels: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Per-sample scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleScore {
    pub exact: bool,
    pub soft: f64,
    pub struct_match: bool,
    pub parse_failed: bool,
}

impl SampleScore {
    pub fn parse_failure() -> Self {
        SampleScore {
            exact: false,
            soft: 0.0,
            struct_match: false,
            parse_failed: true,
        }
    }
}

/// How entity-slot cosines are averaged into one sample score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotAveraging {
    /// One mean over every aligned entity slot in the sample.
    #[default]
    Pooled,
    /// Mean per fact first, then mean over facts.
    PerFact,
}

/// 1 iff the canonical-string multisets of `pred` and `gold` are equal.
pub fn exact_match(pred: &FactSet, gold: &FactSet) -> bool {
    pred.set_view() == gold.set_view()
}

/// Structural gate of soft match: equal skeleton multisets and equal rule
/// line multisets.
pub fn struct_match(pred: &FactSet, gold: &FactSet) -> bool {
    let mut pred_sk: Vec<_> = pred.facts.iter().map(struct_of).collect();
    let mut gold_sk: Vec<_> = gold.facts.iter().map(struct_of).collect();
    pred_sk.sort();
    gold_sk.sort();
    if pred_sk != gold_sk {
        return false;
    }
    let mut pred_rules = pred.rule_lines.clone();
    let mut gold_rules = gold.rule_lines.clone();
    pred_rules.sort();
    gold_rules.sort();
    pred_rules == gold_rules
}

/// Soft-match score in [0, 1]. Zero when the structural gate fails.
pub fn soft_match(
    pred: &FactSet,
    gold: &FactSet,
    embedder: &Embedder,
    averaging: SlotAveraging,
) -> Result<f64, MetricsError> {
    Ok(soft_match_detail(pred, gold, embedder, averaging)?.1)
}

/// Structural gate flag plus soft score.
pub fn soft_match_detail(
    pred: &FactSet,
    gold: &FactSet,
    embedder: &Embedder,
    averaging: SlotAveraging,
) -> Result<(bool, f64), MetricsError> {
    if !struct_match(pred, gold) {
        return Ok((false, 0.0));
    }

    // Group facts by skeleton; the gate guarantees equal group sizes.
    let mut groups: BTreeMap<_, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, f) in pred.facts.iter().enumerate() {
        groups.entry(struct_of(f)).or_default().0.push(i);
    }
    for (i, f) in gold.facts.iter().enumerate() {
        groups.entry(struct_of(f)).or_default().1.push(i);
    }

    let mut fact_means = Vec::new();
    let mut slot_sum = 0.0;
    let mut slot_count = 0usize;
    for (skeleton, (pred_idx, gold_idx)) in groups {
        let pairs = align_group(pred, gold, &pred_idx, &gold_idx, embedder)?;
        for (pi, gi) in pairs {
            let sims = slot_similarities(pred, gold, pi, gi, embedder)?;
            if skeleton.arity == 0 {
                fact_means.push(1.0);
            } else {
                let sum: f64 = sims.iter().sum();
                fact_means.push(sum / sims.len() as f64);
                slot_sum += sum;
                slot_count += sims.len();
            }
        }
    }

    let score = match averaging {
        SlotAveraging::Pooled => {
            if slot_count == 0 {
                1.0
            } else {
                slot_sum / slot_count as f64
            }
        }
        SlotAveraging::PerFact => {
            if fact_means.is_empty() {
                1.0
            } else {
                fact_means.iter().sum::<f64>() / fact_means.len() as f64
            }
        }
    };
    Ok((true, score))
}

/// Greedy one-to-one alignment of same-skeleton facts by maximal mean slot
/// cosine. Ties break on gold source order, then pred source order.
fn align_group(
    pred: &FactSet,
    gold: &FactSet,
    pred_idx: &[usize],
    gold_idx: &[usize],
    embedder: &Embedder,
) -> Result<Vec<(usize, usize)>, MetricsError> {
    debug_assert_eq!(pred_idx.len(), gold_idx.len());
    if pred_idx.len() == 1 {
        return Ok(vec![(pred_idx[0], gold_idx[0])]);
    }

    let mut mean_sim = vec![vec![0.0f64; gold_idx.len()]; pred_idx.len()];
    for (a, &pi) in pred_idx.iter().enumerate() {
        for (b, &gi) in gold_idx.iter().enumerate() {
            let sims = slot_similarities(pred, gold, pi, gi, embedder)?;
            mean_sim[a][b] = if sims.is_empty() {
                1.0
            } else {
                sims.iter().sum::<f64>() / sims.len() as f64
            };
        }
    }

    let mut pred_free: Vec<usize> = (0..pred_idx.len()).collect();
    let mut gold_free: Vec<usize> = (0..gold_idx.len()).collect();
    let mut pairs = Vec::with_capacity(pred_idx.len());
    while !pred_free.is_empty() {
        let mut best: Option<(usize, usize, f64)> = None;
        for &a in &pred_free {
            for &b in &gold_free {
                let s = mean_sim[a][b];
                let better = match best {
                    None => true,
                    Some((ba, bb, bs)) => {
                        s > bs
                            || (s == bs
                                && (gold_idx[b] < gold_idx[bb]
                                    || (gold_idx[b] == gold_idx[bb] && pred_idx[a] < pred_idx[ba])))
                    }
                };
                if better {
                    best = Some((a, b, s));
                }
            }
        }
        let (a, b, _) = best.expect("free lists are non-empty");
        pred_free.retain(|&x| x != a);
        gold_free.retain(|&x| x != b);
        pairs.push((pred_idx[a], gold_idx[b]));
    }
    // Report in gold source order for determinism downstream.
    pairs.sort_by_key(|&(_, gi)| gi);
    Ok(pairs)
}

/// Per-slot cosine between aligned facts, clamped to [0, 1]. Equal surfaces
/// short-circuit to 1 (this also covers empty strings, which have no
/// embedding).
fn slot_similarities(
    pred: &FactSet,
    gold: &FactSet,
    pi: usize,
    gi: usize,
    embedder: &Embedder,
) -> Result<Vec<f64>, MetricsError> {
    let pf = &pred.facts[pi];
    let gf = &gold.facts[gi];
    debug_assert_eq!(pf.args.len(), gf.args.len());
    let mut sims = Vec::with_capacity(pf.args.len());
    for (pa, ga) in pf.args.iter().zip(&gf.args) {
        let (ps, gs) = (pa.surface(), ga.surface());
        let sim = if ps == gs {
            1.0
        } else if ps.trim().is_empty() || gs.trim().is_empty() {
            0.0
        } else {
            let pv = embedder.embed(ps)?;
            let gv = embedder.embed(gs)?;
            cosine(&pv, &gv)?.max(0.0)
        };
        sims.push(sim);
    }
    Ok(sims)
}

/// Score one prediction against gold. `pred = None` records a parse failure.
pub fn score_sample(
    pred: Option<&FactSet>,
    gold: &FactSet,
    embedder: &Embedder,
    averaging: SlotAveraging,
) -> Result<SampleScore, MetricsError> {
    let pred = match pred {
        None => return Ok(SampleScore::parse_failure()),
        Some(p) => p,
    };
    let exact = exact_match(pred, gold);
    let (struct_matched, soft) = soft_match_detail(pred, gold, embedder, averaging)?;
    Ok(SampleScore {
        exact,
        soft,
        struct_match: struct_matched,
        parse_failed: false,
    })
}

/// Per-seed accuracies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SeedScore {
    pub n: usize,
    pub exact_acc: f64,
    pub soft_acc: f64,
}

/// Accuracies over all samples, per seed, and across seeds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AggregateScore {
    pub n: usize,
    pub exact_acc: f64,
    pub soft_acc: f64,
    pub per_seed: BTreeMap<i64, SeedScore>,
    pub seed_mean_exact: f64,
    pub seed_std_exact: f64,
    pub seed_mean_soft: f64,
    pub seed_std_soft: f64,
}

/// Aggregate sample scores, grouping by the parallel seed labels. Cross-seed
/// deviation is the sample standard deviation of per-seed accuracies.
pub fn aggregate(scores: &[SampleScore], seed_labels: &[i64]) -> Result<AggregateScore, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if scores.len() != seed_labels.len() {
        return Err(MetricsError::LabelMismatch {
            scores: scores.len(),
            labels: seed_labels.len(),
        });
    }

    let n = scores.len();
    let exact_acc = scores.iter().filter(|s| s.exact).count() as f64 / n as f64;
    let soft_acc = scores.iter().map(|s| s.soft).sum::<f64>() / n as f64;

    let mut per_seed_raw: BTreeMap<i64, Vec<&SampleScore>> = BTreeMap::new();
    for (score, &seed) in scores.iter().zip(seed_labels) {
        per_seed_raw.entry(seed).or_default().push(score);
    }
    let per_seed: BTreeMap<i64, SeedScore> = per_seed_raw
        .into_iter()
        .map(|(seed, group)| {
            let n = group.len();
            (
                seed,
                SeedScore {
                    n,
                    exact_acc: group.iter().filter(|s| s.exact).count() as f64 / n as f64,
                    soft_acc: group.iter().map(|s| s.soft).sum::<f64>() / n as f64,
                },
            )
        })
        .collect();

    let exacts: Vec<f64> = per_seed.values().map(|s| s.exact_acc).collect();
    let softs: Vec<f64> = per_seed.values().map(|s| s.soft_acc).collect();
    Ok(AggregateScore {
        n,
        exact_acc,
        soft_acc,
        seed_mean_exact: mean(&exacts),
        seed_std_exact: sample_std(&exacts),
        seed_mean_soft: mean(&softs),
        seed_std_soft: sample_std(&softs),
        per_seed,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
