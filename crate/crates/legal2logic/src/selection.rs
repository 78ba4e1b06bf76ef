//! Diversity-aware demonstration selection.
//!
//! [`diverse_sim`] ranks pool items against a query with a greedy
//! similarity/diversity trade-off:
//!
//! 1. Embed the query and every pool item.
//! 2. Restrict candidates to the boundary set: the `boundary_size` items most
//!    similar to the query (ties broken by smaller pool index).
//! 3. Repeat until `min(k, |boundary|)` items are selected: score every
//!    remaining candidate as
//!    `rank = lambda * sim(item, query) - (1 - lambda) * max sim(item, selected)`
//!    (the max over an empty selection is 0), pick the argmax (ties broken by
//!    higher query similarity, then smaller pool index), and move it from the
//!    boundary into the selection.
//!
//! `lambda = 1` reduces to plain top-k cosine retrieval; smaller values
//! penalize redundancy among the selected set.
//!
//! [`select_hybrid`] runs the ranker twice — over raw case texts and over
//! entity-agnostic template texts — and concatenates the selections, cases
//! first.

use thiserror::Error;

use crate::embeddings::{cosine, EmbedError, Embedder, EmbeddingVector};
use crate::proleg::FactSet;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("demonstration pool is empty")]
    EmptyPool,
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} selected items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// What a demonstration's text is: a concrete case or a template surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoKind {
    Case,
    Template,
}

/// A retrievable exemplar: text plus its gold fact set.
#[derive(Debug, Clone)]
pub struct Demonstration {
    pub id: String,
    pub kind: DemoKind,
    pub text: String,
    pub facts: FactSet,
    /// Filled during selection.
    pub embedding: Option<EmbeddingVector>,
}

impl Demonstration {
    pub fn new(id: impl Into<String>, kind: DemoKind, text: impl Into<String>, facts: FactSet) -> Self {
        Demonstration {
            id: id.into(),
            kind,
            text: text.into(),
            facts,
            embedding: None,
        }
    }
}

/// A homogeneous, id-unique collection of demonstrations.
#[derive(Debug, Clone)]
pub struct Pool {
    kind: DemoKind,
    items: Vec<Demonstration>,
}

impl Pool {
    pub fn new(kind: DemoKind, items: Vec<Demonstration>) -> Result<Self, SelectError> {
        let mut seen = std::collections::HashSet::new();
        for item in &items {
            if item.kind != kind {
                return Err(SelectError::InvalidConfig(format!(
                    "pool of kind {kind:?} contains item `{}` of kind {:?}",
                    item.id, item.kind
                )));
            }
            if item.text.is_empty() {
                return Err(SelectError::InvalidConfig(format!(
                    "item `{}` has empty text",
                    item.id
                )));
            }
            if !seen.insert(item.id.clone()) {
                return Err(SelectError::InvalidConfig(format!(
                    "duplicate demonstration id `{}`",
                    item.id
                )));
            }
        }
        Ok(Pool { kind, items })
    }

    pub fn kind(&self) -> DemoKind {
        self.kind
    }

    pub fn items(&self) -> &[Demonstration] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// How the candidate set evolves across greedy steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Candidates are the boundary set, which shrinks as items are selected.
    #[default]
    Shrinking,
    /// Candidates are all unselected pool items at every step (ablation).
    FullPool,
}

pub const DEFAULT_BOUNDARY_SIZE: usize = 10;

#[derive(Debug, Clone)]
pub struct SelectionConfig {
    /// Number of demonstrations to select.
    pub k: usize,
    /// Similarity/diversity balance in [0, 1]; 1 is pure similarity.
    pub lambda: f64,
    /// Size of the most-similar-to-query candidate boundary.
    pub boundary_size: usize,
    pub boundary_mode: BoundaryMode,
}

impl SelectionConfig {
    pub fn new(k: usize, lambda: f64) -> Self {
        SelectionConfig {
            k,
            lambda,
            boundary_size: DEFAULT_BOUNDARY_SIZE,
            boundary_mode: BoundaryMode::Shrinking,
        }
    }

    pub fn with_boundary_size(mut self, boundary_size: usize) -> Self {
        self.boundary_size = boundary_size;
        self
    }

    pub fn with_boundary_mode(mut self, mode: BoundaryMode) -> Self {
        self.boundary_mode = mode;
        self
    }

    fn validate(&self) -> Result<(), SelectError> {
        if self.k == 0 {
            return Err(SelectError::InvalidConfig("k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(SelectError::InvalidConfig(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.boundary_size == 0 {
            return Err(SelectError::InvalidConfig(
                "boundary_size must be positive".into(),
            ));
        }
        if self.k > self.boundary_size {
            return Err(SelectError::InvalidConfig(format!(
                "k = {} exceeds boundary_size = {}; raise boundary_size explicitly to select more",
                self.k, self.boundary_size
            )));
        }
        Ok(())
    }
}

/// Selected demonstrations in selection order, with the rank score each item
/// had when it was picked and the query embedding used.
#[derive(Debug, Clone)]
pub struct SelectedSet {
    pub items: Vec<Demonstration>,
    pub scores: Vec<f64>,
    pub query_embedding: EmbeddingVector,
}

impl SelectedSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|d| d.id.as_str()).collect()
    }
}

/// Greedy diversity-aware ranking of `pool` against `query_text`.
pub fn diverse_sim(
    query_text: &str,
    pool: &Pool,
    cfg: &SelectionConfig,
    embedder: &Embedder,
) -> Result<SelectedSet, SelectError> {
    cfg.validate()?;
    if pool.is_empty() {
        return Err(SelectError::EmptyPool);
    }

    let query_embedding = embedder.embed(query_text)?;
    let texts: Vec<&str> = pool.items.iter().map(|d| d.text.as_str()).collect();
    let vectors = embedder.embed_batch(&texts)?;
    let query_sims: Vec<f64> = vectors
        .iter()
        .map(|v| cosine(v, &query_embedding))
        .collect::<Result<_, _>>()?;

    // Boundary: top boundary_size by query similarity, ties to smaller index.
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        query_sims[b]
            .partial_cmp(&query_sims[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut candidates: Vec<usize> = match cfg.boundary_mode {
        BoundaryMode::Shrinking => order
            .iter()
            .copied()
            .take(cfg.boundary_size.min(pool.len()))
            .collect(),
        BoundaryMode::FullPool => order,
    };
    let target = cfg.k.min(candidates.len());

    let mut selected_idx: Vec<usize> = Vec::with_capacity(target);
    let mut scores = Vec::with_capacity(target);
    while selected_idx.len() < target {
        let mut best: Option<(usize, usize, f64)> = None; // (slot, pool idx, rank)
        for (slot, &i) in candidates.iter().enumerate() {
            // Max over an empty selection is defined as 0; over a non-empty
            // selection it is the true maximum, negative or not.
            let max_sel_sim = selected_idx
                .iter()
                .map(|&j| cosine(&vectors[i], &vectors[j]).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let max_sel_sim = if selected_idx.is_empty() { 0.0 } else { max_sel_sim };
            let rank = cfg.lambda * query_sims[i] - (1.0 - cfg.lambda) * max_sel_sim;
            let better = match best {
                None => true,
                Some((_, bi, brank)) => {
                    rank > brank
                        || (rank == brank
                            && (query_sims[i] > query_sims[bi]
                                || (query_sims[i] == query_sims[bi] && i < bi)))
                }
            };
            if better {
                best = Some((slot, i, rank));
            }
        }
        let (slot, i, rank) = best.expect("candidates are non-empty while selecting");
        candidates.remove(slot);
        selected_idx.push(i);
        scores.push(rank);
    }

    let items = selected_idx
        .iter()
        .map(|&i| {
            let mut demo = pool.items[i].clone();
            demo.embedding = Some(vectors[i].clone());
            demo
        })
        .collect();
    Ok(SelectedSet {
        items,
        scores,
        query_embedding,
    })
}

/// Hybrid few-shot composition: `n` case-based selections followed by `m`
/// template-based selections, both ranked against the same raw query text
/// with the same lambda.
#[allow(clippy::too_many_arguments)]
pub fn select_hybrid(
    query_text: &str,
    case_pool: &Pool,
    template_pool: &Pool,
    n: usize,
    m: usize,
    lambda: f64,
    boundary: (usize, BoundaryMode),
    embedder: &Embedder,
) -> Result<SelectedSet, SelectError> {
    if n + m == 0 {
        return Err(SelectError::InvalidConfig(
            "n + m must be at least 1".into(),
        ));
    }
    let (boundary_size, boundary_mode) = boundary;
    let mut items = Vec::new();
    let mut scores = Vec::new();
    let mut query_embedding = None;
    if n > 0 {
        let cfg = SelectionConfig::new(n, lambda)
            .with_boundary_size(boundary_size)
            .with_boundary_mode(boundary_mode);
        let sel = diverse_sim(query_text, case_pool, &cfg, embedder)?;
        items.extend(sel.items);
        scores.extend(sel.scores);
        query_embedding = Some(sel.query_embedding);
    }
    if m > 0 {
        let cfg = SelectionConfig::new(m, lambda)
            .with_boundary_size(boundary_size)
            .with_boundary_mode(boundary_mode);
        let sel = diverse_sim(query_text, template_pool, &cfg, embedder)?;
        items.extend(sel.items);
        scores.extend(sel.scores);
        query_embedding.get_or_insert(sel.query_embedding);
    }
    Ok(SelectedSet {
        items,
        scores,
        query_embedding: query_embedding.expect("n + m >= 1"),
    })
}

/// Cosine statistics over a selected set.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DiversityReport {
    pub mean_pairwise_sim: f64,
    pub min_pairwise_sim: f64,
    pub mean_sim_to_query: f64,
}

/// Pairwise and to-query similarity statistics of the selected items.
/// Requires at least two items for the pairwise statistics.
pub fn diversity_report(s: &SelectedSet) -> Result<DiversityReport, SelectError> {
    if s.len() < 2 {
        return Err(SelectError::TooFewItems {
            needed: 2,
            got: s.len(),
        });
    }
    let vectors: Vec<&EmbeddingVector> = s
        .items
        .iter()
        .map(|d| {
            d.embedding
                .as_ref()
                .expect("selected demonstrations carry embeddings")
        })
        .collect();
    let mut pair_sum = 0.0;
    let mut pair_min = f64::INFINITY;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let sim = cosine(vectors[i], vectors[j])?;
            pair_sum += sim;
            pair_min = pair_min.min(sim);
            pairs += 1;
        }
    }
    let mut query_sum = 0.0;
    for v in &vectors {
        query_sum += cosine(v, &s.query_embedding)?;
    }
    Ok(DiversityReport {
        mean_pairwise_sim: pair_sum / pairs as f64,
        min_pairwise_sim: pair_min,
        mean_sim_to_query: query_sum / vectors.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{DeterministicLocalBackend, EmbeddingBackend};
    use crate::proleg::parse_fact_set;

    /// Test backend with hand-picked vectors per text.
    struct VecBackend {
        map: std::collections::HashMap<String, Vec<f64>>,
    }

    impl VecBackend {
        fn new(pairs: &[(&str, &[f64])]) -> Self {
            VecBackend {
                map: pairs
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_vec()))
                    .collect(),
            }
        }
    }

    impl EmbeddingBackend for VecBackend {
        fn id(&self) -> String {
            "test-vec".into()
        }
        fn dimension(&self) -> Option<usize> {
            None
        }
        fn embed_uncached(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
            self.map
                .get(text)
                .map(|v| EmbeddingVector::new(v.clone()))
                .ok_or_else(|| EmbedError::BackendUnavailable(format!("no vector for {text:?}")))
        }
    }

    fn pool_of(kind: DemoKind, texts: &[&str]) -> Pool {
        let items = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Demonstration::new(format!("d{i}"), kind, *t, parse_fact_set("p(\"x\").").unwrap())
            })
            .collect();
        Pool::new(kind, items).unwrap()
    }

    #[test]
    fn lambda_one_equals_topk_cosine() {
        let backend = VecBackend::new(&[
            ("q", &[1.0, 0.0, 0.0]),
            ("a", &[0.9, 0.1, 0.0]),
            ("b", &[0.8, 0.2, 0.0]),
            ("c", &[0.0, 1.0, 0.0]),
            ("d", &[0.7, 0.0, 0.7]),
        ]);
        let embedder = Embedder::new(backend);
        let pool = pool_of(DemoKind::Case, &["c", "a", "d", "b"]);
        let sel =
            diverse_sim("q", &pool, &SelectionConfig::new(3, 1.0), &embedder).unwrap();
        // Top-3 by cosine to q: a, b, d.
        assert_eq!(sel.ids(), vec!["d1", "d3", "d2"]);
    }

    #[test]
    fn k1_picks_most_similar_for_any_lambda() {
        let backend = VecBackend::new(&[
            ("q", &[1.0, 0.0]),
            ("near", &[0.95, 0.05]),
            ("far", &[0.0, 1.0]),
        ]);
        let embedder = Embedder::new(backend);
        let pool = pool_of(DemoKind::Case, &["far", "near"]);
        for lambda in [0.0, 0.3, 0.6, 1.0] {
            let sel =
                diverse_sim("q", &pool, &SelectionConfig::new(1, lambda), &embedder).unwrap();
            assert_eq!(sel.ids(), vec!["d1"], "lambda={lambda}");
        }
    }

    #[test]
    fn redundant_duplicate_is_penalized() {
        // Two identical items and one distinct item, all equally similar to
        // the query. After picking one copy, its twin scores
        // lambda*s - (1-lambda) while the distinct item scores lambda*s.
        let backend = VecBackend::new(&[
            ("q", &[1.0, 1.0, 0.0]),
            ("twin", &[1.0, 0.0, 0.0]),
            ("twin2", &[1.0, 0.0, 0.0]),
            ("other", &[0.0, 1.0, 0.0]),
        ]);
        let embedder = Embedder::new(backend);
        let pool = pool_of(DemoKind::Case, &["twin", "twin2", "other"]);
        let sel =
            diverse_sim("q", &pool, &SelectionConfig::new(2, 0.5), &embedder).unwrap();
        assert_eq!(sel.ids(), vec!["d0", "d2"]);
    }

    #[test]
    fn four_item_pool_matches_hand_oracle() {
        // Deterministic local embeddings of short strings; the expected trace
        // is replayed step by step on the explicit similarity matrix.
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let texts = ["aaa", "aab", "zzz", "aaz"];
        let pool = pool_of(DemoKind::Case, &texts);
        let (k, lambda) = (2usize, 0.5f64);

        let q = embedder.embed("aaa").unwrap();
        let vs: Vec<_> = texts.iter().map(|t| embedder.embed(t).unwrap()).collect();
        let sim_q: Vec<f64> = vs.iter().map(|v| cosine(v, &q).unwrap()).collect();
        let sim: Vec<Vec<f64>> = vs
            .iter()
            .map(|a| vs.iter().map(|b| cosine(a, b).unwrap()).collect())
            .collect();

        // Hand replay of the greedy loop.
        let mut remaining: Vec<usize> = {
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by(|&a, &b| sim_q[b].partial_cmp(&sim_q[a]).unwrap().then(a.cmp(&b)));
            order
        };
        let mut expected = Vec::new();
        while expected.len() < k {
            let mut best: Option<(usize, f64)> = None;
            for &i in &remaining {
                let max_s = if expected.is_empty() {
                    0.0
                } else {
                    expected
                        .iter()
                        .map(|&j: &usize| sim[i][j])
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                let rank = lambda * sim_q[i] - (1.0 - lambda) * max_s;
                let better = match best {
                    None => true,
                    Some((bi, brank)) => {
                        rank > brank
                            || (rank == brank
                                && (sim_q[i] > sim_q[bi]
                                    || (sim_q[i] == sim_q[bi] && i < bi)))
                    }
                };
                if better {
                    best = Some((i, rank));
                }
            }
            let (i, _) = best.unwrap();
            remaining.retain(|&x| x != i);
            expected.push(i);
        }

        let sel = diverse_sim("aaa", &pool, &SelectionConfig::new(k, lambda), &embedder).unwrap();
        let got: Vec<usize> = sel
            .ids()
            .iter()
            .map(|id| id[1..].parse::<usize>().unwrap())
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got[0], 0, "first pick is the query itself");
    }

    #[test]
    fn empty_pool_is_an_error() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let pool = Pool::new(DemoKind::Case, vec![]).unwrap();
        assert!(matches!(
            diverse_sim("q", &pool, &SelectionConfig::new(1, 0.5), &embedder),
            Err(SelectError::EmptyPool)
        ));
    }

    #[test]
    fn k_above_boundary_is_rejected() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let pool = pool_of(DemoKind::Case, &["a", "b"]);
        let err = diverse_sim("q", &pool, &SelectionConfig::new(11, 0.5), &embedder).unwrap_err();
        assert!(matches!(err, SelectError::InvalidConfig(_)));
        // Raising the boundary makes the same k valid.
        let cfg = SelectionConfig::new(11, 0.5).with_boundary_size(16);
        assert!(diverse_sim("q", &pool, &cfg, &embedder).is_ok());
    }

    #[test]
    fn selection_is_capped_by_pool_size() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let pool = pool_of(DemoKind::Case, &["a", "b"]);
        let sel = diverse_sim("q", &pool, &SelectionConfig::new(5, 0.5), &embedder).unwrap();
        assert_eq!(sel.len(), 2);
    }

    #[test]
    fn hybrid_orders_cases_before_templates() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let cases = pool_of(DemoKind::Case, &["case one", "case two", "case three", "case four"]);
        let templates = pool_of(
            DemoKind::Template,
            &["{A} one", "{A} two", "{A} three", "{A} four"],
        );
        let sel = select_hybrid(
            "case one",
            &cases,
            &templates,
            3,
            3,
            0.6,
            (DEFAULT_BOUNDARY_SIZE, BoundaryMode::Shrinking),
            &embedder,
        )
        .unwrap();
        assert_eq!(sel.len(), 6);
        assert!(sel.items[..3].iter().all(|d| d.kind == DemoKind::Case));
        assert!(sel.items[3..].iter().all(|d| d.kind == DemoKind::Template));
    }

    #[test]
    fn hybrid_pure_case_and_empty_error() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let cases = pool_of(DemoKind::Case, &["one", "two", "three", "four", "five", "six"]);
        let templates = pool_of(DemoKind::Template, &["{A} t"]);
        let sel = select_hybrid(
            "one",
            &cases,
            &templates,
            5,
            0,
            0.6,
            (DEFAULT_BOUNDARY_SIZE, BoundaryMode::Shrinking),
            &embedder,
        )
        .unwrap();
        assert_eq!(sel.len(), 5);
        assert!(sel.items.iter().all(|d| d.kind == DemoKind::Case));

        assert!(matches!(
            select_hybrid(
                "one",
                &cases,
                &templates,
                0,
                0,
                0.6,
                (DEFAULT_BOUNDARY_SIZE, BoundaryMode::Shrinking),
                &embedder,
            ),
            Err(SelectError::InvalidConfig(_))
        ));
    }

    #[test]
    fn diversity_report_identical_and_orthogonal() {
        let backend = VecBackend::new(&[
            ("q", &[1.0, 0.0]),
            ("same1", &[1.0, 1.0]),
            ("same2", &[1.0, 1.0]),
        ]);
        let embedder = Embedder::new(backend);
        let pool = pool_of(DemoKind::Case, &["same1", "same2"]);
        let sel = diverse_sim("q", &pool, &SelectionConfig::new(2, 1.0), &embedder).unwrap();
        let report = diversity_report(&sel).unwrap();
        assert!((report.mean_pairwise_sim - 1.0).abs() < 1e-12);

        let backend = VecBackend::new(&[
            ("q", &[1.0, 1.0]),
            ("x", &[1.0, 0.0]),
            ("y", &[0.0, 1.0]),
        ]);
        let embedder = Embedder::new(backend);
        let pool = pool_of(DemoKind::Case, &["x", "y"]);
        let sel = diverse_sim("q", &pool, &SelectionConfig::new(2, 1.0), &embedder).unwrap();
        let report = diversity_report(&sel).unwrap();
        assert_eq!(report.mean_pairwise_sim, 0.0);
        assert_eq!(report.min_pairwise_sim, 0.0);
    }

    #[test]
    fn diversity_report_needs_two_items() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let pool = pool_of(DemoKind::Case, &["only"]);
        let sel = diverse_sim("only", &pool, &SelectionConfig::new(1, 0.5), &embedder).unwrap();
        assert!(matches!(
            diversity_report(&sel),
            Err(SelectError::TooFewItems { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn determinism_identical_inputs_identical_output() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let texts: Vec<String> = (0..8).map(|i| format!("clause {i} about breach")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let pool = pool_of(DemoKind::Case, &refs);
        let cfg = SelectionConfig::new(4, 0.6);
        let a = diverse_sim("clause 3 about breach", &pool, &cfg, &embedder).unwrap();
        let b = diverse_sim("clause 3 about breach", &pool, &cfg, &embedder).unwrap();
        assert_eq!(a.ids(), b.ids());
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn boundary_containment() {
        let embedder = Embedder::new(DeterministicLocalBackend::default());
        let texts: Vec<String> = (0..25).map(|i| format!("filler text number {i}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let pool = pool_of(DemoKind::Case, &refs);
        let sel = diverse_sim(
            "filler text number 3",
            &pool,
            &SelectionConfig::new(5, 0.2),
            &embedder,
        )
        .unwrap();

        // Recompute the boundary independently.
        let q = embedder.embed("filler text number 3").unwrap();
        let mut sims: Vec<(usize, f64)> = refs
            .iter()
            .enumerate()
            .map(|(i, t)| (i, cosine(&embedder.embed(t).unwrap(), &q).unwrap()))
            .collect();
        sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let boundary: std::collections::HashSet<String> = sims[..10]
            .iter()
            .map(|(i, _)| format!("d{i}"))
            .collect();
        for id in sel.ids() {
            assert!(boundary.contains(id), "{id} escaped the boundary");
        }
    }
}
