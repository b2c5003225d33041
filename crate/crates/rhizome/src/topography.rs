//! Phase-7 glue: embeddings from the sidecar (or an offline stand-in), the
//! 2-D layout, and the map built from them.

use std::path::{Path, PathBuf};
use std::time::Duration;

use async_trait::async_trait;
use rhizome_core::topography::build_map;
use rhizome_core::topography::echo::{echo_embedding, DEFAULT_ECHO_DIM, ECHO_MODEL};
use rhizome_core::topography::layout::{
    degenerate_layout, density_labels, pca_2d, DEFAULT_CUT_FACTOR, MIN_POINTS_FOR_CLUSTERING,
};
use rhizome_core::{marginalization, EmbeddingMatrix, PaperRecord, TopographyMap, TopographyParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding service: {0}")]
    Http(String),
    #[error("embedding service returned {got} {what} for {expected} inputs")]
    Cardinality { what: &'static str, expected: usize, got: usize },
    #[error("embedding matrix: {0}")]
    Matrix(#[from] rhizome_core::TopographyError),
    #[error("injected matrix {path}: {reason}")]
    Injected { path: String, reason: String },
}

impl From<reqwest::Error> for EmbeddingError {
    fn from(e: reqwest::Error) -> Self {
        EmbeddingError::Http(e.to_string())
    }
}

/// The three model-backed steps of the topography.
#[async_trait]
pub trait EmbeddingBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Vectors plus the name of the model that produced them.
    async fn embed(&self, texts: &[String]) -> Result<(Vec<Vec<f64>>, String), EmbeddingError>;

    async fn reduce(&self, vectors: &[Vec<f64>], seed: u64) -> Result<Vec<[f64; 2]>, EmbeddingError>;

    async fn cluster(&self, points: &[[f64; 2]], min_cluster_size: usize) -> Result<Vec<i64>, EmbeddingError>;
}

#[derive(Debug, Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    model: String,
    #[allow(dead_code)]
    dim: usize,
}

#[derive(Debug, Serialize)]
struct ReduceRequest<'a> {
    vectors: &'a [Vec<f64>],
    target_dim: usize,
    seed: u64,
}

#[derive(Debug, Deserialize)]
struct ReduceResponse {
    points: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct ClusterRequest<'a> {
    points: &'a [[f64; 2]],
    min_cluster_size: usize,
}

#[derive(Debug, Deserialize)]
struct ClusterResponse {
    labels: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct SidecarHealth {
    #[serde(default)]
    pub model_loaded: bool,
    #[serde(flatten)]
    pub details: serde_json::Map<String, serde_json::Value>,
}

/// HTTP client for the embedding sidecar.
pub struct SidecarClient {
    base: String,
    model: Option<String>,
    http: reqwest::Client,
}

impl SidecarClient {
    pub fn new(base_url: &str, model: Option<String>) -> Self {
        let http = reqwest::Client::builder().timeout(Duration::from_secs(300)).build().expect("http client");
        SidecarClient { base: base_url.trim_end_matches('/').to_string(), model, http }
    }

    async fn post<B: Serialize, R: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<R, EmbeddingError> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            return Err(EmbeddingError::Http(format!("{path} returned {status}: {}", text.trim())));
        }
        Ok(resp.json().await?)
    }

    pub async fn health(&self) -> Result<SidecarHealth, EmbeddingError> {
        let resp = self.http.get(format!("{}/health", self.base)).send().await?.error_for_status()?;
        Ok(resp.json().await?)
    }
}

#[async_trait]
impl EmbeddingBackend for SidecarClient {
    fn name(&self) -> &'static str {
        "sidecar"
    }

    async fn embed(&self, texts: &[String]) -> Result<(Vec<Vec<f64>>, String), EmbeddingError> {
        let resp: EmbedResponse = self.post("/embed", &EmbedRequest { texts, model: self.model.as_deref() }).await?;
        if resp.vectors.len() != texts.len() {
            return Err(EmbeddingError::Cardinality {
                what: "vectors",
                expected: texts.len(),
                got: resp.vectors.len(),
            });
        }
        Ok((resp.vectors, resp.model))
    }

    async fn reduce(&self, vectors: &[Vec<f64>], seed: u64) -> Result<Vec<[f64; 2]>, EmbeddingError> {
        let resp: ReduceResponse = self.post("/reduce", &ReduceRequest { vectors, target_dim: 2, seed }).await?;
        if resp.points.len() != vectors.len() {
            return Err(EmbeddingError::Cardinality {
                what: "points",
                expected: vectors.len(),
                got: resp.points.len(),
            });
        }
        resp.points
            .iter()
            .map(|p| match p.as_slice() {
                [x, y] if x.is_finite() && y.is_finite() => Ok([*x, *y]),
                _ => Err(EmbeddingError::Http(format!("/reduce returned a malformed point {p:?}"))),
            })
            .collect()
    }

    async fn cluster(&self, points: &[[f64; 2]], min_cluster_size: usize) -> Result<Vec<i64>, EmbeddingError> {
        let body = ClusterRequest { points, min_cluster_size };
        let resp: ClusterResponse = self.post("/cluster", &body).await?;
        if resp.labels.len() != points.len() {
            return Err(EmbeddingError::Cardinality { what: "labels", expected: points.len(), got: resp.labels.len() });
        }
        Ok(resp.labels)
    }
}

/// In-process stand-in: hash-derived echo vectors, PCA and spanning-tree
/// density labels. Fully deterministic and needs no model weights.
pub struct LocalBackend {
    pub dim: usize,
    pub cut_factor: f64,
}

impl Default for LocalBackend {
    fn default() -> Self {
        LocalBackend { dim: DEFAULT_ECHO_DIM, cut_factor: DEFAULT_CUT_FACTOR }
    }
}

#[async_trait]
impl EmbeddingBackend for LocalBackend {
    fn name(&self) -> &'static str {
        "local"
    }

    async fn embed(&self, texts: &[String]) -> Result<(Vec<Vec<f64>>, String), EmbeddingError> {
        Ok((texts.iter().map(|t| echo_embedding(t, self.dim)).collect(), ECHO_MODEL.to_string()))
    }

    async fn reduce(&self, vectors: &[Vec<f64>], seed: u64) -> Result<Vec<[f64; 2]>, EmbeddingError> {
        Ok(pca_2d(vectors, seed))
    }

    async fn cluster(&self, points: &[[f64; 2]], min_cluster_size: usize) -> Result<Vec<i64>, EmbeddingError> {
        Ok(density_labels(points, min_cluster_size, self.cut_factor))
    }
}

/// Reads a matrix file: a `paper_id,d0,d1,...` header, then one row per paper.
pub fn load_matrix_csv(path: &Path) -> Result<EmbeddingMatrix, EmbeddingError> {
    let fail = |reason: String| EmbeddingError::Injected { path: path.display().to_string(), reason };
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let header = reader.headers().map_err(|e| fail(e.to_string()))?;
    if header.get(0).map(str::trim) != Some("paper_id") {
        return Err(fail("first column must be paper_id".into()));
    }
    let (mut ids, mut vectors) = (Vec::new(), Vec::new());
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| fail(e.to_string()))?;
        let id = row.get(0).unwrap_or_default().trim().to_string();
        let values: Result<Vec<f64>, _> = row.iter().skip(1).map(|v| v.trim().parse::<f64>()).collect();
        vectors.push(values.map_err(|e| fail(format!("row {}: {e}", line + 2)))?);
        ids.push(id);
    }
    let model = path.file_stem().map_or_else(|| "injected".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(EmbeddingMatrix::new(ids, vectors, format!("injected:{model}"))?)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EmbeddingConfig {
    Sidecar {
        url: String,
        model: Option<String>,
    },
    /// Offline backend, see [`LocalBackend`].
    #[default]
    Local,
    /// Vectors from a file; reduction and clustering run locally.
    Injected {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TopographyOutcome {
    Pending,
    Ready {
        model_name: String,
        backend: String,
        /// Which corpus the map covers.
        corpus: String,
        map: TopographyMap,
    },
    Unavailable {
        reason: String,
    },
}

impl TopographyOutcome {
    pub fn map(&self) -> Option<&TopographyMap> {
        match self {
            TopographyOutcome::Ready { map, .. } => Some(map),
            _ => None,
        }
    }
}

pub const FINAL_CORPUS: &str = "post-reentry";

/// Embeds, lays out and maps the corpus. Corpora under five papers skip
/// reduction and clustering.
pub async fn compute_topography(
    corpus: &[PaperRecord],
    config: &EmbeddingConfig,
    params: &TopographyParams,
    seed: u64,
) -> Result<TopographyOutcome, EmbeddingError> {
    let ids: Vec<String> = corpus.iter().map(|p| p.id.clone()).collect();
    let texts: Vec<String> = corpus.iter().map(PaperRecord::text).collect();
    let local = LocalBackend::default();
    let sidecar;
    let (backend, matrix): (&dyn EmbeddingBackend, EmbeddingMatrix) = match config {
        EmbeddingConfig::Sidecar { url, model } => {
            sidecar = SidecarClient::new(url, model.clone());
            let (vectors, model) = sidecar.embed(&texts).await?;
            (&sidecar, EmbeddingMatrix::new(ids.clone(), vectors, model)?)
        }
        EmbeddingConfig::Local => {
            let (vectors, model) = local.embed(&texts).await?;
            (&local, EmbeddingMatrix::new(ids.clone(), vectors, model)?)
        }
        EmbeddingConfig::Injected { path } => {
            let loaded = load_matrix_csv(path)?;
            let aligned = loaded.aligned_to(&ids).ok_or_else(|| EmbeddingError::Injected {
                path: path.display().to_string(),
                reason: format!("ids do not match the {}-paper corpus", ids.len()),
            })?;
            (&local, aligned)
        }
    };
    let marg = marginalization(matrix.vectors());
    let (points, labels) = if matrix.len() < MIN_POINTS_FOR_CLUSTERING {
        degenerate_layout(matrix.vectors())
    } else {
        let points = backend.reduce(matrix.vectors(), seed).await?;
        let labels = backend.cluster(&points, params.min_cluster_size).await?;
        (points, labels)
    };
    let map = build_map(&ids, points, &labels, &texts, marg, params);
    Ok(TopographyOutcome::Ready {
        model_name: matrix.model_name().to_string(),
        backend: backend.name().to_string(),
        corpus: FINAL_CORPUS.to_string(),
        map,
    })
}
