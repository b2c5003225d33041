use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::TopographyError;

/// One embedding row per paper, all of the same dimension and finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingMatrix {
    paper_ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    model_name: String,
}

impl EmbeddingMatrix {
    pub fn new(paper_ids: Vec<String>, vectors: Vec<Vec<f64>>, model_name: String) -> Result<Self, TopographyError> {
        if paper_ids.len() != vectors.len() {
            return Err(TopographyError::LengthMismatch { ids: paper_ids.len(), rows: vectors.len() });
        }
        let first = vectors.first().ok_or(TopographyError::Empty)?;
        let dim = first.len();
        if dim == 0 {
            return Err(TopographyError::ZeroDimension);
        }
        for (row, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(TopographyError::Ragged { row, expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(TopographyError::NonFinite { row });
            }
        }
        let mut seen = BTreeSet::new();
        for id in &paper_ids {
            if !seen.insert(id.as_str()) {
                return Err(TopographyError::DuplicateId(id.clone()));
            }
        }
        Ok(EmbeddingMatrix { paper_ids, vectors, model_name })
    }

    pub fn paper_ids(&self) -> &[String] {
        &self.paper_ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Rows re-ordered to follow `ids`; `None` if the id sets differ.
    pub fn aligned_to(&self, ids: &[String]) -> Option<EmbeddingMatrix> {
        if ids.len() != self.paper_ids.len() {
            return None;
        }
        let mut vectors = Vec::with_capacity(ids.len());
        for id in ids {
            let row = self.paper_ids.iter().position(|p| p == id)?;
            vectors.push(self.vectors[row].clone());
        }
        Some(EmbeddingMatrix { paper_ids: ids.to_vec(), vectors, model_name: self.model_name.clone() })
    }
}

/// Distance of each row from the mean row, divided by the largest such
/// distance. Identical rows give all zeros.
pub fn marginalization(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    if vectors.iter().all(|v| *v == vectors[0]) {
        return vec![0.0; n];
    }
    let dim = vectors[0].len();
    let mut centroid = vec![0.0; dim];
    for v in vectors {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x;
        }
    }
    for c in &mut centroid {
        *c /= n as f64;
    }
    let dist: Vec<f64> =
        vectors.iter().map(|v| libm::sqrt(v.iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum())).collect();
    let max = dist.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return vec![0.0; n];
    }
    dist.into_iter().map(|d| d / max).collect()
}
