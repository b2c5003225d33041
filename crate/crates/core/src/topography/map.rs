use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::terms::{top_terms, DocumentFrequencies};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopographyParams {
    pub min_cluster_size: usize,
    pub top_k_terms: usize,
    /// Centroid distance must exceed this multiple of the summed radii for a void.
    pub void_gap_ratio: f64,
    /// Minimum top-term Jaccard for an orthogonal isolation.
    pub isolation_jaccard: f64,
}

impl Default for TopographyParams {
    fn default() -> Self {
        TopographyParams { min_cluster_size: 3, top_k_terms: 20, void_gap_ratio: 2.0, isolation_jaccard: 0.30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticCluster {
    pub label: i64,
    pub member_ids: Vec<String>,
    pub centroid_2d: [f64; 2],
    pub rms_radius: f64,
    pub top_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticVoid {
    pub cluster_pair: (i64, i64),
    pub midpoint_2d: [f64; 2],
    /// Centroid distance over summed radii (`f64::MAX` when both radii are 0).
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalIsolation {
    pub cluster_pair: (i64, i64),
    pub vocab_jaccard: f64,
    pub centroid_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopographyMap {
    pub paper_ids: Vec<String>,
    pub points: Vec<[f64; 2]>,
    /// Per paper; −1 is noise.
    pub cluster_labels: Vec<i64>,
    pub clusters: Vec<SemanticCluster>,
    pub voids: Vec<SemanticVoid>,
    pub isolations: Vec<OrthogonalIsolation>,
    pub marginalization: Vec<f64>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Drops clusters below `min_cluster_size` to noise, renumbers the rest
/// densely in order of first member, and computes centroids and RMS radii.
/// `top_terms` are left empty.
pub fn summarize_clusters(
    paper_ids: &[String],
    points: &[[f64; 2]],
    labels: &[i64],
    min_cluster_size: usize,
) -> (Vec<i64>, Vec<SemanticCluster>) {
    let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            members.entry(l).or_default().push(i);
        }
    }
    let mut kept: Vec<Vec<usize>> = members.into_values().filter(|m| m.len() >= min_cluster_size).collect();
    kept.sort_by_key(|m| m[0]);

    let mut out_labels = alloc::vec![-1i64; labels.len()];
    let mut clusters = Vec::with_capacity(kept.len());
    for (label, idx) in kept.iter().enumerate() {
        let n = idx.len() as f64;
        let cx = idx.iter().map(|i| points[*i][0]).sum::<f64>() / n;
        let cy = idx.iter().map(|i| points[*i][1]).sum::<f64>() / n;
        let ms = idx
            .iter()
            .map(|i| {
                let d = dist(points[*i], [cx, cy]);
                d * d
            })
            .sum::<f64>()
            / n;
        for &i in idx {
            out_labels[i] = label as i64;
        }
        clusters.push(SemanticCluster {
            label: label as i64,
            member_ids: idx.iter().map(|i| paper_ids[*i].clone()).collect(),
            centroid_2d: [cx, cy],
            rms_radius: libm::sqrt(ms),
            top_terms: Vec::new(),
        });
    }
    (out_labels, clusters)
}

/// Cluster pairs separated by more than `gap_ratio` times their summed radii
/// whose middle third of the centroid segment holds no point within the
/// smaller radius.
pub fn detect_voids(clusters: &[SemanticCluster], points: &[[f64; 2]], gap_ratio: f64) -> Vec<SemanticVoid> {
    let mut voids = Vec::new();
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            let d = dist(a.centroid_2d, b.centroid_2d);
            let radii = a.rms_radius + b.rms_radius;
            if d <= gap_ratio * radii {
                continue;
            }
            let (ca, cb) = (a.centroid_2d, b.centroid_2d);
            let third = [(cb[0] - ca[0]) / 3.0, (cb[1] - ca[1]) / 3.0];
            let start = [ca[0] + third[0], ca[1] + third[1]];
            let end = [ca[0] + 2.0 * third[0], ca[1] + 2.0 * third[1]];
            let reach = a.rms_radius.min(b.rms_radius);
            if points.iter().any(|p| point_segment_distance(*p, start, end) <= reach) {
                continue;
            }
            voids.push(SemanticVoid {
                cluster_pair: (a.label, b.label),
                midpoint_2d: [(ca[0] + cb[0]) / 2.0, (ca[1] + cb[1]) / 2.0],
                gap_ratio: if radii > 0.0 { d / radii } else { f64::MAX },
            });
        }
    }
    voids
}

fn term_jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

/// Cluster pairs whose top terms overlap by at least `min_jaccard` while
/// their centroids are at least the median pairwise centroid distance apart.
pub fn detect_isolations(clusters: &[SemanticCluster], min_jaccard: f64) -> Vec<OrthogonalIsolation> {
    let mut pairs = Vec::new();
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            pairs.push((a, b, dist(a.centroid_2d, b.centroid_2d)));
        }
    }
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut ds: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    ds.sort_by(f64::total_cmp);
    let m = ds.len() / 2;
    let median = if ds.len() % 2 == 1 { ds[m] } else { (ds[m - 1] + ds[m]) / 2.0 };
    pairs
        .into_iter()
        .filter_map(|(a, b, d)| {
            let j = term_jaccard(&a.top_terms, &b.top_terms);
            (j >= min_jaccard && d >= median).then_some(OrthogonalIsolation {
                cluster_pair: (a.label, b.label),
                vocab_jaccard: j,
                centroid_distance: d,
            })
        })
        .collect()
}

/// Assembles a full map from a 2-D layout, raw labels, per-paper texts
/// (aligned with `paper_ids`) and marginalization indices.
pub fn build_map(
    paper_ids: &[String],
    points: Vec<[f64; 2]>,
    labels: &[i64],
    texts: &[String],
    marginalization: Vec<f64>,
    params: &TopographyParams,
) -> TopographyMap {
    let (cluster_labels, mut clusters) = summarize_clusters(paper_ids, &points, labels, params.min_cluster_size);
    let df = DocumentFrequencies::from_texts(texts.iter().map(String::as_str));
    for c in &mut clusters {
        let member_texts =
            c.member_ids.iter().filter_map(|id| paper_ids.iter().position(|p| p == id)).map(|i| texts[i].as_str());
        c.top_terms = top_terms(member_texts, &df, params.top_k_terms).into_iter().map(|t| t.term).collect();
    }
    let voids = detect_voids(&clusters, &points, params.void_gap_ratio);
    let isolations = detect_isolations(&clusters, params.isolation_jaccard);
    TopographyMap {
        paper_ids: paper_ids.to_vec(),
        points,
        cluster_labels,
        clusters,
        voids,
        isolations,
        marginalization,
    }
}
