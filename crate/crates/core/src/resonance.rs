//! Cross-lens convergent anomalies and hub centralization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lens::LensReading;
use crate::text::canonical_tension;

pub const DEFAULT_CENTRALIZATION_THRESHOLD: f64 = 0.40;
pub const DEFAULT_K_FRACTION: f64 = 0.05;

/// A tension flagged by at least two distinct lenses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergentAnomaly {
    pub id: String,
    pub canonical_tension: String,
    pub lens_names: Vec<String>,
    pub paper_ids: Vec<String>,
    /// Lens count times the mean confidence of the contributing readings.
    pub intensity: f64,
}

/// Sum of values in ascending order, so the result does not depend on the
/// order readings arrived in.
fn ordered_mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Default)]
struct TensionGroup<'a> {
    lenses: BTreeSet<&'a str>,
    papers: BTreeSet<&'a str>,
    confidences: Vec<f64>,
}

/// Groups reading tensions by canonical form and keeps groups spanning two or
/// more lenses, strongest first (ties by tension text). Ids are assigned in
/// that order.
pub fn detect_anomalies(readings: &[LensReading]) -> Vec<ConvergentAnomaly> {
    let mut groups: BTreeMap<String, TensionGroup<'_>> = BTreeMap::new();
    for reading in readings {
        let canon: BTreeSet<String> =
            reading.tensions.iter().map(|t| canonical_tension(t)).filter(|t| !t.is_empty()).collect();
        for tension in canon {
            let g = groups.entry(tension).or_default();
            g.lenses.insert(&reading.lens_name);
            g.papers.insert(&reading.paper_id);
            g.confidences.push(reading.confidence);
        }
    }
    let mut anomalies: Vec<ConvergentAnomaly> = groups
        .into_iter()
        .filter(|(_, g)| g.lenses.len() >= 2)
        .map(|(tension, g)| {
            let intensity = g.lenses.len() as f64 * ordered_mean(g.confidences);
            ConvergentAnomaly {
                id: String::new(),
                canonical_tension: tension,
                lens_names: g.lenses.into_iter().map(String::from).collect(),
                paper_ids: g.papers.into_iter().map(String::from).collect(),
                intensity,
            }
        })
        .collect();
    anomalies.sort_by(|a, b| {
        b.intensity.total_cmp(&a.intensity).then_with(|| a.canonical_tension.cmp(&b.canonical_tension))
    });
    for (i, a) in anomalies.iter_mut().enumerate() {
        a.id = format!("anomaly-{:03}", i + 1);
    }
    anomalies
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizationReport {
    pub hub_ids: Vec<String>,
    pub k: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// Share of edges with at least one endpoint among the hubs.
    pub incident_fraction: f64,
    pub threshold: f64,
    /// `incident_fraction > threshold`, strictly.
    pub triggered: bool,
}

/// Hub size for a graph of `nodes` vertices: `max(1, ⌈k_fraction·nodes⌉)`.
pub fn hub_count(nodes: usize, k_fraction: f64) -> usize {
    (libm::ceil(k_fraction * nodes as f64) as usize).max(1)
}

/// Fraction of undirected edges incident to the `k` highest-degree nodes
/// (ties by id). Edge endpoints missing from `nodes` are added implicitly.
pub fn centralization_risk(
    nodes: &[String],
    edges: &[(String, String)],
    threshold: f64,
    k_fraction: f64,
) -> CentralizationReport {
    let mut degree: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    for (a, b) in edges {
        *degree.entry(a).or_insert(0) += 1;
        *degree.entry(b).or_insert(0) += 1;
    }
    let k = hub_count(degree.len(), k_fraction);
    let mut ranked: Vec<(&str, usize)> = degree.into_iter().collect();
    let node_count = ranked.len();
    ranked.sort_by(|(ia, da), (ib, db)| db.cmp(da).then(ia.cmp(ib)));
    let hubs: BTreeSet<&str> = ranked.iter().take(k).map(|(id, _)| *id).collect();

    let incident_fraction = if edges.is_empty() {
        0.0
    } else {
        let incident = edges.iter().filter(|(a, b)| hubs.contains(a.as_str()) || hubs.contains(b.as_str())).count();
        incident as f64 / edges.len() as f64
    };
    CentralizationReport {
        hub_ids: ranked.iter().take(k).map(|(id, _)| String::from(*id)).collect(),
        k,
        node_count,
        edge_count: edges.len(),
        incident_fraction,
        threshold,
        triggered: incident_fraction > threshold,
    }
}
