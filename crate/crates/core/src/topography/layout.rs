//! 2-D layouts and density labels computed in-process.

use alloc::vec;
use alloc::vec::Vec;

/// Corpora smaller than this skip reduction and clustering.
pub const MIN_POINTS_FOR_CLUSTERING: usize = 5;

/// Multiple of the median spanning-tree edge above which an edge separates clusters.
pub const DEFAULT_CUT_FACTOR: f64 = 3.0;

/// Small-corpus path: the first two vector components as coordinates and a
/// single cluster labelled 0.
pub fn degenerate_layout(vectors: &[Vec<f64>]) -> (Vec<[f64; 2]>, Vec<i64>) {
    let points =
        vectors.iter().map(|v| [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]).collect();
    (points, vec![0; vectors.len()])
}

struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `Xᵀ(X v)` for centered rows X.
fn gram_apply(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for row in rows {
        let s = dot(row, v);
        for (o, x) in out.iter_mut().zip(row) {
            *o += s * x;
        }
    }
    out
}

/// Leading principal direction orthogonal to `against`, by power iteration.
fn principal_direction(rows: &[Vec<f64>], rng: &mut SplitMix, against: Option<&[f64]>) -> Option<Vec<f64>> {
    let dim = rows[0].len();
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64()).collect();
    let project_out = |v: &mut Vec<f64>| {
        if let Some(u) = against {
            let s = dot(v, u);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= s * y;
            }
        }
    };
    project_out(&mut v);
    let n0 = norm(&v);
    if n0 == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n0);
    for _ in 0..500 {
        let mut w = gram_apply(rows, &v);
        project_out(&mut w);
        let nw = norm(&w);
        if nw == 0.0 || !nw.is_finite() {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < 1e-12 {
            break;
        }
    }
    // sign convention: largest-magnitude component positive
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Some(v)
}

/// Projection onto the two leading principal components. Deterministic for
/// a given seed.
pub fn pca_2d(vectors: &[Vec<f64>], seed: u64) -> Vec<[f64; 2]> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let dim = vectors[0].len();
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();

    let mut rng = SplitMix(seed);
    let first = principal_direction(&rows, &mut rng, None);
    let second =
        first.as_deref().and_then(|u| if dim > 1 { principal_direction(&rows, &mut rng, Some(u)) } else { None });
    rows.iter()
        .map(|r| [first.as_deref().map_or(0.0, |u| dot(r, u)), second.as_deref().map_or(0.0, |u| dot(r, u))])
        .collect()
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Density labels for 2-D points: a minimum spanning tree over mutual
/// reachability distance (core distance = distance to the
/// `min_cluster_size − 1`-th neighbour), cut at `cut_factor` times its median
/// edge. Components with fewer than `min_cluster_size` points are noise
/// (−1); the rest are labelled from 0 in order of their first point.
pub fn density_labels(points: &[[f64; 2]], min_cluster_size: usize, cut_factor: f64) -> Vec<i64> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let neighbour = min_cluster_size.saturating_sub(1).max(1);
    let core: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).filter(|j| *j != i).map(|j| dist(&points[i], &points[j])).collect();
            d.sort_by(f64::total_cmp);
            d.get(neighbour - 1).or(d.last()).copied().unwrap_or(0.0)
        })
        .collect();
    let reach = |i: usize, j: usize| dist(&points[i], &points[j]).max(core[i]).max(core[j]);

    // Prim over the dense mutual-reachability graph
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut tree: Vec<(usize, usize, f64)> = Vec::with_capacity(n.saturating_sub(1));
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|i| !in_tree[*i])
            .min_by(|a, b| best[*a].total_cmp(&best[*b]).then(a.cmp(b)))
            .expect("vertex left");
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            tree.push((parent[u], u, best[u]));
        }
        for v in 0..n {
            if !in_tree[v] {
                let w = reach(u, v);
                if w < best[v] {
                    best[v] = w;
                    parent[v] = u;
                }
            }
        }
    }

    let weights: Vec<f64> = tree.iter().map(|e| e.2).collect();
    let mut cut = cut_factor * median(weights.clone());
    if cut == 0.0 {
        let positive: Vec<f64> = weights.iter().copied().filter(|w| *w > 0.0).collect();
        cut = if positive.is_empty() {
            f64::INFINITY
        } else {
            cut_factor * positive.iter().sum::<f64>() / positive.len() as f64
        };
    }

    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut [usize], mut x: usize) -> usize {
        while comp[x] != x {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        x
    }
    for &(a, b, w) in &tree {
        if w <= cut {
            let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
            if ra != rb {
                comp[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut comp, i)).collect();
    let mut size = vec![0usize; n];
    for &r in &roots {
        size[r] += 1;
    }
    let mut label_of = vec![-1i64; n];
    let mut next = 0;
    let mut labels = vec![-1i64; n];
    for i in 0..n {
        let r = roots[i];
        if size[r] < min_cluster_size {
            continue;
        }
        if label_of[r] < 0 {
            label_of[r] = next;
            next += 1;
        }
        labels[i] = label_of[r];
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_path() {
        let (points, labels) = degenerate_layout(&[vec![1.0, 2.0, 3.0], vec![4.0], vec![5.0, 6.0]]);
        assert_eq!(points, [[1.0, 2.0], [4.0, 0.0], [5.0, 6.0]]);
        assert_eq!(labels, [0, 0, 0]);
    }

    #[test]
    fn pca_recovers_dominant_axis() {
        let vectors: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.01 * ((i * 7) % 3) as f64, 0.0]).collect();
        let p = pca_2d(&vectors, 3);
        // first coordinate spans the x range, centered
        assert!((p[9][0] - p[0][0] - 9.0).abs() < 1e-6);
        assert!(p.iter().all(|q| q[1].abs() < 0.05));
    }

    #[test]
    fn pca_seed_deterministic() {
        let vectors: Vec<Vec<f64>> =
            (0..12).map(|i| (0..6).map(|j| ((i * 31 + j * 17) % 11) as f64).collect()).collect();
        assert_eq!(pca_2d(&vectors, 7), pca_2d(&vectors, 7));
    }

    #[test]
    fn pca_constant_rows() {
        assert_eq!(pca_2d(&vec![vec![1.0, 1.0]; 4], 1), [[0.0, 0.0]; 4]);
    }

    #[test]
    fn two_groups_and_an_outlier() {
        let mut points = Vec::new();
        for i in 0..6 {
            points.push([i as f64 * 0.1, 0.0]);
        }
        for i in 0..6 {
            points.push([10.0 + i as f64 * 0.1, 0.0]);
        }
        points.push([5.0, 40.0]);
        let labels = density_labels(&points, 3, DEFAULT_CUT_FACTOR);
        assert_eq!(&labels[..6], &[0; 6]);
        assert_eq!(&labels[6..12], &[1; 6]);
        assert_eq!(labels[12], -1);
    }
}
