//! Finite metric spaces and neighbor graphs over sampled clouds: quadrature
//! edge weights, Dijkstra distances, metric balls, excess fields,
//! epsilon-geodesics, discrete gradient flow and ball-volume ratios.
//!
//! Edge weights integrate the metric along straight chart segments whose
//! fiber part follows the one-parameter subgroup between the endpoint fiber
//! positions; for that interpolation the right-invariant velocity components
//! are constant, so the speed varies only through the warp coefficients and
//! a three-point Simpson rule is accurate to the edge length cubed.  Edges
//! touching a singular-ray point drop the fiber term: from a collapsed fiber
//! the connecting curve may hold the other endpoint's fiber position for
//! free.

use crate::cloud::SampleCloud;
use crate::metric::WarpedMetric;
use crate::quat::Quat;
use crate::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

/// A finite metric space: the carrier of every comparison experiment.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
    /// Human-readable origin (metric name, region, resolution).
    pub provenance: String,
}

impl FiniteMetricSpace {
    /// Builds from a full row-major matrix (validated for shape only; use
    /// [`FiniteMetricSpace::check_axioms`] for the metric axioms).
    pub fn from_matrix(n: usize, d: Vec<f64>, provenance: &str) -> Result<FiniteMetricSpace> {
        if n == 0 || d.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "matrix length {} does not match n = {n}",
                d.len()
            )));
        }
        Ok(FiniteMetricSpace { n, d, provenance: provenance.to_string() })
    }

    /// Builds from the lower triangle (row `i` holds `i + 1` entries, the
    /// last being the zero diagonal).
    pub fn from_lower_triangle(
        n: usize,
        tri: &[f64],
        provenance: &str,
    ) -> Result<FiniteMetricSpace> {
        if tri.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "triangle length {} does not match n = {n}",
                tri.len()
            )));
        }
        let mut d = vec![0.0; n * n];
        let mut it = tri.iter();
        for i in 0..n {
            for j in 0..=i {
                let v = *it.next().unwrap();
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        FiniteMetricSpace::from_matrix(n, d, provenance)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Whether the space is empty (never true for constructed spaces).
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between points `i` and `j`.
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }

    /// Lower triangle in row order, diagonal included.
    pub fn lower_triangle(&self) -> Vec<f64> {
        let mut tri = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in 0..=i {
                tri.push(self.d(i, j));
            }
        }
        tri
    }

    /// The same space with all distances multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> FiniteMetricSpace {
        FiniteMetricSpace {
            n: self.n,
            d: self.d.iter().map(|v| v * factor).collect(),
            provenance: format!("{} *{factor}", self.provenance),
        }
    }

    /// Metric restriction to a subset of indices, in the given order.
    pub fn restriction(&self, idx: &[usize]) -> FiniteMetricSpace {
        let m = idx.len();
        let mut d = vec![0.0; m * m];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                d[a * m + b] = self.d(i, j);
            }
        }
        FiniteMetricSpace { n: m, d, provenance: format!("{} subset({m})", self.provenance) }
    }

    /// Verifies symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality (cubic cost: intended for moderate spaces).
    pub fn check_axioms(&self, tol: f64) -> Result<()> {
        for i in 0..self.n {
            if self.d(i, i) != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = self.d(i, j);
                if v != self.d(j, i) {
                    return Err(Error::InvalidInput(format!("asymmetry at ({i}, {j})")));
                }
                if !(v > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "non-positive distance {v} at ({i}, {j})"
                    )));
                }
            }
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let dij = self.d(i, j);
                for k in 0..self.n {
                    if dij > self.d(i, k) + self.d(k, j) + tol {
                        return Err(Error::InvalidInput(format!(
                            "triangle violation at ({i}, {j}) via {k}: {dij} > {} + {}",
                            self.d(i, k),
                            self.d(k, j)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-vertex metric data cached at graph build time.
#[derive(Debug, Clone)]
struct NodeGeom {
    r: f64,
    s: f64,
    /// `a(r)^2`, the angular coefficient (defined also on the rays).
    ang: f64,
    /// Fiber metric diagonal `(a b e^{m_j})^2` and fiber position; absent on
    /// the singular rays.
    fib: Option<([f64; 3], Quat)>,
}

/// Symmetric k-nearest-neighbor graph with quadrature edge weights.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    /// The sampled points (anchors first).
    pub cloud: SampleCloud,
    /// Requested neighbor count.
    pub k: usize,
    adj: Vec<Vec<(u32, f64)>>,
}

/// A vertex path with its accumulated edge length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiscretePath {
    /// Vertex sequence, consecutive entries adjacent in the graph.
    pub vertices: Vec<usize>,
    length_bits: u64,
}

impl DiscretePath {
    fn new(vertices: Vec<usize>, length: f64) -> DiscretePath {
        DiscretePath { vertices, length_bits: length.to_bits() }
    }

    /// Sum of edge weights along the path.
    pub fn length(&self) -> f64 {
        f64::from_bits(self.length_bits)
    }
}

/// Excess of every point against a base pair: `e(x) = d(p,x) + d(x,q) -
/// d(p,q)`.
#[derive(Debug, Clone)]
pub struct ExcessField {
    /// First base point.
    pub p: usize,
    /// Second base point.
    pub q: usize,
    /// Base distance `d(p, q)`.
    pub d_pq: f64,
    /// Excess per point.
    pub e: Vec<f64>,
}

fn node_geometry(w: &WarpedMetric, cloud: &SampleCloud) -> Result<Vec<NodeGeom>> {
    cloud
        .points
        .iter()
        .map(|p| match p.xi {
            Some(xi) => {
                let fm = w.frame_metric(p.r, p.s)?;
                Ok(NodeGeom { r: p.r, s: p.s, ang: fm[1], fib: Some(([fm[2], fm[3], fm[4]], xi)) })
            }
            None => {
                let a = w.radial.jet(p.r).v;
                Ok(NodeGeom { r: p.r, s: p.s, ang: a * a, fib: None })
            }
        })
        .collect()
}

/// Squared endpoint-frozen proxy length used only to shortlist neighbor
/// candidates; the shortlist is re-ranked by the exact quadrature weight.
fn proxy_sq(a: &NodeGeom, b: &NodeGeom) -> f64 {
    let dr = a.r - b.r;
    let ds = a.s - b.s;
    let mut q = dr * dr + 0.5 * (a.ang + b.ang) * ds * ds;
    if let (Some((da, xa)), Some((db, xb))) = (&a.fib, &b.fib) {
        let u = xb.mul(&xa.conj()).log_unit();
        for c in 0..3 {
            q += 0.5 * (da[c] + db[c]) * u[c] * u[c];
        }
    }
    q
}

/// Simpson edge weight along the chart segment between two nodes.
fn edge_weight(w: &WarpedMetric, a: &NodeGeom, b: &NodeGeom) -> Result<f64> {
    let dr = b.r - a.r;
    let ds = b.s - a.s;
    let u = match (&a.fib, &b.fib) {
        (Some((_, xa)), Some((_, xb))) => Some(xb.mul(&xa.conj()).log_unit()),
        _ => None,
    };
    let fiber_term = |diag: &[f64; 3]| -> f64 {
        match u {
            Some(uu) => (0..3).map(|c| diag[c] * uu[c] * uu[c]).sum(),
            None => 0.0,
        }
    };
    let q0 = dr * dr
        + a.ang * ds * ds
        + a.fib.as_ref().map_or(0.0, |(diag, _)| fiber_term(diag));
    let q1 = dr * dr
        + b.ang * ds * ds
        + b.fib.as_ref().map_or(0.0, |(diag, _)| fiber_term(diag));
    let rm = 0.5 * (a.r + b.r);
    let sm = 0.5 * (a.s + b.s);
    let qm = if u.is_some() {
        let fm = w.frame_metric(rm, sm)?;
        dr * dr + fm[1] * ds * ds + fiber_term(&[fm[2], fm[3], fm[4]])
    } else if ds.abs() > 0.0 && sm > 0.0 && sm < std::f64::consts::PI {
        let am = w.radial.jet(rm).v;
        dr * dr + am * am * ds * ds
    } else {
        dr * dr
    };
    Ok((q0.sqrt() + 4.0 * qm.sqrt() + q1.sqrt()) / 6.0)
}

/// Builds the symmetric k-nearest-neighbor graph of a cloud under `w`.
///
/// For every vertex the `3k` proxy-nearest candidates are re-ranked by the
/// exact quadrature weight and the best `k` kept; the union over both
/// endpoints is symmetrized.  Errors with the component sizes if the result
/// is disconnected.
pub fn build_graph(w: &WarpedMetric, cloud: SampleCloud, k: usize) -> Result<MetricGraph> {
    let n = cloud.points.len();
    if k < 4 {
        return Err(Error::InvalidInput(format!("neighbor count k = {k} < 4")));
    }
    if n < 2 {
        return Err(Error::InvalidInput("graph needs at least two points".into()));
    }
    let k = k.min(n - 1);
    let geom = node_geometry(w, &cloud)?;

    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    let shortlist = (3 * k).min(n - 1);
    let mut cand: Vec<(f64, u32)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        for j in 0..n {
            if j != i {
                cand.push((proxy_sq(&geom[i], &geom[j]), j as u32));
            }
        }
        cand.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        cand.truncate(shortlist);
        let mut exact: Vec<(f64, u32)> = cand
            .iter()
            .map(|&(_, j)| {
                let (lo, hi) = (i.min(j as usize), i.max(j as usize));
                edge_weight(w, &geom[lo], &geom[hi]).map(|v| (v, j))
            })
            .collect::<Result<_>>()?;
        exact.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        for &(_, j) in exact.iter().take(k) {
            adj[i].insert(j);
            adj[j as usize].insert(i as u32);
        }
    }

    let adj: Vec<Vec<(u32, f64)>> = adj
        .iter()
        .enumerate()
        .map(|(i, set)| {
            set.iter()
                .map(|&j| {
                    let (lo, hi) = (i.min(j as usize), i.max(j as usize));
                    edge_weight(w, &geom[lo], &geom[hi]).map(|v| (j, v))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let graph = MetricGraph { cloud, k, adj };
    let sizes = graph.component_sizes();
    if sizes.len() > 1 {
        return Err(Error::Disconnected(sizes));
    }
    Ok(graph)
}

#[derive(PartialEq)]
pub(crate) struct HeapKey(pub f64, pub u32);

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("graph distances are never NaN")
            .then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl MetricGraph {
    /// Vertex count.
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    /// Whether the graph is empty (never true for built graphs).
    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Neighbors of `v` with edge weights, ascending by index.
    pub fn neighbors(&self, v: usize) -> &[(u32, f64)] {
        &self.adj[v]
    }

    fn component_sizes(&self) -> Vec<usize> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut stack = vec![start];
            comp[start] = id;
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &(w, _) in &self.adj[v] {
                    if comp[w as usize] == usize::MAX {
                        comp[w as usize] = id;
                        stack.push(w as usize);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Graph distances from `src` to every vertex (Dijkstra).
    pub fn distances_from(&self, src: usize) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse(HeapKey(0.0, src as u32)));
        while let Some(Reverse(HeapKey(d, v))) = heap.pop() {
            let v = v as usize;
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(w, len) in &self.adj[v] {
                let w = w as usize;
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse(HeapKey(nd, w as u32)));
                }
            }
        }
        dist
    }

    /// Distance rows from each source.
    pub fn shortest_paths(&self, sources: &[usize]) -> Vec<Vec<f64>> {
        sources.iter().map(|&s| self.distances_from(s)).collect()
    }

    /// Metric restriction to `indices` as a finite metric space (distances
    /// through the whole graph, not just the induced subgraph).
    pub fn space(&self, indices: &[usize], provenance: &str) -> FiniteMetricSpace {
        let m = indices.len();
        let mut d = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            let row = self.distances_from(i);
            for (b, &j) in indices.iter().enumerate() {
                d[a * m + b] = row[j];
            }
        }
        // Symmetrize away the last-bit asymmetry of independent runs.
        for a in 0..m {
            for b in 0..a {
                let v = 0.5 * (d[a * m + b] + d[b * m + a]);
                d[a * m + b] = v;
                d[b * m + a] = v;
            }
        }
        FiniteMetricSpace { n: m, d, provenance: provenance.to_string() }
    }

    /// The deterministic shortest path from `from` to `to`: among equal-length
    /// continuations it takes the smallest next vertex, which yields the
    /// lexicographically smallest shortest vertex sequence.
    pub fn shortest_path(&self, from: usize, to: usize) -> DiscretePath {
        let dist_to = self.distances_from(to);
        self.path_by_descent(from, &dist_to)
    }

    /// Shortest path from `v` guided by a distance-to-target field.
    fn path_by_descent(&self, from: usize, dist_to: &[f64]) -> DiscretePath {
        let mut vertices = vec![from];
        let mut length = 0.0;
        let mut v = from;
        while dist_to[v] > 0.0 {
            let mut next: Option<(u32, f64)> = None;
            for &(w, len) in &self.adj[v] {
                let slack = (dist_to[w as usize] + len - dist_to[v]).abs();
                if dist_to[w as usize] < dist_to[v] && slack <= 1e-9 * (1.0 + dist_to[v]) {
                    next = match next {
                        Some(best) if best.0 <= w => Some(best),
                        _ => Some((w, len)),
                    };
                    break;
                }
            }
            match next {
                Some((w, len)) => {
                    vertices.push(w as usize);
                    length += len;
                    v = w as usize;
                }
                None => break,
            }
        }
        DiscretePath::new(vertices, length)
    }

    /// Excess field of the pair `(p, q)` over all vertices.
    pub fn excess(&self, p: usize, q: usize) -> ExcessField {
        let dp = self.distances_from(p);
        let dq = self.distances_from(q);
        let d_pq = 0.5 * (dp[q] + dq[p]);
        let e = (0..self.len()).map(|x| dp[x] + dq[x] - d_pq).collect();
        ExcessField { p, q, d_pq, e }
    }

    /// All distinct shortest `p -> x -> q` paths through vertices of excess
    /// at most `eps^2 * d(p, q)` (each such vertex lies on a discrete
    /// epsilon-geodesic).
    pub fn eps_geodesics(&self, p: usize, q: usize, eps: f64) -> Result<Vec<DiscretePath>> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1)")));
        }
        let dp = self.distances_from(p);
        let dq = self.distances_from(q);
        let d_pq = dp[q];
        let bound = eps * eps * d_pq;
        let mut set = BTreeSet::new();
        for x in 0..self.len() {
            if dp[x] + dq[x] - d_pq <= bound {
                // p -> x by descending the distance-to-p field backward,
                // then x -> q by descending the distance-to-q field.
                let to_p = self.path_by_descent(x, &dp);
                let to_q = self.path_by_descent(x, &dq);
                let mut vertices: Vec<usize> = to_p.vertices.iter().rev().cloned().collect();
                vertices.extend_from_slice(&to_q.vertices[1..]);
                set.insert(DiscretePath::new(vertices, to_p.length() + to_q.length()));
            }
        }
        Ok(set.into_iter().collect())
    }

    /// The vertex reached from `x` after flowing `step` of arclength along
    /// the deterministic shortest path toward lower `d(p, .)`.
    pub fn gradient_flow_map(&self, p: usize, x: usize, step: f64) -> Result<usize> {
        let dp = self.distances_from(p);
        self.flow_along(&dp, x, step)
    }

    /// Flow map against a precomputed distance field (cheaper in sweeps).
    pub fn flow_along(&self, dist_p: &[f64], x: usize, step: f64) -> Result<usize> {
        if step < 0.0 {
            return Err(Error::InvalidInput(format!("negative flow step {step}")));
        }
        if step >= dist_p[x] {
            return Err(Error::InvalidInput(format!(
                "flow step {step} overshoots d(p, x) = {}",
                dist_p[x]
            )));
        }
        let path = self.path_by_descent(x, dist_p);
        let mut cum = 0.0;
        for w in 0..path.vertices.len() {
            if w > 0 {
                let (a, b) = (path.vertices[w - 1], path.vertices[w]);
                let len = self.adj[a]
                    .iter()
                    .find(|&&(j, _)| j as usize == b)
                    .map(|&(_, l)| l)
                    .unwrap_or(0.0);
                cum += len;
            }
            if cum >= step {
                return Ok(path.vertices[w]);
            }
        }
        Ok(*path.vertices.last().unwrap())
    }
}

/// Excess field read off a finite metric space.
pub fn excess_field(space: &FiniteMetricSpace, p: usize, q: usize) -> ExcessField {
    let d_pq = space.d(p, q);
    let e = (0..space.len())
        .map(|x| space.d(p, x) + space.d(x, q) - d_pq)
        .collect();
    ExcessField { p, q, d_pq, e }
}

/// Closed metric ball as a space: member indices (ascending) and the
/// restricted matrix, divided by `radius` when `rescale` is set.
pub fn metric_ball(
    space: &FiniteMetricSpace,
    center: usize,
    radius: f64,
    rescale: bool,
) -> Result<(FiniteMetricSpace, Vec<usize>)> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius {radius} must be positive")));
    }
    if center >= space.len() {
        return Err(Error::InvalidInput(format!("ball center {center} out of range")));
    }
    let members: Vec<usize> = (0..space.len())
        .filter(|&x| space.d(center, x) <= radius)
        .collect();
    let mut ball = space.restriction(&members);
    if rescale {
        ball = ball.rescaled(1.0 / radius);
    }
    ball.provenance = format!(
        "{} ball(center={center}, radius={radius}, rescale={rescale})",
        space.provenance
    );
    Ok((ball, members))
}

/// Ratio of ball point-counts `|B_radius(ca)| / |B_radius(cb)|`; on a
/// volume-proportional cloud this estimates the volume ratio.
pub fn volume_ratio(
    space: &FiniteMetricSpace,
    ca: usize,
    cb: usize,
    radius: f64,
) -> Result<f64> {
    let (_, ma) = metric_ball(space, ca, radius, false)?;
    let (_, mb) = metric_ball(space, cb, radius, false)?;
    Ok(ma.len() as f64 / mb.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{sample_cloud, CloudPoint, Region};
    use crate::examples::build_flat;
    use crate::quat::IDENTITY;

    const PI: f64 = std::f64::consts::PI;

    fn cloud_from_points(points: Vec<CloudPoint>) -> SampleCloud {
        let n = points.len();
        SampleCloud {
            points,
            n_anchors: n,
            seed: 0,
            region: Region::new((0.1, 3.0), (0.0, PI)).unwrap(),
        }
    }

    #[test]
    fn radial_pair_edge_weight_is_exact() {
        let w = build_flat();
        let xi = IDENTITY;
        let cloud = cloud_from_points(vec![
            CloudPoint::interior(1.0, PI / 2.0, xi),
            CloudPoint::interior(1.1, PI / 2.0, xi),
        ]);
        let g = build_graph(&w, cloud, 4).unwrap();
        let (_, len) = g.neighbors(0)[0];
        assert!((len - 0.1).abs() < 1e-12, "radial edge {len}");
    }

    #[test]
    fn colinear_radial_triple_is_additive() {
        let w = build_flat();
        let xi = IDENTITY;
        let cloud = cloud_from_points(vec![
            CloudPoint::interior(1.0, 1.0, xi),
            CloudPoint::interior(1.2, 1.0, xi),
            CloudPoint::interior(1.5, 1.0, xi),
        ]);
        let g = build_graph(&w, cloud, 4).unwrap();
        let d = g.distances_from(0);
        assert!((d[1] + (d[2] - d[1]) - d[2]).abs() < 1e-12);
        assert!((d[2] - 0.5).abs() < 1e-9, "radial through-distance {}", d[2]);
    }

    #[test]
    fn k_saturates_to_complete_graph() {
        let w = build_flat();
        let region = Region::new((0.8, 1.2), (1.0, 2.0)).unwrap();
        let cloud = sample_cloud(&w, region, 12, 9, &[]).unwrap();
        let g = build_graph(&w, cloud, 11).unwrap();
        for v in 0..g.len() {
            assert_eq!(g.neighbors(v).len(), 11);
        }
    }

    #[test]
    fn symmetry_of_distance_rows() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 300, 13, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let d0 = g.distances_from(0);
        let d7 = g.distances_from(7);
        assert!((d0[7] - d7[0]).abs() < 1e-12);
    }

    #[test]
    fn more_edges_never_lengthen_distances() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 150, 21, &[]).unwrap();
        let sparse = build_graph(&w, cloud.clone(), 8).unwrap();
        let complete = build_graph(&w, cloud, 149).unwrap();
        let ds = sparse.distances_from(3);
        let dc = complete.distances_from(3);
        for v in 0..150 {
            assert!(dc[v] <= ds[v] + 1e-12, "vertex {v}: {} > {}", dc[v], ds[v]);
        }
    }

    /// Convergence benchmark on the constant-fiber slice of the flat cone:
    /// the slice is a linear 2-plane section of the ambient Euclidean space,
    /// so the planar chord is the exact distance whenever the chord stays
    /// inside the sampled wedge.
    #[test]
    fn flat_cone_graph_metric_converges() {
        let w = build_flat();
        let region = Region::new((0.7, 1.4), (0.8, 2.4)).unwrap();
        let mut errs = Vec::new();
        for (n, seed) in [(4000usize, 3u64), (8000, 4)] {
            let mut cloud = sample_cloud(&w, region, n, seed, &[]).unwrap();
            for p in cloud.points.iter_mut() {
                p.xi = Some(IDENTITY);
            }
            let g = build_graph(&w, cloud, 12).unwrap();
            let mut worst = 0.0f64;
            for src in (0..n).step_by(n / 40) {
                let d = g.distances_from(src);
                let pa = &g.cloud.points[src];
                let a = [pa.r * pa.s.cos(), pa.r * pa.s.sin()];
                for v in (0..n).step_by(7) {
                    if v == src {
                        continue;
                    }
                    let pb = &g.cloud.points[v];
                    let b = [pb.r * pb.s.cos(), pb.r * pb.s.sin()];
                    let exact = crate::halfplane::flat_distance((pa.r, pa.s), (pb.r, pb.s));
                    // Keep pairs at the scale of the wedge whose chord stays
                    // inside it (closest approach above the inner radius).
                    if exact < 0.9 {
                        continue;
                    }
                    let dot = a[0] * (b[0] - a[0]) + a[1] * (b[1] - a[1]);
                    let nn = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
                    let t = (-dot / nn).clamp(0.0, 1.0);
                    let rmin = ((a[0] + t * (b[0] - a[0])).powi(2)
                        + (a[1] + t * (b[1] - a[1])).powi(2))
                    .sqrt();
                    if rmin < 0.72 {
                        continue;
                    }
                    worst = worst.max((d[v] - exact).abs() / exact);
                }
            }
            errs.push(worst);
        }
        assert!(errs[0] <= 0.05, "graph metric error {} at n=4000", errs[0]);
        assert!(errs[1] < errs[0], "no improvement when doubling: {errs:?}");
    }

    #[test]
    fn same_ray_pair_matches_radial_gap() {
        let w = build_flat();
        let region = Region::new((0.7, 1.4), (0.8, 2.4)).unwrap();
        let anchors = [
            CloudPoint::interior(0.75, 1.6, IDENTITY),
            CloudPoint::interior(1.35, 1.6, IDENTITY),
        ];
        let mut cloud = sample_cloud(&w, region, 4000, 3, &anchors).unwrap();
        for p in cloud.points.iter_mut() {
            p.xi = Some(IDENTITY);
        }
        let g = build_graph(&w, cloud, 16).unwrap();
        let d = g.distances_from(0);
        assert!(
            (d[1] - 0.6).abs() / 0.6 <= 0.02,
            "same-ray graph distance {} vs 0.6",
            d[1]
        );
    }

    #[test]
    fn excess_field_invariants() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 400, 17, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let ex = g.excess(5, 350);
        assert!(ex.e[5].abs() < 1e-12);
        assert!(ex.e[350].abs() < 1e-12);
        let dp = g.distances_from(5);
        let dq = g.distances_from(350);
        for x in 0..g.len() {
            assert!(ex.e[x] >= -1e-9, "negative excess at {x}");
            let bound = 2.0 * dp[x].min(dq[x]) + 1e-9;
            assert!(ex.e[x] <= bound, "excess bound at {x}");
        }
        // Points on the chosen shortest path have vanishing excess.
        let path = g.shortest_path(5, 350);
        for &v in &path.vertices {
            assert!(ex.e[v] <= 1e-9, "on-path excess {}", ex.e[v]);
        }
    }

    #[test]
    fn eps_geodesics_bound_their_length() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 300, 19, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let d_pq = g.distances_from(2)[250];
        for eps in [0.2, 0.4] {
            let paths = g.eps_geodesics(2, 250, eps).unwrap();
            assert!(!paths.is_empty());
            for path in &paths {
                assert_eq!(path.vertices[0], 2);
                assert_eq!(*path.vertices.last().unwrap(), 250);
                assert!(path.length() <= (1.0 + eps * eps) * d_pq + 1e-9);
            }
        }
        let few = g.eps_geodesics(2, 250, 0.05).unwrap();
        let many = g.eps_geodesics(2, 250, 0.5).unwrap();
        assert!(few.len() <= many.len(), "path family should grow with eps");
    }

    #[test]
    fn gradient_flow_shortens_base_distance() {
        let w = build_flat();
        let mut anchors = vec![CloudPoint::interior(1.45, 1.5, IDENTITY)];
        // A radial corridor ensures the flow has a clean discrete path.
        for i in 1..=14 {
            anchors.push(CloudPoint::interior(1.45 - 0.1 * i as f64, 1.5, IDENTITY));
        }
        let region = Region::new((0.05, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 400, 29, &anchors).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let p = 14; // innermost corridor point, r = 0.05
        assert_eq!(g.gradient_flow_map(p, 0, 0.0).unwrap(), 0);
        let dp = g.distances_from(p);
        let y = g.gradient_flow_map(p, 0, 0.35).unwrap();
        let drop = dp[0] - dp[y];
        assert!((drop - 0.35).abs() < 0.12, "flow drop {drop} vs step 0.35");
        assert!(g.gradient_flow_map(p, 0, 10.0).is_err(), "overshoot must error");
    }

    #[test]
    fn balls_nest_and_rescale() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 250, 31, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let space = g.space(&all, "flat patch");
        let (b1, m1) = metric_ball(&space, 0, 0.3, false).unwrap();
        let (b2, m2) = metric_ball(&space, 0, 0.5, false).unwrap();
        assert!(m1.iter().all(|i| m2.contains(i)), "balls must nest");
        assert!(b1.diameter() <= 0.6 + 1e-12);
        let (unit, _) = metric_ball(&space, 0, 0.5, true).unwrap();
        assert!(unit.diameter() <= 2.0 + 1e-12);
        assert_eq!(unit.len(), b2.len());
        let (whole, members) = metric_ball(&space, 0, 1e6, false).unwrap();
        assert_eq!(whole.len(), space.len());
        assert_eq!(members.len(), space.len());
    }

    #[test]
    fn volume_ratio_is_reciprocal() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.4, 2.7)).unwrap();
        let cloud = sample_cloud(&w, region, 350, 37, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let space = g.space(&all, "flat patch");
        let ab = volume_ratio(&space, 10, 200, 0.25).unwrap();
        let ba = volume_ratio(&space, 200, 10, 0.25).unwrap();
        assert!((ab * ba - 1.0).abs() < 1e-12);
        assert_eq!(volume_ratio(&space, 10, 10, 0.25).unwrap(), 1.0);
    }

    #[test]
    fn axioms_hold_on_a_sampled_space() {
        let w = build_flat();
        let region = Region::new((0.7, 1.3), (0.8, 2.3)).unwrap();
        let cloud = sample_cloud(&w, region, 120, 41, &[]).unwrap();
        let g = build_graph(&w, cloud, 8).unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let space = g.space(&all, "axiom check");
        space.check_axioms(1e-9).unwrap();
    }

    #[test]
    fn triangle_roundtrip_preserves_the_matrix() {
        let tri = [0.0, 1.0, 0.0, 2.0, 1.5, 0.0];
        let s = FiniteMetricSpace::from_lower_triangle(3, &tri, "toy").unwrap();
        assert_eq!(s.d(1, 0), 1.0);
        assert_eq!(s.d(2, 1), 1.5);
        assert_eq!(s.lower_triangle(), tri.to_vec());
        assert!(FiniteMetricSpace::from_lower_triangle(3, &tri[..5], "bad").is_err());
    }

    #[test]
    fn disconnected_clusters_report_sizes() {
        let w = build_flat();
        let xi = IDENTITY;
        let mut points = Vec::new();
        for i in 0..6 {
            points.push(CloudPoint::interior(0.10 + 0.001 * i as f64, 0.5, xi));
        }
        for i in 0..5 {
            points.push(CloudPoint::interior(2.9 + 0.001 * i as f64, 2.6, xi));
        }
        let cloud = cloud_from_points(points);
        match build_graph(&w, cloud, 4) {
            Err(Error::Disconnected(sizes)) => assert_eq!(sizes, vec![6, 5]),
            other => panic!("expected disconnection, got {:?}", other.map(|g| g.len())),
        }
    }
}
