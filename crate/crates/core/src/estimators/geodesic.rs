//! Length-metric estimates on point clouds sampled from hypersurfaces:
//! shortest paths in the ε-neighbourhood graph with Euclidean edge
//! weights.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stream::{chunk_rng, unit_vector};
use crate::error::{GeomError, Result};
use crate::linalg::dist;
use crate::pl::fmt17;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| GeomError::InvalidPoint("empty cloud".into()))?;
        for p in &points {
            if p.len() != dim {
                return Err(GeomError::DimMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if dim == 0 || p.iter().any(|c| !c.is_finite()) {
                return Err(GeomError::InvalidPoint("cloud point must be finite".into()));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// One header row `x1,…,xn`, then one row per point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        let io = |e: csv::Error| GeomError::Io(e.to_string());
        wtr.write_record(&header).map_err(io)?;
        for p in &self.points {
            wtr.write_record(p.iter().map(|&c| fmt17(c))).map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut points = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GeomError::Parse(e.to_string()))?;
            let p = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        GeomError::Parse(format!("row {}: bad number '{f}'", line + 2))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(p);
        }
        Self::new(points)
    }
}

/// Adjacency lists of the ε-neighbourhood graph.
#[derive(Clone, Debug)]
pub struct EpsGraph {
    eps: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl EpsGraph {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbours(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.adjacency.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &(j, _) in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.adjacency.len()
    }

    /// Shortest-path distances from `source` to every vertex.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut best = vec![f64::INFINITY; self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        best[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, i)) = heap.pop() {
            if d > best[i] {
                continue;
            }
            for &(j, w) in &self.adjacency[i] {
                let nd = d + w;
                if nd < best[j] {
                    best[j] = nd;
                    heap.push(Item(nd, j));
                }
            }
        }
        best
    }
}

/// Builds the ε-graph (edges between points at distance <= ε) and checks
/// that it is connected.
pub fn epsilon_graph(cloud: &PointCloud, eps: f64) -> Result<EpsGraph> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(GeomError::InvalidSampler(
            "graph radius must be positive".into(),
        ));
    }
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / eps).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    let n = cloud.dim;
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|code| {
            let mut rem = code;
            (0..n)
                .map(|_| {
                    let o = (rem % 3) as i64 - 1;
                    rem /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let adjacency: Vec<Vec<(usize, f64)>> = cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let k = key(p);
            let mut adj = Vec::new();
            for off in &offsets {
                let cell: Vec<i64> = k.iter().zip(off).map(|(a, b)| a + b).collect();
                if let Some(ids) = cells.get(&cell) {
                    for &j in ids {
                        if j != i {
                            let d = dist(p, &cloud.points[j]);
                            if d <= eps {
                                adj.push((j, d));
                            }
                        }
                    }
                }
            }
            adj.sort_by_key(|e| e.0);
            adj
        })
        .collect();
    let graph = EpsGraph { eps, adjacency };
    if !graph.is_connected() {
        return Err(GeomError::DisconnectedCloud(eps));
    }
    Ok(graph)
}

/// Graph length of the shortest path between cloud points `i` and `j`.
pub fn geodesic_estimate(cloud: &PointCloud, eps: f64, i: usize, j: usize) -> Result<f64> {
    if i >= cloud.len() || j >= cloud.len() {
        return Err(GeomError::InvalidPoint(format!(
            "index outside cloud of {}",
            cloud.len()
        )));
    }
    let g = epsilon_graph(cloud, eps)?;
    Ok(g.dijkstra(i)[j])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRatio {
    /// Max of graph distance / chord over all queried pairs.
    pub ratio: f64,
    pub worst: (usize, usize),
    /// Min of the same quotient; never below 1 up to rounding.
    pub min_ratio: f64,
    pub n_queries: usize,
    /// Every queried quotient, sources in stream order.
    pub ratios: Vec<f64>,
}

/// Sampled lower bound for the bi-Lipschitz constant between the length
/// metric and the chordal metric: full shortest-path sweeps from
/// `n_sources` seeded sources, each compared against every other point.
pub fn metric_equivalence_ratio(
    cloud: &PointCloud,
    eps: f64,
    n_sources: usize,
    seed: u64,
) -> Result<MetricRatio> {
    if n_sources == 0 {
        return Err(GeomError::InvalidSampler("need at least one source".into()));
    }
    let g = epsilon_graph(cloud, eps)?;
    let mut rng = chunk_rng(seed, "metric", 0);
    let sources: Vec<usize> = (0..n_sources)
        .map(|_| rng.gen_range(0..cloud.len()))
        .collect();
    let sweeps: Vec<Vec<(usize, usize, f64)>> = sources
        .par_iter()
        .map(|&s| {
            let d = g.dijkstra(s);
            (0..cloud.len())
                .filter_map(|t| {
                    let chord = dist(&cloud.points[s], &cloud.points[t]);
                    (t != s && chord > 1e-12).then(|| (s, t, d[t] / chord))
                })
                .collect()
        })
        .collect();
    let mut out = MetricRatio {
        ratio: 0.0,
        worst: (0, 0),
        min_ratio: f64::INFINITY,
        n_queries: 0,
        ratios: Vec::new(),
    };
    for (s, t, r) in sweeps.into_iter().flatten() {
        out.n_queries += 1;
        if r > out.ratio {
            out.ratio = r;
            out.worst = (s, t);
        }
        out.min_ratio = out.min_ratio.min(r);
        out.ratios.push(r);
    }
    if out.n_queries == 0 {
        return Err(GeomError::InsufficientSamples);
    }
    Ok(out)
}

/// Graph distance over chord for `n_pairs` seeded index pairs; one
/// shortest-path sweep per distinct source.
pub fn sampled_geodesic_ratios(
    cloud: &PointCloud,
    eps: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<MetricRatio> {
    if n_pairs == 0 || cloud.len() < 2 {
        return Err(GeomError::InsufficientSamples);
    }
    let g = epsilon_graph(cloud, eps)?;
    let mut rng = chunk_rng(seed, "geodesic-pairs", 0);
    let pairs: Vec<(usize, usize)> = (0..n_pairs)
        .map(|_| {
            let i = rng.gen_range(0..cloud.len());
            let mut j = rng.gen_range(0..cloud.len() - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect();
    let mut sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    let sweeps: HashMap<usize, Vec<f64>> =
        sources.par_iter().map(|&s| (s, g.dijkstra(s))).collect();
    let mut out = MetricRatio {
        ratio: 0.0,
        worst: (0, 0),
        min_ratio: f64::INFINITY,
        n_queries: 0,
        ratios: Vec::new(),
    };
    for (s, t) in pairs {
        let chord = dist(&cloud.points[s], &cloud.points[t]);
        if chord <= 1e-12 {
            continue;
        }
        let r = sweeps[&s][t] / chord;
        out.n_queries += 1;
        if r > out.ratio {
            out.ratio = r;
            out.worst = (s, t);
        }
        out.min_ratio = out.min_ratio.min(r);
        out.ratios.push(r);
    }
    if out.n_queries == 0 {
        return Err(GeomError::InsufficientSamples);
    }
    Ok(out)
}

/// The smallest ε whose graph is connected: the longest edge of the
/// Euclidean minimum spanning tree (Prim, O(N²)).
pub fn connecting_eps(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut current = 0;
    let mut longest: f64 = 0.0;
    for _ in 1..n {
        done[current] = true;
        let p = &cloud.points[current];
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if done[j] {
                continue;
            }
            let d = dist(p, &cloud.points[j]);
            if d < best[j] {
                best[j] = d;
            }
            if best[j] < next_d {
                next_d = best[j];
                next = j;
            }
        }
        longest = longest.max(next_d);
        current = next;
    }
    longest
}

/// `n_points` seeded uniform points on the circle of radius `radius`.
pub fn circle_cloud(n_points: usize, radius: f64, seed: u64) -> Result<PointCloud> {
    ellipse_cloud(n_points, radius, radius, seed)
}

/// Points `(a cos t, b sin t)` with t uniform.
pub fn ellipse_cloud(n_points: usize, a: f64, b: f64, seed: u64) -> Result<PointCloud> {
    let mut rng = chunk_rng(seed, "ellipse", 0);
    PointCloud::new(
        (0..n_points)
            .map(|_| {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                vec![a * t.cos(), b * t.sin()]
            })
            .collect(),
    )
}

/// `n_points` seeded uniform points on the unit sphere S^{n-1}.
pub fn sphere_cloud(n: usize, n_points: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = chunk_rng(seed, "sphere", 0);
    PointCloud::new((0..n_points).map(|_| unit_vector(&mut rng, n)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]` of the values.
pub fn ratio_histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn adjacent_points_give_chord() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.1, 0.1]]).unwrap();
        assert_eq!(geodesic_estimate(&cloud, 0.15, 0, 1).unwrap(), 0.1);
        assert_eq!(
            geodesic_estimate(&cloud, 0.15, 0, 2).unwrap(),
            dist(cloud.point(0), cloud.point(2))
        );
        // without the diagonal edge the path bends through the corner
        assert!((geodesic_estimate(&cloud, 0.12, 0, 2).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            geodesic_estimate(&cloud, 0.05, 0, 1),
            Err(GeomError::DisconnectedCloud(_))
        ));
    }

    #[test]
    fn circle_antipodes() {
        let cloud = circle_cloud(10_000, 1.0, 3).unwrap();
        let g = epsilon_graph(&cloud, 0.02).unwrap();
        let d = g.dijkstra(0);
        let p = cloud.point(0);
        let far = (0..cloud.len())
            .max_by(|&a, &b| dist(p, cloud.point(a)).total_cmp(&dist(p, cloud.point(b))))
            .unwrap();
        assert!((d[far] - PI).abs() < 0.01 * PI, "{}", d[far]);
        let r = metric_equivalence_ratio(&cloud, 0.02, 4, 1).unwrap();
        assert!(
            (r.ratio - FRAC_PI_2).abs() < 0.02 * FRAC_PI_2,
            "{}",
            r.ratio
        );
        assert!(r.min_ratio >= 1.0 - 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let cloud = sphere_cloud(3, 50, 2).unwrap();
        let mut buf = Vec::new();
        cloud.write_csv(&mut buf).unwrap();
        assert_eq!(PointCloud::read_csv(buf.as_slice()).unwrap(), cloud);
    }

    #[test]
    fn histogram_counts() {
        let h = ratio_histogram(&[1.0, 1.1, 1.2, 1.5, 1.5], 5);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[4].count, 2);
        assert!(ratio_histogram(&[], 3).is_empty());
    }

    #[test]
    fn connecting_eps_is_the_bottleneck() {
        let cloud = PointCloud::new(vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.5, 0.0],
            vec![0.5, 0.2],
        ])
        .unwrap();
        let e = connecting_eps(&cloud);
        assert!((e - 0.4).abs() < 1e-15);
        assert!(epsilon_graph(&cloud, e).is_ok());
        assert!(epsilon_graph(&cloud, 0.99 * e).is_err());
    }

    #[test]
    fn sampled_pairs_never_beat_the_chord() {
        let cloud = circle_cloud(2_000, 1.0, 5).unwrap();
        let r = sampled_geodesic_ratios(&cloud, 0.05, 300, 2).unwrap();
        assert_eq!(r.n_queries, 300);
        assert!(r.min_ratio >= 1.0 - 1e-12 && r.ratio <= FRAC_PI_2 * 1.02);
    }
}
