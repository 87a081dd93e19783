//! Pullback quasimetric on the grid, the quotient space it induces, factor
//! maps, and tree certification by four-point defects and loop areas.
//!
//! The grid graph carries image distances as edge weights; shortest paths
//! give a discrete pullback distance `d(u, v) <= path image length`, which
//! sits between the image distance and `L * |u - v|_1`. Gluing vertices that
//! the pullback distance cannot separate (edge weight at most epsilon,
//! chained transitively) contracts the graph; recomputing shortest paths on
//! the contraction makes the quotient metric satisfy the triangle
//! inequality exactly by construction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::area::{oriented_area, Curve, CurveMetric};
use crate::error::{Error, Result};
use crate::sampled_map::SampledMap;
use crate::unionfind::UnionFind;

/// Weighted graph with memoized single-source shortest paths.
#[derive(Debug, Clone)]
struct ShortestPathGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    cache: BTreeMap<usize, Vec<f64>>,
}

impl ShortestPathGraph {
    fn new(adjacency: Vec<Vec<(usize, f64)>>) -> Self {
        Self {
            adjacency,
            cache: BTreeMap::new(),
        }
    }

    fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    fn distances_from(&mut self, source: usize) -> &Vec<f64> {
        if !self.cache.contains_key(&source) {
            let row = dijkstra(&self.adjacency, source);
            self.cache.insert(source, row);
        }
        &self.cache[&source]
    }

    fn distance(&mut self, u: usize, v: usize) -> f64 {
        self.distances_from(u)[v]
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap: BinaryHeap<Reverse<(OrderedF64, usize)>> = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedF64(0.0), source)));
    while let Some(Reverse((OrderedF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrderedF64(nd), v)));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The grid graph with image-distance edge weights and an on-demand
/// shortest-path oracle for the pullback distance.
#[derive(Debug, Clone)]
pub struct PullbackMetric {
    graph: ShortestPathGraph,
    /// Axis-adjacent edges as `(u, v, weight)`.
    edges: Vec<(usize, usize, f64)>,
}

impl PullbackMetric {
    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Discrete pullback distance between two grid vertices.
    pub fn distance(&mut self, u: usize, v: usize) -> f64 {
        self.graph.distance(u, v)
    }

    pub fn distances_from(&mut self, source: usize) -> Vec<f64> {
        self.graph.distances_from(source).clone()
    }
}

/// Builds the pullback metric of a sampled map: vertices are grid points,
/// edges join axis-adjacent pairs, and the weight is the image distance.
pub fn pullback_metric(map: &SampledMap) -> PullbackMetric {
    let n = map.domain().num_points();
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (u, v) in map.domain().adjacent_pairs() {
        let w = map.image_distance(u, v);
        adjacency[u].push((v, w));
        adjacency[v].push((u, w));
        edges.push((u, v, w));
    }
    PullbackMetric {
        graph: ShortestPathGraph::new(adjacency),
        edges,
    }
}

/// The contracted grid graph with its class metric and both factor maps.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    /// Vertex -> class id (compressed to `0..num_classes`).
    psi: Vec<usize>,
    /// Class id -> representative vertex.
    representatives: Vec<usize>,
    /// Class id -> representative target value.
    phi: Vec<Vec<f64>>,
    metric: ShortestPathGraph,
    epsilon: f64,
}

impl QuotientSpace {
    pub fn num_classes(&self) -> usize {
        self.representatives.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Class of a grid vertex.
    pub fn psi(&self, vertex: usize) -> usize {
        self.psi[vertex]
    }

    pub fn psi_table(&self) -> &[usize] {
        &self.psi
    }

    /// Representative target value of a class.
    pub fn phi(&self, class: usize) -> &[f64] {
        &self.phi[class]
    }

    pub fn representative(&self, class: usize) -> usize {
        self.representatives[class]
    }

    /// Quotient distance between classes (exact shortest-path metric).
    pub fn distance(&mut self, a: usize, b: usize) -> f64 {
        self.metric.distance(a, b)
    }

    pub fn distances_from(&mut self, class: usize) -> Vec<f64> {
        self.metric.distances_from(class).clone()
    }

    /// Contracted edges `(class_a, class_b, min weight)`.
    pub fn contracted_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.metric.adjacency.iter().enumerate() {
            for &(b, w) in nbrs {
                if a < b {
                    out.push((a, b, w));
                }
            }
        }
        out
    }
}

/// Glues grid vertices whose pullback distance cannot exceed `epsilon`,
/// restricted to chains of graph-adjacent pairs: every edge of weight at
/// most `epsilon` is merged, and union-find closes the chains. Gluing by
/// exact zeros only would miss weights that are zero up to rounding.
///
/// The contracted multigraph keeps the minimum weight among parallel edges,
/// and the class metric is recomputed as shortest paths on the contraction.
pub fn quotient(map: &SampledMap, pm: &PullbackMetric, epsilon: f64) -> Result<QuotientSpace> {
    if epsilon < 0.0 {
        return Err(Error::InvalidInput(
            "gluing threshold must be nonnegative".into(),
        ));
    }
    let n = pm.num_vertices();
    let mut uf = UnionFind::new(n);
    for &(u, v, w) in pm.edges() {
        if w <= epsilon {
            uf.union(u, v);
        }
    }
    // compress class ids in order of first appearance
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut psi = Vec::with_capacity(n);
    let mut representatives = Vec::new();
    for v in 0..n {
        let root = uf.find(v);
        let next_id = class_of_root.len();
        let id = *class_of_root.entry(root).or_insert(next_id);
        psi.push(id);
        if id == representatives.len() {
            representatives.push(v);
        }
    }
    let num_classes = representatives.len();
    let mut weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(u, v, w) in pm.edges() {
        let (a, b) = (psi[u], psi[v]);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        weight
            .entry(key)
            .and_modify(|cur| *cur = cur.min(w))
            .or_insert(w);
    }
    let mut adjacency = vec![Vec::new(); num_classes];
    for (&(a, b), &w) in &weight {
        adjacency[a].push((b, w));
        adjacency[b].push((a, w));
    }
    let phi = representatives
        .iter()
        .map(|&v| map.value(v).to_vec())
        .collect();
    Ok(QuotientSpace {
        psi,
        representatives,
        phi,
        metric: ShortestPathGraph::new(adjacency),
        epsilon,
    })
}

/// Worst-case Lipschitz/reproduction diagnostics for the factorization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorReport {
    /// Max of `d_Z(psi u, psi v) / (L * |u - v|_1)` over sampled pairs.
    pub max_psi_ratio: f64,
    /// Max of `d_Y(phi a, phi b) / d_Z(a, b)` over sampled pairs with
    /// positive quotient distance.
    pub max_phi_ratio: f64,
    /// Max image distance over sampled pairs the quotient cannot separate;
    /// bounded by the epsilon-gluing slack of the chains that merged them.
    pub max_glued_image_spread: f64,
    /// Max of `d_Y(phi(psi x), f(x))` over all vertices.
    pub max_reproduction_error: f64,
    pub pairs_tested: usize,
}

/// Verifies that `psi` is Lipschitz at scale `L`, `phi` does not expand the
/// quotient metric, and `phi . psi` reproduces the map, on seeded samples.
pub fn factor_check(
    map: &SampledMap,
    z: &mut QuotientSpace,
    sources: usize,
    seed: u64,
) -> Result<FactorReport> {
    let n = map.domain().num_points();
    let l = map.lipschitz();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_psi_ratio: f64 = 0.0;
    let mut max_phi_ratio: f64 = 0.0;
    let mut max_glued: f64 = 0.0;
    let mut pairs = 0usize;
    let n_sources = sources.clamp(1, n);
    for _ in 0..n_sources {
        let u = rng.random_range(0..n);
        let rows = z.distances_from(z.psi(u));
        for _ in 0..64 {
            let v = rng.random_range(0..n);
            if v == u {
                continue;
            }
            let dz = rows[z.psi(v)];
            let pu = map.domain().point(u);
            let pv = map.domain().point(v);
            let l1: f64 = pu.iter().zip(&pv).map(|(a, b)| (a - b).abs()).sum();
            if l > 0.0 && l1 > 0.0 {
                max_psi_ratio = max_psi_ratio.max(dz / (l * l1));
            }
            let dy = map.image_distance(u, v);
            if dz > 0.0 {
                max_phi_ratio = max_phi_ratio.max(dy / dz);
            } else {
                max_glued = max_glued.max(dy);
            }
            pairs += 1;
        }
    }
    let mut max_repro: f64 = 0.0;
    for v in 0..n {
        let rep = z.representative(z.psi(v));
        max_repro = max_repro.max(map.image_distance(rep, v));
    }
    Ok(FactorReport {
        max_psi_ratio,
        max_phi_ratio,
        max_glued_image_spread: max_glued,
        max_reproduction_error: max_repro,
        pairs_tested: pairs,
    })
}

/// Worst axis-direction disagreement between the speed of the quotiented
/// map (through the class metric) and of the original map (through the
/// target metric), over sampled interior points.
///
/// Both speeds are half-chord estimates at stride `h`; the quotient factors
/// every curve through `psi` without changing its length, so the two agree
/// up to the gluing coarsening.
pub fn quotient_speed_agreement(
    map: &SampledMap,
    z: &mut QuotientSpace,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let interior = map.domain().interior_indices();
    if interior.is_empty() {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = map.domain().spacing();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = interior[rng.random_range(0..interior.len())];
        for axis in 0..map.domain().dim() {
            let s = map.domain().axis_stride(axis);
            let minus = z.psi(x - s);
            let here = z.psi(x);
            let plus = z.psi(x + s);
            let dz = (z.distance(minus, here) + z.distance(here, plus)) / (2.0 * h);
            let dy = map.directional_speed(x, axis)?;
            worst = worst.max((dz - dy).abs());
        }
    }
    Ok(worst)
}

/// Four-point scan of an explicit finite metric: exhaustive over all
/// quadruples of `0..k` with distances from the callback. Returns the worst
/// defect, its witness, and the witness pair-sums.
pub fn four_point_defect_matrix(
    dist: &dyn Fn(usize, usize) -> f64,
    k: usize,
) -> (f64, [usize; 4], [f64; 3]) {
    let mut best = (0.0f64, [0usize; 4], [0.0f64; 3]);
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    let s1 = dist(a, b) + dist(c, d);
                    let s2 = dist(a, c) + dist(b, d);
                    let s3 = dist(a, d) + dist(b, c);
                    let mut sums = [s1, s2, s3];
                    sums.sort_by(f64::total_cmp);
                    let defect = sums[2] - sums[1];
                    if defect > best.0 {
                        best = (defect, [a, b, c, d], [s1, s2, s3]);
                    }
                }
            }
        }
    }
    best
}

/// Result of the four-point (0-hyperbolicity) scan.
#[derive(Debug, Clone, Serialize)]
pub struct FourPointReport {
    /// Max over tested quadruples of (largest pair-sum minus median).
    pub defect: f64,
    /// Quadruple of class ids realizing the defect.
    pub witness: [usize; 4],
    /// The three pair-sums of the witness quadruple.
    pub witness_sums: [f64; 3],
    pub quadruples_tested: usize,
    pub exhaustive: bool,
}

/// Scans quadruples of classes for the four-point condition: among the
/// three pair-sums `d(x,y)+d(z,w)`, `d(x,z)+d(y,w)`, `d(x,w)+d(y,z)` the
/// two largest must agree in a tree. Exhaustive when `classes^4 <= budget`,
/// otherwise a seeded sample that always includes extremal classes.
pub fn four_point_defect(
    z: &mut QuotientSpace,
    budget: usize,
    seed: u64,
) -> Result<FourPointReport> {
    if budget == 0 {
        return Err(Error::InvalidInput("quadruple budget must be >= 1".into()));
    }
    let k = z.num_classes();
    if k < 4 {
        return Ok(FourPointReport {
            defect: 0.0,
            witness: [0; 4],
            witness_sums: [0.0; 3],
            quadruples_tested: 0,
            exhaustive: true,
        });
    }
    let exhaustive = k.checked_pow(4).is_some_and(|k4| k4 <= budget);
    let classes: Vec<usize> = if exhaustive {
        (0..k).collect()
    } else {
        // sample set sized so its quadruple count roughly matches the
        // budget; extremal classes (first/last representatives) are pinned
        // so grid corners always participate
        let mut take = 4usize;
        while take < k && take.checked_pow(4).is_some_and(|t| t / 24 < budget) {
            take += 1;
        }
        let mut set: Vec<usize> = vec![0, k - 1];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while set.len() < take.min(k) {
            set.push(rng.random_range(0..k));
        }
        set.sort_unstable();
        set.dedup();
        set
    };
    // pairwise distances among the chosen classes
    let rows: BTreeMap<usize, Vec<f64>> =
        classes.iter().map(|&c| (c, z.distances_from(c))).collect();
    let mut best = FourPointReport {
        defect: 0.0,
        witness: [classes[0]; 4],
        witness_sums: [0.0; 3],
        quadruples_tested: 0,
        exhaustive,
    };
    let m = classes.len();
    for i in 0..m {
        for j in i + 1..m {
            for p in j + 1..m {
                for q in p + 1..m {
                    let (a, b, c, d) = (classes[i], classes[j], classes[p], classes[q]);
                    let s1 = rows[&a][b] + rows[&c][d];
                    let s2 = rows[&a][c] + rows[&b][d];
                    let s3 = rows[&a][d] + rows[&b][c];
                    let mut sums = [s1, s2, s3];
                    sums.sort_by(f64::total_cmp);
                    let defect = sums[2] - sums[1];
                    best.quadruples_tested += 1;
                    if defect > best.defect {
                        best.defect = defect;
                        best.witness = [a, b, c, d];
                        best.witness_sums = [s1, s2, s3];
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Recomputes the defect of a witness quadruple from the quotient metric.
pub fn recompute_defect(z: &mut QuotientSpace, witness: &[usize; 4]) -> f64 {
    let [a, b, c, d] = *witness;
    let s1 = z.distance(a, b) + z.distance(c, d);
    let s2 = z.distance(a, c) + z.distance(b, d);
    let s3 = z.distance(a, d) + z.distance(b, c);
    let mut sums = [s1, s2, s3];
    sums.sort_by(f64::total_cmp);
    sums[2] - sums[1]
}

/// A map from quotient classes to the plane used by the loop test.
#[derive(Debug, Clone, Serialize)]
pub enum PlaneProjection {
    /// Use `phi` directly; valid when the target is plane-embedded.
    Phi,
    /// `z -> (d_Z(z, p), d_Z(z, q))` for two landmark classes; each
    /// coordinate is 1-Lipschitz by the triangle inequality.
    LandmarkPair { p: usize, q: usize },
}

/// Result of the loop-area scan.
#[derive(Debug, Clone, Serialize)]
pub struct LoopAreaReport {
    /// Max of `|A(pi . psi . loop)|` over loops and projections.
    pub max_area: f64,
    /// Loop index and projection realizing the max.
    pub witness_loop: usize,
    pub witness_projection: Option<PlaneProjection>,
    pub loops_tested: usize,
}

/// Computes the oriented area of the projected psi-image of each closed
/// grid loop under each projection and reports the maximum magnitude.
pub fn loop_area_test(
    map: &SampledMap,
    z: &mut QuotientSpace,
    loops: &[Vec<usize>],
    projections: &[PlaneProjection],
) -> Result<LoopAreaReport> {
    let mut report = LoopAreaReport {
        max_area: 0.0,
        witness_loop: 0,
        witness_projection: None,
        loops_tested: 0,
    };
    for (li, vertex_loop) in loops.iter().enumerate() {
        if vertex_loop.len() < 4 || vertex_loop.first() != vertex_loop.last() {
            return Err(Error::InvalidInput(format!(
                "loop {li} is not a closed path of length >= 4"
            )));
        }
        report.loops_tested += 1;
        let classes: Vec<usize> = vertex_loop.iter().map(|&v| z.psi(v)).collect();
        for projection in projections {
            let planar: Vec<Vec<f64>> = match projection {
                PlaneProjection::Phi => {
                    if map.value_dim() != 2 {
                        return Err(Error::InvalidInput(
                            "phi projection needs a plane-embedded target".into(),
                        ));
                    }
                    classes.iter().map(|&c| z.phi(c).to_vec()).collect()
                }
                PlaneProjection::LandmarkPair { p, q } => {
                    let dp = z.distances_from(*p);
                    let dq = z.distances_from(*q);
                    classes.iter().map(|&c| vec![dp[c], dq[c]]).collect()
                }
            };
            let params: Vec<f64> = (0..planar.len()).map(|i| i as f64).collect();
            let mut pts = planar;
            let last = pts.len() - 1;
            pts[last] = pts[0].clone(); // classes of first/last vertex agree
            let curve = Curve::new(params, pts, CurveMetric::Euclidean)?;
            let area = oriented_area(&curve)?.abs();
            if area > report.max_area {
                report.max_area = area;
                report.witness_loop = li;
                report.witness_projection = Some(projection.clone());
            }
        }
    }
    Ok(report)
}

/// Boundary rectangles of random axis-aligned sub-grids, as closed vertex
/// paths. For domains of dimension 3 or more the rectangle lives in a
/// random coordinate 2-plane at random fixed remaining coordinates.
pub fn default_loops(map: &SampledMap, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let domain = map.domain();
    let d = domain.dim();
    if d < 2 {
        return Vec::new();
    }
    let n = domain.points_per_axis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loops = Vec::with_capacity(count);
    for _ in 0..count {
        let a = rng.random_range(0..d);
        let mut b = rng.random_range(0..d - 1);
        if b >= a {
            b += 1;
        }
        let (a, b) = (a.min(b), a.max(b));
        let lo_a = rng.random_range(0..n - 1);
        let hi_a = rng.random_range(lo_a + 1..n);
        let lo_b = rng.random_range(0..n - 1);
        let hi_b = rng.random_range(lo_b + 1..n);
        let mut base = vec![0usize; d];
        for (axis, c) in base.iter_mut().enumerate() {
            if axis != a && axis != b {
                *c = rng.random_range(0..n);
            }
        }
        let mut path = Vec::new();
        let mut push = |ia: usize, ib: usize, base: &mut Vec<usize>| {
            base[a] = ia;
            base[b] = ib;
            path.push(domain.linear_index(base));
        };
        for ia in lo_a..=hi_a {
            push(ia, lo_b, &mut base);
        }
        for ib in lo_b + 1..=hi_b {
            push(hi_a, ib, &mut base);
        }
        for ia in (lo_a..hi_a).rev() {
            push(ia, hi_b, &mut base);
        }
        for ib in (lo_b + 1..=hi_b).rev() {
            push(lo_a, ib, &mut base);
        }
        push(lo_a, lo_b, &mut base);
        loops.push(path);
    }
    loops
}

/// The full boundary rectangle of the grid in the (0, 1) coordinate plane.
pub fn boundary_loop(map: &SampledMap) -> Vec<usize> {
    let domain = map.domain();
    let n = domain.points_per_axis();
    let d = domain.dim();
    let mut path = Vec::new();
    let mut base = vec![0usize; d];
    let mut push = |i: usize, j: usize, base: &mut Vec<usize>| {
        base[0] = i;
        base[1] = j;
        path.push(domain.linear_index(base));
    };
    for i in 0..n {
        push(i, 0, &mut base);
    }
    for j in 1..n {
        push(n - 1, j, &mut base);
    }
    for i in (0..n - 1).rev() {
        push(i, n - 1, &mut base);
    }
    for j in (1..n - 1).rev() {
        push(0, j, &mut base);
    }
    push(0, 0, &mut base);
    path
}

/// Tree-or-not verdict with its numeric evidence.
#[derive(Debug, Clone, Serialize)]
pub struct TreeCertificate {
    pub four_point: FourPointReport,
    pub loop_area: LoopAreaReport,
    pub defect_tolerance: f64,
    pub area_tolerance: f64,
    pub is_tree_within_tolerance: bool,
}

/// Combines the four-point scan and the loop-area scan into a verdict.
pub fn tree_certificate(
    map: &SampledMap,
    z: &mut QuotientSpace,
    quadruple_budget: usize,
    loop_count: usize,
    seed: u64,
    defect_tolerance: f64,
    area_tolerance: f64,
) -> Result<TreeCertificate> {
    let four_point = four_point_defect(z, quadruple_budget, seed)?;
    let mut loops = default_loops(map, loop_count, seed ^ 0x6c6f6f70);
    if map.domain().dim() >= 2 {
        loops.push(boundary_loop(map));
    }
    let mut projections = vec![];
    if map.value_dim() == 2 && map.target().is_embedded() {
        projections.push(PlaneProjection::Phi);
    }
    let k = z.num_classes();
    if k >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70726f6a);
        for _ in 0..3 {
            let p = rng.random_range(0..k);
            let q = rng.random_range(0..k);
            if p != q {
                projections.push(PlaneProjection::LandmarkPair { p, q });
            }
        }
    }
    let loop_area = loop_area_test(map, z, &loops, &projections)?;
    let is_tree = four_point.defect <= defect_tolerance && loop_area.max_area <= area_tolerance;
    Ok(TreeCertificate {
        four_point,
        loop_area,
        defect_tolerance,
        area_tolerance,
        is_tree_within_tolerance: is_tree,
    })
}
