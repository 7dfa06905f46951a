//! Uniformly discrete metric spaces with bounded geometry, represented by a
//! finite computational window, and weighted graphs read as such spaces.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{BandKernel, Site, SiteSet};

/// Windows up to this size get every pair checked against the metric axioms.
pub const FULL_PAIR_CHECK: usize = 2000;
/// Windows up to this size get every triple checked for the triangle inequality.
pub const FULL_TRIANGLE_CHECK: usize = 128;
const SAMPLED_TRIANGLES: usize = 200_000;
const SAMPLED_PAIRS: usize = 400_000;

const Z2_STRIDE: i64 = 1 << 24;

/// Packs a point of ℤ² into a site id. Ids sort row-major.
pub fn z2_encode(i: i64, j: i64) -> Site {
    i * Z2_STRIDE + j
}

pub fn z2_decode(id: Site) -> (i64, i64) {
    let half = Z2_STRIDE / 2;
    let j = (id + half).rem_euclid(Z2_STRIDE) - half;
    ((id - j) / Z2_STRIDE, j)
}

/// Distance function of a [`SiteSpace`].
#[derive(Clone)]
pub enum Metric {
    /// `|x - y|` on the integer ids.
    Line,
    /// ℓ¹ distance on ℤ² points packed with [`z2_encode`].
    GridL1,
    /// Precomputed symmetric table over the window, row-major by site position.
    Table(Arc<Vec<f64>>),
    Custom(Arc<dyn Fn(Site, Site) -> f64 + Send + Sync>),
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Line => f.write_str("Line"),
            Metric::GridL1 => f.write_str("GridL1"),
            Metric::Table(t) => write!(f, "Table({} entries)", t.len()),
            Metric::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BgEntry {
    pub radius: f64,
    pub max_ball: usize,
}

/// A validated finite window of a uniformly discrete, bounded-geometry
/// metric space.
#[derive(Clone, Debug)]
pub struct SiteSpace {
    sites: SiteSet,
    metric: Metric,
    ud_alpha: f64,
    bg_profile: Vec<BgEntry>,
}

impl SiteSpace {
    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn ud_alpha(&self) -> f64 {
        self.ud_alpha
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Measured `(radius, max |B_x(radius)|)` pairs.
    pub fn bg_profile(&self) -> &[BgEntry] {
        &self.bg_profile
    }

    pub fn dist(&self, x: Site, y: Site) -> f64 {
        match &self.metric {
            Metric::Line => (x - y).unsigned_abs() as f64,
            Metric::GridL1 => {
                let (a, b) = z2_decode(x);
                let (c, d) = z2_decode(y);
                ((a - c).abs() + (b - d).abs()) as f64
            }
            Metric::Table(t) => match (self.sites.position(x), self.sites.position(y)) {
                (Some(i), Some(j)) => t[i * self.sites.len() + j],
                _ => f64::INFINITY,
            },
            Metric::Custom(f) => f(x, y),
        }
    }

    /// Sites of the window within distance `r` of `x`, sorted.
    pub fn ball(&self, x: Site, r: f64) -> Vec<Site> {
        match self.metric {
            Metric::Line => {
                let r = r.floor() as i64;
                let ids = self.sites.ids();
                let lo = ids.partition_point(|&s| s < x.saturating_sub(r));
                let hi = ids.partition_point(|&s| s <= x.saturating_add(r));
                ids[lo..hi].to_vec()
            }
            _ => self
                .sites
                .iter()
                .filter(|&y| self.dist(x, y) <= r)
                .collect(),
        }
    }

    /// Same space: either the same allocation or the same lattice window.
    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        if Arc::ptr_eq(self, other) {
            return true;
        }
        match (&self.metric, &other.metric) {
            (Metric::Line, Metric::Line) | (Metric::GridL1, Metric::GridL1) => {
                self.sites == other.sites
            }
            (Metric::Table(a), Metric::Table(b)) => {
                (Arc::ptr_eq(a, b) || a == b) && self.sites == other.sites
            }
            (Metric::Custom(a), Metric::Custom(b)) => {
                Arc::ptr_eq(a, b) && self.sites == other.sites
            }
            _ => false,
        }
    }

    /// Sites whose `r`-ball in the ambient lattice lies inside the window.
    /// For table and custom metrics the window is the whole space, so every
    /// site qualifies.
    pub fn interior(&self, r: f64) -> SiteSet {
        let expected = match self.metric {
            Metric::Line => 2 * r.floor() as usize + 1,
            Metric::GridL1 => {
                let n = r.floor() as usize;
                2 * n * n + 2 * n + 1
            }
            _ => return self.sites.clone(),
        };
        SiteSet::new(
            self.sites
                .iter()
                .filter(|&x| self.ball(x, r).len() == expected),
        )
    }

    /// `[lo, hi]` with `|x - y|`.
    pub fn integer_window(lo: i64, hi: i64) -> Result<Self> {
        build_space(lo..=hi, Metric::Line, 1.0, &[1.0, 2.0])
    }

    /// The square `[-w, w]²` of ℤ² with the ℓ¹ metric.
    pub fn grid_window(w: i64) -> Result<Self> {
        let pts = (-w..=w).flat_map(|i| (-w..=w).map(move |j| z2_encode(i, j)));
        build_space(pts, Metric::GridL1, 1.0, &[1.0, 2.0])
    }
}

/// Validates a window against (UD), the metric axioms and records the
/// (BG) profile at the requested radii.
pub fn build_space(
    points: impl IntoIterator<Item = Site>,
    metric: Metric,
    ud_alpha: f64,
    bg_check_radii: &[f64],
) -> Result<SiteSpace> {
    let mut ids: Vec<Site> = points.into_iter().collect();
    if ids.is_empty() {
        return Err(Error::Precondition(
            "site space needs at least one point".into(),
        ));
    }
    if ud_alpha.is_nan() || ud_alpha <= 0.0 {
        return Err(Error::Precondition(format!(
            "ud_alpha must be positive, got {ud_alpha}"
        )));
    }
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Structural(format!("duplicate site id {}", w[0])));
    }
    let space = SiteSpace {
        sites: SiteSet::from_sorted(ids),
        metric,
        ud_alpha,
        bg_profile: Vec::new(),
    };
    check_pairs(&space)?;
    check_triangles(&space)?;
    let bg_profile = bg_check_radii
        .iter()
        .map(|&radius| BgEntry {
            radius,
            max_ball: space
                .sites
                .iter()
                .map(|x| space.ball(x, radius).len())
                .max()
                .unwrap_or(0),
        })
        .collect();
    Ok(SiteSpace {
        bg_profile,
        ..space
    })
}

fn check_pair(space: &SiteSpace, x: Site, y: Site) -> Result<()> {
    let d = space.dist(x, y);
    let back = space.dist(y, x);
    if d.is_nan() || d < 0.0 {
        return Err(Error::MetricAxiom(format!(
            "d({x},{y}) = {d} is not a distance"
        )));
    }
    if x == y {
        if d != 0.0 {
            return Err(Error::MetricAxiom(format!("d({x},{x}) = {d} != 0")));
        }
        return Ok(());
    }
    if d < space.ud_alpha {
        return Err(Error::UniformDiscreteness {
            x,
            y,
            dist: d,
            alpha: space.ud_alpha,
        });
    }
    if d != back {
        return Err(Error::MetricAxiom(format!(
            "d({x},{y}) = {d} but d({y},{x}) = {back}"
        )));
    }
    Ok(())
}

fn check_pairs(space: &SiteSpace) -> Result<()> {
    let ids = space.sites.ids();
    let n = ids.len();
    if n <= FULL_PAIR_CHECK {
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i..] {
                check_pair(space, x, y)?;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for _ in 0..SAMPLED_PAIRS {
            check_pair(
                space,
                ids[rng.random_range(0..n)],
                ids[rng.random_range(0..n)],
            )?;
        }
    }
    Ok(())
}

fn check_triangle(space: &SiteSpace, x: Site, y: Site, z: Site) -> Result<()> {
    let (xy, yz, xz) = (space.dist(x, y), space.dist(y, z), space.dist(x, z));
    // Relative slack for metrics computed in floating point.
    if xz > xy + yz + 1e-12 * (xy + yz) {
        return Err(Error::MetricAxiom(format!(
            "triangle inequality fails: d({x},{z}) = {xz} > d({x},{y}) + d({y},{z}) = {}",
            xy + yz
        )));
    }
    Ok(())
}

fn check_triangles(space: &SiteSpace) -> Result<()> {
    let ids = space.sites.ids();
    let n = ids.len();
    if n <= FULL_TRIANGLE_CHECK {
        for &x in ids {
            for &y in ids {
                for &z in ids {
                    check_triangle(space, x, y, z)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for _ in 0..SAMPLED_TRIANGLES {
            let (a, b, c) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            check_triangle(space, ids[a], ids[b], ids[c])?;
        }
    }
    Ok(())
}

/// The cofinite set `window \ B_center(radius)`.
pub fn ball_complement(space: &SiteSpace, center: Site, radius: f64) -> Result<SiteSet> {
    if !space.sites.contains(center) {
        return Err(Error::Precondition(format!(
            "center {center} is not in the window"
        )));
    }
    Ok(SiteSet::cofinite(space.sites(), space.ball(center, radius)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKernelKind {
    Adjacency,
    Laplacian,
}

/// An undirected weighted graph, carrying its path-length metric space.
#[derive(Clone, Debug)]
pub struct GraphModel {
    weights: BTreeMap<(Site, Site), f64>,
    space: Arc<SiteSpace>,
}

impl GraphModel {
    /// `weights` lists directed entries; both directions must be present
    /// with equal weight. Zero weights are dropped.
    pub fn new(
        vertices: impl IntoIterator<Item = Site>,
        weights: impl IntoIterator<Item = (Site, Site, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, y, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Structural(format!("edge ({x},{y}) has weight {w}")));
            }
            if x == y && w != 0.0 {
                return Err(Error::Structural(format!(
                    "self-loop at {x} with weight {w}"
                )));
            }
            if w != 0.0 && map.insert((x, y), w).is_some() {
                return Err(Error::Structural(format!("duplicate entry ({x},{y})")));
            }
        }
        for (&(x, y), &w) in &map {
            if map.get(&(y, x)) != Some(&w) {
                return Err(Error::Structural(format!(
                    "asymmetric weight: w({x},{y}) = {w}, w({y},{x}) = {:?}",
                    map.get(&(y, x))
                )));
            }
        }
        let mut verts: Vec<Site> = vertices.into_iter().collect();
        verts.extend(map.keys().map(|&(x, _)| x));
        verts.sort_unstable();
        verts.dedup();
        let space = Arc::new(hop_space(&verts, &map)?);
        Ok(GraphModel {
            weights: map,
            space,
        })
    }

    /// Undirected edge list, one `x y weight` per line; repeated edges add up.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut acc: BTreeMap<(Site, Site), f64> = BTreeMap::new();
        let mut verts = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Parse {
                line: n + 1,
                msg: msg.into(),
            };
            if f.len() != 3 {
                return Err(bad("expected `x y weight`"));
            }
            let x: Site = f[0].parse().map_err(|_| bad("bad vertex"))?;
            let y: Site = f[1].parse().map_err(|_| bad("bad vertex"))?;
            let w: f64 = f[2].parse().map_err(|_| bad("bad weight"))?;
            verts.extend([x, y]);
            *acc.entry((x, y)).or_default() += w;
            if x != y {
                *acc.entry((y, x)).or_default() += w;
            }
        }
        Self::new(verts, acc.into_iter().map(|((x, y), w)| (x, y, w)))
    }

    pub fn vertices(&self) -> &SiteSet {
        self.space.sites()
    }

    pub fn space(&self) -> &Arc<SiteSpace> {
        &self.space
    }

    pub fn weight(&self, x: Site, y: Site) -> f64 {
        self.weights.get(&(x, y)).copied().unwrap_or(0.0)
    }

    pub fn degree(&self, x: Site) -> f64 {
        self.weights
            .range((x, Site::MIN)..=(x, Site::MAX))
            .map(|(_, w)| w)
            .sum()
    }

    /// The subgraph induced on `keep`: drops the other vertices and every
    /// edge touching them.
    pub fn induced(&self, keep: &SiteSet) -> Result<Self> {
        Self::new(
            self.vertices().iter().filter(|&v| keep.contains(v)),
            self.weights
                .iter()
                .filter(|((x, y), _)| keep.contains(*x) && keep.contains(*y))
                .map(|(&(x, y), &w)| (x, y, w)),
        )
    }
}

fn hop_space(verts: &[Site], weights: &BTreeMap<(Site, Site), f64>) -> Result<SiteSpace> {
    let n = verts.len();
    let pos = |s: Site| {
        verts
            .binary_search(&s)
            .expect("endpoint registered as vertex")
    };
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in weights.keys() {
        adj[pos(x)].push(pos(y));
    }
    let mut table = vec![f64::INFINITY; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        table[s * n + s] = 0.0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = table[s * n + u];
            for &v in &adj[u] {
                if table[s * n + v].is_infinite() {
                    table[s * n + v] = du + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    build_space(
        verts.iter().copied(),
        Metric::Table(Arc::new(table)),
        1.0,
        &[1.0, 2.0],
    )
}

/// Adjacency `K(x,y) = w(x,y)` or Laplacian `K(x,x) = deg(x)`,
/// `K(x,y) = -w(x,y)`, with bandwidth 1 in the path metric.
pub fn graph_kernel(g: &GraphModel, kind: GraphKernelKind) -> Result<BandKernel<f64>> {
    let mut entries: Vec<(Site, Site, f64)> = g
        .weights
        .iter()
        .map(|(&(x, y), &w)| match kind {
            GraphKernelKind::Adjacency => (x, y, w),
            GraphKernelKind::Laplacian => (x, y, -w),
        })
        .collect();
    if kind == GraphKernelKind::Laplacian {
        entries.extend(g.vertices().iter().map(|x| (x, x, g.degree(x))));
    }
    BandKernel::from_entries(g.space.clone(), entries, 1.0)
}
