//! Band kernels: finitely supported two-site matrices `K(x, y)` over a
//! [`SiteSpace`], with the ⋆-algebra operations, compressions to subsets and
//! the two a-priori norm bounds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::SiteSpace;

/// Integer site label. For subshift problems it is a shift index.
pub type Site = i64;

/// Sorted, duplicate-free set of sites, optionally tagged as a window minus
/// a finite excluded list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSet {
    ids: Vec<Site>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    excluded: Option<Vec<Site>>,
}

impl SiteSet {
    pub fn new(ids: impl IntoIterator<Item = Site>) -> Self {
        let mut ids: Vec<Site> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        SiteSet {
            ids,
            excluded: None,
        }
    }

    pub(crate) fn from_sorted(ids: Vec<Site>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        SiteSet {
            ids,
            excluded: None,
        }
    }

    /// Integers `lo..=hi`.
    pub fn range(lo: Site, hi: Site) -> Self {
        SiteSet::from_sorted((lo..=hi).collect())
    }

    /// `window \ removed`, remembering which sites of the window were removed.
    pub fn cofinite(window: &SiteSet, removed: impl IntoIterator<Item = Site>) -> Self {
        let removed = SiteSet::new(removed.into_iter().filter(|&s| window.contains(s)));
        let ids = window.iter().filter(|&s| !removed.contains(s)).collect();
        SiteSet {
            ids,
            excluded: Some(removed.ids),
        }
    }

    pub fn ids(&self) -> &[Site] {
        &self.ids
    }

    pub fn excluded(&self) -> Option<&[Site]> {
        self.excluded.as_deref()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Site> + ExactSizeIterator + '_ {
        self.ids.iter().copied()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.ids.binary_search(&s).is_ok()
    }

    pub fn position(&self, s: Site) -> Option<usize> {
        self.ids.binary_search(&s).ok()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    /// Membership only, without the cofinite tag.
    pub fn same_members(&self, other: &SiteSet) -> bool {
        self.ids == other.ids
    }
}

impl FromIterator<Site> for SiteSet {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        SiteSet::new(iter)
    }
}

/// Dense vector indexed by a [`SiteSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteVector<T> {
    sites: SiteSet,
    values: Vec<T>,
}

impl<T: Scalar> FiniteVector<T> {
    pub fn new(sites: SiteSet, values: Vec<T>) -> Result<Self> {
        if sites.len() != values.len() {
            return Err(Error::Structural(format!(
                "{} values for {} sites",
                values.len(),
                sites.len()
            )));
        }
        Ok(FiniteVector { sites, values })
    }

    pub fn zeros(sites: SiteSet) -> Self {
        let values = vec![T::zero(); sites.len()];
        FiniteVector { sites, values }
    }

    /// Unit vector at `s`.
    pub fn basis(sites: SiteSet, s: Site) -> Result<Self> {
        let mut v = Self::zeros(sites);
        let i = v
            .sites
            .position(s)
            .ok_or_else(|| Error::Structural(format!("site {s} not in vector index")))?;
        v.values[i] = T::one();
        Ok(v)
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, s: Site) -> Option<T> {
        self.sites.position(s).map(|i| self.values[i])
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A band kernel owned by one [`SiteSpace`]. Entries are kept as a list
/// sorted by `(row, column)`; absent entries are zero and no stored entry is
/// zero.
#[derive(Clone, Debug)]
pub struct BandKernel<T> {
    space: Arc<SiteSpace>,
    entries: Vec<(Site, Site, T)>,
    bandwidth: f64,
    sup_bound: f64,
}

impl<T: Scalar> BandKernel<T> {
    /// Validates ownership and the band condition. Duplicate coordinates are
    /// a structural error; zero values are dropped.
    pub fn from_entries(
        space: Arc<SiteSpace>,
        entries: impl IntoIterator<Item = (Site, Site, T)>,
        bandwidth: f64,
    ) -> Result<Self> {
        if bandwidth.is_nan() || bandwidth < 0.0 {
            return Err(Error::Precondition(format!("bandwidth {bandwidth} < 0")));
        }
        let mut list: Vec<(Site, Site, T)> =
            entries.into_iter().filter(|e| !e.2.is_zero()).collect();
        list.sort_unstable_by_key(|e| (e.0, e.1));
        if let Some(w) = list
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::Structural(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        for &(x, y, _) in &list {
            if !space.sites().contains(x) || !space.sites().contains(y) {
                return Err(Error::Structural(format!(
                    "entry ({x}, {y}) outside the space"
                )));
            }
            let d = space.dist(x, y);
            if d > bandwidth {
                return Err(Error::Structural(format!(
                    "entry ({x}, {y}) at distance {d} exceeds bandwidth {bandwidth}"
                )));
            }
        }
        Ok(Self::from_sorted(space, list, bandwidth))
    }

    fn from_sorted(space: Arc<SiteSpace>, entries: Vec<(Site, Site, T)>, bandwidth: f64) -> Self {
        let sup_bound = entries.iter().map(|e| e.2.modulus()).fold(0.0, f64::max);
        BandKernel {
            space,
            entries,
            bandwidth,
            sup_bound,
        }
    }

    /// `f(x, y)` on every pair within `bandwidth`.
    pub fn from_fn(
        space: Arc<SiteSpace>,
        bandwidth: f64,
        f: impl Fn(Site, Site) -> T,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for x in space.sites().iter() {
            for y in space.ball(x, bandwidth) {
                let v = f(x, y);
                if !v.is_zero() {
                    list.push((x, y, v));
                }
            }
        }
        Ok(Self::from_sorted(space, list, bandwidth))
    }

    pub fn zero(space: Arc<SiteSpace>) -> Self {
        Self::from_sorted(space, Vec::new(), 0.0)
    }

    pub fn identity(space: Arc<SiteSpace>) -> Self {
        let list = space.sites().iter().map(|x| (x, x, T::one())).collect();
        Self::from_sorted(space, list, 0.0)
    }

    pub fn space(&self) -> &Arc<SiteSpace> {
        &self.space
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn entries(&self) -> &[(Site, Site, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: Site, y: Site) -> T {
        self.entries
            .binary_search_by_key(&(x, y), |e| (e.0, e.1))
            .map(|i| self.entries[i].2)
            .unwrap_or_else(|_| T::zero())
    }

    /// Stored entries of row `x`.
    pub fn row(&self, x: Site) -> &[(Site, Site, T)] {
        let lo = self.entries.partition_point(|e| e.0 < x);
        let hi = self.entries.partition_point(|e| e.0 <= x);
        &self.entries[lo..hi]
    }

    /// Entrywise equality, ignoring the owning space.
    pub fn same_entries(&self, other: &Self) -> bool {
        self.entries == other.entries
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::Structural(
                "kernels live on different site spaces".into(),
            ))
        }
    }

    /// `(Ku)(x) = Σ_{y ∈ window} K(x,y) u(y)` for `x` in the window.
    pub fn apply(&self, u: &FiniteVector<T>, window: &SiteSet) -> Result<FiniteVector<T>> {
        if !u.sites.same_members(window) {
            return Err(Error::Structural(
                "vector is not indexed by the window".into(),
            ));
        }
        let values = window
            .iter()
            .map(|x| {
                let mut acc = T::zero();
                for &(_, y, k) in self.row(x) {
                    if let Some(j) = window.position(y) {
                        acc += k * u.values[j];
                    }
                }
                acc
            })
            .collect();
        Ok(FiniteVector {
            sites: window.clone(),
            values,
        })
    }

    /// Matrix product `Σ_z K1(x,z) K2(z,y)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut out = Vec::new();
        let mut acc: BTreeMap<Site, T> = BTreeMap::new();
        let mut i = 0;
        while i < self.entries.len() {
            let x = self.entries[i].0;
            acc.clear();
            while i < self.entries.len() && self.entries[i].0 == x {
                let (_, z, a) = self.entries[i];
                for &(_, y, b) in other.row(z) {
                    *acc.entry(y).or_insert_with(T::zero) += a * b;
                }
                i += 1;
            }
            out.extend(
                acc.iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(&y, &v)| (x, y, v)),
            );
        }
        Ok(Self::from_sorted(
            self.space.clone(),
            out,
            self.bandwidth + other.bandwidth,
        ))
    }

    /// `K*(x,y) = conj(K(y,x))`.
    pub fn adjoint(&self) -> Self {
        let mut list: Vec<_> = self
            .entries
            .iter()
            .map(|&(x, y, v)| (y, x, Scalar::conj(&v)))
            .collect();
        list.sort_unstable_by_key(|e| (e.0, e.1));
        Self::from_sorted(self.space.clone(), list, self.bandwidth)
    }

    /// Compression to `M`: keeps entries with both sites in `M`.
    pub fn restrict(&self, m: &SiteSet) -> Self {
        let list = self
            .entries
            .iter()
            .filter(|e| m.contains(e.0) && m.contains(e.1))
            .copied()
            .collect();
        Self::from_sorted(self.space.clone(), list, self.bandwidth)
    }

    fn combine(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_space(other)?;
        let mut map: BTreeMap<(Site, Site), T> = BTreeMap::new();
        for &(x, y, v) in &self.entries {
            map.insert((x, y), f(v, T::zero()));
        }
        for &(x, y, v) in &other.entries {
            let slot = map.entry((x, y)).or_insert_with(|| f(T::zero(), T::zero()));
            *slot = f(self.get(x, y), v);
        }
        let list = map
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((x, y), v)| (x, y, v))
            .collect();
        Ok(Self::from_sorted(
            self.space.clone(),
            list,
            self.bandwidth.max(other.bandwidth),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: T) -> Self {
        let list = self
            .entries
            .iter()
            .map(|&(x, y, v)| (x, y, c * v))
            .filter(|e| !e.2.is_zero())
            .collect();
        Self::from_sorted(self.space.clone(), list, self.bandwidth)
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// Entrywise change of scalar type; entries mapped to zero are dropped.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BandKernel<U> {
        let list = self
            .entries
            .iter()
            .map(|&(x, y, v)| (x, y, f(v)))
            .filter(|e| !e.2.is_zero())
            .collect();
        BandKernel::from_sorted(self.space.clone(), list, self.bandwidth)
    }

    /// Restriction defect `ρ_M(K1 K2) - ρ_M(K1) ρ_M(K2)`.
    pub fn defect(&self, other: &Self, m: &SiteSet) -> Result<Self> {
        let whole = self.compose(other)?.restrict(m);
        let parts = self.restrict(m).compose(&other.restrict(m))?;
        whole.sub(&parts)
    }

    /// The same defect summed directly over middle sites outside `M`:
    /// `Σ_{z ∉ M} K1(x,z) K2(z,y)` for `x, y ∈ M`.
    pub fn defect_direct(&self, other: &Self, m: &SiteSet) -> Result<Self> {
        self.check_space(other)?;
        let mut map: BTreeMap<(Site, Site), T> = BTreeMap::new();
        for &(x, z, a) in &self.entries {
            if !m.contains(x) || m.contains(z) {
                continue;
            }
            for &(_, y, b) in other.row(z) {
                if m.contains(y) {
                    *map.entry((x, y)).or_insert_with(T::zero) += a * b;
                }
            }
        }
        let list = map
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((x, y), v)| (x, y, v))
            .collect();
        Ok(Self::from_sorted(
            self.space.clone(),
            list,
            self.bandwidth + other.bandwidth,
        ))
    }

    /// `(max_x Σ_y |K(x,y)|, max_y Σ_x |K(x,y)|)` over the window.
    pub fn row_col_sums(&self, window: &SiteSet) -> (f64, f64) {
        let mut rows = vec![0.0; window.len()];
        let mut cols = vec![0.0; window.len()];
        for &(x, y, v) in &self.entries {
            if let (Some(i), Some(j)) = (window.position(x), window.position(y)) {
                let a = v.modulus();
                rows[i] += a;
                cols[j] += a;
            }
        }
        let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        (max(rows), max(cols))
    }

    /// Max of the sup row sum and the sup column sum.
    pub fn hahn_norm(&self, window: &SiteSet) -> f64 {
        let (r, c) = self.row_col_sums(window);
        r.max(c)
    }

    /// Schur test bound: geometric mean of the sup row and column sums.
    pub fn schur_bound(&self, window: &SiteSet) -> f64 {
        let (r, c) = self.row_col_sums(window);
        (r * c).sqrt()
    }

    /// `max |K(x,y) - conj(K(y,x))|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(x, y, v)| (v - Scalar::conj(&self.get(y, x))).modulus())
            .fold(0.0, f64::max)
    }

    pub fn validate_self_adjoint(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Interchange text: a `bandwidth r` header, then `x y re im` per entry.
    pub fn to_text(&self) -> String {
        let mut s = format!("bandwidth {:?}\n", self.bandwidth);
        for &(x, y, v) in &self.entries {
            let (re, im) = v.format_parts();
            let _ = writeln!(s, "{x} {y} {re} {im}");
        }
        s
    }

    pub fn from_text(space: Arc<SiteSpace>, text: &str) -> Result<Self> {
        let mut bandwidth = None;
        let mut list = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line: n + 1,
                msg: msg.into(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f[0] == "bandwidth" {
                let r = f.get(1).and_then(|r| r.parse::<f64>().ok());
                bandwidth = Some(r.ok_or_else(|| bad("bad bandwidth header"))?);
                continue;
            }
            if f.len() != 4 {
                return Err(bad("expected `x y re im`"));
            }
            let x = f[0].parse().map_err(|_| bad("bad site"))?;
            let y = f[1].parse().map_err(|_| bad("bad site"))?;
            let v = T::parse_parts(f[2], f[3]).ok_or_else(|| bad("bad value"))?;
            list.push((x, y, v));
        }
        let bandwidth = bandwidth.ok_or(Error::Parse {
            line: 0,
            msg: "missing `bandwidth` header".into(),
        })?;
        Self::from_entries(space, list, bandwidth)
    }
}

impl<T: Scalar> PartialEq for BandKernel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_as(&other.space) && self.entries == other.entries
    }
}
