use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::seq::{Letter, SeqPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One table row: central pattern of radius `p` (`*` matches any letter),
/// hop `k`, value.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolRow<T> {
    pub pattern: String,
    pub hop: i64,
    pub value: T,
}

/// A locally constant symbol `h(x, k)` of finite dependence radius and hop
/// support. For each hop the first matching row wins; no match means zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingSymbol<T> {
    radius: usize,
    rows: Vec<SymbolRow<T>>,
    compiled: Vec<Vec<Option<Letter>>>,
}

impl<T: Scalar> HoppingSymbol<T> {
    pub fn new(radius: usize, rows: Vec<SymbolRow<T>>) -> Result<Self> {
        let width = 2 * radius + 1;
        let mut compiled = Vec::with_capacity(rows.len());
        for r in &rows {
            let pat: Vec<Option<Letter>> =
                r.pattern.chars().map(|c| (c != '*').then_some(c)).collect();
            if pat.len() != width {
                return Err(Error::Config(format!(
                    "pattern {:?} has length {}, expected {width}",
                    r.pattern,
                    pat.len()
                )));
            }
            compiled.push(pat);
        }
        Ok(HoppingSymbol {
            radius,
            rows,
            compiled,
        })
    }

    /// Nearest-neighbour hopping `t` (and `conj t` backwards) plus an on-site
    /// potential read from `x_0`.
    pub fn schrodinger(hop: T, potential: &[(Letter, T)]) -> Self {
        let mut rows: Vec<SymbolRow<T>> = potential
            .iter()
            .map(|&(c, v)| SymbolRow {
                pattern: c.to_string(),
                hop: 0,
                value: v,
            })
            .collect();
        rows.push(SymbolRow {
            pattern: "*".into(),
            hop: 1,
            value: hop,
        });
        rows.push(SymbolRow {
            pattern: "*".into(),
            hop: -1,
            value: hop.conj(),
        });
        Self::new(0, rows).expect("radius-0 patterns")
    }

    /// `h(x, k) = c_k` independent of `x`.
    pub fn toeplitz(coeffs: &[(i64, T)]) -> Self {
        let rows = coeffs
            .iter()
            .map(|&(hop, value)| SymbolRow {
                pattern: "*".into(),
                hop,
                value,
            })
            .collect();
        Self::new(0, rows).expect("radius-0 patterns")
    }

    /// Parses lines `pattern k re im`; blank lines and `#` comments are
    /// skipped. The radius is read off the first pattern.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut radius = None;
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
            if f.len() != 4 {
                return Err(bad("expected `pattern k re im`"));
            }
            let len = f[0].chars().count();
            if len.is_multiple_of(2) {
                return Err(bad("pattern length must be odd"));
            }
            if *radius.get_or_insert(len / 2) != len / 2 {
                return Err(bad("patterns must share one length"));
            }
            let hop = f[1].parse().map_err(|_| bad("bad hop"))?;
            let value = T::parse_parts(f[2], f[3]).ok_or_else(|| bad("bad value"))?;
            rows.push(SymbolRow {
                pattern: f[0].into(),
                hop,
                value,
            });
        }
        Self::new(radius.unwrap_or(0), rows)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let (re, im) = r.value.format_parts();
            let _ = writeln!(out, "{} {} {re} {im}", r.pattern, r.hop);
        }
        out
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn rows(&self) -> &[SymbolRow<T>] {
        &self.rows
    }

    pub fn hop_support(&self) -> BTreeSet<i64> {
        self.rows.iter().map(|r| r.hop).collect()
    }

    pub fn max_hop(&self) -> i64 {
        self.rows.iter().map(|r| r.hop.abs()).max().unwrap_or(0)
    }

    pub fn letters(&self) -> BTreeSet<Letter> {
        self.compiled.iter().flatten().flatten().copied().collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> HoppingSymbol<U> {
        let rows = self
            .rows
            .iter()
            .map(|r| SymbolRow {
                pattern: r.pattern.clone(),
                hop: r.hop,
                value: f(r.value),
            })
            .collect();
        HoppingSymbol::new(self.radius, rows).expect("same patterns")
    }

    pub fn neg(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| SymbolRow {
                value: -r.value,
                ..r.clone()
            })
            .collect();
        HoppingSymbol {
            rows,
            ..self.clone()
        }
    }

    /// `h(x, k)` given the central word `x|_[-p, p]`.
    pub fn value_on(&self, center: &[Letter], k: i64) -> T {
        self.rows
            .iter()
            .zip(&self.compiled)
            .find(|(r, pat)| {
                r.hop == k
                    && pat
                        .iter()
                        .zip(center)
                        .all(|(p, c)| p.is_none_or(|p| p == *c))
            })
            .map_or(T::zero(), |(r, _)| r.value)
    }

    pub fn value(&self, x: &SeqPoint, k: i64) -> T {
        let p = self.radius as i64;
        self.value_on(&x.evaluate(-p, p).0, k)
    }

    /// `h(τ_l(x), k)`, reading `x|_[-p-l, p-l]` directly.
    pub fn value_at_shift(&self, x: &SeqPoint, l: i64, k: i64) -> T {
        let p = self.radius as i64;
        self.value_on(&x.evaluate(-p - l, p - l).0, k)
    }
}
