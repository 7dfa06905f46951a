use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::seq::{admissibility_probe, dictionary, Alphabet, ProbeReport, SeqPoint, Word};
use crate::error::{Error, Result};
use crate::kernel::SiteSet;

/// How far the constructor looks when validating a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelCheck {
    /// Half-width of the window inspected in the generator.
    pub window: i64,
    /// Longest word compared in the dictionary inclusion test.
    pub max_len: usize,
}

impl Default for ModelCheck {
    fn default() -> Self {
        ModelCheck {
            window: 256,
            max_len: 8,
        }
    }
}

/// Orbit closure `X` of an admissible generator `z`, with `X_∞` given by a
/// finite list of orbit representatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubshiftModel {
    alphabet: Alphabet,
    generator: SeqPoint,
    limit_generators: Vec<SeqPoint>,
    /// Extra room around the central word when collecting limit patterns.
    search_radius: i64,
    probe: ProbeReport,
}

impl SubshiftModel {
    pub fn new(
        alphabet: Alphabet,
        generator: SeqPoint,
        limit_generators: Vec<SeqPoint>,
        check: &ModelCheck,
    ) -> Result<Self> {
        for (name, x) in std::iter::once(("generator", &generator))
            .chain(limit_generators.iter().map(|g| ("limit generator", g)))
        {
            x.validate()?;
            if let Some(c) = x.letters().into_iter().find(|&c| !alphabet.contains(c)) {
                return Err(Error::Config(format!(
                    "{name} uses letter {c:?} outside the alphabet"
                )));
            }
        }
        let probe = admissibility_probe(&generator, check.window);
        if !probe.passes() {
            return Err(Error::Precondition(format!(
                "generator fails the admissibility probe on [-{w}, {w}]: {:?}, isolation radius {:?}",
                probe.periodicity,
                probe.isolation_radius,
                w = check.window
            )));
        }
        let dz = dictionary(&generator, check.max_len, check.window)?;
        for (n, g) in limit_generators.iter().enumerate() {
            let dg = dictionary(g, check.max_len, check.window)?;
            if let Some(w) = dg.difference(&dz).next() {
                return Err(Error::Precondition(format!(
                    "word {w} of limit generator {n} does not occur in the generator"
                )));
            }
        }
        Ok(SubshiftModel {
            alphabet,
            generator,
            limit_generators,
            search_radius: 64,
            probe,
        })
    }

    pub fn with_search_radius(mut self, r: i64) -> Self {
        self.search_radius = r.max(0);
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn generator(&self) -> &SeqPoint {
        &self.generator
    }

    pub fn limit_generators(&self) -> &[SeqPoint] {
        &self.limit_generators
    }

    pub fn probe(&self) -> &ProbeReport {
        &self.probe
    }

    /// Union of the dictionaries of the generator and the limit generators.
    pub fn dictionary(&self, max_len: usize, window: i64) -> Result<BTreeSet<Word>> {
        let mut out = dictionary(&self.generator, max_len, window)?;
        for g in &self.limit_generators {
            out.extend(dictionary(g, max_len, window)?);
        }
        Ok(out)
    }

    /// `M_i = {y : y_k = x_k for |k| < i, some x ∈ X_∞}`.
    pub fn fell_shell(&self, i: usize) -> Result<Shell> {
        if i == 0 {
            return Err(Error::Precondition("shell index must be at least 1".into()));
        }
        let len = 2 * i - 1;
        let reach = self.search_radius + i as i64;
        let mut words = BTreeSet::new();
        for g in &self.limit_generators {
            let text = g.evaluate(-reach, reach).0;
            words.extend(text.windows(len).map(|w| Word(w.to_vec())));
        }
        Ok(Shell::Fell { index: i, words })
    }
}

/// The whole space `X` or a Fell shell `M_i`, decided by the central word of
/// radius `i - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shell {
    Full,
    Fell { index: usize, words: BTreeSet<Word> },
}

impl Shell {
    /// Index margin needed by the membership test.
    pub fn radius(&self) -> i64 {
        match self {
            Shell::Full => 0,
            Shell::Fell { index, .. } => *index as i64,
        }
    }

    pub fn contains(&self, y: &SeqPoint) -> bool {
        match self {
            Shell::Full => true,
            Shell::Fell { index, words } => {
                let r = *index as i64 - 1;
                words.contains(&y.evaluate(-r, r))
            }
        }
    }

    /// `τ_l(x) ∈ N`, read directly off `x|_[-r-l, r-l]`.
    pub fn contains_shift(&self, x: &SeqPoint, l: i64) -> bool {
        match self {
            Shell::Full => true,
            Shell::Fell { index, words } => {
                let r = *index as i64 - 1;
                words.contains(&x.evaluate(-r - l, r - l))
            }
        }
    }
}

/// `ℤ_x(N) = {k : τ_k(x) ∈ N}` truncated to `[-window + i, window - i]`.
pub fn trace_set(x: &SeqPoint, shell: &Shell, window: i64) -> Result<SiteSet> {
    let i = shell.radius();
    if window < i {
        return Err(Error::Range(format!(
            "window {window} is smaller than the shell radius {i}"
        )));
    }
    Ok(SiteSet::new(
        (-window + i..=window - i).filter(|&k| shell.contains_shift(x, k)),
    ))
}
