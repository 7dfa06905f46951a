use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter of the alphabet.
pub type Letter = char;

/// A finite word; the empty word is printed as `♥`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ≺ other`: `self` occurs as a factor of `other`.
    pub fn is_factor_of(&self, other: &Word) -> bool {
        self.is_empty() || other.0.windows(self.len()).any(|w| w == self.0.as_slice())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("♥");
        }
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word(s.chars().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet(Vec<Letter>);

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let letters: Vec<Letter> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::Config("alphabet is empty".into()));
        }
        let distinct: BTreeSet<_> = letters.iter().collect();
        if distinct.len() != letters.len() {
            return Err(Error::Config("alphabet has repeated letters".into()));
        }
        if letters.contains(&'*') {
            return Err(Error::Config("`*` is reserved as the wildcard".into()));
        }
        Ok(Alphabet(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn contains(&self, c: Letter) -> bool {
        self.0.contains(&c)
    }
}

/// A two-sided sequence `x: ℤ → 𝒜` given by a rule that can be evaluated at
/// any index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqPoint {
    Constant {
        letter: Letter,
    },
    /// `x(k) = word[(k + phase) mod |word|]`.
    Periodic {
        word: String,
        #[serde(default)]
        phase: i64,
    },
    /// `left` for `k < 0`, `right` for `k ≥ 0`.
    Step {
        left: Letter,
        right: Letter,
    },
    /// `mark` iff `|k| = 2^m` with `m ≥ 0` (or `m ≥ 1` when
    /// `m_from_zero` is false), `base` elsewhere.
    PowersOfTwo {
        base: Letter,
        mark: Letter,
        #[serde(default = "yes")]
        m_from_zero: bool,
    },
    /// Finitely many listed letters on a constant background.
    Explicit {
        #[serde(deserialize_with = "index_keys")]
        letters: BTreeMap<i64, Letter>,
        default: Letter,
    },
    /// `τ_by(base)`, i.e. `k ↦ base(k - by)`.
    Shift {
        base: Box<SeqPoint>,
        by: i64,
    },
}

fn yes() -> bool {
    true
}

// Tagged enums buffer their content, so JSON object keys arrive as strings.
fn index_keys<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<i64, Letter>, D::Error> {
    let raw = BTreeMap::<String, Letter>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, c)| {
            k.trim()
                .parse()
                .map(|k| (k, c))
                .map_err(|_| serde::de::Error::custom(format!("index {k:?} is not an integer")))
        })
        .collect()
}

impl SeqPoint {
    pub fn constant(letter: Letter) -> Self {
        SeqPoint::Constant { letter }
    }

    pub fn periodic(word: &str, phase: i64) -> Self {
        SeqPoint::Periodic {
            word: word.into(),
            phase,
        }
    }

    pub fn step(left: Letter, right: Letter) -> Self {
        SeqPoint::Step { left, right }
    }

    pub fn powers_of_two(base: Letter, mark: Letter, m_from_zero: bool) -> Self {
        SeqPoint::PowersOfTwo {
            base,
            mark,
            m_from_zero,
        }
    }

    /// `default` everywhere except `mark` at index `at`.
    pub fn single(default: Letter, mark: Letter, at: i64) -> Self {
        SeqPoint::Explicit {
            letters: [(at, mark)].into(),
            default,
        }
    }

    /// `τ_by(self)`; nested shifts are merged.
    pub fn shifted(&self, by: i64) -> Self {
        match self {
            SeqPoint::Shift { base, by: b } => SeqPoint::Shift {
                base: base.clone(),
                by: b + by,
            },
            other => SeqPoint::Shift {
                base: Box::new(other.clone()),
                by,
            },
        }
    }

    /// The shift amount relative to the unshifted rule.
    pub fn shift_amount(&self) -> i64 {
        match self {
            SeqPoint::Shift { by, .. } => *by,
            _ => 0,
        }
    }

    pub fn at(&self, k: i64) -> Letter {
        match self {
            SeqPoint::Constant { letter } => *letter,
            SeqPoint::Periodic { word, phase } => {
                let w: Vec<Letter> = word.chars().collect();
                w[(k + phase).rem_euclid(w.len() as i64) as usize]
            }
            SeqPoint::Step { left, right } => {
                if k < 0 {
                    *left
                } else {
                    *right
                }
            }
            SeqPoint::PowersOfTwo {
                base,
                mark,
                m_from_zero,
            } => {
                let a = k.unsigned_abs();
                let hit = a.is_power_of_two() && (*m_from_zero || a >= 2);
                if hit {
                    *mark
                } else {
                    *base
                }
            }
            SeqPoint::Explicit { letters, default } => *letters.get(&k).unwrap_or(default),
            SeqPoint::Shift { base, by } => base.at(k - by),
        }
    }

    /// `x|_[i, j]`.
    pub fn evaluate(&self, i: i64, j: i64) -> Word {
        Word((i..=j).map(|k| self.at(k)).collect())
    }

    /// Least period of a τ-periodic rule; `None` when the rule is not
    /// periodic by construction.
    pub fn period(&self) -> Option<usize> {
        match self {
            SeqPoint::Constant { .. } => Some(1),
            SeqPoint::Periodic { word, .. } => {
                let w: Vec<Letter> = word.chars().collect();
                (1..=w.len())
                    .find(|&p| w.len().is_multiple_of(p) && (p..w.len()).all(|i| w[i] == w[i - p]))
            }
            SeqPoint::Explicit { letters, default } => {
                letters.values().all(|c| c == default).then_some(1)
            }
            SeqPoint::Shift { base, .. } => base.period(),
            _ => None,
        }
    }

    /// Letters the rule can produce.
    pub fn letters(&self) -> BTreeSet<Letter> {
        match self {
            SeqPoint::Constant { letter } => [*letter].into(),
            SeqPoint::Periodic { word, .. } => word.chars().collect(),
            SeqPoint::Step { left, right } => [*left, *right].into(),
            SeqPoint::PowersOfTwo { base, mark, .. } => [*base, *mark].into(),
            SeqPoint::Explicit { letters, default } => {
                letters.values().copied().chain([*default]).collect()
            }
            SeqPoint::Shift { base, .. } => base.letters(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            SeqPoint::Periodic { word, .. } if word.is_empty() => {
                Err(Error::Config("periodic rule needs a nonempty word".into()))
            }
            SeqPoint::Shift { base, .. } => base.validate(),
            _ => Ok(()),
        }
    }
}

/// All words of length `≤ max_len` occurring in `x|_[-window, window]`,
/// including the empty word.
pub fn dictionary(x: &SeqPoint, max_len: usize, window: i64) -> Result<BTreeSet<Word>> {
    if window < 0 || max_len as i64 > 2 * window + 1 {
        return Err(Error::Range(format!(
            "words of length {max_len} do not fit the window [-{window}, {window}]"
        )));
    }
    let text = x.evaluate(-window, window).0;
    let mut out = BTreeSet::from([Word::empty()]);
    for len in 1..=max_len {
        out.extend(text.windows(len).map(|w| Word(w.to_vec())));
    }
    Ok(out)
}

/// A value of the subshift metric `d(x,y) = 1 / (1 + min{|k| : x_k ≠ y_k})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    /// False when the sequences agree on the whole inspected window and
    /// `value` is only an upper bound.
    pub exact: bool,
}

pub fn subshift_metric(x: &SeqPoint, y: &SeqPoint, window: i64) -> MetricValue {
    if x == y {
        return MetricValue {
            value: 0.0,
            exact: true,
        };
    }
    for r in 0..=window.max(0) {
        if x.at(r) != y.at(r) || x.at(-r) != y.at(-r) {
            return MetricValue {
                value: 1.0 / (1.0 + r as f64),
                exact: true,
            };
        }
    }
    MetricValue {
        value: 1.0 / (window.max(0) as f64 + 2.0),
        exact: false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Periodicity {
    /// `z(k + period) = z(k)` on the whole inspected window.
    Periodic {
        period: usize,
    },
    /// Every period up to `checked_up_to` fails; `witnesses[p-1]` is an
    /// index `k` with `z(k + p) ≠ z(k)`.
    NonPeriodic {
        checked_up_to: usize,
        witnesses: Vec<i64>,
    },
    Inconclusive,
}

/// Window evidence for admissibility of a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub window: i64,
    pub periodicity: Periodicity,
    /// Smallest `q ≤ window / 2` such that `z|_[-q, q-1]` occurs in
    /// `z|_[-window, window]` only at position 0.
    pub isolation_radius: Option<usize>,
}

impl ProbeReport {
    /// Non-periodic on the window and isolated by some central cylinder.
    pub fn passes(&self) -> bool {
        matches!(self.periodicity, Periodicity::NonPeriodic { .. })
            && self.isolation_radius.is_some()
    }
}

pub fn admissibility_probe(z: &SeqPoint, window: i64) -> ProbeReport {
    let w = window.max(0);
    let text = z.evaluate(-w, w).0;
    let at = |k: i64| text[(k + w) as usize];
    let periodicity = if w == 0 {
        Periodicity::Inconclusive
    } else {
        let mut witnesses = Vec::new();
        let mut found = None;
        for p in 1..=w {
            match (-w..=w - p).find(|&k| at(k + p) != at(k)) {
                Some(k) => witnesses.push(k),
                None => {
                    found = Some(p as usize);
                    break;
                }
            }
        }
        match found {
            Some(period) => Periodicity::Periodic { period },
            None => Periodicity::NonPeriodic {
                checked_up_to: w as usize,
                witnesses,
            },
        }
    };
    let isolation_radius = (1..=w / 2).find_map(|q| {
        let pattern = &text[(w - q) as usize..(w + q) as usize];
        let unique = (-w + q..=w - q + 1)
            .filter(|&p| p != 0)
            .all(|p| &text[(p - q + w) as usize..(p + q + w) as usize] != pattern);
        unique.then_some(q as usize)
    });
    ProbeReport {
        window: w,
        periodicity,
        isolation_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            SeqPoint::periodic("ab", 0).evaluate(0, 3).to_string(),
            "abab"
        );
        assert_eq!(SeqPoint::step('a', 'b').evaluate(-2, 1).to_string(), "aabb");
        assert_eq!(
            SeqPoint::powers_of_two('a', 'b', true)
                .evaluate(0, 5)
                .to_string(),
            "abbaba"
        );
        assert_eq!(
            SeqPoint::powers_of_two('a', 'b', false)
                .evaluate(0, 5)
                .to_string(),
            "aababa"
        );
        assert_eq!(
            SeqPoint::powers_of_two('a', 'b', true)
                .evaluate(-4, -1)
                .to_string(),
            "babb"
        );
        assert_eq!(
            SeqPoint::single('a', 'b', 0).evaluate(-2, 2).to_string(),
            "aabaa"
        );
    }

    #[test]
    fn shift_convention() {
        // τ_k(x) = x(· - k)
        let z = SeqPoint::step('a', 'b');
        let y = z.shifted(3);
        assert_eq!(y.at(2), 'a');
        assert_eq!(y.at(3), 'b');
        assert_eq!(y.shifted(-3).at(-1), 'a');
        assert_eq!(y.shifted(-3).shift_amount(), 0);
        assert_eq!(SeqPoint::periodic("abc", 1).shifted(1).at(0), 'a');
    }

    #[test]
    fn dictionary_examples() {
        let d = dictionary(&SeqPoint::constant('a'), 2, 3).unwrap();
        let expect: BTreeSet<Word> = ["", "a", "aa"].into_iter().map(Word::from).collect();
        assert_eq!(d, expect);

        let d = dictionary(&SeqPoint::step('a', 'b'), 2, 5).unwrap();
        let expect: BTreeSet<Word> = ["", "a", "b", "aa", "ab", "bb"]
            .into_iter()
            .map(Word::from)
            .collect();
        assert_eq!(d, expect);
        assert!(dictionary(&SeqPoint::step('a', 'b'), 12, 5).is_err());
    }

    #[test]
    fn dictionary_grows_with_window_and_length() {
        let z = SeqPoint::powers_of_two('a', 'b', true);
        for w in [4, 8, 16] {
            for len in [2, 4, 6] {
                let small = dictionary(&z, len, w).unwrap();
                assert!(small.is_subset(&dictionary(&z, len, 2 * w).unwrap()));
                assert!(small.is_subset(&dictionary(&z, len + 1, w).unwrap()));
            }
        }
    }

    #[test]
    fn metric_examples() {
        let z = SeqPoint::step('a', 'b');
        assert_eq!(subshift_metric(&z, &z, 10).value, 0.0);
        let m = subshift_metric(&z, &SeqPoint::constant('a'), 10);
        assert_eq!((m.value, m.exact), (1.0, true));
        let m = subshift_metric(&SeqPoint::constant('b'), &z, 10);
        assert_eq!(m.value, 1.0 / 2.0);
        // agreement on the window is only an upper bound
        let far = SeqPoint::single('a', 'b', 50);
        let m = subshift_metric(&SeqPoint::constant('a'), &far, 10);
        assert_eq!((m.value, m.exact), (1.0 / 12.0, false));
        let m = subshift_metric(&SeqPoint::constant('a'), &far, 60);
        assert_eq!((m.value, m.exact), (1.0 / 51.0, true));
    }

    #[test]
    fn probe_examples() {
        let r = admissibility_probe(&SeqPoint::step('a', 'b'), 20);
        assert!(matches!(r.periodicity, Periodicity::NonPeriodic { .. }));
        assert_eq!(r.isolation_radius, Some(1));
        assert!(r.passes());

        let r = admissibility_probe(&SeqPoint::constant('a'), 20);
        assert_eq!(r.periodicity, Periodicity::Periodic { period: 1 });
        assert!(!r.passes());

        let r = admissibility_probe(&SeqPoint::periodic("ab", 0), 20);
        assert_eq!(r.periodicity, Periodicity::Periodic { period: 2 });
        assert_eq!(r.isolation_radius, None);

        let r = admissibility_probe(&SeqPoint::powers_of_two('a', 'b', true), 64);
        assert!(r.passes());
        assert_eq!(r.isolation_radius, Some(3));
    }

    #[test]
    fn periods() {
        assert_eq!(SeqPoint::periodic("abab", 0).period(), Some(2));
        assert_eq!(SeqPoint::periodic("aab", 2).shifted(4).period(), Some(3));
        assert_eq!(SeqPoint::step('a', 'b').period(), None);
        assert_eq!(SeqPoint::single('a', 'b', 0).period(), None);
    }

    #[test]
    fn factor_relation() {
        assert!(Word::from("ab").is_factor_of(&Word::from("aabb")));
        assert!(!Word::from("ba").is_factor_of(&Word::from("aabb")));
        assert!(Word::empty().is_factor_of(&Word::empty()));
    }

    #[test]
    fn json_round_trip() {
        let xs = [
            SeqPoint::single('a', 'b', -3),
            SeqPoint::powers_of_two('a', 'b', false).shifted(2),
            SeqPoint::periodic("abc", 1),
        ];
        for x in xs {
            let text = serde_json::to_string(&x).unwrap();
            assert_eq!(serde_json::from_str::<SeqPoint>(&text).unwrap(), x);
        }
        let e = serde_json::from_str::<SeqPoint>(
            r#"{"kind": "explicit", "letters": {"x": "b"}, "default": "a"}"#,
        );
        assert!(e.is_err());
    }
}
