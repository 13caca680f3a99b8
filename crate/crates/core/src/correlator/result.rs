use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::PPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// `iΔ_F`
    #[serde(rename = "DF")]
    ScalarFeynman,
    /// `iS_F`
    #[serde(rename = "SF")]
    FermionFeynman,
    /// `δ_{kl}` between mode labels
    #[serde(rename = "delta")]
    Kronecker,
}

impl KernelKind {
    pub fn is_feynman(self) -> bool {
        !matches!(self, KernelKind::Kronecker)
    }
}

/// First-appearance rank of each point or mode label in a product; drives the
/// canonical orientation and ordering of kernel factors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelOrder {
    rank: BTreeMap<String, usize>,
}

impl LabelOrder {
    pub fn new<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut rank = BTreeMap::new();
        for label in labels {
            let next = rank.len();
            rank.entry(label.to_string()).or_insert(next);
        }
        LabelOrder { rank }
    }

    pub fn rank(&self, label: &str) -> usize {
        self.rank.get(label).copied().unwrap_or(usize::MAX)
    }
}

/// A propagator unit with ordered point arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub args: [String; 2],
}

impl Kernel {
    /// `iΔ_F(a − b)` written with the later string position first.
    pub fn scalar(x: &str, y: &str, order: &LabelOrder) -> Self {
        let (a, b) = if order.rank(x) >= order.rank(y) {
            (x, y)
        } else {
            (y, x)
        };
        Kernel {
            kind: KernelKind::ScalarFeynman,
            args: [a.to_string(), b.to_string()],
        }
    }

    /// `iS_F(x − y)` with `x` the psi point and `y` the psibar point.
    pub fn fermion(psi: &str, psibar: &str) -> Self {
        Kernel {
            kind: KernelKind::FermionFeynman,
            args: [psi.to_string(), psibar.to_string()],
        }
    }

    /// `δ_{kl}`. Returns `None` when both labels are distinct integers (the
    /// delta vanishes) and `Some(None)` when the labels coincide.
    pub fn kronecker(k: &str, l: &str, order: &LabelOrder) -> Option<Option<Self>> {
        if k == l {
            return Some(None);
        }
        if let (Ok(a), Ok(b)) = (k.parse::<u64>(), l.parse::<u64>()) {
            return if a == b { Some(None) } else { None };
        }
        let (a, b) = if (order.rank(k), k) <= (order.rank(l), l) {
            (k, l)
        } else {
            (l, k)
        };
        Some(Some(Kernel {
            kind: KernelKind::Kronecker,
            args: [a.to_string(), b.to_string()],
        }))
    }

    fn sort_key(&self, order: &LabelOrder) -> (usize, usize, KernelKind, [String; 2]) {
        let (ra, rb) = (order.rank(&self.args[0]), order.rank(&self.args[1]));
        (ra.min(rb), ra.max(rb), self.kind, self.args.clone())
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = &self.args;
        match self.kind {
            KernelKind::ScalarFeynman => write!(f, "iDF({a}-{b})"),
            KernelKind::FermionFeynman => write!(f, "iSF({a}-{b})"),
            KernelKind::Kronecker => write!(f, "delta({a},{b})"),
        }
    }
}

/// `coefficient · i^i_power · Π factors`. Each Feynman factor prints with its
/// own unit of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: PPoly,
    pub i_power: u8,
    pub factors: Vec<Kernel>,
}

impl Term {
    pub fn new(coefficient: PPoly, i_power: u8, factors: Vec<Kernel>) -> Self {
        Term {
            coefficient,
            i_power: i_power % 4,
            factors,
        }
    }

    /// Powers of `i` not already carried by the `iDF`/`iSF` factors.
    pub fn extra_i_power(&self) -> u8 {
        let carried = self.factors.iter().filter(|k| k.kind.is_feynman()).count();
        ((self.i_power as usize + 4 - carried % 4) % 4) as u8
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let extra = self.extra_i_power();
        let coefficient = if extra >= 2 {
            -&self.coefficient
        } else {
            self.coefficient.clone()
        };
        let mut parts: Vec<String> = Vec::new();
        if extra % 2 == 1 {
            parts.push("i".into());
        }
        parts.extend(self.factors.iter().map(Kernel::to_string));
        if parts.is_empty() {
            return write!(f, "{coefficient}");
        }
        let rest = parts.join(" * ");
        if coefficient.is_one() {
            write!(f, "{rest}")
        } else if (-&coefficient).is_one() {
            write!(f, "-{rest}")
        } else if coefficient.monomial_count() == 1 {
            write!(f, "{coefficient} * {rest}")
        } else {
            write!(f, "({coefficient}) * {rest}")
        }
    }
}

/// Sum of terms in canonical form: factors oriented and ordered by label
/// rank, like terms merged, zero terms dropped, terms sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrelatorResult {
    terms: Vec<Term>,
}

impl CorrelatorResult {
    pub fn zero() -> Self {
        CorrelatorResult { terms: Vec::new() }
    }

    pub fn unit() -> Self {
        CorrelatorResult {
            terms: vec![Term::new(PPoly::one(), 0, Vec::new())],
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>, order: &LabelOrder) -> Self {
        type Key = (Vec<(usize, usize, KernelKind, [String; 2])>, u8);
        let mut merged: BTreeMap<Key, PPoly> = BTreeMap::new();
        for mut t in terms {
            t.factors.sort_by_cached_key(|k| k.sort_key(order));
            let key = (
                t.factors.iter().map(|k| k.sort_key(order)).collect(),
                t.i_power % 4,
            );
            *merged.entry(key).or_default() += &t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((keys, i_power), coefficient)| Term {
                coefficient,
                i_power,
                factors: keys
                    .into_iter()
                    .map(|(_, _, kind, args)| Kernel { kind, args })
                    .collect(),
            })
            .collect();
        CorrelatorResult { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Finds the coefficient of the term whose factor multiset is `factors`.
    pub fn coefficient_of(&self, factors: &[Kernel]) -> Option<&PPoly> {
        let mut want = factors.to_vec();
        want.sort();
        self.terms.iter().find_map(|t| {
            let mut have = t.factors.clone();
            have.sort();
            (have == want).then_some(&t.coefficient)
        })
    }
}

impl fmt::Display for CorrelatorResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            match (n, s.strip_prefix('-')) {
                (0, _) => f.write_str(&s)?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {s}")?,
            }
        }
        Ok(())
    }
}
