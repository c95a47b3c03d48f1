//! Labeled tensor-product spaces.
//!
//! Factor 0 is the most significant index of the flattened basis.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total dimension accepted for dense operators.
pub const MAX_DIMENSION: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// A triode restricted to its spin-1 sector. Basis `|x>, |y>, |z>`:
    /// index `k` is the polarization state whose node `k` reads 0.
    Triplet,
    /// A triode as two spin-1/2 particles. Basis `|x>, |y>, |z>, |singlet>`.
    Pair,
    /// An auxiliary spin-1/2, basis `|up>, |down>`.
    Idler,
}

impl FactorKind {
    pub fn dim(self) -> usize {
        match self {
            FactorKind::Triplet => 3,
            FactorKind::Pair => 4,
            FactorKind::Idler => 2,
        }
    }

    pub fn is_triode(self) -> bool {
        !matches!(self, FactorKind::Idler)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub kind: FactorKind,
}

impl Factor {
    pub fn new(name: impl Into<String>, kind: FactorKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Spin1Triode,
    Spin1TriodeWithIdlers,
    PairHalf,
    PairHalfWithIdlers,
}

impl Representation {
    pub fn has_pairs(self) -> bool {
        matches!(self, Representation::PairHalf | Representation::PairHalfWithIdlers)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Spin1Triode => "spin1",
            Representation::Spin1TriodeWithIdlers => "spin1+idlers",
            Representation::PairHalf => "pair",
            Representation::PairHalfWithIdlers => "pair+idlers",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLabel {
    factors: Vec<Factor>,
}

impl SpaceLabel {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Space("a space needs at least one factor".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Space(format!("duplicate factor name `{}`", f.name)));
            }
        }
        let triode_kinds: Vec<_> = factors.iter().map(|f| f.kind).filter(|k| k.is_triode()).collect();
        if triode_kinds.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Space("triode factors mix triplet and pair forms".into()));
        }
        Ok(Self { factors })
    }

    /// `t` triodes in the spin-1 form, factors `t1..tT`.
    pub fn spin1(t: usize) -> Self {
        Self::triodes(t, FactorKind::Triplet, &[])
    }

    /// `t` triodes as spin-1/2 pairs.
    pub fn pair(t: usize) -> Self {
        Self::triodes(t, FactorKind::Pair, &[])
    }

    pub fn pair_with_idlers(t: usize, idlers: &[&str]) -> Self {
        Self::triodes(t, FactorKind::Pair, idlers)
    }

    pub fn spin1_with_idlers(t: usize, idlers: &[&str]) -> Self {
        Self::triodes(t, FactorKind::Triplet, idlers)
    }

    /// Space for a single representation tag over `t` triodes; idler-carrying
    /// tags get one idler per node.
    pub fn for_representation(rep: Representation, t: usize) -> Self {
        let names: Vec<String> = (1..=3 * t).map(|n| format!("i{n}")).collect();
        let idlers: Vec<&str> = names.iter().map(String::as_str).collect();
        match rep {
            Representation::Spin1Triode => Self::spin1(t),
            Representation::PairHalf => Self::pair(t),
            Representation::Spin1TriodeWithIdlers => Self::spin1_with_idlers(t, &idlers),
            Representation::PairHalfWithIdlers => Self::pair_with_idlers(t, &idlers),
        }
    }

    fn triodes(t: usize, kind: FactorKind, idlers: &[&str]) -> Self {
        let factors = (1..=t)
            .map(|k| Factor::new(format!("t{k}"), kind))
            .chain(idlers.iter().map(|n| Factor::new(*n, FactorKind::Idler)))
            .collect();
        Self::new(factors).expect("generated names are unique")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.kind.dim()).product()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.kind.dim()).collect()
    }

    pub fn representation(&self) -> Representation {
        let idlers = self.factors.iter().any(|f| f.kind == FactorKind::Idler);
        let pairs = self.factors.iter().any(|f| f.kind == FactorKind::Pair);
        match (pairs, idlers) {
            (false, false) => Representation::Spin1Triode,
            (false, true) => Representation::Spin1TriodeWithIdlers,
            (true, false) => Representation::PairHalf,
            (true, true) => Representation::PairHalfWithIdlers,
        }
    }

    pub fn triode_count(&self) -> usize {
        self.factors.iter().filter(|f| f.kind.is_triode()).count()
    }

    /// Factor position of the `tau`-th triode (0-based).
    pub fn triode_factor(&self, tau: usize) -> Result<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind.is_triode())
            .nth(tau)
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Space(format!("space has no triode {}", tau + 1)))
    }

    pub fn factor_by_name(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::Space(format!("no factor named `{name}`")))
    }

    /// Local indices of a flat basis index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            let d = f.kind.dim();
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn encode(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.factors).fold(0, |acc, (&l, f)| acc * f.kind.dim() + l)
    }

    /// Same factors with every pair replaced by its triplet sector.
    pub fn triplet_form(&self) -> Self {
        self.map_triodes(FactorKind::Triplet)
    }

    /// Same factors with every triplet widened to a full pair.
    pub fn pair_form(&self) -> Self {
        self.map_triodes(FactorKind::Pair)
    }

    fn map_triodes(&self, kind: FactorKind) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .map(|f| Factor { name: f.name.clone(), kind: if f.kind.is_triode() { kind } else { f.kind } })
                .collect(),
        }
    }

    pub fn ensure_bounded(&self) -> Result<()> {
        let dim = self.dim();
        if dim > MAX_DIMENSION {
            Err(Error::DimensionBound { dim, bound: MAX_DIMENSION })
        } else {
            Ok(())
        }
    }

    /// One-line header used by the flat exports.
    pub fn header(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| format!("{}:{}", f.name, f.kind.dim())).collect();
        format!("# space {} dim={} factors={}", self.representation(), self.dim(), parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_tags() {
        assert_eq!(SpaceLabel::spin1(2).dim(), 9);
        assert_eq!(SpaceLabel::pair(5).dim(), 1024);
        let s = SpaceLabel::pair_with_idlers(1, &["a", "b"]);
        assert_eq!(s.dim(), 16);
        assert_eq!(s.representation(), Representation::PairHalfWithIdlers);
        assert_eq!(s.triplet_form().dim(), 12);
        assert!(SpaceLabel::pair(6).ensure_bounded().is_err());
    }

    #[test]
    fn encode_decode() {
        let s = SpaceLabel::pair_with_idlers(2, &["a"]);
        for i in 0..s.dim() {
            assert_eq!(s.encode(&s.decode(i)), i);
        }
        assert_eq!(s.decode(1), vec![0, 0, 1]);
        assert_eq!(s.decode(8), vec![1, 0, 0]);
    }

    #[test]
    fn rejects_bad_factor_sets() {
        assert!(SpaceLabel::new(vec![]).is_err());
        assert!(
            SpaceLabel::new(vec![Factor::new("a", FactorKind::Idler), Factor::new("a", FactorKind::Idler)]).is_err()
        );
        assert!(
            SpaceLabel::new(vec![Factor::new("a", FactorKind::Pair), Factor::new("b", FactorKind::Triplet)]).is_err()
        );
    }
}
