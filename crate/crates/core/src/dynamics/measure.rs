use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonians::basis_pattern;
use crate::network::{Assignment, BooleanNetwork};

use super::state::SystemState;

/// Joint distribution of all node values, sorted by assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDistribution {
    entries: Vec<(Assignment, f64)>,
}

impl NodeDistribution {
    pub fn entries(&self) -> &[(Assignment, f64)] {
        &self.entries
    }

    pub fn probability(&self, a: &Assignment) -> f64 {
        self.entries.iter().find(|(x, _)| x == a).map_or(0.0, |(_, p)| *p)
    }

    pub fn most_likely(&self) -> Option<&(Assignment, f64)> {
        self.entries.iter().fold(None, |best: Option<&(Assignment, f64)>, e| match best {
            Some(b) if b.1 >= e.1 => Some(b),
            _ => Some(e),
        })
    }

    /// Draws one assignment by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let total: f64 = self.entries.iter().map(|(_, p)| p).sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (a, p) in &self.entries {
            acc += p;
            if u < acc {
                return a.clone();
            }
        }
        self.entries.last().expect("distribution is never empty").0.clone()
    }
}

/// Exact joint distribution of the node observables: the diagonal of the
/// state in the polarization basis summed per node pattern. Idlers are traced out.
pub fn node_distribution(state: &SystemState, net: &BooleanNetwork) -> Result<NodeDistribution> {
    let space = state.space();
    if space.triode_count() != net.triode_count() {
        return Err(Error::Space(format!(
            "state has {} triodes, network has {}",
            space.triode_count(),
            net.triode_count()
        )));
    }
    let mut table: BTreeMap<Assignment, f64> = BTreeMap::new();
    for (i, p) in state.populations().into_iter().enumerate() {
        let (values, _) = basis_pattern(space, net, i);
        *table.entry(Assignment::new(values)).or_insert(0.0) += p.max(0.0);
    }
    let entries: Vec<_> = table.into_iter().filter(|(_, p)| *p > 0.0).collect();
    if entries.is_empty() {
        return Err(Error::State("state has no weight".into()));
    }
    Ok(NodeDistribution { entries })
}

/// A seeded measurement of all nodes together with the exact distribution.
pub fn measure_nodes<R: Rng + ?Sized>(
    state: &SystemState,
    net: &BooleanNetwork,
    rng: &mut R,
) -> Result<(Assignment, NodeDistribution)> {
    let dist = node_distribution(state, net)?;
    Ok((dist.sample(rng), dist))
}
