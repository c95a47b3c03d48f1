//! Triode-wire Boolean networks.
//!
//! A network has `Q = 3T` Boolean nodes (1-based), grouped into `T` triodes
//! that each require exactly two of their three nodes to be 1, and a set of
//! wires that each require their two endpoints to be equal.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of configurations visited by exhaustive search.
pub const DEFAULT_SEARCH_BOUND: u128 = 1 << 24;

/// The three satisfying rows of a triode, `q_x + q_y + q_z = 2`.
pub const TRIODE_ROWS: [[u8; 3]; 3] = [[0, 1, 1], [1, 0, 1], [1, 1, 0]];

/// The four rows of the XOR gate obtained when triodes may also take the
/// all-zero value.
pub const XOR_ROWS: [[u8; 3]; 4] = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: usize,
    triodes: Vec<[usize; 3]>,
    wires: Vec<[usize; 2]>,
}

/// A validated triode-wire network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanNetwork {
    nodes: usize,
    triodes: Vec<[usize; 3]>,
    wires: Vec<(usize, usize)>,
    /// node (0-based) -> (triode index, position within triode)
    owner: Vec<(usize, usize)>,
}

impl BooleanNetwork {
    /// Builds and validates a network. Wire endpoints are normalized to `i < j`.
    pub fn new(nodes: usize, triodes: Vec<[usize; 3]>, wires: Vec<(usize, usize)>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidNetwork("node count must be positive".into()));
        }
        let mut owner = vec![None; nodes];
        for (t, tri) in triodes.iter().enumerate() {
            for (pos, &n) in tri.iter().enumerate() {
                if n == 0 || n > nodes {
                    return Err(Error::InvalidNetwork(format!(
                        "triode {} references node {n} outside [1, {nodes}]",
                        t + 1
                    )));
                }
                if let Some((other, _)) = owner[n - 1] {
                    return Err(Error::InvalidNetwork(format!(
                        "node {n} appears in triodes {} and {}",
                        other + 1,
                        t + 1
                    )));
                }
                owner[n - 1] = Some((t, pos));
            }
        }
        if let Some(free) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidNetwork(format!(
                "node {} belongs to no triode (expected nodes = 3 x triodes)",
                free + 1
            )));
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(wires.len());
        for (i, j) in wires {
            for n in [i, j] {
                if n == 0 || n > nodes {
                    return Err(Error::InvalidNetwork(format!(
                        "wire ({i}, {j}) references node {n} outside [1, {nodes}]"
                    )));
                }
            }
            if i == j {
                return Err(Error::InvalidNetwork(format!("wire ({i}, {j}) is a self-loop")));
            }
            let w = (i.min(j), i.max(j));
            if !seen.insert(w) {
                return Err(Error::InvalidNetwork(format!("duplicate wire ({}, {})", w.0, w.1)));
            }
            normalized.push(w);
        }
        Ok(Self { nodes, triodes, wires: normalized, owner: owner.into_iter().map(Option::unwrap).collect() })
    }

    /// The six-node, two-triode network with the single solution
    /// `q3 = q5 = 0`, all other nodes 1.
    ///
    /// Only the node, wire and triode counts and the solution are known; this
    /// wiring is a reconstruction checked by exhaustive search.
    pub fn six_node_example() -> Self {
        Self::new(6, vec![[1, 2, 3], [4, 5, 6]], vec![(1, 2), (4, 6), (1, 4), (2, 6)])
            .expect("example network is valid")
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn triode_count(&self) -> usize {
        self.triodes.len()
    }

    pub fn wire_count(&self) -> usize {
        self.wires.len()
    }

    pub fn triodes(&self) -> &[[usize; 3]] {
        &self.triodes
    }

    pub fn wires(&self) -> &[(usize, usize)] {
        &self.wires
    }

    /// Returns `(triode index, position)` for a 1-based node.
    pub fn locate(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(1).and_then(|n| self.owner.get(n)).copied()
    }

    /// Non-fatal findings, e.g. wires joining two nodes of one triode.
    pub fn warnings(&self) -> Vec<String> {
        self.wires
            .iter()
            .filter(|(i, j)| self.owner[i - 1].0 == self.owner[j - 1].0)
            .map(|(i, j)| format!("wire ({i}, {j}) joins two nodes of triode {}", self.owner[i - 1].0 + 1))
            .collect()
    }

    /// Parses either the JSON document form or the line-oriented text form.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let file: NetworkFile =
                serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
            Self::new(file.nodes, file.triodes, file.wires.into_iter().map(|[i, j]| (i, j)).collect())
        } else {
            Self::parse_plain(text)
        }
    }

    fn parse_plain(text: &str) -> Result<Self> {
        let mut nodes = None;
        let mut triodes = Vec::new();
        let mut wires = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let keyword = parts.next().unwrap_or_default();
            let args: Vec<usize> = parts
                .map(|p| {
                    p.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("expected a non-negative integer, found `{p}`"),
                    })
                })
                .collect::<Result<_>>()?;
            let arity = |n: usize| -> Result<()> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(Error::Parse {
                        line: line_no,
                        message: format!("`{keyword}` takes {n} argument(s), found {}", args.len()),
                    })
                }
            };
            match keyword {
                "nodes" => {
                    arity(1)?;
                    if nodes.replace(args[0]).is_some() {
                        return Err(Error::Parse { line: line_no, message: "repeated `nodes`".into() });
                    }
                }
                "triode" => {
                    arity(3)?;
                    triodes.push([args[0], args[1], args[2]]);
                }
                "wire" => {
                    arity(2)?;
                    wires.push((args[0], args[1]));
                }
                other => return Err(Error::Parse { line: line_no, message: format!("unknown keyword `{other}`") }),
            }
        }
        let nodes = nodes.ok_or(Error::Parse { line: 0, message: "missing `nodes` line".into() })?;
        Self::new(nodes, triodes, wires)
    }

    /// Canonical JSON document.
    pub fn to_json(&self) -> String {
        let triodes: Vec<String> = self.triodes.iter().map(|[a, b, c]| format!("[{a},{b},{c}]")).collect();
        let wires: Vec<String> = self.wires.iter().map(|(i, j)| format!("[{i},{j}]")).collect();
        format!(
            "{{\"nodes\": {}, \"triodes\": [{}], \"wires\": [{}]}}\n",
            self.nodes,
            triodes.join(", "),
            wires.join(", ")
        )
    }

    /// Line-oriented text form.
    pub fn to_plain(&self) -> String {
        let mut out = format!("nodes {}\n", self.nodes);
        for [a, b, c] in &self.triodes {
            out.push_str(&format!("triode {a} {b} {c}\n"));
        }
        for (i, j) in &self.wires {
            out.push_str(&format!("wire {i} {j}\n"));
        }
        out
    }

    pub fn check_assignment(&self, a: &Assignment) -> Result<CheckReport> {
        if a.len() != self.nodes {
            return Err(Error::AssignmentSize { expected: self.nodes, got: a.len() });
        }
        let frustrated_wires = self.wires.iter().copied().filter(|&(i, j)| a.get(i) != a.get(j)).collect();
        let violated_triodes = self
            .triodes
            .iter()
            .enumerate()
            .filter(|(_, tri)| tri.iter().map(|&n| a.get(n)).sum::<u8>() != 2)
            .map(|(t, _)| t)
            .collect();
        Ok(CheckReport { frustrated_wires, violated_triodes })
    }

    /// All assignments satisfying every triode and wire, in lexicographic order.
    pub fn enumerate_solutions(&self) -> Result<Vec<Assignment>> {
        self.enumerate_with(&TRIODE_ROWS, DEFAULT_SEARCH_BOUND)
    }

    /// All assignments satisfying every wire with triodes relaxed to XOR gates.
    pub fn enumerate_xor_solutions(&self) -> Result<Vec<Assignment>> {
        self.enumerate_with(&XOR_ROWS, DEFAULT_SEARCH_BOUND)
    }

    pub fn enumerate_with(&self, rows: &[[u8; 3]], bound: u128) -> Result<Vec<Assignment>> {
        let t = self.triodes.len();
        let states = (rows.len() as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
        if states > bound {
            return Err(Error::SearchBound { states, bound });
        }
        let mut found = Vec::new();
        let mut choice = vec![0usize; t];
        let mut values = vec![0u8; self.nodes];
        for _ in 0..states {
            for (tri, &c) in self.triodes.iter().zip(&choice) {
                for (pos, &n) in tri.iter().enumerate() {
                    values[n - 1] = rows[c][pos];
                }
            }
            if self.wires.iter().all(|&(i, j)| values[i - 1] == values[j - 1]) {
                found.push(Assignment::new(values.clone()));
            }
            for c in choice.iter_mut() {
                *c += 1;
                if *c < rows.len() {
                    break;
                }
                *c = 0;
            }
        }
        found.sort();
        Ok(found)
    }

    /// A random valid network with `triodes` triodes where each unordered node
    /// pair is wired with probability `wire_probability`. Node labels are
    /// shuffled across triodes.
    pub fn random<R: Rng + ?Sized>(triodes: usize, wire_probability: f64, rng: &mut R) -> Self {
        let nodes = 3 * triodes;
        let mut labels: Vec<usize> = (1..=nodes).collect();
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let tri = labels.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let mut wires = Vec::new();
        for i in 1..=nodes {
            for j in i + 1..=nodes {
                if rng.random_bool(wire_probability) {
                    wires.push((i, j));
                }
            }
        }
        Self::new(nodes, tri, wires).expect("random construction is valid")
    }
}

impl fmt::Display for BooleanNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q={} W={} T={}", self.nodes, self.wires.len(), self.triodes.len())
    }
}

/// Node values indexed by 1-based node number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<u8>);

impl Assignment {
    /// `values[k]` is the value of node `k + 1`; entries must be 0 or 1.
    pub fn new(values: Vec<u8>) -> Self {
        assert!(values.iter().all(|&v| v <= 1), "assignment values must be 0 or 1");
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of a 1-based node.
    pub fn get(&self, node: usize) -> u8 {
        self.0[node - 1]
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub frustrated_wires: Vec<(usize, usize)>,
    /// 0-based triode indices.
    pub violated_triodes: Vec<usize>,
}

impl CheckReport {
    pub fn is_solution(&self) -> bool {
        self.frustrated_wires.is_empty() && self.violated_triodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single() -> BooleanNetwork {
        BooleanNetwork::parse("{\"nodes\": 3, \"triodes\": [[1,2,3]], \"wires\": []}").unwrap()
    }

    #[test]
    fn parses_six_node_example() {
        let text = "{\"nodes\": 6, \"triodes\": [[1,2,3],[4,5,6]], \"wires\": [[1,2],[4,6],[1,4],[2,6]]}";
        let net = BooleanNetwork::parse(text).unwrap();
        assert_eq!((net.node_count(), net.wire_count(), net.triode_count()), (6, 4, 2));
        assert_eq!(net, BooleanNetwork::six_node_example());
    }

    #[test]
    fn rejects_overlapping_triodes() {
        let err = BooleanNetwork::parse("{\"nodes\": 5, \"triodes\": [[1,2,3],[3,4,5]], \"wires\": []}").unwrap_err();
        assert!(err.to_string().contains("node 3 appears in triodes 1 and 2"), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "{\"nodes\": 3, \"triodes\": [[1,2,4]], \"wires\": []}",
            "{\"nodes\": 3, \"triodes\": [[1,2,3]], \"wires\": [[1,2],[2,1]]}",
            "{\"nodes\": 4, \"triodes\": [[1,2,3]], \"wires\": []}",
            "{\"nodes\": 3, \"triodes\": [[1,2,3]], \"wires\": [[1,1]]}",
            "{\"nodes\": 3, \"triodes\": [[1,2,3]]",
            "nodes 3\ntriode 1 2\n",
            "nodes 3\ntriode 1 2 3\nwire 1 x\n",
            "triode 1 2 3\n",
        ] {
            assert!(BooleanNetwork::parse(text).is_err(), "{text}");
        }
        match BooleanNetwork::parse("nodes 3\ntriode 1 2 3\nbogus 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_wire_list_is_valid() {
        let net = single();
        assert_eq!(net.wire_count(), 0);
        assert_eq!(net.triode_count(), 1);
    }

    #[test]
    fn plain_text_form() {
        let net = BooleanNetwork::parse(
            "# example\nnodes 6\ntriode 1 2 3\ntriode 4 5 6\nwire 1 2\nwire 6 4\nwire 1 4\nwire 2 6\n",
        )
        .unwrap();
        assert_eq!(net, BooleanNetwork::six_node_example());
    }

    #[test]
    fn same_triode_wire_is_flagged() {
        let net = BooleanNetwork::new(3, vec![[1, 2, 3]], vec![(1, 3)]).unwrap();
        assert_eq!(net.warnings().len(), 1);
        assert_eq!(BooleanNetwork::six_node_example().warnings().len(), 2);
    }

    #[test]
    fn check_assignment_cases() {
        let net = BooleanNetwork::six_node_example();
        let sol = Assignment::new(vec![1, 1, 0, 1, 0, 1]);
        assert!(net.check_assignment(&sol).unwrap().is_solution());

        let one = single();
        assert!(one.check_assignment(&Assignment::new(vec![0, 1, 1])).unwrap().is_solution());
        let r = one.check_assignment(&Assignment::new(vec![0, 0, 0])).unwrap();
        assert_eq!(r.violated_triodes, vec![0]);
        assert!(r.frustrated_wires.is_empty());

        let r = net.check_assignment(&Assignment::new(vec![0, 1, 1, 1, 0, 1])).unwrap();
        assert_eq!(r.frustrated_wires, vec![(1, 2), (1, 4)]);
        assert!(net.check_assignment(&Assignment::new(vec![0, 1])).is_err());
    }

    #[test]
    fn solution_counts() {
        let net = BooleanNetwork::six_node_example();
        let sols = net.enumerate_solutions().unwrap();
        assert_eq!(sols, vec![Assignment::new(vec![1, 1, 0, 1, 0, 1])]);
        let xor = net.enumerate_xor_solutions().unwrap();
        assert!(xor.contains(&sols[0]));
        assert!(xor.contains(&Assignment::new(vec![0; 6])));

        assert_eq!(single().enumerate_solutions().unwrap().len(), 3);
        assert_eq!(single().enumerate_xor_solutions().unwrap().len(), 4);
        let two = BooleanNetwork::new(6, vec![[1, 2, 3], [4, 5, 6]], vec![]).unwrap();
        assert_eq!(two.enumerate_solutions().unwrap().len(), 9);
    }

    #[test]
    fn solutions_are_lexicographic() {
        let sols = single().enumerate_solutions().unwrap();
        let values: Vec<_> = sols.iter().map(|a| a.values().to_vec()).collect();
        assert_eq!(values, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn search_bound_is_enforced() {
        let net = BooleanNetwork::random(4, 0.1, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(net.enumerate_with(&TRIODE_ROWS, 80), Err(Error::SearchBound { states: 81, .. })));
        assert!(net.enumerate_with(&TRIODE_ROWS, 81).is_ok());
    }

    fn all_assignments(q: usize) -> impl Iterator<Item = Assignment> {
        (0u32..1 << q).map(move |m| Assignment::new((0..q).map(|k| ((m >> k) & 1) as u8).collect()))
    }

    proptest! {
        #[test]
        fn enumeration_matches_checker(seed in any::<u64>(), t in 1usize..=3, p in 0.0f64..0.5) {
            let net = BooleanNetwork::random(t, p, &mut ChaCha8Rng::seed_from_u64(seed));
            let sols = net.enumerate_solutions().unwrap();
            let xor = net.enumerate_xor_solutions().unwrap();
            for s in &sols {
                prop_assert!(xor.contains(s));
            }
            let brute: Vec<_> = all_assignments(net.node_count())
                .filter(|a| net.check_assignment(a).unwrap().is_solution())
                .collect();
            let mut brute_sorted = brute.clone();
            brute_sorted.sort();
            prop_assert_eq!(&sols, &brute_sorted);
        }

        #[test]
        fn serialization_round_trips(seed in any::<u64>(), t in 1usize..=4, p in 0.0f64..0.6) {
            let net = BooleanNetwork::random(t, p, &mut ChaCha8Rng::seed_from_u64(seed));
            let json = net.to_json();
            prop_assert_eq!(&BooleanNetwork::parse(&json).unwrap(), &net);
            prop_assert_eq!(BooleanNetwork::parse(&json).unwrap().to_json(), json);
            prop_assert_eq!(&BooleanNetwork::parse(&net.to_plain()).unwrap(), &net);
        }
    }
}
