//! Network Hamiltonians and bath couplings.

use serde::{Deserialize, Serialize};

use crate::bath::BathFieldSample;
use crate::error::{Error, Result};
use crate::network::BooleanNetwork;
use crate::operator::{lift, CMatrix, HermitianOperator, C64};
use crate::space::{Factor, FactorKind, SpaceLabel};
use crate::spin;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    /// Energy of one frustrated wire.
    pub g: f64,
    /// Strength of the node-count modifier.
    pub g_prime: f64,
    /// Singlet penalty in the two-spin-1/2 form.
    pub ferro_penalty: f64,
}

impl CouplingConstants {
    pub fn new(g: f64, g_prime: f64, ferro_penalty: f64) -> Result<Self> {
        let c = Self { g, g_prime, ferro_penalty };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::Parameter(format!("g must be positive, got {}", self.g)));
        }
        if !(self.g_prime >= 0.0 && self.ferro_penalty >= 0.0) {
            return Err(Error::Parameter("g_prime and the ferro penalty must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for CouplingConstants {
    fn default() -> Self {
        Self { g: 1.0, g_prime: 0.0, ferro_penalty: 0.0 }
    }
}

fn check_cover(net: &BooleanNetwork, space: &SpaceLabel) -> Result<()> {
    if space.triode_count() != net.triode_count() {
        return Err(Error::Space(format!(
            "network has {} triodes, space has {}",
            net.triode_count(),
            space.triode_count()
        )));
    }
    Ok(())
}

/// Node values of a polarization basis state, plus which triodes sit in
/// their singlet. Idler factors are ignored.
pub fn basis_pattern(space: &SpaceLabel, net: &BooleanNetwork, index: usize) -> (Vec<u8>, Vec<bool>) {
    let local = space.decode(index);
    let mut values = vec![0u8; net.node_count()];
    let mut singlets = vec![false; net.triode_count()];
    for (tau, tri) in net.triodes().iter().enumerate() {
        let at = space.triode_factor(tau).expect("space covers the network");
        let kind = space.factors()[at].kind;
        singlets[tau] = kind == FactorKind::Pair && local[at] == 3;
        for (pos, &n) in tri.iter().enumerate() {
            values[n - 1] = spin::local_node_value(kind, local[at], pos);
        }
    }
    (values, singlets)
}

fn frustrated_count(net: &BooleanNetwork, values: &[u8]) -> usize {
    net.wires().iter().filter(|&&(i, j)| values[i - 1] != values[j - 1]).count()
}

/// `H_N = g sum_wires (q_i - q_j)^2`, diagonal in the polarization basis.
pub fn wire_frustration_hamiltonian(net: &BooleanNetwork, space: &SpaceLabel, g: f64) -> Result<HermitianOperator> {
    check_cover(net, space)?;
    let diag: Vec<f64> =
        (0..space.dim()).map(|i| g * frustrated_count(net, &basis_pattern(space, net, i).0) as f64).collect();
    Ok(HermitianOperator::from_real_diagonal(space, &diag))
}

/// `H' = H_N [1 + (g'/g) sum_tau (q_x^2 + q_y^2 + q_z^2)]`.
pub fn modified_hamiltonian(
    net: &BooleanNetwork,
    space: &SpaceLabel,
    g: f64,
    g_prime: f64,
) -> Result<HermitianOperator> {
    check_cover(net, space)?;
    let diag: Vec<f64> = (0..space.dim())
        .map(|i| {
            let (values, _) = basis_pattern(space, net, i);
            let ones: u32 = values.iter().map(|&v| u32::from(v)).sum();
            g * frustrated_count(net, &values) as f64 * (1.0 + g_prime / g * f64::from(ones))
        })
        .collect();
    Ok(HermitianOperator::from_real_diagonal(space, &diag))
}

/// Two-spin-1/2 network Hamiltonian `H_N + J sum_tau (1 - T_tau)`: the
/// triplet sector keeps the spin-1 energies, singlets are lifted by `J`.
pub fn pair_half_network_hamiltonian(net: &BooleanNetwork, g: f64, j: f64) -> Result<HermitianOperator> {
    let space = SpaceLabel::pair(net.triode_count());
    let mut h = wire_frustration_hamiltonian(net, &space, g)?;
    let id = HermitianOperator::identity(&space);
    for tau in 0..net.triode_count() {
        h = h.add(&id.sub(&spin::triplet_projector(&space, tau)?).scale(j));
    }
    Ok(h)
}

/// `H'` plus the singlet penalty `J sum_tau (1 - T_tau)` on pair spaces.
pub fn network_hamiltonian(
    net: &BooleanNetwork,
    space: &SpaceLabel,
    c: &CouplingConstants,
) -> Result<HermitianOperator> {
    c.validate()?;
    space.ensure_bounded()?;
    let mut h = modified_hamiltonian(net, space, c.g, c.g_prime)?;
    if c.ferro_penalty > 0.0 {
        if !space.representation().has_pairs() {
            return Err(Error::Parameter("the singlet penalty needs the two-spin-1/2 form".into()));
        }
        let id = HermitianOperator::identity(space);
        for tau in 0..net.triode_count() {
            h = h.add(&id.sub(&spin::triplet_projector(space, tau)?).scale(c.ferro_penalty));
        }
    }
    Ok(h)
}

/// A node addressed by factor name and spin axis (0 = x, 1 = y, 2 = z).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinNode {
    pub factor: String,
    pub axis: usize,
}

/// Two spin-1 nodes on factors `t1`, `t2` plus idlers `i1`, `i2`.
pub fn ising_wire_space() -> SpaceLabel {
    SpaceLabel::new(vec![
        Factor::new("t1", FactorKind::Triplet),
        Factor::new("t2", FactorKind::Triplet),
        Factor::new("i1", FactorKind::Idler),
        Factor::new("i2", FactorKind::Idler),
    ])
    .expect("fixed layout")
}

/// Bilinear wire Hamiltonian with idlers `n1`, `n2` (eigenvalues 0, 1):
/// `g [(s1 + s2)^2 + 5 (s1 + s2)(n2 - n1) + n1 n2 + 6 (n1 + n2)]`.
pub fn ising_wire_hamiltonian(
    space: &SpaceLabel,
    node1: &SpinNode,
    idler1: &str,
    node2: &SpinNode,
    idler2: &str,
    g: f64,
) -> Result<HermitianOperator> {
    let component = |node: &SpinNode| -> Result<CMatrix> {
        let at = space.factor_by_name(&node.factor)?;
        if !space.factors()[at].kind.is_triode() || node.axis > 2 {
            return Err(Error::Space(format!("`{}` axis {} is not a spin-1 component", node.factor, node.axis)));
        }
        let local = match space.factors()[at].kind {
            FactorKind::Triplet => spin::spin1_matrices()[node.axis].clone(),
            _ => {
                let [a, b] = [0, 1].map(|w| spin::proton_pauli_local(w)[node.axis].clone());
                (a + b) * C64::new(0.5, 0.0)
            }
        };
        Ok(lift(space, at, &local))
    };
    let s = component(node1)? + component(node2)?;
    let n1 = spin::idler_number(space, idler1)?.into_matrix();
    let n2 = spin::idler_number(space, idler2)?.into_matrix();
    let c = |x: f64| C64::new(x, 0.0);
    let m = &s * &s + &s * (&n2 - &n1) * c(5.0) + &n1 * &n2 + (&n1 + &n2) * c(6.0);
    HermitianOperator::with_tolerance(space.clone(), m * c(g), 1e-10)
}

/// The standard wire between the z-nodes of `t1` and `t2`.
pub fn standard_ising_wire(g: f64) -> HermitianOperator {
    let space = ising_wire_space();
    let z = |f: &str| SpinNode { factor: f.into(), axis: 2 };
    ising_wire_hamiltonian(&space, &z("t1"), "i1", &z("t2"), "i2", g).expect("fixed layout")
}

/// Partial trace over the named factors.
pub fn partial_trace(op: &HermitianOperator, traced: &[usize]) -> Result<HermitianOperator> {
    let space = op.space();
    let kept: Vec<Factor> =
        space.factors().iter().enumerate().filter(|(i, _)| !traced.contains(i)).map(|(_, f)| f.clone()).collect();
    let reduced = SpaceLabel::new(kept)?;
    let mut out = CMatrix::zeros(reduced.dim(), reduced.dim());
    for i in 0..space.dim() {
        let li = space.decode(i);
        for j in 0..space.dim() {
            let lj = space.decode(j);
            if traced.iter().any(|&t| li[t] != lj[t]) {
                continue;
            }
            let ri: Vec<usize> = li.iter().enumerate().filter(|(k, _)| !traced.contains(k)).map(|(_, &v)| v).collect();
            let rj: Vec<usize> = lj.iter().enumerate().filter(|(k, _)| !traced.contains(k)).map(|(_, &v)| v).collect();
            out[(reduced.encode(&ri), reduced.encode(&rj))] += op.matrix()[(i, j)];
        }
    }
    Ok(HermitianOperator::from_parts(reduced, out))
}

/// Normalized kernel projector of `h`, traced over all idler factors.
pub fn reduced_ground_state(h: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let eig = h.eigen();
    let kernel: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k].abs() <= tol).collect();
    if kernel.is_empty() {
        return Err(Error::EmptyKernel);
    }
    let d = h.dim();
    let mut proj = CMatrix::zeros(d, d);
    for &k in &kernel {
        let v = eig.vectors.column(k);
        proj += v * v.adjoint();
    }
    proj /= C64::new(kernel.len() as f64, 0.0);
    let rho = HermitianOperator::from_parts(h.space().clone(), proj);
    let idlers: Vec<usize> =
        h.space().factors().iter().enumerate().filter(|(_, f)| f.kind == FactorKind::Idler).map(|(i, _)| i).collect();
    partial_trace(&rho, &idlers)
}

/// Diagnostics of the standard Ising wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSpectrumReport {
    pub g: f64,
    pub spectrum: Vec<f64>,
    pub kernel_dimension: usize,
    /// `(s1, s2, n1, n2)` eigenvalues of the kernel states, sorted.
    pub kernel_patterns: Vec<[i32; 4]>,
    /// Lowest energy among states with `q1 != q2`.
    pub frustrated_min: f64,
    /// Probability that the reduced kernel state satisfies `q1 = q2`.
    pub wire_satisfaction: f64,
}

/// Diagonalizes the standard wire and classifies its kernel.
pub fn wire_spectrum_report(g: f64) -> Result<WireSpectrumReport> {
    if !(g > 0.0) {
        return Err(Error::Parameter(format!("g must be positive, got {g}")));
    }
    let h = standard_ising_wire(g);
    let space = h.space().clone();
    let tol = 1e-9 * g;
    let eig = h.eigen();
    let kernel: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k].abs() <= tol).collect();

    let sz = |f: &str| lift(&space, space.factor_by_name(f).expect("fixed layout"), &spin::spin1_matrices()[2]);
    let ops = [
        sz("t1"),
        sz("t2"),
        spin::idler_number(&space, "i1")?.into_matrix(),
        spin::idler_number(&space, "i2")?.into_matrix(),
    ];
    let weights = [1.0, 3.1, 7.3, 17.9];
    let combo = ops.iter().zip(weights).fold(CMatrix::zeros(36, 36), |acc, (m, w)| acc + m * C64::new(w, 0.0));
    let mut v = CMatrix::zeros(36, kernel.len());
    for (c, &k) in kernel.iter().enumerate() {
        v.set_column(c, &eig.vectors.column(k));
    }
    let reduced = v.adjoint() * combo * &v;
    let reduced = (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
    let inner = reduced.symmetric_eigen();
    let mut kernel_patterns: Vec<[i32; 4]> = (0..kernel.len())
        .map(|c| {
            let u = &v * inner.eigenvectors.column(c);
            ops.clone().map(|op| (u.adjoint() * op * &u)[(0, 0)].re.round() as i32)
        })
        .collect();
    kernel_patterns.sort();

    let [_, _, q1] = spin::qubit_operators(&space, 0)?;
    let [_, _, q2] = spin::qubit_operators(&space, 1)?;
    let frustration = q1.sub(&q2).square();
    let penalty = 1e3 * g;
    let shifted = h.add(&HermitianOperator::identity(&space).sub(&frustration).scale(penalty));
    let frustrated_min = shifted.spectrum()[0];

    let rho = reduced_ground_state(&h, tol)?;
    let rspace = rho.space().clone();
    let [_, _, r1] = spin::qubit_operators(&rspace, 0)?;
    let [_, _, r2] = spin::qubit_operators(&rspace, 1)?;
    let violated = (rho.matrix() * r1.sub(&r2).square().matrix()).trace().re;
    Ok(WireSpectrumReport {
        g,
        spectrum: eig.values,
        kernel_dimension: kernel.len(),
        kernel_patterns,
        frustrated_min,
        wire_satisfaction: 1.0 - violated,
    })
}

/// Cached Pauli embeddings for assembling couplings quickly.
#[derive(Debug, Clone)]
pub struct CouplingOperators {
    space: SpaceLabel,
    /// `protons[tau][p][axis]`
    protons: Vec<[[CMatrix; 3]; 2]>,
}

impl CouplingOperators {
    pub fn new(space: &SpaceLabel) -> Result<Self> {
        if !space.representation().has_pairs() {
            return Err(Error::Space("bath couplings need the two-spin-1/2 form".into()));
        }
        let protons = (0..space.triode_count())
            .map(|tau| {
                let p = |w| spin::proton_pauli(space, tau, w).map(|ops| ops.map(HermitianOperator::into_matrix));
                Ok([p(0)?, p(1)?])
            })
            .collect::<Result<_>>()?;
        Ok(Self { space: space.clone(), protons })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    /// `sigma_{tau,p}` for axis `a`.
    pub fn proton(&self, tau: usize, p: usize, axis: usize) -> &CMatrix {
        &self.protons[tau][p][axis]
    }

    /// `g sum_tau B_tau(t) . (sigma_tau1 + sigma_tau2)`.
    pub fn symmetric(&self, fields: &BathFieldSample, t: f64, g: f64) -> Result<CMatrix> {
        let d = self.space.dim();
        let mut h = CMatrix::zeros(d, d);
        for tau in 0..self.protons.len() {
            let b = fields.averaged_at(tau, t)?;
            for a in 0..3 {
                let c = C64::new(g * b[a], 0.0);
                h += (&self.protons[tau][0][a] + &self.protons[tau][1][a]) * c;
            }
        }
        Ok(h)
    }

    /// `g sum_tau [B_tau1(t) . sigma_tau1 + B_tau2(t) . sigma_tau2]`.
    pub fn asymmetric(&self, fields: &BathFieldSample, t: f64, g: f64) -> Result<CMatrix> {
        let d = self.space.dim();
        let mut h = CMatrix::zeros(d, d);
        for tau in 0..self.protons.len() {
            for p in 0..2 {
                let b = fields.proton_at(tau, p, t)?;
                for a in 0..3 {
                    h += &self.protons[tau][p][a] * C64::new(g * b[a], 0.0);
                }
            }
        }
        Ok(h)
    }
}

/// Symmetric bath coupling at time `t`.
pub fn symmetric_coupling(space: &SpaceLabel, fields: &BathFieldSample, t: f64, g: f64) -> Result<HermitianOperator> {
    let ops = CouplingOperators::new(space)?;
    Ok(HermitianOperator::from_parts(space.clone(), ops.symmetric(fields, t, g)?))
}

/// Asymmetric (per-proton) bath coupling at time `t`.
pub fn asymmetric_coupling(space: &SpaceLabel, fields: &BathFieldSample, t: f64, g: f64) -> Result<HermitianOperator> {
    let ops = CouplingOperators::new(space)?;
    Ok(HermitianOperator::from_parts(space.clone(), ops.asymmetric(fields, t, g)?))
}
