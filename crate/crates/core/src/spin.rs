//! Spin operators, node observables, exchange operators and symmetry projectors.
//!
//! Triode factors use the polarization basis. For a spin-1 factor the basis
//! vectors `|x>, |y>, |z>` satisfy `(s_a)_{bc} = -i eps_{abc}`, which makes
//! every `q_a = s_a^2` diagonal: `q_a |k> = (1 - delta_{ak}) |k>`. A pair
//! factor appends the singlet, on which all three `q_a` vanish. In the
//! product basis `|uu>, |ud>, |du>, |dd>` of the two spins 1/2 these are
//!
//! ```text
//! |x> = (|dd> - |uu>)/sqrt2    |y> = i(|uu> + |dd>)/sqrt2
//! |z> = (|ud> + |du>)/sqrt2    |s> = (|ud> - |du>)/sqrt2
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::BooleanNetwork;
use crate::operator::{lift, max_abs, CMatrix, HermitianOperator, C64};
use crate::space::{FactorKind, SpaceLabel};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrices `[sigma_x, sigma_y, sigma_z]` in the `|up>, |down>` basis.
pub fn pauli_matrices() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// Spin-1 matrices in the polarization (Cartesian) basis.
pub fn spin1_matrices() -> [CMatrix; 3] {
    let mut out = [CMatrix::zeros(3, 3), CMatrix::zeros(3, 3), CMatrix::zeros(3, 3)];
    for (a, m) in out.iter_mut().enumerate() {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        m[(b, c)] = -I;
        m[(c, b)] = I;
    }
    out
}

/// Columns are the pair polarization states in the two-spin product basis.
pub fn pair_basis() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(h, 0.0);
    let ih = C64::new(0.0, h);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        -r,   ih,   ZERO, ZERO,
        ZERO, ZERO, r,    r,
        ZERO, ZERO, r,    -r,
        r,    ih,   ZERO, ZERO,
    ]);
    m
}

/// Pauli triple of proton `which` (0 or 1) in the pair polarization basis.
pub fn proton_pauli_local(which: usize) -> [CMatrix; 3] {
    assert!(which < 2, "a pair has protons 0 and 1");
    let u = pair_basis();
    let id = CMatrix::identity(2, 2);
    pauli_matrices().map(|s| {
        let product = if which == 0 { s.kronecker(&id) } else { id.kronecker(&s) };
        u.adjoint() * product * &u
    })
}

fn check_kind(space: &SpaceLabel, at: usize, want: FactorKind, what: &str) -> Result<()> {
    let kind = space.factors()[at].kind;
    if kind == want {
        Ok(())
    } else {
        Err(Error::Space(format!(
            "{what} needs a {want:?} factor, `{}` is {kind:?} (local dimension {})",
            space.factors()[at].name,
            kind.dim()
        )))
    }
}

/// Pauli operators of a two-dimensional (idler) factor.
pub fn pauli_operators(space: &SpaceLabel, factor: &str) -> Result<[HermitianOperator; 3]> {
    let at = space.factor_by_name(factor)?;
    check_kind(space, at, FactorKind::Idler, "pauli_operators")?;
    Ok(pauli_matrices().map(|m| HermitianOperator::from_parts(space.clone(), lift(space, at, &m))))
}

/// Pauli operators of proton `which` of triode `tau` (pair factor).
pub fn proton_pauli(space: &SpaceLabel, tau: usize, which: usize) -> Result<[HermitianOperator; 3]> {
    let at = space.triode_factor(tau)?;
    check_kind(space, at, FactorKind::Pair, "proton_pauli")?;
    Ok(proton_pauli_local(which).map(|m| HermitianOperator::from_parts(space.clone(), lift(space, at, &m))))
}

/// Idler occupation `(1 + sigma_z)/2` with eigenvalues 0 and 1.
pub fn idler_number(space: &SpaceLabel, factor: &str) -> Result<HermitianOperator> {
    let at = space.factor_by_name(factor)?;
    check_kind(space, at, FactorKind::Idler, "idler_number")?;
    let n = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ZERO]));
    Ok(HermitianOperator::from_parts(space.clone(), lift(space, at, &n)))
}

fn local_spin(kind: FactorKind) -> [CMatrix; 3] {
    match kind {
        FactorKind::Triplet => spin1_matrices(),
        FactorKind::Pair => {
            let [a0, a1, a2] = proton_pauli_local(0);
            let [b0, b1, b2] = proton_pauli_local(1);
            let h = C64::new(0.5, 0.0);
            [(a0 + b0) * h, (a1 + b1) * h, (a2 + b2) * h]
        }
        FactorKind::Idler => unreachable!("idlers carry no triode spin"),
    }
}

/// `s_x, s_y, s_z` of triode `tau`.
pub fn spin1_components(space: &SpaceLabel, tau: usize) -> Result<[HermitianOperator; 3]> {
    let at = space.triode_factor(tau)?;
    let kind = space.factors()[at].kind;
    Ok(local_spin(kind).map(|m| HermitianOperator::from_parts(space.clone(), lift(space, at, &m))))
}

/// `q_x = s_x^2, q_y = s_y^2, q_z = s_z^2` of triode `tau`.
pub fn qubit_operators(space: &SpaceLabel, tau: usize) -> Result<[HermitianOperator; 3]> {
    let at = space.triode_factor(tau)?;
    let kind = space.factors()[at].kind;
    Ok(local_spin(kind).map(|m| HermitianOperator::from_parts(space.clone(), lift(space, at, &(&m * &m)))))
}

/// The node observable `q_n` of a 1-based network node.
pub fn node_operator(space: &SpaceLabel, net: &BooleanNetwork, node: usize) -> Result<HermitianOperator> {
    let (tau, pos) = net.locate(node).ok_or_else(|| Error::Space(format!("node {node} is not in the network")))?;
    let [x, y, z] = qubit_operators(space, tau)?;
    Ok([x, y, z].into_iter().nth(pos).expect("position below 3"))
}

/// Node value (0 or 1) read off a local polarization index.
pub fn local_node_value(kind: FactorKind, local: usize, pos: usize) -> u8 {
    match kind {
        FactorKind::Triplet | FactorKind::Pair if local < 3 => u8::from(local != pos),
        FactorKind::Pair => 0,
        _ => unreachable!("idlers carry no node values"),
    }
}

fn swap_local() -> CMatrix {
    let u = pair_basis();
    let mut swap = CMatrix::zeros(4, 4);
    swap[(0, 0)] = ONE;
    swap[(1, 2)] = ONE;
    swap[(2, 1)] = ONE;
    swap[(3, 3)] = ONE;
    u.adjoint() * swap * &u
}

/// Exchange of the two protons of triode `tau`.
pub fn exchange_operator(space: &SpaceLabel, tau: usize) -> Result<HermitianOperator> {
    let at = space.triode_factor(tau)?;
    check_kind(space, at, FactorKind::Pair, "exchange_operator")?;
    Ok(HermitianOperator::from_parts(space.clone(), lift(space, at, &swap_local())))
}

/// `T_tau = (1 + X_tau)/2`.
pub fn triplet_projector(space: &SpaceLabel, tau: usize) -> Result<HermitianOperator> {
    let x = exchange_operator(space, tau)?;
    Ok(HermitianOperator::identity(space).add(&x).scale(0.5))
}

/// `P = prod_tau (1 + X_tau)/2`, the projector onto all-triplet states.
pub fn symmetrizer(space: &SpaceLabel) -> Result<HermitianOperator> {
    if !space.representation().has_pairs() {
        return Err(Error::Space("symmetrizer needs pair factors".into()));
    }
    let mut p = CMatrix::identity(space.dim(), space.dim());
    for tau in 0..space.triode_count() {
        p = triplet_projector(space, tau)?.matrix() * p;
    }
    Ok(HermitianOperator::from_parts(space.clone(), p))
}

/// Diagonal mask of the all-triplet subspace (basis indices without singlets).
pub fn triplet_mask(space: &SpaceLabel) -> Vec<bool> {
    (0..space.dim())
        .map(|i| space.decode(i).iter().zip(space.factors()).all(|(&l, f)| f.kind != FactorKind::Pair || l < 3))
        .collect()
}

/// Isometry from `space.triplet_form()` into `space`.
fn triplet_isometry(space: &SpaceLabel) -> CMatrix {
    let small = space.triplet_form();
    let mut v = CMatrix::zeros(space.dim(), small.dim());
    for j in 0..small.dim() {
        let local = small.decode(j);
        v[(space.encode(&local), j)] = ONE;
    }
    v
}

/// Lifts an operator on `target.triplet_form()` into `target` as `V A V^dagger`.
pub fn embed(op: &HermitianOperator, target: &SpaceLabel) -> Result<HermitianOperator> {
    if !target.representation().has_pairs() {
        return Err(Error::Space("embedding target must carry pair factors".into()));
    }
    if op.space() != &target.triplet_form() {
        return Err(Error::Space(format!(
            "cannot embed an operator on `{}` into `{}`",
            op.space().header(),
            target.header()
        )));
    }
    let v = triplet_isometry(target);
    Ok(HermitianOperator::from_parts(target.clone(), &v * op.matrix() * v.adjoint()))
}

/// Compresses a symmetric operator on a pair space to the triplet sector.
pub fn restrict_to_triplet(op: &HermitianOperator) -> Result<HermitianOperator> {
    let space = op.space();
    if !space.representation().has_pairs() {
        return Err(Error::Space("operator already lives on a triplet space".into()));
    }
    let scale = max_abs(op.matrix()).max(1.0);
    for tau in 0..space.triode_count() {
        let deviation = op.commutator_norm(&triplet_projector(space, tau)?);
        if deviation > 1e-10 * scale {
            return Err(Error::NotSymmetric { deviation });
        }
    }
    let v = triplet_isometry(space);
    let iso = max_abs(&(v.adjoint() * &v - DMatrix::identity(v.ncols(), v.ncols())));
    if iso > 1e-12 {
        return Err(Error::Invariant { check: "isometry", detail: format!("V^dagger V deviates by {iso:e}") });
    }
    Ok(HermitianOperator::from_parts(space.triplet_form(), v.adjoint() * op.matrix() * &v))
}
