//! Compact groups and their projective unitary representations.
//!
//! Finite groups are stored by explicit multiplication table; U(1) is
//! handled through integer Fourier modes and an equispaced quadrature grid
//! of `Q` nodes. Because every integrand in scope is a trigonometric
//! polynomial of degree below `Q`, the grid average reproduces the Haar
//! integral exactly, and the grid itself is closed under the group law, so
//! both kinds of group expose the same element-indexed interface.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::matcore::{pairwise_sum_mats, vectorize, CMat, CVec, C_ONE};
use crate::{Error, Result};

/// Seed for the sampled associativity check on large tables. Fixed so that
/// validation is reproducible.
const ASSOC_SAMPLE_SEED: u64 = 0x61737363;

const TAU: f64 = std::f64::consts::TAU;

/// Group elements are plain indices: into the multiplication table for
/// finite groups, or quadrature nodes t (θ = 2πt/Q) for U(1).
pub type ElementId = usize;

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    name: String,
}

#[derive(Debug, Clone)]
pub struct U1Group {
    q: usize,
}

#[derive(Debug, Clone)]
pub enum GroupKind {
    Finite(FiniteGroup),
    U1(U1Group),
}

/// A compact group in the element-indexed form used by all averages.
#[derive(Debug, Clone)]
pub struct Group {
    kind: GroupKind,
}

impl Group {
    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_u1(&self) -> bool {
        matches!(self.kind, GroupKind::U1(_))
    }

    /// Number of elements iterated by Haar averages: the group order for
    /// finite groups, the quadrature resolution Q for U(1).
    pub fn element_count(&self) -> usize {
        match &self.kind {
            GroupKind::Finite(f) => f.order,
            GroupKind::U1(u) => u.q,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        0..self.element_count()
    }

    pub fn identity(&self) -> ElementId {
        match &self.kind {
            GroupKind::Finite(f) => f.identity,
            GroupKind::U1(_) => 0,
        }
    }

    pub fn mul(&self, a: ElementId, b: ElementId) -> ElementId {
        match &self.kind {
            GroupKind::Finite(f) => f.mul[a][b],
            GroupKind::U1(u) => (a + b) % u.q,
        }
    }

    pub fn inv(&self, a: ElementId) -> ElementId {
        match &self.kind {
            GroupKind::Finite(f) => f.inv[a],
            GroupKind::U1(u) => (u.q - a) % u.q,
        }
    }

    /// Quadrature angle of a U(1) node.
    pub fn theta(&self, t: ElementId) -> f64 {
        match &self.kind {
            GroupKind::U1(u) => TAU * (t as f64) / (u.q as f64),
            GroupKind::Finite(_) => panic!("theta is only defined for U(1) groups"),
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::Finite(f) => f.name.clone(),
            GroupKind::U1(u) => format!("u1(Q={})", u.q),
        }
    }

    pub fn check_element(&self, g: ElementId) -> Result<()> {
        if g >= self.element_count() {
            return Err(Error::Validation(format!(
                "element index {g} out of range for {}",
                self.name()
            )));
        }
        Ok(())
    }

    pub fn structural_eq(&self, other: &Group) -> bool {
        match (&self.kind, &other.kind) {
            (GroupKind::U1(a), GroupKind::U1(b)) => a.q == b.q,
            (GroupKind::Finite(a), GroupKind::Finite(b)) => {
                a.order == b.order && a.identity == b.identity && a.mul == b.mul
            }
            _ => false,
        }
    }
}

/// Structured group description as parsed from a group file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupFile {
    Cyclic {
        #[serde(alias = "N")]
        n: usize,
    },
    Dihedral {
        #[serde(alias = "N")]
        n: usize,
    },
    HeisenbergWeyl {
        d: usize,
    },
    Table {
        mul: Vec<Vec<usize>>,
    },
    U1 {
        #[serde(alias = "Q")]
        q: usize,
    },
}

fn validate_table(mul: &[Vec<usize>], name: &str) -> Result<FiniteGroup> {
    let order = mul.len();
    if order == 0 {
        return Err(Error::Validation("empty multiplication table".into()));
    }
    for (i, row) in mul.iter().enumerate() {
        if row.len() != order {
            return Err(Error::Validation(format!(
                "multiplication table row {i} has length {} (expected {order})",
                row.len()
            )));
        }
        let mut seen = vec![false; order];
        for &v in row {
            if v >= order {
                return Err(Error::Validation(format!(
                    "table entry {v} out of range in row {i}"
                )));
            }
            seen[v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation(format!("table row {i} is not a permutation")));
        }
    }
    for j in 0..order {
        let mut seen = vec![false; order];
        for row in mul {
            seen[row[j]] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation(format!(
                "table column {j} is not a permutation"
            )));
        }
    }

    // Identity element.
    let identity = (0..order)
        .find(|&e| (0..order).all(|g| mul[e][g] == g && mul[g][e] == g))
        .ok_or_else(|| Error::Validation("multiplication table has no identity".into()))?;

    // Inverses.
    let mut inv = vec![usize::MAX; order];
    for g in 0..order {
        let h = (0..order)
            .find(|&h| mul[g][h] == identity && mul[h][g] == identity)
            .ok_or_else(|| Error::Validation(format!("element {g} has no inverse")))?;
        inv[g] = h;
    }

    // Associativity: exhaustive up to order 64, sampled above.
    let check = |a: usize, b: usize, c: usize| -> Result<()> {
        if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
            return Err(Error::Validation(format!(
                "associativity fails on triple ({a}, {b}, {c})"
            )));
        }
        Ok(())
    };
    if order <= 64 {
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(ASSOC_SAMPLE_SEED);
        for _ in 0..1000 {
            let a = rng.random_range(0..order);
            let b = rng.random_range(0..order);
            let c = rng.random_range(0..order);
            check(a, b, c)?;
        }
    }

    Ok(FiniteGroup {
        order,
        mul: mul.to_vec(),
        inv,
        identity,
        name: name.to_string(),
    })
}

fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
}

/// Dihedral group of order 2N, elements r^a s^b indexed a + N*b with
/// relations r^N = s^2 = e and s r s = r^{-1}.
fn dihedral_table(n: usize) -> Vec<Vec<usize>> {
    let order = 2 * n;
    let idx = |a: usize, b: usize| a + n * b;
    let mut mul = vec![vec![0usize; order]; order];
    for a in 0..n {
        for b in 0..2 {
            for a2 in 0..n {
                for b2 in 0..2 {
                    // (r^a s^b)(r^{a2} s^{b2}) = r^{a + (-1)^b a2} s^{b + b2}
                    let aa = if b == 0 { (a + a2) % n } else { (a + n - a2 % n) % n };
                    mul[idx(a, b)][idx(a2, b2)] = idx(aa, (b + b2) % 2);
                }
            }
        }
    }
    mul
}

/// Index group Z_d × Z_d underlying the Heisenberg–Weyl projective
/// representation; element (a, b) is stored at index a*d + b.
fn heisenberg_weyl_table(d: usize) -> Vec<Vec<usize>> {
    let order = d * d;
    let mut mul = vec![vec![0usize; order]; order];
    for a in 0..d {
        for b in 0..d {
            for a2 in 0..d {
                for b2 in 0..d {
                    mul[a * d + b][a2 * d + b2] = ((a + a2) % d) * d + (b + b2) % d;
                }
            }
        }
    }
    mul
}

/// Builds and validates a group from its file description.
pub fn make_group(file: &GroupFile) -> Result<Group> {
    let kind = match file {
        GroupFile::Cyclic { n } => {
            if *n == 0 {
                return Err(Error::Validation("cyclic group needs N >= 1".into()));
            }
            GroupKind::Finite(validate_table(&cyclic_table(*n), &format!("cyclic({n})"))?)
        }
        GroupFile::Dihedral { n } => {
            if *n < 2 {
                return Err(Error::Validation("dihedral group needs N >= 2".into()));
            }
            GroupKind::Finite(validate_table(&dihedral_table(*n), &format!("dihedral({n})"))?)
        }
        GroupFile::HeisenbergWeyl { d } => {
            if *d < 2 {
                return Err(Error::Validation("heisenberg_weyl needs d >= 2".into()));
            }
            GroupKind::Finite(validate_table(
                &heisenberg_weyl_table(*d),
                &format!("heisenberg_weyl({d})"),
            )?)
        }
        GroupFile::Table { mul } => GroupKind::Finite(validate_table(mul, "table")?),
        GroupFile::U1 { q } => {
            if *q < 4 {
                return Err(Error::Validation("u1 group needs Q >= 4".into()));
            }
            GroupKind::U1(U1Group { q: *q })
        }
    };
    Ok(Group { kind })
}

/// One U(1) Fourier mode with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub k: i64,
    pub mult: usize,
}

#[derive(Debug, Clone)]
pub enum RepForm {
    /// One unitary per finite-group element.
    Matrices(Vec<CMat>),
    /// Sorted distinct modes with multiplicities; f(θ) = ⊕ e^{ikθ} I_mult.
    U1Modes(Vec<Mode>),
}

#[derive(Debug, Clone)]
enum Cocycle {
    Trivial,
    Table(Vec<Vec<Complex64>>),
}

/// A projective unitary representation g ↦ f(g) with its cocycle ω,
/// satisfying f(g) f(g') = ω(g, g') f(gg') and f(e) = I.
#[derive(Debug, Clone)]
pub struct ProjectiveRep {
    group: Arc<Group>,
    dim: usize,
    form: RepForm,
    cocycle: Cocycle,
}

impl ProjectiveRep {
    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &RepForm {
        &self.form
    }

    /// Distinct sorted modes when this is a U(1) representation.
    pub fn modes(&self) -> Option<&[Mode]> {
        match &self.form {
            RepForm::U1Modes(m) => Some(m),
            RepForm::Matrices(_) => None,
        }
    }

    /// The unitary f(g).
    pub fn unitary(&self, g: ElementId) -> CMat {
        match &self.form {
            RepForm::Matrices(ms) => ms[g].clone(),
            RepForm::U1Modes(modes) => {
                let theta = self.group.theta(g);
                let mut diag = Vec::with_capacity(self.dim);
                for m in modes {
                    let z = Complex64::from_polar(1.0, (m.k as f64) * theta);
                    for _ in 0..m.mult {
                        diag.push(z);
                    }
                }
                CMat::diag(&diag)
            }
        }
    }

    pub fn cocycle_val(&self, g: ElementId, h: ElementId) -> Complex64 {
        match &self.cocycle {
            Cocycle::Trivial => C_ONE,
            Cocycle::Table(t) => t[g][h],
        }
    }

    pub fn has_trivial_cocycle(&self, tol: f64) -> bool {
        match &self.cocycle {
            Cocycle::Trivial => true,
            Cocycle::Table(t) => t.iter().flatten().all(|w| (w - C_ONE).norm() <= tol),
        }
    }

    /// Largest |k| over the attached modes (0 for finite groups).
    pub fn max_abs_mode(&self) -> i64 {
        match &self.form {
            RepForm::U1Modes(modes) => modes.iter().map(|m| m.k.abs()).max().unwrap_or(0),
            RepForm::Matrices(_) => 0,
        }
    }

    fn from_matrices(group: Arc<Group>, matrices: Vec<CMat>) -> Result<Self> {
        let count = group.element_count();
        if matrices.len() != count {
            return Err(Error::Validation(format!(
                "representation supplies {} unitaries for a group of order {count}",
                matrices.len()
            )));
        }
        let dim = matrices[0].rows();
        if matrices.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::Dim("representation matrices must share one dimension".into()));
        }
        for (g, m) in matrices.iter().enumerate() {
            if !m.is_unitary(1e-10) {
                return Err(Error::Validation(format!("f({g}) is not unitary within 1e-10")));
            }
        }
        let e = group.identity();
        if matrices[e].sub(&CMat::identity(dim)).max_abs() > 1e-10 {
            return Err(Error::Validation("f(e) must be the identity".into()));
        }

        // Infer the cocycle from f(g) f(g') f(gg')^{-1} and validate the
        // projective homomorphism law.
        let mut table = vec![vec![C_ONE; count]; count];
        let dinv = 1.0 / dim as f64;
        for g in 0..count {
            for h in 0..count {
                let gh = group.mul(g, h);
                let prod = matrices[g].mul(&matrices[h]);
                let omega = matrices[gh].dagger().mul(&prod).trace() * dinv;
                if (omega.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Validation(format!(
                        "cocycle at ({g}, {h}) has modulus {:.6}, expected 1",
                        omega.norm()
                    )));
                }
                let omega = omega / omega.norm();
                if prod.sub(&matrices[gh].scale(omega)).max_abs() > 1e-9 {
                    return Err(Error::Validation(format!(
                        "f({g}) f({h}) is not proportional to f({g}·{h}) within 1e-9"
                    )));
                }
                table[g][h] = omega;
            }
        }
        let trivial = table.iter().flatten().all(|w| (w - C_ONE).norm() <= 1e-10);
        Ok(ProjectiveRep {
            group,
            dim,
            form: RepForm::Matrices(matrices),
            cocycle: if trivial { Cocycle::Trivial } else { Cocycle::Table(table) },
        })
    }

    fn from_modes(group: Arc<Group>, raw: &[Mode]) -> Result<Self> {
        let q = match group.kind() {
            GroupKind::U1(u) => u.q,
            GroupKind::Finite(_) => {
                return Err(Error::Validation(
                    "mode representations require a u1 group".into(),
                ))
            }
        };
        if raw.is_empty() {
            return Err(Error::Validation("mode list must be non-empty".into()));
        }
        // Merge duplicates, sort ascending.
        let mut modes: Vec<Mode> = Vec::new();
        let mut sorted = raw.to_vec();
        sorted.sort_by_key(|m| m.k);
        for m in sorted {
            if m.mult == 0 {
                return Err(Error::Validation("mode multiplicity must be positive".into()));
            }
            match modes.last_mut() {
                Some(last) if last.k == m.k => last.mult += m.mult,
                _ => modes.push(m),
            }
        }
        let max_mode = modes.iter().map(|m| m.k.abs()).max().unwrap_or(0);
        if (q as i64) < 4 * max_mode + 1 {
            return Err(Error::Validation(format!(
                "u1 quadrature Q = {q} is too coarse: need Q >= 4*{max_mode} + 1"
            )));
        }
        let dim = modes.iter().map(|m| m.mult).sum();
        Ok(ProjectiveRep {
            group,
            dim,
            form: RepForm::U1Modes(modes),
            cocycle: Cocycle::Trivial,
        })
    }
}

/// Structured representation description as parsed from a rep file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepFile {
    /// Named built-in:
    /// * `hw` — Heisenberg–Weyl X^a Z^b on a heisenberg_weyl(d) group,
    /// * `chars` — diagonal character representation of cyclic(N) with the
    ///   listed character indices `ks`,
    /// * `defining` — the two-dimensional defining representation of a
    ///   dihedral group,
    /// * `regular` — left regular representation of any finite group.
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ks: Option<Vec<i64>>,
    },
    /// Explicit unitaries, one per element; complex numbers as [re, im].
    Matrices { unitaries: Vec<Vec<Vec<[f64; 2]>>> },
    /// U(1) Fourier modes.
    U1modes { modes: Vec<Mode> },
}

fn pauli_xz_power(d: usize, a: usize, b: usize) -> CMat {
    let omega = TAU / d as f64;
    CMat::from_fn(d, d, |r, c| {
        // X^a Z^b: |c⟩ -> ω^{bc} |c + a⟩.
        if r == (c + a) % d {
            Complex64::from_polar(1.0, omega * (b * c) as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Builds and validates a representation over `group` from its file
/// description.
pub fn make_rep(group: &Arc<Group>, file: &RepFile) -> Result<ProjectiveRep> {
    match file {
        RepFile::Builtin { name, d, ks } => match name.as_str() {
            "hw" => {
                let d = d.ok_or_else(|| Error::Validation("builtin hw needs field d".into()))?;
                let expected = heisenberg_weyl_table(d);
                let ok = matches!(group.kind(), GroupKind::Finite(f) if f.mul == expected);
                if !ok {
                    return Err(Error::Validation(
                        "builtin hw requires the heisenberg_weyl(d) group".into(),
                    ));
                }
                let mats: Vec<CMat> = (0..d * d).map(|i| pauli_xz_power(d, i / d, i % d)).collect();
                ProjectiveRep::from_matrices(group.clone(), mats)
            }
            "chars" => {
                let ks = ks
                    .as_ref()
                    .ok_or_else(|| Error::Validation("builtin chars needs field ks".into()))?;
                let n = match group.kind() {
                    GroupKind::Finite(f) if f.mul == cyclic_table(f.order) => f.order,
                    _ => {
                        return Err(Error::Validation(
                            "builtin chars requires a cyclic group".into(),
                        ))
                    }
                };
                if ks.is_empty() {
                    return Err(Error::Validation("chars needs at least one character".into()));
                }
                let mats: Vec<CMat> = (0..n)
                    .map(|g| {
                        let diag: Vec<Complex64> = ks
                            .iter()
                            .map(|&k| {
                                Complex64::from_polar(
                                    1.0,
                                    TAU * (k.rem_euclid(n as i64) * g as i64) as f64 / n as f64,
                                )
                            })
                            .collect();
                        CMat::diag(&diag)
                    })
                    .collect();
                ProjectiveRep::from_matrices(group.clone(), mats)
            }
            "defining" => {
                let n = match group.kind() {
                    GroupKind::Finite(f)
                        if f.order % 2 == 0 && f.mul == dihedral_table(f.order / 2) =>
                    {
                        f.order / 2
                    }
                    _ => {
                        return Err(Error::Validation(
                            "builtin defining requires a dihedral group".into(),
                        ))
                    }
                };
                let mats: Vec<CMat> = (0..2 * n)
                    .map(|idx| {
                        let (a, b) = (idx % n, idx / n);
                        let t = TAU * a as f64 / n as f64;
                        let rot = CMat::from_rows(vec![
                            vec![Complex64::new(t.cos(), 0.0), Complex64::new(-t.sin(), 0.0)],
                            vec![Complex64::new(t.sin(), 0.0), Complex64::new(t.cos(), 0.0)],
                        ])
                        .unwrap();
                        if b == 0 {
                            rot
                        } else {
                            let refl = CMat::diag(&[C_ONE, Complex64::new(-1.0, 0.0)]);
                            rot.mul(&refl)
                        }
                    })
                    .collect();
                ProjectiveRep::from_matrices(group.clone(), mats)
            }
            "regular" => {
                let fg = match group.kind() {
                    GroupKind::Finite(f) => f,
                    GroupKind::U1(_) => {
                        return Err(Error::Unsupported(
                            "regular representation needs a finite group".into(),
                        ))
                    }
                };
                let n = fg.order;
                let mats: Vec<CMat> = (0..n)
                    .map(|g| {
                        CMat::from_fn(n, n, |r, c| {
                            if r == fg.mul[g][c] {
                                C_ONE
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                    })
                    .collect();
                ProjectiveRep::from_matrices(group.clone(), mats)
            }
            other => Err(Error::Validation(format!(
                "unknown builtin representation {other:?}"
            ))),
        },
        RepFile::Matrices { unitaries } => {
            let mats: Vec<CMat> = unitaries
                .iter()
                .map(|m| {
                    CMat::from_rows(
                        m.iter()
                            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                            .collect(),
                    )
                })
                .collect::<Result<_>>()?;
            ProjectiveRep::from_matrices(group.clone(), mats)
        }
        RepFile::U1modes { modes } => ProjectiveRep::from_modes(group.clone(), modes),
    }
}

/// Tensor product of representations of one shared group.
pub fn rep_tensor(reps: &[&ProjectiveRep]) -> Result<ProjectiveRep> {
    let first = reps
        .first()
        .ok_or_else(|| Error::Validation("rep_tensor needs at least one factor".into()))?;
    for r in reps {
        if !r.group.structural_eq(&first.group) {
            return Err(Error::Validation(
                "rep_tensor factors must share one group".into(),
            ));
        }
    }
    if reps.len() == 1 {
        return Ok((*first).clone());
    }
    match &first.form {
        RepForm::U1Modes(_) => {
            // Convolve mode multisets.
            let mut acc: Vec<Mode> = first.modes().unwrap().to_vec();
            for r in &reps[1..] {
                let other = r.modes().ok_or_else(|| {
                    Error::Validation("cannot tensor a u1 rep with a matrix rep".into())
                })?;
                let mut next: Vec<Mode> = Vec::new();
                for a in &acc {
                    for b in other {
                        let k = a.k + b.k;
                        let mult = a.mult * b.mult;
                        match next.iter_mut().find(|m| m.k == k) {
                            Some(m) => m.mult += mult,
                            None => next.push(Mode { k, mult }),
                        }
                    }
                }
                next.sort_by_key(|m| m.k);
                acc = next;
            }
            ProjectiveRep::from_modes(first.group.clone(), &acc)
        }
        RepForm::Matrices(_) => {
            let count = first.group.element_count();
            let mats: Vec<CMat> = (0..count)
                .map(|g| {
                    let mut m = first.unitary(g);
                    for r in &reps[1..] {
                        m = crate::matcore::kron(&m, &r.unitary(g));
                    }
                    m
                })
                .collect();
            ProjectiveRep::from_matrices(first.group.clone(), mats)
        }
    }
}

/// Tensor power f^{⊗n}.
pub fn rep_power(rep: &ProjectiveRep, copies: usize) -> Result<ProjectiveRep> {
    if copies == 0 {
        return Err(Error::Validation("tensor power needs copies >= 1".into()));
    }
    let factors: Vec<&ProjectiveRep> = (0..copies).map(|_| rep).collect();
    rep_tensor(&factors)
}

/// The Choi vector |f(g)⟩⟩ of a representation element.
#[derive(Debug, Clone)]
pub struct ChoiVector {
    pub element: ElementId,
    pub vector: CVec,
}

/// |f(g)⟩⟩ = vectorize(f(g)); its squared norm is the dimension d.
pub fn choi_vector(rep: &ProjectiveRep, g: ElementId) -> Result<ChoiVector> {
    rep.group().check_element(g)?;
    Ok(ChoiVector {
        element: g,
        vector: vectorize(&rep.unitary(g))?,
    })
}

/// Haar average of a matrix-valued integrand: the uniform element average
/// for finite groups, the exact equispaced quadrature for U(1). Pairwise
/// summation keeps the result independent of accumulation order.
pub fn haar_average(group: &Group, mut integrand: impl FnMut(ElementId) -> CMat) -> CMat {
    let count = group.element_count();
    let mut terms: Vec<CMat> = (0..count).map(&mut integrand).collect();
    let sum = pairwise_sum_mats(&mut terms).expect("group has at least one element");
    sum.scale_re(1.0 / count as f64)
}

/// The average state ρ_μ = ∫ |f(g)⟩⟩⟨⟨f(g)| μ(dg) on the d²-dimensional
/// pair space. Positive semi-definite with trace d.
pub fn average_state(rep: &ProjectiveRep) -> CMat {
    haar_average(rep.group(), |g| {
        let v = vectorize(&rep.unitary(g)).expect("unitaries are square");
        v.outer(&v)
    })
}


#[cfg(test)]
mod tests {
    use super::test_fixtures::*;
    use super::*;
    use crate::matcore::{hermitian_eig, C_ZERO};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cyclic_two_table() {
        let g = cyclic_group(2);
        assert_eq!(g.element_count(), 2);
        assert_eq!(g.mul(1, 1), 0);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn dihedral_three_is_nonabelian() {
        let g = make_group(&GroupFile::Dihedral { n: 3 }).unwrap();
        assert_eq!(g.element_count(), 6);
        let mut found = false;
        for a in g.elements() {
            for b in g.elements() {
                if g.mul(a, b) != g.mul(b, a) {
                    found = true;
                }
            }
        }
        assert!(found, "dihedral(3) should be non-abelian");
    }

    #[test]
    fn heisenberg_weyl_cocycle_matches_pauli_products() {
        let rep = hw_rep(2);
        let g = rep.group().clone();
        assert_eq!(g.element_count(), 4);
        assert_eq!(rep.dim(), 2);
        // Explicit Pauli multiplication oracle: f(a,b) = X^a Z^b and
        // ZX = -XZ for d = 2, so ω((a,b),(a',b')) = (-1)^{b a'}.
        for a in 0..2usize {
            for b in 0..2usize {
                for a2 in 0..2usize {
                    for b2 in 0..2usize {
                        let g1 = a * 2 + b;
                        let g2 = a2 * 2 + b2;
                        let expect = if (b * a2) % 2 == 1 { -1.0 } else { 1.0 };
                        let omega = rep.cocycle_val(g1, g2);
                        assert!((omega - c(expect, 0.0)).norm() < 1e-12);
                        // Homomorphism law with the inferred cocycle.
                        let lhs = rep.unitary(g1).mul(&rep.unitary(g2));
                        let rhs = rep.unitary(g.mul(g1, g2)).scale(omega);
                        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_table_reports_offending_structure() {
        // Rows/columns are permutations but there is no identity.
        let mul = vec![vec![1, 0, 2], vec![0, 2, 1], vec![2, 1, 0]];
        let err = make_group(&GroupFile::Table { mul }).unwrap_err();
        let msg = format!("{err}");
        assert!(
            msg.contains("identity") || msg.contains("associativity"),
            "unexpected message: {msg}"
        );
    }

    #[test]
    fn cocycle_two_cocycle_identity() {
        let rep = hw_rep(3);
        let g = rep.group().clone();
        for a in g.elements() {
            for b in g.elements() {
                for k in g.elements() {
                    let lhs = rep.cocycle_val(a, b) * rep.cocycle_val(g.mul(a, b), k);
                    let rhs = rep.cocycle_val(b, k) * rep.cocycle_val(a, g.mul(b, k));
                    assert!((lhs - rhs).norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn rep_tensor_of_sign_reps() {
        let g = cyclic_group(2);
        let two = chars_rep(&g, &[0, 1]);
        let tt = rep_tensor(&[&two, &two]).unwrap();
        let f1 = tt.unitary(1);
        let expect = CMat::diag(&[C_ONE, c(-1.0, 0.0), c(-1.0, 0.0), C_ONE]);
        assert!(f1.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn rep_tensor_u1_binomial_multiplicities() {
        let g = Arc::new(make_group(&GroupFile::U1 { q: 64 }).unwrap());
        let base = make_rep(
            &g,
            &RepFile::U1modes {
                modes: vec![Mode { k: 0, mult: 1 }, Mode { k: 1, mult: 1 }],
            },
        )
        .unwrap();
        let t = rep_power(&base, 4).unwrap();
        let modes = t.modes().unwrap();
        let expect = [1usize, 4, 6, 4, 1];
        assert_eq!(modes.len(), 5);
        for (m, (k, e)) in modes.iter().zip((0i64..5).zip(expect)) {
            assert_eq!(m.k, k);
            assert_eq!(m.mult, e);
        }
    }

    #[test]
    fn rep_tensor_with_trivial_rep_is_identity_up_to_relabel() {
        let g = cyclic_group(2);
        let rep = chars_rep(&g, &[0, 1]);
        let trivial = chars_rep(&g, &[0]);
        let t = rep_tensor(&[&rep, &trivial]).unwrap();
        assert_eq!(t.dim(), rep.dim());
        for g in rep.group().elements() {
            assert!(t.unitary(g).sub(&rep.unitary(g)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rep_tensor_multiplies_cocycles() {
        let rep = hw_rep(2);
        let two = rep_power(&rep, 2).unwrap();
        let g = rep.group().clone();
        for a in g.elements() {
            for b in g.elements() {
                let expect = rep.cocycle_val(a, b) * rep.cocycle_val(a, b);
                assert!((two.cocycle_val(a, b) - expect).norm() <= 1e-10);
            }
        }
        // The square of the HW cocycle is trivial for d = 2.
        assert!(two.has_trivial_cocycle(1e-10));
    }

    #[test]
    fn rep_tensor_rejects_group_mismatch() {
        let a = z2_sign_rep();
        let b = chars_rep(&cyclic_group(3), &[0]);
        assert!(rep_tensor(&[&a, &b]).is_err());
    }

    #[test]
    fn choi_vector_examples() {
        let rep = z2_sign_rep();
        let v = choi_vector(&rep, 1).unwrap();
        let expect = [c(1.0, 0.0), C_ZERO, C_ZERO, c(-1.0, 0.0)];
        for (a, e) in v.vector.entries().iter().zip(expect) {
            assert!((a - e).norm() < 1e-14);
        }
        let e = choi_vector(&rep, 0).unwrap();
        assert!((e.vector.norm().powi(2) - rep.dim() as f64).abs() < 1e-12);
        assert!(choi_vector(&rep, 5).is_err());
    }

    #[test]
    fn choi_overlap_equals_trace_oracle() {
        let rep = dihedral3_defining();
        let g = rep.group().clone();
        for a in g.elements() {
            for b in g.elements() {
                let va = choi_vector(&rep, a).unwrap().vector;
                let vb = choi_vector(&rep, b).unwrap().vector;
                let lhs = va.dot(&vb);
                let tr = rep.unitary(a).dagger().mul(&rep.unitary(b)).trace();
                assert!((lhs - tr).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_average_examples() {
        let rep = z2_sign_rep();
        let avg = haar_average(rep.group(), |_| CMat::identity(3));
        assert!(avg.sub(&CMat::identity(3)).max_abs() < 1e-15);

        // Nontrivial character of Z_3 sums to zero: explicit 3-term sum.
        let rep3 = chars_rep(&cyclic_group(3), &[1]);
        let avg = haar_average(rep3.group(), |g| rep3.unitary(g));
        assert!(avg.max_abs() <= 1e-12);

        // U(1): nonzero mode integrates to zero on the grid.
        let gu = Arc::new(make_group(&GroupFile::U1 { q: 16 }).unwrap());
        let avg = haar_average(&gu, |t| {
            let theta = gu.theta(t);
            CMat::diag(&[Complex64::from_polar(1.0, 3.0 * theta)])
        });
        assert!(avg.max_abs() <= 1e-12);
    }

    #[test]
    fn haar_average_is_left_invariant() {
        let g = Arc::new(make_group(&GroupFile::Dihedral { n: 4 }).unwrap());
        let rep = make_rep(
            &g,
            &RepFile::Builtin {
                name: "defining".into(),
                d: None,
                ks: None,
            },
        )
        .unwrap();
        let base = haar_average(&g, |x| rep.unitary(x).scale(c(0.3, 0.1)));
        for g0 in g.elements() {
            let shifted = haar_average(&g, |x| rep.unitary(g.mul(g0, x)).scale(c(0.3, 0.1)));
            assert!(base.sub(&shifted).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn average_state_z2_diag() {
        let rep = z2_sign_rep();
        let rho = average_state(&rep);
        let expect = CMat::diag(&[C_ONE, C_ZERO, C_ZERO, C_ONE]);
        assert!(rho.sub(&expect).max_abs() <= 1e-12);
        assert!((rho.trace().re - rep.dim() as f64).abs() <= 1e-9);
    }

    #[test]
    fn average_state_trivial_group() {
        let g = cyclic_group(1);
        let rep = make_rep(
            &g,
            &RepFile::Matrices {
                unitaries: vec![vec![
                    vec![[1.0, 0.0], [0.0, 0.0]],
                    vec![[0.0, 0.0], [1.0, 0.0]],
                ]],
            },
        )
        .unwrap();
        let rho = average_state(&rep);
        let v = vectorize(&CMat::identity(2)).unwrap();
        assert!(rho.sub(&v.outer(&v)).max_abs() < 1e-12);
    }

    #[test]
    fn average_state_u1_rank_two() {
        let rep = u1_range_rep(1, 8);
        let rho = average_state(&rep);
        let (vals, _) = hermitian_eig(&rho).unwrap();
        let nonzero: Vec<f64> = vals.iter().copied().filter(|v| *v > 1e-9).collect();
        assert_eq!(nonzero.len(), 2);
        for v in nonzero {
            assert!((v - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn average_state_spectrum_is_action_invariant() {
        let rep = dihedral3_defining();
        let g = rep.group().clone();
        let rho = average_state(&rep);
        let eye = CMat::identity(rep.dim());
        for x in g.elements() {
            let u = crate::matcore::kron(&rep.unitary(x), &eye);
            let conj = u.mul(&rho).mul(&u.dagger());
            assert!(conj.sub(&rho).max_abs() <= 1e-9);
        }
    }

    #[test]
    fn u1_quadrature_guard() {
        let g = Arc::new(make_group(&GroupFile::U1 { q: 8 }).unwrap());
        let err = make_rep(
            &g,
            &RepFile::U1modes {
                modes: vec![Mode { k: 4, mult: 1 }],
            },
        );
        assert!(err.is_err(), "Q = 8 cannot host mode 4 (needs Q >= 17)");
        assert!(make_group(&GroupFile::U1 { q: 3 }).is_err());
    }

    #[test]
    fn non_unitary_matrices_are_rejected() {
        let g = cyclic_group(2);
        let err = make_rep(
            &g,
            &RepFile::Matrices {
                unitaries: vec![
                    vec![vec![[1.0, 0.0]]],
                    vec![vec![[0.5, 0.0]]], // not unit modulus
                ],
            },
        );
        assert!(matches!(err, Err(Error::Validation(_))));

        // A unitary family that is not a projective representation.
        let err = make_rep(
            &g,
            &RepFile::Matrices {
                unitaries: vec![
                    vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]],
                    // f(1)² = diag(1, i·i = -1)·... this Hadamard-like
                    // matrix squares to a non-phase multiple of f(0).
                    vec![
                        vec![[0.70710678118654752, 0.0], [0.70710678118654752, 0.0]],
                        vec![[0.0, 0.70710678118654752], [0.0, -0.70710678118654752]],
                    ],
                ],
            },
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
