//! The k²-dimensional Fock space of two commuting quon modes and the dense
//! operator algebra everything else is built on.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qarith::{q_bracket, root_of_unity, Amplitude, HalfInt, ToleranceRule};
use crate::report::{format_complex, JsonComplex, VerificationReport};

pub type CMatrix = DMatrix<Amplitude>;
pub type CVector = DVector<Amplitude>;

pub(crate) fn czero() -> Amplitude {
    Amplitude::new(0.0, 0.0)
}

pub(crate) fn cone() -> Amplitude {
    Amplitude::new(1.0, 0.0)
}

pub(crate) fn creal(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

/// Frobenius norm; an upper bound on the operator 2-norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Basis a matrix is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `|n1 n2)` with `n_i ∈ 0..k`, lexicographic in `(n1, n2)`.
    Fock { k: u32 },
    /// `|j m⟩` with `m = -j … j` ascending.
    Angular { j: HalfInt },
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Fock { k } => (k * k) as usize,
            Space::Angular { j } => j.dim(),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Fock { k } => write!(f, "Fock(k={k})"),
            Space::Angular { j } => write!(f, "Angular(j={j})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    k: u32,
}

impl FockSpace {
    pub fn new(k: u32) -> Result<Self> {
        root_of_unity(k)?;
        Ok(FockSpace { k })
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn dim(self) -> usize {
        (self.k * self.k) as usize
    }

    pub fn index(self, n1: u32, n2: u32) -> usize {
        debug_assert!(n1 < self.k && n2 < self.k);
        (n1 * self.k + n2) as usize
    }

    pub fn state(self, index: usize) -> (u32, u32) {
        let i = index as u32;
        (i / self.k, i % self.k)
    }

    pub fn basis(self) -> impl Iterator<Item = (u32, u32)> {
        let k = self.k;
        (0..k).flat_map(move |n1| (0..k).map(move |n2| (n1, n2)))
    }

    pub fn basis_vector(self, n1: u32, n2: u32) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.index(n1, n2)] = cone();
        v
    }

    pub fn space(self) -> Space {
        Space::Fock { k: self.k }
    }
}

/// Square matrix tied to the basis it acts on.
///
/// The arithmetic operators panic on mismatched spaces; [`commutator`] and
/// [`Operator::new`] report the mismatch as an error instead.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Space,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: Space, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix on {space} (dimension {n})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { space, matrix })
    }

    pub fn zeros(space: Space) -> Self {
        let n = space.dim();
        Operator { space, matrix: CMatrix::zeros(n, n) }
    }

    pub fn identity(space: Space) -> Self {
        let n = space.dim();
        Operator { space, matrix: CMatrix::identity(n, n) }
    }

    pub fn diagonal(space: Space, entries: impl IntoIterator<Item = Amplitude>) -> Result<Self> {
        let d = CVector::from_iterator(space.dim(), entries);
        Self::new(space, CMatrix::from_diagonal(&d))
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: Amplitude) -> Operator {
        Operator { space: self.space, matrix: self.matrix.map(|z| z * c) }
    }

    pub fn pow(&self, n: u32) -> Operator {
        let mut acc = Operator::identity(self.space);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// `‖X†X − 1‖`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * self - Operator::identity(self.space)).norm()
    }

    /// `‖X − X†‖`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { left: self.space.to_string(), right: other.space.to_string() })
        }
    }

    /// Rows as `re+imi` CSV, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows of `{re, im}` objects.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&json_rows(&self.matrix)).expect("matrix serialization")
    }
}

pub(crate) fn json_rows(m: &CMatrix) -> Vec<Vec<JsonComplex>> {
    m.row_iter().map(|row| row.iter().map(|z| JsonComplex::from(*z)).collect()).collect()
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.space, rhs.space, "operator space mismatch");
                Operator { space: self.space, matrix: &self.matrix $op &rhs.matrix }
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                &self $op &rhs
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                &self $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

/// `XY − YX`.
pub fn commutator(x: &Operator, y: &Operator) -> Result<Operator> {
    x.same_space(y)?;
    Ok(x * y - y * x)
}

/// Matrix representation of the two commuting quon algebras on `FockSpace(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuonReps {
    pub space: FockSpace,
    pub a1_plus: Operator,
    pub a1_minus: Operator,
    pub a2_plus: Operator,
    pub a2_minus: Operator,
    pub n1: Operator,
    pub n2: Operator,
}

impl QuonReps {
    pub fn k(&self) -> u32 {
        self.space.k()
    }

    pub fn mode1(&self) -> [&Operator; 3] {
        [&self.a1_plus, &self.a1_minus, &self.n1]
    }

    pub fn mode2(&self) -> [&Operator; 3] {
        [&self.a2_plus, &self.a2_minus, &self.n2]
    }
}

/// Lifts a single-mode k×k matrix to the Fock space, acting on mode 1 or mode 2.
pub(crate) fn lift(single: &CMatrix, mode: u8, space: FockSpace) -> Operator {
    let k = space.k() as usize;
    let id = CMatrix::identity(k, k);
    let matrix = match mode {
        1 => single.kronecker(&id),
        _ => id.kronecker(single),
    };
    Operator { space: space.space(), matrix }
}

/// The displayed Fock representation of `A_1` and `A_2`:
/// `a1+|n) = |n+1)`, `a1-|n) = [n]_q|n-1)`, `a2+|n) = [n+1]_q|n+1)`,
/// `a2-|n) = |n-1)`, `N_i|n) = n|n)`, truncated at `n = k-1` and `n = 0`.
pub fn build_quon_reps(k: u32) -> Result<QuonReps> {
    let space = FockSpace::new(k)?;
    let n = k as usize;
    let mut raise = CMatrix::zeros(n, n);
    let mut lower_q = CMatrix::zeros(n, n);
    let mut raise_q = CMatrix::zeros(n, n);
    let mut lower = CMatrix::zeros(n, n);
    let mut number = CMatrix::zeros(n, n);
    for i in 0..n {
        number[(i, i)] = creal(i as f64);
        if i + 1 < n {
            raise[(i + 1, i)] = cone();
            raise_q[(i + 1, i)] = q_bracket((i + 1) as f64, k)?;
        }
        if i >= 1 {
            lower_q[(i - 1, i)] = q_bracket(i as f64, k)?;
            lower[(i - 1, i)] = cone();
        }
    }
    Ok(QuonReps {
        space,
        a1_plus: lift(&raise, 1, space),
        a1_minus: lift(&lower_q, 1, space),
        a2_plus: lift(&raise_q, 2, space),
        a2_minus: lift(&lower, 2, space),
        n1: lift(&number, 1, space),
        n2: lift(&number, 2, space),
    })
}

/// Residual norms of the quon relations, nilpotency and mode independence.
pub fn verify_quon_relations(ops: &QuonReps, tol: ToleranceRule) -> VerificationReport {
    let k = ops.k();
    let mut report = VerificationReport::new("quon", Some(k), None);
    let t = tol.threshold(1.0);
    let q = root_of_unity(k).expect("validated order").to_amplitude();
    let id = Operator::identity(ops.space.space());
    let comm = |x: &Operator, y: &Operator| commutator(x, y).expect("same Fock space");

    for (label, plus, minus, number) in
        [("mode1", &ops.a1_plus, &ops.a1_minus, &ops.n1), ("mode2", &ops.a2_plus, &ops.a2_minus, &ops.n2)]
    {
        let quon = minus * plus - (plus * minus).scale(q) - &id;
        report.check(format!("quon_relation_{label}"), quon.norm(), t);
        report.check(format!("number_raise_{label}"), (comm(number, plus) - plus).norm(), t);
        report.check(format!("number_lower_{label}"), (comm(number, minus) + minus).norm(), t);
        report.check(format!("nilpotent_plus_{label}"), plus.pow(k).norm(), t);
        report.check(format!("nilpotent_minus_{label}"), minus.pow(k).norm(), t);
    }

    let mut cross = 0.0f64;
    for x in ops.mode1() {
        for y in ops.mode2() {
            cross = cross.max(comm(x, y).norm());
        }
    }
    report.check("modes_commute", cross, t);
    report
}

/// Fock-space matrices of the representation, for dumps.
#[derive(Serialize)]
pub struct QuonDump {
    pub k: u32,
    pub a1_plus: Vec<Vec<JsonComplex>>,
    pub a1_minus: Vec<Vec<JsonComplex>>,
    pub a2_plus: Vec<Vec<JsonComplex>>,
    pub a2_minus: Vec<Vec<JsonComplex>>,
}

impl From<&QuonReps> for QuonDump {
    fn from(ops: &QuonReps) -> Self {
        QuonDump {
            k: ops.k(),
            a1_plus: json_rows(ops.a1_plus.matrix()),
            a1_minus: json_rows(ops.a1_minus.matrix()),
            a2_plus: json_rows(ops.a2_plus.matrix()),
            a2_minus: json_rows(ops.a2_minus.matrix()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_zero(v: &CVector) -> bool {
        v.iter().all(|z| *z == czero())
    }

    #[test]
    fn fock_indexing() {
        let f = FockSpace::new(4).unwrap();
        assert_eq!(f.dim(), 16);
        for (i, (n1, n2)) in f.basis().enumerate() {
            assert_eq!(f.index(n1, n2), i);
            assert_eq!(f.state(i), (n1, n2));
        }
        assert!(FockSpace::new(1).is_err());
    }

    #[test]
    fn truncations() {
        for k in 2..7 {
            let ops = build_quon_reps(k).unwrap();
            let f = ops.space;
            for n in 0..k {
                assert!(is_zero(&ops.a1_plus.apply(&f.basis_vector(k - 1, n))));
                assert!(is_zero(&ops.a2_minus.apply(&f.basis_vector(n, 0))));
                assert!(is_zero(&ops.a1_minus.apply(&f.basis_vector(0, n))));
                assert!(is_zero(&ops.a2_plus.apply(&f.basis_vector(n, k - 1))));
            }
        }
    }

    #[test]
    fn lowering_mode1_at_k3() {
        let ops = build_quon_reps(3).unwrap();
        let f = ops.space;
        let bracket2 = cone() + root_of_unity(3).unwrap().to_amplitude();
        for n2 in 0..3 {
            let out = ops.a1_minus.apply(&f.basis_vector(2, n2));
            let expected = f.basis_vector(1, n2).map(|z| z * bracket2);
            assert!((out - expected).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn commutators() {
        let ops = build_quon_reps(4).unwrap();
        assert_eq!(commutator(&ops.a1_plus, &ops.a1_plus).unwrap().norm(), 0.0);
        let c = commutator(&ops.n1, &ops.a1_plus).unwrap();
        assert!((c - &ops.a1_plus).norm() < 1e-14);
        assert_eq!(commutator(&ops.a1_plus, &ops.a2_plus).unwrap().norm(), 0.0);
        let other = Operator::identity(Space::Angular { j: HalfInt::ONE });
        assert!(matches!(commutator(&ops.n1, &other), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn modes_commute_exactly() {
        for k in 2..6 {
            let ops = build_quon_reps(k).unwrap();
            for x in ops.mode1() {
                for y in ops.mode2() {
                    assert!(commutator(x, y).unwrap().matrix().iter().all(|z| *z == czero()));
                }
            }
        }
    }

    #[test]
    fn nilpotency_index_is_k() {
        for k in 2..8 {
            let ops = build_quon_reps(k).unwrap();
            for a in [&ops.a1_plus, &ops.a1_minus, &ops.a2_plus, &ops.a2_minus] {
                assert!(a.pow(k - 1).norm() > 0.5);
                assert_eq!(a.pow(k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn number_spectra() {
        let k = 5;
        let ops = build_quon_reps(k).unwrap();
        for number in [&ops.n1, &ops.n2] {
            let mut counts = vec![0; k as usize];
            for i in 0..number.dim() {
                let v = number.entry(i, i);
                assert_eq!(v.im, 0.0);
                counts[v.re as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == k));
        }
    }

    #[test]
    fn relations_hold() {
        for k in [2, 5] {
            let rep = verify_quon_relations(&build_quon_reps(k).unwrap(), ToleranceRule::uniform(1e-12).unwrap());
            assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn negative_control_flags_quon_relation() {
        let mut ops = build_quon_reps(4).unwrap();
        ops.a1_plus = ops.a1_plus.adjoint();
        let rep = verify_quon_relations(&ops, ToleranceRule::uniform(1e-12).unwrap());
        assert!(!rep.get("quon_relation_mode1").unwrap().pass);
        assert!(rep.get("quon_relation_mode2").unwrap().pass);
    }

    #[test]
    fn adjoint_involution() {
        let ops = build_quon_reps(3).unwrap();
        assert_eq!(ops.a1_minus.adjoint().adjoint(), ops.a1_minus);
    }

    #[test]
    fn dumps() {
        let ops = build_quon_reps(2).unwrap();
        let csv = ops.a1_plus.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 4);
        let v: serde_json::Value = serde_json::from_str(&ops.n1.to_json()).unwrap();
        assert_eq!(v[2][2]["re"], 1.0);
    }
}
