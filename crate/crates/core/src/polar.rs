//! su(2) from the two quon modes: the polar pieces `H` and `U_r`, the
//! Schwinger restriction to `|j m⟩`, the ladder operators, the `U_r`
//! eigenbasis `B_r`, and the `T_(m1,m2)` generators of W∞.
//!
//! `U_r` is assembled from its defining two-bracket product of quon
//! operators and only afterwards compared with the cyclic shift it is
//! supposed to be; nothing here hard-codes the permutation.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    build_quon_reps, commutator, creal, frobenius, json_rows, CMatrix, CVector, FockSpace, Operator, Space,
};
use crate::qarith::{
    exact_rational, q_factorial, root_of_unity, Amplitude, HalfInt, ToleranceRule, UnitPhase, MAX_EXACT_DENOMINATOR,
};
use crate::report::{serialize_real, serialize_reals, JsonComplex, VerificationReport};

/// Columns leaking more than this out of the `n1 + n2 = k - 1` block are rejected.
pub const LEAKAGE_TOL: f64 = 1e-12;

/// The real basis label `r`, with its exact rational form when it has one.
///
/// Phases built from an `r` with a rational form are exact turns; others go
/// through floating point. Equality is bitwise on the float.
#[derive(Clone, Copy, Debug)]
pub struct RParam {
    value: f64,
    ratio: Option<(i64, u64)>,
}

impl RParam {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("r must be finite, got {value}")));
        }
        Ok(RParam { value, ratio: exact_rational(value, MAX_EXACT_DENOMINATOR) })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn ratio(self) -> Option<(i64, u64)> {
        self.ratio
    }

    /// `α = -j·r + s`.
    pub fn alpha(self, j: HalfInt, s: u32) -> f64 {
        -j.value() * self.value + f64::from(s)
    }

    /// `exp(2πi · (c·r + b) / den)` for integers `c`, `b`.
    fn turn(self, c: i64, b: i64, den: u64) -> Amplitude {
        match self.ratio {
            Some((p, d)) => {
                let num = i128::from(c) * i128::from(p) + i128::from(b) * i128::from(d);
                let den = u128::from(den) * u128::from(d);
                let g = gcd_u128(num.unsigned_abs(), den);
                let (num, den) = (num / g as i128, den / g);
                UnitPhase::new(num.rem_euclid(den as i128) as i64, den as u64)
                    .expect("nonzero denominator")
                    .to_amplitude()
            }
            None => {
                let t = ((c as f64) * self.value + b as f64) / den as f64;
                let t = t - t.round();
                Amplitude::from_polar(1.0, 2.0 * PI * t)
            }
        }
    }
}

impl PartialEq for RParam {
    fn eq(&self, other: &Self) -> bool {
        self.value.to_bits() == other.value.to_bits()
    }
}

impl Eq for RParam {}

impl std::hash::Hash for RParam {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.value.to_bits().hash(state);
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// `q_j^{sign · α_s · m}` with `q_j = exp(2πi/(2j+1))` and `α_s = -j·r + s`.
///
/// Also fine for `j = 0`, where it is identically 1.
pub fn alpha_phase(j: HalfInt, s: u32, m: HalfInt, r: RParam, sign: i64) -> Amplitude {
    // α m / (2j+1) = (-2j·r + 2s)·2m / (4(2j+1))
    let tj = i64::from(j.twice());
    let tm = i64::from(m.twice()) * sign;
    r.turn(-tj * tm, 2 * i64::from(s) * tm, 4 * (tj as u64 + 1))
}

/// `⟨j m | j α_s; r⟩ = q^{α_s m} / √(2j+1)`, rows `m` ascending, columns `s`.
pub fn transform_matrix(j: HalfInt, r: RParam) -> CMatrix {
    let n = j.dim();
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |row, s| {
        let m = HalfInt::from_twice(-j.twice() + 2 * row as i32);
        alpha_phase(j, s as u32, m, r, 1) * norm
    })
}

/// `k`, `r` and `φ_r = π(k-1)r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UrParams {
    k: u32,
    r: RParam,
    phi_r: f64,
}

impl UrParams {
    pub fn new(k: u32, r: f64) -> Result<Self> {
        root_of_unity(k)?;
        let r = RParam::new(r)?;
        Ok(UrParams { k, r, phi_r: PI * f64::from(k - 1) * r.value() })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> RParam {
        self.r
    }

    pub fn phi_r(&self) -> f64 {
        self.phi_r
    }

    pub fn j(&self) -> HalfInt {
        HalfInt::from_twice(self.k as i32 - 1)
    }

    /// `exp(i φ_r)`.
    pub fn wrap_phase(&self) -> Amplitude {
        // φ_r / 2π = (k-1) r / 2
        self.r.turn(i64::from(self.k - 1), 0, 2)
    }

    /// `exp(i φ_r / 2)`.
    pub fn half_wrap_phase(&self) -> Amplitude {
        self.r.turn(i64::from(self.k - 1), 0, 4)
    }
}

/// `|j m⟩` with `2j = k − 1`, embedded in the Fock space via `n1 = j+m`, `n2 = j−m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngularSpace {
    j: HalfInt,
}

impl AngularSpace {
    pub fn for_order(k: u32) -> Result<Self> {
        root_of_unity(k)?;
        Ok(AngularSpace { j: HalfInt::from_twice(k as i32 - 1) })
    }

    pub fn j(self) -> HalfInt {
        self.j
    }

    pub fn dim(self) -> usize {
        self.j.dim()
    }

    pub fn k(self) -> u32 {
        self.j.twice() as u32 + 1
    }

    pub fn space(self) -> Space {
        Space::Angular { j: self.j }
    }

    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        self.j.projections()
    }

    /// Fock index of `|j m⟩`.
    pub fn fock_index(self, m: HalfInt) -> usize {
        let tj = self.j.twice();
        let n1 = ((tj + m.twice()) / 2) as u32;
        let n2 = ((tj - m.twice()) / 2) as u32;
        FockSpace::new(self.k()).expect("k >= 2").index(n1, n2)
    }
}

/// `H = √(N1 (N2 + 1))`, diagonal on the Fock space.
pub fn build_h(k: u32) -> Result<Operator> {
    let space = FockSpace::new(k)?;
    Operator::diagonal(space.space(), space.basis().map(|(n1, n2)| creal((f64::from(n1) * f64::from(n2 + 1)).sqrt())))
}

/// `U_r = [a1+ + e^{iφ_r/2}(a1-)^{k-1}/[k-1]_q!] [a2- + e^{iφ_r/2}(a2+)^{k-1}/[k-1]_q!]`.
pub fn build_ur(params: &UrParams) -> Result<Operator> {
    let k = params.k();
    let ops = build_quon_reps(k)?;
    let fact = q_factorial(k - 1, k)?.invertible(k - 1, k)?;
    let c = params.half_wrap_phase() / fact;
    let b1 = &ops.a1_plus + &ops.a1_minus.pow(k - 1).scale(c);
    let b2 = &ops.a2_minus + &ops.a2_plus.pow(k - 1).scale(c);
    Ok(b1 * b2)
}

/// Restricts a Fock operator to the `n1 + n2 = k − 1` block, in `|j m⟩` order.
pub fn restrict_to_angular(x: &Operator, k: u32) -> Result<Operator> {
    let fock = FockSpace::new(k)?;
    if x.space() != fock.space() {
        return Err(Error::SpaceMismatch { left: x.space().to_string(), right: fock.space().to_string() });
    }
    let ang = AngularSpace::for_order(k)?;
    let inside: Vec<usize> = ang.projections().map(|m| ang.fock_index(m)).collect();
    let subspace = (k - 1) as usize;
    for &col in &inside {
        let leak: f64 = (0..fock.dim())
            .filter(|row| !inside.contains(row))
            .map(|row| x.entry(row, col).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if leak > LEAKAGE_TOL {
            return Err(Error::SubspaceLeakage { subspace, weight: leak });
        }
    }
    let n = inside.len();
    let m = CMatrix::from_fn(n, n, |i, j| x.entry(inside[i], inside[j]));
    Operator::new(ang.space(), m)
}

/// Everything built from one `(k, r)`.
#[derive(Clone, Debug)]
pub struct PolarOps {
    pub params: UrParams,
    /// On the Fock space.
    pub h: Operator,
    /// On the Fock space.
    pub ur: Operator,
    pub h_ang: Operator,
    pub ur_ang: Operator,
    pub j_plus: Operator,
    pub j_minus: Operator,
    pub j3: Operator,
}

impl PolarOps {
    /// `J² = (J+J- + J-J+)/2 + J3²`.
    pub fn casimir(&self) -> Operator {
        let half = creal(0.5);
        (&self.j_plus * &self.j_minus + &self.j_minus * &self.j_plus).scale(half) + &self.j3 * &self.j3
    }
}

/// `J+ = H U_r`, `J- = U_r† H`, `J3 = (N1 − N2)/2`, restricted to `|j m⟩`.
pub fn build_j(params: &UrParams) -> Result<PolarOps> {
    let k = params.k();
    let h = build_h(k)?;
    let ur = build_ur(params)?;
    let ops = build_quon_reps(k)?;
    let j3_fock = (&ops.n1 - &ops.n2).scale(creal(0.5));
    let j_plus = restrict_to_angular(&(&h * &ur), k)?;
    let j_minus = restrict_to_angular(&(ur.adjoint() * &h), k)?;
    let j3 = restrict_to_angular(&j3_fock, k)?;
    Ok(PolarOps {
        params: *params,
        h_ang: restrict_to_angular(&h, k)?,
        ur_ang: restrict_to_angular(&ur, k)?,
        h,
        ur,
        j_plus,
        j_minus,
        j3,
    })
}

/// `J±|jm⟩ = √((j∓m)(j±m+1)) |j, m±1⟩` written out directly.
pub fn ladder_reference(j: HalfInt) -> (CMatrix, CMatrix) {
    let n = j.dim();
    let jv = j.value();
    let mut plus = CMatrix::zeros(n, n);
    let mut minus = CMatrix::zeros(n, n);
    for (i, m) in j.projections().enumerate() {
        let m = m.value();
        if i + 1 < n {
            plus[(i + 1, i)] = creal(((jv - m) * (jv + m + 1.0)).sqrt());
        }
        if i >= 1 {
            minus[(i - 1, i)] = creal(((jv + m) * (jv - m + 1.0)).sqrt());
        }
    }
    (plus, minus)
}

/// `r` values whose `U_s` must fail to commute with `U_r`: shifts of φ by π and π/2.
pub fn default_s_samples(params: &UrParams) -> Vec<f64> {
    let k1 = f64::from(params.k() - 1);
    let r = params.r().value();
    vec![r + 1.0 / k1, r + 0.5 / k1]
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Every polar-decomposition identity for one `(k, r)`; `s_samples` feed the
/// non-commutation check and are skipped when `e^{iφ_s} = e^{iφ_r}`.
pub fn verify_su2(params: &UrParams, tol: ToleranceRule, s_samples: &[f64]) -> Result<VerificationReport> {
    let k = params.k();
    let t = tol.threshold(1.0);
    let mut rep = VerificationReport::new("su2", Some(k), Some(params.r().value()));
    let ops = build_j(params)?;
    let fock = FockSpace::new(k)?;

    // shift action and wrap, column by column on the full Fock space
    let mut shift = 0.0f64;
    for (n1, n2) in fock.basis().filter(|&(n1, n2)| n1 != k - 1 && n2 != 0) {
        let out = ops.ur.apply(&fock.basis_vector(n1, n2)) - fock.basis_vector(n1 + 1, n2 - 1);
        shift = shift.max(out.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    rep.check("ur_shift_action", shift, t);
    let wrapped =
        ops.ur.apply(&fock.basis_vector(k - 1, 0)) - fock.basis_vector(0, k - 1).map(|z| z * params.wrap_phase());
    rep.check("ur_wrap_action", wrapped.iter().map(|z| z.norm()).fold(0.0, f64::max), t);

    rep.check("ur_unitary", ops.ur.unitarity_defect(), t);
    rep.check("h_hermitean", ops.h.hermiticity_defect(), t);

    let comm = |x: &Operator, y: &Operator| commutator(x, y).expect("angular operators");
    rep.check("j3_jplus", (comm(&ops.j3, &ops.j_plus) - &ops.j_plus).norm(), t);
    rep.check("j3_jminus", (comm(&ops.j3, &ops.j_minus) + &ops.j_minus).norm(), t);
    rep.check("jplus_jminus", (comm(&ops.j_plus, &ops.j_minus) - ops.j3.scale(creal(2.0))).norm(), t);
    let (plus_ref, minus_ref) = ladder_reference(params.j());
    rep.check(
        "ladder_action",
        max_entry(&(ops.j_plus.matrix() - &plus_ref)).max(max_entry(&(ops.j_minus.matrix() - &minus_ref))),
        t,
    );

    let casimir = ops.casimir();
    let polar_form = &ops.h_ang * &ops.h_ang + &ops.j3 * &ops.j3 - &ops.j3;
    rep.check("casimir_polar_form", (&casimir - &polar_form).norm(), t);
    let jj1 = params.j().value() * (params.j().value() + 1.0);
    let scalar = Operator::identity(casimir.space()).scale(creal(jj1));
    rep.check("casimir_scalar", (&casimir - &scalar).norm(), t);
    rep.check("casimir_commutes_ur", comm(&casimir, &ops.ur_ang).norm(), t);

    let cyc = ops.ur_ang.pow(k) - Operator::identity(ops.ur_ang.space()).scale(params.wrap_phase());
    rep.check("ur_cyclicity", cyc.norm(), t);
    rep.check("ur_unitary_angular", ops.ur_ang.unitarity_defect(), t);

    for &s in s_samples {
        let other = UrParams::new(k, s)?;
        if (other.wrap_phase() - params.wrap_phase()).norm() <= 1e-9 {
            continue;
        }
        let us = restrict_to_angular(&build_ur(&other)?, k)?;
        rep.check_exceeds(format!("ur_us_noncommuting(s={s})"), comm(&ops.ur_ang, &us).norm(), t);
    }
    Ok(rep)
}

/// The `U_r` eigenbasis `|j α; r⟩ = (2j+1)^{-1/2} Σ_m q^{αm} |j m⟩`.
#[derive(Clone, Debug)]
pub struct UrBasis {
    pub j: HalfInt,
    pub r: RParam,
    /// `α_s = -j r + s`, `s = 0 … 2j`.
    pub alphas: Vec<f64>,
    /// Rows `m`, columns `s`.
    pub transform: CMatrix,
    /// `q^{-α_s}`.
    pub eigenvalues: Vec<Amplitude>,
}

/// Builds `B_r` analytically. `j = 0` is rejected.
pub fn ur_eigenbasis(j: HalfInt, r: f64) -> Result<UrBasis> {
    if j.twice() == 0 {
        return Err(Error::UnsupportedLimit);
    }
    if j.is_negative() {
        return Err(Error::InvalidArgument(format!("negative j = {j}")));
    }
    let r = RParam::new(r)?;
    let n = j.dim() as u32;
    Ok(UrBasis {
        j,
        r,
        alphas: (0..n).map(|s| r.alpha(j, s)).collect(),
        transform: transform_matrix(j, r),
        eigenvalues: (0..n).map(|s| alpha_phase(j, s, HalfInt::from_int(-1), r, 1)).collect(),
    })
}

impl UrBasis {
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn vector(&self, s: usize) -> CVector {
        self.transform.column(s).into_owned()
    }

    /// The inverse expansion `|jm⟩ = (2j+1)^{-1/2} Σ_α q^{-αm} |jα;r⟩`, rows `s`, columns `m`.
    pub fn inverse(&self) -> CMatrix {
        let n = self.dim();
        let norm = 1.0 / (n as f64).sqrt();
        CMatrix::from_fn(n, n, |s, row| {
            let m = HalfInt::from_twice(-self.j.twice() + 2 * row as i32);
            alpha_phase(self.j, s as u32, m, self.r, -1) * norm
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&UrBasisJson::from(self)).expect("basis serialization")
    }
}

#[derive(Serialize)]
struct UrBasisJson {
    j: String,
    #[serde(serialize_with = "serialize_real")]
    r: f64,
    #[serde(serialize_with = "serialize_reals")]
    alphas: Vec<f64>,
    eigenvalues: Vec<JsonComplex>,
    transform: Vec<Vec<JsonComplex>>,
}

impl From<&UrBasis> for UrBasisJson {
    fn from(b: &UrBasis) -> Self {
        UrBasisJson {
            j: format!("{}/2", b.j.twice()),
            r: b.r.value(),
            alphas: b.alphas.clone(),
            eigenvalues: b.eigenvalues.iter().map(|z| JsonComplex::from(*z)).collect(),
            transform: json_rows(&b.transform),
        }
    }
}

/// Eigenvalues of a general complex matrix from its Schur form.
///
/// The unshifted QR sweep can stall on exact phased permutations, so when
/// the bounded iteration fails the matrix is first rotated by a fixed dense
/// unitary, which leaves the spectrum unchanged.
pub fn generic_spectrum(m: &CMatrix) -> Vec<Amplitude> {
    const MAX_SWEEPS: usize = 10_000;
    let diagonal = |t: CMatrix| (0..t.nrows()).map(|i| t[(i, i)]).collect();
    if let Some(schur) = m.clone().try_schur(f64::EPSILON, MAX_SWEEPS) {
        return diagonal(schur.unpack().1);
    }
    let n = m.nrows();
    let seed = CMatrix::from_fn(n, n, |i, j| {
        let (i, j) = (i as f64, j as f64);
        Amplitude::new((1.0 + 7.0 * i + 3.0 * j).sin(), (2.0 + 5.0 * i + j).cos())
    });
    let q = seed.qr().q();
    let rotated = q.adjoint() * m * &q;
    let schur = rotated.try_schur(f64::EPSILON, MAX_SWEEPS).expect("rotated Schur iteration converges");
    diagonal(schur.unpack().1)
}

/// Largest distance in a greedy matching of two equal-size multisets.
fn multiset_distance(a: &[Amplitude], b: &[Amplitude]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (best, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[best] = true;
        worst = worst.max(d);
    }
    worst
}

/// Spectrum of `U_r` on `|j m⟩` against the analytic `B_r` basis.
pub fn verify_ur_basis(params: &UrParams, tol: ToleranceRule) -> Result<VerificationReport> {
    let t = tol.threshold(1.0);
    let mut rep = VerificationReport::new("basis", Some(params.k()), Some(params.r().value()));
    let ops = build_j(params)?;
    let basis = ur_eigenbasis(params.j(), params.r().value())?;
    let n = basis.dim();

    let mut eig = 0.0f64;
    for s in 0..n {
        let v = basis.vector(s);
        let res = ops.ur_ang.apply(&v) - v.map(|z| z * basis.eigenvalues[s]);
        eig = eig.max(res.norm());
    }
    rep.check("eigenvectors", eig, t);

    let casimir = ops.casimir();
    let jj1 = params.j().value() * (params.j().value() + 1.0);
    let mut cas = 0.0f64;
    for s in 0..n {
        let v = basis.vector(s);
        cas = cas.max((casimir.apply(&v) - v.map(|z| z * jj1)).norm());
    }
    rep.check("casimir_eigenvalue", cas, t);

    let mut gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            gap = gap.min((basis.eigenvalues[a] - basis.eigenvalues[b]).norm());
        }
    }
    if n == 1 {
        gap = 1.0;
    }
    rep.check_exceeds("eigenvalues_distinct", gap, t);

    let id = CMatrix::identity(n, n);
    let w = &basis.transform;
    rep.check("transform_unitary", frobenius(&(w.adjoint() * w - &id)), t);
    rep.check("inverse_expansion", frobenius(&(basis.inverse() - w.adjoint())), t);

    let generic = generic_spectrum(ops.ur_ang.matrix());
    rep.check("generic_eigensolver", multiset_distance(&basis.eigenvalues, &generic), t);

    // e^{iφ_r} = exp(-2πi α_0) with α_0 = -j r
    let alpha0 = Amplitude::from_polar(1.0, -2.0 * PI * basis.alphas[0]);
    rep.check("wrap_phase_consistency", (params.wrap_phase() - alpha0).norm(), t);
    Ok(rep)
}

/// `T_(m1,m2) = q^{m1 m2} U^{m1} V^{m2}` on `|j m⟩`, with `V = q^{N1 − N2}`.
pub fn w_infinity_t(params: &UrParams, m1: i32, m2: i32) -> Result<Operator> {
    let k = params.k();
    let q = root_of_unity(k)?;
    let u = restrict_to_angular(&build_ur(params)?, k)?;
    // V is diagonal: q^{n1 - n2} on each Fock state
    let fock = FockSpace::new(k)?;
    let v_fock = Operator::diagonal(
        fock.space(),
        fock.basis().map(|(n1, n2)| q.pow(i64::from(n1) - i64::from(n2)).to_amplitude()),
    )?;
    let v = restrict_to_angular(&v_fock, k)?;
    let power = |x: &Operator, e: i32| {
        if e >= 0 {
            x.pow(e as u32)
        } else {
            x.adjoint().pow(e.unsigned_abs())
        }
    };
    let prefactor = q.pow(i64::from(m1) * i64::from(m2)).to_amplitude();
    Ok((power(&u, m1) * power(&v, m2)).scale(prefactor))
}

/// `[T_m, T_n] = −2i sin((2π/k) m×n) T_{m+n}` for all `m, n` in `range²`.
pub fn verify_w_infinity(
    params: &UrParams,
    range: RangeInclusive<i32>,
    tol: ToleranceRule,
) -> Result<VerificationReport> {
    let k = params.k();
    let mut rep = VerificationReport::new("winf", Some(k), Some(params.r().value()));
    let idx: Vec<(i32, i32)> = range.clone().flat_map(|a| range.clone().map(move |b| (a, b))).collect();
    let mut cache = std::collections::HashMap::new();
    let mut get = |a: i32, b: i32| -> Result<Operator> {
        if let Some(op) = cache.get(&(a, b)) {
            return Ok(Operator::clone(op));
        }
        let op = w_infinity_t(params, a, b)?;
        cache.insert((a, b), op.clone());
        Ok(op)
    };
    let mut worst = 0.0f64;
    for &(m1, m2) in &idx {
        for &(n1, n2) in &idx {
            let tm = get(m1, m2)?;
            let tn = get(n1, n2)?;
            let sum = get(m1 + n1, m2 + n2)?;
            let cross = i64::from(m1) * i64::from(n2) - i64::from(m2) * i64::from(n1);
            let angle = 2.0 * PI * (cross.rem_euclid(i64::from(k)) as f64) / f64::from(k);
            let coeff = Amplitude::new(0.0, -2.0 * angle.sin());
            let lhs = commutator(&tm, &tn)?;
            worst = worst.max((lhs - sum.scale(coeff)).norm());
        }
    }
    rep.check("commutator_identity", worst, tol.threshold(1.0));
    Ok(rep)
}
