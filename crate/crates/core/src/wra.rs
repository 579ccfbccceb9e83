//! Coupling coefficients in the `{J², U_r}` scheme.
//!
//! Every symbol here is a phase-weighted sum of standard Condon–Shortley
//! coefficients, with one `(2j+1)`-point transform per angular momentum:
//! `⟨j m | j α; r⟩ = q_j^{α m} / √(2j+1)`, `q_j = exp(2πi/(2j+1))`,
//! `α = −j r + s`, `s = 0 … 2j`. All `α`-sums run over each `j`'s own
//! `2j+1` labels and use one `r` throughout.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{cone, creal, czero, frobenius, CMatrix};
use crate::polar::{alpha_phase, transform_matrix, PolarOps, RParam};
use crate::qarith::{Amplitude, HalfInt};
use crate::report::{serialize_real, JsonComplex, VerificationReport};
use crate::wigner::{global_table, ninej, triangle, NineJArgs};

/// Which `{J², U_r}` symbol a key refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UrVariant {
    CgUr,
    F,
    Fbar,
}

/// Memo key: twice-`j`s, `α`-indices and the bit pattern of `r`.
///
/// For `CgUr` the slots are `(j1, j2, j)` and `(s1, s2, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UrSymbolKey {
    pub variant: UrVariant,
    pub j: [i32; 3],
    pub s: [u32; 3],
    pub r_bits: u64,
}

#[derive(Debug, Default)]
struct UrTable {
    map: RwLock<HashMap<UrSymbolKey, Amplitude>>,
}

impl UrTable {
    fn memo(&self, key: UrSymbolKey, compute: impl FnOnce() -> Result<Amplitude>) -> Result<Amplitude> {
        if let Some(v) = self.map.read().expect("table lock").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        let mut map = self.map.write().expect("table lock");
        let stored = *map.entry(key).or_insert(v);
        if stored.re.to_bits() != v.re.to_bits() || stored.im.to_bits() != v.im.to_bits() {
            return Err(Error::CacheConflict { key: format!("{key:?}"), stored: stored.norm(), offered: v.norm() });
        }
        Ok(v)
    }
}

fn ur_table() -> &'static UrTable {
    static TABLE: OnceLock<UrTable> = OnceLock::new();
    TABLE.get_or_init(UrTable::default)
}

fn check_j(j: HalfInt) -> Result<()> {
    if j.is_negative() {
        Err(Error::InvalidArgument(format!("negative angular momentum {j}")))
    } else {
        Ok(())
    }
}

/// Validates `0 ≤ s ≤ 2j`.
pub fn alpha_index(j: HalfInt, s: i64) -> Result<u32> {
    check_j(j)?;
    let max = i64::from(j.twice());
    if (0..=max).contains(&s) {
        Ok(s as u32)
    } else {
        Err(Error::AlphaIndex { j, s, max })
    }
}

fn key(variant: UrVariant, j: [HalfInt; 3], s: [u32; 3], r: RParam) -> UrSymbolKey {
    UrSymbolKey { variant, j: j.map(HalfInt::twice), s, r_bits: r.value().to_bits() }
}

fn norm3(a: HalfInt, b: HalfInt, c: HalfInt) -> f64 {
    1.0 / (f64::from(a.twice() + 1) * f64::from(b.twice() + 1) * f64::from(c.twice() + 1)).sqrt()
}

fn cg_ur_raw(j1: HalfInt, j2: HalfInt, s1: u32, s2: u32, j: HalfInt, s: u32, r: RParam) -> Result<Amplitude> {
    if !triangle(j1, j2, j) {
        return Ok(czero());
    }
    let table = global_table();
    let mut sum = czero();
    for m1 in j1.projections() {
        for m2 in j2.projections() {
            let m = m1 + m2;
            if !j.admits(m) {
                continue;
            }
            let c = table.cg(j1, m1, j2, m2, j, m)?;
            if c == 0.0 {
                continue;
            }
            sum += alpha_phase(j, s, m, r, 1) * alpha_phase(j1, s1, m1, r, -1) * alpha_phase(j2, s2, m2, r, -1) * c;
        }
    }
    Ok(sum * norm3(j1, j2, j))
}

/// `(j1 j2 α1 α2 | j α; r)`; zero when the triangle rule fails.
pub fn cg_ur(j1: HalfInt, j2: HalfInt, s1: i64, s2: i64, j: HalfInt, s: i64, r: f64) -> Result<Amplitude> {
    let (s1, s2, s) = (alpha_index(j1, s1)?, alpha_index(j2, s2)?, alpha_index(j, s)?);
    let r = RParam::new(r)?;
    ur_table().memo(key(UrVariant::CgUr, [j1, j2, j], [s1, s2, s], r), || cg_ur_raw(j1, j2, s1, s2, j, s, r))
}

/// `f_r(j1 j2 j3; α1 α2 α3) = (−1)^{2j3} (2j1+1)^{−1/2} (j2 j3 α2 α3 | j1 α1; r)*`.
pub fn f_symbol(j1: HalfInt, j2: HalfInt, j3: HalfInt, s1: i64, s2: i64, s3: i64, r: f64) -> Result<Amplitude> {
    let (u1, u2, u3) = (alpha_index(j1, s1)?, alpha_index(j2, s2)?, alpha_index(j3, s3)?);
    let rp = RParam::new(r)?;
    ur_table().memo(key(UrVariant::F, [j1, j2, j3], [u1, u2, u3], rp), || {
        let sign = if j3.twice() % 2 == 0 { 1.0 } else { -1.0 };
        let c = cg_ur(j2, j3, s2, s3, j1, s1, r)?;
        Ok(c.conj() * (sign / f64::from(j1.twice() + 1).sqrt()))
    })
}

fn fbar_raw(j: [HalfInt; 3], s: [u32; 3], r: RParam) -> Result<Amplitude> {
    if !triangle(j[0], j[1], j[2]) {
        return Ok(czero());
    }
    let table = global_table();
    let mut sum = czero();
    for m1 in j[0].projections() {
        for m2 in j[1].projections() {
            let m3 = -(m1 + m2);
            if !j[2].admits(m3) {
                continue;
            }
            let w = table.threejm(j[0], j[1], j[2], m1, m2, m3)?;
            if w == 0.0 {
                continue;
            }
            sum += alpha_phase(j[0], s[0], m1, r, -1)
                * alpha_phase(j[1], s[1], m2, r, -1)
                * alpha_phase(j[2], s[2], m3, r, -1)
                * w;
        }
    }
    Ok(sum * norm3(j[0], j[1], j[2]))
}

/// The symmetric symbol `f̄_r(j1 j2 j3; α1 α2 α3)`: the 3-jm symbol with
/// every projection transformed by `q_i^{−α_i m_i} / √(2j_i+1)`.
pub fn fbar_symbol(j1: HalfInt, j2: HalfInt, j3: HalfInt, s1: i64, s2: i64, s3: i64, r: f64) -> Result<Amplitude> {
    let s = [alpha_index(j1, s1)?, alpha_index(j2, s2)?, alpha_index(j3, s3)?];
    fbar_cached([j1, j2, j3], s, RParam::new(r)?)
}

fn fbar_cached(j: [HalfInt; 3], s: [u32; 3], r: RParam) -> Result<Amplitude> {
    ur_table().memo(key(UrVariant::Fbar, j, s, r), || fbar_raw(j, s, r))
}

/// All `f̄_r(j1 j2 j3; ·)` values for one triad, indexed `[s1][s2][s3]` row-major.
#[derive(Clone, Debug)]
pub struct FbarTable {
    pub j: [HalfInt; 3],
    pub r: RParam,
    dims: [usize; 3],
    values: Vec<Amplitude>,
}

impl FbarTable {
    pub fn new(j: [HalfInt; 3], r: f64) -> Result<Self> {
        for x in j {
            check_j(x)?;
        }
        let r = RParam::new(r)?;
        let dims = j.map(HalfInt::dim);
        let mut values = Vec::with_capacity(dims.iter().product());
        for s1 in 0..dims[0] as u32 {
            for s2 in 0..dims[1] as u32 {
                for s3 in 0..dims[2] as u32 {
                    values.push(fbar_cached(j, [s1, s2, s3], r)?);
                }
            }
        }
        Ok(FbarTable { j, r, dims, values })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn get(&self, s1: usize, s2: usize, s3: usize) -> Amplitude {
        self.values[(s1 * self.dims[1] + s2) * self.dims[2] + s3]
    }
}

/// `(−1)^{j1+j2+j3}` when the sum is an integer.
fn triad_sign(j: [HalfInt; 3]) -> Option<f64> {
    (j[0] + j[1] + j[2]).sign()
}

/// Both f̄_r orthogonality relations, with the bra side evaluated at `r_bra` and the
/// ket side at `r_ket`. Only `r_bra == r_ket` is expected to pass.
pub fn fbar_orthogonality_report(
    j1: HalfInt,
    j2: HalfInt,
    r_bra: f64,
    r_ket: f64,
    tol: f64,
) -> Result<VerificationReport> {
    check_j(j1)?;
    check_j(j2)?;
    let mut rep = VerificationReport::new("fbar_orthogonality", None, Some(r_bra));
    let lo = (j1 - j2).abs().twice();
    let hi = (j1 + j2).twice();
    let j3s: Vec<HalfInt> = (lo..=hi).step_by(2).map(HalfInt::from_twice).collect();
    let bra: Vec<FbarTable> = j3s.iter().map(|&j3| FbarTable::new([j1, j2, j3], r_bra)).collect::<Result<_>>()?;
    let ket: Vec<FbarTable> = j3s.iter().map(|&j3| FbarTable::new([j1, j2, j3], r_ket)).collect::<Result<_>>()?;
    let (n1, n2) = (j1.dim(), j2.dim());

    // Σ_{j3 α3} (2j3+1) f̄*(α1 α2 α3) f̄(α1' α2' α3) = δ δ
    let mut first = 0.0f64;
    for a1 in 0..n1 {
        for a2 in 0..n2 {
            for b1 in 0..n1 {
                for b2 in 0..n2 {
                    let mut sum = czero();
                    for (tb, tk) in bra.iter().zip(&ket) {
                        let w = f64::from(tb.j[2].twice() + 1);
                        for a3 in 0..tb.dims[2] {
                            sum += tb.get(a1, a2, a3).conj() * tk.get(b1, b2, a3) * w;
                        }
                    }
                    let expect = if a1 == b1 && a2 == b2 { cone() } else { czero() };
                    first = first.max((sum - expect).norm());
                }
            }
        }
    }
    rep.check("completeness", first, tol);

    // Σ_{α1 α2} f̄(α1 α2 α3) f̄*(α1 α2 α3') = δ(j3 j3') δ(α3 α3') Δ / (2j3+1),
    // with j3, j3' running one step past the triangle to exercise Δ = 0.
    let mut wide = j3s.clone();
    wide.push(j1 + j2 + HalfInt::ONE);
    let bra_w: Vec<FbarTable> = wide.iter().map(|&j3| FbarTable::new([j1, j2, j3], r_bra)).collect::<Result<_>>()?;
    let ket_w: Vec<FbarTable> = wide.iter().map(|&j3| FbarTable::new([j1, j2, j3], r_ket)).collect::<Result<_>>()?;
    let mut second = 0.0f64;
    for (x, tb) in bra_w.iter().enumerate() {
        for (y, tk) in ket_w.iter().enumerate() {
            for a3 in 0..tb.dims[2] {
                for b3 in 0..tk.dims[2] {
                    let mut sum = czero();
                    for a1 in 0..n1 {
                        for a2 in 0..n2 {
                            sum += tb.get(a1, a2, a3) * tk.get(a1, a2, b3).conj();
                        }
                    }
                    let delta = x == y && a3 == b3 && triangle(j1, j2, tb.j[2]);
                    let expect = if delta { creal(1.0 / f64::from(tb.j[2].twice() + 1)) } else { czero() };
                    second = second.max((sum - expect).norm());
                }
            }
        }
    }
    rep.check("orthogonality", second, tol);
    Ok(rep)
}

/// Both orthogonality relations of `f̄_r` at one `r`.
pub fn verify_fbar_orthogonality(j1: HalfInt, j2: HalfInt, r: f64, tol: f64) -> Result<VerificationReport> {
    fbar_orthogonality_report(j1, j2, r, r, tol)
}

/// Column permutations and complex conjugation of `f̄_r` for one triad, plus
/// the last-two-column law of `f_r`, exhaustively over the `α`-indices.
pub fn verify_fbar_permutation(j: [HalfInt; 3], r: f64, tol: f64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("fbar_symmetry", None, Some(r));
    let table = FbarTable::new(j, r)?;
    let sign = triad_sign(j);
    let d = table.dims();
    const EVEN: [[usize; 3]; 2] = [[1, 2, 0], [2, 0, 1]];
    const ODD: [[usize; 3]; 3] = [[1, 0, 2], [0, 2, 1], [2, 1, 0]];
    let permuted: Vec<([usize; 3], FbarTable)> = EVEN
        .iter()
        .chain(ODD.iter())
        .map(|p| Ok((*p, FbarTable::new([j[p[0]], j[p[1]], j[p[2]]], r)?)))
        .collect::<Result<_>>()?;

    let (mut even, mut odd, mut conj, mut fswap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s1 in 0..d[0] {
        for s2 in 0..d[1] {
            for s3 in 0..d[2] {
                let s = [s1, s2, s3];
                let v = table.get(s1, s2, s3);
                for (i, (p, t)) in permuted.iter().enumerate() {
                    let w = t.get(s[p[0]], s[p[1]], s[p[2]]);
                    let res = if i < EVEN.len() {
                        (w - v).norm()
                    } else {
                        match sign {
                            Some(g) => (w - v * g).norm(),
                            None => w.norm().max(v.norm()),
                        }
                    };
                    if i < EVEN.len() {
                        even = even.max(res);
                    } else {
                        odd = odd.max(res);
                    }
                }
                conj = conj.max(match sign {
                    Some(g) => (v.conj() - v * g).norm(),
                    None => v.norm(),
                });
                let (t1, t2, t3) = (s1 as i64, s2 as i64, s3 as i64);
                let f = f_symbol(j[0], j[1], j[2], t1, t2, t3, r)?;
                let g = f_symbol(j[0], j[2], j[1], t1, t3, t2, r)?;
                fswap = fswap.max(match sign {
                    Some(x) => (g - f * x).norm(),
                    None => f.norm().max(g.norm()),
                });
            }
        }
    }
    rep.check("even_permutations", even, tol);
    rep.check("odd_permutations", odd, tol);
    rep.check("conjugation", conj, tol);
    rep.check("f_last_columns_swap", fswap, tol);
    Ok(rep)
}

/// Unitarity of `[(α1 α2), (j α)] ↦ (j1 j2 α1 α2 | j α; r)` over the coupled range.
pub fn cg_ur_unitarity_defect(j1: HalfInt, j2: HalfInt, r: f64) -> Result<f64> {
    check_j(j1)?;
    check_j(j2)?;
    let (n1, n2) = (j1.dim(), j2.dim());
    let n = n1 * n2;
    let mut cols = Vec::with_capacity(n);
    let mut tj = (j1 - j2).abs().twice();
    while tj <= (j1 + j2).twice() {
        let j = HalfInt::from_twice(tj);
        for s in 0..j.dim() as i64 {
            cols.push((j, s));
        }
        tj += 2;
    }
    let mut m = CMatrix::zeros(n, cols.len());
    for s1 in 0..n1 {
        for s2 in 0..n2 {
            for (c, &(j, s)) in cols.iter().enumerate() {
                m[(s1 * n2 + s2, c)] = cg_ur(j1, j2, s1 as i64, s2 as i64, j, s, r)?;
            }
        }
    }
    Ok(frobenius(&(m.adjoint() * &m - CMatrix::identity(cols.len(), cols.len()))))
}

/// Outcome of contracting a 9-j decomposition with `f̄_r` symbols.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NinejComparison {
    /// Rows `f̄_r`, columns `f̄_r*`, summed over every `α`.
    pub value: JsonComplex,
    /// Standard 9-j from 3-jm symbols.
    #[serde(serialize_with = "serialize_real")]
    pub reference: f64,
    #[serde(serialize_with = "serialize_real")]
    pub residual: f64,
    /// All six symbols unconjugated.
    pub literal: JsonComplex,
    #[serde(serialize_with = "serialize_real")]
    pub literal_residual: f64,
}

/// Replaces the six 3-jm symbols of the 9-j decomposition by `f̄_r` symbols
/// and sums over all `α`-indices.
///
/// The literal replacement picks up `Σ_α q^{−α(m+m')} = (2j+1) δ_{m',−m}` on
/// each shared label, which reproduces the 9-j only up to `(−1)^{Σ j}`, for
/// every `r`. Conjugating the column symbols restores `δ_{m m'}` and the
/// exact 9-j; both contractions are returned.
pub fn ninej_from_fbar(j: &NineJArgs, r: f64) -> Result<NinejComparison> {
    for x in j {
        check_j(*x)?;
    }
    let reference = ninej(j);
    let rows = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];
    let cols = [[0, 3, 6], [1, 4, 7], [2, 5, 8]];
    let mk = |t: [usize; 3]| FbarTable::new([j[t[0]], j[t[1]], j[t[2]]], r);
    let rt: Vec<FbarTable> = rows.iter().map(|t| mk(*t)).collect::<Result<_>>()?;
    let ct: Vec<FbarTable> = cols.iter().map(|t| mk(*t)).collect::<Result<_>>()?;
    let d: Vec<usize> = j.iter().map(|x| x.dim()).collect();

    let (mut herm, mut lit) = (czero(), czero());
    let mut s = [0usize; 9];
    for s0 in 0..d[0] {
        s[0] = s0;
        for s1 in 0..d[1] {
            s[1] = s1;
            for s2 in 0..d[2] {
                s[2] = s2;
                let a = rt[0].get(s[0], s[1], s[2]);
                if a == czero() {
                    continue;
                }
                for s3 in 0..d[3] {
                    s[3] = s3;
                    for s4 in 0..d[4] {
                        s[4] = s4;
                        for s5 in 0..d[5] {
                            s[5] = s5;
                            let ab = a * rt[1].get(s[3], s[4], s[5]);
                            if ab == czero() {
                                continue;
                            }
                            for s6 in 0..d[6] {
                                s[6] = s6;
                                let c0 = ct[0].get(s[0], s[3], s[6]);
                                for s7 in 0..d[7] {
                                    s[7] = s7;
                                    let c1 = ct[1].get(s[1], s[4], s[7]);
                                    for s8 in 0..d[8] {
                                        s[8] = s8;
                                        let row = ab * rt[2].get(s[6], s[7], s[8]);
                                        let c2 = ct[2].get(s[2], s[5], s[8]);
                                        herm += row * (c0 * c1 * c2).conj();
                                        lit += row * c0 * c1 * c2;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(NinejComparison {
        value: herm.into(),
        reference,
        residual: (herm - creal(reference)).norm(),
        literal: lit.into(),
        literal_residual: (lit - creal(reference)).norm(),
    })
}

/// An irreducible tensor operator `T^(k)` between `|j_bra m⟩` and `|j_ket m⟩`,
/// its `2k+1` spherical components ordered `m = −k … k`.
#[derive(Clone, Debug)]
pub struct TensorComponents {
    pub rank: HalfInt,
    pub bra: HalfInt,
    pub ket: HalfInt,
    pub spherical: Vec<CMatrix>,
}

/// `T^(k)_α(r) = (2k+1)^{−1/2} Σ_m q^{αm} T^(k)_m`, components ordered by `s`.
#[derive(Clone, Debug)]
pub struct TransformedTensor {
    pub rank: HalfInt,
    pub r: RParam,
    pub components: Vec<CMatrix>,
}

impl TensorComponents {
    pub fn new(rank: HalfInt, bra: HalfInt, ket: HalfInt, spherical: Vec<CMatrix>) -> Result<Self> {
        check_j(rank)?;
        check_j(bra)?;
        check_j(ket)?;
        if spherical.len() != rank.dim() {
            return Err(Error::ComponentCount { expected: rank.dim(), got: spherical.len() });
        }
        if let Some(bad) = spherical.iter().find(|c| c.shape() != (bra.dim(), ket.dim())) {
            return Err(Error::InvalidArgument(format!(
                "component shape {:?}, expected ({}, {})",
                bad.shape(),
                bra.dim(),
                ket.dim()
            )));
        }
        Ok(TensorComponents { rank, bra, ket, spherical })
    }

    /// The identity on `|j m⟩` as a rank-0 tensor.
    pub fn scalar_identity(j: HalfInt) -> Result<Self> {
        Self::new(HalfInt::ZERO, j, j, vec![CMatrix::identity(j.dim(), j.dim())])
    }

    /// `T_0 = J3`, `T_±1 = ∓J±/√2` from the polar-built generators.
    pub fn vector_from_polar(ops: &PolarOps) -> Result<Self> {
        let j = ops.params.j();
        let s = creal(std::f64::consts::FRAC_1_SQRT_2);
        let comps = vec![ops.j_minus.matrix() * s, ops.j3.matrix().clone(), ops.j_plus.matrix() * (-s)];
        Self::new(HalfInt::ONE, j, j, comps)
    }

    /// `[T^(1) ⊗ T^(1)]^(2)` of the vector built from `J`.
    pub fn quadrupole_from_polar(ops: &PolarOps) -> Result<Self> {
        let v = Self::vector_from_polar(ops)?;
        let one = HalfInt::ONE;
        let two = HalfInt::from_int(2);
        let n = v.bra.dim();
        let table = global_table();
        let mut comps = Vec::with_capacity(5);
        for big_m in two.projections() {
            let mut acc = CMatrix::zeros(n, n);
            for (i1, m1) in one.projections().enumerate() {
                for (i2, m2) in one.projections().enumerate() {
                    let c = table.cg(one, m1, one, m2, two, big_m)?;
                    if c != 0.0 {
                        acc += &v.spherical[i1] * &v.spherical[i2] * creal(c);
                    }
                }
            }
            comps.push(acc);
        }
        Self::new(two, v.bra, v.ket, comps)
    }

    pub fn transform(&self, r: f64) -> Result<TransformedTensor> {
        let r = RParam::new(r)?;
        let w = transform_matrix(self.rank, r);
        let n = self.rank.dim();
        let components = (0..n)
            .map(|s| {
                (0..n).fold(CMatrix::zeros(self.bra.dim(), self.ket.dim()), |acc, mi| {
                    acc + &self.spherical[mi] * w[(mi, s)]
                })
            })
            .collect();
        Ok(TransformedTensor { rank: self.rank, r, components })
    }
}

impl TransformedTensor {
    /// `T_m = (2k+1)^{−1/2} Σ_α q^{−αm} T_α`.
    pub fn inverse(&self) -> Vec<CMatrix> {
        let w = transform_matrix(self.rank, self.r);
        let n = self.rank.dim();
        let shape = self.components[0].shape();
        (0..n)
            .map(|mi| {
                (0..n).fold(CMatrix::zeros(shape.0, shape.1), |acc, s| acc + &self.components[s] * w[(mi, s)].conj())
            })
            .collect()
    }
}

/// Result of factorizing `⟨j1 α1; r| T_α(r) |j2 α2; r⟩ = R · f_r(j1 j2 k; α1 α2 α)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WignerEckart {
    /// Component-wise median of the ratios over admissible indices.
    pub reduced: JsonComplex,
    /// `max |element − R f_r|` over every index, admissible or not.
    #[serde(serialize_with = "serialize_real")]
    pub max_residual: f64,
    /// `max |ratio − R| / |R|` over admissible indices.
    #[serde(serialize_with = "serialize_real")]
    pub relative_spread: f64,
    pub admissible: usize,
    pub pass: bool,
}

/// Below this `|f_r|` an index does not contribute a ratio.
const ADMISSIBLE_F: f64 = 1e-9;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Matrix elements of `T` in the `B_r` bases against the `f_r` table.
pub fn wigner_eckart_check(t: &TensorComponents, j1: HalfInt, j2: HalfInt, r: f64, tol: f64) -> Result<WignerEckart> {
    if t.bra != j1 || t.ket != j2 {
        return Err(Error::InvalidArgument(format!(
            "tensor acts between j = {} and j = {}, not {j1} and {j2}",
            t.bra, t.ket
        )));
    }
    let tt = t.transform(r)?;
    let b1 = transform_matrix(j1, tt.r);
    let b2 = transform_matrix(j2, tt.r);
    let k = t.rank;
    let mut cells = Vec::new();
    for (s, comp) in tt.components.iter().enumerate() {
        let elems = b1.adjoint() * comp * &b2;
        for s1 in 0..j1.dim() {
            for s2 in 0..j2.dim() {
                let f = f_symbol(j1, j2, k, s1 as i64, s2 as i64, s as i64, r)?;
                cells.push((elems[(s1, s2)], f));
            }
        }
    }
    let ratios: Vec<Amplitude> = cells.iter().filter(|(_, f)| f.norm() > ADMISSIBLE_F).map(|(e, f)| e / f).collect();
    if ratios.is_empty() {
        return Err(Error::UndeterminedReducedElement);
    }
    let reduced =
        Amplitude::new(median(ratios.iter().map(|z| z.re).collect()), median(ratios.iter().map(|z| z.im).collect()));
    let scale = reduced.norm().max(f64::MIN_POSITIVE);
    let relative_spread = ratios.iter().map(|z| (z - reduced).norm() / scale).fold(0.0, f64::max);
    let max_residual = cells.iter().map(|(e, f)| (e - reduced * f).norm()).fold(0.0, f64::max);
    Ok(WignerEckart {
        reduced: reduced.into(),
        max_residual,
        relative_spread,
        admissible: ratios.len(),
        pass: relative_spread <= tol && max_residual <= tol * reduced.norm().max(1.0),
    })
}

/// `j3` values from `|j1 − j2|` to `j1 + j2`.
pub fn coupled_range(j1: HalfInt, j2: HalfInt) -> impl Iterator<Item = HalfInt> {
    ((j1 - j2).abs().twice()..=(j1 + j2).twice()).step_by(2).map(HalfInt::from_twice)
}

/// Every `j` from 0 to `max` in half steps.
pub fn halfints_up_to(max: HalfInt) -> impl Iterator<Item = HalfInt> {
    (0..=max.twice()).map(HalfInt::from_twice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn trivial_values() {
        assert_eq!(cg_ur(h(0), h(0), 0, 0, h(0), 0, 1.0).unwrap(), cone());
        assert_eq!(cg_ur(h(1), h(1), 0, 1, h(4), 2, 1.0).unwrap(), czero());
        assert_eq!(f_symbol(h(0), h(0), h(0), 0, 0, 0, 0.3).unwrap(), cone());
        assert_eq!(fbar_symbol(h(0), h(0), h(0), 0, 0, 0, 0.3).unwrap(), cone());
        assert!(matches!(cg_ur(h(1), h(1), 2, 0, h(0), 0, 1.0), Err(Error::AlphaIndex { s: 2, max: 1, .. })));
        assert!(matches!(fbar_symbol(h(2), h(2), h(2), -1, 0, 0, 1.0), Err(Error::AlphaIndex { .. })));
    }

    #[test]
    fn fbar_odd_triad_is_imaginary() {
        for s1 in 0..3 {
            for s2 in 0..3 {
                for s3 in 0..3 {
                    let v = fbar_symbol(h(2), h(2), h(2), s1, s2, s3, 0.0).unwrap();
                    assert!(v.re.abs() < 1e-14, "{v}");
                }
            }
        }
        let t = FbarTable::new([h(2); 3], 0.0).unwrap();
        assert!(t.values.iter().any(|v| v.im.abs() > 1e-3));
    }

    #[test]
    fn cg_ur_unitary() {
        for (a, b) in [(1, 1), (2, 1), (2, 3), (4, 4)] {
            for r in [0.0, 0.5, 1.0, 2.37] {
                assert!(cg_ur_unitarity_defect(h(a), h(b), r).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn orthogonality_and_negative_control() {
        let rep = verify_fbar_orthogonality(h(1), h(1), 1.0, 1e-12).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let rep = verify_fbar_orthogonality(h(2), h(3), 0.4, 1e-10).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let mixed = fbar_orthogonality_report(h(2), h(3), 0.4, 0.9, 1e-10).unwrap();
        assert!(!mixed.get("completeness").unwrap().pass);
    }

    #[test]
    fn symmetries_small() {
        for j in [[h(1), h(1), h(2)], [h(2), h(2), h(2)], [h(3), h(1), h(2)], [h(1), h(1), h(1)]] {
            let rep = verify_fbar_permutation(j, 0.7, 1e-12).unwrap();
            assert!(rep.passed(), "{j:?} {rep:?}");
        }
    }

    #[test]
    fn ninej_contractions() {
        let zero = ninej_from_fbar(&[h(0); 9], 0.4).unwrap();
        assert_abs_diff_eq!(zero.value.re, 1.0, epsilon = 1e-15);
        assert_eq!(zero.reference, 1.0);
        // Σj = 4: both contractions agree
        let even = [h(2), h(2), h(0), h(2), h(2), h(0), h(0), h(0), h(0)];
        let c = ninej_from_fbar(&even, 1.0).unwrap();
        assert!(c.reference.abs() > 1e-3);
        assert!(c.residual < 1e-12 && c.literal_residual < 1e-12, "{c:?}");
        // Σj = 7: the literal contraction carries a factor −1
        let odd = [h(2), h(2), h(2), h(2), h(2), h(0), h(2), h(0), h(2)];
        let c = ninej_from_fbar(&odd, 1.0).unwrap();
        assert!(c.reference.abs() > 1e-3);
        assert!(c.residual < 1e-12);
        assert_abs_diff_eq!(c.literal.re, -c.reference, epsilon = 1e-12);
    }

    #[test]
    fn tensor_round_trip_and_errors() {
        let ops = crate::polar::build_j(&crate::polar::UrParams::new(3, 1.0).unwrap()).unwrap();
        let t = TensorComponents::vector_from_polar(&ops).unwrap();
        let back = t.transform(0.37).unwrap().inverse();
        for (a, b) in back.iter().zip(&t.spherical) {
            assert!(frobenius(&(a - b)) < 1e-12);
        }
        assert!(matches!(
            TensorComponents::new(h(2), h(2), h(2), vec![CMatrix::zeros(3, 3)]),
            Err(Error::ComponentCount { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn wigner_eckart_scalar_and_vector() {
        for tj in 1..=4 {
            let j = h(tj);
            let we = wigner_eckart_check(&TensorComponents::scalar_identity(j).unwrap(), j, j, 1.0, 1e-12).unwrap();
            assert!(we.pass);
            assert_abs_diff_eq!(we.reduced.re, f64::from(tj + 1).sqrt(), epsilon = 1e-12);
        }
        let ops = crate::polar::build_j(&crate::polar::UrParams::new(3, 1.0).unwrap()).unwrap();
        let t = TensorComponents::vector_from_polar(&ops).unwrap();
        let we = wigner_eckart_check(&t, h(2), h(2), 1.0, 1e-10).unwrap();
        assert!(we.pass, "{we:?}");
        assert_abs_diff_eq!(we.reduced.re, 6f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn wigner_eckart_undetermined() {
        let t = TensorComponents::new(h(4), h(1), h(1), vec![CMatrix::zeros(2, 2); 5]).unwrap();
        assert!(matches!(wigner_eckart_check(&t, h(1), h(1), 1.0, 1e-10), Err(Error::UndeterminedReducedElement)));
    }
}
