//! Standard SU(2) ⊃ U(1) coupling coefficients in the Condon–Shortley
//! convention.
//!
//! Clebsch–Gordan coefficients come from Racah's single-sum formula,
//! evaluated in exact rational arithmetic; only the final square root is
//! taken in floating point. 3-jm symbols are derived from them and 9-j
//! symbols are contracted directly from six 3-jm symbols.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qarith::HalfInt;
use crate::report::{format_real, VerificationReport};

/// `|j1 − j2| ≤ j3 ≤ j1 + j2` and `j1 + j2 + j3` integer.
pub fn triangle(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.is_negative() || (j.twice() - m.twice()) % 2 != 0 {
        Err(Error::InvalidArgument(format!("inconsistent angular momentum pair j = {j}, m = {m}")))
    } else {
        Ok(())
    }
}

fn factorials() -> &'static Vec<BigInt> {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![BigInt::one()];
        for i in 1..=256u32 {
            let next = &t[(i - 1) as usize] * BigInt::from(i);
            t.push(next);
        }
        t
    })
}

fn fact(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let t = factorials();
    match t.get(n as usize) {
        Some(v) => v.clone(),
        None => (t.len() as i32..=n).fold(t[t.len() - 1].clone(), |acc, i| acc * BigInt::from(i)),
    }
}

/// Racah's formula. Arguments are twice-values, already validated and
/// satisfying the selection rules.
fn racah_cg(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
    let h = |x: i32| x / 2;
    let a = h(tj1 + tj2 - tj);
    let b = h(tj1 - tm1);
    let c = h(tj2 + tm2);
    let d = h(tj - tj2 + tm1);
    let e = h(tj - tj1 - tm2);

    let mut sq = BigRational::from_integer(
        BigInt::from(tj + 1)
            * fact(h(tj + tj1 - tj2))
            * fact(h(tj - tj1 + tj2))
            * fact(a)
            * fact(h(tj + tm))
            * fact(h(tj - tm))
            * fact(h(tj1 - tm1))
            * fact(h(tj1 + tm1))
            * fact(h(tj2 - tm2))
            * fact(h(tj2 + tm2)),
    );
    sq /= BigRational::from_integer(fact(h(tj1 + tj2 + tj) + 1));

    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let magnitude = (sq * &sum * &sum).to_f64().expect("finite rational").sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `(j1 m1 j2 m2 | j m)`; zero outside the selection rules.
pub fn cg(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> Result<f64> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j, m)?;
    if m1 + m2 != m || !triangle(j1, j2, j) || !j1.admits(m1) || !j2.admits(m2) || !j.admits(m) {
        return Ok(0.0);
    }
    Ok(racah_cg(j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice()))
}

/// Wigner 3-jm symbol `(j1 j2 j3; m1 m2 m3)`.
pub fn threejm(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> Result<f64> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j3, m3)?;
    if (m1 + m2 + m3).twice() != 0 || !triangle(j1, j2, j3) {
        return Ok(0.0);
    }
    let sign = (j1 - j2 - m3).sign().expect("integer by selection rules");
    Ok(sign * cg(j1, m1, j2, m2, j3, -m3)? / f64::from(j3.twice() + 1).sqrt())
}

/// The nine arguments as rows `[[j1 j2 j3] [j4 j5 j6] [j7 j8 j9]]`.
pub type NineJArgs = [HalfInt; 9];

const NINEJ_ROWS: [[usize; 3]; 3] = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];
const NINEJ_COLS: [[usize; 3]; 3] = [[0, 3, 6], [1, 4, 7], [2, 5, 8]];

/// Whether every row and column triad of a 9-j symbol satisfies the triangle rule.
pub fn ninej_triads_ok(j: &NineJArgs) -> bool {
    NINEJ_ROWS.iter().chain(NINEJ_COLS.iter()).all(|t| triangle(j[t[0]], j[t[1]], j[t[2]]))
}

fn ninej_with(j: &NineJArgs, tjm: &mut dyn FnMut([HalfInt; 3], [HalfInt; 3]) -> f64) -> f64 {
    if !ninej_triads_ok(j) || j.iter().any(|x| x.is_negative()) {
        return 0.0;
    }
    let mut total = 0.0;
    for m1 in j[0].projections() {
        for m2 in j[1].projections() {
            let m3 = -(m1 + m2);
            if !j[2].admits(m3) {
                continue;
            }
            let r1 = tjm([j[0], j[1], j[2]], [m1, m2, m3]);
            if r1 == 0.0 {
                continue;
            }
            for m4 in j[3].projections() {
                let m7 = -(m1 + m4);
                if !j[6].admits(m7) {
                    continue;
                }
                for m5 in j[4].projections() {
                    let m6 = -(m4 + m5);
                    let m8 = -(m2 + m5);
                    let m9 = -(m3 + m6);
                    if !j[5].admits(m6) || !j[7].admits(m8) || !j[8].admits(m9) {
                        continue;
                    }
                    let prod = r1
                        * tjm([j[3], j[4], j[5]], [m4, m5, m6])
                        * tjm([j[6], j[7], j[8]], [m7, m8, m9])
                        * tjm([j[0], j[3], j[6]], [m1, m4, m7])
                        * tjm([j[1], j[4], j[7]], [m2, m5, m8])
                        * tjm([j[2], j[5], j[8]], [m3, m6, m9]);
                    total += prod;
                }
            }
        }
    }
    total
}

/// Wigner 9-j symbol as a full contraction of six 3-jm symbols over all projections.
pub fn ninej(j: &NineJArgs) -> f64 {
    ninej_with(j, &mut |js, ms| threejm(js[0], js[1], js[2], ms[0], ms[1], ms[2]).unwrap_or(0.0))
}

/// Key of a memoized standard symbol, in twice-values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKey {
    Cg { j1: i32, j2: i32, j: i32, m1: i32, m2: i32, m: i32 },
    ThreeJm { j: [i32; 3], m: [i32; 3] },
    NineJ { j: [i32; 9] },
}

impl fmt::Display for SymbolKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKey::Cg { j1, j2, j, m1, m2, m } => write!(f, "cg({j1} {j2} {j} {m1} {m2} {m})"),
            SymbolKey::ThreeJm { j, m } => write!(f, "threejm({j:?} {m:?})"),
            SymbolKey::NineJ { j } => write!(f, "ninej({j:?})"),
        }
    }
}

/// Memo table of standard symbols.
///
/// Reads run concurrently; an insert of a key that is already present must
/// carry the bit-identical value, otherwise it is rejected.
#[derive(Debug, Default)]
pub struct CouplingTable {
    map: RwLock<HashMap<SymbolKey, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl CouplingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &SymbolKey) -> Option<f64> {
        let found = self.map.read().expect("table lock").get(key).copied();
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn insert(&self, key: SymbolKey, value: f64) -> Result<()> {
        let mut map = self.map.write().expect("table lock");
        match map.get(&key) {
            Some(stored) if stored.to_bits() != value.to_bits() => {
                Err(Error::CacheConflict { key: key.to_string(), stored: *stored, offered: value })
            }
            Some(_) => Ok(()),
            None => {
                map.insert(key, value);
                Ok(())
            }
        }
    }

    fn memo(&self, key: SymbolKey, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = compute()?;
        self.insert(key, v)?;
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("table lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn cg(&self, j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> Result<f64> {
        check_pair(j1, m1)?;
        check_pair(j2, m2)?;
        check_pair(j, m)?;
        let key = SymbolKey::Cg {
            j1: j1.twice(),
            j2: j2.twice(),
            j: j.twice(),
            m1: m1.twice(),
            m2: m2.twice(),
            m: m.twice(),
        };
        self.memo(key, || cg(j1, m1, j2, m2, j, m))
    }

    pub fn threejm(&self, j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> Result<f64> {
        check_pair(j1, m1)?;
        check_pair(j2, m2)?;
        check_pair(j3, m3)?;
        let key =
            SymbolKey::ThreeJm { j: [j1.twice(), j2.twice(), j3.twice()], m: [m1.twice(), m2.twice(), m3.twice()] };
        self.memo(key, || threejm(j1, j2, j3, m1, m2, m3))
    }

    pub fn ninej(&self, j: &NineJArgs) -> f64 {
        let key = SymbolKey::NineJ { j: j.map(HalfInt::twice) };
        self.memo(key, || {
            Ok(ninej_with(j, &mut |js, ms| self.threejm(js[0], js[1], js[2], ms[0], ms[1], ms[2]).unwrap_or(0.0)))
        })
        .expect("ninej memo")
    }

    /// Clebsch–Gordan entries, one per line: `2j1 2j2 2j 2m1 2m2 2m value`.
    pub fn export_cg(&self) -> String {
        let map = self.map.read().expect("table lock");
        let mut rows: Vec<_> = map
            .iter()
            .filter_map(|(k, v)| match *k {
                SymbolKey::Cg { j1, j2, j, m1, m2, m } => Some(([j1, j2, j, m1, m2, m], *v)),
                _ => None,
            })
            .collect();
        rows.sort_by_key(|r| r.0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{} {} {} {} {} {} {}\n", k[0], k[1], k[2], k[3], k[4], k[5], format_real(v)));
        }
        out
    }

    /// Reads a table written by [`CouplingTable::export_cg`].
    pub fn load_cg(text: &str) -> Result<Self> {
        let table = CouplingTable::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::TableFormat { line: i + 1, reason: reason.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let mut k = [0i32; 6];
            for (slot, f) in k.iter_mut().zip(&fields[..6]) {
                *slot = f.parse().map_err(|_| bad("bad twice-value"))?;
            }
            let v: f64 = fields[6].parse().map_err(|_| bad("bad value"))?;
            let key = SymbolKey::Cg { j1: k[0], j2: k[1], j: k[2], m1: k[3], m2: k[4], m: k[5] };
            table.insert(key, v)?;
        }
        Ok(table)
    }
}

/// Process-wide table shared by the higher-level symbol code.
pub fn global_table() -> &'static CouplingTable {
    static TABLE: OnceLock<CouplingTable> = OnceLock::new();
    TABLE.get_or_init(CouplingTable::new)
}

/// Clebsch–Gordan coefficients for one `(j1, j2)` obtained without Racah's
/// formula: `J²` is diagonalized inside each fixed-`M` block of the product
/// basis, the top state of each `J` gets the Condon–Shortley sign, and lower
/// states take the sign that makes `⟨J M−1| J− |J M⟩` positive.
///
/// Returns a map from `(2J, 2m1, 2m2)` to the coefficient.
pub fn cg_by_diagonalization(j1: HalfInt, j2: HalfInt) -> HashMap<(i32, i32, i32), f64> {
    let m1s: Vec<HalfInt> = j1.projections().collect();
    let m2s: Vec<HalfInt> = j2.projections().collect();
    let (a, b) = (j1.value(), j2.value());
    let ladder = |j: f64, m: f64| ((j + m) * (j - m + 1.0)).sqrt(); // ⟨m−1|J−|m⟩
    let mut out: HashMap<(i32, i32, i32), f64> = HashMap::new();
    // previous block's eigenvectors by 2J, as (2m1 -> coefficient)
    let mut above: HashMap<i32, HashMap<i32, f64>> = HashMap::new();

    let tmax = j1.twice() + j2.twice();
    for tm in (-tmax..=tmax).rev().step_by(2) {
        let states: Vec<(HalfInt, HalfInt)> = m1s
            .iter()
            .flat_map(|&m1| m2s.iter().map(move |&m2| (m1, m2)))
            .filter(|(m1, m2)| (*m1 + *m2).twice() == tm)
            .collect();
        let n = states.len();
        // J² = J1² + J2² + 2 J1z J2z + J1+ J2- + J1- J2+
        let jsq = DMatrix::from_fn(n, n, |r, c| {
            let (p1, p2) = states[r];
            let (q1, q2) = states[c];
            let (y1, y2) = (q1.value(), q2.value());
            if r == c {
                a * (a + 1.0) + b * (b + 1.0) + 2.0 * p1.value() * p2.value()
            } else if (p1 - q1).twice() == 2 && (q2 - p2).twice() == 2 {
                ladder(a, y1 + 1.0) * ladder(b, y2)
            } else if (q1 - p1).twice() == 2 && (p2 - q2).twice() == 2 {
                ladder(a, y1) * ladder(b, y2 + 1.0)
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jsq);
        let mut current: HashMap<i32, HashMap<i32, f64>> = HashMap::new();
        for col in 0..n {
            let lambda = eig.eigenvalues[col];
            let jv = (-1.0 + (1.0 + 4.0 * lambda).sqrt()) / 2.0;
            let tj = (2.0 * jv).round() as i32;
            let mut vec: Vec<f64> = (0..n).map(|r| eig.eigenvectors[(r, col)]).collect();
            let sign = if tj == tm {
                // top of the multiplet: coefficient at m1 = j1 is positive
                let idx = states.iter().position(|(m1, _)| *m1 == j1).expect("m1 = j1 present");
                vec[idx].signum()
            } else {
                // overlap with J− applied to the state one step above
                let upper = &above[&tj];
                let mut overlap = 0.0;
                for (r, (m1, m2)) in states.iter().enumerate() {
                    let from1 = upper.get(&(m1.twice() + 2)).map(|c| c * ladder(a, m1.value() + 1.0));
                    let from2 = upper.get(&m1.twice()).map(|c| c * ladder(b, m2.value() + 1.0));
                    overlap += vec[r] * (from1.unwrap_or(0.0) + from2.unwrap_or(0.0));
                }
                overlap.signum()
            };
            vec.iter_mut().for_each(|x| *x *= sign);
            let mut by_m1 = HashMap::new();
            for (r, (m1, m2)) in states.iter().enumerate() {
                by_m1.insert(m1.twice(), vec[r]);
                out.insert((tj, m1.twice(), m2.twice()), vec[r]);
            }
            current.insert(tj, by_m1);
        }
        above = current;
    }
    out
}

/// Racah-formula coefficients against [`cg_by_diagonalization`] for every
/// `j1, j2 ≤ max_j`.
pub fn verify_cg_crosscheck(max_j: HalfInt, tol: f64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("cg", None, None);
    let mut worst = 0.0f64;
    for tj1 in 0..=max_j.twice() {
        for tj2 in 0..=max_j.twice() {
            let (j1, j2) = (HalfInt::from_twice(tj1), HalfInt::from_twice(tj2));
            for ((tj, tm1, tm2), v) in cg_by_diagonalization(j1, j2) {
                let (m1, m2) = (HalfInt::from_twice(tm1), HalfInt::from_twice(tm2));
                let racah = cg(j1, m1, j2, m2, HalfInt::from_twice(tj), m1 + m2)?;
                worst = worst.max((racah - v).abs());
            }
        }
    }
    rep.check("racah_vs_diagonalization", worst, tol);
    Ok(rep)
}
