//! The full verification sweep behind `wracah report`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{build_quon_reps, creal, verify_quon_relations, Operator};
use crate::polar::{build_j, default_s_samples, verify_su2, verify_ur_basis, verify_w_infinity, UrParams};
use crate::qarith::{HalfInt, ToleranceRule};
use crate::report::{serialize_real, VerificationReport};
use crate::sphere::{verify_sphere_orthonormality, verify_yr_orthonormality, QuadratureGrid};
use crate::wigner::{ninej_triads_ok, verify_cg_crosscheck, NineJArgs};
use crate::wra::{
    cg_ur_unitarity_defect, halfints_up_to, ninej_from_fbar, verify_fbar_orthogonality, verify_fbar_permutation,
    wigner_eckart_check, TensorComponents,
};

/// Per-suite thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTolerances {
    pub exact: f64,
    pub loose: f64,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        SweepTolerances { exact: 1e-12, loose: 1e-10 }
    }
}

impl SweepTolerances {
    pub fn uniform(tol: f64) -> Self {
        SweepTolerances { exact: tol, loose: tol }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub suite: String,
    pub max_j: String,
    #[serde(serialize_with = "serialize_real")]
    pub r: f64,
    pub pass: bool,
    /// Worst residual of the unconjugated 9-j substitution; informational.
    #[serde(serialize_with = "serialize_real")]
    pub ninej_literal_max_residual: f64,
    pub suites: Vec<VerificationReport>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sweep serialization")
    }
}

/// All 9-j argument sets with every entry in `{0, ½, …, max}` and every triad coupled.
pub fn ninej_cases(max: HalfInt) -> Vec<NineJArgs> {
    let n = (max.twice() + 1) as usize;
    (0..n.pow(9))
        .filter_map(|code| {
            let mut c = code;
            let j: NineJArgs = std::array::from_fn(|_| {
                let v = c % n;
                c /= n;
                HalfInt::from_twice(v as i32)
            });
            ninej_triads_ok(&j).then_some(j)
        })
        .collect()
}

/// Runs every module's verification at the scale implied by `max_j`:
/// Fock orders `k ≤ 2·max_j + 1`, couplings with `j ≤ max_j`, 9-j entries
/// `≤ min(max_j, 1)`, harmonics to `ℓ = 8` and `U_r` eigenfunctions to `ℓ = 4`.
///
/// `fault` perturbs one entry of one quon lowering operator, chosen from the seed.
pub fn run_sweep(max_j: HalfInt, r: f64, tol: SweepTolerances, fault: Option<u64>) -> Result<SweepReport> {
    if max_j.twice() < 1 {
        return Err(Error::UnsupportedLimit);
    }
    let exact = ToleranceRule::uniform(tol.exact)?;
    let loose = ToleranceRule::uniform(tol.loose)?;
    let k_max = max_j.twice() as u32 + 1;
    let mut suites = Vec::new();

    let mut rng = fault.map(StdRng::seed_from_u64);
    let faulty_k = rng.as_mut().map(|g| g.gen_range(2..=k_max));
    for k in 2..=k_max {
        let mut ops = build_quon_reps(k)?;
        if let (Some(g), Some(fk)) = (rng.as_mut(), faulty_k) {
            if fk == k {
                let n = ops.a1_minus.dim();
                let (row, col) = (g.gen_range(0..n), g.gen_range(0..n));
                let mut m = ops.a1_minus.matrix().clone();
                m[(row, col)] += creal(1e-3 * (1.0 + g.gen::<f64>()));
                ops.a1_minus = Operator::new(ops.a1_minus.space(), m)?;
            }
        }
        suites.push(verify_quon_relations(&ops, exact));
    }

    for k in 2..=k_max {
        let p = UrParams::new(k, r)?;
        suites.push(verify_su2(&p, exact, &default_s_samples(&p))?);
        suites.push(verify_ur_basis(&p, exact)?);
    }
    for k in [3, 5].into_iter().filter(|k| *k <= k_max) {
        suites.push(verify_w_infinity(&UrParams::new(k, r)?, -2..=2, loose)?);
    }

    suites.push(verify_cg_crosscheck(max_j, tol.exact)?);

    let mut coupling = VerificationReport::new("fbar_orthogonality", None, Some(r));
    for j1 in halfints_up_to(max_j) {
        for j2 in halfints_up_to(max_j) {
            let tag = format!("(j1={j1},j2={j2})");
            coupling.check(format!("cg_ur_unitarity{tag}"), cg_ur_unitarity_defect(j1, j2, r)?, tol.loose);
            let ortho = verify_fbar_orthogonality(j1, j2, r, tol.loose)?;
            for mut c in ortho.checks {
                c.name = format!("{}{tag}", c.name);
                coupling.checks.push(c);
            }
        }
    }
    suites.push(coupling);

    let mut symmetry = VerificationReport::new("fbar_symmetry", None, Some(r));
    let mut worst = std::collections::BTreeMap::<String, f64>::new();
    for j1 in halfints_up_to(max_j) {
        for j2 in halfints_up_to(max_j) {
            for j3 in halfints_up_to(max_j) {
                for c in verify_fbar_permutation([j1, j2, j3], r, tol.exact)?.checks {
                    let e = worst.entry(c.name).or_insert(0.0);
                    *e = e.max(c.residual);
                }
            }
        }
    }
    for (name, res) in worst {
        symmetry.check(name, res, tol.exact);
    }
    suites.push(symmetry);

    let mut we = VerificationReport::new("wigner_eckart", None, Some(r));
    for j in halfints_up_to(max_j).filter(|j| j.twice() >= 1) {
        let scalar = wigner_eckart_check(&TensorComponents::scalar_identity(j)?, j, j, r, tol.exact)?;
        let expect = f64::from(j.twice() + 1).sqrt();
        let dev = (scalar.reduced.re - expect).hypot(scalar.reduced.im).max(scalar.max_residual);
        we.check(format!("scalar(j={j})"), dev, tol.exact);
        if j.twice() >= 2 {
            let ops = build_j(&UrParams::new(j.twice() as u32 + 1, r)?)?;
            let v = wigner_eckart_check(&TensorComponents::vector_from_polar(&ops)?, j, j, r, tol.loose)?;
            we.check(format!("vector(j={j})"), v.relative_spread, tol.loose);
            let q = wigner_eckart_check(&TensorComponents::quadrupole_from_polar(&ops)?, j, j, r, tol.loose)?;
            we.check(format!("quadrupole(j={j})"), q.relative_spread, tol.loose);
        }
    }
    suites.push(we);

    let mut ninej = VerificationReport::new("ninej", None, Some(r));
    let (mut worst, mut literal) = (0.0f64, 0.0f64);
    let cap = if max_j.twice() < 2 { max_j } else { HalfInt::ONE };
    for j in ninej_cases(cap) {
        let c = ninej_from_fbar(&j, r)?;
        worst = worst.max(c.residual);
        literal = literal.max(c.literal_residual);
    }
    ninej.check("fbar_substitution", worst, tol.loose);
    suites.push(ninej);

    suites.push(verify_sphere_orthonormality(8, &QuadratureGrid::for_degree(8), tol.loose));
    for l in 1..=4 {
        suites.push(verify_yr_orthonormality(l, r, &QuadratureGrid::for_degree(l), tol.loose)?);
    }

    Ok(SweepReport {
        suite: "report".into(),
        max_j: max_j.to_string(),
        r,
        pass: suites.iter().all(VerificationReport::passed),
        ninej_literal_max_residual: literal,
        suites,
    })
}
