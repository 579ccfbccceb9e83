//! Spherical harmonics and the `U_r` eigenfunctions on the sphere,
//! `[y_r]_{ℓα} = (2ℓ+1)^{−1/2} Σ_m q^{αm} Y_{ℓm}`, with a product
//! Gauss–Legendre × uniform-φ quadrature for inner products.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::czero;
use crate::polar::{alpha_phase, RParam};
use crate::qarith::{Amplitude, HalfInt};
use crate::report::{format_real, VerificationReport};
use crate::wra::alpha_index;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidArgument(format!("point (θ = {theta}, φ = {phi}) out of range")));
        }
        Ok(SphericalPoint { theta, phi })
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn phi(self) -> f64 {
        self.phi
    }
}

/// Fully normalized `P̄_ℓ^m(x)` for `0 ≤ m ≤ ℓ ≤ l_max`, Condon–Shortley phase
/// included, so that `Y_{ℓm} = P̄_ℓ^m(cos θ) e^{imφ}`. Index `ℓ(ℓ+1)/2 + m`.
fn legendre_table(l_max: usize, x: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; idx(l_max, l_max) + 1];
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= -sin * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        p[idx(m, m)] = pmm;
        if m < l_max {
            p[idx(m + 1, m)] = x * ((2 * m + 3) as f64).sqrt() * pmm;
        }
        for l in m + 2..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// All `Y_{ℓm}(p)` for `ℓ ≤ l_max`, ordered by `ℓ`, then `m = −ℓ … ℓ`.
pub fn harmonics_up_to(l_max: u32, p: SphericalPoint) -> Vec<Amplitude> {
    let l_max = l_max as usize;
    let table = legendre_table(l_max, p.theta.cos());
    let mut out = Vec::with_capacity((l_max + 1) * (l_max + 1));
    for l in 0..=l_max {
        for m in -(l as i64)..=(l as i64) {
            let ma = m.unsigned_abs() as usize;
            let y = Amplitude::from_polar(table[l * (l + 1) / 2 + ma], ma as f64 * p.phi);
            // Y_{ℓ,−m} = (−1)^m Y_{ℓm}*
            out.push(if m >= 0 {
                y
            } else if ma.is_multiple_of(2) {
                y.conj()
            } else {
                -y.conj()
            });
        }
    }
    out
}

pub fn spherical_harmonic(l: u32, m: i32, p: SphericalPoint) -> Result<Amplitude> {
    if m.unsigned_abs() > l {
        return Err(Error::InvalidArgument(format!("|m| = {} exceeds ℓ = {l}", m.unsigned_abs())));
    }
    let all = harmonics_up_to(l, p);
    Ok(all[(l * l) as usize + (m + l as i32) as usize])
}

fn yr_from_row(l: u32, s: u32, r: RParam, row: &[Amplitude]) -> Amplitude {
    let j = HalfInt::from_int(l as i32);
    let norm = 1.0 / f64::from(2 * l + 1).sqrt();
    j.projections().zip(row).fold(czero(), |acc, (m, y)| acc + alpha_phase(j, s, m, r, 1) * y) * norm
}

fn check_l(l: u32) -> Result<()> {
    if l == 0 {
        Err(Error::UnsupportedLimit)
    } else {
        Ok(())
    }
}

/// `[y_r]_{ℓα}(p)` with `α = −ℓr + s`.
pub fn y_r_eigenfunction(l: u32, s: i64, r: f64, p: SphericalPoint) -> Result<Amplitude> {
    check_l(l)?;
    let s = alpha_index(HalfInt::from_int(l as i32), s)?;
    let all = harmonics_up_to(l, p);
    Ok(yr_from_row(l, s, RParam::new(r)?, &all[(l * l) as usize..]))
}

/// Gauss–Legendre nodes and weights in `cos θ` times `n_φ` uniform azimuths.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidArgument("quadrature orders must be positive".into()));
        }
        let n = n_theta;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                // p1 = P_n, p0 = P_{n−1}
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(QuadratureGrid { nodes, weights, n_phi })
    }

    /// The smallest grid integrating products of harmonics up to `l_max` exactly.
    pub fn for_degree(l_max: u32) -> Self {
        Self::new(l_max as usize + 1, 2 * l_max as usize + 1).expect("positive orders")
    }

    pub fn n_theta(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn supports(&self, l_max: u32) -> bool {
        self.n_theta() > l_max as usize && self.n_phi > 2 * l_max as usize
    }

    /// Points with their solid-angle weights.
    pub fn points(&self) -> impl Iterator<Item = (SphericalPoint, f64)> + '_ {
        let dphi = 2.0 * PI / self.n_phi as f64;
        self.nodes.iter().zip(&self.weights).flat_map(move |(&x, &w)| {
            (0..self.n_phi).map(move |k| (SphericalPoint { theta: x.acos(), phi: k as f64 * dphi }, w * dphi))
        })
    }

    /// `Σ_i w_i F(p_i)` over the grid; `f` returns a vector of values per point.
    fn gram(&self, f: impl Fn(SphericalPoint) -> Vec<Amplitude>) -> Vec<Vec<Amplitude>> {
        let mut g: Vec<Vec<Amplitude>> = Vec::new();
        for (p, w) in self.points() {
            let v = f(p);
            if g.is_empty() {
                g = vec![vec![czero(); v.len()]; v.len()];
            }
            for (a, va) in v.iter().enumerate() {
                for (b, vb) in v.iter().enumerate() {
                    g[a][b] += va.conj() * vb * w;
                }
            }
        }
        g
    }
}

fn identity_defect(g: &[Vec<Amplitude>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, row) in g.iter().enumerate() {
        for (b, z) in row.iter().enumerate() {
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((z - expect).norm());
        }
    }
    worst
}

/// Orthonormality of all `Y_{ℓm}` with `ℓ ≤ l_max`, and the pointwise sum rule
/// `Σ_m |Y_{ℓm}|² = (2ℓ+1)/4π`.
pub fn verify_sphere_orthonormality(l_max: u32, grid: &QuadratureGrid, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("sphere", None, None);
    rep.check("weights_sum", (grid.weight_sum() - 2.0).abs(), tol);
    let g = grid.gram(|p| harmonics_up_to(l_max, p));
    rep.check(format!("y_orthonormality(l_max={l_max})"), identity_defect(&g), tol);
    let mut sum_rule = 0.0f64;
    for (p, _) in grid.points() {
        let ys = harmonics_up_to(l_max, p);
        for l in 0..=l_max as usize {
            let total: f64 = ys[l * l..(l + 1) * (l + 1)].iter().map(|y| y.norm_sqr()).sum();
            sum_rule = sum_rule.max((total - (2 * l + 1) as f64 / (4.0 * PI)).abs());
        }
    }
    rep.check("sum_rule", sum_rule, tol);
    rep
}

/// Orthonormality of `{[y_r]_{ℓα}}_α` for one `(ℓ, r)`.
pub fn verify_yr_orthonormality(l: u32, r: f64, grid: &QuadratureGrid, tol: f64) -> Result<VerificationReport> {
    check_l(l)?;
    let rp = RParam::new(r)?;
    let mut rep = VerificationReport::new("yr", None, Some(r));
    let base = (l * l) as usize;
    let g = grid.gram(|p| {
        let ys = harmonics_up_to(l, p);
        (0..=2 * l).map(|s| yr_from_row(l, s, rp, &ys[base..])).collect()
    });
    rep.check(format!("yr_orthonormality(l={l})"), identity_defect(&g), tol);
    Ok(rep)
}

/// `theta,phi,re,im` rows of `f` over the grid.
pub fn grid_csv(grid: &QuadratureGrid, f: impl Fn(SphericalPoint) -> Result<Amplitude>) -> Result<String> {
    let mut out = String::from("theta,phi,re,im\n");
    for (p, _) in grid.points() {
        let z = f(p)?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_real(p.theta),
            format_real(p.phi),
            format_real(z.re),
            format_real(z.im)
        ));
    }
    Ok(out)
}
