//! Independent reference implementations. Nothing here calls the library's
//! coupling code; only plain numbers go in and out.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

/// Clebsch–Gordan table for `(2j1, 2j2)` built from highest-weight states:
/// `|J J⟩` is the unit vector of the `M = J` block orthogonal to all larger
/// `J`, with a positive `m1 = j1` component, and lower states follow from
/// `J− = J1− + J2−`. Keys are `(2J, 2m1, 2m2)`.
pub fn lowering_cg(tj1: i32, tj2: i32) -> HashMap<(i32, i32, i32), f64> {
    let n1 = (tj1 + 1) as usize;
    let n2 = (tj2 + 1) as usize;
    // product index i1 * n2 + i2 with 2m = -2j + 2i
    let tm = |tj: i32, i: usize| -tj + 2 * i as i32;
    let lower_coeff = |tj: i32, tmv: i32| {
        // ⟨m−1| J− |m⟩ = √((j+m)(j−m+1))
        let (j, m) = (f64::from(tj) / 2.0, f64::from(tmv) / 2.0);
        ((j + m) * (j - m + 1.0)).sqrt()
    };
    let lower = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let c = v[i1 * n2 + i2];
                if c == 0.0 {
                    continue;
                }
                if i1 > 0 {
                    out[(i1 - 1) * n2 + i2] += c * lower_coeff(tj1, tm(tj1, i1));
                }
                if i2 > 0 {
                    out[i1 * n2 + i2 - 1] += c * lower_coeff(tj2, tm(tj2, i2));
                }
            }
        }
        out
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut states: HashMap<(i32, i32), Vec<f64>> = HashMap::new();
    let mut out = HashMap::new();
    let mut tj = tj1 + tj2;
    while tj >= (tj1 - tj2).abs() {
        // candidates spanning the M = J block
        let mut top: Option<Vec<f64>> = None;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                if tm(tj1, i1) + tm(tj2, i2) != tj || top.is_some() {
                    continue;
                }
                let mut v = vec![0.0; n1 * n2];
                v[i1 * n2 + i2] = 1.0;
                let mut t = tj + 2;
                while t <= tj1 + tj2 {
                    let u = &states[&(t, tj)];
                    let p = dot(&v, u);
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
                    t += 2;
                }
                let norm = dot(&v, &v).sqrt();
                if norm > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= norm);
                    top = Some(v);
                }
            }
        }
        let mut v = top.expect("highest-weight state exists");
        let lead = (n1 - 1) * n2 + ((tj - tj1 + tj2) / 2) as usize;
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let mut m = tj;
        loop {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    if tm(tj1, i1) + tm(tj2, i2) == m {
                        out.insert((tj, tm(tj1, i1), tm(tj2, i2)), v[i1 * n2 + i2]);
                    }
                }
            }
            states.insert((tj, m), v.clone());
            if m == -tj {
                break;
            }
            let c = lower_coeff(tj, m);
            v = lower(&v).into_iter().map(|x| x / c).collect();
            m -= 2;
        }
        tj -= 2;
    }
    out
}

/// Looks up a coefficient from [`lowering_cg`], zero when absent.
pub fn oracle_cg(table: &HashMap<(i32, i32, i32), f64>, tj: i32, tm1: i32, tm2: i32) -> f64 {
    table.get(&(tj, tm1, tm2)).copied().unwrap_or(0.0)
}

fn fact(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn tri_ok(a: i32, b: i32, c: i32) -> bool {
    (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn delta(a: i32, b: i32, c: i32) -> f64 {
    (fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2) / fact((a + b + c) / 2 + 1)).sqrt()
}

/// Racah's single-sum 6-j symbol in twice-values.
pub fn sixj(t: [i32; 6]) -> f64 {
    let [a, b, c, d, e, f] = t;
    if !(tri_ok(a, b, c) && tri_ok(a, e, f) && tri_ok(d, b, f) && tri_ok(d, e, c)) {
        return 0.0;
    }
    let pre = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);
    let s = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let u = [(a + b + d + e) / 2, (a + c + d + f) / 2, (b + c + e + f) / 2];
    let lo = *s.iter().max().unwrap();
    let hi = *u.iter().min().unwrap();
    let mut sum = 0.0;
    for z in lo..=hi {
        let den = s.iter().map(|x| fact(z - x)).product::<f64>() * u.iter().map(|x| fact(x - z)).product::<f64>();
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * fact(z + 1) / den;
    }
    pre * sum
}

/// 9-j symbol as a single sum over products of three 6-j symbols, twice-values
/// in rows `[[a b c] [d e f] [g h i]]`.
pub fn ninej_via_sixj(t: [i32; 9]) -> f64 {
    let [a, b, c, d, e, f, g, h, i] = t;
    let lo = (a - i).abs().max((d - h).abs()).max((b - f).abs());
    let hi = (a + i).min(d + h).min(b + f);
    let mut sum = 0.0;
    let mut x = lo;
    while x <= hi {
        let sign = if x % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * f64::from(x + 1) * sixj([a, d, g, h, i, x]) * sixj([b, e, h, d, x, f]) * sixj([c, f, i, x, a, b]);
        x += 2;
    }
    sum
}

/// `exp(2πi α m / (2j+1))` straight from the definition.
pub fn phase(tj: i32, alpha: f64, tm: i32) -> Complex64 {
    let angle = 2.0 * PI * alpha * f64::from(tm) / 2.0 / f64::from(tj + 1);
    Complex64::from_polar(1.0, angle)
}

pub fn alpha(tj: i32, s: i64, r: f64) -> f64 {
    -f64::from(tj) / 2.0 * r + s as f64
}

/// The triple sum defining `(j1 j2 α1 α2 | j α; r)`, using the lowering oracle.
pub fn brute_cg_ur(tj1: i32, tj2: i32, s1: i64, s2: i64, tj: i32, s: i64, r: f64) -> Complex64 {
    let table = lowering_cg(tj1, tj2);
    let (a1, a2, a) = (alpha(tj1, s1, r), alpha(tj2, s2, r), alpha(tj, s, r));
    let mut sum = Complex64::new(0.0, 0.0);
    for tm1 in (-tj1..=tj1).step_by(2) {
        for tm2 in (-tj2..=tj2).step_by(2) {
            for tm in (-tj..=tj).step_by(2) {
                if tm != tm1 + tm2 {
                    continue;
                }
                let c = oracle_cg(&table, tj, tm1, tm2);
                sum += phase(tj, a, tm) * phase(tj1, -a1, tm1) * phase(tj2, -a2, tm2) * c;
            }
        }
    }
    sum / (f64::from((tj1 + 1) * (tj2 + 1) * (tj + 1))).sqrt()
}
