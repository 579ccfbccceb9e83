mod common;

use approx::assert_abs_diff_eq;
use wracah_core::polar::{build_j, UrParams};
use wracah_core::qarith::HalfInt;
use wracah_core::wigner::{cg, ninej, threejm, CouplingTable};
use wracah_core::wra::{cg_ur, f_symbol, fbar_symbol, ninej_from_fbar, wigner_eckart_check, TensorComponents};

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

#[test]
fn racah_matches_lowering_up_to_three() {
    let mut worst = 0.0f64;
    for tj1 in 0..=6 {
        for tj2 in 0..=6 {
            let table = common::lowering_cg(tj1, tj2);
            let mut tj = (tj1 - tj2).abs();
            while tj <= tj1 + tj2 {
                for tm1 in (-tj1..=tj1).step_by(2) {
                    for tm2 in (-tj2..=tj2).step_by(2) {
                        let tm = tm1 + tm2;
                        if tm.abs() > tj {
                            continue;
                        }
                        let v = cg(h(tj1), h(tm1), h(tj2), h(tm2), h(tj), h(tm)).unwrap();
                        worst = worst.max((v - common::oracle_cg(&table, tj, tm1, tm2)).abs());
                    }
                }
                tj += 2;
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn cg_example_values() {
    // (1/2 1/2 1/2 -1/2 | 1 0) = 1/√2 and (1 1 1 -1 | 0 0) = 1/√3
    assert_abs_diff_eq!(cg(h(1), h(1), h(1), h(-1), h(2), h(0)).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(cg(h(2), h(2), h(2), h(-2), h(0), h(0)).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    assert_eq!(cg(h(2), h(0), h(2), h(0), h(6), h(0)).unwrap(), 0.0);
}

#[test]
fn ninej_matches_sixj_sum() {
    let cases: [[i32; 9]; 6] = [
        [2, 2, 2, 2, 2, 2, 2, 2, 2],
        [2, 2, 2, 2, 2, 0, 2, 0, 2],
        [1, 1, 2, 1, 1, 2, 2, 2, 4],
        [2, 1, 3, 1, 2, 3, 3, 3, 2],
        [3, 2, 1, 1, 2, 3, 2, 2, 2],
        [4, 2, 2, 2, 2, 4, 2, 4, 2],
    ];
    for t in cases {
        let j = t.map(h);
        assert_abs_diff_eq!(ninej(&j), common::ninej_via_sixj(t), epsilon = 1e-12);
    }
    // fully stretched: {½ ½ 1; ½ ½ 1; 1 1 2} = 1/9
    assert_abs_diff_eq!(ninej(&[1, 1, 2, 1, 1, 2, 2, 2, 4].map(h)), 1.0 / 9.0, epsilon = 1e-14);
}

#[test]
fn cache_is_transparent() {
    let table = CouplingTable::new();
    for tj1 in 0..=4i32 {
        for tj2 in 0..=4 {
            for tm1 in (-tj1..=tj1).step_by(2) {
                for tm2 in (-tj2..=tj2).step_by(2) {
                    let mut tj = (tj1 - tj2).abs();
                    while tj <= tj1 + tj2 {
                        let args = (h(tj1), h(tm1), h(tj2), h(tm2), h(tj), h(tm1 + tm2));
                        let direct = cg(args.0, args.1, args.2, args.3, args.4, args.5).unwrap();
                        let first = table.cg(args.0, args.1, args.2, args.3, args.4, args.5).unwrap();
                        let again = table.cg(args.0, args.1, args.2, args.3, args.4, args.5).unwrap();
                        assert_eq!(direct.to_bits(), first.to_bits());
                        assert_eq!(first.to_bits(), again.to_bits());
                        let tjm = threejm(h(tj1), h(tj2), h(tj), h(tm1), h(tm2), h(-tm1 - tm2)).unwrap();
                        let tjm_c = table.threejm(h(tj1), h(tj2), h(tj), h(tm1), h(tm2), h(-tm1 - tm2)).unwrap();
                        assert_eq!(tjm.to_bits(), tjm_c.to_bits());
                        tj += 2;
                    }
                }
            }
        }
    }
    assert!(table.hits() > 0);
}

#[test]
fn cg_ur_matches_brute_force() {
    for (tj1, tj2, tj) in [(1, 1, 2), (1, 1, 0), (2, 1, 3), (2, 2, 2), (3, 2, 1)] {
        for r in [1.0, 0.0, 0.37, 2.37] {
            for s1 in 0..=tj1 as i64 {
                for s2 in 0..=tj2 as i64 {
                    for s in 0..=tj as i64 {
                        let v = cg_ur(h(tj1), h(tj2), s1, s2, h(tj), s, r).unwrap();
                        let o = common::brute_cg_ur(tj1, tj2, s1, s2, tj, s, r);
                        assert!((v - o).norm() < 1e-12, "{tj1} {tj2} {tj} {s1} {s2} {s} r={r}: {v} vs {o}");
                    }
                }
            }
        }
    }
}

#[test]
fn f_symbol_composition_and_column_swap() {
    let r = 1.0;
    for s1 in 0..=1 {
        for s2 in 0..=1 {
            for s3 in 0..=2 {
                // f(½ ½ 1) from the brute-force coupling coefficient
                let o = common::brute_cg_ur(1, 2, s2, s3, 1, s1, r).conj() / 2f64.sqrt();
                let v = f_symbol(h(1), h(1), h(2), s1, s2, s3, r).unwrap();
                assert!((v - o).norm() < 1e-12);
            }
        }
    }
    for tj1 in 0..=3 {
        for tj2 in 0..=3 {
            for tj3 in 0..=3 {
                if (tj1 + tj2 + tj3) % 2 != 0 {
                    continue;
                }
                let sign = if ((tj1 + tj2 + tj3) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                for s1 in 0..=tj1 as i64 {
                    for s2 in 0..=tj2 as i64 {
                        for s3 in 0..=tj3 as i64 {
                            let a = f_symbol(h(tj1), h(tj2), h(tj3), s1, s2, s3, 0.3).unwrap();
                            let b = f_symbol(h(tj1), h(tj3), h(tj2), s1, s3, s2, 0.3).unwrap();
                            assert!((b - a * sign).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn fbar_odd_triad_at_r_zero_is_imaginary() {
    let mut largest_im = 0.0f64;
    for s1 in 0..=2 {
        for s2 in 0..=2 {
            for s3 in 0..=2 {
                let v = fbar_symbol(h(2), h(2), h(2), s1, s2, s3, 0.0).unwrap();
                assert!(v.re.abs() < 1e-14);
                largest_im = largest_im.max(v.im.abs());
            }
        }
    }
    assert!(largest_im > 0.1);
}

#[test]
fn fbar_substitution_small_case() {
    let j = [2, 2, 2, 2, 2, 2, 2, 2, 2].map(h);
    let c = ninej_from_fbar(&j, 1.0).unwrap();
    assert!(c.residual <= 1e-10);
    assert_abs_diff_eq!(c.reference, common::ninej_via_sixj([2; 9]), epsilon = 1e-12);
    let trivial = ninej_from_fbar(&[2, 2, 6, 2, 2, 2, 2, 2, 2].map(h), 0.5).unwrap();
    assert_eq!(trivial.reference, 0.0);
    assert_eq!(trivial.value.re, 0.0);
}

#[test]
fn vector_reduced_element_closed_form() {
    // ⟨j‖J‖j⟩ = √(j(j+1)(2j+1)) under the convention used here
    for tj in 2..=6 {
        let j = h(tj);
        let ops = build_j(&UrParams::new(tj as u32 + 1, 0.6).unwrap()).unwrap();
        let we = wigner_eckart_check(&TensorComponents::vector_from_polar(&ops).unwrap(), j, j, 0.6, 1e-10).unwrap();
        let jv = j.value();
        assert_abs_diff_eq!(we.reduced.re, (jv * (jv + 1.0) * (2.0 * jv + 1.0)).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(we.reduced.im, 0.0, epsilon = 1e-10);
    }
}
