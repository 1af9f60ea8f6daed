#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use geolab_core::expr::Point;
use geolab_core::linalg::Mat;
use geolab_core::sampling::sample_rng;
use geolab_core::tensor::{
    constant_curvature_residual, conformal_scaling_check, curvature_at, einstein_residual, kulkarni_nomizu,
    sectional_curvature, Array, Depth, MetricSpec,
};
use geolab_core::Domain;
use rand::Rng;

fn fixtures() -> Vec<(&'static str, MetricSpec, Domain)> {
    vec![
        ("flat3", flat(&["x", "y", "z"]), Domain::uniform(&["x", "y", "z"], -2.0, 2.0)),
        ("sphere2", sphere2(), Domain::new().with("r", 0.3, 2.8).with("th", -3.0, 3.0)),
        ("exp_einstein3", exp_einstein3(), Domain::uniform(&["r", "x2", "x3"], -1.0, 1.0)),
        ("desitter3", desitter3(), desitter_domain()),
        ("desitter3_riemannian", desitter3_riemannian(), desitter_domain()),
        ("example2_lorentzian", example2_lorentzian(), example2_domain()),
        ("example2_riemannian", example2_riemannian(), example2_domain()),
        ("brinkmann_cubic", brinkmann("x2^3", 2), Domain::uniform(&["v", "u", "x2", "x3"], -1.0, 1.0)),
    ]
}

#[test]
fn brinkmann_christoffels_match_closed_form() {
    let m = brinkmann("x2^2 + x3^2", 2);
    let b = curvature_at(&m, &Point::from_chart(m.coords(), &[0.0, 0.0, 1.0, 1.0]), Depth::Ricci).unwrap();
    let (v, u, x2, x3) = (0, 1, 2, 3);
    let mut expected = Array::<3>::zeros(4);
    for (k, i, j, val) in [(v, x2, u, 1.0), (v, x3, u, 1.0), (x2, u, u, -1.0), (x3, u, u, -1.0)] {
        expected[[k, i, j]] = val;
        expected[[k, j, i]] = val;
    }
    assert!(b.gamma.max_abs_diff(&expected) <= 1e-12, "{:?}", b.gamma.data());
    assert_eq!(b.gamma[[v, u, u]], 0.0);
}

#[test]
fn sphere_curvature_matches_classical_value() {
    let m = sphere2();
    let p = Point::from_chart(m.coords(), &[std::f64::consts::FRAC_PI_4, 1.0]);
    let b = curvature_at(&m, &p, Depth::Ricci).unwrap();
    assert!((b.rm[[0, 1, 1, 0]] - 0.5).abs() <= 1e-12);
    assert!(constant_curvature_residual(&m, 1.0, &p).unwrap() <= 1e-9);
    let k = sectional_curvature(&m, &p, &[1.0, 0.0], &[0.0, 1.0 / 0.5f64.sqrt()]).unwrap();
    assert!((k - 1.0).abs() <= 1e-12);
}

#[test]
fn riemann_agrees_with_nested_finite_difference_oracle() {
    for (name, m, dom) in fixtures() {
        if m.dim() > 3 {
            continue;
        }
        for p in dom.samples(3, 11) {
            let x = p.values_for(m.coords()).unwrap();
            let b = curvature_at(&m, &p, Depth::Ricci).unwrap();
            let oracle = fd_riemann(&m, &x);
            let err = b.rm.data().iter().zip(&oracle).fold(0.0f64, |e, (a, o)| e.max((a - o).abs()));
            assert!(err <= 1e-6, "{name} at {p:?}: {err:e}");
        }
    }
}

#[test]
fn christoffels_agree_with_finite_difference_oracle() {
    for (name, m, dom) in fixtures() {
        if m.dim() > 3 {
            continue;
        }
        for p in dom.samples(5, 3) {
            let x = p.values_for(m.coords()).unwrap();
            let b = curvature_at(&m, &p, Depth::Ricci).unwrap();
            let oracle = fd_christoffel(&m, &x, 1e-3);
            for [k, i, j] in b.gamma.indices() {
                let err = (b.gamma[[k, i, j]] - oracle[k][i][j]).abs();
                assert!(err <= 1e-6, "{name} Γ^{k}_{i}{j}: {err:e}");
            }
        }
    }
}

/// (∇_a T)(...) = ∂_a T(...) − Σ Γ corrections, with ∂_a by finite differences of the engine's own Rm and Ric.
#[test]
fn covariant_derivatives_agree_with_finite_differences() {
    for (name, m, dom) in fixtures() {
        let n = m.dim();
        for p in dom.samples(2, 5) {
            let x = p.values_for(m.coords()).unwrap();
            let b = curvature_at(&m, &p, Depth::Derivatives).unwrap();
            let at = |y: &[f64]| curvature_at(&m, &Point::from_chart(m.coords(), y), Depth::Ricci).unwrap();
            let d: Vec<(Vec<f64>, Mat)> = (0..n)
                .map(|a| {
                    fd4(&x, a, 1e-3, at, |v, h| {
                        let rm = (0..n.pow(4))
                            .map(|f| (v[0].rm.data()[f] - 8.0 * v[1].rm.data()[f] + 8.0 * v[2].rm.data()[f] - v[3].rm.data()[f]) / (12.0 * h))
                            .collect();
                        let ric = Mat::from_fn(n, |i, j| {
                            (v[0].ric[(i, j)] - 8.0 * v[1].ric[(i, j)] + 8.0 * v[2].ric[(i, j)] - v[3].ric[(i, j)]) / (12.0 * h)
                        });
                        (rm, ric)
                    })
                })
                .collect();
            let g = &b.gamma;
            let rm = |i: usize, j: usize, k: usize, l: usize| b.rm[[i, j, k, l]];
            let cov_rm = b.cov_rm.as_ref().unwrap();
            let cov_ric = b.cov_ric.as_ref().unwrap();
            for [a, bb, c, dd, e] in cov_rm.indices() {
                let mut v = d[a].0[((bb * n + c) * n + dd) * n + e];
                for s in 0..n {
                    v -= g[[s, a, bb]] * rm(s, c, dd, e)
                        + g[[s, a, c]] * rm(bb, s, dd, e)
                        + g[[s, a, dd]] * rm(bb, c, s, e)
                        + g[[s, a, e]] * rm(bb, c, dd, s);
                }
                let err = (v - cov_rm[[a, bb, c, dd, e]]).abs();
                assert!(err <= 1e-6, "{name} ∇Rm {:?}: {err:e}", [a, bb, c, dd, e]);
            }
            for [a, bb, c] in cov_ric.indices() {
                let mut v = d[a].1[(bb, c)];
                for s in 0..n {
                    v -= g[[s, a, bb]] * b.ric[(s, c)] + g[[s, a, c]] * b.ric[(bb, s)];
                }
                let err = (v - cov_ric[[a, bb, c]]).abs();
                assert!(err <= 1e-6, "{name} ∇Ric {:?}: {err:e}", [a, bb, c]);
            }
        }
    }
}

#[test]
fn algebraic_identities_hold_at_twenty_points() {
    for (name, m, dom) in fixtures() {
        for p in dom.samples(20, 2024) {
            let b = curvature_at(&m, &p, Depth::Derivatives).unwrap();
            let s = b.symmetry_residuals();
            assert!(s.max() <= 1e-9, "{name} {s:?}");
            assert!(b.second_bianchi_residual().unwrap() <= 1e-8, "{name}");
        }
    }
}

#[test]
fn weyl_vanishes_in_dimension_three() {
    for (name, m, dom) in fixtures() {
        if m.dim() != 3 {
            continue;
        }
        for p in dom.samples(4, 9) {
            let b = curvature_at(&m, &p, Depth::Full).unwrap();
            let w = b.weyl.unwrap().max_abs();
            assert!(w <= 1e-9 * b.rm.max_abs().max(1.0), "{name}: {w:e}");
        }
    }
    let m = brinkmann("x2^3", 2);
    let b = curvature_at(&m, &Point::from_chart(m.coords(), &[0.0, 0.1, 0.5, 0.2]), Depth::Full).unwrap();
    assert!(b.weyl.unwrap().max_abs() > 0.1);
}

#[test]
fn exponential_metric_is_einstein() {
    let m = exp_einstein3();
    for p in Domain::uniform(m.coords(), -1.0, 1.0).samples(20, 1) {
        assert!(einstein_residual(&m, -1.0, &p).unwrap() <= 1e-9);
    }
}

#[test]
fn de_sitter_has_constant_curvature_one() {
    let m = desitter3();
    for p in desitter_domain().samples(5, 77) {
        assert!(constant_curvature_residual(&m, 1.0, &p).unwrap() <= 1e-9);
        assert!(einstein_residual(&m, 2.0, &p).unwrap() <= 1e-9);
    }
}

#[test]
fn example_two_lorentzian_metric_is_einstein() {
    let m = example2_lorentzian();
    let p = Point::from_chart(m.coords(), &[0.5, 0.0, 0.0]);
    assert!(einstein_residual(&m, 1.0, &p).unwrap() <= 1e-9);
}

#[test]
fn wick_dual_of_de_sitter_has_curvature_minus_one_on_planes_containing_t() {
    let m = desitter3_riemannian();
    for p in desitter_domain().samples(5, 4) {
        let k = sectional_curvature(&m, &p, &[-1.0, 0.0, 0.0], &[0.0, 0.7, 0.3]).unwrap();
        assert!((k + 1.0).abs() <= 1e-9, "{k}");
    }
}

#[test]
fn kulkarni_nomizu_is_symmetric_and_kills_rank_one_squares() {
    let mut rng = sample_rng(5, 0);
    for _ in 0..20 {
        let n = 4;
        let sym = |rng: &mut rand_chacha::ChaCha8Rng| {
            let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Mat::from_fn(n, |i, j| vals[i * n + j]).symmetrized()
        };
        let p = sym(&mut rng);
        let q = sym(&mut rng);
        let pq = kulkarni_nomizu(&p, &q).unwrap();
        assert!(pq.max_abs_diff(&kulkarni_nomizu(&q, &p).unwrap()) <= 1e-15);
        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let tt = Mat::from_fn(n, |i, j| t[i] * t[j]);
        assert!(kulkarni_nomizu(&tt, &tt).unwrap().max_abs() <= 1e-14);
    }
}

#[test]
fn constant_curvature_implies_einstein() {
    for (m, dom, lambda) in [(sphere2(), Domain::new().with("r", 0.3, 2.8).with("th", 0.0, 1.0), 1.0), (desitter3(), desitter_domain(), 1.0)] {
        for p in dom.samples(5, 8) {
            if constant_curvature_residual(&m, lambda, &p).unwrap() <= 1e-9 {
                let e = einstein_residual(&m, (m.dim() as f64 - 1.0) * lambda, &p).unwrap();
                assert!(e <= 1e-9);
            }
        }
    }
}

#[test]
fn curvature_scales_as_expected_under_constant_rescaling() {
    for (name, m, dom) in fixtures() {
        let p = &dom.samples(1, 31)[0];
        let r = conformal_scaling_check(&m, 2.0, p).unwrap();
        assert!(r.ric <= 1e-8 && r.rm <= 1e-8 && r.weyl.unwrap_or(0.0) <= 1e-8, "{name} {r:?}");
        let one = conformal_scaling_check(&m, 1.0, p).unwrap();
        assert_eq!((one.ric, one.rm), (0.0, 0.0));
    }
    let m = flat(&["x", "y", "z"]);
    let r = conformal_scaling_check(&m, 3.5, &Point::from_chart(m.coords(), &[1.0, 2.0, 3.0])).unwrap();
    assert_eq!((r.ric, r.rm, r.weyl), (0.0, 0.0, Some(0.0)));
}
