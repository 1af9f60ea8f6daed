#![allow(dead_code)]

use geolab_core::expr::{parse, Expr, Point};
use geolab_core::linalg::Mat;
use geolab_core::tensor::{MetricSpec, Signature};
use geolab_core::Domain;

pub fn metric(coords: &[&str], sig: Signature, lower: &[&[&str]]) -> MetricSpec {
    let rows: Vec<Vec<Expr>> = lower
        .iter()
        .map(|r| r.iter().map(|s| parse(s, coords).unwrap()).collect())
        .collect();
    MetricSpec::from_rows(coords, sig, &rows).unwrap()
}

pub fn exprs(coords: &[&str], items: &[&str]) -> Vec<Expr> {
    items.iter().map(|s| parse(s, coords).unwrap()).collect()
}

pub fn flat(coords: &[&str]) -> MetricSpec {
    let ones: Vec<Expr> = coords.iter().map(|_| Expr::one()).collect();
    MetricSpec::diagonal(coords, Signature::Riemannian, &ones).unwrap()
}

pub fn sphere2() -> MetricSpec {
    metric(&["r", "th"], Signature::Riemannian, &[&["1"], &["0", "sin(r)^2"]])
}

pub fn exp_einstein3() -> MetricSpec {
    metric(
        &["r", "x2", "x3"],
        Signature::Riemannian,
        &[&["1"], &["0", "exp(sqrt(2)*r)"], &["0", "0", "exp(sqrt(2)*r)"]],
    )
}

pub fn desitter3() -> MetricSpec {
    metric(
        &["t", "th", "ph"],
        Signature::Lorentzian,
        &[&["-1"], &["0", "cosh(t)^2"], &["0", "0", "cosh(t)^2*sin(th)^2"]],
    )
}

pub fn desitter3_riemannian() -> MetricSpec {
    metric(
        &["t", "th", "ph"],
        Signature::Riemannian,
        &[&["1"], &["0", "cosh(t)^2"], &["0", "0", "cosh(t)^2*sin(th)^2"]],
    )
}

pub fn desitter_domain() -> Domain {
    Domain::new().with("t", -1.0, 1.0).with("th", 0.3, 2.8).with("ph", -3.0, 3.0)
}

pub fn example2_lorentzian() -> MetricSpec {
    let c = ["x1", "x2", "x3"];
    metric(
        &c,
        Signature::Lorentzian,
        &[&["0"], &["1", "(x1+2)^2/2"], &["0", "0", "(x1+2)^2/4"]],
    )
}

pub fn example2_riemannian() -> MetricSpec {
    let c = ["x1", "x2", "x3"];
    metric(
        &c,
        Signature::Riemannian,
        &[&["4/(x1+2)^2"], &["1", "(x1+2)^2/2"], &["0", "0", "(x1+2)^2/4"]],
    )
}

pub fn example2_field() -> Vec<Expr> {
    exprs(&["x1", "x2", "x3"], &["-(x1+2)/sqrt(2)", "sqrt(2)/(x1+2)", "0"])
}

pub fn example2_domain() -> Domain {
    Domain::new().with("x1", -1.5, 3.0).with("x2", -2.0, 2.0).with("x3", -2.0, 2.0)
}

/// `2 dv du + H du² + Σ dx_i²` on `(v, u, x2, ...)`.
pub fn brinkmann(h: &str, transverse: usize) -> MetricSpec {
    let mut coords = vec!["v".to_string(), "u".to_string()];
    for i in 0..transverse {
        coords.push(format!("x{}", i + 2));
    }
    let hx = parse(h, &coords).unwrap();
    MetricSpec::from_fn(&coords, Signature::Lorentzian, |i, j| match (i, j) {
        (1, 0) => Expr::one(),
        (1, 1) => hx.clone(),
        (i, j) if i == j && i >= 2 => Expr::one(),
        _ => Expr::zero(),
    })
    .unwrap()
}

/// Metric matrix at raw coordinate values.
pub fn g_at(m: &MetricSpec, x: &[f64]) -> Mat {
    m.eval_metric(&Point::from_chart(m.coords(), x)).unwrap()
}

/// Fourth-order central difference of `f` along coordinate `k`.
pub fn fd4<T, U>(x: &[f64], k: usize, h: f64, f: impl Fn(&[f64]) -> T, combine: impl Fn(&[T; 4], f64) -> U) -> U {
    let shift = |s: f64| {
        let mut y = x.to_vec();
        y[k] += s * h;
        f(&y)
    };
    let vals = [shift(-2.0), shift(-1.0), shift(1.0), shift(2.0)];
    combine(&vals, h)
}

pub fn fd4_scalar(x: &[f64], k: usize, h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    fd4(x, k, h, f, |v, h| (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))
}

/// Christoffel symbols `[k][i][j] = Γ^k_ij` from finite differences of the metric values only.
pub fn fd_christoffel(m: &MetricSpec, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let dg: Vec<Mat> = (0..n)
        .map(|k| {
            fd4(x, k, h, |y| g_at(m, y), |v, h| {
                Mat::from_fn(n, |i, j| (v[0][(i, j)] - 8.0 * v[1][(i, j)] + 8.0 * v[2][(i, j)] - v[3][(i, j)]) / (12.0 * h))
            })
        })
        .collect();
    let ginv = g_at(m, x).inverse().unwrap();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n)
                                .map(|l| 0.5 * ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// All-lower Riemann tensor from `R^l_ijk = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`
/// with nested finite differences, lowered by `Rm_ijkl = g_lp R^p_ijk`.
pub fn fd_riemann(m: &MetricSpec, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h_inner = 1e-3;
    let h_outer = 2e-3;
    let gam = fd_christoffel(m, x, h_inner);
    let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|a| {
            fd4(x, a, h_outer, |y| fd_christoffel(m, y, h_inner), |v, h| {
                (0..n)
                    .map(|k| {
                        (0..n)
                            .map(|i| {
                                (0..n)
                                    .map(|j| (v[0][k][i][j] - 8.0 * v[1][k][i][j] + 8.0 * v[2][k][i][j] - v[3][k][i][j]) / (12.0 * h))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
        })
        .collect();
    let g = g_at(m, x);
    let mut out = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        let mut r = dgam[i][p][j][k] - dgam[j][p][i][k];
                        for mm in 0..n {
                            r += gam[p][i][mm] * gam[mm][j][k] - gam[p][j][mm] * gam[mm][i][k];
                        }
                        s += g[(l, p)] * r;
                    }
                    out[((i * n + j) * n + k) * n + l] = s;
                }
            }
        }
    }
    out
}
