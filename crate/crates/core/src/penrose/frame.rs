use rand::Rng;

use crate::expr::Point;
use crate::linalg::Mat;
use crate::sampling::sample_rng;
use crate::tol;

use super::{AxisMetric, PenroseError, RosenProfile};

const REORTHONORMALIZE_EVERY: usize = 100;

/// Uniform grid `u_min, u_min + h, …, u_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    u_min: f64,
    u_max: f64,
    steps: usize,
}

impl Grid {
    /// The interval length must be a whole number of steps (at least 4).
    pub fn new(u_min: f64, u_max: f64, h: f64) -> Result<Self, PenroseError> {
        if !(u_min.is_finite() && u_max.is_finite() && h.is_finite()) || u_max <= u_min || h <= 0.0 {
            return Err(PenroseError::Grid(format!("need u_min < u_max and h > 0, got {u_min}:{u_max}:{h}")));
        }
        let len = u_max - u_min;
        let steps = (len / h).round();
        if (steps * h - len).abs() > 1e-9 * len {
            return Err(PenroseError::Grid(format!("interval length {len} is not a multiple of h = {h}")));
        }
        if steps < 4.0 {
            return Err(PenroseError::Grid("at least 5 nodes are required".into()));
        }
        Ok(Grid { u_min, u_max, steps: steps as usize })
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn h(&self) -> f64 {
        (self.u_max - self.u_min) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.steps {
            self.u_max
        } else {
            self.u_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Index of the node at `u`.
    pub fn locate(&self, u: f64) -> Result<usize, PenroseError> {
        let k = ((u - self.u_min) / self.h()).round();
        if k < 0.0 || k > self.steps as f64 || (self.node(k as usize) - u).abs() > 1e-9 * self.h() {
            return Err(PenroseError::OffGrid(u));
        }
        Ok(k as usize)
    }

    /// Cubic Lagrange interpolation of nodal matrices at `u`.
    pub fn interpolate(&self, values: &[Mat], u: f64) -> Result<Mat, PenroseError> {
        if !(self.u_min..=self.u_max).contains(&u) {
            return Err(PenroseError::OffGrid(u));
        }
        let h = self.h();
        let k = (((u - self.u_min) / h).floor() as usize).clamp(1, self.steps - 2);
        let s = (u - self.node(k)) / h;
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        let n = values[0].dim();
        Ok(Mat::from_fn(n, |i, j| (0..4).map(|q| w[q] * values[k - 1 + q][(i, j)]).sum()))
    }

    /// Fourth-order derivative of nodal matrices (one-sided at the two ends).
    pub fn differentiate(&self, f: &[Mat]) -> Vec<Mat> {
        let h = self.h();
        let last = self.len() - 1;
        let n = f[0].dim();
        let comb = |c: [f64; 5], idx: [usize; 5], sign: f64| {
            Mat::from_fn(n, |i, j| sign * (0..5).map(|q| c[q] * f[idx[q]][(i, j)]).sum::<f64>() / (12.0 * h))
        };
        (0..self.len())
            .map(|k| match k {
                0 => comb([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4], 1.0),
                1 => comb([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4], 1.0),
                k if k == last => comb([-25.0, 48.0, -36.0, 16.0, -3.0], [k, k - 1, k - 2, k - 3, k - 4], -1.0),
                k if k == last - 1 => comb([-3.0, -10.0, 18.0, -6.0, 1.0], [k + 1, k, k - 1, k - 2, k - 3], -1.0),
                k => comb([1.0, -8.0, 0.0, 8.0, -1.0], [k - 2, k - 1, k, k + 1, k + 2], 1.0),
            })
            .collect()
    }
}

/// Orthonormal frame along the axis: `C = C₀ O` with `Cᵀ ḡ C = I` and `Cᵀ ḡ Ċ` symmetric.
#[derive(Debug, Clone)]
pub struct FrameSolution {
    pub grid: Grid,
    pub c: Vec<Mat>,
    pub o: Vec<Mat>,
    /// `M = C₀ᵀ ḡ Ċ₀`
    pub m: Vec<Mat>,
    pub c_dot: Vec<Mat>,
    /// `S = Ėᵀ E` for `E = C⁻¹`, the quadratic form in the `v` shift.
    pub s: Vec<Mat>,
    /// Largest `‖Cᵀ ḡ C − I‖`, `‖Cᵀ ḡ Ċ − (Cᵀ ḡ Ċ)ᵀ‖`, `‖OᵀO − I‖` over the grid.
    pub orthonormality: f64,
    pub symmetry: f64,
    pub orthogonality: f64,
    pub reorthonormalizations: usize,
}

/// Brinkmann profile `H(u, x) = A_kl(u) x^k x^l` sampled on the grid.
#[derive(Debug, Clone)]
pub struct BrinkmannProfile {
    pub grid: Grid,
    pub a: Vec<Mat>,
    /// `∂_u A` by fourth-order differences on the grid.
    pub da: Vec<Mat>,
    /// Largest `‖A − Aᵀ‖` before symmetrization.
    pub asymmetry: f64,
}

impl BrinkmannProfile {
    pub fn dim(&self) -> usize {
        self.a[0].dim()
    }

    pub fn h_value(&self, u: f64, x: &[f64]) -> Result<f64, PenroseError> {
        Ok(self.grid.interpolate(&self.a, u)?.bilinear(x, x))
    }

    /// Profile with `A ↦ −A`, for mutation tests.
    pub fn negated(&self) -> Self {
        BrinkmannProfile {
            grid: self.grid,
            a: self.a.iter().map(|a| a.scale(-1.0)).collect(),
            da: self.da.iter().map(|a| a.scale(-1.0)).collect(),
            asymmetry: self.asymmetry,
        }
    }
}

/// Cholesky gauge and its first two derivatives at one `u`.
struct Gauge {
    g: Mat,
    dg: Mat,
    c0: Mat,
    dc0: Mat,
    ddc0: Mat,
}

fn lower_half(x: &Mat) -> Mat {
    Mat::from_fn(x.dim(), |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => x[(i, j)],
        std::cmp::Ordering::Equal => 0.5 * x[(i, j)],
        std::cmp::Ordering::Less => 0.0,
    })
}

fn gauge(axis: &AxisMetric, u: f64) -> Result<Gauge, PenroseError> {
    let (g, g1, g2) = axis.eval_derivatives(u)?;
    let l = g
        .cholesky()
        .map_err(|_| PenroseError::NotPositiveDefinite { var: axis.var().to_string(), at: u })?;
    let li = l.lower_inverse()?;
    let lit = li.transpose();
    // L̇ = L Φ(X), X = L⁻¹ ḡ' L⁻ᵀ, Φ = strict lower part + half diagonal
    let x = &(&li * &g1) * &lit;
    let ld = &l * &lower_half(&x);
    let xd = &(&(&(&li * &g2) * &lit) - &(&(&li * &ld) * &x)) - &(&(&x * &ld.transpose()) * &lit);
    let ldd = &(&ld * &lower_half(&x)) + &(&l * &lower_half(&xd));
    let c0 = lit;
    let ldt = ld.transpose();
    let dc0 = (&(&c0 * &ldt) * &c0).scale(-1.0);
    let twice = (&(&(&(&c0 * &ldt) * &c0) * &ldt) * &c0).scale(2.0);
    let ddc0 = &twice - &(&(&c0 * &ldd.transpose()) * &c0);
    Ok(Gauge { g, dg: g1, c0, dc0, ddc0 })
}

impl Gauge {
    fn m(&self) -> Mat {
        &(&self.c0.transpose() * &self.g) * &self.dc0
    }

    fn m_dot(&self) -> Mat {
        let a = &(&self.dc0.transpose() * &self.g) * &self.dc0;
        let b = &(&self.c0.transpose() * &self.dg) * &self.dc0;
        let c = &(&self.c0.transpose() * &self.g) * &self.ddc0;
        &(&a + &b) + &c
    }
}

fn skew(m: &Mat) -> Mat {
    (&m.transpose() - m).scale(0.5)
}

/// Solves for the frame and the quadratic profile of the Brinkmann form.
pub fn rosen_to_brinkmann(rosen: &RosenProfile, grid: &Grid) -> Result<(FrameSolution, BrinkmannProfile), PenroseError> {
    let axis = rosen.axis();
    let dim = axis.dim();
    let h = grid.h();
    let nodes: Vec<Gauge> = grid.nodes().iter().map(|&u| gauge(axis, u)).collect::<Result<_, _>>()?;

    let mut o = Vec::with_capacity(grid.len());
    o.push(Mat::identity(dim));
    let mut reorth = 0;
    for k in 0..grid.len() - 1 {
        let u = grid.node(k);
        let k1m = skew(&nodes[k].m());
        let kmid = skew(&gauge(axis, u + 0.5 * h)?.m());
        let k2m = skew(&nodes[k + 1].m());
        let ok = &o[k];
        let k1 = &k1m * ok;
        let k2 = &kmid * &(ok + &k1.scale(0.5 * h));
        let k3 = &kmid * &(ok + &k2.scale(0.5 * h));
        let k4 = &k2m * &(ok + &k3.scale(h));
        let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
        let mut next = ok + &incr.scale(h / 6.0);
        if (k + 1) % REORTHONORMALIZE_EVERY == 0 && next.orthogonality_defect() > tol::FRAME / 10.0 {
            next = next.polar_orthogonal()?;
            reorth += 1;
        }
        o.push(next);
    }

    let mut frame = FrameSolution {
        grid: *grid,
        c: Vec::with_capacity(grid.len()),
        o: Vec::new(),
        m: Vec::with_capacity(grid.len()),
        c_dot: Vec::with_capacity(grid.len()),
        s: Vec::with_capacity(grid.len()),
        orthonormality: 0.0,
        symmetry: 0.0,
        orthogonality: 0.0,
        reorthonormalizations: reorth,
    };
    let mut a_nodes = Vec::with_capacity(grid.len());
    let mut asymmetry = 0.0f64;
    let identity = Mat::identity(dim);
    for (k, gk) in nodes.iter().enumerate() {
        let ok = &o[k];
        let mk = gk.m();
        let sk = skew(&mk);
        let sdot = skew(&gk.m_dot());
        let c = &gk.c0 * ok;
        let so = &sk * ok;
        let c_dot = &(&gk.dc0 * ok) + &(&gk.c0 * &so);
        let inner = &(&sdot * ok) + &(&sk * &so);
        let c_ddot = &(&(&gk.ddc0 * ok) + &(&gk.dc0 * &so).scale(2.0)) + &(&gk.c0 * &inner);

        let u = grid.node(k);
        let ct = c.transpose();
        let checks = [
            ("C^T g C = I", (&(&(&ct * &gk.g) * &c) - &identity).max_abs()),
            ("C^T g C' symmetric", (&(&ct * &gk.g) * &c_dot).asymmetry()),
            ("O^T O = I", ok.orthogonality_defect()),
        ];
        for (which, value) in checks {
            if !(value <= tol::FRAME) {
                return Err(PenroseError::FrameInvariant { which, node: k, u, value });
            }
        }
        frame.orthonormality = frame.orthonormality.max(checks[0].1);
        frame.symmetry = frame.symmetry.max(checks[1].1);
        frame.orthogonality = frame.orthogonality.max(checks[2].1);

        // A = −(∂_u(ḡ Ċ))ᵀ C
        let q = &(&gk.dg * &c_dot) + &(&gk.g * &c_ddot);
        let a = (&q.transpose() * &c).scale(-1.0);
        asymmetry = asymmetry.max(a.asymmetry());
        a_nodes.push(a.symmetrized());

        // E = C⁻¹, Ė = −E Ċ E, S = Ėᵀ E
        let e = c.inverse()?;
        let e_dot = (&(&e * &c_dot) * &e).scale(-1.0);
        frame.s.push(&e_dot.transpose() * &e);
        frame.c.push(c);
        frame.c_dot.push(c_dot);
        frame.m.push(mk);
    }
    frame.o = o;
    let da = grid.differentiate(&a_nodes);
    Ok((frame, BrinkmannProfile { grid: *grid, a: a_nodes, da, asymmetry }))
}

/// Result of pulling the Brinkmann metric back to Rosen coordinates.
#[derive(Debug, Clone)]
pub struct IsometryReport {
    /// Largest componentwise deviation from the Rosen metric.
    pub residual: f64,
    /// Rosen-chart point where it occurs.
    pub witness: Point,
    pub samples: usize,
    pub seed: u64,
}

/// Pulls `2 dv du + A_kl(u) x^k x^l du² + Σ dx²` back along
/// `u = r, x = E(r) y, v = t − ½ yᵀ S(r) y` at seeded Rosen points and compares
/// with the Rosen components. `u` is drawn from the grid interior, `t, y` from `[−1, 1]`.
pub fn verify_brinkmann_isometry(
    rosen: &RosenProfile,
    frame: &FrameSolution,
    profile: &BrinkmannProfile,
    samples: usize,
    seed: u64,
) -> Result<IsometryReport, PenroseError> {
    let grid = &frame.grid;
    let dim = rosen.axis().dim();
    let s_dot = grid.differentiate(&frame.s);
    let coords = rosen.metric().coords();
    let (lo, hi) = (grid.node(1), grid.node(grid.len() - 2));
    let mut residual = 0.0f64;
    let mut witness = Point::new();
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let r = rng.gen_range(lo..hi);
        let t = rng.gen_range(-1.0..1.0);
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let c = grid.interpolate(&frame.c, r)?;
        let c_dot = grid.interpolate(&frame.c_dot, r)?;
        let s = grid.interpolate(&frame.s, r)?;
        let sd = grid.interpolate(&s_dot, r)?;
        let a = grid.interpolate(&profile.a, r)?;
        let e = c.inverse()?;
        let e_dot = (&(&e * &c_dot) * &e).scale(-1.0);
        let x = e.mul_vec(&y);
        let ssym = &s + &s.transpose();

        // Jacobian rows (v, u, x…), columns (r, t, y…)
        let n = dim + 2;
        let mut jac = Mat::zeros(n);
        jac[(0, 0)] = -0.5 * sd.bilinear(&y, &y);
        jac[(0, 1)] = 1.0;
        let sy = ssym.mul_vec(&y);
        for k in 0..dim {
            jac[(0, k + 2)] = -0.5 * sy[k];
        }
        jac[(1, 0)] = 1.0;
        let edy = e_dot.mul_vec(&y);
        for k in 0..dim {
            jac[(k + 2, 0)] = edy[k];
            for l in 0..dim {
                jac[(k + 2, l + 2)] = e[(k, l)];
            }
        }
        let mut b = Mat::identity(n);
        b[(0, 0)] = 0.0;
        b[(0, 1)] = 1.0;
        b[(1, 0)] = 1.0;
        b[(1, 1)] = a.bilinear(&x, &x);
        let pulled = &(&jac.transpose() * &b) * &jac;

        let mut vals = vec![r, t];
        vals.extend_from_slice(&y);
        let p = Point::from_chart(coords, &vals);
        let g = rosen.metric().eval_metric(&p)?;
        let dev = (&pulled - &g).max_abs();
        if dev > residual || witness.is_empty() {
            residual = residual.max(dev);
            witness = p;
        }
    }
    Ok(IsometryReport { residual, witness, samples, seed })
}
