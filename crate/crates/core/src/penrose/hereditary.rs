use crate::expr::Point;
use crate::sampling::Domain;
use crate::tensor::{curvature_at, Depth, MetricSpec};
use crate::tol;

use super::{
    build_time_symmetric_product, family_limit, family_pullback, penrose_family, penrose_limit_rosen, to_null_chart,
    AxisMetric, PenroseError,
};

#[derive(Debug, Clone)]
pub struct HereditaryOptions {
    pub eps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Einstein constant of the input, if it is claimed to be Einstein.
    pub lambda: Option<f64>,
    /// Sampling box over the tilde chart; missing coordinates use `[-0.5, 0.5]`.
    pub domain: Domain,
    /// Interval in the semigeodesic coordinate for the Rosen-form checks.
    pub interval: (f64, f64),
}

impl Default for HereditaryOptions {
    fn default() -> Self {
        HereditaryOptions {
            eps: vec![0.4, 0.2, 0.1, 0.05],
            samples: 8,
            seed: 0,
            lambda: None,
            domain: Domain::new(),
            interval: (0.0, 1.0),
        }
    }
}

/// Residuals for one member `h_ε` of the family, maxima over the sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonCheck {
    pub eps: f64,
    /// `|g_ε − ε² h_ε|`
    pub homothety: f64,
    /// `|Ric(h_ε) − Ric(g_ε)|`, relative
    pub ric_equality: f64,
    /// `|Rm(h_ε) − ε⁻² Rm(g_ε)|`, relative
    pub rm_scaling: f64,
    /// `|W(h_ε) − ε⁻² W(g_ε)|`, relative (dimension ≥ 4)
    pub weyl_scaling: Option<f64>,
    /// `|h_ε − h_PW|` componentwise
    pub deviation: f64,
    pub ric: f64,
    pub weyl: Option<f64>,
    pub cov_rm: f64,
}

/// Ricci of the Rosen-form limit against `λ (dr)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinHeredity {
    pub lambda: f64,
    pub ric_residual: f64,
    /// `tr_{h_PW} Ric_PW`, zero since `dr` is null.
    pub scalar: f64,
}

#[derive(Debug, Clone)]
pub struct HereditaryReport {
    pub checks: Vec<EpsilonCheck>,
    /// `log(dev_k / dev_{k+1}) / log(ε_k / ε_{k+1})` for consecutive entries.
    pub deviation_order: Vec<f64>,
    pub limit_ric: f64,
    pub limit_cov_rm: f64,
    pub einstein: Option<EinsteinHeredity>,
    pub samples: usize,
    pub seed: u64,
}

fn component_gap(a: &MetricSpec, b: &MetricSpec, p: &Point, scale: f64) -> Result<f64, PenroseError> {
    let (ga, gb) = (a.eval_metric(p)?, b.eval_metric(p)?);
    Ok((&ga - &gb.scale(scale)).max_abs())
}

/// Runs the time-symmetric embedding of the semigeodesic `riem` and checks the
/// homothety, curvature scaling and convergence of `h_ε` for each `ε`.
pub fn hereditary_check(riem: &MetricSpec, opts: &HereditaryOptions) -> Result<HereditaryReport, PenroseError> {
    let null = to_null_chart(&build_time_symmetric_product(riem)?)?;
    let limit = family_limit(&null)?;
    let dom = opts.domain.for_chart(limit.coords(), (-0.5, 0.5));
    let points = dom.samples(opts.samples, opts.seed);
    let mut checks = Vec::with_capacity(opts.eps.len());
    for &eps in &opts.eps {
        let h = penrose_family(&null, eps)?;
        let g = family_pullback(&null, eps)?;
        let inv = 1.0 / (eps * eps);
        let mut c = EpsilonCheck {
            eps,
            homothety: 0.0,
            ric_equality: 0.0,
            rm_scaling: 0.0,
            weyl_scaling: None,
            deviation: 0.0,
            ric: 0.0,
            weyl: None,
            cov_rm: 0.0,
        };
        for p in &points {
            c.homothety = c.homothety.max(component_gap(&g, &h, p, eps * eps)?);
            c.deviation = c.deviation.max(component_gap(&h, &limit, p, 1.0)?);
            let bh = curvature_at(&h, p, Depth::Derivatives)?;
            let bg = curvature_at(&g, p, Depth::Full)?;
            let ric = bh.ric.max_abs();
            c.ric = c.ric.max(ric);
            c.ric_equality = c.ric_equality.max(tol::relative((&bh.ric - &bg.ric).max_abs(), ric));
            let rm = bh.rm.max_abs();
            c.rm_scaling = c.rm_scaling.max(tol::relative(bh.rm.zip_with(&bg.rm, |a, b| a - inv * b).max_abs(), rm));
            if let (Some(wh), Some(wg)) = (&bh.weyl, &bg.weyl) {
                let w = wh.max_abs();
                let s = tol::relative(wh.zip_with(wg, |a, b| a - inv * b).max_abs(), w);
                c.weyl_scaling = Some(c.weyl_scaling.unwrap_or(0.0).max(s));
                c.weyl = Some(c.weyl.unwrap_or(0.0).max(w));
            }
            c.cov_rm = c.cov_rm.max(bh.cov_rm.as_ref().map_or(0.0, |a| a.max_abs()));
        }
        checks.push(c);
    }
    let deviation_order = checks
        .windows(2)
        .map(|w| (w[0].deviation / w[1].deviation).ln() / (w[0].eps / w[1].eps).ln())
        .collect();

    let (mut limit_ric, mut limit_cov_rm) = (0.0f64, 0.0f64);
    for p in &points {
        let b = curvature_at(&limit, p, Depth::Derivatives)?;
        limit_ric = limit_ric.max(b.ric.max_abs());
        limit_cov_rm = limit_cov_rm.max(b.cov_rm.as_ref().map_or(0.0, |a| a.max_abs()));
    }

    let einstein = match opts.lambda {
        None => None,
        Some(lambda) => {
            let rosen = penrose_limit_rosen(&AxisMetric::from_semigeodesic(riem, opts.interval)?)?;
            let m = rosen.metric();
            let rdom = Domain::new()
                .with(&m.coords()[0], opts.interval.0, opts.interval.1)
                .for_chart(m.coords(), (-1.0, 1.0));
            let (mut ric_residual, mut scalar) = (0.0f64, 0.0f64);
            for p in rdom.samples(opts.samples, opts.seed) {
                let b = curvature_at(m, &p, Depth::Ricci)?;
                let mut target = b.ric.scale(0.0);
                target[(0, 0)] = lambda;
                ric_residual = ric_residual.max((&b.ric - &target).max_abs());
                scalar = scalar.max(b.scalar.abs());
            }
            Some(EinsteinHeredity { lambda, ric_residual, scalar })
        }
    };
    Ok(HereditaryReport {
        checks,
        deviation_order,
        limit_ric,
        limit_cov_rm,
        einstein,
        samples: opts.samples,
        seed: opts.seed,
    })
}
