//! Degrees of minimal problems by monodromy.
//!
//! The system is `Φ(x) = p` with `x` the chart unknowns and `p` the image
//! coordinates. A fabricated pair `(x0, Φ(x0))`, tracked to a Gaussian base
//! parameter, seeds the solution set; random loops base → waypoint → base,
//! tracked by predictor/corrector continuation, permute the solutions and
//! expose new ones. The count is reported once a number of consecutive loops find
//! nothing new.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chart::{ChartLayout, SAMPLE_ATTEMPTS};
use crate::error::{Error, Result};
use crate::model::{LocalFeature, Problem};

type C = Complex64;

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_abs(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// LU factorization with partial pivoting of a row-major `n × n` matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    a: Vec<C>,
    perm: Vec<usize>,
}

impl Lu {
    /// `None` for a numerically singular matrix.
    pub fn factor(mut a: Vec<C>, n: usize) -> Option<Lu> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut piv, mut best) = (k, a[k * n + k].norm());
            for i in k + 1..n {
                let m = a[i * n + k].norm();
                if m > best {
                    piv = i;
                    best = m;
                }
            }
            if best < 1e-300 {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let inv = C::new(1.0, 0.0) / a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] * inv;
                a[i * n + k] = f;
                if f == C::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Some(Lu { n, a, perm })
    }

    /// `None` if the solution is not finite.
    pub fn solve(&self, b: &[C]) -> Option<Vec<C>> {
        let n = self.n;
        let mut x: Vec<C> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.a[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.a[i * n + j] * x[j];
            }
            x[i] = s / self.a[i * n + i];
        }
        x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
    }
}

/// Solves `a x = b` in place; `a` is row-major `n × n`. Returns `false` for a
/// numerically singular matrix.
pub fn lu_solve(a: &mut [C], b: &mut [C]) -> bool {
    let n = b.len();
    match Lu::factor(a.to_vec(), n).and_then(|lu| lu.solve(b)) {
        Some(x) => {
            b.copy_from_slice(&x);
            true
        }
        None => false,
    }
}

/// `Φ(x) - p = 0` for a square chart layout.
#[derive(Clone, Debug)]
pub struct ParametricSystem {
    layout: ChartLayout,
}

impl ParametricSystem {
    pub fn new(layout: ChartLayout) -> Result<Self> {
        if !layout.is_square() {
            return Err(Error::Unbalanced(layout.num_images() as i64 - layout.num_unknowns() as i64));
        }
        Ok(ParametricSystem { layout })
    }

    pub fn from_problem(prob: &Problem) -> Result<Self> {
        Self::new(ChartLayout::new(prob))
    }

    /// Five points seen in two views.
    pub fn five_point() -> Self {
        let pt = LocalFeature::point([true, true, false], vec![]).expect("pinless point");
        Self::new(ChartLayout::two_view(vec![pt; 5]).expect("two-view features")).expect("square")
    }

    pub fn layout(&self) -> &ChartLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.num_unknowns()
    }

    pub fn residual(&self, x: &[C], p: &[C]) -> Result<Vec<C>> {
        let mut r = self.layout.eval_phi(x)?;
        for (ri, pi) in r.iter_mut().zip(p) {
            *ri -= pi;
        }
        Ok(r)
    }

    /// Row-major Jacobian of `Φ` at `x`.
    fn jacobian_flat(&self, x: &[C]) -> Result<Vec<C>> {
        Ok(self.layout.jacobian(x)?.into_iter().flatten().collect())
    }

    fn factor_at(&self, x: &[C]) -> Result<Lu> {
        Lu::factor(self.jacobian_flat(x)?, self.dim()).ok_or(Error::Degenerate("singular Jacobian"))
    }

    /// Solves `J(x) dx = rhs`.
    fn solve_at(&self, x: &[C], rhs: &[C]) -> Result<Vec<C>> {
        self.factor_at(x)?.solve(rhs).ok_or(Error::Degenerate("singular Jacobian"))
    }

    /// Newton iterations at parameters `p`. Returns the refined point and the
    /// max-norm residual there.
    pub fn newton(&self, x: &[C], p: &[C], iters: usize) -> Result<(Vec<C>, f64)> {
        let mut x = x.to_vec();
        for _ in 0..iters {
            let r = self.residual(&x, p)?;
            if max_abs(&r) < 1e-13 {
                break;
            }
            let dx = self.solve_at(&x, &r)?;
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi -= d;
            }
        }
        let res = max_abs(&self.residual(&x, p)?);
        Ok((x, res))
    }

    /// A random complex instance and its image: an exact solution by
    /// construction.
    pub fn seed_pair(&self, rng: &mut impl Rng) -> Result<(Vec<C>, Vec<C>)> {
        let x = self.layout.sample(|| random_complex(rng), SAMPLE_ATTEMPTS)?;
        let p = self.layout.eval_phi(&x)?;
        Ok((p, x))
    }
}

fn random_complex(rng: &mut impl Rng) -> C {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(re, im) / std::f64::consts::SQRT_2
}

fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<C> {
    (0..n).map(|_| random_complex(rng)).collect()
}

/// `p(t) = (1 - t) a + t b + γ t (1 - t) c`.
#[derive(Clone, Debug)]
pub struct ParameterPath {
    pub start: Vec<C>,
    pub end: Vec<C>,
    pub bend: Vec<C>,
    pub gamma: C,
}

impl ParameterPath {
    pub fn straight(start: Vec<C>, end: Vec<C>) -> Self {
        let bend = vec![C::new(0.0, 0.0); start.len()];
        ParameterPath { start, end, bend, gamma: C::new(0.0, 0.0) }
    }

    /// A leg bent by a random direction and a random unit `γ`.
    pub fn random_leg(start: Vec<C>, end: Vec<C>, rng: &mut impl Rng) -> Self {
        let bend = random_vector(start.len(), rng);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        ParameterPath { start, end, bend, gamma: C::from_polar(1.0, angle) }
    }

    pub fn at(&self, t: f64) -> Vec<C> {
        let s = self.gamma * t * (1.0 - t);
        (0..self.start.len())
            .map(|i| self.start[i] * (1.0 - t) + self.end[i] * t + self.bend[i] * s)
            .collect()
    }

    pub fn derivative(&self, t: f64) -> Vec<C> {
        let s = self.gamma * (1.0 - 2.0 * t);
        (0..self.start.len())
            .map(|i| self.end[i] - self.start[i] + self.bend[i] * s)
            .collect()
    }

    pub fn reversed(&self) -> Self {
        ParameterPath {
            start: self.end.clone(),
            end: self.start.clone(),
            bend: self.bend.clone(),
            gamma: self.gamma,
        }
    }
}

/// Step control and acceptance thresholds of [`track_path`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub shrink: f64,
    pub grow: f64,
    pub successes_to_grow: usize,
    pub max_steps: usize,
    pub corrector_iters: usize,
    /// Relative Newton-step size accepted by the corrector.
    pub corrector_tol: f64,
    /// Max-norm residual required at the endpoint.
    pub end_tol: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            initial_step: 0.05,
            min_step: 1e-7,
            max_step: 0.25,
            shrink: 0.5,
            grow: 1.5,
            successes_to_grow: 4,
            max_steps: 20_000,
            corrector_iters: 3,
            corrector_tol: 1e-7,
            end_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PathFailure {
    #[error("step size underflow at t = {0}")]
    StepUnderflow(String),
    #[error("step budget exhausted")]
    Budget,
    #[error("endpoint residual too large")]
    Endpoint,
    #[error("evaluation failed: {0}")]
    Numerical(String),
}

/// Tracks a solution of `Φ(x) = p(0)` to `p(1)`.
pub fn track_path(sys: &ParametricSystem, start: &[C], path: &ParameterPath, cfg: &TrackerConfig) -> Result<Vec<C>, PathFailure> {
    let num = |e: Error| PathFailure::Numerical(e.to_string());
    // x' = J(x)^{-1} p'(t)
    let flow = |x: &[C], t: f64| -> Result<Vec<C>, PathFailure> { sys.solve_at(x, &path.derivative(t)).map_err(num) };
    let mut x = start.to_vec();
    let mut t = 0.0;
    let mut h = cfg.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    while t < 1.0 {
        if steps == cfg.max_steps {
            return Err(PathFailure::Budget);
        }
        steps += 1;
        let h_eff = h.min(1.0 - t);
        match rk4_correct(sys, &x, t, h_eff, path, cfg, &flow) {
            Some(next) => {
                x = next;
                t += h_eff;
                if h_eff < h {
                    t = 1.0;
                }
                streak += 1;
                if streak >= cfg.successes_to_grow {
                    h = (h * cfg.grow).min(cfg.max_step);
                    streak = 0;
                }
            }
            None => {
                h *= cfg.shrink;
                streak = 0;
                if h < cfg.min_step {
                    return Err(PathFailure::StepUnderflow(format!("{t:.6}")));
                }
            }
        }
    }
    let (x, res) = sys.newton(&x, &path.end, 8).map_err(num)?;
    if res < cfg.end_tol {
        Ok(x)
    } else {
        Err(PathFailure::Endpoint)
    }
}

fn rk4_correct(
    sys: &ParametricSystem,
    x: &[C],
    t: f64,
    h: f64,
    path: &ParameterPath,
    cfg: &TrackerConfig,
    flow: &impl Fn(&[C], f64) -> Result<Vec<C>, PathFailure>,
) -> Option<Vec<C>> {
    let axpy = |a: &[C], s: f64, d: &[C]| -> Vec<C> { a.iter().zip(d).map(|(u, v)| u + v * s).collect() };
    let k1 = flow(x, t).ok()?;
    let k2 = flow(&axpy(x, h / 2.0, &k1), t + h / 2.0).ok()?;
    let k3 = flow(&axpy(x, h / 2.0, &k2), t + h / 2.0).ok()?;
    let k4 = flow(&axpy(x, h, &k3), t + h).ok()?;
    let mut pred: Vec<C> = (0..x.len())
        .map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
        .collect();
    let target = path.at(t + h);
    let scale = 1.0 + norm(&pred);
    // chord iterations on one factorization
    let lu = sys.factor_at(&pred).ok()?;
    let mut last = f64::INFINITY;
    for _ in 0..cfg.corrector_iters {
        let r = sys.residual(&pred, &target).ok()?;
        let dx = lu.solve(&r)?;
        let size = norm(&dx);
        // the corrector must contract
        if size > last * 0.5 && size > cfg.corrector_tol * scale {
            return None;
        }
        for (p, d) in pred.iter_mut().zip(&dx) {
            *p -= d;
        }
        if size < cfg.corrector_tol * scale {
            return Some(pred);
        }
        last = size;
    }
    None
}

/// Configuration of [`monodromy_degree`].
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyConfig {
    pub seed: u64,
    /// Consecutive loops without a new solution before stopping.
    pub stabilization: usize,
    pub max_loops: usize,
    /// Relative distance below which two solutions are the same.
    pub cluster_tol: f64,
    /// Solutions with a coordinate above this lie outside the chart.
    pub chart_bound: f64,
    pub tracker: TrackerConfig,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        MonodromyConfig {
            seed: 0,
            stabilization: 10,
            max_loops: 500,
            cluster_tol: 1e-6,
            chart_bound: 1e8,
            tracker: TrackerConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeStatus {
    Stabilized,
    BudgetExhausted,
}

impl DegreeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegreeStatus::Stabilized => "stabilized",
            DegreeStatus::BudgetExhausted => "budget-exhausted",
        }
    }
}

impl std::str::FromStr for DegreeStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilized" => Ok(DegreeStatus::Stabilized),
            "budget-exhausted" => Ok(DegreeStatus::BudgetExhausted),
            other => Err(Error::Parse(format!("unknown degree status `{other}`"))),
        }
    }
}

impl std::fmt::Display for DegreeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub count: usize,
    pub status: DegreeStatus,
    pub loops: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
    pub discarded: usize,
    pub max_residual: f64,
    /// The base parameters and the collected solutions over them.
    pub base: Vec<C>,
    pub solutions: Vec<Vec<C>>,
}

/// Distinct solutions at a fixed parameter point.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    tol: f64,
    points: Vec<Vec<C>>,
}

impl SolutionSet {
    pub fn new(tol: f64) -> Self {
        SolutionSet { tol, points: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<C>] {
        &self.points
    }

    pub fn contains(&self, x: &[C]) -> bool {
        let scale = 1.0 + norm(x);
        self.points.iter().any(|y| {
            let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            d < self.tol * scale
        })
    }

    /// Adds `x` unless already present; returns whether it was new.
    pub fn insert(&mut self, x: Vec<C>) -> bool {
        if self.contains(&x) {
            return false;
        }
        self.points.push(x);
        true
    }
}

/// Tracks every solution in `sols` along `path`, in parallel.
pub fn track_all(sys: &ParametricSystem, sols: &[Vec<C>], path: &ParameterPath, cfg: &TrackerConfig) -> Vec<Result<Vec<C>, PathFailure>> {
    sols.par_iter().map(|x| track_path(sys, x, path, cfg)).collect()
}

/// Moves a fabricated pair to Gaussian parameters, which keeps the loops
/// away from the outliers a fabricated image tends to have.
fn gaussian_base(sys: &ParametricSystem, rng: &mut impl Rng, cfg: &TrackerConfig) -> Result<(Vec<C>, Vec<C>)> {
    for _ in 0..SAMPLE_ATTEMPTS {
        let (p, x) = sys.seed_pair(rng)?;
        let base = random_vector(p.len(), rng);
        if let Ok(x0) = track_path(sys, &x, &ParameterPath::random_leg(p, base.clone(), rng), cfg) {
            return Ok((base, x0));
        }
    }
    Err(Error::Degenerate("no start path reached the base"))
}

/// Counts solutions by random monodromy loops around a fabricated base pair.
pub fn monodromy_degree(sys: &ParametricSystem, cfg: &MonodromyConfig) -> Result<DegreeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (base, x0) = gaussian_base(sys, &mut rng, &cfg.tracker)?;
    let mut set = SolutionSet::new(cfg.cluster_tol);
    set.insert(x0);
    let mut report = DegreeReport {
        count: 0,
        status: DegreeStatus::BudgetExhausted,
        loops: 0,
        paths_tracked: 0,
        path_failures: 0,
        discarded: 0,
        max_residual: 0.0,
        base: base.clone(),
        solutions: Vec::new(),
    };
    let mut fruitless = 0;
    while report.loops < cfg.max_loops {
        report.loops += 1;
        let waypoint = random_vector(sys.dim(), &mut rng);
        let out = ParameterPath::random_leg(base.clone(), waypoint.clone(), &mut rng);
        let back = ParameterPath::random_leg(waypoint, base.clone(), &mut rng);
        let mid = track_all(sys, set.points(), &out, &cfg.tracker);
        report.paths_tracked += mid.len();
        let mid: Vec<Vec<C>> = mid
            .into_iter()
            .filter_map(|r| r.map_err(|_| report.path_failures += 1).ok())
            .collect();
        let ends = track_all(sys, &mid, &back, &cfg.tracker);
        report.paths_tracked += ends.len();
        let mut found = false;
        for end in ends {
            match end {
                Ok(x) if max_abs(&x) > cfg.chart_bound => report.discarded += 1,
                Ok(x) => found |= set.insert(x),
                Err(_) => report.path_failures += 1,
            }
        }
        if found {
            fruitless = 0;
        } else {
            fruitless += 1;
            if fruitless >= cfg.stabilization {
                report.status = DegreeStatus::Stabilized;
                break;
            }
        }
    }
    for x in set.points() {
        let r = max_abs(&sys.residual(x, &base)?);
        report.max_residual = report.max_residual.max(r);
    }
    report.count = set.len();
    report.solutions = set.points;
    Ok(report)
}
