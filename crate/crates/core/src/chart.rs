//! Local coordinates for arrangements, cameras and images, and the joint
//! camera map evaluated over any [`Scalar`].
//!
//! Unknown vector layout: arrangement parameters feature by feature (in
//! [`Problem::features`] order), then the camera parameters.
//!
//! * point: affine `(x, y, z)`,
//! * pin: direction `(1, a, b)` through its point,
//! * free line: anchors `(a1, a2, 0)` and `(b1, b2, 1)`,
//! * cameras: `R1 = I, t1 = 0`; Cayley vectors for `R2, R3`; `t2 = (1, u, v)`;
//!   `t3` free. Two-view layouts drop `R3, t3`.
//!
//! Image coordinates per feature and view: an observed point gives its two
//! affine coordinates, a line seen without its point gives its dual line
//! dehomogenized by the third entry, and a pin seen with its point gives the
//! single slope `l0 / l1`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ffalg::{Dual, FieldMatrix, Fp};
use crate::model::{LocalFeature, Problem};
use crate::scalar::Scalar;

type Vec3<T> = [T; 3];
type Mat3<T> = [[T; 3]; 3];

/// A camera `x ↦ R x + t`, with `R = I, t = 0` represented implicitly.
#[derive(Clone, Debug)]
pub enum Camera<T> {
    Identity,
    General { r: Mat3<T>, t: Vec3<T> },
}

impl<T: Scalar> Camera<T> {
    fn project(&self, x: &Vec3<T>) -> Vec3<T> {
        match self {
            Camera::Identity => x.clone(),
            Camera::General { r, t } => {
                let y = mat_vec(r, x);
                [y[0].clone() + t[0].clone(), y[1].clone() + t[1].clone(), y[2].clone() + t[2].clone()]
            }
        }
    }

    fn rotate(&self, d: &Vec3<T>) -> Vec3<T> {
        match self {
            Camera::Identity => d.clone(),
            Camera::General { r, .. } => mat_vec(r, d),
        }
    }
}

fn mat_vec<T: Scalar>(m: &Mat3<T>, x: &Vec3<T>) -> Vec3<T> {
    [0, 1, 2].map(|i| m[i][0].clone() * x[0].clone() + m[i][1].clone() * x[1].clone() + m[i][2].clone() * x[2].clone())
}

fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

/// Rotation from a Cayley vector `s`:
/// `((1 - s·s) I + 2 s sᵀ + 2 [s]×) / (1 + s·s)`.
pub fn cayley<T: Scalar>(s: &Vec3<T>) -> Result<Mat3<T>> {
    let ss = s[0].clone() * s[0].clone() + s[1].clone() * s[1].clone() + s[2].clone() * s[2].clone();
    let one = ss.one_like();
    let two = ss.constant(2);
    let den = (one.clone() + ss.clone()).inv().ok_or(Error::Degenerate("Cayley denominator"))?;
    let diag = one - ss.clone();
    let skew: Mat3<T> = [
        [ss.zero_like(), -s[2].clone(), s[1].clone()],
        [s[2].clone(), ss.zero_like(), -s[0].clone()],
        [-s[1].clone(), s[0].clone(), ss.zero_like()],
    ];
    let mut r: Mat3<T> = std::array::from_fn(|_| std::array::from_fn(|_| ss.zero_like()));
    for i in 0..3 {
        for j in 0..3 {
            let mut e = two.clone() * s[i].clone() * s[j].clone() + two.clone() * skew[i][j].clone();
            if i == j {
                e = e + diag.clone();
            }
            r[i][j] = e * den.clone();
        }
    }
    Ok(r)
}

fn dehomogenize<T: Scalar>(v: &Vec3<T>, what: &'static str) -> Result<[T; 2]> {
    let inv = v[2].inv().ok_or(Error::Degenerate(what))?;
    Ok([v[0].clone() * inv.clone(), v[1].clone() * inv])
}

/// Where the parameters of each feature live in the unknown vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartLayout {
    features: Vec<LocalFeature>,
    offsets: Vec<usize>,
    image_offsets: Vec<usize>,
    views: usize,
    dim3d: usize,
    dim2d: usize,
}

impl ChartLayout {
    pub fn new(prob: &Problem) -> Self {
        Self::from_features(prob.features(), 3)
    }

    /// Two-view layout; every feature must be invisible in the third view.
    pub fn two_view(features: Vec<LocalFeature>) -> Result<Self> {
        let third_seen = features.iter().any(|f| match f {
            LocalFeature::FreeLine(v) => v[2],
            LocalFeature::Point(p) => p.point[2] || p.pins.iter().any(|l| l[2]),
        });
        if third_seen {
            return Err(Error::InvalidProblem("two-view layout with a feature seen in view 3".into()));
        }
        Ok(Self::from_features(features, 2))
    }

    fn from_features(features: Vec<LocalFeature>, views: usize) -> Self {
        let mut offsets = Vec::with_capacity(features.len());
        let mut image_offsets = Vec::with_capacity(features.len());
        let (mut d3, mut d2) = (0, 0);
        for f in &features {
            offsets.push(d3);
            image_offsets.push(d2);
            d3 += f.dim3d() as usize;
            d2 += f.dim2d() as usize;
        }
        ChartLayout {
            features,
            offsets,
            image_offsets,
            views,
            dim3d: d3,
            dim2d: d2,
        }
    }

    pub fn features(&self) -> &[LocalFeature] {
        &self.features
    }

    pub fn views(&self) -> usize {
        self.views
    }

    pub fn camera_dim(&self) -> usize {
        if self.views == 2 {
            5
        } else {
            11
        }
    }

    pub fn dim3d(&self) -> usize {
        self.dim3d
    }

    /// Number of unknowns: arrangement plus camera parameters.
    pub fn num_unknowns(&self) -> usize {
        self.dim3d + self.camera_dim()
    }

    /// Number of image coordinates.
    pub fn num_images(&self) -> usize {
        self.dim2d
    }

    pub fn is_square(&self) -> bool {
        self.num_unknowns() == self.num_images()
    }

    fn cameras<T: Scalar>(&self, cam: &[T]) -> Result<Vec<Camera<T>>> {
        let mut out = vec![Camera::Identity];
        let r2 = cayley(&[cam[0].clone(), cam[1].clone(), cam[2].clone()])?;
        let t2 = [cam[0].one_like(), cam[3].clone(), cam[4].clone()];
        out.push(Camera::General { r: r2, t: t2 });
        if self.views == 3 {
            let r3 = cayley(&[cam[5].clone(), cam[6].clone(), cam[7].clone()])?;
            out.push(Camera::General {
                r: r3,
                t: [cam[8].clone(), cam[9].clone(), cam[10].clone()],
            });
        }
        Ok(out)
    }

    fn feature_images<T: Scalar>(&self, idx: usize, p: &[T], cams: &[Camera<T>], out: &mut Vec<T>) -> Result<()> {
        match &self.features[idx] {
            LocalFeature::FreeLine(seen) => {
                let a = [p[0].clone(), p[1].clone(), p[0].zero_like()];
                let b = [p[2].clone(), p[3].clone(), p[0].one_like()];
                for v in 0..self.views {
                    if seen[v] {
                        let l = cross(&cams[v].project(&a), &cams[v].project(&b));
                        out.extend(dehomogenize(&l, "line chart pivot")?);
                    }
                }
            }
            LocalFeature::Point(pattern) => {
                let x = [p[0].clone(), p[1].clone(), p[2].clone()];
                let dirs: Vec<Vec3<T>> = (0..pattern.pins.len())
                    .map(|k| [p[0].one_like(), p[3 + 2 * k].clone(), p[4 + 2 * k].clone()])
                    .collect();
                for v in 0..self.views {
                    let y = cams[v].project(&x);
                    if pattern.point[v] {
                        out.extend(dehomogenize(&y, "projection depth")?);
                    }
                    for (k, pin) in pattern.pins.iter().enumerate() {
                        if !pin[v] {
                            continue;
                        }
                        let l = cross(&y, &cams[v].rotate(&dirs[k]));
                        if pattern.point[v] {
                            out.push(l[0].div(&l[1]).ok_or(Error::Degenerate("slope chart pivot"))?);
                        } else {
                            out.extend(dehomogenize(&l, "line chart pivot")?);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The joint camera map in chart coordinates.
    pub fn eval_phi<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        assert_eq!(x.len(), self.num_unknowns(), "unknown vector length");
        let cams = self.cameras(&x[self.dim3d..])?;
        let mut out = Vec::with_capacity(self.dim2d);
        for i in 0..self.features.len() {
            let p = &x[self.offsets[i]..];
            self.feature_images(i, p, &cams, &mut out)?;
        }
        debug_assert_eq!(out.len(), self.dim2d);
        Ok(out)
    }

    /// Dense Jacobian (`num_images × num_unknowns`) by forward differentiation.
    ///
    /// Arrangement columns only touch their own feature's rows, so each of
    /// them costs one pass over a single feature.
    pub fn jacobian<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        let n = self.num_unknowns();
        let zero = x[0].zero_like();
        let mut jac = vec![vec![zero; n]; self.dim2d];
        let lift = |seed: Option<usize>| -> Vec<Dual<T>> {
            x.iter()
                .enumerate()
                .map(|(i, v)| if Some(i) == seed { Dual::variable(v.clone()) } else { Dual::constant_of(v.clone()) })
                .collect()
        };
        let plain = lift(None);
        let cams = self.cameras(&plain[self.dim3d..])?;
        let mut buf = Vec::new();
        for i in 0..self.features.len() {
            let dim = self.features[i].dim3d() as usize;
            for k in 0..dim {
                let col = self.offsets[i] + k;
                let mut p: Vec<Dual<T>> = plain[self.offsets[i]..self.offsets[i] + dim].to_vec();
                p[k] = Dual::variable(x[col].clone());
                buf.clear();
                self.feature_images(i, &p, &cams, &mut buf)?;
                for (r, d) in buf.iter().enumerate() {
                    jac[self.image_offsets[i] + r][col] = d.eps.clone();
                }
            }
        }
        for col in self.dim3d..n {
            let seeded = lift(Some(col));
            let images = self.eval_phi(&seeded)?;
            for (r, d) in images.into_iter().enumerate() {
                jac[r][col] = d.eps;
            }
        }
        Ok(jac)
    }

    /// Draws parameters from `draw` until the chart is valid at them.
    pub fn sample<T: Scalar>(&self, mut draw: impl FnMut() -> T, attempts: usize) -> Result<Vec<T>> {
        for _ in 0..attempts {
            let x: Vec<T> = (0..self.num_unknowns()).map(|_| draw()).collect();
            if self.eval_phi(&x).is_ok() {
                return Ok(x);
            }
        }
        Err(Error::ChartFailure { attempts })
    }

    /// A uniformly random chart-valid instance over `F_q`.
    pub fn sample_fp(&self, q: u64, rng: &mut impl Rng) -> Result<Vec<Fp>> {
        self.sample(|| Fp::from_residue(rng.random_range(0..q), q), SAMPLE_ATTEMPTS)
    }

    /// Rank of the Jacobian over `F_q` at `x`.
    pub fn jacobian_rank_fp(&self, x: &[Fp]) -> Result<usize> {
        let q = x.first().map_or(2, Fp::modulus);
        let rows = self.jacobian(x)?;
        if rows.is_empty() {
            return Ok(0);
        }
        Ok(FieldMatrix::from_rows(&rows, q).rank())
    }
}

/// Resampling budget of [`ChartLayout::sample`] callers.
pub const SAMPLE_ATTEMPTS: usize = 100;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn layout(entries: &[(&str, u64)]) -> ChartLayout {
        ChartLayout::new(&Problem::expand(&Signature::from_named(entries).unwrap()))
    }

    fn complex_point(l: &ChartLayout, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        l.sample(
            || Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)),
            SAMPLE_ATTEMPTS,
        )
        .unwrap()
    }

    #[test]
    fn empty_problem_has_camera_parameters_only() {
        let l = layout(&[]);
        assert_eq!(l.num_unknowns(), 11);
        assert_eq!(l.num_images(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(l.sample_fp(32003, &mut rng).unwrap().len(), 11);
    }

    #[test]
    fn sampling_is_deterministic() {
        let l = layout(&[("c00", 3), ("f", 1)]);
        let a = l.sample_fp(32003, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = l.sample_fp(32003, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 24);
    }

    #[test]
    fn tiny_prime_runs_out_of_attempts() {
        let l = layout(&[("c7", 1), ("c01a", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(l.sample_fp(3, &mut rng), Err(Error::ChartFailure { attempts: 100 }));
    }

    #[test]
    fn image_count_matches_2d_weights() {
        for idx in 0..crate::signature::LEN {
            let mut sig = Signature::zero();
            sig.0[idx] = 1;
            let l = ChartLayout::new(&Problem::expand(&sig));
            let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
            let x = l.sample_fp(1000003, &mut rng).unwrap();
            assert_eq!(l.eval_phi(&x).unwrap().len() as i64, sig.dim2d());
        }
    }

    #[test]
    fn origin_projects_to_origin_in_first_view() {
        let l = layout(&[("c00", 1)]);
        let mut x = vec![0.5; l.num_unknowns()];
        x[..3].copy_from_slice(&[0.0, 0.0, 1.0]);
        let img = l.eval_phi(&x).unwrap();
        assert_eq!(&img[..2], &[0.0, 0.0]);
    }

    #[test]
    fn cayley_rotations_are_orthogonal() {
        let r = cayley(&[0.3, -1.2, 0.7]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pins_pass_through_their_point_in_every_view() {
        // c10 in all views, plus a c12 where the pin is seen alone
        let l = layout(&[("c10", 1), ("c12a", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..l.num_unknowns()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let cams = l.cameras(&x[l.dim3d()..]).unwrap();
        let pt = [x[0], x[1], x[2]];
        let d = [1.0, x[3], x[4]];
        for cam in &cams {
            let y = cam.project(&pt);
            let l = cross(&y, &cam.rotate(&d));
            let residual: f64 = (0..3).map(|i| l[i] * y[i]).sum();
            assert!(residual.abs() < 1e-9);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let l = layout(&[("c21b", 1), ("c12d", 1), ("c13c", 1), ("c01a", 1), ("f", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = complex_point(&l, &mut rng);
            let jac = l.jacobian(&x).unwrap();
            let h = 1e-6;
            for col in 0..l.num_unknowns() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[col] += h;
                xm[col] -= h;
                let fp = l.eval_phi(&xp).unwrap();
                let fm = l.eval_phi(&xm).unwrap();
                for r in 0..l.num_images() {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    let scale = 1.0 + jac[r][col].norm();
                    assert!((fd - jac[r][col]).norm() / scale < 1e-5, "row {r} col {col}");
                }
            }
        }
    }
}
