//! Points on the unitary group `U_n`, the complex Stiefel manifold
//! `V(n, p)` and the complex Grassmann manifold `G(n, p)`, with chordal and
//! geodesic distances, principal angles, midpoints, Haar sampling and the
//! isometric embedding into a Euclidean sphere.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Samples per independent random substream in parallel Monte Carlo.
pub const CHUNK: usize = 4096;

/// Two Grassmann points closer than this are the same subspace.
pub const SAME_POINT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Unitary,
    Stiefel,
    Grassmann,
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ManifoldKind::Unitary => "unitary",
            ManifoldKind::Stiefel => "stiefel",
            ManifoldKind::Grassmann => "grassmann",
        })
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unitary" | "u" => Ok(ManifoldKind::Unitary),
            "stiefel" | "v" => Ok(ManifoldKind::Stiefel),
            "grassmann" | "g" => Ok(ManifoldKind::Grassmann),
            other => Err(Error::InvalidManifold(format!("unknown kind '{other}'"))),
        }
    }
}

#[derive(Deserialize)]
struct RawManifold {
    kind: ManifoldKind,
    n: usize,
    p: usize,
}

/// A manifold together with its size parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawManifold")]
pub struct Manifold {
    kind: ManifoldKind,
    n: usize,
    p: usize,
}

impl TryFrom<RawManifold> for Manifold {
    type Error = Error;

    fn try_from(raw: RawManifold) -> Result<Self> {
        Manifold::new(raw.kind, raw.n, raw.p)
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ManifoldKind::Unitary => write!(f, "U({})", self.n),
            ManifoldKind::Stiefel => write!(f, "V({},{})", self.n, self.p),
            ManifoldKind::Grassmann => write!(f, "G({},{})", self.n, self.p),
        }
    }
}

impl Manifold {
    /// Validates `(kind, n, p)`. For `Unitary`, `p` must equal `n`.
    pub fn new(kind: ManifoldKind, n: usize, p: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidManifold("n must be at least 1".into()));
        }
        match kind {
            ManifoldKind::Unitary if p != n => {
                return Err(Error::InvalidManifold(format!(
                    "unitary group needs p = n, got n = {n}, p = {p}"
                )))
            }
            ManifoldKind::Stiefel if p == 0 || p > n => {
                return Err(Error::InvalidManifold(format!(
                    "Stiefel manifold needs 1 <= p <= n, got n = {n}, p = {p}"
                )))
            }
            ManifoldKind::Grassmann if p == 0 || 2 * p > n => {
                return Err(Error::InvalidManifold(format!(
                    "Grassmann manifold needs 1 <= p <= n/2, got n = {n}, p = {p}"
                )))
            }
            _ => {}
        }
        Ok(Manifold { kind, n, p })
    }

    pub fn unitary(n: usize) -> Result<Self> {
        Self::new(ManifoldKind::Unitary, n, n)
    }

    pub fn stiefel(n: usize, p: usize) -> Result<Self> {
        Self::new(ManifoldKind::Stiefel, n, p)
    }

    pub fn grassmann(n: usize, p: usize) -> Result<Self> {
        Self::new(ManifoldKind::Grassmann, n, p)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Real dimension of the manifold.
    pub fn dim(&self) -> usize {
        let (n, p) = (self.n, self.p);
        match self.kind {
            ManifoldKind::Unitary => n * n,
            ManifoldKind::Stiefel => 2 * n * p - p * p,
            ManifoldKind::Grassmann => 2 * p * (n - p),
        }
    }

    /// Dimension `D` of the Euclidean space holding the embedding sphere.
    pub fn ambient_dim(&self) -> usize {
        let (n, p) = (self.n, self.p);
        match self.kind {
            ManifoldKind::Unitary => 2 * n * n,
            ManifoldKind::Stiefel => 2 * n * p,
            ManifoldKind::Grassmann => n * n - 1,
        }
    }

    /// Radius `R` of the embedding sphere.
    pub fn radius(&self) -> f64 {
        self.radius_sq().sqrt()
    }

    /// `R²`, exact for the rational Grassmann value.
    pub fn radius_sq(&self) -> f64 {
        let (n, p) = (self.n as f64, self.p as f64);
        match self.kind {
            ManifoldKind::Unitary => n,
            ManifoldKind::Stiefel => p,
            ManifoldKind::Grassmann => p * (n - p) / (2.0 * n),
        }
    }

    /// Largest chordal distance, `2R`.
    pub fn max_distance(&self) -> f64 {
        2.0 * self.radius()
    }

    /// Shape of a representative matrix.
    pub fn rep_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    /// The base point `I_{n,p}`.
    pub fn base_point(&self) -> Point {
        Point {
            manifold: *self,
            rep: linalg::eye(self.n, self.p),
        }
    }
}

/// A point given by a semi-unitary representative. Grassmann points stand
/// for the class `{YQ : Q ∈ U_p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    manifold: Manifold,
    rep: CMatrix,
}

impl Point {
    /// Checks the shape and `‖Y^H Y − I‖_F ≤ 1e-9·√p`.
    pub fn new(manifold: Manifold, rep: CMatrix) -> Result<Self> {
        if rep.shape() != manifold.rep_shape() {
            return Err(Error::Shape {
                expected: manifold.rep_shape(),
                got: rep.shape(),
            });
        }
        if !linalg::is_finite(&rep) {
            return Err(Error::NonFinite);
        }
        let residual = linalg::orthonormality_residual(&rep);
        if residual > 1e-9 * (manifold.p as f64).sqrt() {
            return Err(Error::NotOnManifold { residual });
        }
        Ok(Point { manifold, rep })
    }

    pub(crate) fn new_unchecked(manifold: Manifold, rep: CMatrix) -> Self {
        Point { manifold, rep }
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn rep(&self) -> &CMatrix {
        &self.rep
    }

    pub fn into_rep(self) -> CMatrix {
        self.rep
    }

    /// Left action `Y ↦ UY` of a unitary matrix.
    pub fn rotate(&self, u: &CMatrix) -> Point {
        Point {
            manifold: self.manifold,
            rep: u * &self.rep,
        }
    }
}

/// Principal angles between two points, sorted by decreasing magnitude.
/// Unitary angles lie in `(−π, π]`, Grassmann angles in `[0, π/2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalAngles {
    pub theta: Vec<f64>,
}

impl PrincipalAngles {
    fn sorted(mut theta: Vec<f64>) -> Self {
        theta.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        PrincipalAngles { theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

fn same_manifold(x: &Point, y: &Point) -> Result<Manifold> {
    if x.manifold != y.manifold {
        return Err(Error::ManifoldMismatch);
    }
    Ok(x.manifold)
}

/// Chordal distance. For Grassmann points this is `‖(I − YY^H)Z‖_F`, which
/// equals `√(p − ‖Y^H Z‖_F²)` and does not lose accuracy for close points.
pub fn chordal_distance(x: &Point, y: &Point) -> Result<f64> {
    let m = same_manifold(x, y)?;
    let d = match m.kind {
        ManifoldKind::Unitary | ManifoldKind::Stiefel => linalg::frob(&(&x.rep - &y.rep)),
        ManifoldKind::Grassmann => {
            let proj = &x.rep * (x.rep.adjoint() * &y.rep);
            linalg::frob(&(&y.rep - proj))
        }
    };
    Ok(d.min(m.max_distance()))
}

/// Equality of points; Grassmann points compare as subspaces.
pub fn same_point(x: &Point, y: &Point) -> Result<bool> {
    Ok(chordal_distance(x, y)? < SAME_POINT_TOL)
}

/// Principal angles. Unitary: eigenphases of `X^H Y`. Grassmann: arccos of
/// the clamped singular values of `Y^H X`, switching to arcsin of the
/// complementary singular values for angles below π/4.
pub fn principal_angles(x: &Point, y: &Point) -> Result<PrincipalAngles> {
    let m = same_manifold(x, y)?;
    match m.kind {
        ManifoldKind::Stiefel => Err(Error::Unsupported(m.kind)),
        ManifoldKind::Unitary => {
            let w = x.rep.adjoint() * &y.rep;
            let (_, theta) = linalg::unitary_eig(&w)?;
            Ok(PrincipalAngles::sorted(theta))
        }
        ManifoldKind::Grassmann => {
            let cross = x.rep.adjoint() * &y.rep;
            let cosines = linalg::singular_values(&cross)?;
            let resid = &y.rep - &x.rep * &cross;
            let mut sines = linalg::singular_values(&resid)?;
            sines.truncate(m.p);
            sines.reverse();
            let theta = cosines
                .iter()
                .zip(&sines)
                .map(|(&c, &s)| {
                    let c = c.clamp(0.0, 1.0);
                    if c * c < 0.5 {
                        c.acos()
                    } else {
                        s.clamp(0.0, 1.0).asin()
                    }
                })
                .collect();
            Ok(PrincipalAngles::sorted(theta))
        }
    }
}

/// Geodesic distance `√(Σθ²)` on `U_n` and `G(n, p)`.
pub fn geodesic_distance(x: &Point, y: &Point) -> Result<f64> {
    let angles = principal_angles(x, y)?;
    Ok(angles.theta.iter().map(|t| t * t).sum::<f64>().sqrt())
}

/// Midpoint of two points. Unitary and Grassmann use the geodesic at
/// `t = 1/2`; Stiefel uses the polar projection of `(X + Y)/2`.
pub fn midpoint(x: &Point, y: &Point) -> Result<Point> {
    let m = same_manifold(x, y)?;
    let rep = match m.kind {
        ManifoldKind::Unitary => {
            let w = x.rep.adjoint() * &y.rep;
            let (omega, theta) = linalg::unitary_eig(&w)?;
            let half: Vec<f64> = theta.iter().map(|t| t / 2.0).collect();
            &x.rep * linalg::rebuild(&omega, &half)
        }
        ManifoldKind::Stiefel => {
            let mean = (&x.rep + &y.rep) * Complex64::new(0.5, 0.0);
            linalg::polar_factor(&mean)?
        }
        ManifoldKind::Grassmann => {
            let dec = linalg::svd(&(x.rep.adjoint() * &y.rep))?;
            let mut sum = &x.rep * &dec.u + &y.rep * &dec.v;
            for mut col in sum.column_iter_mut() {
                let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                col.scale_mut(1.0 / norm);
            }
            sum
        }
    };
    Ok(Point::new_unchecked(m, rep))
}

/// Standard complex Gaussian matrix.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Haar-uniform point: phase-fixed Q factor of a complex Gaussian matrix.
pub fn sample_uniform<R: Rng + ?Sized>(manifold: &Manifold, rng: &mut R) -> Point {
    let (n, p) = manifold.rep_shape();
    loop {
        if let Ok(q) = linalg::qr_unitary(&complex_gaussian(rng, n, p)) {
            return Point::new_unchecked(*manifold, q);
        }
    }
}

/// Haar-uniform unitary matrix of size `n`.
pub fn sample_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        if let Ok(q) = linalg::qr_unitary(&complex_gaussian(rng, n, n)) {
            return q;
        }
    }
}

/// Generator for chunk `chunk` of the stream keyed by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f` over `samples` draws split into fixed-size chunks, each with its
/// own substream; results are concatenated in chunk order, so the output
/// does not depend on the number of worker threads.
pub fn par_sample<T, F>(samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Squared chordal distance from the base point `I_{n,p}`.
pub fn base_distance_sq(manifold: &Manifold, y: &CMatrix) -> f64 {
    let p = manifold.p;
    let d2 = match manifold.kind {
        ManifoldKind::Unitary | ManifoldKind::Stiefel => {
            let trace: f64 = (0..p).map(|i| y[(i, i)].re).sum();
            2.0 * p as f64 - 2.0 * trace
        }
        ManifoldKind::Grassmann => {
            let top: f64 = (0..p)
                .flat_map(|i| (0..p).map(move |j| (i, j)))
                .map(|(i, j)| y[(i, j)].norm_sqr())
                .sum();
            p as f64 - top
        }
    };
    d2.max(0.0)
}

/// Squared chordal distances from `I_{n,p}` to `samples` Haar-random points.
pub fn sample_base_distances_sq(manifold: &Manifold, samples: usize, seed: u64) -> Vec<f64> {
    par_sample(samples, seed, |rng| {
        let y = sample_uniform(manifold, rng);
        base_distance_sq(manifold, &y.rep)
    })
}

/// Sample mean, variance and skewness with standard errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub mean_std_error: f64,
    pub variance_std_error: f64,
}

pub fn sample_moments(xs: &[f64]) -> SampleMoments {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= m;
    m3 /= m;
    m4 /= m;
    let variance = m2 * m / (m - 1.0);
    SampleMoments {
        count: xs.len(),
        mean,
        variance,
        skewness: m3 / m2.powf(1.5),
        mean_std_error: (variance / m).sqrt(),
        variance_std_error: ((m4 - m2 * m2) / m).max(0.0).sqrt(),
    }
}

/// Isometric image on the sphere of radius `R` in `R^D`.
///
/// Unitary and Stiefel points are vectorized row by row as `(re, im)`
/// pairs. Grassmann points map to `(YY^H − (p/n)I)/√2`, written in the
/// orthonormal basis of traceless Hermitian matrices made of the symmetric
/// and antisymmetric off-diagonal units followed by the generalized
/// Gell-Mann diagonals.
pub fn embed_sphere(x: &Point) -> Vec<f64> {
    let m = x.manifold;
    match m.kind {
        ManifoldKind::Unitary | ManifoldKind::Stiefel => {
            let mut v = Vec::with_capacity(m.ambient_dim());
            for i in 0..m.n {
                for j in 0..m.p {
                    let z = x.rep[(i, j)];
                    v.push(z.re);
                    v.push(z.im);
                }
            }
            v
        }
        ManifoldKind::Grassmann => {
            let n = m.n;
            let proj = &x.rep * x.rep.adjoint();
            let shift = m.p as f64 / n as f64;
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            let mut v = Vec::with_capacity(m.ambient_dim());
            for i in 0..n {
                for j in i + 1..n {
                    let z = proj[(i, j)];
                    v.push(z.re);
                    v.push(z.im);
                }
            }
            for v_ij in v.iter_mut() {
                *v_ij *= std::f64::consts::SQRT_2 * scale;
            }
            let diag: DVector<f64> = DVector::from_fn(n, |i, _| proj[(i, i)].re - shift);
            let mut partial = 0.0;
            for k in 1..n {
                partial += diag[k - 1];
                let kf = k as f64;
                v.push((partial - kf * diag[k]) / (kf * (kf + 1.0)).sqrt() * scale);
            }
            v
        }
    }
}

/// Euclidean distance between two real vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// On-disk form of a list of points:
/// `{"kind", "n", "p", "matrices": [[[ [re, im], ... ], ...], ...]}`,
/// each matrix given row by row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeFile {
    pub kind: ManifoldKind,
    pub n: usize,
    pub p: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl CodeFile {
    pub fn from_points(manifold: &Manifold, points: &[Point]) -> Self {
        let matrices = points
            .iter()
            .map(|pt| {
                (0..manifold.n)
                    .map(|i| {
                        (0..manifold.p)
                            .map(|j| {
                                let z = pt.rep[(i, j)];
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CodeFile {
            kind: manifold.kind,
            n: manifold.n,
            p: manifold.p,
            matrices,
        }
    }

    pub fn manifold(&self) -> Result<Manifold> {
        Manifold::new(self.kind, self.n, self.p)
    }

    pub fn to_points(&self) -> Result<(Manifold, Vec<Point>)> {
        let manifold = self.manifold()?;
        let (n, p) = manifold.rep_shape();
        let mut points = Vec::with_capacity(self.matrices.len());
        for (k, rows) in self.matrices.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != p) {
                return Err(Error::Schema(format!("matrix {k} is not {n}x{p}")));
            }
            let rep = CMatrix::from_fn(n, p, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
            let pt =
                Point::new(manifold, rep).map_err(|e| Error::Schema(format!("matrix {k}: {e}")))?;
            points.push(pt);
        }
        Ok((manifold, points))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
