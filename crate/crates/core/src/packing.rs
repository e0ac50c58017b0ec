//! Codes on a manifold: minimum distance, kissing radius, density, and
//! bounds relating them (kissing-radius bounds, Hamming-type cardinality
//! bounds, distance bounds, Rankin bounds).

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::{self, Manifold, ManifoldKind, Point};
use crate::specfun;
use crate::volumes::{self, VolumeModel};

/// Codewords closer than this are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-8;
/// Slack used when checking report invariants.
pub const INVARIANT_TOL: f64 = 1e-8;

/// Whether a bound is established or conjectural.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proven,
    Conjectured,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub status: Status,
}

impl Bound {
    fn proven(value: f64) -> Self {
        Bound {
            value,
            status: Status::Proven,
        }
    }

    fn conjectured(value: f64) -> Self {
        Bound {
            value,
            status: Status::Conjectured,
        }
    }
}

/// Smallest integer `≥ x`, treating values within `1e-12` of an integer as
/// that integer.
pub fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// A finite set of distinct points on one manifold.
#[derive(Debug)]
pub struct Code {
    manifold: Manifold,
    points: Vec<Point>,
    distances: OnceLock<Vec<f64>>,
    mid_distances: OnceLock<Vec<f64>>,
}

impl Clone for Code {
    fn clone(&self) -> Self {
        Code {
            manifold: self.manifold,
            points: self.points.clone(),
            distances: self.distances.clone(),
            mid_distances: self.mid_distances.clone(),
        }
    }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn symmetric(n: usize, pairs: &[(usize, usize)], values: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(values) {
        m[i * n + j] = v;
        m[j * n + i] = v;
    }
    m
}

impl Code {
    /// Builds a code, rejecting fewer than two points, mixed manifolds and
    /// duplicate codewords.
    pub fn new(manifold: Manifold, points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewCodewords(points.len()));
        }
        if points.iter().any(|p| *p.manifold() != manifold) {
            return Err(Error::ManifoldMismatch);
        }
        let code = Code {
            manifold,
            points,
            distances: OnceLock::new(),
            mid_distances: OnceLock::new(),
        };
        let n = code.len();
        let d = code.distance_matrix()?;
        for (i, j) in pairs(n) {
            if d[i * n + j] <= DUPLICATE_TOL {
                return Err(Error::DuplicateCodewords(i, j));
            }
        }
        Ok(code)
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Row-major `N × N` matrix of chordal distances.
    pub fn distance_matrix(&self) -> Result<&[f64]> {
        if let Some(d) = self.distances.get() {
            return Ok(d);
        }
        let n = self.len();
        let ps = pairs(n);
        let values = ps
            .par_iter()
            .map(|&(i, j)| manifolds::chordal_distance(&self.points[i], &self.points[j]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.distances.get_or_init(|| symmetric(n, &ps, &values)))
    }

    /// Row-major `N × N` matrix of mid-distances `d_c(C_k, M_kl)`.
    pub fn mid_distance_matrix(&self) -> Result<&[f64]> {
        if let Some(d) = self.mid_distances.get() {
            return Ok(d);
        }
        let n = self.len();
        let ps = pairs(n);
        let values = ps
            .par_iter()
            .map(|&(i, j)| {
                let (x, y) = (&self.points[i], &self.points[j]);
                let m = manifolds::midpoint(x, y)?;
                manifolds::chordal_distance(x, &m)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(self
            .mid_distances
            .get_or_init(|| symmetric(n, &ps, &values)))
    }

    /// Off-diagonal entries of a pairwise matrix, in `i < j` order.
    pub fn pair_values(&self, matrix: &[f64]) -> Vec<f64> {
        let n = self.len();
        pairs(n)
            .into_iter()
            .map(|(i, j)| matrix[i * n + j])
            .collect()
    }
}

/// Minimum chordal distance `δ`.
pub fn min_distance(code: &Code) -> Result<f64> {
    let d = code.distance_matrix()?;
    Ok(code
        .pair_values(d)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Kissing radius `ϱ`: the smallest mid-distance over all pairs.
pub fn kissing_radius(code: &Code) -> Result<f64> {
    let d = code.mid_distance_matrix()?;
    Ok(code
        .pair_values(d)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Density {
    pub value: f64,
    pub std_error: f64,
    pub clamped: bool,
}

fn scaled_density(n: usize, ball: volumes::BallVolume) -> Density {
    let raw = n as f64 * ball.value;
    Density {
        value: raw.min(1.0),
        std_error: n as f64 * ball.std_error,
        clamped: raw > 1.0 || ball.clamped,
    }
}

/// Density `Δ = N μ(B(ϱ))`, clamped to 1 with a flag.
pub fn density(code: &Code, model: VolumeModel) -> Result<Density> {
    let rho = kissing_radius(code)?;
    let ball = volumes::ball_volume(code.manifold(), rho, model)?;
    Ok(scaled_density(code.len(), ball))
}

fn check_delta(m: &Manifold, delta: f64) -> Result<f64> {
    let max = m.max_distance();
    if !(delta > 0.0 && delta <= max * (1.0 + 1e-12)) {
        return Err(Error::Domain {
            function: "kissing bound (delta)",
            value: delta,
        });
    }
    Ok(delta.min(max))
}

/// Largest possible chordal distance on the manifold: `√p` on Grassmann
/// manifolds, `2R` otherwise.
pub fn diameter(m: &Manifold) -> f64 {
    match m.kind() {
        ManifoldKind::Grassmann => (m.p() as f64).sqrt(),
        _ => m.max_distance(),
    }
}

/// Lower bound `ϱ̲(δ)` on the kissing radius of a code with minimum
/// distance `δ`.
pub fn kissing_lower(m: &Manifold, delta: f64) -> Result<f64> {
    let delta = check_delta(m, delta)?;
    let p = m.p() as f64;
    Ok(match m.kind() {
        ManifoldKind::Grassmann => {
            let t = (delta * delta / p).min(1.0);
            (p / 2.0 * (1.0 - (1.0 - t).sqrt())).sqrt()
        }
        ManifoldKind::Unitary | ManifoldKind::Stiefel => {
            let t = (delta * delta / (4.0 * p)).min(1.0);
            (2.0 * p * (1.0 - (1.0 - t).sqrt())).sqrt()
        }
    })
}

/// Upper bound `ϱ̄(δ)`. Conjectured on Stiefel manifolds with `p < n`,
/// where the unitary formula is used.
pub fn kissing_upper(m: &Manifold, delta: f64) -> Result<Bound> {
    let delta = check_delta(m, delta)?;
    let d2 = delta * delta;
    Ok(match m.kind() {
        ManifoldKind::Grassmann => {
            let d2 = d2.min(m.p() as f64);
            let c = ceil_snap(d2);
            Bound::proven((0.5 * (c - (c - d2).max(0.0).sqrt())).sqrt())
        }
        ManifoldKind::Unitary | ManifoldKind::Stiefel => {
            let q = d2 / 4.0;
            let c = ceil_snap(q);
            let v = 2f64.sqrt() * (c - (c - q).max(0.0).sqrt()).sqrt();
            if m.kind() == ManifoldKind::Stiefel && m.p() != m.n() {
                Bound::conjectured(v)
            } else {
                Bound::proven(v)
            }
        }
    })
}

/// Kissing radius `ϱ_s(δ)` of a spherical code on the embedding sphere.
pub fn kissing_spherical(m: &Manifold, delta: f64) -> Result<f64> {
    let delta = check_delta(m, delta)?;
    Ok(spherical_kissing(m.radius_sq(), delta))
}

fn spherical_kissing(big_r2: f64, delta: f64) -> f64 {
    let t = (delta * delta / (4.0 * big_r2)).min(1.0);
    (2.0 * big_r2 * (1.0 - (1.0 - t).sqrt())).sqrt()
}

/// Inverse of `ϱ_s`: `δ² = 4ϱ_s² − ϱ_s⁴/R²`.
pub fn spherical_delta_sq(big_r: f64, rho: f64) -> f64 {
    4.0 * rho * rho - rho.powi(4) / (big_r * big_r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
    pub upper_status: Status,
}

/// `N μ(B(ϱ̲)) ≤ Δ ≤ min{1, N μ(B(ϱ̄))}` evaluated at the code's `δ`.
pub fn density_bounds(code: &Code, model: VolumeModel) -> Result<DensityBounds> {
    let m = code.manifold();
    let delta = min_distance(code)?;
    let lo = kissing_lower(m, delta)?;
    let hi = kissing_upper(m, delta)?;
    let n = code.len();
    let lower = scaled_density(n, volumes::ball_volume(m, lo, model)?).value;
    let upper = scaled_density(
        n,
        volumes::ball_volume(m, hi.value.min(m.max_distance()), model)?,
    )
    .value;
    Ok(DensityBounds {
        lower,
        upper,
        upper_status: hi.status,
    })
}

/// Standard Hamming bound `N ≤ 1/μ(B(δ/2))`.
pub fn hamming_standard(m: &Manifold, delta: f64, model: VolumeModel) -> Result<f64> {
    let delta = check_delta(m, delta)?;
    Ok(1.0 / volumes::ball_volume(m, delta / 2.0, model)?.value)
}

/// Improved Hamming bound `N ≤ 1/μ(B(ϱ̲(δ)))`.
pub fn hamming_improved(m: &Manifold, delta: f64, model: VolumeModel) -> Result<f64> {
    let rho = kissing_lower(m, delta)?;
    Ok(1.0 / volumes::ball_volume(m, rho, model)?.value)
}

fn r_n(m: &Manifold, n: u64, model: VolumeModel) -> Result<f64> {
    Ok(volumes::ideal_radius(m, n, model)?.r)
}

/// `δ ≤ 2 r_N`, the plain inversion of the Hamming bound.
pub fn dist_bound_standard(m: &Manifold, n: u64, model: VolumeModel) -> Result<f64> {
    Ok((2.0 * r_n(m, n, model)?).min(diameter(m)))
}

/// `δ² ≤ 4r_N² − r_N⁴/R²`, saturating at `4R²` for `r_N² ≥ 2R²`.
pub fn dist_bound_sphere(m: &Manifold, n: u64, model: VolumeModel) -> Result<f64> {
    let r2 = r_n(m, n, model)?.powi(2);
    let big_r2 = m.radius_sq();
    let d2 = if r2 >= 2.0 * big_r2 {
        4.0 * big_r2
    } else {
        4.0 * r2 - r2 * r2 / big_r2
    };
    Ok(d2.max(0.0).sqrt().min(diameter(m)))
}

/// `δ² ≤ 4r_N² − (4/p) r_N⁴` on Grassmann manifolds, saturating at `p`.
pub fn dist_bound_grass(m: &Manifold, n: u64, model: VolumeModel) -> Result<f64> {
    if m.kind() != ManifoldKind::Grassmann {
        return Err(Error::Unsupported(m.kind()));
    }
    let r2 = r_n(m, n, model)?.powi(2);
    let p = m.p() as f64;
    let d2 = if r2 >= p / 2.0 {
        p
    } else {
        4.0 * r2 - 4.0 / p * r2 * r2
    };
    Ok(d2.max(0.0).sqrt())
}

/// Conjectured large-`N` distance bound, from `ϱ̄(δ) ≤ r_N`.
pub fn dist_bound_conjectured(m: &Manifold, n: u64, model: VolumeModel) -> Result<Bound> {
    let r2 = r_n(m, n, model)?.powi(2);
    let d2 = match m.kind() {
        ManifoldKind::Grassmann => {
            let x = 2.0 * r2;
            let c = ceil_snap(x);
            c - (c - x).powi(2)
        }
        ManifoldKind::Stiefel | ManifoldKind::Unitary => {
            let x = r2 / 2.0;
            let c = ceil_snap(x);
            4.0 * c - 4.0 * (c - x).powi(2)
        }
    };
    Ok(Bound::conjectured(d2.max(0.0).sqrt().min(diameter(m))))
}

/// Rankin bounds for `N` points on `S^{D−1}(R)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankinBounds {
    /// `δ² ≤ 2R²N/(N−1)`, for `N ≤ D + 1`.
    pub simplex: Option<f64>,
    /// `δ² ≤ 2R²`, for `N > D + 1`.
    pub orthoplex: Option<f64>,
    /// `D + 1 < N ≤ 2D`, where the orthoplex bound can be attained.
    pub orthoplex_attainable: bool,
}

pub fn rankin_bounds(d: usize, big_r2: f64, n: u64) -> Result<RankinBounds> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Rankin bounds need N >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let r2 = big_r2;
    let simplex_range = n <= d as u64 + 1;
    Ok(RankinBounds {
        simplex: simplex_range.then(|| (2.0 * r2 * nf / (nf - 1.0)).sqrt()),
        orthoplex: (!simplex_range).then(|| (2.0 * r2).sqrt()),
        orthoplex_attainable: !simplex_range && n <= 2 * d as u64,
    })
}

/// Exact density of a code with `p = 1` and minimum distance `δ`, whose
/// balls are true spherical caps.
pub fn density_exact_p1(m: &Manifold, n: u64, delta: f64) -> Result<f64> {
    if m.p() != 1 {
        return Err(Error::InvalidArgument(format!(
            "exact p = 1 density needs p = 1, got {m}"
        )));
    }
    let delta = check_delta(m, delta)?;
    let nf = n as f64;
    let d2 = delta * delta;
    match m.kind() {
        ManifoldKind::Grassmann => {
            let base = (1.0 - (1.0 - d2.min(1.0)).sqrt()) / 2.0;
            Ok(nf * base.powi(m.n() as i32 - 1))
        }
        _ => {
            let x = (1.0 - (1.0 - (d2 / 4.0).min(1.0)).sqrt()) / 2.0;
            let a = (2.0 * m.n() as f64 - 1.0) / 2.0;
            Ok(nf * specfun::reg_inc_beta(x, a, a)?)
        }
    }
}

/// Midpoint diagnostics for one pair of points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairSandwich {
    pub delta: f64,
    pub mid: f64,
    pub lower: f64,
    pub upper: Bound,
    pub half: f64,
    pub spherical: f64,
}

impl PairSandwich {
    /// `ϱ_s ≤ ϱ̲ ≤ mid ≤ ϱ̄` and `mid > δ/2`; the upper check is skipped
    /// when the upper bound is only conjectured.
    pub fn holds(&self, tol: f64) -> bool {
        let upper_ok =
            self.upper.status == Status::Conjectured || self.mid <= self.upper.value + tol;
        self.spherical <= self.lower + tol
            && self.lower - tol <= self.mid
            && upper_ok
            && self.mid > self.half
    }
}

pub fn pair_sandwich(x: &Point, y: &Point) -> Result<PairSandwich> {
    let m = *x.manifold();
    let delta = manifolds::chordal_distance(x, y)?;
    let mid = manifolds::chordal_distance(x, &manifolds::midpoint(x, y)?)?;
    Ok(PairSandwich {
        delta,
        mid,
        lower: kissing_lower(&m, delta)?,
        upper: kissing_upper(&m, delta)?,
        half: delta / 2.0,
        spherical: kissing_spherical(&m, delta)?,
    })
}

/// Everything known about a code's packing quality under one volume model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub manifold: Manifold,
    pub n: usize,
    pub delta: f64,
    pub kissing_radius: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub rho_upper_status: Status,
    pub rho_spherical: f64,
    pub r_n: f64,
    pub density: f64,
    pub density_std_error: f64,
    pub density_clamped: bool,
    pub density_lower: f64,
    pub density_upper: f64,
    pub spherical_image_density: f64,
    pub volume_model: VolumeModel,
    /// Report invariants that failed.
    pub violations: Vec<String>,
}

pub fn analyze(code: &Code, model: VolumeModel) -> Result<DensityReport> {
    let m = *code.manifold();
    let delta = min_distance(code)?;
    let rho = kissing_radius(code)?;
    let rho_lower = kissing_lower(&m, delta)?;
    let upper = kissing_upper(&m, delta)?;
    let rho_spherical = kissing_spherical(&m, delta)?;
    let r_n = volumes::ideal_radius(&m, code.len() as u64, model)?.r;
    let dens = density(code, model)?;
    let bounds = density_bounds(code, model)?;

    let embedded: Vec<Vec<f64>> = code.points().iter().map(manifolds::embed_sphere).collect();
    let delta_sphere = pairs(code.len())
        .into_iter()
        .map(|(i, j)| manifolds::euclidean(&embedded[i], &embedded[j]))
        .fold(f64::INFINITY, f64::min);
    let rho_sphere = spherical_kissing(m.radius_sq(), delta_sphere.min(m.max_distance()));
    let cap = volumes::cap_volume(m.ambient_dim(), m.radius(), rho_sphere)?;
    let spherical_image_density = (code.len() as f64 * cap).min(1.0);

    let mut report = DensityReport {
        manifold: m,
        n: code.len(),
        delta,
        kissing_radius: rho,
        rho_lower,
        rho_upper: upper.value,
        rho_upper_status: upper.status,
        rho_spherical,
        r_n,
        density: dens.value,
        density_std_error: dens.std_error,
        density_clamped: dens.clamped,
        density_lower: bounds.lower,
        density_upper: bounds.upper,
        spherical_image_density,
        volume_model: model,
        violations: Vec::new(),
    };
    report.violations = report.check_invariants(INVARIANT_TOL);
    Ok(report)
}

impl DensityReport {
    /// Names of violated relations among
    /// `ϱ_s ≤ ϱ̲ ≤ ϱ ≤ ϱ̄`, `ϱ ≤ r_N` and `Δ_lower ≤ Δ ≤ Δ_upper`.
    /// The upper kissing bound is checked only when proven.
    pub fn check_invariants(&self, tol: f64) -> Vec<String> {
        let mut v = Vec::new();
        let mc_slack = 3.0 * self.density_std_error;
        if self.rho_spherical > self.rho_lower + tol {
            v.push("rho_spherical <= rho_lower".into());
        }
        if self.rho_lower > self.kissing_radius + tol {
            v.push("rho_lower <= kissing_radius".into());
        }
        if self.rho_upper_status == Status::Proven && self.kissing_radius > self.rho_upper + tol {
            v.push("kissing_radius <= rho_upper".into());
        }
        if self.kissing_radius > self.r_n + tol {
            v.push("kissing_radius <= r_N".into());
        }
        if self.density_lower > self.density + tol + mc_slack {
            v.push("density_lower <= density".into());
        }
        if self.rho_upper_status == Status::Proven
            && self.density > self.density_upper + tol + mc_slack
        {
            v.push("density <= density_upper".into());
        }
        v
    }

    pub const CSV_HEADER: &'static str = "kind,n,p,N,delta,kissing_radius,rho_lower,rho_upper,rho_upper_status,rho_spherical,r_N,density,density_std_error,density_clamped,density_lower,density_upper,spherical_image_density,volume_model,violations";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{},{:.15e},{:.15e},{:.15e},{:.15e},{},{:.15e},{:.15e},{:.15e},{},{}",
            self.manifold.kind(),
            self.manifold.n(),
            self.manifold.p(),
            self.n,
            self.delta,
            self.kissing_radius,
            self.rho_lower,
            self.rho_upper,
            match self.rho_upper_status {
                Status::Proven => "proven",
                Status::Conjectured => "conjectured",
            },
            self.rho_spherical,
            self.r_n,
            self.density,
            self.density_std_error,
            self.density_clamped,
            self.density_lower,
            self.density_upper,
            self.spherical_image_density,
            self.volume_model.name(),
            self.violations.join(";"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use num_complex::Complex64;

    fn span(m: Manifold, cols: &[usize]) -> Point {
        let rep = CMatrix::from_fn(m.n(), cols.len(), |i, j| {
            Complex64::new(if i == cols[j] { 1.0 } else { 0.0 }, 0.0)
        });
        Point::new(m, rep).unwrap()
    }

    fn g42() -> Manifold {
        Manifold::grassmann(4, 2).unwrap()
    }

    #[test]
    fn code_rejects_bad_input() {
        let g = g42();
        assert!(matches!(
            Code::new(g, vec![span(g, &[0, 1])]),
            Err(Error::TooFewCodewords(1))
        ));
        let dup = vec![span(g, &[0, 1]), span(g, &[2, 3]), span(g, &[1, 0])];
        assert!(matches!(
            Code::new(g, dup),
            Err(Error::DuplicateCodewords(0, 2))
        ));
        let other = Manifold::grassmann(5, 2).unwrap();
        assert!(matches!(
            Code::new(g, vec![span(g, &[0, 1]), span(other, &[0, 1])]),
            Err(Error::ManifoldMismatch)
        ));
    }

    #[test]
    fn kissing_bound_values() {
        let g = g42();
        let delta = 2.0 / 3f64.sqrt();
        let alpha_minus = ((3.0 - 3f64.sqrt()) / 6.0).sqrt();
        assert!((kissing_lower(&g, delta).unwrap() - 2f64.sqrt() * alpha_minus).abs() < 1e-12);
        assert!((kissing_lower(&g, delta).unwrap() - 0.650_11).abs() < 1e-5);
        let up = kissing_upper(&g, 1.0).unwrap();
        assert!((up.value - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(up.status, Status::Proven);
        let u2 = Manifold::unitary(2).unwrap();
        assert!((kissing_upper(&u2, 2.0).unwrap().value - 2f64.sqrt()).abs() < 1e-14);
        let v = Manifold::stiefel(4, 2).unwrap();
        assert_eq!(kissing_upper(&v, 1.0).unwrap().status, Status::Conjectured);
        assert!(kissing_lower(&g, 0.0).is_err());
        assert!(kissing_lower(&g, 1.5).is_err());
    }

    #[test]
    fn spherical_kissing_values() {
        let g = g42();
        let r = g.radius();
        assert!((kissing_spherical(&g, 2.0 * r).unwrap() - 2f64.sqrt() * r).abs() < 1e-14);
        let delta = 2.0 / 3f64.sqrt();
        assert!(
            (kissing_spherical(&g, delta).unwrap() - kissing_lower(&g, delta).unwrap()).abs()
                < 1e-14
        );
        let g61 = Manifold::grassmann(6, 1).unwrap();
        assert!(kissing_spherical(&g61, 0.5).unwrap() < kissing_lower(&g61, 0.5).unwrap());
        for delta in [0.1, 0.5, 1.0, 1.3] {
            let rho = kissing_spherical(&g, delta).unwrap();
            assert!((spherical_delta_sq(r, rho) - delta * delta).abs() < 1e-10);
        }
    }

    #[test]
    fn hamming_values() {
        let g = g42();
        let s = hamming_standard(&g, 1.0, VolumeModel::SmallBall).unwrap();
        assert!((s - 512.0).abs() < 1e-9);
        let lo = kissing_lower(&g, 1.0).unwrap();
        assert!((lo - 0.541_196).abs() < 1e-6);
        let i = hamming_improved(&g, 1.0, VolumeModel::SmallBall).unwrap();
        assert!((i - 1.0 / (0.5 * lo.powi(8))).abs() < 1e-9);
        assert!((i - 271.764_502).abs() < 1e-5);
        let tiny = 1e-4;
        let ratio = hamming_improved(&g, tiny, VolumeModel::SmallBall).unwrap()
            / hamming_standard(&g, tiny, VolumeModel::SmallBall).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distance_bounds() {
        let g = g42();
        let d = dist_bound_grass(&g, 2, VolumeModel::SmallBall).unwrap();
        assert!((d * d - 2.0).abs() < 1e-12);
        for n in 4..=64 {
            let l6 = dist_bound_grass(&g, n, VolumeModel::SmallBall).unwrap();
            let l5 = dist_bound_sphere(&g, n, VolumeModel::SmallBall).unwrap();
            assert!(l6 <= l5 + 1e-12);
        }
        let conj = dist_bound_conjectured(&g, 32, VolumeModel::SmallBall).unwrap();
        assert!((conj.value * conj.value - 1.0).abs() < 1e-12);
        assert_eq!(conj.status, Status::Conjectured);
        assert!(
            dist_bound_grass(&Manifold::stiefel(4, 2).unwrap(), 4, VolumeModel::SmallBall).is_err()
        );
    }

    #[test]
    fn line_packing_remark() {
        // G(n,1): δ² ≤ 4N^{-1/(n-1)} − 4N^{-2/(n-1)} once N > 2^{n-1}
        for n in [3usize, 4, 6] {
            let g = Manifold::grassmann(n, 1).unwrap();
            for big_n in [40u64, 100, 1000] {
                let t = (big_n as f64).powf(-1.0 / (n as f64 - 1.0));
                let want = 4.0 * t - 4.0 * t * t;
                let got = dist_bound_grass(&g, big_n, VolumeModel::SmallBall).unwrap();
                assert!((got * got - want).abs() < 1e-12, "n={n} N={big_n}");
            }
        }
        // four orthogonal lines in C^4 have δ² = 1, beyond the unsaturated form
        let g41 = Manifold::grassmann(4, 1).unwrap();
        let t = 4f64.powf(-1.0 / 3.0);
        assert!(4.0 * t - 4.0 * t * t < 1.0);
        assert_eq!(
            dist_bound_grass(&g41, 4, VolumeModel::SmallBall).unwrap(),
            1.0
        );
    }

    #[test]
    fn rankin_values() {
        let g = g42();
        let r = rankin_bounds(g.ambient_dim(), g.radius_sq(), 4).unwrap();
        assert!((r.simplex.unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(r.orthoplex.is_none());
        let r = rankin_bounds(15, g.radius_sq(), 30).unwrap();
        assert!((r.orthoplex.unwrap() - 1.0).abs() < 1e-14 && r.orthoplex_attainable);
        let r = rankin_bounds(15, g.radius_sq(), 31).unwrap();
        assert!(!r.orthoplex_attainable && r.orthoplex.is_some());
        let g73 = Manifold::grassmann(7, 3).unwrap();
        let r = rankin_bounds(g73.ambient_dim(), g73.radius_sq(), 28).unwrap();
        assert!((r.simplex.unwrap().powi(2) - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn exact_p1_densities() {
        let g21 = Manifold::grassmann(2, 1).unwrap();
        assert!((density_exact_p1(&g21, 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let g31 = Manifold::grassmann(3, 1).unwrap();
        assert_eq!(density_exact_p1(&g31, 2, 1.0).unwrap(), 0.5);
        for n in [2usize, 3, 5] {
            let v = Manifold::stiefel(n, 1).unwrap();
            for delta in [0.3, 1.0, 1.9] {
                let rho = kissing_spherical(&v, delta).unwrap();
                let want = 5.0 * volumes::cap_volume(2 * n, 1.0, rho).unwrap();
                assert!((density_exact_p1(&v, 5, delta).unwrap() - want).abs() < 1e-14);
            }
        }
        assert!(density_exact_p1(&g42(), 2, 1.0).is_err());
    }

    #[test]
    fn coordinate_code_report() {
        let g = g42();
        let pts = vec![
            span(g, &[0, 1]),
            span(g, &[1, 2]),
            span(g, &[2, 3]),
            span(g, &[3, 0]),
        ];
        let code = Code::new(g, pts).unwrap();
        let rep = analyze(&code, VolumeModel::SmallBall).unwrap();
        assert!((rep.delta - 1.0).abs() < 1e-14);
        assert!((rep.kissing_radius - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((rep.density - 0.125).abs() < 1e-14);
        assert!((rep.density_upper - 0.125).abs() < 1e-12);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert_eq!(
            rep.to_csv_row().split(',').count(),
            DensityReport::CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn ceiling_snaps_to_integers() {
        assert_eq!(ceil_snap(1.0 + 1e-15), 1.0);
        assert_eq!(ceil_snap(1.1), 2.0);
        assert_eq!(ceil_snap(0.3), 1.0);
    }
}
