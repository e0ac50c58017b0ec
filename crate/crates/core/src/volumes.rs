//! Manifold volumes, normalized ball volumes under several models,
//! hyperspherical caps, complementary radii and the ideal radius `r_N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifolds::{self, Manifold, ManifoldKind};
use crate::specfun;

const RADIUS_SLACK: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;
pub const MIN_MC_SAMPLES: usize = 1000;

/// How `μ(B(r))` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum VolumeModel {
    /// Normalized cap on the embedding sphere.
    ExactCap,
    /// Leading term `c·r^dim`.
    SmallBall,
    /// Gaussian limit of the cap / ball volume.
    GaussianAsymptotic,
    /// Fraction of Haar samples inside the ball around `I_{n,p}`.
    MonteCarlo { samples: usize, seed: u64 },
}

impl VolumeModel {
    pub fn validate(&self) -> Result<()> {
        if let VolumeModel::MonteCarlo { samples, .. } = *self {
            if samples < MIN_MC_SAMPLES {
                return Err(Error::InvalidModel(format!(
                    "monte-carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            VolumeModel::ExactCap => "exact-cap",
            VolumeModel::SmallBall => "small-ball",
            VolumeModel::GaussianAsymptotic => "gaussian",
            VolumeModel::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// A positive quantity held as its logarithm, with the linear value when it
/// fits in a double.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogValue {
    pub ln: f64,
    pub value: Option<f64>,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        let v = ln.exp();
        let value = (v.is_finite() && v > 0.0).then_some(v);
        LogValue { ln, value }
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }
}

/// Ball volume with its provenance flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallVolume {
    pub value: f64,
    /// Binomial standard error for Monte Carlo, zero otherwise.
    pub std_error: f64,
    /// The model produced a value above 1 that was clamped.
    pub clamped: bool,
    /// The radius lies outside the range where the model is trusted.
    pub out_of_regime: bool,
}

impl BallVolume {
    fn exact(value: f64) -> Self {
        BallVolume {
            value,
            std_error: 0.0,
            clamped: false,
            out_of_regime: false,
        }
    }
}

/// `ln` of the volume of the unit ball in `R^d`.
pub fn ln_unit_ball(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    h * PI.ln() - specfun::ln_gamma(h + 1.0)
}

/// Volume of the manifold for the metric induced by the chordal distance.
pub fn manifold_volume(m: &Manifold) -> LogValue {
    LogValue::from_ln(ln_volume(m.kind(), m.n(), m.p()))
}

fn ln_volume(kind: ManifoldKind, n: usize, p: usize) -> f64 {
    let gamma =
        |p: usize, n: usize| specfun::log_multivariate_gamma(p, n as f64).expect("n >= p >= 1");
    let (nf, pf) = (n as f64, p as f64);
    match kind {
        // U_n is V(n, n) as a metric space.
        ManifoldKind::Unitary | ManifoldKind::Stiefel => {
            pf * (pf + 1.0) / 2.0 * 2f64.ln() + nf * pf * PI.ln() - gamma(p, n)
        }
        ManifoldKind::Grassmann => pf * (nf - pf) * PI.ln() + gamma(p, p) - gamma(p, n),
    }
}

/// Coefficient `c` in `μ(B(r)) ≈ c·r^dim` as `r → 0`.
pub fn small_ball_coeff(m: &Manifold) -> f64 {
    ln_small_ball_coeff(m).exp()
}

pub fn ln_small_ball_coeff(m: &Manifold) -> f64 {
    ln_unit_ball(m.dim()) - manifold_volume(m).ln
}

fn check_cap_args(d: usize, big_r: f64, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain {
            function: "cap_volume(D)",
            value: d as f64,
        });
    }
    if !(big_r > 0.0) {
        return Err(Error::Domain {
            function: "cap_volume(R)",
            value: big_r,
        });
    }
    check_radius(r, 2.0 * big_r, "cap_volume(r)")
}

fn check_radius(r: f64, max: f64, function: &'static str) -> Result<f64> {
    if !(r >= -RADIUS_SLACK && r <= max * (1.0 + RADIUS_SLACK) + RADIUS_SLACK) {
        return Err(Error::Domain { function, value: r });
    }
    Ok(r.clamp(0.0, max))
}

/// Normalized area of a cap of chordal radius `r` on `S^{D−1}(R)`,
/// `I_{r²/4R²}((D−1)/2, (D−1)/2)`.
pub fn cap_volume(d: usize, big_r: f64, r: f64) -> Result<f64> {
    let r = check_cap_args(d, big_r, r)?;
    let a = (d as f64 - 1.0) / 2.0;
    specfun::reg_inc_beta((r * r / (4.0 * big_r * big_r)).min(1.0), a, a)
}

/// Small-cap limit `Γ(D/2)/(2√π Γ((D+1)/2)) · (r/R)^{D−1}`.
pub fn cap_volume_small(d: usize, big_r: f64, r: f64) -> f64 {
    let df = d as f64;
    let ln =
        specfun::ln_gamma(df / 2.0) - specfun::ln_gamma((df + 1.0) / 2.0) - (2.0 * PI.sqrt()).ln()
            + (df - 1.0) * (r / big_r).ln();
    ln.exp()
}

/// Gaussian approximation `½erf(√(D/2)) − ½erf(√(D/2)(1 − r²/2R²))`.
pub fn cap_volume_gaussian(d: usize, big_r: f64, r: f64) -> f64 {
    let a = (d as f64 / 2.0).sqrt();
    let z = a * (1.0 - r * r / (2.0 * big_r * big_r));
    // Written with erfc so the small-radius tail keeps its relative accuracy.
    0.5 * (specfun::erfc(z) - specfun::erfc(a))
}

/// Fixed sample of squared distances from `I_{n,p}` used to estimate ball
/// volumes at many radii.
#[derive(Clone, Debug)]
pub struct MonteCarloBall {
    sorted_sq: Vec<f64>,
}

impl MonteCarloBall {
    pub fn new(m: &Manifold, samples: usize, seed: u64) -> Result<Self> {
        VolumeModel::MonteCarlo { samples, seed }.validate()?;
        let mut sorted_sq = manifolds::sample_base_distances_sq(m, samples, seed);
        sorted_sq.sort_by(f64::total_cmp);
        Ok(MonteCarloBall { sorted_sq })
    }

    pub fn samples(&self) -> usize {
        self.sorted_sq.len()
    }

    /// Empirical `μ̂(B(r))` with binomial standard error.
    pub fn measure(&self, r: f64) -> BallVolume {
        let r2 = r * r;
        let inside = self.sorted_sq.partition_point(|&d2| d2 <= r2);
        let m = self.sorted_sq.len() as f64;
        let value = inside as f64 / m;
        BallVolume {
            value,
            std_error: (value * (1.0 - value) / m).sqrt(),
            clamped: false,
            out_of_regime: false,
        }
    }
}

/// Normalized volume `μ(B(r))` of a chordal ball.
pub fn ball_volume(m: &Manifold, r: f64, model: VolumeModel) -> Result<BallVolume> {
    model.validate()?;
    let r = check_radius(r, m.max_distance(), "ball_volume(r)")?;
    let (d, big_r) = (m.ambient_dim(), m.radius());
    Ok(match model {
        VolumeModel::ExactCap => BallVolume::exact(cap_volume(d, big_r, r)?),
        VolumeModel::GaussianAsymptotic => {
            BallVolume::exact(cap_volume_gaussian(d, big_r, r).clamp(0.0, 1.0))
        }
        VolumeModel::SmallBall => {
            let raw = if r == 0.0 {
                0.0
            } else {
                (ln_small_ball_coeff(m) + m.dim() as f64 * r.ln()).exp()
            };
            let clamped = raw > 1.0;
            BallVolume {
                value: raw.min(1.0),
                std_error: 0.0,
                clamped,
                out_of_regime: clamped || (m.kind() == ManifoldKind::Grassmann && r > 1.0),
            }
        }
        VolumeModel::MonteCarlo { samples, seed } => {
            MonteCarloBall::new(m, samples, seed)?.measure(r)
        }
    })
}

/// Radius of the complementary ball: `μ(B(r)) = 1 − μ(B(r_c))`.
/// For Grassmann manifolds the complementary ball lives in `G(n, n−p)`
/// around the orthogonal complement of the center.
pub fn complement_radius(m: &Manifold, r: f64) -> Result<f64> {
    let max = m.max_distance();
    let r = check_radius(r, max, "complement_radius(r)")?;
    Ok((max * max - r * r).max(0.0).sqrt())
}

/// Ideal radius `r_N` with `μ(B(r_N)) = 1/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdealRadius {
    pub r: f64,
    /// The model is used outside its validity range (small-ball with
    /// `N < 1/c`).
    pub out_of_regime: bool,
}

pub fn ideal_radius(m: &Manifold, n_codewords: u64, model: VolumeModel) -> Result<IdealRadius> {
    model.validate()?;
    if n_codewords < 2 {
        return Err(Error::InvalidArgument(format!(
            "ideal radius needs N >= 2, got {n_codewords}"
        )));
    }
    let nf = n_codewords as f64;
    let target = 1.0 / nf;
    let max = m.max_distance();
    match model {
        VolumeModel::SmallBall => {
            let ln_c = ln_small_ball_coeff(m);
            let r = (-(ln_c + nf.ln()) / m.dim() as f64).exp();
            let out_of_regime = ln_c + nf.ln() < 0.0 || r > max;
            Ok(IdealRadius {
                r: r.min(max),
                out_of_regime,
            })
        }
        VolumeModel::GaussianAsymptotic => {
            let d = m.ambient_dim() as f64;
            let big_r = m.radius();
            let a = (d / 2.0).sqrt();
            let e = specfun::erfc_inv(specfun::erfc(a) + 2.0 * target)?;
            let t = (1.0 - (2.0 / d).sqrt() * e).max(0.0);
            Ok(IdealRadius {
                r: (2f64.sqrt() * big_r * t.sqrt()).min(max),
                out_of_regime: false,
            })
        }
        VolumeModel::ExactCap => {
            let (d, big_r) = (m.ambient_dim(), m.radius());
            let r = bisect(0.0, max, target, BISECTION_TOL, |r| cap_volume(d, big_r, r))?;
            Ok(IdealRadius {
                r,
                out_of_regime: false,
            })
        }
        VolumeModel::MonteCarlo { samples, seed } => {
            let ball = MonteCarloBall::new(m, samples, seed)?;
            let tol = (target * (1.0 - target) / samples as f64).sqrt();
            let r = bisect(0.0, max, target, tol, |r| Ok(ball.measure(r).value))?;
            Ok(IdealRadius {
                r,
                out_of_regime: false,
            })
        }
    }
}

/// Bisection for a nondecreasing `f` on `[lo, hi]` until `|f − target| ≤ tol`.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() <= tol {
            break;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}
