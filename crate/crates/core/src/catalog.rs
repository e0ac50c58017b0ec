//! Concrete codes with known parameters, and a simple local search for new
//! ones.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::manifolds::{self, Manifold, ManifoldKind, Point};
use crate::packing::{self, Code, DensityReport};

fn alpha_plus() -> f64 {
    ((3.0 + 3f64.sqrt()) / 6.0).sqrt()
}

fn alpha_minus() -> f64 {
    ((3.0 - 3f64.sqrt()) / 6.0).sqrt()
}

/// The four unit vectors `[α₊, ±α₋]`, `[α₋, ±iα₊]`.
fn tensor_factors() -> [[Complex64; 2]; 4] {
    let (ap, am) = (alpha_plus(), alpha_minus());
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    [
        [r(ap), r(am)],
        [r(ap), r(-am)],
        [r(am), i(ap)],
        [r(am), i(-ap)],
    ]
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn column(v: &[Complex64]) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v)
}

fn coordinate_plane(n: usize, i: usize, j: usize) -> CMatrix {
    let mut y = CMatrix::zeros(n, 2);
    y[(i, 0)] = Complex64::new(1.0, 0.0);
    y[(j, 1)] = Complex64::new(1.0, 0.0);
    y
}

fn make_code(manifold: Manifold, reps: Vec<CMatrix>) -> Result<Code> {
    let points = reps
        .into_iter()
        .map(|r| Point::new(manifold, r))
        .collect::<Result<Vec<_>>>()?;
    Code::new(manifold, points)
}

fn check_m(m: usize) -> Result<()> {
    if !(2..=6).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "family parameter m must be in 2..=6, got {m}"
        )));
    }
    Ok(())
}

/// `{I₂ ⊗ c₁ ⊗ ⋯ ⊗ c_{m−1}}` in `G(2^m, 2)`, `4^{m−1}` codewords.
pub fn build_cm1(m: usize) -> Result<Code> {
    check_m(m)?;
    let manifold = Manifold::grassmann(1 << m, 2)?;
    let factors = tensor_factors();
    let mut reps = vec![linalg::eye(2, 2)];
    for _ in 1..m {
        reps = reps
            .iter()
            .flat_map(|r| factors.iter().map(move |c| kron(r, &column(c))))
            .collect();
    }
    make_code(manifold, reps)
}

/// All coordinate planes `span{e_i, e_j}` in `G(2^m, 2)`, `C(2^m, 2)`
/// codewords.
pub fn build_cm2(m: usize) -> Result<Code> {
    check_m(m)?;
    let n = 1 << m;
    let manifold = Manifold::grassmann(n, 2)?;
    let reps = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| coordinate_plane(n, i, j)))
        .collect();
    make_code(manifold, reps)
}

/// Four codewords in `G(4, 2)` with all principal angles `arccos(1/√3)`.
pub fn build_c1() -> Result<Code> {
    build_cm1(2)
}

/// The four cyclically adjacent coordinate planes of `C⁴`.
pub fn build_c2() -> Result<Code> {
    let manifold = Manifold::grassmann(4, 2)?;
    let reps = (0..4)
        .map(|i| coordinate_plane(4, i, (i + 1) % 4))
        .collect();
    make_code(manifold, reps)
}

const SIGN_PATTERNS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// 28 codewords in `G(7, 3)`: column `k` of a generator has `1` in row
/// `rows[k].0` and `±√2` in row `rows[k].1`, normalized by `1/√3`; the code
/// is all cyclic row shifts of the four sign patterns with product `+1`.
fn build_g73(rows: [(usize, usize); 3]) -> Result<Code> {
    let manifold = Manifold::grassmann(7, 3)?;
    let scale = 1.0 / 3f64.sqrt();
    let mut reps = Vec::with_capacity(28);
    for signs in SIGN_PATTERNS {
        for shift in 0..7 {
            let mut y = CMatrix::zeros(7, 3);
            for (k, &(a, b)) in rows.iter().enumerate() {
                y[((a + shift) % 7, k)] = Complex64::new(scale, 0.0);
                y[((b + shift) % 7, k)] = Complex64::new(signs[k] * SQRT_2 * scale, 0.0);
            }
            reps.push(y);
        }
    }
    make_code(manifold, reps)
}

pub fn build_c3() -> Result<Code> {
    build_g73([(1, 3), (2, 6), (4, 5)])
}

pub fn build_c4() -> Result<Code> {
    build_g73([(1, 6), (2, 5), (4, 3)])
}

/// Expected value of one report quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Target {
    Value { value: f64, tol: f64 },
    Range { lo: f64, hi: f64 },
    Log10 { value: f64, tol: f64 },
}

impl Target {
    pub fn accepts(&self, x: f64) -> bool {
        match *self {
            Target::Value { value, tol } => (x - value).abs() <= tol,
            Target::Range { lo, hi } => (lo..=hi).contains(&x),
            Target::Log10 { value, tol } => (x.log10() - value).abs() <= tol,
        }
    }
}

/// Known parameters of a catalog code. Densities refer to the small-ball
/// volume model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub delta: Option<Target>,
    pub kissing_radius: Option<Target>,
    pub density: Option<Target>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub manifold: Manifold,
    pub m: Option<usize>,
    pub expected: Expected,
}

/// One comparison of a report field against its target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub field: &'static str,
    pub got: f64,
    pub target: Target,
    pub pass: bool,
}

impl CatalogEntry {
    /// Names: `C1`, `C2`, `C3`, `C4`, `C1-m<m>`, `C2-m<m>` with `m` in 2..=6.
    pub fn by_name(name: &str) -> Result<Self> {
        let upper = name.to_ascii_uppercase();
        let exact = |value| Some(Target::Value { value, tol: 1e-12 });
        let close = |value| Some(Target::Value { value, tol: 1e-9 });
        let rho1 = SQRT_2 * alpha_minus();
        let rho3 = ((9.0 - SQRT_2 - 3f64.sqrt() - 6f64.sqrt()) / 6.0).sqrt();
        let g42 = Manifold::grassmann(4, 2)?;
        let g73 = Manifold::grassmann(7, 3)?;
        let entry = |manifold, m, expected| CatalogEntry {
            name: upper.clone(),
            manifold,
            m,
            expected,
        };
        match upper.as_str() {
            "C1" => Ok(entry(
                g42,
                Some(2),
                Expected {
                    delta: exact(2.0 / 3f64.sqrt()),
                    kissing_radius: close(rho1),
                    density: close(8.0 / 9.0 * (7.0 - 4.0 * 3f64.sqrt())),
                },
            )),
            "C2" => Ok(entry(
                g42,
                None,
                Expected {
                    delta: exact(1.0),
                    kissing_radius: exact(0.5f64.sqrt()),
                    density: exact(0.125),
                },
            )),
            "C3" => Ok(entry(
                g73,
                None,
                Expected {
                    delta: close(4.0 / 3.0),
                    kissing_radius: close(rho3),
                    density: Some(Target::Log10 {
                        value: -4.2,
                        tol: 0.1,
                    }),
                },
            )),
            "C4" => Ok(entry(
                g73,
                None,
                Expected {
                    delta: close(4.0 / 3.0),
                    kissing_radius: Some(Target::Range { lo: 0.80, hi: 0.81 }),
                    density: Some(Target::Log10 {
                        value: -3.5,
                        tol: 0.1,
                    }),
                },
            )),
            _ => {
                let (family, m) = upper
                    .split_once("-M")
                    .and_then(|(f, m)| m.parse::<usize>().ok().map(|m| (f, m)))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown catalog code '{name}'"))
                    })?;
                check_m(m)?;
                let manifold = Manifold::grassmann(1 << m, 2)?;
                let tol = 1e-6;
                let expected = match family {
                    "C1" => Expected {
                        delta: Some(Target::Value {
                            value: 2.0 / 3f64.sqrt(),
                            tol,
                        }),
                        kissing_radius: Some(Target::Value { value: rho1, tol }),
                        density: None,
                    },
                    "C2" => Expected {
                        delta: Some(Target::Value { value: 1.0, tol }),
                        kissing_radius: Some(Target::Value {
                            value: 0.5f64.sqrt(),
                            tol,
                        }),
                        density: None,
                    },
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown catalog code '{name}'"
                        )))
                    }
                };
                Ok(entry(manifold, Some(m), expected))
            }
        }
    }

    pub fn names() -> Vec<String> {
        let mut v: Vec<String> = ["C1", "C2", "C3", "C4"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for fam in ["C1", "C2"] {
            for m in 2..=6 {
                v.push(format!("{fam}-m{m}"));
            }
        }
        v
    }

    pub fn build(&self) -> Result<Code> {
        match (self.name.as_str(), self.m) {
            ("C1", _) => build_c1(),
            ("C2", _) => build_c2(),
            ("C3", _) => build_c3(),
            ("C4", _) => build_c4(),
            (name, Some(m)) if name.starts_with("C1-") => build_cm1(m),
            (_, Some(m)) => build_cm2(m),
            (name, None) => Err(Error::InvalidArgument(format!(
                "unknown catalog code '{name}'"
            ))),
        }
    }

    /// Compares a report against the expected values that are stated.
    pub fn check(&self, report: &DensityReport) -> Vec<Check> {
        let fields = [
            ("delta", report.delta, self.expected.delta),
            (
                "kissing_radius",
                report.kissing_radius,
                self.expected.kissing_radius,
            ),
            ("density", report.density, self.expected.density),
        ];
        fields
            .into_iter()
            .filter_map(|(field, got, target)| {
                target.map(|target| Check {
                    field,
                    got,
                    target,
                    pass: target.accepts(got),
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MaxMinDistance,
    MaxKissingRadius,
}

const RESTARTS: u64 = 10;

/// Soft minimum of the pair values and its gradient per point.
fn soft_min_step(
    m: &Manifold,
    objective: Objective,
    reps: &[CMatrix],
    beta: f64,
) -> Result<(f64, f64, Vec<CMatrix>)> {
    let n = reps.len();
    let mut grads = vec![CMatrix::zeros(m.n(), m.p()); n];
    let terms = pair_values_and_grads(m, objective, reps)?;
    let hard = terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = terms.iter().map(|t| (-beta * (t.2 - hard)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let soft = hard - total.ln() / beta;
    for ((i, j, _, gx, gy), w) in terms.into_iter().zip(&weights) {
        let w = Complex64::new(w / total, 0.0);
        grads[i] += gx * w;
        grads[j] += gy * w;
    }
    Ok((soft, hard, grads))
}

type PairTerm = (usize, usize, f64, CMatrix, CMatrix);

fn pair_values_and_grads(
    m: &Manifold,
    objective: Objective,
    reps: &[CMatrix],
) -> Result<Vec<PairTerm>> {
    let n = reps.len();
    let two = Complex64::new(2.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (&reps[i], &reps[j]);
            let term = match (objective, m.kind()) {
                (Objective::MaxMinDistance, ManifoldKind::Grassmann) => {
                    let c = x.adjoint() * y;
                    let v = m.p() as f64 - c.iter().map(|z| z.norm_sqr()).sum::<f64>();
                    (i, j, v, -(y * c.adjoint()) * two, -(x * &c) * two)
                }
                (Objective::MaxMinDistance, _) => {
                    let d = x - y;
                    let v = d.iter().map(|z| z.norm_sqr()).sum::<f64>();
                    (i, j, v, &d * two, -&d * two)
                }
                (Objective::MaxKissingRadius, ManifoldKind::Grassmann) => {
                    let dec = linalg::svd(&(y.adjoint() * x))?;
                    let v =
                        m.p() as f64 / 2.0 - 0.5 * dec.s.iter().map(|s| s.min(1.0)).sum::<f64>();
                    let w = &dec.u * dec.v.adjoint();
                    (i, j, v, -(y * &w) * half, -(x * w.adjoint()) * half)
                }
                (Objective::MaxKissingRadius, _) => {
                    let px = Point::new_unchecked(*m, x.clone());
                    let py = Point::new_unchecked(*m, y.clone());
                    let mid = manifolds::midpoint(&px, &py)?;
                    let v = manifolds::chordal_distance(&px, &mid)?.powi(2);
                    let g = -mid.into_rep();
                    (i, j, v, g.clone(), g)
                }
            };
            out.push(term);
        }
    }
    Ok(out)
}

fn retract(reps: &[CMatrix], grads: &[CMatrix], step: f64) -> Option<Vec<CMatrix>> {
    reps.iter()
        .zip(grads)
        .map(|(x, g)| linalg::polar_factor(&(x + g * Complex64::new(step, 0.0))).ok())
        .collect()
}

fn local_search(
    m: &Manifold,
    n: usize,
    objective: Objective,
    iterations: usize,
    seed: u64,
    restart: u64,
) -> Result<(f64, Vec<CMatrix>)> {
    let mut rng = manifolds::chunk_rng(seed, restart);
    let mut reps: Vec<CMatrix> = (0..n)
        .map(|_| manifolds::sample_uniform(m, &mut rng).into_rep())
        .collect();
    let scale = packing::diameter(m).powi(2);
    let beta = 60.0 / scale;
    let mut step = 0.1;
    let (mut soft, mut hard, mut grads) = soft_min_step(m, objective, &reps, beta)?;
    for _ in 0..iterations {
        if step < 1e-12 {
            break;
        }
        let Some(candidate) = retract(&reps, &grads, step) else {
            step *= 0.5;
            continue;
        };
        match soft_min_step(m, objective, &candidate, beta) {
            Ok((s, h, g)) if s >= soft => {
                reps = candidate;
                soft = s;
                hard = h;
                grads = g;
                step = (step * 1.25).min(1.0);
            }
            _ => step *= 0.5,
        }
    }
    Ok((hard, reps))
}

/// Local search for an `N`-point code: soft-min gradient ascent of the
/// smallest pairwise distance (or mid-distance) with polar retraction,
/// step halving on regression, and ten restarts run in parallel. The result
/// depends only on the seed.
pub fn search_packing(
    m: &Manifold,
    n: usize,
    objective: Objective,
    iterations: usize,
    seed: u64,
) -> Result<Code> {
    if n < 2 {
        return Err(Error::TooFewCodewords(n));
    }
    let runs: Vec<(f64, Vec<CMatrix>)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| local_search(m, n, objective, iterations, seed, r))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = k;
        }
    }
    let reps = runs
        .into_iter()
        .nth(best)
        .map(|r| r.1)
        .expect("at least one restart");
    let points = reps
        .into_iter()
        .map(|r| Point::new_unchecked(*m, r))
        .collect();
    Code::new(*m, points)
}
