//! Complex dense decompositions used by the geometry layer.
//!
//! Thin wrappers over `nalgebra` that pin down ordering, phase and
//! tolerance conventions.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Thin singular value decomposition `A = U diag(s) V^H`, `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// Rectangular identity `I_{n,p}`.
pub fn eye(n: usize, p: usize) -> CMatrix {
    CMatrix::from_fn(n, p, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Frobenius norm.
pub fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A^H A − I‖_F`.
pub fn orthonormality_residual(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a;
    frob(&(g - eye(a.ncols(), a.ncols())))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_finite(a: &CMatrix) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("svd", Box::new(a.clone())))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Thin SVD with `k = min(m, n)` singular triplets sorted descending.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    ensure_finite(a)?;
    let dec = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("svd", Box::new(a.clone())))?;
    let u = dec.u.expect("requested U");
    let v_t = dec.v_t.expect("requested V^H");
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let s = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = CMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let v = CMatrix::from_fn(v_t.ncols(), k, |r, c| v_t[(order[c], r)].conj());
    Ok(Svd { u, s, v })
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Eigendecomposition `U = Ω diag(e^{iθ}) Ω^H` of a unitary matrix with
/// phases in `(−π, π]`.
///
/// The Hermitian part `H` and the Hermitian form `K` of the skew part of a
/// normal matrix commute, so an eigenbasis of `H + cK` for a generic `c`
/// diagonalizes both. A few values of `c` are tried until the
/// reconstruction passes.
pub fn unitary_eig(u: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    ensure_finite(u)?;
    if !u.is_square() {
        return Err(Error::Shape {
            expected: (u.nrows(), u.nrows()),
            got: u.shape(),
        });
    }
    let residual = orthonormality_residual(u);
    if residual > 1e-8 {
        return Err(Error::NotUnitary { residual });
    }
    let n = u.nrows();
    let uh = u.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let h = (u + &uh) * half;
    let k = (u - &uh) * Complex64::new(0.0, -0.5);
    let tol = 1e-9 * (1.0 + (n as f64).sqrt());
    for c in [
        0.618_033_988_749_894_9,
        1.303,
        0.271_828_182_845_904_5,
        2.917,
    ] {
        let pencil = &h + &k * Complex64::new(c, 0.0);
        let eig = SymmetricEigen::try_new(pencil, f64::EPSILON, 0)
            .ok_or_else(|| Error::Convergence("unitary_eig", Box::new(u.clone())))?;
        let omega = eig.eigenvectors;
        let hd = omega.adjoint() * &h * &omega;
        let kd = omega.adjoint() * &k * &omega;
        let theta: Vec<f64> = (0..n)
            .map(|j| wrap_phase(kd[(j, j)].re.atan2(hd[(j, j)].re)))
            .collect();
        let rebuilt = rebuild(&omega, &theta);
        if frob(&(rebuilt - u)) <= tol {
            return Ok((omega, theta));
        }
    }
    Err(Error::Convergence("unitary_eig", Box::new(u.clone())))
}

/// `Ω diag(e^{iθ}) Ω^H`.
pub fn rebuild(omega: &CMatrix, theta: &[f64]) -> CMatrix {
    let mut scaled = omega.clone();
    for (j, t) in theta.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, *t);
        for v in scaled.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    scaled * omega.adjoint()
}

/// Q factor of a tall matrix with the diagonal of R made real-positive.
pub fn qr_unitary(a: &CMatrix) -> Result<CMatrix> {
    ensure_finite(a)?;
    let (n, p) = a.shape();
    if n < p {
        return Err(Error::Shape {
            expected: (p, p),
            got: (n, p),
        });
    }
    let scale = frob(a);
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let mut sigma_min = f64::INFINITY;
    for j in 0..p {
        let d = r[(j, j)];
        let mag = d.norm();
        sigma_min = sigma_min.min(mag);
        if mag > 0.0 {
            let phase = d / mag;
            for v in q.column_mut(j).iter_mut() {
                *v *= phase;
            }
        }
    }
    if !(sigma_min > 1e-12 * scale) {
        return Err(Error::RankDeficient { sigma_min });
    }
    Ok(q)
}

/// Closest semi-unitary matrix `U V^H` to `A` in Frobenius norm.
pub fn polar_factor(a: &CMatrix) -> Result<CMatrix> {
    let (n, p) = a.shape();
    if n < p {
        return Err(Error::Shape {
            expected: (p, p),
            got: (n, p),
        });
    }
    let dec = svd(a)?;
    let sigma_min = dec.s.last().copied().unwrap_or(0.0);
    if !(sigma_min > 1e-10 * (1.0 + frob(a))) {
        return Err(Error::NoUniqueProjection);
    }
    Ok(&dec.u * dec.v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> CMatrix {
        CMatrix::from_fn(n, p, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
    }

    #[test]
    fn svd_examples() {
        let d =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(4.0, 0.0)]));
        assert_eq!(svd(&d).unwrap().s.len(), 2);
        let s = svd(&d).unwrap().s;
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        let s = svd(&eye(2, 2)).unwrap().s;
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let perm =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let s = svd(&perm).unwrap().s;
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn svd_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..1000 {
            let m = 1 + trial % 16;
            let n = 1 + (trial * 7) % 16;
            let a = gaussian(&mut rng, m, n);
            let dec = svd(&a).unwrap();
            let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dec.s.len(),
                dec.s.iter().map(|&x| c(x, 0.0)),
            ));
            let rebuilt = &dec.u * sigma * dec.v.adjoint();
            assert!(frob(&(rebuilt - &a)) <= 1e-10 * (1.0 + frob(&a)));
            assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(dec.s.iter().all(|&x| x >= 0.0));
            assert!(orthonormality_residual(&dec.u) < 1e-10);
            assert!(orthonormality_residual(&dec.v) < 1e-10);
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = eye(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn unitary_eig_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ]));
        let (_, mut theta) = unitary_eig(&d).unwrap();
        theta.sort_by(|a, b| b.total_cmp(a));
        assert!((theta[0] - PI).abs() < 1e-12 && theta[1].abs() < 1e-12);

        let (_, theta) = unitary_eig(&eye(3, 3)).unwrap();
        assert!(theta.iter().all(|t| t.abs() < 1e-12));

        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, PI / 3.0),
            Complex64::from_polar(1.0, -PI / 4.0),
        ]));
        let (_, mut theta) = unitary_eig(&d).unwrap();
        theta.sort_by(|a, b| b.total_cmp(a));
        assert!((theta[0] - PI / 3.0).abs() < 1e-12);
        assert!((theta[1] + PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_eig_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=10 {
            for _ in 0..20 {
                let u = qr_unitary(&gaussian(&mut rng, n, n)).unwrap();
                let (omega, theta) = unitary_eig(&u).unwrap();
                assert!(orthonormality_residual(&omega) < 1e-9);
                assert!(frob(&(rebuild(&omega, &theta) - &u)) < 1e-9);
                assert!(theta.iter().all(|&t| t > -PI && t <= PI));
            }
        }
    }

    #[test]
    fn unitary_eig_degenerate_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = qr_unitary(&gaussian(&mut rng, 4, 4)).unwrap();
        let phases = [0.5, 0.5, -2.0, PI];
        let u = rebuild(&q, &phases);
        let (omega, theta) = unitary_eig(&u).unwrap();
        assert!(frob(&(rebuild(&omega, &theta) - &u)) < 1e-9);
    }

    #[test]
    fn unitary_eig_rejects_non_unitary() {
        let a = eye(2, 2) * c(2.0, 0.0);
        assert!(matches!(unitary_eig(&a), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn qr_examples() {
        let i = eye(4, 2);
        assert!(frob(&(qr_unitary(&i).unwrap() - &i)) < 1e-14);
        assert!(frob(&(qr_unitary(&(&i * c(2.0, 0.0))).unwrap() - &i)) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = qr_unitary(&gaussian(&mut rng, 4, 2)).unwrap();
        assert!(orthonormality_residual(&q) < 1e-10);
        assert!(matches!(
            qr_unitary(&CMatrix::zeros(4, 2)),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn qr_r_diagonal_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = gaussian(&mut rng, 5, 3);
        let q = qr_unitary(&a).unwrap();
        let r = q.adjoint() * &a;
        for j in 0..3 {
            assert!(r[(j, j)].re > 0.0 && r[(j, j)].im.abs() < 1e-12);
            for i in j + 1..3 {
                assert!(r[(i, j)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn polar_examples() {
        let i = eye(5, 3);
        let w = polar_factor(&(&i * c(0.3, 0.0))).unwrap();
        assert!(frob(&(w - &i)) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = qr_unitary(&gaussian(&mut rng, 5, 3)).unwrap();
        assert!(frob(&(polar_factor(&y).unwrap() - &y)) < 1e-10);
        assert!(matches!(
            polar_factor(&CMatrix::zeros(5, 3)),
            Err(Error::NoUniqueProjection)
        ));
    }

    #[test]
    fn polar_is_closest_semi_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let a = gaussian(&mut rng, 6, 3);
            let w = polar_factor(&a).unwrap();
            let best = frob(&(&a - &w));
            for _ in 0..100 {
                let y = qr_unitary(&gaussian(&mut rng, 6, 3)).unwrap();
                assert!(best <= frob(&(&a - y)) + 1e-9);
            }
        }
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
