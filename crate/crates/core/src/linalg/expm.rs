//! Matrix exponential by scaling and squaring of diagonal Padé approximants
//! (Higham 2005), plus a truncated-Taylor action for large matrices.

use nalgebra::DMatrix;

use crate::{CMat, C64};

/// Above this dimension `expm_action` switches to the Taylor action path.
pub const DENSE_EXPM_MAX_DIM: usize = 64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scale(a: &CMat, s: f64) -> CMat {
    a.map(|z| z * s)
}

/// `e^A` for a square complex matrix.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm of non-square matrix");
    if n == 0 {
        return a.clone();
    }
    let ident = CMat::identity(n, n);
    let nrm = norm1(a);
    if nrm == 0.0 {
        return ident;
    }
    let a2 = a * a;
    for &(m, theta) in THETA.iter() {
        if nrm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, &a2, coeffs);
        }
    }
    let s = if nrm > THETA_13 {
        (nrm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let factor = 0.5f64.powi(s);
    let a_s = scale(a, factor);
    let a2_s = scale(&a2, factor * factor);
    let mut r = pade13(&a_s, &a2_s);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMat, a2: &CMat, b: &[f64]) -> CMat {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    // even / odd powers: A^0, A^2, A^4, ...
    let mut powers = vec![ident.clone(), a2.clone()];
    let m = b.len() - 1;
    while powers.len() * 2 <= m + 1 {
        let next = powers.last().unwrap() * a2;
        powers.push(next);
    }
    let mut u_inner = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        let odd = 2 * k + 1;
        let even = 2 * k;
        if odd <= m {
            u_inner += scale(p, b[odd]);
        }
        if even <= m {
            v += scale(p, b[even]);
        }
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &CMat, a2: &CMat) -> CMat {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let a4 = a2 * a2;
    let a6 = &a4 * a2;
    let b = &B13;
    let u_hi = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(a2, b[9]);
    let u_inner = &a6 * u_hi + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(a2, b[3])
        + scale(&ident, b[1]);
    let u = a * u_inner;
    let v_hi = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(a2, b[8]);
    let v = &a6 * v_hi + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(a2, b[2])
        + scale(&ident, b[0]);
    solve_pade(&u, &v)
}

/// Solves `(V - U) R = V + U`.
fn solve_pade(u: &CMat, v: &CMat) -> CMat {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator singular; norm bound violated")
}

/// `e^{tA} X` for a block of vectors. Dense Padé path up to
/// [`DENSE_EXPM_MAX_DIM`], truncated Taylor action above.
pub fn expm_action_block(a: &CMat, t: f64, x: &CMat) -> CMat {
    if t == 0.0 {
        return x.clone();
    }
    if a.nrows() <= DENSE_EXPM_MAX_DIM {
        expm(&scale(a, t)) * x
    } else {
        taylor_action(a, t, x)
    }
}

/// Truncated Taylor action with `s` substeps of degree at most 55.
pub fn taylor_action(a: &CMat, t: f64, x: &CMat) -> CMat {
    let nrm = norm1(a) * t.abs();
    let steps = (nrm / 2.0).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut y = x.clone();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        for k in 1..=55 {
            term = (a * &term).map(|z| z * (h / k as f64));
            acc += &term;
            let tn = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let an = acc.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if tn <= f64::EPSILON * 0.25 * an.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        y = acc;
    }
    y
}

/// Convenience: real matrix to complex.
pub fn complexify(a: &DMatrix<f64>) -> CMat {
    a.map(|v| C64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let a = CMat::zeros(3, 3);
        assert_eq!(expm(&a), CMat::identity(3, 3));
    }

    #[test]
    fn scalar_exponential_across_degrees() {
        for v in [1e-3, 0.1, 0.5, 1.5, 4.0, -7.0, 40.0, -300.0] {
            let a = CMat::from_element(1, 1, c(v));
            let e = expm(&a)[(0, 0)];
            let want = v.exp();
            assert!((e.re - want).abs() <= 1e-13 * want, "v={v}: {e} vs {want}");
        }
    }

    #[test]
    fn rotation_generator() {
        // e^{θJ} with J = [[0,1],[-1,0]] is a rotation.
        let th = 2.3;
        let a = CMat::from_row_slice(2, 2, &[c(0.0), c(th), c(-th), c(0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)].re - th.cos()).abs() < 1e-14);
        assert!((e[(0, 1)].re - th.sin()).abs() < 1e-14);
        assert!((e[(1, 0)].re + th.sin()).abs() < 1e-14);
    }

    #[test]
    fn jordan_block_closed_form() {
        // [[l, 1],[0, l]] -> e^l [[1, 1],[0, 1]]
        let l = -0.7;
        let a = CMat::from_row_slice(2, 2, &[c(l), c(1.0), c(0.0), c(l)]);
        let e = expm(&a);
        assert!((e[(0, 1)].re - l.exp()).abs() < 1e-15);
        assert!((e[(0, 0)].re - l.exp()).abs() < 1e-15);
        assert!(e[(1, 0)].norm() < 1e-16);
    }

    #[test]
    fn taylor_action_matches_dense() {
        let a = CMat::from_fn(5, 5, |i, j| {
            c(if i == j { -1.0 - i as f64 } else { 0.3 / (1.0 + (i + 2 * j) as f64) })
        });
        let x = CMat::from_fn(5, 2, |i, j| c(1.0 + i as f64 - j as f64));
        for t in [0.3, 2.0, 9.0] {
            let dense = expm(&scale(&a, t)) * &x;
            let tay = taylor_action(&a, t, &x);
            let err = (&dense - &tay).norm() / dense.norm();
            assert!(err < 1e-13, "t={t}: {err}");
        }
    }
}
