//! Complete elliptic integrals and Jacobi functions by the arithmetic-geometric mean.
//!
//! Parameter convention is `m = k²`, as in Abramowitz & Stegun.

use std::f64::consts::FRAC_PI_2;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 64;

/// Complete elliptic integral of the first kind `K(m)` for `0 <= m <= 1`.
///
/// Returns `+inf` at `m = 1`.
pub fn ellipk(m: f64) -> f64 {
    if m >= 1.0 {
        return f64::INFINITY;
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    FRAC_PI_2 / a
}

/// Complete elliptic integral of the second kind `E(m)` for `0 <= m <= 1`.
pub fn ellipe(m: f64) -> f64 {
    if m >= 1.0 {
        return 1.0;
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    // sum of 2^(n-1) c_n^2, starting with n = 0
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    FRAC_PI_2 / a * (1.0 - sum)
}

/// `(sn, cn, dn)` of real argument `u` at parameter `m` in `[0, 1]`.
///
/// Descending Landen / AGM scheme after reduction of `u` modulo `4K(m)`.
/// `m = 0` and `m = 1` use the trigonometric and hyperbolic closed forms.
pub fn jacobi_sncndn(u: f64, m: f64) -> (f64, f64, f64) {
    if m <= 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if m >= 1.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }

    let quarter = ellipk(m);
    let period = 4.0 * quarter;
    let u = u - period * (u / period).round();

    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn > 0 for m < 1; cn / cos(φ1 - φ0) loses accuracy near u = K
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Jacobi `sn(u | m)` for real `u`.
pub fn jacobi_sn(u: f64, m: f64) -> f64 {
    jacobi_sncndn(u, m).0
}
