//! Bivariate monomials in graded lexicographic order.
//!
//! Degree `d` block is `x^d, x^(d-1) y, ..., y^d`, so for degree 2 the full
//! order is `1, x, y, x^2, xy, y^2`.

/// Number of monomials of total degree at most `degree`.
pub const fn dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponent pairs in graded lexicographic order.
pub fn exponents(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(dim(degree));
    for d in 0..=degree as u32 {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

fn powers(x: f64, n: usize, out: &mut [f64]) {
    out[0] = 1.0;
    for i in 1..=n {
        out[i] = out[i - 1] * x;
    }
}

/// Values of all monomials up to `degree` at `(x, y)`.
pub fn values(degree: usize, x: f64, y: f64, out: &mut [f64]) {
    let mut px = [0.0; 16];
    let mut py = [0.0; 16];
    powers(x, degree, &mut px);
    powers(y, degree, &mut py);
    let mut n = 0;
    for d in 0..=degree {
        for j in 0..=d {
            out[n] = px[d - j] * py[j];
            n += 1;
        }
    }
}

/// Values and first partial derivatives of all monomials up to `degree`.
pub fn values_and_gradients(degree: usize, x: f64, y: f64, val: &mut [f64], dx: &mut [f64], dy: &mut [f64]) {
    let mut px = [0.0; 16];
    let mut py = [0.0; 16];
    powers(x, degree, &mut px);
    powers(y, degree, &mut py);
    let mut n = 0;
    for d in 0..=degree {
        for j in 0..=d {
            let i = d - j;
            val[n] = px[i] * py[j];
            dx[n] = if i > 0 { i as f64 * px[i - 1] * py[j] } else { 0.0 };
            dy[n] = if j > 0 { j as f64 * px[i] * py[j - 1] } else { 0.0 };
            n += 1;
        }
    }
}

/// Second derivatives `(dxx, dxy, dyy)` of all monomials up to `degree`.
pub fn hessians(degree: usize, x: f64, y: f64, dxx: &mut [f64], dxy: &mut [f64], dyy: &mut [f64]) {
    let mut px = [0.0; 16];
    let mut py = [0.0; 16];
    powers(x, degree, &mut px);
    powers(y, degree, &mut py);
    let mut n = 0;
    for d in 0..=degree {
        for j in 0..=d {
            let i = d - j;
            let (fi, fj) = (i as f64, j as f64);
            dxx[n] = if i > 1 {
                fi * (fi - 1.0) * px[i - 2] * py[j]
            } else {
                0.0
            };
            dyy[n] = if j > 1 {
                fj * (fj - 1.0) * px[i] * py[j - 2]
            } else {
                0.0
            };
            dxy[n] = if i > 0 && j > 0 {
                fi * fj * px[i - 1] * py[j - 1]
            } else {
                0.0
            };
            n += 1;
        }
    }
}
