//! Shared helpers for unit and integration tests.

use nalgebra::DMatrix;

/// Dense matrix exponential e^{M t} via scaling-and-squaring with a Taylor
/// series; accurate to near machine precision for the small matrices used in
/// tests.
pub fn expm(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let a = m * t;
    let n = a.nrows();
    let norm: f64 = a.iter().map(|v| v.abs()).sum();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = &a / 2f64.powi(s);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_matches_scalar_exponential() {
        let m = DMatrix::from_row_slice(1, 1, &[-2.0]);
        let e = expm(&m, 3.0);
        assert!((e[(0, 0)] - (-6.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn expm_matches_rotation_generator() {
        // exp(t J) with J = [[0,-1],[1,0]] is a rotation by t.
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = expm(&j, 1.2);
        assert!((e[(0, 0)] - 1.2f64.cos()).abs() < 1e-13);
        assert!((e[(1, 0)] - 1.2f64.sin()).abs() < 1e-13);
    }
}
