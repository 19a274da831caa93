//! Decomposition of real matrices over the tensor Pauli basis.
//!
//! A 2^q × 2^q matrix expands as A = Σ_l c_l·P_l where P_l ranges over the
//! 4^q tensor words of {I, X, Y, Z}. Each word has one nonzero per row, so
//! both the projection c_l = tr(P_l·A)/2^q and the reconstruction run in
//! O(4^q·2^q) without materializing any word.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::Coo;
use crate::table::{Cell, Table};

/// Operator digits: 0 = I, 1 = X, 2 = Y, 3 = Z; qubit 0 is the leftmost
/// tensor factor (most significant index bit).
fn word_digits(l: usize, q: u32) -> Vec<u8> {
    (0..q)
        .map(|j| ((l >> (2 * (q - 1 - j))) & 3) as u8)
        .collect()
}

/// Column index and phase of row `r` in the Pauli word: every word is a
/// signed (possibly imaginary) permutation.
fn row_action(digits: &[u8], q: u32, r: usize) -> (usize, Complex64) {
    let mut col = r;
    let mut phase = Complex64::new(1.0, 0.0);
    for (j, &d) in digits.iter().enumerate() {
        let bit_pos = q as usize - 1 - j;
        let bit = (r >> bit_pos) & 1;
        match d {
            0 => {}
            1 => col ^= 1 << bit_pos,
            2 => {
                col ^= 1 << bit_pos;
                phase *= if bit == 0 {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
            }
            3 => {
                if bit == 1 {
                    phase = -phase;
                }
            }
            _ => unreachable!(),
        }
    }
    (col, phase)
}

/// Coefficients of a matrix over the tensor Pauli basis, indexed by the
/// base-4 word code.
#[derive(Debug, Clone)]
pub struct PauliDecomposition {
    pub q: u32,
    pub coeffs: Vec<Complex64>,
}

/// Project a real matrix onto every tensor Pauli word.
pub fn pauli_decompose(a: &DMatrix<f64>) -> Result<PauliDecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!(
            "Pauli basis needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if !n.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "dimension {n} is not a power of two"
        )));
    }
    let q = n.trailing_zeros();
    let words = 1usize << (2 * q);
    let mut coeffs = Vec::with_capacity(words);
    let scale = 1.0 / n as f64;
    for l in 0..words {
        let digits = word_digits(l, q);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            let (col, phase) = row_action(&digits, q, r);
            // tr(P·A) accumulates P[r, col]·A[col, r].
            acc += phase * a[(col, r)];
        }
        coeffs.push(acc * scale);
    }
    Ok(PauliDecomposition { q, coeffs })
}

impl PauliDecomposition {
    /// Σ_l c_l·P_l as a dense complex matrix.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = 1usize << self.q;
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (l, &c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let digits = word_digits(l, self.q);
            for r in 0..n {
                let (col, phase) = row_action(&digits, self.q, r);
                out[(r, col)] += c * phase;
            }
        }
        out
    }

    /// Max entrywise deviation of the reconstruction from a real matrix.
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        let back = self.reconstruct();
        let n = a.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                worst = worst.max((back[(r, c)] - Complex64::new(a[(r, c)], 0.0)).norm());
            }
        }
        worst
    }

    /// Number of coefficients with magnitude above the threshold.
    pub fn significant_count(&self, threshold: f64) -> usize {
        self.coeffs.iter().filter(|c| c.norm() > threshold).count()
    }

    /// Word label such as "IXZY" for diagnostics.
    pub fn word_label(&self, l: usize) -> String {
        word_digits(l, self.q)
            .iter()
            .map(|d| ['I', 'X', 'Y', 'Z'][*d as usize])
            .collect()
    }

    /// Magnitude-sorted decay report: (rank, abs_c), rank starting at 1.
    pub fn decay_table(&self, max_rows: usize) -> Table {
        let mut mags: Vec<f64> = self.coeffs.iter().map(|c| c.norm()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
        let mut t = Table::new(vec!["rank", "abs_c"]);
        for (i, m) in mags.into_iter().take(max_rows).enumerate() {
            t.push_row(vec![Cell::from(i + 1), Cell::Float(m)]);
        }
        t
    }
}

/// Dense power-of-two embedding of a square sparse matrix, identity on the
/// padding coordinates; returns the matrix and its qubit count.
pub fn densify_padded(a: &Coo) -> Result<(DMatrix<f64>, u32)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "padding needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let d = a.nrows().max(1).next_power_of_two();
    let mut dense = DMatrix::<f64>::zeros(d, d);
    for &(r, c, v) in a.entries() {
        dense[(r, c)] = v;
    }
    for i in a.nrows()..d {
        dense[(i, i)] = 1.0;
    }
    Ok((dense, d.trailing_zeros()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_single_unit_coefficient() {
        let a = DMatrix::<f64>::identity(4, 4);
        let d = pauli_decompose(&a).unwrap();
        assert_eq!(d.coeffs.len(), 16);
        assert!((d.coeffs[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for c in &d.coeffs[1..] {
            assert!(c.norm() < 1e-15);
        }
        assert_eq!(d.word_label(0), "II");
    }

    #[test]
    fn single_word_recovers_unit_coefficient() {
        // X⊗Z: word code 1·4 + 3 = 7.
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        let d = pauli_decompose(&a).unwrap();
        assert_eq!(d.word_label(7), "XZ");
        assert!((d.coeffs[7] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(d.significant_count(1e-12), 1);
        assert!(d.reconstruction_error(&a) < 1e-12);
    }

    #[test]
    fn antisymmetric_block_lands_on_y() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let d = pauli_decompose(&a).unwrap();
        assert!((d.coeffs[2] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(d.reconstruction_error(&a) < 1e-14);
    }

    #[test]
    fn random_matrix_reconstructs() {
        let a = crate::block_encoding::random_matrix(8, 1.0, 42).to_dense();
        let d = pauli_decompose(&a).unwrap();
        assert!(d.reconstruction_error(&a) < 1e-10);
        assert!(d.significant_count(1e-12) <= 64);
    }

    #[test]
    fn non_power_of_two_rejected() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert!(pauli_decompose(&a).is_err());
    }

    #[test]
    fn lifted_step_map_reconstructs_and_decays() {
        let model = crate::lbm::LatticeModel::d1q3();
        let sys = crate::lbm::clb2::build_clb2(&model, 2, 1.0, 10_000).unwrap();
        let (dense, q) = densify_padded(&sys.step_map.matrix).unwrap();
        assert_eq!(q, 6);
        let d = pauli_decompose(&dense).unwrap();
        assert!(d.reconstruction_error(&dense) < 1e-10);
        let t = d.decay_table(100);
        assert_eq!(t.columns, vec!["rank", "abs_c"]);
        let col = t.float_column("abs_c").unwrap();
        for w in col.windows(2) {
            assert!(w[1].unwrap() <= w[0].unwrap());
        }
        assert!(d.significant_count(1e-12) > 0);
    }
}
