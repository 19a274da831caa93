//! Minimal coordinate-format sparse matrices.
//!
//! The Carleman generators built here are block-bidiagonal and extremely
//! sparse, so a sorted triplet list with a dense mat-vec is all the structure
//! the solvers need.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Sparse matrix in coordinate (triplet) form, sorted row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coo {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Coo {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    /// Build from triplets; duplicate coordinates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let mut m = Coo::new(nrows, ncols);
        for (r, c, v) in triplets {
            m.push(r, c, v)?;
        }
        m.compress();
        Ok(m)
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.nrows || col >= self.ncols {
            return Err(Error::Dimension(format!(
                "entry ({row}, {col}) outside {}x{} matrix",
                self.nrows, self.ncols
            )));
        }
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
        Ok(())
    }

    /// Sort row-major and merge duplicate coordinates.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        self.entries = merged;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// y = A x.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.fill(0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Kronecker product, row-major convention: (A otimes B)[(i*pB + k), (j*qB + l)] = A[i,j] B[k,l].
    pub fn kron(&self, other: &Coo) -> Coo {
        let mut out = Coo::new(self.nrows * other.nrows, self.ncols * other.ncols);
        out.entries.reserve(self.nnz() * other.nnz());
        for &(ra, ca, va) in &self.entries {
            for &(rb, cb, vb) in &other.entries {
                out.entries
                    .push((ra * other.nrows + rb, ca * other.ncols + cb, va * vb));
            }
        }
        out.compress();
        out
    }

    pub fn identity(n: usize) -> Coo {
        let entries = (0..n).map(|i| (i, i, 1.0)).collect();
        Coo {
            nrows: n,
            ncols: n,
            entries,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.2.abs())
            .fold(0.0, f64::max)
    }

    /// Maximum number of stored entries in any single row.
    pub fn max_row_occupancy(&self) -> usize {
        let mut counts = vec![0usize; self.nrows];
        for &(r, _, _) in &self.entries {
            counts[r] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    /// True when the matrix is a permutation: exactly one unit entry per row
    /// and per column.
    pub fn is_permutation(&self, tol: f64) -> bool {
        if !self.is_square() || self.nnz() != self.nrows {
            return false;
        }
        let mut row_seen = vec![false; self.nrows];
        let mut col_seen = vec![false; self.ncols];
        for &(r, c, v) in &self.entries {
            if (v - 1.0).abs() > tol || row_seen[r] || col_seen[c] {
                return false;
            }
            row_seen[r] = true;
            col_seen[c] = true;
        }
        true
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Serialize a square matrix in the plain-text triple format:
    /// a `dim nnz` header line, then one zero-indexed `row col value` per line.
    pub fn to_triple_text(&self) -> Result<String> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "triple format is square-only, got {}x{}",
                self.nrows, self.ncols
            )));
        }
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.nrows, self.nnz());
        for &(r, c, v) in &self.entries {
            let _ = writeln!(s, "{} {} {:.17e}", r, c, v);
        }
        Ok(s)
    }

    pub fn from_triple_text(text: &str) -> Result<Coo> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty matrix file".into()))?;
        let mut parts = header.split_whitespace();
        let dim: usize = parse_field(parts.next(), "dim")?;
        let nnz: usize = parse_field(parts.next(), "nnz")?;
        let mut m = Coo::new(dim, dim);
        for line in lines {
            let mut f = line.split_whitespace();
            let r: usize = parse_field(f.next(), "row")?;
            let c: usize = parse_field(f.next(), "col")?;
            let v: f64 = parse_field(f.next(), "value")?;
            m.push(r, c, v)?;
        }
        if m.nnz() != nnz {
            return Err(Error::Config(format!(
                "matrix file declares {nnz} entries but carries {}",
                m.nnz()
            )));
        }
        m.compress();
        Ok(m)
    }

    pub fn write_triple_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_triple_text()?)?;
        Ok(())
    }

    pub fn read_triple_file(path: &Path) -> Result<Coo> {
        let text = std::fs::read_to_string(path)?;
        Coo::from_triple_text(&text)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Config(format!("missing {name} field")))?
        .parse()
        .map_err(|_| Error::Config(format!("malformed {name} field")))
}
