//! Unitary block encodings of non-unitary marching matrices.
//!
//! A matrix A with ‖A/α‖ ≤ 1 embeds as the top-left block of a unitary U on
//! a register enlarged by ancilla qubits. Applying U and measuring every
//! ancilla in |0⟩ applies A/α to the system state; the measurement succeeds
//! with probability ‖(A/α)ψ‖², which compounds multiplicatively over a
//! marching run. The dilation here is the singular-value completion
//!
//! ```text
//!   U = [ Ã                W·√(I−Σ²)·Wᵀ ]      Ã = A/α = W·Σ·Vᵀ
//!       [ V·√(I−Σ²)·Vᵀ    −Ãᵀ           ]
//! ```
//!
//! embedded with identity action on unused ancilla sectors.

pub mod pauli;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::carleman::CarlemanMatrix;
use crate::error::{Error, Result};
use crate::sparse::Coo;
use crate::table::{Cell, Table};

/// Success probability below which post-selection is treated as having
/// annihilated the state.
pub const ANNIHILATION_FLOOR: f64 = 1e-300;

/// Explicit-Euler step matrix I + dt·C for a lifted generator.
pub fn euler_step_matrix(cm: &CarlemanMatrix, dt: f64) -> Result<Coo> {
    if dt < 0.0 {
        return Err(Error::Domain(format!("dt must be nonnegative, got {dt}")));
    }
    let n = cm.total_dim;
    let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    for &(r, c, v) in cm.matrix.entries() {
        triplets.push((r, c, dt * v));
    }
    Coo::from_triplets(n, n, triplets)
}

/// Largest singular value, computed densely.
pub fn spectral_norm(a: &Coo) -> f64 {
    let svd = a.to_dense().svd(false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

/// Sparse matrix with a declared sparsity bound, as handed to the
/// location/value oracles of a block encoding.
#[derive(Debug, Clone)]
pub struct SparseMatrixDesc {
    pub matrix: Coo,
    /// Declared max nonzeros per row; at least the actual occupancy.
    pub s: usize,
}

impl SparseMatrixDesc {
    pub fn new(matrix: Coo, s: usize) -> Result<Self> {
        let actual = matrix.max_row_occupancy();
        if s < actual.max(1) {
            return Err(Error::Dimension(format!(
                "declared sparsity {s} below actual max row occupancy {actual}"
            )));
        }
        Ok(SparseMatrixDesc { matrix, s })
    }

    /// Wrap with the tightest sparsity bound.
    pub fn from_matrix(matrix: Coo) -> Self {
        let s = matrix.max_row_occupancy().max(1);
        SparseMatrixDesc { matrix, s }
    }
}

/// Scale factor and ancilla count implied by sparsity: α = s·max|entry|,
/// q_a = ceil(log2 s) + 1.
pub fn sparse_scale(desc: &SparseMatrixDesc) -> (f64, u32) {
    let alpha = desc.s as f64 * desc.matrix.max_abs();
    let q_a = (desc.s as f64).log2().ceil() as u32 + 1;
    (alpha, q_a)
}

/// Unitary dilation of a scaled matrix.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub q_s: u32,
    pub q_a: u32,
    pub alpha: f64,
    /// Dense unitary of dimension 2^(q_s+q_a), ancilla-major indexing.
    pub u: DMatrix<f64>,
    /// Dimension of the matrix before power-of-two padding.
    pub dim_orig: usize,
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Dilate A/alpha into a unitary with `q_a` ancilla qubits. A is padded to
/// the next power of two with identity action on padding coordinates after
/// scaling, so padding contributes exact singular values of one.
pub fn dilate(a: &Coo, alpha: f64, q_a: u32) -> Result<BlockEncoding> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "block encoding needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Norm(format!(
            "scale factor must be positive and finite, got {alpha}"
        )));
    }
    if q_a < 1 {
        return Err(Error::Dimension("at least one ancilla qubit".into()));
    }
    let dim_orig = a.nrows();
    let d = next_pow2(dim_orig.max(1));
    let q_s = d.trailing_zeros();

    let mut scaled = DMatrix::<f64>::zeros(d, d);
    for &(r, c, v) in a.entries() {
        scaled[(r, c)] = v / alpha;
    }
    for i in dim_orig..d {
        scaled[(i, i)] = 1.0;
    }

    let svd = scaled.clone().svd(true, true);
    let w = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max > 1.0 + 1e-12 {
        return Err(Error::Norm(format!(
            "spectral norm of A/alpha is {sigma_max}, exceeding 1"
        )));
    }
    // Complement singular values, clamped against rounding above 1.
    let comp: Vec<f64> = sigma.iter().map(|&s| (1.0 - s * s).max(0.0).sqrt()).collect();
    let comp_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(comp));
    let b = w * &comp_diag * w.transpose();
    let c = vt.transpose() * &comp_diag * vt;

    let full = d << q_a;
    let mut u = DMatrix::<f64>::zeros(full, full);
    for r in 0..d {
        for cc in 0..d {
            u[(r, cc)] = scaled[(r, cc)];
            u[(r, d + cc)] = b[(r, cc)];
            u[(d + r, cc)] = c[(r, cc)];
            u[(d + r, d + cc)] = -scaled[(cc, r)];
        }
    }
    for i in 2 * d..full {
        u[(i, i)] = 1.0;
    }

    Ok(BlockEncoding {
        q_s,
        q_a,
        alpha,
        u,
        dim_orig,
    })
}

impl BlockEncoding {
    pub fn system_dim(&self) -> usize {
        1usize << self.q_s
    }

    /// Max entrywise deviation of UᵀU from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.u.transpose() * &self.u;
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - want).abs());
            }
        }
        worst
    }

    /// Max entrywise deviation of the top-left block from A/alpha.
    pub fn block_defect(&self, a: &Coo) -> f64 {
        let d = self.system_dim();
        let mut dense = DMatrix::<f64>::zeros(d, d);
        for &(r, c, v) in a.entries() {
            dense[(r, c)] = v / self.alpha;
        }
        for i in a.nrows()..d {
            dense[(i, i)] = 1.0;
        }
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.u[(r, c)] - dense[(r, c)]).abs());
            }
        }
        worst
    }
}

/// Apply the encoding and post-select every ancilla on |0⟩. Returns the
/// renormalized output state and the success probability ‖(A/α)ψ‖².
pub fn apply_postselect(be: &BlockEncoding, psi: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = be.system_dim();
    if psi.len() != d {
        return Err(Error::Dimension(format!(
            "state has length {}, encoding expects {d}",
            psi.len()
        )));
    }
    let norm2: f64 = psi.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "input state must be normalized, ‖ψ‖² = {norm2}"
        )));
    }
    // Ancilla-major layout: |0⟩ sector occupies the first d coordinates.
    let mut out = vec![0.0; d];
    for (r, slot) in out.iter_mut().enumerate() {
        *slot = psi
            .iter()
            .enumerate()
            .map(|(c, &x)| be.u[(r, c)] * x)
            .sum();
    }
    let p: f64 = out.iter().map(|v| v * v).sum();
    if p < ANNIHILATION_FLOOR {
        return Err(Error::Degenerate(format!(
            "post-selection success probability {p:e} below representable floor"
        )));
    }
    let inv = p.sqrt().recip();
    for v in &mut out {
        *v *= inv;
    }
    Ok((out, p))
}

/// Per-step and cumulative success record of a post-selected march.
#[derive(Debug, Clone)]
pub struct MultiStepRun {
    /// Normalized system state after each step; entry 0 is the input.
    pub states: Vec<Vec<f64>>,
    pub p_steps: Vec<f64>,
    pub log10_cumulative: f64,
}

impl MultiStepRun {
    /// (step, p_step, log10_cumulative) rows; step 0 carries the initial
    /// state with probability 1.
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["step", "p_step", "log10_cumulative"]);
        t.push_row(vec![Cell::from(0usize), Cell::Float(1.0), Cell::Float(0.0)]);
        let mut acc = 0.0;
        for (i, &p) in self.p_steps.iter().enumerate() {
            acc += p.log10();
            t.push_row(vec![Cell::from(i + 1), Cell::Float(p), Cell::Float(acc)]);
        }
        t
    }
}

/// Cumulative success probability in log10 space.
pub fn cumulative_log10(p_steps: &[f64]) -> f64 {
    p_steps.iter().map(|p| p.log10()).sum()
}

/// March `steps` post-selected applications of the encoding.
pub fn multi_step_success(
    be: &BlockEncoding,
    psi0: &[f64],
    steps: usize,
) -> Result<MultiStepRun> {
    if steps == 0 {
        return Err(Error::Domain("step count must be >= 1".into()));
    }
    let mut states = vec![psi0.to_vec()];
    let mut p_steps = Vec::with_capacity(steps);
    let mut psi = psi0.to_vec();
    for _ in 0..steps {
        let (next, p) = apply_postselect(be, &psi)?;
        p_steps.push(p);
        states.push(next.clone());
        psi = next;
    }
    Ok(MultiStepRun {
        states,
        log10_cumulative: cumulative_log10(&p_steps),
        p_steps,
    })
}

/// Ancilla-implied ceiling 2^(−2·q_a) on the single-step success rate.
pub fn ancilla_bound(q_a: u32) -> f64 {
    0.25f64.powi(q_a as i32)
}

/// Seeded random square matrix with entries uniform in [-scale, scale],
/// used by randomized reconstruction checks.
pub fn random_matrix(dim: usize, scale: f64, seed: u64) -> Coo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            triplets.push((r, c, rng.random_range(-scale..scale)));
        }
    }
    Coo::from_triplets(dim, dim, triplets).expect("random triplets in bounds")
}

/// Normalize a vector, padding with zeros to `dim`.
pub fn normalized_padded(x: &[f64], dim: usize) -> Result<Vec<f64>> {
    if x.len() > dim {
        return Err(Error::Dimension(format!(
            "state of length {} cannot fit dimension {dim}",
            x.len()
        )));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate("cannot normalize the zero vector".into()));
    }
    let mut out = vec![0.0; dim];
    for (o, v) in out.iter_mut().zip(x) {
        *o = v / norm;
    }
    Ok(out)
}
