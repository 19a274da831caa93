//! Second-order Carleman embedding of the lattice-Boltzmann step.
//!
//! The collide-and-stream map is exactly quadratic in the populations, so on
//! the variables (f, f⊗f) it closes up to third-order terms. Truncating
//! those yields the linear one-step map
//!
//! ```text
//!   M = [ P·A   P·B ]
//!       [  0   P·A ⊗ P·A ]
//! ```
//!
//! where A and B are the sitewise linear and quadratic collision
//! coefficients and P the streaming permutation. The first block of M
//! applied to a consistently lifted state reproduces one classical step
//! exactly; the truncation error enters through the approximate f⊗f
//! dynamics and scales with the square of the Mach number.

use crate::carleman::CarlemanMatrix;
use crate::error::{Error, Result};
use crate::lbm::{check_omega, classical_lbm_step, FlowState, LatticeModel};
use crate::ode::OVERFLOW_THRESHOLD;
use crate::sparse::Coo;
use crate::table::{Cell, Table};

/// Default cap on the lifted dimension N1 + N1².
pub const DEFAULT_CLB2_CAP: usize = 4_000_000;

/// Lattice-Boltzmann step in block-Carleman form over (f, f⊗f).
#[derive(Debug, Clone)]
pub struct Clb2System {
    pub model: LatticeModel,
    pub g: usize,
    pub omega: f64,
    /// First-block dimension Q·G.
    pub n1: usize,
    /// One-step map over the lifted state, block upper-triangular.
    pub step_map: CarlemanMatrix,
}

/// Streaming permutation P over the velocity-major layout:
/// P[(i,x), (i, (x−c_i) mod G)] = 1.
pub fn stream_permutation(model: &LatticeModel, g: usize) -> Coo {
    let q = model.q();
    let n1 = q * g;
    let mut triplets = Vec::with_capacity(n1);
    for i in 0..q {
        let shift = model.c[i] as i64;
        for x in 0..g {
            let src = (x as i64 - shift).rem_euclid(g as i64) as usize;
            triplets.push((i * g + x, i * g + src, 1.0));
        }
    }
    Coo::from_triplets(n1, n1, triplets).expect("permutation triplets in bounds")
}

/// Sitewise linear collision coefficients lifted to the full lattice and
/// composed with streaming: row (i,x) holds A_loc[i][m] at column (m, x−c_i).
fn streamed_linear(model: &LatticeModel, g: usize, omega: f64) -> Coo {
    let q = model.q();
    let n1 = q * g;
    let cs2 = model.cs2;
    let mut triplets = Vec::new();
    for i in 0..q {
        let shift = model.c[i] as i64;
        for x in 0..g {
            let src = (x as i64 - shift).rem_euclid(g as i64) as usize;
            for m in 0..q {
                let delta = if i == m { 1.0 } else { 0.0 };
                let v = (1.0 - omega) * delta
                    + omega * model.w[i] * (1.0 + model.c[i] * model.c[m] / cs2);
                if v != 0.0 {
                    triplets.push((i * g + x, m * g + src, v));
                }
            }
        }
    }
    Coo::from_triplets(n1, n1, triplets).expect("collision triplets in bounds")
}

/// Sitewise quadratic collision coefficients on f⊗f, composed with
/// streaming: row (i,x) holds B_loc[i][m1,m2] at column ((m1,x̃),(m2,x̃)).
fn streamed_quadratic(model: &LatticeModel, g: usize, omega: f64) -> Coo {
    let q = model.q();
    let n1 = q * g;
    let cs2 = model.cs2;
    let mut triplets = Vec::new();
    for i in 0..q {
        let shift = model.c[i] as i64;
        let prefactor = omega * model.w[i] * (model.c[i] * model.c[i] - cs2) / (2.0 * cs2 * cs2);
        for x in 0..g {
            let src = (x as i64 - shift).rem_euclid(g as i64) as usize;
            for m1 in 0..q {
                for m2 in 0..q {
                    let v = prefactor * model.c[m1] * model.c[m2];
                    if v != 0.0 {
                        triplets.push((i * g + x, (m1 * g + src) * n1 + (m2 * g + src), v));
                    }
                }
            }
        }
    }
    Coo::from_triplets(n1, n1 * n1, triplets).expect("quadratic triplets in bounds")
}

/// Assemble the lifted one-step map for a G-site lattice.
pub fn build_clb2(model: &LatticeModel, g: usize, omega: f64, cap: usize) -> Result<Clb2System> {
    if g < 2 {
        return Err(Error::Dimension(format!("lattice needs G >= 2, got {g}")));
    }
    check_omega(omega)?;
    let n1 = model.q() * g;
    let total = n1 + n1 * n1;
    if total > cap {
        return Err(Error::ResourceCap(format!(
            "lifted dimension {total} exceeds cap {cap} (G = {g})"
        )));
    }

    let pa = streamed_linear(model, g, omega);
    let pb = streamed_quadratic(model, g, omega);
    let papa = pa.kron(&pa);

    let mut triplets = Vec::with_capacity(pa.nnz() + pb.nnz() + papa.nnz());
    triplets.extend_from_slice(pa.entries());
    for &(r, c, v) in pb.entries() {
        triplets.push((r, n1 + c, v));
    }
    for &(r, c, v) in papa.entries() {
        triplets.push((n1 + r, n1 + c, v));
    }
    let m = Coo::from_triplets(total, total, triplets)?;
    Ok(Clb2System {
        model: model.clone(),
        g,
        omega,
        n1,
        step_map: CarlemanMatrix::from_parts(n1, 2, m)?,
    })
}

/// Error and conservation series of a CLB² run against the classical solver.
#[derive(Debug, Clone)]
pub struct Clb2Run {
    /// Per-step L∞ deviation of the lifted f-block from the classical
    /// populations; entry 0 is the initial state (always 0).
    pub linf_error: Vec<f64>,
    /// Relative drift of the lifted f-block's total mass per step.
    pub mass_drift: Vec<f64>,
    /// Absolute drift of the lifted f-block's total momentum per step.
    pub momentum_drift: Vec<f64>,
    pub max_error: f64,
    pub final_classical: FlowState,
    pub final_lifted_f: Vec<f64>,
}

impl Clb2Run {
    /// (step, linf_error, mass_drift, momentum_drift) rows.
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["step", "linf_error", "mass_drift", "momentum_drift"]);
        for i in 0..self.linf_error.len() {
            t.push_row(vec![
                Cell::from(i),
                Cell::Float(self.linf_error[i]),
                Cell::Float(self.mass_drift[i]),
                Cell::Float(self.momentum_drift[i]),
            ]);
        }
        t
    }
}

/// March the lifted system alongside the classical oracle, recording the
/// f-block deviation and its conservation drift at every step.
pub fn clb2_evolve(sys: &Clb2System, initial: &FlowState, steps: usize) -> Result<Clb2Run> {
    if steps == 0 {
        return Err(Error::Domain("step count must be >= 1".into()));
    }
    if initial.g != sys.g || initial.q != sys.model.q() {
        return Err(Error::Dimension(format!(
            "initial state is {}x{}, system expects {}x{}",
            initial.q,
            initial.g,
            sys.model.q(),
            sys.g
        )));
    }
    let n1 = sys.n1;
    let mut y = crate::carleman::lift_initial(&initial.f, 2);
    let mut classical = initial.clone();
    let mass0 = initial.total_mass();
    let mom0 = initial.total_momentum(&sys.model);

    let mut linf_error = vec![0.0];
    let mut mass_drift = vec![0.0];
    let mut momentum_drift = vec![0.0];
    let mut max_error = 0.0f64;
    let mut scratch = vec![0.0; y.len()];

    for _ in 0..steps {
        sys.step_map.matrix.matvec_into(&y, &mut scratch);
        std::mem::swap(&mut y, &mut scratch);
        let worst = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !worst.is_finite() || worst > OVERFLOW_THRESHOLD {
            return Err(Error::Instability(format!(
                "lifted state reached {worst:e}"
            )));
        }
        classical = classical_lbm_step(&sys.model, &classical, sys.omega)?;

        let err = y[..n1]
            .iter()
            .zip(&classical.f)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        max_error = max_error.max(err);
        linf_error.push(err);

        let mass: f64 = y[..n1].iter().sum();
        mass_drift.push((mass - mass0).abs() / mass0);
        let mom: f64 = (0..sys.model.q())
            .map(|i| {
                sys.model.c[i] * y[i * sys.g..(i + 1) * sys.g].iter().sum::<f64>()
            })
            .sum();
        momentum_drift.push((mom - mom0).abs());
    }

    Ok(Clb2Run {
        linf_error,
        mass_drift,
        momentum_drift,
        max_error,
        final_classical: classical,
        final_lifted_f: y[..n1].to_vec(),
    })
}

/// Parameters of the embedding-error study.
#[derive(Debug, Clone)]
pub struct LbmErrorParams {
    pub g: usize,
    pub omega: f64,
    pub mach: f64,
    pub density_amp: f64,
    pub steps: usize,
}

impl Default for LbmErrorParams {
    fn default() -> Self {
        LbmErrorParams {
            g: 16,
            omega: 1.0,
            mach: 0.05,
            density_amp: 1e-2,
            steps: 100,
        }
    }
}

/// Run the default sine-perturbation scenario and return its error table.
pub fn lbm_error_run(p: &LbmErrorParams) -> Result<Clb2Run> {
    let model = LatticeModel::d1q3();
    let sys = build_clb2(&model, p.g, p.omega, DEFAULT_CLB2_CAP)?;
    let initial = FlowState::sine_wave(&model, p.g, p.density_amp, p.mach)?;
    clb2_evolve(&sys, &initial, p.steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifted_dimensions_match_tensor_count() {
        let sys = build_clb2(&LatticeModel::d1q3(), 4, 1.0, DEFAULT_CLB2_CAP).unwrap();
        assert_eq!(sys.n1, 12);
        assert_eq!(sys.step_map.total_dim, 156);
        assert_eq!(sys.step_map.block_dims, vec![12, 144]);
    }

    #[test]
    fn cap_rejects_oversized_lattices() {
        assert!(matches!(
            build_clb2(&LatticeModel::d1q3(), 64, 1.0, 1000),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn streaming_block_is_a_permutation() {
        let model = LatticeModel::d1q3();
        let p = stream_permutation(&model, 8);
        assert!(p.is_permutation(0.0));
        // With ω = 0 the whole first block reduces to the streaming
        // permutation.
        let sys = build_clb2(&model, 8, 0.0, DEFAULT_CLB2_CAP).unwrap();
        let first: Vec<_> = sys
            .step_map
            .matrix
            .entries()
            .iter()
            .filter(|&&(r, c, _)| r < 24 && c < 24)
            .map(|&(r, c, v)| (r, c, v))
            .collect();
        assert_eq!(first, p.entries().to_vec());
    }

    #[test]
    fn omega_zero_step_equals_classical_streaming_exactly() {
        let model = LatticeModel::d1q3();
        let g = 6;
        let f: Vec<f64> = (0..3 * g).map(|k| 0.1 + 0.005 * k as f64).collect();
        let initial = FlowState::new(g, 3, f).unwrap();
        let sys = build_clb2(&model, g, 0.0, DEFAULT_CLB2_CAP).unwrap();
        let run = clb2_evolve(&sys, &initial, 3).unwrap();
        assert_eq!(run.max_error, 0.0);
    }

    #[test]
    fn first_step_from_lifted_state_is_exact() {
        let model = LatticeModel::d1q3();
        let initial = FlowState::sine_wave(&model, 8, 1e-2, 0.05).unwrap();
        let sys = build_clb2(&model, 8, 1.0, DEFAULT_CLB2_CAP).unwrap();
        let run = clb2_evolve(&sys, &initial, 1).unwrap();
        // The quadratic decomposition of the collision is exact, so the
        // first step carries only rounding noise, far under the 1e-4 scale
        // of the embedding error.
        assert!(run.max_error <= 1e-13, "one-step error {}", run.max_error);
    }

    #[test]
    fn rest_state_error_stays_at_rounding_level() {
        let model = LatticeModel::d1q3();
        let initial = FlowState::uniform(&model, 8, 1.0, 0.0).unwrap();
        let sys = build_clb2(&model, 8, 1.0, DEFAULT_CLB2_CAP).unwrap();
        let run = clb2_evolve(&sys, &initial, 50).unwrap();
        assert!(run.max_error < 1e-12, "rest-state error {}", run.max_error);
    }

    #[test]
    fn lift_is_coherent_at_start() {
        let f: Vec<f64> = (0..6).map(|k| 0.2 + 0.03 * k as f64).collect();
        let lifted = crate::carleman::lift_initial(&f, 2);
        assert_eq!(lifted.len(), 6 + 36);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(lifted[6 + a * 6 + b], f[a] * f[b]);
            }
        }
    }

    #[test]
    fn acceptance_scenario_error_and_mach_scaling() {
        let run = lbm_error_run(&LbmErrorParams::default()).unwrap();
        assert!(run.max_error <= 1e-3, "error {}", run.max_error);

        let halved = lbm_error_run(&LbmErrorParams {
            mach: 0.025,
            ..LbmErrorParams::default()
        })
        .unwrap();
        let factor = run.max_error / halved.max_error;
        assert!(factor >= 3.0, "halving Mach only gained {factor}x");
    }

    #[test]
    fn error_is_monotone_in_mach() {
        let mut last = 0.0;
        for mach in [0.01, 0.05, 0.1, 0.2] {
            let run = lbm_error_run(&LbmErrorParams {
                mach,
                steps: 50,
                ..LbmErrorParams::default()
            })
            .unwrap();
            assert!(
                run.max_error > last,
                "error not increasing at Mach {mach}: {} after {last}",
                run.max_error
            );
            last = run.max_error;
        }
    }

    #[test]
    fn lifted_first_block_conserves_mass_and_momentum() {
        let run = lbm_error_run(&LbmErrorParams::default()).unwrap();
        assert!(run.mass_drift.iter().all(|&d| d < 1e-12));
        assert!(run.momentum_drift.iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn run_table_has_contracted_columns() {
        let run = lbm_error_run(&LbmErrorParams {
            steps: 5,
            ..LbmErrorParams::default()
        })
        .unwrap();
        let t = run.table();
        assert_eq!(
            t.columns,
            vec!["step", "linf_error", "mass_drift", "momentum_drift"]
        );
        assert_eq!(t.rows.len(), 6);
    }
}
