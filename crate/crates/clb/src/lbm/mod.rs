//! One-dimensional lattice-Boltzmann (BGK) reference solver.
//!
//! Collision relaxes each site toward a quadratic equilibrium at rate ω;
//! streaming shifts populations along their lattice velocity with periodic
//! wrap. The weakly-compressible equilibrium is exactly quadratic in the
//! populations, which is what makes the second-order Carleman embedding in
//! [`clb2`] close after two tensor powers.

pub mod clb2;

use crate::error::{Error, Result};
use crate::ode::OVERFLOW_THRESHOLD;

/// Discrete velocity set with weights and lattice sound speed.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub cs2: f64,
}

impl LatticeModel {
    /// Three-velocity 1D lattice: c = {-1, 0, +1}, w = {1/6, 2/3, 1/6},
    /// cs² = 1/3.
    pub fn d1q3() -> Self {
        LatticeModel {
            c: vec![-1.0, 0.0, 1.0],
            w: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            cs2: 1.0 / 3.0,
        }
    }

    pub fn q(&self) -> usize {
        self.c.len()
    }

    pub fn cs(&self) -> f64 {
        self.cs2.sqrt()
    }

    /// Weight-moment identities: Σw = 1, Σw·c = 0, Σw·c² = cs².
    pub fn check_moments(&self, tol: f64) -> bool {
        let s0: f64 = self.w.iter().sum();
        let s1: f64 = self.w.iter().zip(&self.c).map(|(w, c)| w * c).sum();
        let s2: f64 = self.w.iter().zip(&self.c).map(|(w, c)| w * c * c).sum();
        (s0 - 1.0).abs() <= tol && s1.abs() <= tol && (s2 - self.cs2).abs() <= tol
    }
}

/// Populations on a periodic 1D lattice, stored velocity-major:
/// `f[i*g + x]` is the population moving with velocity `c[i]` at site `x`.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub g: usize,
    pub q: usize,
    pub f: Vec<f64>,
}

impl FlowState {
    pub fn new(g: usize, q: usize, f: Vec<f64>) -> Result<Self> {
        if f.len() != g * q {
            return Err(Error::Dimension(format!(
                "population vector has length {}, lattice needs {}",
                f.len(),
                g * q
            )));
        }
        Ok(FlowState { g, q, f })
    }

    pub fn density(&self, x: usize) -> f64 {
        (0..self.q).map(|i| self.f[i * self.g + x]).sum()
    }

    pub fn momentum(&self, model: &LatticeModel, x: usize) -> f64 {
        (0..self.q)
            .map(|i| model.c[i] * self.f[i * self.g + x])
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.f.iter().sum()
    }

    pub fn total_momentum(&self, model: &LatticeModel) -> f64 {
        (0..self.q)
            .map(|i| model.c[i] * self.f[i * self.g..(i + 1) * self.g].iter().sum::<f64>())
            .sum()
    }

    /// Equilibrium state for sinusoidal density and momentum perturbations:
    /// ρ(x) = 1 + density_amp·sin(2πx/G), j(x) = mach·cs·sin(2πx/G).
    pub fn sine_wave(model: &LatticeModel, g: usize, density_amp: f64, mach: f64) -> Result<Self> {
        let q = model.q();
        let mut f = vec![0.0; q * g];
        for x in 0..g {
            let phase = 2.0 * std::f64::consts::PI * x as f64 / g as f64;
            let rho = 1.0 + density_amp * phase.sin();
            let j = mach * model.cs() * phase.sin();
            let eq = equilibrium(model, rho, j)?;
            for i in 0..q {
                f[i * g + x] = eq[i];
            }
        }
        FlowState::new(g, q, f)
    }

    /// Uniform equilibrium state.
    pub fn uniform(model: &LatticeModel, g: usize, rho: f64, j: f64) -> Result<Self> {
        let q = model.q();
        let eq = equilibrium(model, rho, j)?;
        let mut f = vec![0.0; q * g];
        for i in 0..q {
            for x in 0..g {
                f[i * g + x] = eq[i];
            }
        }
        FlowState::new(g, q, f)
    }
}

/// Quadratic weakly-compressible equilibrium
/// f_eq_i = w_i·(ρ + c_i·j/cs² + (c_i² − cs²)·j²/(2·cs⁴)), whose moments
/// reproduce ρ and j exactly.
pub fn equilibrium(model: &LatticeModel, rho: f64, j: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "density must be positive, got {rho}"
        )));
    }
    let cs2 = model.cs2;
    Ok(model
        .c
        .iter()
        .zip(&model.w)
        .map(|(&c, &w)| w * (rho + c * j / cs2 + (c * c - cs2) * j * j / (2.0 * cs2 * cs2)))
        .collect())
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    // ω = 0 (pure streaming) is admitted alongside the open stability
    // interval; ω = 2 is the zero-viscosity boundary and is excluded.
    if !(0.0..2.0).contains(&omega) {
        return Err(Error::Domain(format!(
            "relaxation rate must lie in [0, 2), got {omega}"
        )));
    }
    Ok(())
}

/// One collide-and-stream step: f ← f + ω(f_eq(ρ,j) − f) at each site, then
/// f_i(x) ← f_i(x − c_i) with periodic wrap.
pub fn classical_lbm_step(
    model: &LatticeModel,
    state: &FlowState,
    omega: f64,
) -> Result<FlowState> {
    check_omega(omega)?;
    let (g, q) = (state.g, state.q);
    let mut post = vec![0.0; q * g];
    for x in 0..g {
        let rho: f64 = (0..q).map(|i| state.f[i * g + x]).sum();
        let j: f64 = (0..q).map(|i| model.c[i] * state.f[i * g + x]).sum();
        let eq = equilibrium(model, rho, j)?;
        for i in 0..q {
            let cur = state.f[i * g + x];
            post[i * g + x] = cur + omega * (eq[i] - cur);
        }
    }
    let mut streamed = vec![0.0; q * g];
    for i in 0..q {
        let shift = model.c[i] as i64;
        for x in 0..g {
            let src = (x as i64 - shift).rem_euclid(g as i64) as usize;
            streamed[i * g + x] = post[i * g + src];
        }
    }
    for &v in &streamed {
        if !v.is_finite() || v.abs() > OVERFLOW_THRESHOLD {
            return Err(Error::Instability(format!(
                "population reached {v:e} after one lattice step"
            )));
        }
    }
    FlowState::new(g, q, streamed)
}
