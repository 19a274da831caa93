//! Fixed-step fourth-order Runge-Kutta marching.

use crate::error::{Error, Result};
use crate::sparse::Coo;

/// State-component magnitude above which integration aborts as unstable.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

/// Integrate the linear system y' = C y with classical RK4 over `steps`
/// uniform steps of size `dt`, invoking `sample` after step 0 (initial state)
/// and after every completed step.
pub fn rk4_linear<F>(
    matrix: &Coo,
    y0: &[f64],
    dt: f64,
    steps: usize,
    mut sample: F,
) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64, &[f64]),
{
    if !matrix.is_square() || matrix.nrows() != y0.len() {
        return Err(Error::Dimension(format!(
            "RK4 needs a square matrix matching the state: {}x{} vs state {}",
            matrix.nrows(),
            matrix.ncols(),
            y0.len()
        )));
    }
    if dt <= 0.0 {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }

    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    sample(0, 0.0, &y);
    for step in 0..steps {
        matrix.matvec_into(&y, &mut k1);
        for i in 0..n {
            scratch[i] = y[i] + 0.5 * dt * k1[i];
        }
        matrix.matvec_into(&scratch, &mut k2);
        for i in 0..n {
            scratch[i] = y[i] + 0.5 * dt * k2[i];
        }
        matrix.matvec_into(&scratch, &mut k3);
        for i in 0..n {
            scratch[i] = y[i] + dt * k3[i];
        }
        matrix.matvec_into(&scratch, &mut k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max.is_finite() || max > OVERFLOW_THRESHOLD {
            return Err(Error::Instability(format!(
                "state reached {max:e} at t = {:.6}",
                (step + 1) as f64 * dt
            )));
        }
        sample(step + 1, (step + 1) as f64 * dt, &y);
    }
    Ok(y)
}

/// Outcome of integrating a scalar ODE that may blow up in finite time.
#[derive(Debug, Clone)]
pub struct ScalarRun {
    /// (t, x) samples up to and excluding any blow-up step.
    pub samples: Vec<(f64, f64)>,
    /// Time of the first step at which the state left the finite range, if any.
    pub blowup_time: Option<f64>,
}

/// RK4 on a scalar ODE x' = f(x), recording a sample every `sample_every`
/// steps. Divergence past the overflow threshold is reported as data rather
/// than as an error.
pub fn rk4_scalar_with_blowup<F>(
    f: F,
    x0: f64,
    dt: f64,
    steps: usize,
    sample_every: usize,
) -> Result<ScalarRun>
where
    F: Fn(f64) -> f64,
{
    if dt <= 0.0 {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let every = sample_every.max(1);
    let mut x = x0;
    let mut samples = vec![(0.0, x)];
    for step in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * dt * k1);
        let k3 = f(x + 0.5 * dt * k2);
        let k4 = f(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t = (step + 1) as f64 * dt;
        if !x.is_finite() || x.abs() > OVERFLOW_THRESHOLD {
            return Ok(ScalarRun {
                samples,
                blowup_time: Some(t),
            });
        }
        if (step + 1) % every == 0 {
            samples.push((t, x));
        }
    }
    Ok(ScalarRun {
        samples,
        blowup_time: None,
    })
}
