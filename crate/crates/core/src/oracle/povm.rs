use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{validate_eta, TruncationPolicy};
use crate::error::Result;

/// Truncated `D(alpha)^dag (1 - eta)^n D(alpha)` on levels `0..dim`.
#[derive(Debug, Clone)]
pub struct NoClickOperator {
    dim: usize,
    entries: DMatrix<Complex64>,
}

/// `exp(alpha a^dag - alpha* a)` on `levels` Fock levels.
pub fn displacement(alpha: Complex64, levels: usize) -> DMatrix<Complex64> {
    let mut gen = DMatrix::<Complex64>::zeros(levels, levels);
    for n in 0..levels.saturating_sub(1) {
        let s = ((n + 1) as f64).sqrt();
        gen[(n + 1, n)] = alpha * s;
        gen[(n, n + 1)] = -alpha.conj() * s;
    }
    gen.exp()
}

impl NoClickOperator {
    /// Built on `cutoff + guard + 1` levels, then restricted to `0..=cutoff`.
    ///
    /// The sum over intermediate photon numbers keeps the guard levels, so only
    /// the outer indices are truncated.
    pub fn build(eta: f64, alpha: Complex64, cutoff: usize, guard: usize) -> Self {
        let dim = cutoff + 1;
        let levels = dim + guard;
        let d = displacement(alpha, levels);
        let keep = 1.0 - eta;
        let entries = DMatrix::from_fn(dim, dim, |m, n| {
            (0..levels)
                .map(|k| d[(k, m)].conj() * d[(k, n)] * keep.powi(k as i32))
                .sum()
        });
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .map(|z| z.norm())
            .max()
    }

    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let ev = self.entries.clone().symmetric_eigenvalues();
        (ev.min(), ev.max())
    }
}

/// No-click element at the policy's starting cutoff.
pub fn no_click_operator(
    eta: f64,
    alpha: Complex64,
    policy: &TruncationPolicy,
) -> Result<NoClickOperator> {
    validate_eta(eta)?;
    Ok(NoClickOperator::build(
        eta,
        alpha,
        policy.n_start,
        policy.guard,
    ))
}
