use thiserror::Error;

/// Errors produced by the model, oracle, optimizer and device mapping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its domain. Signals a caller bug, not a physical effect.
    #[error("invalid parameter `{name}` = {value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error(
        "Fock cutoff {cutoff} reached without convergence (residual {residual:e} > tol {tol:e})"
    )]
    NonConvergence {
        cutoff: usize,
        residual: f64,
        tol: f64,
    },

    /// Zero or several displacement-scaling candidates reproduced the closed form.
    #[error("alpha2 convention is ambiguous: {passing} candidate(s) passed")]
    AmbiguousConvention { passing: usize },

    #[error("cavity decay rate kappa must be positive")]
    ZeroKappa,

    #[error("no crossing over [{lo}, {hi}]: objective offsets are {f_lo:+e} and {f_hi:+e}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(
    ok: bool,
    name: &'static str,
    value: f64,
    constraint: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}
