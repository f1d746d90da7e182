use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{validate_state_inputs, NoClickOperator, TruncationPolicy};
use crate::error::{Error, Result};
use crate::model::ProbabilityTriple;

/// Density operator over `|n1, n2>` with `n1, n2 <= dim - 1`.
///
/// Row and column index of `|n1, n2>` is `n1 * dim + n2`; mode 1 is the photon
/// arm, mode 2 the mapped arm.
#[derive(Debug, Clone)]
pub struct TwoModeDensityMatrix {
    dim: usize,
    entries: DMatrix<Complex64>,
}

impl TwoModeDensityMatrix {
    /// Per-mode dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.dim + n2
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Probability weight lost to truncation, `1 - Tr(rho)`.
    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    /// `max |rho - rho^dag|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in c..n {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, NaN if the diagonalization breaks down. Dense
    /// Hermitian diagonalization, meant for moderate cutoffs.
    pub fn min_eigenvalue(&self) -> f64 {
        // identically zero rows carry exact zero eigenvalues; the solver can
        // produce NaN on matrices with many of them
        let n = self.entries.nrows();
        let support: Vec<usize> = (0..n)
            .filter(|&i| {
                self.entries
                    .row(i)
                    .iter()
                    .any(|z| *z != Complex64::new(0.0, 0.0))
            })
            .collect();
        let floor = if support.len() < n {
            0.0
        } else {
            f64::INFINITY
        };
        if support.is_empty() {
            return floor;
        }
        let reduced = self.entries.select_rows(&support).select_columns(&support);
        reduced.symmetric_eigenvalues().iter().fold(floor, |m, &v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.min(v)
            }
        })
    }

    /// Photon-number distribution of mode 1.
    pub fn mode1_populations(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|n1| {
                (0..self.dim)
                    .map(|n2| {
                        let i = self.index(n1, n2);
                        self.entries[(i, i)].re
                    })
                    .sum()
            })
            .collect()
    }

    /// Photon-number distribution of mode 2.
    pub fn mode2_populations(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|n2| {
                (0..self.dim)
                    .map(|n1| {
                        let i = self.index(n1, n2);
                        self.entries[(i, i)].re
                    })
                    .sum()
            })
            .collect()
    }

    /// Mean photon numbers `(<n1>, <n2>)`.
    pub fn mean_photon_numbers(&self) -> (f64, f64) {
        let mean = |pops: Vec<f64>| pops.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        (
            mean(self.mode1_populations()),
            mean(self.mode2_populations()),
        )
    }

    /// `Tr(rho O1 x O2)` with the two marginals `Tr(rho O1 x 1)`, `Tr(rho 1 x O2)`.
    ///
    /// Panics if the operators were built at a different cutoff.
    pub fn triple(&self, o1: &NoClickOperator, o2: &NoClickOperator) -> ProbabilityTriple {
        assert_eq!(
            o1.dim(),
            self.dim,
            "operator cutoff differs from state cutoff"
        );
        assert_eq!(
            o2.dim(),
            self.dim,
            "operator cutoff differs from state cutoff"
        );
        let d = self.dim;
        let (o1, o2) = (o1.entries(), o2.entries());
        let rho = &self.entries;

        // Tr(rho A x B) = sum rho[(i,j),(k,l)] A[k,i] B[l,j]; columns of rho are
        // contiguous, so the inner loops walk rows (i, j).
        let mut joint = Complex64::new(0.0, 0.0);
        let mut marg1 = Complex64::new(0.0, 0.0);
        let mut marg2 = Complex64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                let col = rho.column(k * d + l);
                for i in 0..d {
                    let a = o1[(k, i)];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += col[i * d + j] * o2[(l, j)];
                    }
                    joint += acc * a;
                    // marginal 1: B = identity selects j = l
                    marg1 += col[i * d + l] * a;
                }
                // marginal 2: A = identity selects i = k
                for j in 0..d {
                    marg2 += col[k * d + j] * o2[(l, j)];
                }
            }
        }
        ProbabilityTriple {
            joint: joint.re,
            marg1: marg1.re,
            marg2: marg2.re,
        }
    }
}

/// Amplitude of `K_k |j> = sqrt(C(j,k) T^(j-k) (1-T)^k) |j-k>`.
fn kraus_amplitude(t: f64, j: usize, k: usize) -> f64 {
    if k > j {
        return 0.0;
    }
    binomial(j, k).sqrt() * t.sqrt().powi((j - k) as i32) * (1.0 - t).sqrt().powi(k as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus operators `K_0..=K_N` of a beam splitter with transmission `t` whose
/// other input is vacuum and whose reflected port is traced out.
pub fn loss_kraus(t: f64, cutoff: usize) -> Vec<DMatrix<f64>> {
    let dim = cutoff + 1;
    (0..dim)
        .map(|k| {
            DMatrix::from_fn(dim, dim, |row, col| {
                if col >= k && row == col - k {
                    kraus_amplitude(t, col, k)
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Column `exp(G) |0, m>` of the two-mode squeezer restricted to the ladder
/// `|n, n+m>`, `n + m <= top`, with `G = r (a1 b - a1^dag b^dag)`.
fn squeezed_ladder(r: f64, m: usize, top: usize) -> DVector<f64> {
    let len = top - m + 1;
    let mut gen = DMatrix::<f64>::zeros(len, len);
    for n in 0..len - 1 {
        // a1^dag b^dag |n, n+m> = sqrt(n+1) sqrt(n+m+1) |n+1, n+m+1>
        let amp = r * ((n + 1) as f64).sqrt() * ((n + m + 1) as f64).sqrt();
        gen[(n + 1, n)] = -amp;
        gen[(n, n + 1)] = amp;
    }
    gen.exp().column(0).into_owned()
}

/// Lossy two-mode squeezed thermal state at a fixed per-mode cutoff.
///
/// Mode 2 starts thermal with mean `n0` (geometric weights up to the cutoff)
/// and mode 1 in vacuum. The squeezer with `tanh^2 r = p` is
/// exponentiated on `cutoff + guard` levels and projected, so the trace deficit
/// measures the truncation. Loss of transmission `t` then acts on mode 2.
pub fn build_state_at(
    p: f64,
    n0: f64,
    t: f64,
    cutoff: usize,
    guard: usize,
) -> TwoModeDensityMatrix {
    let dim = cutoff + 1;
    let top = cutoff + guard;
    let r = p.sqrt().atanh();

    // Geometric weights, not renormalized: the seed's tail mass shows up in the
    // trace deficit like the squeezer's.
    let ratio = n0 / (1.0 + n0);
    let seed: Vec<f64> = (0..dim)
        .map(|m| ratio.powi(m as i32) / (1.0 + n0))
        .collect();

    let mut entries = DMatrix::<Complex64>::zeros(dim * dim, dim * dim);
    let mut support: Vec<(usize, f64)> = Vec::with_capacity(dim);
    for (m, &w) in seed.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let ladder = squeezed_ladder(r, m, top);
        // component n sits on |n, n+m>; keep n + m <= cutoff
        let kept = &ladder.as_slice()[..=cutoff - m];
        for k in 0..=cutoff {
            support.clear();
            for (n, &c) in kept.iter().enumerate() {
                let j = n + m;
                if j < k {
                    continue;
                }
                let amp = c * kraus_amplitude(t, j, k);
                if amp != 0.0 {
                    support.push((n * dim + (j - k), amp));
                }
            }
            for &(col, b) in &support {
                for &(row, a) in &support {
                    entries[(row, col)].re += w * a * b;
                }
            }
        }
    }
    TwoModeDensityMatrix { dim, entries }
}

/// Builds the state, doubling the cutoff until the trace deficit is within `policy.tol`.
pub fn build_state(
    p: f64,
    n0: f64,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<TwoModeDensityMatrix> {
    validate_state_inputs(p, n0, t)?;
    policy.validate()?;
    let mut deficit = f64::INFINITY;
    for cutoff in policy.ladder() {
        let rho = build_state_at(p, n0, t, cutoff, policy.guard);
        deficit = rho.trace_deficit();
        if deficit.abs() <= policy.tol {
            return Ok(rho);
        }
    }
    Err(Error::NonConvergence {
        cutoff: policy.n_max,
        residual: deficit,
        tol: policy.tol,
    })
}
