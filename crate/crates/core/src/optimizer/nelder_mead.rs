//! Unconstrained Nelder-Mead minimization.

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Initial simplex edge length along each coordinate.
    pub step: f64,
    /// Stop once the spread of function values over the simplex falls below this.
    pub f_tol: f64,
    pub max_evaluations: usize,
}

impl NelderMead {
    pub fn minimize<F>(&self, f: F, x0: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let n = x0.len();
        let count = std::cell::Cell::new(0usize);
        let eval = |x: &[f64]| {
            count.set(count.get() + 1);
            f(x)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut converged = false;
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        while count.get() < self.max_evaluations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            if (worst - best).abs() <= self.f_tol {
                converged = true;
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |coef: f64, out: &mut Vec<f64>, worst: &[f64]| {
                for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                    *o = c + coef * (w - c);
                }
            };

            along(-1.0, &mut trial, &simplex[n].0);
            let reflected = eval(&trial);
            if reflected < best {
                along(-2.0, &mut trial2, &simplex[n].0);
                let expanded = eval(&trial2);
                simplex[n] = if expanded < reflected {
                    (trial2.clone(), expanded)
                } else {
                    (trial.clone(), reflected)
                };
                continue;
            }
            if reflected < simplex[n - 1].1 {
                simplex[n] = (trial.clone(), reflected);
                continue;
            }

            // contraction, outside if the reflection improved on the worst point
            let coef = if reflected < worst { -0.5 } else { 0.5 };
            along(coef, &mut trial2, &simplex[n].0);
            let contracted = eval(&trial2);
            if contracted < reflected.min(worst) {
                simplex[n] = (trial2.clone(), contracted);
                continue;
            }

            let anchor = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, a) in x.iter_mut().zip(&anchor) {
                    *xi = a + 0.5 * (*xi - a);
                }
                *v = eval(x);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evaluations: count.get(),
            converged,
        }
    }
}
