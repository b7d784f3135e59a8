//! Nelder-Mead minimization on fixed-size vectors, with restarts.
//!
//! Coefficients follow the dimension-adapted choice of Gao and Han, which
//! behaves better than the textbook constants beyond a handful of
//! dimensions.

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexOptions {
    pub max_evals: usize,
    /// Converged once every vertex is within this distance (max-norm) of the best.
    pub tol_x: f64,
    /// ...or once all vertex values agree to this.
    pub tol_f: f64,
    pub initial_step: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    pub evals: usize,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn adaptive(n: usize) -> Self {
        let n = n as f64;
        Coefficients {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

/// Minimizes `f` from `x0`. After each convergence the simplex is rebuilt
/// around the incumbent; the loop stops when a rebuild no longer improves
/// the value or the evaluation budget is spent.
pub(crate) fn minimize<const N: usize>(
    mut f: impl FnMut(&[f64; N]) -> f64,
    x0: [f64; N],
    opts: &SimplexOptions,
) -> SimplexResult<N> {
    let mut evals = 0usize;
    let mut best_x = x0;
    let mut best_f = f(&x0);
    evals += 1;
    loop {
        let before = best_f;
        let (x, fx) = run_once(&mut f, best_x, best_f, opts, &mut evals);
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
        if evals >= opts.max_evals || before - best_f <= opts.tol_f {
            break;
        }
    }
    SimplexResult {
        x: best_x,
        f: best_f,
        evals,
    }
}

fn run_once<const N: usize>(
    f: &mut impl FnMut(&[f64; N]) -> f64,
    x0: [f64; N],
    f0: f64,
    opts: &SimplexOptions,
    evals: &mut usize,
) -> ([f64; N], f64) {
    let c = Coefficients::adaptive(N);
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, f0));
    for i in 0..N {
        if *evals >= opts.max_evals {
            return (x0, f0);
        }
        let mut x = x0;
        x[i] += opts.initial_step;
        let fx = f(&x);
        *evals += 1;
        simplex.push((x, fx));
    }

    while *evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0], simplex[N]);
        let spread_x = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(best.0.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread_x <= opts.tol_x || (worst.1 - best.1).abs() <= opts.tol_f {
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for (c, xi) in centroid.iter_mut().zip(x.iter()) {
                *c += xi / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            std::array::from_fn(|i| centroid[i] + t * (worst.0[i] - centroid[i]))
        };

        let xr = along(-c.reflect);
        let fr = f(&xr);
        *evals += 1;
        if fr < best.1 {
            let xe = along(-c.reflect * c.expand);
            let fe = f(&xe);
            *evals += 1;
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
            continue;
        }
        // contraction, outside or inside
        let (xc, fc, accept) = if fr < worst.1 {
            let xc = along(-c.reflect * c.contract);
            let fc = f(&xc);
            (xc, fc, fc <= fr)
        } else {
            let xc = along(c.contract);
            let fc = f(&xc);
            (xc, fc, fc < worst.1)
        };
        *evals += 1;
        if accept {
            simplex[N] = (xc, fc);
            continue;
        }
        for vertex in simplex.iter_mut().skip(1) {
            if *evals >= opts.max_evals {
                break;
            }
            let x: [f64; N] = std::array::from_fn(|i| best.0[i] + c.shrink * (vertex.0[i] - best.0[i]));
            vertex.1 = f(&x);
            vertex.0 = x;
            *evals += 1;
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty simplex")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_evals: usize) -> SimplexOptions {
        SimplexOptions {
            max_evals,
            tol_x: 1e-10,
            tol_f: 1e-15,
            initial_step: 0.5,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let r = minimize(
            |x: &[f64; 4]| x.iter().zip(target.iter()).map(|(a, b)| (a - b).powi(2)).sum(),
            [0.0; 4],
            &opts(5000),
        );
        for (a, b) in r.x.iter().zip(target.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(r.f < 1e-12);
    }

    #[test]
    fn rosenbrock_2d() {
        let r = minimize(
            |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            [-1.2, 1.0],
            &opts(5000),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn respects_budget() {
        let mut calls = 0;
        let r = minimize(
            |x: &[f64; 8]| {
                calls += 1;
                x.iter().map(|v| v.sin()).sum()
            },
            [0.3; 8],
            &opts(100),
        );
        assert!(r.evals <= 100 + 8);
        assert_eq!(r.evals, calls);
    }

    #[test]
    fn flat_objective_stops_early() {
        let r = minimize(|_: &[f64; 8]| 0.25, [0.0; 8], &opts(2000));
        assert!(r.evals < 40);
        assert_eq!(r.f, 0.25);
    }
}
