//! Derivative-free Nelder–Mead simplex minimization.
//!
//! Small, self-contained implementation with the standard reflection,
//! expansion, contraction, and shrink moves. Used by the mortality-law and
//! copula fitters, which work in unconstrained transformed parameter spaces.

/// Outcome of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    /// Best point found.
    pub point: Vec<f64>,
    /// Objective value at the best point.
    pub value: f64,
    /// Number of objective evaluations spent.
    pub evals: usize,
    /// Whether the simplex collapsed below tolerance before the budget ran out.
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Minimize `f` starting from `start`, with `steps` giving the initial
/// simplex edge along each coordinate. Stops when the spread of vertex
/// values falls below `tol` (relative to their magnitude) or after
/// `max_evals` objective evaluations.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    max_evals: usize,
    tol: f64,
) -> SimplexResult {
    let n = start.len();
    assert_eq!(steps.len(), n, "one initial step per coordinate");
    let mut evals = 0usize;
    let mut eval = |p: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(p);
        if v.is_nan() { f64::INFINITY } else { v }
    };

    // Initial simplex: the start plus one displaced vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if steps[i] != 0.0 { steps[i] } else { 0.1 };
        let v = eval(&p, &mut evals);
        simplex.push((p, v));
    }

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        // Relative spread test with an absolute floor of `tol` itself, so
        // objectives that reach (numerically) zero still terminate.
        if (worst - best).abs() <= tol * (best.abs() + worst.abs() + 1.0) {
            converged = true;
            break;
        }

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[n].0)
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            // Try to expand past the reflection.
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + GAMMA * (r - c))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            // Contract toward the better of worst/reflection.
            let (toward, ft) = if fr < simplex[n].1 {
                (reflect, fr)
            } else {
                (simplex[n].0.clone(), simplex[n].1)
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&toward)
                .map(|(c, t)| c + RHO * (t - c))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < ft {
                simplex[n] = (contract, fc);
            } else {
                // Shrink everything toward the best vertex.
                let best_point = simplex[0].0.clone();
                for (p, v) in simplex.iter_mut().skip(1) {
                    for (x, b) in p.iter_mut().zip(&best_point) {
                        *x = b + SIGMA * (*x - b);
                    }
                    *v = eval(p, &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    SimplexResult {
        point,
        value,
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_rosenbrock_minimum() {
        let mut f = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        let r = minimize(&mut f, &[-1.2, 1.0], &[0.1, 0.1], 4000, 1e-12);
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-4, "x = {}", r.point[0]);
        assert!((r.point[1] - 1.0).abs() < 1e-4, "y = {}", r.point[1]);
    }

    #[test]
    fn respects_the_evaluation_budget() {
        let mut calls = 0usize;
        let mut f = |p: &[f64]| {
            calls += 1;
            p.iter().map(|x| x * x).sum()
        };
        let r = minimize(&mut f, &[5.0, 5.0, 5.0], &[1.0, 1.0, 1.0], 100, 0.0);
        assert!(r.evals <= 100 + 4);
        assert_eq!(calls, r.evals);
    }

    #[test]
    fn nan_objectives_are_treated_as_infinite() {
        let mut f = |p: &[f64]| {
            if p[0] < 0.0 {
                f64::NAN
            } else {
                (p[0] - 2.0).powi(2)
            }
        };
        let r = minimize(&mut f, &[1.0], &[0.5], 500, 1e-12);
        assert!((r.point[0] - 2.0).abs() < 1e-5);
    }
}
