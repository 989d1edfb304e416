//! Nelder–Mead simplex minimisation.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Initial step along each coordinate.
    pub steps: Vec<f64>,
    /// Converged when every vertex lies within `x_tol` of the best vertex in
    /// every coordinate.
    pub x_tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn spread(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Minimise `f` from `x0`. Non-finite objective values act as walls.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let dim = x0.len();
    assert_eq!(opts.steps.len(), dim, "one step per coordinate");
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.steps[i];
        let v = eval(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if spread(&simplex) <= opts.x_tol {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(REFLECT * CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                        *xi = bi + SHRINK * (*xi - bi);
                    }
                    vertex.1 = eval(&vertex.0);
                }
            }
        }
        order(&mut simplex);
    }
    let converged = spread(&simplex) <= opts.x_tol;
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(dim: usize) -> SimplexOptions {
        SimplexOptions {
            steps: vec![0.5; dim],
            x_tol: 1e-10,
            max_iterations: 2000,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &opts(2),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &opts(2),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_infinite_walls() {
        let r = minimize(
            |x| if x[0] <= 0.0 { f64::INFINITY } else { x[0] + (x[1] - 3.0).powi(2) },
            &[1.0, 0.0],
            &opts(2),
        );
        assert!(r.x[0] > 0.0 && r.x[0] < 1e-8);
        assert!((r.x[1] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn reports_non_convergence() {
        let r = minimize(
            |x| x[0].powi(2) + x[1].powi(2) + x[2].powi(2),
            &[5.0, 5.0, 5.0],
            &SimplexOptions {
                steps: vec![1.0; 3],
                x_tol: 1e-12,
                max_iterations: 5,
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }
}
