//! Box-constrained Nelder–Mead.
//!
//! Reflection 1, expansion 2, contraction ½, shrink ½. Trial points are
//! clamped to the box and non-finite objective values count as +∞. The
//! iteration is fully deterministic.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Stop when the spread of objective values over the simplex is below this.
    pub ftol: f64,
    /// ...and every vertex is within this distance of the best one.
    pub xtol: f64,
    pub max_iter: usize,
    /// Initial edge length as a fraction of each bound's width.
    pub initial_fraction: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-10,
            xtol: 1e-9,
            max_iter: 5000,
            initial_fraction: 1e-2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

fn eval<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

pub fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &NelderMeadOptions,
) -> Minimum {
    let n = x0.len();
    assert_eq!(n, bounds.len(), "one bound per coordinate");
    let mut start = x0.to_vec();
    clamp(&mut start, bounds);

    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for k in 0..n {
        let (lo, hi) = bounds[k];
        let step = opts.initial_fraction * (hi - lo);
        let mut v = start.clone();
        // step inward if the upper face is hit
        v[k] = if v[k] + step <= hi { v[k] + step } else { v[k] - step };
        clamp(&mut v, bounds);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(&f, v)).collect();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= opts.ftol && size <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p, bounds);
            p
        };

        let xr = along(1.0);
        let fr = eval(&f, &xr);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&f, &xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let x = along(0.5);
                let v = eval(&f, &x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&f, &x);
                (x, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let v: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    values[i] = eval(&f, &v);
                    simplex[i] = v;
                }
            }
        }
        history.push(values.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
        history,
    }
}
