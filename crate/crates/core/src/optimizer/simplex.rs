use serde::{Deserialize, Serialize};

/// Nelder-Mead settings. Coefficients are the standard
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexOptions {
    /// Initial edge length along each axis, relative to `max(|x_i|, 1)`.
    pub initial_step: f64,
    /// Converged when both the value spread and the vertex spread fall below these.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iterations: usize,
    /// Stop as soon as the best value drops below this.
    pub f_stop: Option<f64>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            f_tol: 1e-10,
            x_tol: 1e-10,
            max_iterations: 4000,
            f_stop: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Stopped on `max_iterations` rather than on convergence.
    pub exhausted: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// Minimizes `objective` from `x0` with the Nelder-Mead simplex method.
/// Non-finite objective values count as `+inf`. Vertices are ordered by value
/// with ties broken by vertex index, so runs are reproducible bit for bit.
pub fn nelder_mead(mut objective: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step * x0[i].abs().max(1.0);
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut exhausted = false;

    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    loop {
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        let best = order[0];
        let worst = order[n];
        history.push(vals[best]);
        if n == 0 {
            break;
        }
        let f_spread = vals[worst] - vals[best];
        let x_spread = verts
            .iter()
            .flat_map(|v| v.iter().zip(&verts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let stop = opts.f_stop.is_some_and(|s| vals[best] < s);
        if stop || (f_spread <= opts.f_tol && x_spread <= opts.x_tol) || (vals[best].is_infinite() && vals[best] < 0.0) {
            break;
        }
        if iterations >= opts.max_iterations {
            exhausted = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&verts[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let second_worst = vals[order[n - 1]];
        let reflected = blend(&centroid, &verts[worst], -1.0);
        let fr = eval(&reflected);
        if fr < vals[best] {
            let expanded = blend(&centroid, &verts[worst], -2.0);
            let fe = eval(&expanded);
            if fe < fr {
                verts[worst] = expanded;
                vals[worst] = fe;
            } else {
                verts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < second_worst {
            verts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[worst] {
            let c = blend(&centroid, &reflected, 0.5);
            let f = eval(&c);
            (c, f)
        } else {
            let c = blend(&centroid, &verts[worst], 0.5);
            let f = eval(&c);
            (c, f)
        };
        if fc < vals[worst].min(fr) {
            verts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        let anchor = verts[best].clone();
        for &i in &order[1..] {
            verts[i] = blend(&anchor, &verts[i], 0.5);
            vals[i] = eval(&verts[i]);
        }
    }
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    SimplexResult {
        x: verts[order[0]].clone(),
        f: vals[order[0]],
        iterations,
        evaluations,
        exhausted,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let r = nelder_mead(|x| (x[0] - 2.0).powi(2), &[0.0], &SimplexOptions::default());
        assert!((r.x[0] - 2.0).abs() < 1e-8, "{:?}", r.x);
        assert!(!r.exhausted);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions {
            f_tol: 1e-16,
            x_tol: 1e-10,
            ..Default::default()
        };
        let r = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn deterministic_and_monotone() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + x[0]).sin().powi(2) + 0.1 * x[2].powi(4);
        let a = nelder_mead(f, &[1.0, 2.0, 3.0], &SimplexOptions::default());
        let b = nelder_mead(f, &[1.0, 2.0, 3.0], &SimplexOptions::default());
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exhaustion_is_flagged() {
        let opts = SimplexOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let r = nelder_mead(|x| x[0] * x[0] + x[1] * x[1], &[5.0, 5.0], &opts);
        assert!(r.exhausted);
        assert!(r.f < 50.0);
    }
}
