// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nelder-Mead simplex search with the standard coefficients
//! (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexOptions {
    pub max_iters: usize,
    /// Vertex spread relative to `1 + |best|`, per coordinate.
    pub tol_x: f64,
    pub tol_f: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct SimplexResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Initial simplex steps: 5% of each nonzero coordinate, 2.5e-4 otherwise.
fn initial_step(x: f64) -> f64 {
    if x != 0.0 {
        0.05 * x
    } else {
        2.5e-4
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub(crate) fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut eval = |x: &[f64]| finite_or_inf(f(x));

    if d == 0 {
        return SimplexResult {
            x: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }

    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    verts.push(x0.to_vec());
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += initial_step(v[i]);
        verts.push(v);
    }
    let mut fvals: Vec<f64> = verts.iter().map(|v| eval(v)).collect();
    let mut order: Vec<usize> = (0..=d).collect();

    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut trial2 = vec![0.0; d];

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // Stable sort keeps the earlier vertex first on ties.
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];

        let f_spread = fvals[worst] - fvals[best];
        let x_spread = verts
            .iter()
            .flat_map(|v| v.iter().zip(&verts[best]).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())))
            .fold(0.0, f64::max);
        if x_spread <= opts.tol_x && f_spread <= opts.tol_f {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&verts[idx]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= d as f64);

        let w = &verts[worst];
        for k in 0..d {
            trial[k] = centroid[k] + (centroid[k] - w[k]);
        }
        let f_reflect = eval(&trial);

        if f_reflect < fvals[best] {
            for k in 0..d {
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - w[k]);
            }
            let f_expand = eval(&trial2);
            if f_expand < f_reflect {
                verts[worst].copy_from_slice(&trial2);
                fvals[worst] = f_expand;
            } else {
                verts[worst].copy_from_slice(&trial);
                fvals[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < fvals[second_worst] {
            verts[worst].copy_from_slice(&trial);
            fvals[worst] = f_reflect;
            continue;
        }

        // Outside contraction when the reflection improved on the worst
        // vertex, inside contraction otherwise.
        let outside = f_reflect < fvals[worst];
        for k in 0..d {
            trial2[k] = if outside {
                centroid[k] + 0.5 * (trial[k] - centroid[k])
            } else {
                centroid[k] + 0.5 * (w[k] - centroid[k])
            };
        }
        let f_contract = eval(&trial2);
        let threshold = if outside { f_reflect } else { fvals[worst] };
        if f_contract <= threshold {
            verts[worst].copy_from_slice(&trial2);
            fvals[worst] = f_contract;
            continue;
        }

        let anchor = verts[best].clone();
        for &idx in &order[1..] {
            for (x, a) in verts[idx].iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            fvals[idx] = eval(&verts[idx]);
        }
    }

    order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
    let best = order[0];
    SimplexResult {
        x: verts[best].clone(),
        iterations,
        converged,
    }
}
