//! Eigenvalues of small real matrices through the characteristic polynomial.

use num_complex::Complex64;

use super::StabilityError;

const MAX_ITER: usize = 500;

/// Coefficients `c[0..=N]` of `det(lambda I - A) = sum_k c[k] lambda^k` (`c[N] = 1`),
/// by the Faddeev-LeVerrier recursion.
pub fn char_poly<const N: usize>(a: &[[f64; N]; N]) -> Vec<f64> {
    let mut c = vec![0.0; N + 1];
    c[N] = 1.0;
    let mut m = [[0.0; N]; N];
    for k in 1..=N {
        // M_k = A M_{k-1} + c_{N-k+1} I
        let mut next = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = 0.0;
                for l in 0..N {
                    s += a[i][l] * m[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += c[N - k + 1];
        }
        m = next;
        let mut tr = 0.0;
        for i in 0..N {
            for l in 0..N {
                tr += a[i][l] * m[l][i];
            }
        }
        c[N - k] = -tr / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

// Rounding-level size of p at z: sum |c_k| |z|^k.
fn magnitude(c: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck.abs())
}

/// All complex roots of the real polynomial `sum_k c[k] z^k` with nonzero leading term.
pub fn poly_roots(c: &[f64]) -> Result<Vec<Complex64>, StabilityError> {
    let n = c.len() - 1;
    let lead = c[n];
    let c: Vec<f64> = c.iter().map(|&x| x / lead).collect();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dc = derivative(&c);
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));

    // Aberth-Ehrlich from points spread on a circle, rotated off the real axis.
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let pk = horner(&c, z[k]);
            if pk == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pk / horner(&dc, z[k]);
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|&zk| horner(&c, zk).norm() > 1e-6 * magnitude(&c, zk)) {
        return Err(StabilityError::NoConvergence { iterations: MAX_ITER });
    }

    // Newton polishing of simple roots.
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let step = horner(&c, *zk) / horner(&dc, *zk);
            if step.is_finite() {
                *zk -= step;
            }
        }
    }
    polish_clusters(&c, &mut z);
    Ok(pair_conjugates(z))
}

// A root of multiplicity m is spread by rounding into m nearby roots. Their
// mean, refined by Newton on p^(m-1), recovers it when p and its first m - 1
// derivatives all vanish there to rounding accuracy.
fn polish_clusters(c: &[f64], z: &mut [Complex64]) {
    let n = z.len();
    let scale = z.iter().fold(0.0f64, |m, zk| m.max(zk.norm())).max(1e-300);
    let delta = 1e-3 * scale;
    let mut assigned = vec![false; n];
    for k in 0..n {
        if assigned[k] {
            continue;
        }
        let members: Vec<usize> = (k..n)
            .filter(|&j| !assigned[j] && (z[j] - z[k]).norm() < delta)
            .collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mut derivs = vec![c.to_vec()];
        for _ in 1..=m {
            let next = derivative(derivs.last().expect("nonempty"));
            derivs.push(next);
        }
        let mut center = members.iter().map(|&j| z[j]).sum::<Complex64>() / m as f64;
        for _ in 0..5 {
            let step = horner(&derivs[m - 1], center) / horner(&derivs[m], center);
            if step.is_finite() {
                center -= step;
            }
        }
        let vanishes = derivs[..m]
            .iter()
            .all(|d| horner(d, center).norm() <= 1e4 * f64::EPSILON * magnitude(d, center).max(1e-300));
        if vanishes {
            for &j in &members {
                z[j] = center;
                assigned[j] = true;
            }
        }
    }
}

/// Forces exact conjugate symmetry and sorts by decreasing real part.
fn pair_conjugates(mut z: Vec<Complex64>) -> Vec<Complex64> {
    let scale = z.iter().fold(0.0f64, |m, zk| m.max(zk.norm())).max(1e-300);
    let real_tol = 1e-9 * scale;
    let mut out = Vec::with_capacity(z.len());
    let mut complex: Vec<Complex64> = Vec::new();
    for zk in z.drain(..) {
        if zk.im.abs() <= real_tol {
            out.push(Complex64::new(zk.re, 0.0));
        } else {
            complex.push(zk);
        }
    }
    let mut upper: Vec<Complex64> = complex.iter().copied().filter(|w| w.im > 0.0).collect();
    let mut lower: Vec<Complex64> = complex.iter().copied().filter(|w| w.im < 0.0).collect();
    while let Some(a) = upper.pop() {
        let partner = lower
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1.conj() - a).norm().total_cmp(&(y.1.conj() - a).norm()))
            .map(|(i, _)| i);
        match partner {
            Some(i) => {
                let b = lower.swap_remove(i);
                let avg = 0.5 * (a + b.conj());
                out.push(avg);
                out.push(avg.conj());
            }
            None => out.push(a),
        }
    }
    out.extend(lower);
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out
}
