//! Euclidean projection onto the probability simplex.

/// Projects `v` onto `{x : x_i >= 0, Σ x_i = 1}` in place.
///
/// Sort-based algorithm: find the largest `k` such that
/// `u_k - (Σ_{j<=k} u_j - 1) / k > 0` on the descending sort `u`, then
/// shift by that threshold and clip at zero.
pub fn project_onto_simplex(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

pub fn projected(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    project_onto_simplex(&mut out);
    out
}
