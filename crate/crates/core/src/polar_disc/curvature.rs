use super::BoundaryCurve;

/// Fourth-order periodic central first difference.
pub fn periodic_first_derivative(values: &[f64], dtheta: f64) -> Vec<f64> {
    let m = values.len() as isize;
    let at = |j: isize| values[j.rem_euclid(m) as usize];
    (0..m)
        .map(|j| (8.0 * (at(j + 1) - at(j - 1)) - (at(j + 2) - at(j - 2))) / (12.0 * dtheta))
        .collect()
}

/// Fourth-order periodic central second difference.
pub fn periodic_second_derivative(values: &[f64], dtheta: f64) -> Vec<f64> {
    let m = values.len() as isize;
    let at = |j: isize| values[j.rem_euclid(m) as usize];
    (0..m)
        .map(|j| {
            let c = at(j);
            (16.0 * ((at(j + 1) - c) + (at(j - 1) - c)) - ((at(j + 2) - c) + (at(j - 2) - c)))
                / (12.0 * dtheta * dtheta)
        })
        .collect()
}

/// Curvature of `r = rho(theta)`:
/// `(2 rho_t^2 - rho rho_tt + rho^2) / (rho_t^2 + rho^2)^(3/2)`.
pub fn curvature(curve: &BoundaryCurve) -> Vec<f64> {
    curvature_of(curve.values(), curve.dtheta())
}

pub(crate) fn curvature_of(rho: &[f64], dtheta: f64) -> Vec<f64> {
    let d1 = periodic_first_derivative(rho, dtheta);
    let d2 = periodic_second_derivative(rho, dtheta);
    rho.iter()
        .zip(d1.iter().zip(d2.iter()))
        .map(|(&r, (&rt, &rtt))| {
            (2.0 * rt * rt - r * rtt + r * r) / (rt * rt + r * r).powf(1.5)
        })
        .collect()
}
