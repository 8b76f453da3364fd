//! Sampled curves of the bound functions, for plotting.

use alloc::vec::Vec;

use super::bounds;

/// `(eta, f(eta, eta_inf), g(eta, eta_inf))` on an even grid over `[from, to]`.
pub fn lower_bound_curve(from: f64, to: f64, points: usize, eta_inf: f64) -> Vec<[f64; 3]> {
    grid(from, to, points)
        .map(|eta| {
            [
                eta,
                bounds::lower_bound_f(eta, eta_inf),
                bounds::lower_bound_g(eta, eta_inf),
            ]
        })
        .collect()
}

/// `(alpha, eta_0(alpha, epsilon))` for `alpha` in `[-1, 1 - epsilon]`.
pub fn eta_0_curve(epsilon: f64, points: usize) -> Vec<[f64; 2]> {
    grid(-1.0, 1.0 - epsilon, points)
        .filter_map(|alpha| bounds::eta_0(alpha, epsilon).ok().map(|e| [alpha, e]))
        .collect()
}

/// `(epsilon, eta_0_max, eta_0_max_positive)` for `epsilon` in `[from, to]`.
pub fn eta_0_max_curve(from: f64, to: f64, points: usize) -> Vec<[f64; 3]> {
    grid(from, to, points)
        .filter_map(|eps| {
            let (max, _) = bounds::eta_0_max(eps).ok()?;
            let positive = bounds::eta_0_max_positive(eps).ok()?;
            Some([eps, max, positive])
        })
        .collect()
}

/// `(eta, rho_approx(eta, alpha))` on an even grid.
pub fn rho_eta_curve(alpha: f64, from: f64, to: f64, points: usize) -> Vec<[f64; 2]> {
    grid(from, to, points)
        .filter_map(|eta| bounds::rho_approx(eta, alpha).ok().map(|r| [eta, r]))
        .collect()
}

/// `points` evenly spaced values from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, points: usize) -> impl Iterator<Item = f64> {
    let steps = points.saturating_sub(1).max(1) as f64;
    (0..points).map(move |i| {
        if i + 1 == points {
            to
        } else {
            from + (to - from) * (i as f64) / steps
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        let g: Vec<f64> = grid(1.0, 50.0, 50).collect();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[49], 50.0);
        assert_eq!(g[9], 10.0);
    }

    #[test]
    fn curves_have_expected_shapes() {
        assert_eq!(lower_bound_curve(1.0, 50.0, 50, 1e12).len(), 50);
        let c = eta_0_curve(0.05, 201);
        assert_eq!(c.len(), 201);
        assert!(c.iter().all(|p| p[1] >= -1e-12));
        let m = eta_0_max_curve(0.001, 0.5, 100);
        assert!(m.iter().all(|p| p[2] < p[1]));
        let r = rho_eta_curve(0.5, 0.0, 50.0, 101);
        assert_eq!(r[0], [0.0, 0.5]);
    }
}
