//! Closed forms and bounds for `rho = rho(P, P')`.
//!
//! Notation, all over a workload's queries: `eta = sigma_L / sigma_I`,
//! `eta' = sigma_L' / sigma_I'`, `alpha = rho(L, I)`, `beta = rho(L, I')`,
//! `gamma = rho(I, I')`. When `L' = lambda * L`, `rho` is an exact function
//! of these five numbers ([`rho_closed_form`]). Everything else here is a
//! bound or limit of that function.

use crate::math;

/// Numerical stand-in for `eta' -> infinity`.
pub const ETA_PRIME_INFINITY: f64 = 1e12;

// |gamma - alpha*beta| at or below this is treated as zero.
const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("no interior stationary point (gamma = alpha * beta)")]
    NoStationaryPoint,
}

fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> BoundsError {
    BoundsError::OutOfRange {
        name,
        value,
        expected,
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), BoundsError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(out_of_range("epsilon", epsilon, "0 < epsilon < 1"))
    }
}

/// `rho = (eta*eta' + alpha*eta' + beta*eta + gamma)
///        / (sqrt(eta^2 + 2 alpha eta + 1) * sqrt(eta'^2 + 2 beta eta' + 1))`.
pub fn rho_closed_form(
    eta: f64,
    eta_prime: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<f64, BoundsError> {
    let left = eta * eta + 2.0 * alpha * eta + 1.0;
    let right = eta_prime * eta_prime + 2.0 * beta * eta_prime + 1.0;
    if !(left > 0.0 && right > 0.0) {
        return Err(BoundsError::ZeroDenominator);
    }
    let numerator = eta * eta_prime + alpha * eta_prime + beta * eta + gamma;
    Ok(numerator / (math::sqrt(left) * math::sqrt(right)))
}

/// Lower bound valid for any correlations: `rho >= f(eta, eta')`.
///
/// Evaluated as `((eta-1)/(eta+1)) * ((eta'-1)/(eta'+1)) - 2/((eta+1)(eta'+1))`,
/// which equals `(eta eta' - eta' - eta - 1) / ((eta+1)(eta'+1))` and stays
/// finite when either argument is infinite.
pub fn lower_bound_f(eta: f64, eta_prime: f64) -> f64 {
    let ratio = |x: f64| {
        if x.is_infinite() {
            1.0
        } else {
            (x - 1.0) / (x + 1.0)
        }
    };
    ratio(eta) * ratio(eta_prime) - 2.0 / ((eta + 1.0) * (eta_prime + 1.0))
}

/// Lower bound when `alpha, beta, gamma >= 0`: `g = eta/(eta+1) * eta'/(eta'+1)`.
pub fn lower_bound_g(eta: f64, eta_prime: f64) -> f64 {
    let share = |x: f64| if x == 0.0 { 0.0 } else { 1.0 / (1.0 + 1.0 / x) };
    share(eta) * share(eta_prime)
}

/// `rho` in the limit `eta' -> infinity`: `(eta + alpha) / sqrt(eta^2 + 2 alpha eta + 1)`.
///
/// Computed as `sign(x) / sqrt(1 + (1 - alpha^2) / x^2)` with `x = eta + alpha`;
/// every step is monotone, so the result is non-decreasing in `eta` in
/// floating point as well. `rho_approx(0, alpha)` is exactly `alpha`.
pub fn rho_approx(eta: f64, alpha: f64) -> Result<f64, BoundsError> {
    let denom = eta * eta + 2.0 * alpha * eta + 1.0;
    if !(denom > 0.0) {
        return Err(BoundsError::ZeroDenominator);
    }
    if eta == 0.0 {
        return Ok(alpha);
    }
    let x = eta + alpha;
    if x == 0.0 {
        return Ok(0.0);
    }
    let c = 1.0 - alpha * alpha;
    let magnitude = 1.0 / math::sqrt(1.0 + c / (x * x));
    Ok(if x > 0.0 { magnitude } else { -magnitude })
}

/// Smallest `eta` beyond which `rho_approx > 1 - epsilon`:
/// `sqrt((1 - alpha^2) / (1/(1-epsilon)^2 - 1)) - alpha`.
pub fn eta_0(alpha: f64, epsilon: f64) -> Result<f64, BoundsError> {
    check_epsilon(epsilon)?;
    if !(-1.0..=1.0 - epsilon).contains(&alpha) {
        return Err(out_of_range("alpha", alpha, "-1 <= alpha <= 1 - epsilon"));
    }
    let keep = 1.0 - epsilon;
    let k = 1.0 / (keep * keep) - 1.0;
    Ok(math::sqrt((1.0 - alpha * alpha) / k) - alpha)
}

// 1 - (1 - eps)^2 without cancellation.
fn spread(epsilon: f64) -> f64 {
    math::sqrt(epsilon * (2.0 - epsilon))
}

/// Maximum of [`eta_0`] over `alpha` in `[-1, 1]`, and the maximising `alpha`.
///
/// Returns `(1 / sqrt(1 - (1-eps)^2), -sqrt(1 - (1-eps)^2))`.
pub fn eta_0_max(epsilon: f64) -> Result<(f64, f64), BoundsError> {
    check_epsilon(epsilon)?;
    let s = spread(epsilon);
    Ok((1.0 / s, -s))
}

/// Maximum of [`eta_0`] over `alpha` in `[0, 1]` (attained at `alpha = 0`).
pub fn eta_0_max_positive(epsilon: f64) -> Result<f64, BoundsError> {
    check_epsilon(epsilon)?;
    Ok((1.0 - epsilon) / spread(epsilon))
}

/// `A = 1/sqrt(eta^2 + 2 alpha eta + 1)`, `B = eta + alpha`, `C = beta eta + gamma`,
/// so that `rho(eta') = A (B eta' + C) / sqrt(eta'^2 + 2 beta eta' + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BoundTerms {
    pub fn new(eta: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self, BoundsError> {
        let w = eta * eta + 2.0 * alpha * eta + 1.0;
        if !(w > 0.0) {
            return Err(BoundsError::ZeroDenominator);
        }
        Ok(BoundTerms {
            a: 1.0 / math::sqrt(w),
            b: eta + alpha,
            c: beta * eta + gamma,
        })
    }
}

/// Stationary point of `rho` as a function of `eta'`:
/// `((1 - beta^2) eta + (alpha - beta gamma)) / (gamma - alpha beta)`.
pub fn eta_prime_0(eta: f64, alpha: f64, beta: f64, gamma: f64) -> Result<f64, BoundsError> {
    if !(eta + alpha > 0.0) {
        return Err(out_of_range("eta + alpha", eta + alpha, "eta + alpha > 0"));
    }
    let denom = gamma - alpha * beta;
    if math::abs(denom) <= SINGULAR_TOLERANCE {
        return Err(BoundsError::NoStationaryPoint);
    }
    Ok(((1.0 - beta * beta) * eta + (alpha - beta * gamma)) / denom)
}

/// Value of `rho` at the stationary point `eta'_0`:
/// `sqrt(((eta+alpha)^2 + (gamma - alpha beta)^2 / (1 - beta^2)) / ((eta+alpha)^2 + 1 - alpha^2))`.
///
/// This is the largest value `rho(eta')` takes over all real `eta'` when
/// `gamma > alpha beta`. Otherwise it is `|rho|` at a minimum.
pub fn rho_at_stationary(eta: f64, alpha: f64, beta: f64, gamma: f64) -> Result<f64, BoundsError> {
    if !(math::abs(beta) < 1.0) {
        return Err(out_of_range("beta", beta, "|beta| < 1"));
    }
    let b = eta + alpha;
    let w = b * b + 1.0 - alpha * alpha;
    if !(w > 0.0) {
        return Err(BoundsError::ZeroDenominator);
    }
    let skew = gamma - alpha * beta;
    Ok(math::sqrt((b * b + skew * skew / (1.0 - beta * beta)) / w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stationary {
    Maximum,
    Minimum,
}

/// Range of `rho` over `eta' in [0, inf)` for fixed `eta, alpha, beta, gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RhoExtrema {
    /// Stationary point over the reals; `None` when `gamma = alpha beta` and `rho` is monotone.
    pub eta_prime_0: Option<f64>,
    /// Maximum when `gamma > alpha beta`, minimum when `gamma < alpha beta`.
    pub stationary: Option<Stationary>,
    /// `A C`.
    pub rho_at_0: f64,
    /// `A B`.
    pub rho_at_inf: f64,
    /// Supremum over `eta' >= 0`.
    pub rho_max: f64,
    /// Infimum over `eta' >= 0`.
    pub rho_min: f64,
}

/// Extremes of `rho(eta')` over `eta' >= 0`; requires `eta >= 1` and `0 < beta, gamma < 1`.
///
/// `d rho / d eta'` has the sign of
/// `(alpha beta - gamma) eta' + (1 - beta^2) eta + alpha - beta gamma`,
/// which is linear in `eta'`. So the single stationary
/// point is a maximum exactly when `gamma > alpha beta`; then
/// `rho_max = `[`rho_at_stationary`] if `eta'_0 >= 0`. When `gamma < alpha beta`
/// the stationary point is a minimum (at negative `eta'` for `eta >= 1`) and
/// `rho` rises from `rho(0)` to `rho(inf)`. In every case `rho_min` is one
/// of the endpoint values.
pub fn rho_extrema_in_eta_prime(
    eta: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<RhoExtrema, BoundsError> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(out_of_range("eta", eta, "eta >= 1"));
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(out_of_range("alpha", alpha, "-1 <= alpha <= 1"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(out_of_range("beta", beta, "0 < beta < 1"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(out_of_range("gamma", gamma, "0 < gamma < 1"));
    }
    let terms = BoundTerms::new(eta, alpha, beta, gamma)?;
    let rho_at_0 = terms.a * terms.c;
    let rho_at_inf = terms.a * terms.b;
    let mut rho_max = rho_at_0.max(rho_at_inf);
    let mut rho_min = rho_at_0.min(rho_at_inf);

    let (eta_prime_0, stationary) = match eta_prime_0(eta, alpha, beta, gamma) {
        Ok(e0) => {
            let kind = if gamma > alpha * beta {
                Stationary::Maximum
            } else {
                Stationary::Minimum
            };
            if e0 >= 0.0 {
                match kind {
                    Stationary::Maximum => {
                        rho_max = rho_at_stationary(eta, alpha, beta, gamma)?.max(rho_max)
                    }
                    Stationary::Minimum => {
                        rho_min = rho_closed_form(eta, e0, alpha, beta, gamma)?.min(rho_min)
                    }
                }
            }
            (Some(e0), Some(kind))
        }
        Err(BoundsError::NoStationaryPoint) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(RhoExtrema {
        eta_prime_0,
        stationary,
        rho_at_0,
        rho_at_inf,
        rho_max,
        rho_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn closed_form_reductions() {
        assert_eq!(rho_closed_form(0.0, 0.0, 0.3, -0.2, 0.42).unwrap(), 0.42);
        for eta in [0.5, 2.0, 10.0] {
            let r = rho_closed_form(eta, eta, 0.0, 0.0, 0.0).unwrap();
            assert!(close(r, eta * eta / (eta * eta + 1.0), 1e-15));
        }
        let r = rho_closed_form(1e9, 1e9, 0.0, 0.0, 0.0).unwrap();
        assert!(close(r, 1.0, 1e-12));
        assert_eq!(
            rho_closed_form(1.0, 1.0, -1.0, 0.0, 0.0),
            Err(BoundsError::ZeroDenominator)
        );
    }

    #[test]
    fn f_and_g_values() {
        // Limit forms: (eta-1)/(eta+1) and eta/(eta+1).
        let inf = ETA_PRIME_INFINITY;
        assert!(close(lower_bound_f(10.0, inf), 9.0 / 11.0, 1e-11));
        assert!(close(lower_bound_g(10.0, inf), 10.0 / 11.0, 1e-11));
        assert!(close(lower_bound_f(18.8, inf), 17.8 / 19.8, 1e-11));
        assert!(close(lower_bound_g(18.8, inf), 18.8 / 19.8, 1e-11));
        assert_eq!(lower_bound_f(0.0, 0.0), -1.0);
        assert_eq!(lower_bound_g(0.0, 0.0), 0.0);
        assert!(close(lower_bound_f(10.0, f64::INFINITY), 9.0 / 11.0, 1e-15));
        assert_eq!(lower_bound_g(f64::INFINITY, f64::INFINITY), 1.0);
    }

    #[test]
    fn f_matches_textbook_form() {
        for &(e, ep) in &[(0.0, 0.0), (0.5, 3.0), (2.0, 7.0), (40.0, 1e4), (1.0, 1.0)] {
            let direct = (e * ep - ep - e - 1.0) / ((e + 1.0) * (ep + 1.0));
            assert!(close(lower_bound_f(e, ep), direct, 1e-14), "{e} {ep}");
        }
    }

    #[test]
    fn g_exceeds_f_by_the_gap() {
        for &(e, ep) in &[(0.0, 0.0), (0.3, 9.0), (5.0, 2.0), (100.0, 100.0)] {
            let gap = (e + ep + 1.0) / ((e + 1.0) * (ep + 1.0));
            assert!(close(lower_bound_g(e, ep) - lower_bound_f(e, ep), gap, 1e-14));
            assert!(lower_bound_g(e, ep) > lower_bound_f(e, ep));
        }
    }

    #[test]
    fn rho_approx_examples() {
        assert_eq!(rho_approx(0.0, 0.37).unwrap(), 0.37);
        for alpha in [-0.9, 0.0, 0.6] {
            assert!(close(rho_approx(1e9, alpha).unwrap(), 1.0, 1e-8));
        }
        assert!(close(rho_approx(1.0, 0.0).unwrap(), core::f64::consts::FRAC_1_SQRT_2, 1e-15));
        assert_eq!(rho_approx(1.0, -1.0), Err(BoundsError::ZeroDenominator));
        // alpha = -1 is a step from -1 to 1 at eta = 1.
        assert_eq!(rho_approx(0.5, -1.0).unwrap(), -1.0);
        assert_eq!(rho_approx(2.0, -1.0).unwrap(), 1.0);
    }

    #[test]
    fn eta_0_examples() {
        // alpha = 0: (1 - eps) / sqrt(1 - (1 - eps)^2).
        let expected = 0.95 / (1.0_f64 - 0.95 * 0.95).sqrt();
        let got = eta_0(0.0, 0.05).unwrap();
        assert!(close(got, expected, 1e-12));
        assert!(close(got, 3.0424, 5e-4));
        assert!(close(got, eta_0_max_positive(0.05).unwrap(), 1e-12));

        let boundary = eta_0(0.95, 0.05).unwrap();
        assert!(close(rho_approx(boundary, 0.95).unwrap(), 0.95, 1e-9));

        let near_max = eta_0(-0.31, 0.05).unwrap();
        assert!(close(near_max, 3.2, 0.01), "{near_max}");

        assert!(eta_0(0.96, 0.05).is_err());
        assert!(eta_0(0.0, 0.0).is_err());
        assert!(eta_0(-1.1, 0.5).is_err());
    }

    #[test]
    fn eta_0_max_examples() {
        let (m, a) = eta_0_max(0.05).unwrap();
        assert!(close(m, 3.2, 0.05) && close(a, -0.31, 0.05), "{m} {a}");
        let (m, a) = eta_0_max(0.01).unwrap();
        assert!(close(m, 7.1, 0.05) && close(a, -0.14, 0.05), "{m} {a}");
        let (m, _) = eta_0_max(1.0 - 1e-9).unwrap();
        assert!(close(m, 1.0, 1e-6));
        assert!(eta_0_max(1.0).is_err());
        // Value at the analytic argmax equals the maximum.
        for eps in [0.01, 0.05, 0.2, 0.5] {
            let (m, a) = eta_0_max(eps).unwrap();
            assert!(close(eta_0(a, eps).unwrap(), m, 1e-9));
        }
    }

    #[test]
    fn eta_prime_0_examples() {
        // ((1 - 0.09) * 2 + (0.5 - 0.18)) / (0.6 - 0.15) = 2.14 / 0.45.
        let v = eta_prime_0(2.0, 0.5, 0.3, 0.6).unwrap();
        assert!(close(v, 2.14 / 0.45, 1e-12));
        assert!(close(v, 4.756, 1e-3));
        let h = 1e-4 * v;
        let slope = (rho_closed_form(2.0, v + h, 0.5, 0.3, 0.6).unwrap()
            - rho_closed_form(2.0, v - h, 0.5, 0.3, 0.6).unwrap())
            / (2.0 * h);
        assert!(slope.abs() < 1e-6, "{slope}");

        assert!(close(eta_prime_0(3.0, 0.2, 0.0, 0.4).unwrap(), 3.2 / 0.4, 1e-12));
        assert_eq!(
            eta_prime_0(2.0, 0.5, 0.4, 0.2),
            Err(BoundsError::NoStationaryPoint)
        );
    }

    #[test]
    fn extrema_symmetric_case() {
        // alpha = beta = gamma = a, eta = 1: A = 1/sqrt(2 + 2a), B = 1 + a, C = 2a.
        for a in [0.1, 0.5, 0.9] {
            let x = rho_extrema_in_eta_prime(1.0, a, a, a).unwrap();
            let norm = (2.0 + 2.0 * a).sqrt();
            assert!(close(x.rho_at_0, 2.0 * a / norm, 1e-14));
            assert!(close(x.rho_at_inf, (1.0 + a) / norm, 1e-14));
            assert_eq!(x.rho_min, x.rho_at_0);
            assert!(x.rho_max >= x.rho_at_inf);
        }
    }

    #[test]
    fn extrema_preconditions() {
        assert!(rho_extrema_in_eta_prime(0.5, 0.1, 0.5, 0.5).is_err());
        assert!(rho_extrema_in_eta_prime(2.0, 0.1, 0.0, 0.5).is_err());
        assert!(rho_extrema_in_eta_prime(2.0, 0.1, 0.5, 1.0).is_err());
        // gamma = alpha beta: monotone, supremum at infinity.
        let x = rho_extrema_in_eta_prime(2.0, 0.5, 0.4, 0.2).unwrap();
        assert_eq!(x.eta_prime_0, None);
        assert!(close(x.rho_max, x.rho_at_inf, 1e-15));
    }

    #[test]
    fn extrema_with_interior_maximum() {
        let (eta, a, b, g) = (2.0, 0.5, 0.3, 0.6);
        let x = rho_extrema_in_eta_prime(eta, a, b, g).unwrap();
        assert_eq!(x.stationary, Some(Stationary::Maximum));
        let e0 = x.eta_prime_0.unwrap();
        let direct = rho_closed_form(eta, e0, a, b, g).unwrap();
        assert!(close(x.rho_max, direct, 1e-14));
        assert!(x.rho_max >= x.rho_at_0 && x.rho_max >= x.rho_at_inf);
    }

    #[test]
    fn extrema_when_stationary_point_is_a_minimum() {
        // Feasible: det = 1 + 2(0.8)(0.8)(0.5) - 0.64 - 0.64 - 0.25 = 0.11 > 0.
        let (eta, a, b, g) = (2.0, 0.8, 0.8, 0.5);
        let x = rho_extrema_in_eta_prime(eta, a, b, g).unwrap();
        assert_eq!(x.stationary, Some(Stationary::Minimum));
        let e0 = x.eta_prime_0.unwrap();
        assert!(e0 < 0.0);
        // rho rises over eta' >= 0, so the supremum is the limit, not rho(eta'_0).
        assert_eq!(x.rho_max, x.rho_at_inf);
        assert_eq!(x.rho_min, x.rho_at_0);
        let at_e0 = rho_closed_form(eta, e0, a, b, g).unwrap();
        assert!(at_e0 < x.rho_at_0);
    }
}
