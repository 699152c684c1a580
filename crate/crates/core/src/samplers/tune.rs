use crate::error::{invalid, Result};

/// Step size and iteration count that make the non-asymptotic bound in the
/// strongly convex case at most `eps`:
///
/// `γ = min(1/L, λ_F ε / (2C))`,
/// `k = ⌈max(L/λ_F, 2C/(λ_F² ε)) · ln(2 W0² / ε)⌉` (0 if the bound is not
/// positive).
pub fn tune_for_epsilon(
    eps: f64,
    l: f64,
    lambda_f: f64,
    c: f64,
    w0_sq: f64,
) -> Result<(f64, usize)> {
    if !(lambda_f > 0.0) {
        return invalid(format!(
            "strong convexity λ_F must be positive, got {lambda_f}"
        ));
    }
    if !(eps > 0.0) || !(c > 0.0) {
        return invalid("eps and C must be positive");
    }
    if !(l >= 0.0) || !(w0_sq >= 0.0) {
        return invalid("L and W0² must be nonnegative");
    }
    let gamma = (1.0 / l).min(lambda_f * eps / (2.0 * c));
    let rate = (l / lambda_f).max(2.0 * c / (lambda_f * lambda_f * eps));
    let bound = rate * (2.0 * w0_sq / eps).ln();
    let k = if bound > 0.0 {
        bound.ceil() as usize
    } else {
        0
    };
    Ok((gamma, k))
}
