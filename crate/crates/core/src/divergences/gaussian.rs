use crate::error::{invalid, Error, Result};
use crate::math::{self, fabs};
use crate::models::GaussianLaw;

/// `KL(p ‖ q) = ½[tr(Σ_q⁻¹Σ_p) + Δᵀ Σ_q⁻¹ Δ - k + ln det Σ_q - ln det Σ_p]`.
pub fn gaussian_kl(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    let k = p.dim();
    if q.dim() != k {
        return Err(Error::ShapeMismatch(alloc::format!("dimensions {k} and {}", q.dim())));
    }
    let precision = q.precision();
    let mut trace = 0.0;
    for r in 0..k {
        for c in 0..k {
            trace += precision[r * k + c] * p.covariance()[c * k + r];
        }
    }
    let delta: alloc::vec::Vec<f64> = q.mean().iter().zip(p.mean()).map(|(a, b)| a - b).collect();
    let quad = q.precision_form(&delta);
    // ln det Σ_q - ln det Σ_p and tr - k are each O(h) for nearby laws; the
    // sum is formed last to keep their cancellation explicit.
    let value = 0.5 * ((trace - k as f64) + quad + (q.log_det() - p.log_det()));
    Ok(value.max(0.0))
}

/// Rényi-type divergence `D_α(p ‖ q) = ∫ (p/q)^α dq = exp(α(α-1)/2 · Δᵀ Σ⁻¹ Δ)`
/// for laws sharing a covariance.
pub fn gaussian_renyi_d(p: &GaussianLaw, q: &GaussianLaw, alpha: f64) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(alloc::format!("dimensions {} and {}", p.dim(), q.dim())));
    }
    if !alpha.is_finite() {
        return Err(invalid("alpha", "must be finite"));
    }
    let same = p
        .covariance()
        .iter()
        .zip(q.covariance())
        .all(|(&a, &b)| fabs(a - b) <= 1e-12 * (1.0 + fabs(a).max(fabs(b))));
    if !same {
        return Err(invalid("covariance", "the closed form needs equal covariances"));
    }
    let delta: alloc::vec::Vec<f64> = p.mean().iter().zip(q.mean()).map(|(a, b)| a - b).collect();
    Ok(math::exp(0.5 * alpha * (alpha - 1.0) * q.precision_form(&delta)))
}
