//! Standard-normal helpers shared by the mortality laws and the copulas.

use statrs::function::erf;

/// Standard normal density φ(z).
pub fn norm_pdf(z: f64) -> f64 {
    (-(z * z) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal distribution function Φ(z).
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1); returns ∓∞ at the ends.
///
/// The library inverse is only good to ~1e-10, which is visible when
/// quantiles feed second differences; one Halley step against the erfc-based
/// Φ polishes it to full double precision.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let z = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    let density = norm_pdf(z);
    if density > 1e-300 {
        let r = (norm_cdf(z) - p) / density;
        z - r / (1.0 + 0.5 * r * z)
    } else {
        z
    }
}
