//! Laplace transforms of the hitting time `ξ` and of the random series
//! `λ(r)`, in closed form.

use crate::error::Result;
use crate::Error;

/// `E[exp(-lam ξ)] = sqrt(2 lam) / sinh(sqrt(2 lam))`, with the removable
/// singularity at 0 filled in.
pub fn xi_laplace(lam: f64) -> Result<f64> {
    if lam.is_nan() || lam < 0.0 {
        return Err(Error::domain(format!(
            "xi_laplace requires lam >= 0, got {lam}"
        )));
    }
    let z = (2.0 * lam).sqrt();
    if z < 1e-8 {
        // z/sinh z = 1 - z^2/6 + 7 z^4/360 - ...
        return Ok(1.0 - z * z / 6.0);
    }
    if z > 30.0 {
        // z/sinh z = 2 z e^{-z} / (1 - e^{-2z})
        let e = (-z).exp();
        return Ok(2.0 * z * e / (1.0 - e * e));
    }
    Ok(z / z.sinh())
}

/// `E[exp(-mu λ(r))]` for the conditional inverse-local-time series.
///
/// Evaluated in log space once the hyperbolic argument is large, so the
/// underflow regime returns a clean 0 instead of NaN from `inf/inf`.
pub fn lambda_laplace(mu: f64, r: f64) -> Result<f64> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::domain(format!(
            "lambda_laplace requires mu >= 0, got {mu}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!(
            "lambda_laplace requires r > 0, got {r}"
        )));
    }
    if mu == 0.0 {
        return Ok(1.0);
    }
    let s = (2.0 * mu).sqrt();
    let z = r * s;
    if z < 1e-6 {
        // sinh z ~ z, coth z ~ 1/z + z/3: value ~ e^{1/r} e^{-1/r - s^2 r/3}
        return Ok((-2.0 * mu * r / 3.0).exp());
    }
    // log of  r^2 e^{1/r} * 2 mu / sinh^2(z) * exp(-s coth z)
    let log_sinh = if z > 20.0 {
        z - std::f64::consts::LN_2 + (-(-2.0 * z).exp()).ln_1p()
    } else {
        z.sinh().ln()
    };
    let coth = if z > 20.0 {
        1.0
    } else {
        z.cosh() / z.sinh()
    };
    let log_val = 2.0 * r.ln() + 1.0 / r + (2.0 * mu).ln() - 2.0 * log_sinh - s * coth;
    Ok(log_val.exp())
}
