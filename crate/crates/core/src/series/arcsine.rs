//! Arcsine law of the last zero of Brownian motion before time 1.

use std::f64::consts::PI;

/// Density `1/(π sqrt(y(1-y)))` on the open unit interval, 0 elsewhere.
pub fn arcsine_density(y: f64) -> f64 {
    if !(y > 0.0 && y < 1.0) {
        return 0.0;
    }
    1.0 / (PI * (y * (1.0 - y)).sqrt())
}

/// Distribution function `(2/π) asin(sqrt(y))`, extended by 0 and 1 outside
/// the unit interval.
pub fn arcsine_cdf(y: f64) -> f64 {
    if y.is_nan() || y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    (2.0 / PI) * y.sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetry_and_endpoints() {
        assert_abs_diff_eq!(arcsine_cdf(0.5), 0.5, epsilon = 1e-15);
        assert_eq!(arcsine_cdf(1.0), 1.0);
        assert_eq!(arcsine_cdf(0.0), 0.0);
        assert_eq!(arcsine_density(-0.2), 0.0);
        assert_eq!(arcsine_density(1.3), 0.0);
    }

    #[test]
    fn cdf_matches_density_quadrature() {
        // integrate the density with the singularity-removing substitution
        // y = sin^2 phi up to y0 = 0.25
        let gl = crate::quad::GaussLegendre::cached(64);
        let phi0 = 0.25f64.sqrt().asin();
        let quad = gl.integrate(0.0, phi0, |phi| {
            arcsine_density(phi.sin() * phi.sin()) * 2.0 * phi.sin() * phi.cos()
        });
        assert_abs_diff_eq!(quad, arcsine_cdf(0.25), epsilon = 1e-10);
    }
}
