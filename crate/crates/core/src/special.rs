//! Error function and its inverse.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Inverse error function on `(-1, 1)`.
///
/// Starts from a rational approximation (Giles, single precision) and
/// polishes with Newton steps until `|erf(y) - x| <= 1e-12`.
pub fn inv_erf(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("inv_erf requires |x| < 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut y = initial_guess(x);
    let slope = 2.0 / PI.sqrt();
    for _ in 0..60 {
        let r = erf(y) - x;
        if r.abs() <= 1e-12 {
            // one more step tightens the last few bits
            let step = r / (slope * (-y * y).exp());
            if step.is_finite() {
                y -= step;
            }
            break;
        }
        let step = r / (slope * (-y * y).exp());
        if !step.is_finite() {
            break;
        }
        y -= step;
    }
    Ok(y)
}

fn initial_guess(x: f64) -> f64 {
    let w = -((1.0 - x) * (1.0 + x)).ln();
    let p = if w < 5.0 {
        let w = w - 2.5;
        let mut p = 2.810_226_36e-08;
        p = 3.432_739_39e-07 + p * w;
        p = -3.523_387_7e-06 + p * w;
        p = -4.391_506_54e-06 + p * w;
        p = 0.000_218_580_87 + p * w;
        p = -0.001_253_725_03 + p * w;
        p = -0.004_177_681_64 + p * w;
        p = 0.246_640_727 + p * w;
        1.501_409_41 + p * w
    } else {
        let w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        p = 0.000_100_950_558 + p * w;
        p = 0.001_349_343_22 + p * w;
        p = -0.003_673_428_44 + p * w;
        p = 0.005_739_507_73 + p * w;
        p = -0.007_622_461_3 + p * w;
        p = 0.009_438_870_47 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    };
    p * x
}

/// Standard normal quantile `sqrt(2) * erf^-1(2p - 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    Ok(std::f64::consts::SQRT_2 * inv_erf(2.0 * p - 1.0)?)
}
