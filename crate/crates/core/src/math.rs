// Scalar float functions for no_std builds.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub(crate) fn pow10(x: f64) -> f64 {
    libm::pow(10.0, x)
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_phase(phi: f64) -> f64 {
    use core::f64::consts::PI;
    let mut r = libm::remainder(phi, 2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}
