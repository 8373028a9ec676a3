//! Power unit conversions and the few transcendental helpers the crate needs.
//!
//! All transcendental functions go through `libm` so results are bit-identical
//! across platforms.

/// dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    libm::pow(10.0, dbm / 10.0)
}

/// Milliwatts to dBm. Zero maps to negative infinity.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * libm::log10(mw)
}

/// dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Linear power ratio to dB.
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * libm::log10(ratio)
}

/// `sin(x) / x` with the removable singularity filled in by its Taylor series
/// for `|x| < 1e-6`.
pub fn sinc(x: f64) -> f64 {
    if libm::fabs(x) < 1e-6 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        libm::sin(x) / x
    }
}
