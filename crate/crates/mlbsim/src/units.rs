//! Decibel and power-unit conversions used throughout the radio model.
//!
//! All link-budget arithmetic is done in dB/dBm and converted to linear
//! milliwatts only where powers have to be summed.

/// Converts a dB ratio to a linear ratio.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to dB. Zero and negative inputs map to `-inf`/NaN
/// just as `log10` does; callers guard against them where it matters.
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Converts a dBm power level to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_lin(dbm)
}

/// Converts a milliwatt power to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    lin_to_db(mw)
}

/// Converts a speed in km/h to m/s.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}
