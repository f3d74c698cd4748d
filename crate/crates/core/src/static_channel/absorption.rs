use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency-dependent absorption along a path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbsorptionLaw {
    /// Thorp's empirical seawater formula.
    #[default]
    Thorp,
    /// Lossless medium; path gains become flat in frequency.
    None,
}

impl AbsorptionLaw {
    pub fn db_per_km(self, f_hz: f64) -> Result<f64> {
        match self {
            AbsorptionLaw::Thorp => absorption_db_per_km(f_hz),
            AbsorptionLaw::None => {
                check_frequency(f_hz)?;
                Ok(0.0)
            }
        }
    }

    /// Natural log of the per-meter linear power absorption factor `a(f)`.
    pub(crate) fn ln_factor_per_m(self, f_hz: f64) -> Result<f64> {
        Ok(self.db_per_km(f_hz)? * 1e-3 * std::f64::consts::LN_10 / 10.0)
    }
}

fn check_frequency(f_hz: f64) -> Result<()> {
    if f_hz >= 0.0 && f_hz.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("frequency", f_hz, ">= 0 Hz"))
    }
}

/// Thorp's absorption coefficient in dB/km for a frequency in Hz.
pub fn absorption_db_per_km(f_hz: f64) -> Result<f64> {
    check_frequency(f_hz)?;
    let f2 = (f_hz * 1e-3).powi(2);
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thorp_reference_values() {
        assert_relative_eq!(absorption_db_per_km(0.0).unwrap(), 0.003, epsilon = 1e-15);
        // 0.108911 + 1.047619 + 0.0275 + 0.003
        assert_relative_eq!(absorption_db_per_km(10e3).unwrap(), 1.18703, epsilon = 1e-5);
        assert!(absorption_db_per_km(128e3).unwrap() > absorption_db_per_km(1e3).unwrap());
    }

    #[test]
    fn thorp_is_monotone_over_band() {
        let mut prev = 0.0;
        for i in 0..=1280 {
            let a = absorption_db_per_km(i as f64 * 100.0).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn negative_frequency_rejected() {
        assert!(matches!(absorption_db_per_km(-1.0), Err(Error::Domain { .. })));
        assert!(AbsorptionLaw::None.db_per_km(-1.0).is_err());
        assert_eq!(AbsorptionLaw::None.db_per_km(5e4).unwrap(), 0.0);
    }
}
