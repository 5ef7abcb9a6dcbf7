//! Conversion between laboratory quantities and the dimensionless
//! parameters of the scaled Gross-Pitaevskii equation.
//!
//! Lengths are measured in the oscillator length `a0 = sqrt(hbar / (m nu))`
//! of the radial trap, times in `1/nu`, and the interaction strength is
//! `Q = 8 pi |a| N / a0` for a negative scattering length `a`.

use std::f64::consts::PI;

use crate::error::{domain, GpeError, Result};

/// Reduced Planck constant, CODATA 2018 (exact since the 2019 SI redefinition
/// of h), in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit, CODATA 2018, in kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Relative atomic mass of lithium-7 (AME 2016: 7.016 003 44 u).
pub const LITHIUM7_MASS_U: f64 = 7.016_003;

/// Lithium-7 mass in kg.
pub const LITHIUM7_MASS: f64 = LITHIUM7_MASS_U * ATOMIC_MASS_UNIT;

/// Scattering length of lithium-7 used for the cigar-trap estimates, in m.
pub const LITHIUM7_SCATTERING_LENGTH: f64 = -14.5e-10;

/// Radial trap frequency of the lithium experiments, in Hz.
pub const LITHIUM7_TRAP_FREQUENCY_HZ: f64 = 150.0;

/// How a trap frequency quoted in Hz enters `a0 = sqrt(hbar / (m nu))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    /// `nu` is converted to the angular frequency `2 pi nu`.
    #[default]
    Angular,
    /// `nu` is used as given.
    Linear,
}

impl FrequencyConvention {
    /// Angular frequency (rad/s) used in the oscillator length.
    pub fn angular_frequency(self, nu_hz: f64) -> f64 {
        match self {
            Self::Angular => 2.0 * PI * nu_hz,
            Self::Linear => nu_hz,
        }
    }
}

impl std::str::FromStr for FrequencyConvention {
    type Err = GpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angular" => Ok(Self::Angular),
            "linear" => Ok(Self::Linear),
            other => domain(format!(
                "unknown frequency convention `{other}` (expected angular|linear)"
            )),
        }
    }
}

impl std::fmt::Display for FrequencyConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Angular => "angular",
            Self::Linear => "linear",
        })
    }
}

/// Laboratory parameters of a condensate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Scattering length in meters, negative for attractive interactions.
    pub scattering_length_a: f64,
    /// Atomic mass in kg.
    pub atom_mass_m: f64,
    /// Radial trap angular frequency in rad/s.
    pub radial_frequency_nu: f64,
    pub particle_number_n: f64,
    /// Axial-to-radial frequency ratio.
    pub lambda_z: f64,
}

impl PhysicalParams {
    /// The lithium-7 cigar trap: `a = -14.5 A`, `nu = 150 Hz`.
    pub fn lithium7(particle_number_n: f64, convention: FrequencyConvention) -> Self {
        Self {
            scattering_length_a: LITHIUM7_SCATTERING_LENGTH,
            atom_mass_m: LITHIUM7_MASS,
            radial_frequency_nu: convention.angular_frequency(LITHIUM7_TRAP_FREQUENCY_HZ),
            particle_number_n,
            lambda_z: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.atom_mass_m > 0.0) {
            return domain(format!("atom mass must be positive, got {}", self.atom_mass_m));
        }
        if !(self.radial_frequency_nu > 0.0) {
            return domain(format!(
                "radial frequency must be positive, got {}",
                self.radial_frequency_nu
            ));
        }
        if !(self.particle_number_n >= 0.0) || !self.particle_number_n.is_finite() {
            return domain(format!(
                "particle number must be non-negative, got {}",
                self.particle_number_n
            ));
        }
        if !(self.lambda_z >= 0.0) {
            return domain(format!("lambda_z must be non-negative, got {}", self.lambda_z));
        }
        Ok(())
    }
}

/// Dimensionless parameters of the scaled equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub q: f64,
    pub lambda_z: f64,
    /// Oscillator length in meters.
    pub a0: f64,
}

/// `sqrt(hbar / (m nu))` in meters.
pub fn oscillator_length(p: &PhysicalParams) -> Result<f64> {
    if !(p.atom_mass_m > 0.0) || !(p.radial_frequency_nu > 0.0) {
        return domain(format!(
            "oscillator length needs m > 0 and nu > 0 (got m = {}, nu = {})",
            p.atom_mass_m, p.radial_frequency_nu
        ));
    }
    Ok((HBAR / (p.atom_mass_m * p.radial_frequency_nu)).sqrt())
}

fn require_attractive(a: f64) -> Result<()> {
    if a < 0.0 {
        Ok(())
    } else {
        Err(GpeError::UnsupportedRegime(format!(
            "scattering length {a} m is not negative; only attractive condensates are modeled"
        )))
    }
}

/// `Q = 8 pi |a| N / a0`.
pub fn q_from_n(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    require_attractive(p.scattering_length_a)?;
    let a0 = oscillator_length(p)?;
    Ok(8.0 * PI * p.scattering_length_a.abs() * p.particle_number_n / a0)
}

/// Inverse of [`q_from_n`]: the particle number for interaction strength `q`.
/// `particle_number_n` of `p` is ignored.
pub fn n_from_q(p: &PhysicalParams, q: f64) -> Result<f64> {
    require_attractive(p.scattering_length_a)?;
    if !(q >= 0.0) {
        return domain(format!("Q must be non-negative, got {q}"));
    }
    let a0 = oscillator_length(p)?;
    Ok(q * a0 / (8.0 * PI * p.scattering_length_a.abs()))
}

pub fn dimensionless(p: &PhysicalParams) -> Result<DimensionlessParams> {
    Ok(DimensionlessParams {
        q: q_from_n(p)?,
        lambda_z: p.lambda_z,
        a0: oscillator_length(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn li7(n: f64) -> PhysicalParams {
        PhysicalParams::lithium7(n, FrequencyConvention::Angular)
    }

    #[test]
    fn lithium_oscillator_length_is_about_three_microns() {
        let a0 = oscillator_length(&li7(1.0)).unwrap();
        assert!((2.8e-6..3.3e-6).contains(&a0), "a0 = {a0}");
        let linear = oscillator_length(&PhysicalParams::lithium7(1.0, FrequencyConvention::Linear))
            .unwrap();
        assert!((linear / a0 - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillator_length_scaling() {
        let p = li7(1.0);
        let a0 = oscillator_length(&p).unwrap();
        let heavy = PhysicalParams { atom_mass_m: 4.0 * p.atom_mass_m, ..p };
        assert!((oscillator_length(&heavy).unwrap() - a0 / 2.0).abs() < 1e-18);

        let unit = PhysicalParams {
            atom_mass_m: HBAR / 250.0,
            radial_frequency_nu: 250.0,
            ..p
        };
        assert!((oscillator_length(&unit).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_positive_mass_or_frequency_is_rejected() {
        let p = li7(1.0);
        assert!(oscillator_length(&PhysicalParams { atom_mass_m: 0.0, ..p }).is_err());
        assert!(oscillator_length(&PhysicalParams { radial_frequency_nu: -1.0, ..p }).is_err());
    }

    #[test]
    fn particle_numbers_for_quoted_q() {
        let p = li7(0.0);
        let n10 = n_from_q(&p, 10.0).unwrap();
        let n17 = n_from_q(&p, 17.0).unwrap();
        assert!((800.0..=1000.0).contains(&n10), "N(10) = {n10}");
        assert!((1350.0..=1650.0).contains(&n17), "N(17) = {n17}");
        assert_eq!(q_from_n(&p).unwrap(), 0.0);
    }

    #[test]
    fn repulsive_scattering_length_is_unsupported() {
        let p = PhysicalParams { scattering_length_a: 5e-9, ..li7(100.0) };
        assert!(matches!(q_from_n(&p), Err(GpeError::UnsupportedRegime(_))));
        assert!(matches!(n_from_q(&p, 1.0), Err(GpeError::UnsupportedRegime(_))));
    }

    #[test]
    fn q_is_linear_in_n_and_a() {
        let p = li7(500.0);
        let q = q_from_n(&p).unwrap();
        let p2 = PhysicalParams {
            particle_number_n: 1000.0,
            scattering_length_a: 3.0 * p.scattering_length_a,
            ..p
        };
        assert!((q_from_n(&p2).unwrap() / q - 6.0).abs() < 1e-12);
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("linear".parse::<FrequencyConvention>().unwrap(), FrequencyConvention::Linear);
        assert!("hz".parse::<FrequencyConvention>().is_err());
    }
}
