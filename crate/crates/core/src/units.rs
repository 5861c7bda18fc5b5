//! Unit-suffixed scalar parsing. Everything is converted to SI at parse time.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Pressure,
    Density,
    Length,
    Time,
    Frequency,
    Velocity,
    Impedance,
    Force,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Pressure => "pressure",
            Dimension::Density => "density",
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Frequency => "frequency",
            Dimension::Velocity => "velocity",
            Dimension::Impedance => "impedance",
            Dimension::Force => "force",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("cannot parse number in `{0}`")]
    BadNumber(String),
    #[error("`{value}` needs a {dim} unit suffix")]
    MissingUnit { value: String, dim: Dimension },
    #[error("unit `{unit}` is not a {dim} unit")]
    WrongUnit { unit: String, dim: Dimension },
}

fn scale(unit: &str, dim: Dimension) -> Option<f64> {
    use Dimension::*;
    let s = match (dim, unit) {
        (Pressure, "Pa") => 1.0,
        (Pressure, "kPa") => 1e3,
        (Pressure, "MPa") => 1e6,
        (Pressure, "GPa") => 1e9,
        (Density, "kg/m3" | "kg/m^3") => 1.0,
        (Density, "g/cm3" | "g/cm^3") => 1e3,
        (Length, "m") => 1.0,
        (Length, "km") => 1e3,
        (Length, "cm") => 1e-2,
        (Length, "mm") => 1e-3,
        (Time, "s") => 1.0,
        (Time, "ms") => 1e-3,
        (Time, "us") => 1e-6,
        (Frequency, "Hz") => 1.0,
        (Frequency, "kHz") => 1e3,
        (Frequency, "MHz") => 1e6,
        (Velocity, "m/s") => 1.0,
        (Velocity, "km/s") => 1e3,
        (Impedance, "Pa*s/m" | "Pa.s/m") => 1.0,
        (Impedance, "GPa*s/km" | "GPa/(km/s)") => 1e6,
        (Force, "N") => 1.0,
        (Force, "kN") => 1e3,
        _ => return None,
    };
    Some(s)
}

/// Parses `"25.6 GPa"` into `2.56e10` for `Dimension::Pressure`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace())
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| UnitError::BadNumber(text.to_string()))?;
    let unit = unit.trim();
    if dim == Dimension::Dimensionless {
        return if unit.is_empty() {
            Ok(value)
        } else {
            Err(UnitError::WrongUnit { unit: unit.to_string(), dim })
        };
    }
    if unit.is_empty() {
        return Err(UnitError::MissingUnit { value: text.to_string(), dim });
    }
    scale(unit, dim)
        .map(|s| value * s)
        .ok_or_else(|| UnitError::WrongUnit { unit: unit.to_string(), dim })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gigapascal_round_trip() {
        assert_eq!(parse_quantity("25.6 GPa", Dimension::Pressure).unwrap(), 25.6e9);
    }

    #[test]
    fn milliseconds_and_kilometres() {
        let t = parse_quantity("3.72 ms", Dimension::Time).unwrap();
        assert!((t - 3.72e-3).abs() < 1e-18);
        assert_eq!(parse_quantity("1 km", Dimension::Length).unwrap(), 1000.0);
        assert_eq!(parse_quantity("2.5 g/cm3", Dimension::Density).unwrap(), 2500.0);
    }

    #[test]
    fn bare_number_needs_unit() {
        assert!(matches!(
            parse_quantity("25.6", Dimension::Pressure),
            Err(UnitError::MissingUnit { .. })
        ));
        assert_eq!(parse_quantity("0.5", Dimension::Dimensionless).unwrap(), 0.5);
    }

    #[test]
    fn unit_of_wrong_kind() {
        assert!(matches!(
            parse_quantity("3 ms", Dimension::Length),
            Err(UnitError::WrongUnit { .. })
        ));
    }
}
