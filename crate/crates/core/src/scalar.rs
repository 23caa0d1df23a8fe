//! Scalar fields a frame can live over.
//!
//! Everything in this crate is generic over [`Scalar`], which is implemented
//! for `f32`, `f64`, `Complex<f32>` and `Complex<f64>`. Real scalars are the
//! structurally-zero-imaginary special case of the complex ones: the same
//! code path runs for both, conjugation being the identity on reals.

use std::fmt;

use nalgebra::ComplexField;
use num_complex::Complex;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// The real part type of a scalar.
pub type Real<T> = <T as ComplexField>::RealField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!(
                "unknown field `{other}` (expected real or complex)"
            )),
        }
    }
}

/// A matrix entry type.
pub trait Scalar: ComplexField<RealField: Copy + ToPrimitive + fmt::LowerExp> + Copy {
    const FIELD: Field;

    /// Builds a scalar from real and imaginary parts. Returns `None` for a
    /// real scalar type when `im != 0`.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    /// Real and imaginary parts, widened to `f64`.
    fn parts(self) -> (f64, f64);

    /// A standard normal draw. Complex scalars use independent real and
    /// imaginary parts of variance 1/2 so that `E|z|^2 = 1`.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Text form used by FRM1 files: 17 significant digits, complex values
    /// as `a+bi` / `a-bi` with no spaces.
    fn format_entry(self) -> String {
        let (re, im) = self.parts();
        match Self::FIELD {
            Field::Real => format!("{re:.16e}"),
            Field::Complex => {
                let sign = if im.is_sign_negative() { '-' } else { '+' };
                format!("{re:.16e}{sign}{:.16e}i", im.abs())
            }
        }
    }

    /// Inverse of [`Scalar::format_entry`]. Also accepts any plain decimal
    /// number, and `a+bi` input for real types when `b == 0`.
    fn parse_entry(text: &str) -> Option<Self> {
        let (re, im) = parse_parts(text)?;
        if !re.is_finite() || !im.is_finite() {
            return None;
        }
        Self::from_parts(re, im)
    }

    /// Modulus as `f64`.
    fn modulus_f64(self) -> f64 {
        self.modulus().to_f64().unwrap_or(f64::NAN)
    }
}

fn parse_parts(text: &str) -> Option<(f64, f64)> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let Some(body) = text.strip_suffix('i') else {
        return text.parse::<f64>().ok().map(|re| (re, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().ok()?;
            let im = body[i..].parse::<f64>().ok()?;
            Some((re, im))
        }
        None => body.parse::<f64>().ok().map(|im| (0.0, im)),
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f32 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re as f32)
    }

    fn parts(self) -> (f64, f64) {
        (f64::from(self), 0.0)
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for Complex<f64> {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re, im))
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl Scalar for Complex<f32> {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re as f32, im as f32))
    }

    fn parts(self) -> (f64, f64) {
        (f64::from(self.re), f64::from(self.im))
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f32 = rng.sample(StandardNormal);
        let im: f32 = rng.sample(StandardNormal);
        Complex::new(re, im) * std::f32::consts::FRAC_1_SQRT_2
    }
}

/// Converts an `f64` constant into the real field of `T`.
pub fn real<T: Scalar>(x: f64) -> Real<T> {
    nalgebra::convert(x)
}

pub fn to_f64<T: Scalar>(x: Real<T>) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
