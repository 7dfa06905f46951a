//! Scalar types that kernel entries may carry.
//!
//! Algebraic identities (adjoint, products, restriction defects) are checked
//! exactly on integer and rational kernels; analytic estimates run on `f64`
//! or `Complex64`. Everything in [`crate::kernel`] and [`crate::subshift`] is
//! generic over [`Scalar`].

use std::fmt::Debug;
use std::ops::{AddAssign, Neg};

use num_complex::{Complex, Complex64};
use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// A ring element usable as a kernel entry.
pub trait Scalar:
    Num + Copy + Debug + Neg<Output = Self> + AddAssign + Send + Sync + 'static
{
    /// True when every value of the type has zero imaginary part.
    const IS_REAL: bool;

    /// Complex conjugate (identity for real types).
    fn conj(&self) -> Self;

    /// `|z|` as a double.
    fn modulus(&self) -> f64;

    /// Lossy conversion used by the eigensolvers.
    fn to_c64(&self) -> Complex64;

    /// Text form of the real and imaginary parts, exact for the type.
    fn format_parts(&self) -> (String, String);

    /// Inverse of [`Scalar::format_parts`].
    fn parse_parts(re: &str, im: &str) -> Option<Self>;
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

fn fmt_f64(x: f64) -> String {
    // `{:?}` prints the shortest representation that round-trips exactly.
    format!("{x:?}")
}

impl Scalar for f64 {
    const IS_REAL: bool = true;
    fn conj(&self) -> Self {
        *self
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn format_parts(&self) -> (String, String) {
        (fmt_f64(*self), "0".into())
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        let im = parse_f64(im)?;
        (im == 0.0).then_some(())?;
        parse_f64(re)
    }
}

impl Scalar for f32 {
    const IS_REAL: bool = true;
    fn conj(&self) -> Self {
        *self
    }
    fn modulus(&self) -> f64 {
        self.abs() as f64
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self as f64, 0.0)
    }
    fn format_parts(&self) -> (String, String) {
        (format!("{self:?}"), "0".into())
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        let im: f32 = im.trim().parse().ok()?;
        (im == 0.0).then_some(())?;
        re.trim().parse().ok()
    }
}

impl Scalar for i64 {
    const IS_REAL: bool = true;
    fn conj(&self) -> Self {
        *self
    }
    fn modulus(&self) -> f64 {
        self.unsigned_abs() as f64
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self as f64, 0.0)
    }
    fn format_parts(&self) -> (String, String) {
        (self.to_string(), "0".into())
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        let im: i64 = im.trim().parse().ok()?;
        (im == 0).then_some(())?;
        re.trim().parse().ok()
    }
}

impl Scalar for Ratio<i64> {
    const IS_REAL: bool = true;
    fn conj(&self) -> Self {
        *self
    }
    fn modulus(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN).abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn format_parts(&self) -> (String, String) {
        (self.to_string(), "0".into())
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        let im: Ratio<i64> = im.trim().parse().ok()?;
        (im == Ratio::from_integer(0)).then_some(())?;
        re.trim().parse().ok()
    }
}

impl Scalar for Complex64 {
    const IS_REAL: bool = false;
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn format_parts(&self) -> (String, String) {
        (fmt_f64(self.re), fmt_f64(self.im))
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        Some(Complex64::new(parse_f64(re)?, parse_f64(im)?))
    }
}

impl Scalar for Complex<i64> {
    const IS_REAL: bool = false;
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn modulus(&self) -> f64 {
        (self.re as f64).hypot(self.im as f64)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
    fn format_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }
    fn parse_parts(re: &str, im: &str) -> Option<Self> {
        Some(Complex::new(
            re.trim().parse().ok()?,
            im.trim().parse().ok()?,
        ))
    }
}
