//! Complex numbers with an explicit natural-log exponent: `mantissa · e^exponent`.
//!
//! Normalization rescales the mantissa by a power of two so that
//! `0.5 <= |mantissa| < 2`, keeping the mantissa bits exact; zero is stored as
//! `(0, 0)`.

use num_complex::Complex64;
use std::f64::consts::LN_2;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exponent: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mantissa: Complex64 { re: 0.0, im: 0.0 },
        exponent: 0.0,
    };

    pub fn new(mantissa: Complex64, exponent: f64) -> Self {
        ScaledComplex { mantissa, exponent }.normalized()
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    /// `e^exponent` with unit mantissa.
    pub fn exp(exponent: f64) -> Self {
        Self::new(Complex64::new(1.0, 0.0), exponent)
    }

    /// `e^(exponent + i·phase)`.
    pub fn exp_phase(exponent: f64, phase: f64) -> Self {
        Self::new(Complex64::from_polar(1.0, phase), exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    pub fn normalized(self) -> Self {
        let a = self.mantissa.norm();
        if a == 0.0 || !a.is_finite() {
            if a == 0.0 {
                return Self::ZERO;
            }
            return self;
        }
        let mut p = a.log2().floor() as i32;
        // keep |m / 2^p| inside [0.5, 2) despite log2 rounding
        let mut m = scale_pow2(self.mantissa, -p);
        let mut r = m.norm();
        while r >= 2.0 {
            p += 1;
            m = scale_pow2(self.mantissa, -p);
            r = m.norm();
        }
        while r < 0.5 {
            p -= 1;
            m = scale_pow2(self.mantissa, -p);
            r = m.norm();
        }
        ScaledComplex {
            mantissa: m,
            exponent: self.exponent + p as f64 * LN_2,
        }
    }

    /// Plain complex value; overflows to infinity or underflows to zero when
    /// out of double range.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.mantissa * self.exponent.exp()
    }

    /// `ln|z|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exponent
        }
    }

    pub fn conj(&self) -> Self {
        ScaledComplex {
            mantissa: self.mantissa.conj(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `e^delta`.
    pub fn shift(&self, delta: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        ScaledComplex {
            mantissa: self.mantissa,
            exponent: self.exponent + delta,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.mantissa * s, self.exponent)
    }
}

fn scale_pow2(z: Complex64, p: i32) -> Complex64 {
    let f = pow2(p);
    Complex64::new(z.re * f, z.im * f)
}

fn pow2(p: i32) -> f64 {
    // exact for the normal range; split to avoid intermediate overflow
    if p.abs() <= 1000 {
        2f64.powi(p)
    } else {
        2f64.powi(p / 2) * 2f64.powi(p - p / 2)
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: ScaledComplex) -> ScaledComplex {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: ScaledComplex) -> ScaledComplex {
        if self.is_zero() {
            return rhs.normalized();
        }
        if rhs.is_zero() {
            return self.normalized();
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = small.exponent - big.exponent;
        // e^d underflows below this
        if d < -745.0 {
            return big.normalized();
        }
        Self::new(big.mantissa + small.mantissa * d.exp(), big.exponent)
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> ScaledComplex {
        ScaledComplex {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: ScaledComplex) -> ScaledComplex {
        self + (-rhs)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}
