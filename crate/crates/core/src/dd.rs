//! Double-double arithmetic (about 32 significant digits), used to polish
//! polynomial roots beyond what a single `f64` can resolve.
//!
//! Near the dominant root of a high-order characteristic polynomial the
//! derivative is large (~1e6 at order 20), so even the best `f64`
//! approximation of the root leaves a residual around 1e-10. Carrying a
//! low-order correction term removes that floor.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // One Newton step from the f64 estimate doubles the precision.
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, r);
        Dd { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: DdComplex = DdComplex {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Self {
        DdComplex { re, im }
    }

    pub fn from_complex(z: Complex64) -> Self {
        DdComplex::new(Dd::from_f64(z.re), Dd::from_f64(z.im))
    }

    pub fn from_parts(hi: Complex64, lo: Complex64) -> Self {
        DdComplex::new(
            Dd {
                hi: hi.re,
                lo: lo.re,
            },
            Dd {
                hi: hi.im,
                lo: lo.im,
            },
        )
    }

    /// Nearest `Complex64`.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Rounding error left after [`Self::to_complex`].
    pub fn tail(self) -> Complex64 {
        let hi = self.to_complex();
        Complex64::new(
            (self.re - Dd::from_f64(hi.re)).to_f64(),
            (self.im - Dd::from_f64(hi.im)).to_f64(),
        )
    }

    pub fn conj(self) -> Self {
        DdComplex::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt().to_f64()
    }

    pub fn inv(self) -> Self {
        DdComplex::ONE / self
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, rhs: DdComplex) -> DdComplex {
        DdComplex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    fn sub(self, rhs: DdComplex) -> DdComplex {
        DdComplex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, rhs: DdComplex) -> DdComplex {
        DdComplex::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Div for DdComplex {
    type Output = DdComplex;
    fn div(self, rhs: DdComplex) -> DdComplex {
        let den = rhs.norm_sqr();
        let num = self * rhs.conj();
        DdComplex::new(num.re / den, num.im / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_f64() {
        let a = Dd::from_f64(1.0) + Dd::from_f64(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let b = a - Dd::ONE;
        assert_eq!(b.to_f64(), 1e-20);
    }

    #[test]
    fn division_round_trips() {
        let three = Dd::from_f64(3.0);
        let third = Dd::ONE / three;
        let back = third * three - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_of_five() {
        let s = Dd::from_f64(5.0).sqrt();
        let err = s * s - Dd::from_f64(5.0);
        assert!(err.to_f64().abs() < 1e-30);
        assert_eq!(s.hi, 5f64.sqrt());
    }

    #[test]
    fn complex_inverse() {
        let z = DdComplex::from_complex(Complex64::new(0.3, -1.7));
        let one = z * z.inv();
        assert!((one.re - Dd::ONE).to_f64().abs() < 1e-30);
        assert!(one.im.to_f64().abs() < 1e-30);
    }
}
