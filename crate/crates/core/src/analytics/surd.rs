//! Exact arithmetic in `Q(√d)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The number `a + b·√d` with rational `a`, `b` and a fixed positive integer `d`.
#[derive(Debug, Clone)]
pub struct QuadSurd {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigInt,
}

impl QuadSurd {
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        assert!(d.is_positive(), "radicand must be positive");
        QuadSurd { a, b, d }
    }

    pub fn rational(a: BigRational, d: &BigInt) -> Self {
        Self::new(a, BigRational::zero(), d.clone())
    }

    fn root_of_square(&self) -> Option<BigInt> {
        let r = self.d.sqrt();
        (&r * &r == self.d).then_some(r)
    }

    /// The value as a rational, when it is one.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.b.is_zero() {
            return Some(self.a.clone());
        }
        self.root_of_square()
            .map(|r| &self.a + &self.b * BigRational::from_integer(r))
    }

    pub fn is_zero(&self) -> bool {
        match self.to_rational() {
            Some(q) => q.is_zero(),
            None => self.a.is_zero() && self.b.is_zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let root = self.d.to_f64().unwrap_or(f64::NAN).sqrt();
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * root
    }

    pub fn pow(&self, k: u32) -> QuadSurd {
        let mut acc = QuadSurd::rational(BigRational::one(), &self.d);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn same_field(&self, other: &QuadSurd) {
        assert_eq!(self.d, other.d, "mixing different quadratic fields");
    }
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl<'a> Add<&'a QuadSurd> for &'a QuadSurd {
    type Output = QuadSurd;
    fn add(self, rhs: &QuadSurd) -> QuadSurd {
        self.same_field(rhs);
        QuadSurd::new(&self.a + &rhs.a, &self.b + &rhs.b, self.d.clone())
    }
}

impl<'a> Sub<&'a QuadSurd> for &'a QuadSurd {
    type Output = QuadSurd;
    fn sub(self, rhs: &QuadSurd) -> QuadSurd {
        self.same_field(rhs);
        QuadSurd::new(&self.a - &rhs.a, &self.b - &rhs.b, self.d.clone())
    }
}

impl<'a> Mul<&'a QuadSurd> for &'a QuadSurd {
    type Output = QuadSurd;
    fn mul(self, rhs: &QuadSurd) -> QuadSurd {
        self.same_field(rhs);
        let d = BigRational::from_integer(self.d.clone());
        QuadSurd::new(
            &self.a * &rhs.a + &self.b * &rhs.b * d,
            &self.a * &rhs.b + &self.b * &rhs.a,
            self.d.clone(),
        )
    }
}

impl Neg for QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd::new(-self.a, -self.b, self.d)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})·√{}", self.a, self.b, self.d)
    }
}
