//! Exact rational scalars.
//!
//! `Rat` keeps a reduced `i64/i64` fast path and silently promotes to
//! arbitrary precision on overflow. Every value is canonical: lowest terms,
//! positive denominator, and the big representation is only used when the
//! value does not fit the small one. This makes `==` and `Hash` structural.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum Rat {
    /// Reduced fraction, `den > 0`.
    Small(i64, i64),
    /// Reduced fraction that does not fit in `Small`.
    Big(Box<BigRational>),
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn small_from_i128(num: i128, den: i128) -> Rat {
    debug_assert!(den != 0);
    let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
    if num == 0 {
        return Rat::Small(0, 1);
    }
    let g = gcd_i128(num, den);
    num /= g;
    den /= g;
    if num >= i64::MIN as i128 && num <= i64::MAX as i128 && den <= i64::MAX as i128 {
        Rat::Small(num as i64, den as i64)
    } else {
        Rat::Big(Box::new(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }
}

fn demote(r: BigRational) -> Rat {
    if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
        Rat::Small(n, d)
    } else {
        Rat::Big(Box::new(r))
    }
}

impl Rat {
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        small_from_i128(num as i128, den as i128)
    }

    pub fn zero() -> Rat {
        Rat::Small(0, 1)
    }

    pub fn one() -> Rat {
        Rat::Small(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_, d) => *d == 1,
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Rat::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    pub fn denom_i64(&self) -> Option<i64> {
        match self {
            Rat::Small(_, d) => Some(*d),
            Rat::Big(b) => b.denom().to_i64(),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(b) => (**b).clone(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Rat {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Rat::Small(n, d) => small_from_i128(*d as i128, *n as i128),
            Rat::Big(b) => demote(b.recip()),
        }
    }

    /// Integer power, negative exponents allowed for nonzero values.
    pub fn pow(&self, e: i64) -> Rat {
        if e == 0 {
            return Rat::one();
        }
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = Rat::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Exact rational `q`-th power when it exists (integer root extraction),
    /// e.g. `(4/9)^(3/2) = 8/27`. Returns `None` when the result is irrational.
    pub fn pow_rat(&self, q: &Rat) -> Option<Rat> {
        if q.is_integer() {
            let e = match q {
                Rat::Small(n, 1) => *n,
                _ => return None,
            };
            if self.is_zero() && e < 0 {
                return None;
            }
            return Some(self.pow(e));
        }
        let (qn, qd) = q.parts_i64()?;
        if self.is_negative() && qd % 2 == 0 {
            return None;
        }
        let root = self.nth_root_exact(qd)?;
        Some(root.pow(qn))
    }

    fn parts_i64(&self) -> Option<(i64, i64)> {
        match self {
            Rat::Small(n, d) => Some((*n, *d)),
            Rat::Big(_) => None,
        }
    }

    fn nth_root_exact(&self, n: i64) -> Option<Rat> {
        let big = self.to_big();
        let num = int_nth_root(big.numer(), n)?;
        let den = int_nth_root(big.denom(), n)?;
        Some(demote(BigRational::new(num, den)))
    }

    /// Generalized binomial coefficient `C(a, n)` for rational `a`, `n >= 0`.
    pub fn binom(a: &Rat, n: u64) -> Rat {
        let mut acc = Rat::one();
        for i in 0..n {
            acc = &acc * &(a - &Rat::from(i as i64));
        }
        let mut fact = Rat::one();
        for i in 1..=n {
            fact = &fact * &Rat::from(i as i64);
        }
        &acc / &fact
    }

    pub fn factorial(n: u64) -> Rat {
        let mut acc = Rat::one();
        for i in 1..=n {
            acc = &acc * &Rat::from(i as i64);
        }
        acc
    }
}

fn int_nth_root(v: &BigInt, n: i64) -> Option<BigInt> {
    if v.is_zero() {
        return Some(BigInt::zero());
    }
    let neg = v.is_negative();
    if neg && n % 2 == 0 {
        return None;
    }
    let a = v.abs();
    let r = a.nth_root(n as u32);
    let mut p = BigInt::one();
    for _ in 0..n {
        p *= &r;
    }
    if p == a {
        Some(if neg { -r } else { r })
    } else {
        None
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::Small(n, 1)
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            (Rat::Big(a), Rat::Big(b)) => a == b,
            // canonical form: a Big value never fits in Small
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(n, d) => {
                state.write_i64(*n);
                state.write_i64(*d);
            }
            Rat::Big(b) => {
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $smallop:expr, $bigop:expr) => {
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                match (self, rhs) {
                    (Rat::Small(a, b), Rat::Small(c, d)) => {
                        let f: fn(i128, i128, i128, i128) -> Option<(i128, i128)> = $smallop;
                        match f(*a as i128, *b as i128, *c as i128, *d as i128) {
                            Some((n, d)) => small_from_i128(n, d),
                            None => {
                                let g: fn(BigRational, BigRational) -> BigRational = $bigop;
                                demote(g(self.to_big(), rhs.to_big()))
                            }
                        }
                    }
                    _ => {
                        let g: fn(BigRational, BigRational) -> BigRational = $bigop;
                        demote(g(self.to_big(), rhs.to_big()))
                    }
                }
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

rat_binop!(
    Add,
    add,
    |a, b, c, d| {
        let n = a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?;
        Some((n, b.checked_mul(d)?))
    },
    |x, y| x + y
);
rat_binop!(
    Sub,
    sub,
    |a, b, c, d| {
        let n = a.checked_mul(d)?.checked_sub(c.checked_mul(b)?)?;
        Some((n, b.checked_mul(d)?))
    },
    |x, y| x - y
);
rat_binop!(
    Mul,
    mul,
    |a, b, c, d| Some((a.checked_mul(c)?, b.checked_mul(d)?)),
    |x, y| x * y
);
rat_binop!(
    Div,
    div,
    |a, b, c, d| {
        if c == 0 {
            panic!("division by zero rational");
        }
        Some((a.checked_mul(d)?, b.checked_mul(c)?))
    },
    |x, y| x / y
);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(n, d) => {
                if *n == i64::MIN {
                    small_from_i128(-(*n as i128), *d as i128)
                } else {
                    Rat::Small(-n, *d)
                }
            }
            Rat::Big(b) => demote(-(**b).clone()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(n, 1) => write!(f, "{}", n),
            Rat::Small(n, d) => write!(f, "{}/{}", n, d),
            Rat::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            t.parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("invalid integer `{}`", t)))
        };
        let r = if let Some((n, d)) = s.split_once('/') {
            let den = parse_int(d.trim())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{}`", s)));
            }
            BigRational::new(parse_int(n.trim())?, den)
        } else {
            BigRational::from(parse_int(s)?)
        };
        Ok(demote(r))
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basics() {
        assert_eq!(Rat::new(2, 4), Rat::new(1, 2));
        assert_eq!(Rat::new(1, -2), Rat::new(-1, 2));
        assert_eq!((Rat::new(1, 2) + Rat::new(1, 3)).to_string(), "5/6");
        assert_eq!(Rat::new(-3, 1).to_string(), "-3");
        assert_eq!("7/2".parse::<Rat>().unwrap(), Rat::new(7, 2));
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn pow_rat_roots() {
        assert_eq!(
            Rat::new(4, 9).pow_rat(&Rat::new(3, 2)),
            Some(Rat::new(8, 27))
        );
        assert_eq!(Rat::new(2, 1).pow_rat(&Rat::new(1, 2)), None);
        assert_eq!(
            Rat::new(-8, 1).pow_rat(&Rat::new(1, 3)),
            Some(Rat::new(-2, 1))
        );
        assert_eq!(Rat::new(-4, 1).pow_rat(&Rat::new(1, 2)), None);
        assert_eq!(Rat::new(1, 2).pow_rat(&Rat::from(-2)), Some(Rat::from(4)));
    }

    #[test]
    fn binom_fractional() {
        // C(1/2, 2) = (1/2)(-1/2)/2 = -1/8
        assert_eq!(Rat::binom(&Rat::new(1, 2), 2), Rat::new(-1, 8));
        assert_eq!(Rat::binom(&Rat::new(-3, 2), 1), Rat::new(-3, 2));
        assert_eq!(Rat::binom(&Rat::from(5), 7), Rat::zero());
    }

    #[test]
    fn overflow_promotes() {
        let big = Rat::new(i64::MAX, 1);
        let sq = &big * &big;
        let back = &sq / &big;
        assert_eq!(back, big);
        assert_eq!(&sq - &sq, Rat::zero());
    }

    proptest! {
        #[test]
        fn matches_bigrational(a in -1000i64..1000, b in 1i64..60, c in -1000i64..1000, d in 1i64..60) {
            let x = Rat::new(a, b);
            let y = Rat::new(c, d);
            let (bx, by) = (x.to_big(), y.to_big());
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        }
    }
}
