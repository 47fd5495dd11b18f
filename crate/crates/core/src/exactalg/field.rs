//! Scalars over ℚ or a word-sized prime field 𝔽_p.
//!
//! Every [`FieldElement`] carries its field tag so that matrices and
//! polynomials can assert they never mix fields. Rationals are kept in
//! lowest terms with a positive denominator (guaranteed by `BigRational`),
//! prime-field values are reduced into `[0, p)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExactError;

/// Largest prime modulus accepted (exclusive bound).
pub const PRIME_LIMIT: u64 = 1 << 31;

/// Default prime for randomized tests and corpora.
pub const DEFAULT_TEST_PRIME: u32 = 1_000_003;

/// Prime of size ≥ 2³⁰ used for random specialization of generic forms.
pub const SPECIALIZATION_PRIME: u32 = 2_147_483_647;

/// Field descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    /// Validated prime field constructor.
    pub fn prime(p: u64) -> Result<Self, ExactError> {
        if !(2..PRIME_LIMIT).contains(&p) || !is_prime(p) {
            return Err(ExactError::InvalidModulus(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => *p as u64,
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_i64(*self, 0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::from_i64(*self, 1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        FieldElement::from_i64(*self, v)
    }

    /// Parses a scalar written as `"a"` or `"a/b"` into this field.
    pub fn parse_scalar(&self, s: &str) -> Result<FieldElement, ExactError> {
        let q = parse_rational(s)?;
        FieldElement::from_rational(*self, &q)
            .ok_or_else(|| ExactError::DenominatorVanishes(s.to_string(), self.characteristic()))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "Fp:{p}"),
        }
    }
}

impl FromStr for Field {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "Q" || t == "QQ" {
            return Ok(Field::Rational);
        }
        let digits = t
            .strip_prefix("Fp:")
            .or_else(|| t.strip_prefix("F"))
            .ok_or_else(|| ExactError::Parse(format!("unknown field `{s}`")))?;
        let p: u64 = digits
            .parse()
            .map_err(|_| ExactError::Parse(format!("unknown field `{s}`")))?;
        Field::prime(p)
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Parses `"a"`, `"-a"` or `"a/b"` into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let t = s.trim();
    let bad = || ExactError::Parse(format!("bad scalar `{s}`"));
    match t.split_once('/') {
        Some((a, b)) => {
            let num = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

/// An exact scalar tagged by its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Q(BigRational),
    Fp { value: u32, modulus: u32 },
}

impl FieldElement {
    pub fn from_i64(field: Field, v: i64) -> Self {
        match field {
            Field::Rational => FieldElement::Q(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => FieldElement::Fp {
                value: v.rem_euclid(p as i64) as u32,
                modulus: p,
            },
        }
    }

    pub fn from_u64(field: Field, v: u64) -> Self {
        match field {
            Field::Rational => FieldElement::Q(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => FieldElement::Fp {
                value: (v % p as u64) as u32,
                modulus: p,
            },
        }
    }

    pub fn from_bigint(field: Field, v: &BigInt) -> Self {
        match field {
            Field::Rational => FieldElement::Q(BigRational::from_integer(v.clone())),
            Field::Prime(p) => {
                let r = v.mod_floor(&BigInt::from(p));
                FieldElement::Fp {
                    value: r.to_u32().expect("reduced residue fits"),
                    modulus: p,
                }
            }
        }
    }

    /// Maps a rational into `field`; `None` when the denominator vanishes mod p.
    pub fn from_rational(field: Field, q: &BigRational) -> Option<Self> {
        match field {
            Field::Rational => Some(FieldElement::Q(q.clone())),
            Field::Prime(_) => {
                let num = FieldElement::from_bigint(field, q.numer());
                let den = FieldElement::from_bigint(field, q.denom());
                den.inv().map(|d| &num * &d)
            }
        }
    }

    pub fn field(&self) -> Field {
        match self {
            FieldElement::Q(_) => Field::Rational,
            FieldElement::Fp { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Q(q) => q.is_zero(),
            FieldElement::Fp { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Q(q) => q.is_one(),
            FieldElement::Fp { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            FieldElement::Q(q) => FieldElement::Q(q.recip()),
            FieldElement::Fp { value, modulus } => FieldElement::Fp {
                value: pow_mod(*value as u64, *modulus as u64 - 2, *modulus as u64) as u32,
                modulus: *modulus,
            },
        })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Exact division; panics on a zero divisor.
    pub fn div(&self, other: &Self) -> Self {
        self * &other.inv().expect("division by zero field element")
    }

    /// Converts to the specialization prime field, if the value has a residue there.
    pub fn reduce_to(&self, target: Field) -> Option<Self> {
        match (self, target) {
            (_, t) if t == self.field() => Some(self.clone()),
            (FieldElement::Q(q), t) => FieldElement::from_rational(t, q),
            _ => None,
        }
    }

    /// Numerator/denominator form used by the Plücker vector schema.
    pub fn to_fraction_string(&self) -> String {
        match self {
            FieldElement::Q(q) => format!("{}/{}", q.numer(), q.denom()),
            FieldElement::Fp { value, .. } => format!("{value}/1"),
        }
    }

    /// Signed integer value when the element is an integer in a small range.
    pub fn as_small_integer(&self) -> Option<i64> {
        match self {
            FieldElement::Q(q) if q.is_integer() => q.numer().to_i64(),
            FieldElement::Q(_) => None,
            FieldElement::Fp { value, .. } => Some(*value as i64),
        }
    }

    fn check_same(&self, other: &Self) -> u64 {
        match (self, other) {
            (FieldElement::Fp { modulus: a, .. }, FieldElement::Fp { modulus: b, .. }) => {
                assert_eq!(a, b, "mixed prime fields");
                *a as u64
            }
            (FieldElement::Q(_), FieldElement::Q(_)) => 0,
            _ => panic!("mixed fields: {} vs {}", self.field(), other.field()),
        }
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Q(q) if q.is_integer() => write!(f, "{}", q.numer()),
            FieldElement::Q(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            FieldElement::Fp { value, .. } => write!(f, "{value}"),
        }
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &'a FieldElement) -> FieldElement {
        let p = self.check_same(rhs);
        match (self, rhs) {
            (FieldElement::Q(a), FieldElement::Q(b)) => FieldElement::Q(a + b),
            (FieldElement::Fp { value: a, .. }, FieldElement::Fp { value: b, .. }) => {
                FieldElement::Fp {
                    value: ((*a as u64 + *b as u64) % p) as u32,
                    modulus: p as u32,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &'a FieldElement) -> FieldElement {
        let p = self.check_same(rhs);
        match (self, rhs) {
            (FieldElement::Q(a), FieldElement::Q(b)) => FieldElement::Q(a - b),
            (FieldElement::Fp { value: a, .. }, FieldElement::Fp { value: b, .. }) => {
                FieldElement::Fp {
                    value: ((*a as u64 + p - *b as u64) % p) as u32,
                    modulus: p as u32,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &'a FieldElement) -> FieldElement {
        let p = self.check_same(rhs);
        match (self, rhs) {
            (FieldElement::Q(a), FieldElement::Q(b)) => FieldElement::Q(a * b),
            (FieldElement::Fp { value: a, .. }, FieldElement::Fp { value: b, .. }) => {
                FieldElement::Fp {
                    value: ((*a as u64 * *b as u64) % p) as u32,
                    modulus: p as u32,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Q(a) => FieldElement::Q(-a),
            FieldElement::Fp { value, modulus } => FieldElement::Fp {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &'a FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

/// `true` when `q` is a negative rational; prime-field values have no sign.
pub fn is_negative(x: &FieldElement) -> bool {
    matches!(x, FieldElement::Q(q) if q.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_reduced() {
        let f = Field::Rational;
        let a = f.parse_scalar("6/-4").unwrap();
        assert_eq!(a.to_string(), "-3/2");
        assert_eq!(a.to_fraction_string(), "-3/2");
        let b = &a * &f.from_i64(-2);
        assert_eq!(b.to_string(), "3");
    }

    #[test]
    fn prime_field_reduces_into_range() {
        let f = Field::prime(7).unwrap();
        assert_eq!(f.from_i64(-1), f.from_i64(6));
        let half = f.parse_scalar("1/2").unwrap();
        assert_eq!(&half * &f.from_i64(2), f.one());
        assert!(f.parse_scalar("1/7").is_err());
        assert_eq!(f.from_i64(3).inv().unwrap(), f.from_i64(5));
    }

    #[test]
    fn field_parsing() {
        assert_eq!("Q".parse::<Field>().unwrap(), Field::Rational);
        assert_eq!("Fp:1000003".parse::<Field>().unwrap(), Field::Prime(1_000_003));
        assert!("Fp:1000001".parse::<Field>().is_err());
        assert!(Field::prime(PRIME_LIMIT + 1).is_err());
        assert!(Field::prime(SPECIALIZATION_PRIME as u64).is_ok());
    }

    #[test]
    #[should_panic(expected = "mixed fields")]
    fn mixing_fields_panics() {
        let _ = &Field::Rational.one() + &Field::Prime(5).one();
    }
}
