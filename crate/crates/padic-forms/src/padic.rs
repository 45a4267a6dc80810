//! Exact arithmetic on finitely presented p-adic numbers.
//!
//! A nonzero scalar is stored as `sign * p^v * (a/b)` where `v` is the p-adic
//! valuation and `a/b` is a positive rational with both `a` and `b` coprime to
//! `p` (the "unit part").  Every nonzero rational has exactly one such
//! presentation, so equality is structural.  Zero is kept as a separate case
//! with valuation `+inf`.  All ring and field operations are exact; nothing in
//! this module touches floating point.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// p-adic valuation, totally ordered with `Infinite` on top (valuation of 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PAdicError {
    #[error("malformed p-adic literal {0:?}")]
    MalformedLiteral(String),
    #[error("literal base {found} does not match the ambient prime {expected}")]
    WrongPrime { expected: u64, found: u64 },
    #[error("unit part of a literal must be a nonzero integer")]
    ZeroUnit,
    #[error("operands live over different primes ({0} vs {1})")]
    PrimeMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalar with valuation {0} is not invertible modulo p^{1}")]
    NotAUnit(Valuation, u32),
    #[error("scalar with negative valuation {0} has no residue modulo p^{1}")]
    NegativeValuation(i64, u32),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Nonzero payload of a [`PAdicScalar`]: `sign * p^valuation * num/den`
/// with `num`, `den` positive and coprime to `p` and to each other.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Payload {
    negative: bool,
    valuation: i64,
    num: BigUint,
    den: BigUint,
}

/// An exact finitely presented p-adic number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    prime: u64,
    payload: Option<Payload>,
}

/// Strips all factors of `p` from `n`, returning `(p-free part, multiplicity)`.
/// `n` must be nonzero.
fn strip_p(mut n: BigUint, p: u64) -> (BigUint, i64) {
    debug_assert!(!n.is_zero());
    let p = BigUint::from(p);
    let mut mult = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if r.is_zero() {
            n = q;
            mult += 1;
        } else {
            return (n, mult);
        }
    }
}

impl PAdicScalar {
    pub fn zero(prime: u64) -> Self {
        PAdicScalar {
            prime,
            payload: None,
        }
    }

    pub fn one(prime: u64) -> Self {
        Self::from_integer(BigInt::one(), prime)
    }

    pub fn from_integer(n: BigInt, prime: u64) -> Self {
        Self::from_rational(BigRational::from_integer(n), prime)
    }

    pub fn from_u64(n: u64, prime: u64) -> Self {
        Self::from_integer(BigInt::from(n), prime)
    }

    /// Canonicalizes an exact rational into sign/valuation/unit form.
    pub fn from_rational(r: BigRational, prime: u64) -> Self {
        if r.is_zero() {
            return Self::zero(prime);
        }
        let negative = r.is_negative();
        let (num, vn) = strip_p(r.numer().magnitude().clone(), prime);
        let (den, vd) = strip_p(r.denom().magnitude().clone(), prime);
        PAdicScalar {
            prime,
            payload: Some(Payload {
                negative,
                valuation: vn - vd,
                num,
                den,
            }),
        }
    }

    /// Builds `sign * p^valuation * unit` from an integer unit.  Factors of
    /// `p` inside `unit` are absorbed into the valuation.
    pub fn from_parts(negative: bool, valuation: i64, unit: BigUint, prime: u64) -> Self {
        if unit.is_zero() {
            return Self::zero(prime);
        }
        let (num, extra) = strip_p(unit, prime);
        PAdicScalar {
            prime,
            payload: Some(Payload {
                negative,
                valuation: valuation + extra,
                num,
                den: BigUint::one(),
            }),
        }
    }

    /// Parses the literal grammar `[-]INT` or `[-]P^EXP[*UNIT]`.
    ///
    /// `INT` is a decimal integer (factors of `p` are extracted), `P` must be
    /// the ambient prime, `EXP` is a possibly negative decimal exponent and
    /// `UNIT` a positive decimal integer.
    pub fn parse_literal(text: &str, prime: u64) -> Result<Self, PAdicError> {
        let malformed = || PAdicError::MalformedLiteral(text.to_string());
        let trimmed = text.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed),
        };
        if body.is_empty() {
            return Err(malformed());
        }
        if let Some((base, rest)) = body.split_once('^') {
            let base: u64 = base.parse().map_err(|_| malformed())?;
            if base != prime {
                return Err(PAdicError::WrongPrime {
                    expected: prime,
                    found: base,
                });
            }
            let (exp_text, unit_text) = match rest.split_once('*') {
                Some((e, u)) => (e, Some(u)),
                None => (rest, None),
            };
            let exponent: i64 = exp_text.parse().map_err(|_| malformed())?;
            let unit = match unit_text {
                Some(u) => {
                    if !u.bytes().all(|b| b.is_ascii_digit()) || u.is_empty() {
                        return Err(malformed());
                    }
                    let unit: BigUint = u.parse().map_err(|_| malformed())?;
                    if unit.is_zero() {
                        return Err(PAdicError::ZeroUnit);
                    }
                    unit
                }
                None => BigUint::one(),
            };
            Ok(Self::from_parts(negative, exponent, unit, prime))
        } else {
            if !body.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let n: BigUint = body.parse().map_err(|_| malformed())?;
            Ok(Self::from_parts(negative, 0, n, prime))
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.payload.is_none()
    }

    pub fn valuation(&self) -> Valuation {
        match &self.payload {
            Some(p) => Valuation::Finite(p.valuation),
            None => Valuation::Infinite,
        }
    }

    /// True for elements of `Delta_p^0`, i.e. valuation exactly zero.
    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// True for elements of `Delta_p`, i.e. valuation >= 0 (zero included).
    pub fn is_integral(&self) -> bool {
        match self.valuation() {
            Valuation::Finite(v) => v >= 0,
            Valuation::Infinite => true,
        }
    }

    /// The exact rational value of the scalar.
    pub fn to_rational(&self) -> BigRational {
        match &self.payload {
            None => BigRational::zero(),
            Some(pl) => {
                let sign = if pl.negative { Sign::Minus } else { Sign::Plus };
                let p = BigInt::from(self.prime);
                let mut num = BigInt::from_biguint(sign, pl.num.clone());
                let mut den = BigInt::from_biguint(Sign::Plus, pl.den.clone());
                if pl.valuation >= 0 {
                    num *= p.pow(pl.valuation as u32);
                } else {
                    den *= p.pow((-pl.valuation) as u32);
                }
                BigRational::new(num, den)
            }
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PAdicError> {
        if self.prime != other.prime {
            Err(PAdicError::PrimeMismatch(self.prime, other.prime))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PAdicError> {
        self.check_prime(other)?;
        Ok(Self::from_rational(
            self.to_rational() + other.to_rational(),
            self.prime,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PAdicError> {
        self.check_prime(other)?;
        Ok(Self::from_rational(
            self.to_rational() - other.to_rational(),
            self.prime,
        ))
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        if let Some(pl) = &mut out.payload {
            pl.negative = !pl.negative;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PAdicError> {
        self.check_prime(other)?;
        match (&self.payload, &other.payload) {
            (Some(a), Some(b)) => {
                // Units stay coprime to p under multiplication, so only the
                // gcd between numerator and denominator needs reducing.
                let num = &a.num * &b.num;
                let den = &a.den * &b.den;
                let g = num.gcd(&den);
                Ok(PAdicScalar {
                    prime: self.prime,
                    payload: Some(Payload {
                        negative: a.negative != b.negative,
                        valuation: a.valuation + b.valuation,
                        num: num / &g,
                        den: den / g,
                    }),
                })
            }
            _ => Ok(Self::zero(self.prime)),
        }
    }

    /// Multiplicative inverse; the unit part flips num/den, the valuation
    /// negates.
    pub fn inv(&self) -> Result<Self, PAdicError> {
        match &self.payload {
            None => Err(PAdicError::DivisionByZero),
            Some(pl) => Ok(PAdicScalar {
                prime: self.prime,
                payload: Some(Payload {
                    negative: pl.negative,
                    valuation: -pl.valuation,
                    num: pl.den.clone(),
                    den: pl.num.clone(),
                }),
            }),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PAdicError> {
        self.mul(&other.inv()?)
    }

    /// Residue of an integral scalar modulo `p^n`, in `0..p^n`.
    pub fn reduce_mod(&self, n: u32) -> Result<u64, PAdicError> {
        let modulus = pow_u64(self.prime, n);
        match &self.payload {
            None => Ok(0),
            Some(pl) => {
                if pl.valuation < 0 {
                    return Err(PAdicError::NegativeValuation(pl.valuation, n));
                }
                if pl.valuation >= n as i64 {
                    return Ok(0);
                }
                let m = BigUint::from(modulus);
                let num = (&pl.num % &m).to_u64_digits().first().copied().unwrap_or(0);
                let den = (&pl.den % &m).to_u64_digits().first().copied().unwrap_or(0);
                let den_inv = mod_inverse(den, modulus).expect("denominator is coprime to p");
                let p_pow = pow_u64(self.prime, pl.valuation as u32);
                let mut r = mul_mod(mul_mod(num, den_inv, modulus), p_pow, modulus);
                if pl.negative && r != 0 {
                    r = modulus - r;
                }
                Ok(r)
            }
        }
    }

    /// Inverse modulo `p^n` of a scalar with valuation zero.
    pub fn invert_mod(&self, n: u32) -> Result<u64, PAdicError> {
        if !self.is_unit() {
            return Err(PAdicError::NotAUnit(self.valuation(), n));
        }
        let modulus = pow_u64(self.prime, n);
        let r = self.reduce_mod(n)?;
        Ok(mod_inverse(r, modulus).expect("units are invertible mod p^n"))
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            None => write!(f, "0"),
            Some(pl) => {
                let sign = if pl.negative { "-" } else { "" };
                if pl.den.is_one() {
                    if pl.valuation == 0 {
                        write!(f, "{sign}{}", pl.num)
                    } else {
                        write!(f, "{sign}{}^{}*{}", self.prime, pl.valuation, pl.num)
                    }
                } else {
                    write!(
                        f,
                        "{sign}{}^{}*{}/{}",
                        self.prime, pl.valuation, pl.num, pl.den
                    )
                }
            }
        }
    }
}

/// `base^exp` with overflow panic; moduli in this crate are tiny.
pub(crate) fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("modulus p^n overflows u64")
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Extended Euclid inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Trial-division primality check for user-facing validation of `p`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.checked_mul(d).map(|sq| sq <= n).unwrap_or(false) {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
