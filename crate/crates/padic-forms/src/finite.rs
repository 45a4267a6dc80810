//! Finite cyclic models `Z/p^n` with exact rational distributions.
//!
//! The group is self-dual under the pairing `(x, y) = exp(2*pi*i*x*y/p^n)`;
//! we identify the dual with `Z/p^n` throughout.  Distributions carry exact
//! `BigRational` probabilities; characteristic functions are complex tables
//! over the dual, with an exact 0/1 fast path for indicator-shaped
//! transforms (Haar measures of subgroups).
//!
//! Key structural facts used all over the crate:
//!
//! * the subgroups of `Z/p^n` are exactly `p^j Z/p^n` for `0 <= j <= n`;
//! * the characteristic function of Haar measure on a subgroup `H` is the
//!   indicator of its annihilator `{y : xy = 0 mod p^n for all x in H}`;
//! * the set where a characteristic function equals 1 is the annihilator
//!   of the subgroup generated by the support, and the function is
//!   invariant under translating its argument by that set.

use crate::padic::pow_u64;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FiniteError {
    #[error("group mismatch: Z/{0}^{1} vs Z/{2}^{3}")]
    GroupMismatch(u64, u32, u64, u32),
    #[error("probabilities must be nonnegative and sum to 1 (got sum {0})")]
    NotADistribution(String),
    #[error("table length {0} does not match group order {1}")]
    WrongLength(usize, u64),
    #[error("spectrum is not a valid characteristic function: {0}")]
    InvalidCharFunction(String),
    #[error("inner function must live on a subgroup of the target (orders {0} vs {1})")]
    NotASubgroup(u64, u64),
}

/// The cyclic group `Z/p^n` (and, via self-duality, its dual).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicGroup {
    prime: u64,
    exponent: u32,
}

impl CyclicGroup {
    pub fn new(prime: u64, exponent: u32) -> Self {
        // Overflow-check the order once at construction.
        let _ = pow_u64(prime, exponent);
        CyclicGroup { prime, exponent }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        pow_u64(self.prime, self.exponent)
    }

    /// The subgroup `p^j Z/p^n`.
    pub fn subgroup(&self, index_exponent: u32) -> Subgroup {
        assert!(index_exponent <= self.exponent);
        Subgroup {
            group: *self,
            index_exponent,
        }
    }

    /// The `p^m`-torsion subgroup `{y : p^m y = 0} = p^(n-m) Z/p^n`.
    pub fn torsion(&self, m: u32) -> Subgroup {
        assert!(m <= self.exponent);
        self.subgroup(self.exponent - m)
    }

    /// p-adic valuation of an element, capped at `n` (the valuation of 0).
    pub fn element_valuation(&self, x: u64) -> u32 {
        debug_assert!(x < self.order());
        if x == 0 {
            return self.exponent;
        }
        let mut v = 0;
        let mut x = x;
        while x % self.prime == 0 {
            x /= self.prime;
            v += 1;
        }
        v
    }
}

/// A subgroup `p^j Z/p^n`, recorded by the exponent `j` of its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    pub group: CyclicGroup,
    pub index_exponent: u32,
}

impl Subgroup {
    pub fn order(&self) -> u64 {
        pow_u64(
            self.group.prime(),
            self.group.exponent() - self.index_exponent,
        )
    }

    pub fn generator(&self) -> u64 {
        pow_u64(self.group.prime(), self.index_exponent)
    }

    pub fn contains(&self, x: u64) -> bool {
        x % self.generator() == 0
    }

    /// The annihilator `{y : xy = 0 for all x in self}` in the dual,
    /// which is `p^(n-j) Z/p^n`.
    pub fn annihilator(&self) -> Subgroup {
        self.group
            .subgroup(self.group.exponent() - self.index_exponent)
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        let g = self.generator();
        (0..self.order()).map(move |k| k * g)
    }
}

/// An exact probability distribution on `Z/p^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    group: CyclicGroup,
    probs: Vec<BigRational>,
}

/// Serialization mirror: probabilities as `num/den` strings.
#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    p: u64,
    n: u32,
    probs: Vec<String>,
}

impl Serialize for FiniteDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DistributionRepr {
            p: self.group.prime(),
            n: self.group.exponent(),
            probs: self.probs.iter().map(|r| r.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        let probs: Result<Vec<BigRational>, _> = repr
            .probs
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect();
        FiniteDistribution::new(CyclicGroup::new(repr.p, repr.n), probs?)
            .map_err(serde::de::Error::custom)
    }
}

impl FiniteDistribution {
    pub fn new(group: CyclicGroup, probs: Vec<BigRational>) -> Result<Self, FiniteError> {
        if probs.len() as u64 != group.order() {
            return Err(FiniteError::WrongLength(probs.len(), group.order()));
        }
        let sum: BigRational = probs.iter().sum();
        if !sum.is_one() || probs.iter().any(|p| p.is_negative()) {
            return Err(FiniteError::NotADistribution(sum.to_string()));
        }
        Ok(FiniteDistribution { group, probs })
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn uniform(group: CyclicGroup) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(group.order()));
        FiniteDistribution {
            group,
            probs: vec![w; group.order() as usize],
        }
    }

    pub fn point_mass(group: CyclicGroup, x: u64) -> Self {
        let mut probs = vec![BigRational::zero(); group.order() as usize];
        probs[(x % group.order()) as usize] = BigRational::one();
        FiniteDistribution { group, probs }
    }

    /// Atoms with exact rational weights; weights must sum to 1.
    pub fn from_atoms(
        group: CyclicGroup,
        atoms: &[(u64, BigRational)],
    ) -> Result<Self, FiniteError> {
        let mut probs = vec![BigRational::zero(); group.order() as usize];
        for (x, w) in atoms {
            probs[(x % group.order()) as usize] += w;
        }
        FiniteDistribution::new(group, probs)
    }

    pub fn support(&self) -> Vec<u64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(x, _)| x as u64)
            .collect()
    }

    /// Translate by `t`: the distribution of `X + t`.
    pub fn shift(&self, t: u64) -> Self {
        let ord = self.group.order();
        let mut probs = vec![BigRational::zero(); ord as usize];
        for (x, p) in self.probs.iter().enumerate() {
            probs[((x as u64 + t) % ord) as usize] = p.clone();
        }
        FiniteDistribution {
            group: self.group,
            probs,
        }
    }

    /// The distribution of `-X`.
    pub fn reflect(&self) -> Self {
        let ord = self.group.order();
        let mut probs = vec![BigRational::zero(); ord as usize];
        for (x, p) in self.probs.iter().enumerate() {
            probs[((ord - x as u64) % ord) as usize] = p.clone();
        }
        FiniteDistribution {
            group: self.group,
            probs,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.probs.iter().filter(|p| !p.is_zero()).count() == 1
    }

    /// Exact idempotency test: the support is a coset of a subgroup and the
    /// weights are uniform on it (shifted Haar measure).
    pub fn is_idempotent(&self) -> bool {
        let support = self.support();
        let size = support.len() as u64;
        // Subgroup orders are powers of p.
        let p = self.group.prime();
        let mut s = size;
        while s % p == 0 {
            s /= p;
        }
        if s != 1 {
            return false;
        }
        let base = support[0];
        let sub = match subgroup_of_order(self.group, size) {
            Some(sub) => sub,
            None => return false,
        };
        let ord = self.group.order();
        let w = BigRational::new(BigInt::one(), BigInt::from(size));
        support.iter().all(|&x| {
            sub.contains((x + ord - base) % ord) && self.probs[x as usize] == w
        })
    }

    /// If idempotent, the pair (shift, subgroup).
    pub fn idempotent_parts(&self) -> Option<(u64, Subgroup)> {
        if !self.is_idempotent() {
            return None;
        }
        let support = self.support();
        let sub = subgroup_of_order(self.group, support.len() as u64)?;
        // Any support point is a valid coset representative; take the
        // smallest.
        Some((support[0] % sub.generator().max(1), sub))
    }
}

fn subgroup_of_order(group: CyclicGroup, order: u64) -> Option<Subgroup> {
    let mut j = group.exponent();
    let mut o = 1u64;
    while o < order {
        o *= group.prime();
        if j == 0 {
            return None;
        }
        j -= 1;
    }
    (o == order).then(|| group.subgroup(j))
}

/// Haar (uniform) measure on a subgroup.
pub fn haar_on(sub: Subgroup) -> FiniteDistribution {
    let ord = sub.group.order();
    let w = BigRational::new(BigInt::one(), BigInt::from(sub.order()));
    let mut probs = vec![BigRational::zero(); ord as usize];
    for x in sub.elements() {
        probs[x as usize] = w.clone();
    }
    FiniteDistribution {
        group: sub.group,
        probs,
    }
}

/// Exact convolution: the distribution of `X + Y` for independent `X, Y`.
pub fn convolve(
    a: &FiniteDistribution,
    b: &FiniteDistribution,
) -> Result<FiniteDistribution, FiniteError> {
    check_groups(a.group, b.group)?;
    let ord = a.group.order() as usize;
    let mut probs = vec![BigRational::zero(); ord];
    for (x, px) in a.probs.iter().enumerate() {
        if px.is_zero() {
            continue;
        }
        for (y, py) in b.probs.iter().enumerate() {
            if py.is_zero() {
                continue;
            }
            probs[(x + y) % ord] += px * py;
        }
    }
    Ok(FiniteDistribution {
        group: a.group,
        probs,
    })
}

/// The symmetrization `mu * reflect(mu)`; its characteristic function is
/// `|mu_hat|^2`.
pub fn symmetrize(mu: &FiniteDistribution) -> FiniteDistribution {
    convolve(mu, &mu.reflect()).expect("same group")
}

/// The distribution of `c * X` (image under the multiplier endomorphism).
pub fn push_forward(mu: &FiniteDistribution, multiplier: u64) -> FiniteDistribution {
    let ord = mu.group.order();
    let mut probs = vec![BigRational::zero(); ord as usize];
    for (x, p) in mu.probs.iter().enumerate() {
        probs[((x as u64 * multiplier) % ord) as usize] += p;
    }
    FiniteDistribution {
        group: mu.group,
        probs,
    }
}

fn check_groups(a: CyclicGroup, b: CyclicGroup) -> Result<(), FiniteError> {
    if a != b {
        return Err(FiniteError::GroupMismatch(
            a.prime(),
            a.exponent(),
            b.prime(),
            b.exponent(),
        ));
    }
    Ok(())
}

/// A characteristic function: complex table over the (self-)dual group,
/// with an optional exact indicator certificate when the values are exactly
/// the 0/1 indicator of a set.
#[derive(Clone, Debug)]
pub struct CharFunction {
    group: CyclicGroup,
    values: Vec<Complex64>,
    indicator: Option<Vec<bool>>,
}

/// Serialization mirror for characteristic functions.
#[derive(Serialize, Deserialize)]
struct CharRepr {
    p: u64,
    n: u32,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CharFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CharRepr {
            p: self.group.prime(),
            n: self.group.exponent(),
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CharFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CharRepr::deserialize(d)?;
        if repr.re.len() != repr.im.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let values: Vec<Complex64> = repr
            .re
            .iter()
            .zip(&repr.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        CharFunction::new(CyclicGroup::new(repr.p, repr.n), values)
            .map_err(serde::de::Error::custom)
    }
}

impl CharFunction {
    pub fn new(group: CyclicGroup, values: Vec<Complex64>) -> Result<Self, FiniteError> {
        if values.len() as u64 != group.order() {
            return Err(FiniteError::WrongLength(values.len(), group.order()));
        }
        let indicator = detect_indicator(&values);
        Ok(CharFunction {
            group,
            values,
            indicator,
        })
    }

    /// Builds the exact indicator of a subset given by membership flags.
    pub fn indicator(group: CyclicGroup, member: Vec<bool>) -> Result<Self, FiniteError> {
        if member.len() as u64 != group.order() {
            return Err(FiniteError::WrongLength(member.len(), group.order()));
        }
        let values = member
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        Ok(CharFunction {
            group,
            values,
            indicator: Some(member),
        })
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Exact 0/1 certificate, when the table is exactly an indicator.
    pub fn exact_indicator(&self) -> Option<&[bool]> {
        self.indicator.as_deref()
    }
}

fn detect_indicator(values: &[Complex64]) -> Option<Vec<bool>> {
    let mut member = Vec::with_capacity(values.len());
    for v in values {
        if v.im != 0.0 {
            return None;
        }
        if v.re == 1.0 {
            member.push(true);
        } else if v.re == 0.0 {
            member.push(false);
        } else {
            return None;
        }
    }
    Some(member)
}

/// Complex roots of unity `exp(2 pi i j / N)` for `j = 0..N`.
pub fn root_table(group: CyclicGroup) -> Vec<Complex64> {
    let ord = group.order();
    (0..ord)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / ord as f64))
        .collect()
}

/// The characteristic function `mu_hat(y) = sum_x mu(x) (x, y)`.
///
/// Haar measures on subgroup cosets produce exact indicator tables (times a
/// phase for nonzero shifts; only the unshifted case is marked exact).
pub fn char_fn(mu: &FiniteDistribution) -> CharFunction {
    let group = mu.group();
    let ord = group.order();
    // Exact fast path: Haar on a subgroup transforms to the indicator of
    // the annihilator.
    if let Some((shift, sub)) = mu.idempotent_parts() {
        if shift == 0 {
            let ann = sub.annihilator();
            let member: Vec<bool> = (0..ord).map(|y| ann.contains(y)).collect();
            return CharFunction::indicator(group, member).expect("length matches");
        }
    }
    let roots = root_table(group);
    let weights: Vec<f64> = mu.probs().iter().map(|p| rational_to_f64(p)).collect();
    let mut values = Vec::with_capacity(ord as usize);
    for y in 0..ord {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                acc += w * roots[((x as u64 * y) % ord) as usize];
            }
        }
        values.push(acc);
    }
    values[0] = Complex64::new(1.0, 0.0);
    CharFunction::new(group, values).expect("length matches")
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("probability fits in f64")
}

/// Inverse transform with rationalization: recovers an exact distribution
/// from a characteristic function, snapping each probability to the
/// smallest-denominator rational within `tol` (continued fractions) and
/// validating the result (near-real, near-nonnegative, exact sum 1).
pub fn from_char(f: &CharFunction, tol: f64) -> Result<FiniteDistribution, FiniteError> {
    let group = f.group();
    let ord = group.order();
    let roots = root_table(group);
    let mut probs = Vec::with_capacity(ord as usize);
    for x in 0..ord {
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, v) in f.values().iter().enumerate() {
            // Inverse pairing: conjugate root.
            acc += v * roots[((x * y as u64) % ord) as usize].conj();
        }
        acc /= ord as f64;
        if acc.im.abs() > tol {
            return Err(FiniteError::InvalidCharFunction(format!(
                "probability at {x} has imaginary part {}",
                acc.im
            )));
        }
        if acc.re < -tol {
            return Err(FiniteError::InvalidCharFunction(format!(
                "probability at {x} is negative ({})",
                acc.re
            )));
        }
        let q = rationalize(acc.re.max(0.0), tol).ok_or_else(|| {
            FiniteError::InvalidCharFunction(format!(
                "probability at {x} ({}) is not near a small rational",
                acc.re
            ))
        })?;
        probs.push(q);
    }
    let sum: BigRational = probs.iter().sum();
    if !sum.is_one() {
        return Err(FiniteError::InvalidCharFunction(format!(
            "rationalized probabilities sum to {sum}"
        )));
    }
    FiniteDistribution::new(group, probs)
}

/// Best rational approximation within `tol` via continued fractions, with a
/// denominator cap to reject values that are not close to a small rational.
fn rationalize(x: f64, tol: f64) -> Option<BigRational> {
    const MAX_DEN: i128 = 1 << 40;
    debug_assert!(x >= 0.0);
    let (mut h0, mut h1) = (1i128, x.floor() as i128);
    let (mut k0, mut k1) = (0i128, 1i128);
    let mut r = x;
    loop {
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - r.floor();
        if frac < f64::EPSILON || k1 > MAX_DEN {
            return None;
        }
        r = 1.0 / frac;
        let a = r.floor() as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
}

/// Extends a characteristic function defined on the `p^m`-torsion subgroup
/// of `target` (presented as a function on `Z/p^m`) by zero to the whole
/// dual.  The inner function is validated by inverse transform.
pub fn extend_by_zero(
    inner: &CharFunction,
    target: CyclicGroup,
    tol: f64,
) -> Result<CharFunction, FiniteError> {
    if inner.group().prime() != target.prime() || inner.group().exponent() > target.exponent() {
        return Err(FiniteError::NotASubgroup(
            inner.group().order(),
            target.order(),
        ));
    }
    // The inner table must itself be a characteristic function.
    from_char(inner, tol)?;
    let m = inner.group().exponent();
    let step = pow_u64(target.prime(), target.exponent() - m);
    let ord = target.order();
    let mut values = vec![Complex64::new(0.0, 0.0); ord as usize];
    for t in 0..inner.group().order() {
        // Torsion element p^(n-m) * t corresponds to inner argument t.
        values[(t * step) as usize] = inner.values()[t as usize];
    }
    CharFunction::new(target, values)
}

/// The exact set `{y : mu_hat(y) = 1}`, always a subgroup of the dual: the
/// annihilator of the subgroup generated by the support of `mu`.
pub fn one_set(mu: &FiniteDistribution) -> Subgroup {
    let group = mu.group();
    // gcd of the support with p^n is p^a with a the minimal valuation.
    let mut a = group.exponent();
    for x in mu.support() {
        a = a.min(group.element_valuation(x));
    }
    group.subgroup(group.exponent() - a)
}

/// Scales probabilities to integer numerators over a common denominator,
/// when the common denominator fits `u64`.  Used by exact hot loops.
pub(crate) fn common_numerators(mu: &FiniteDistribution) -> Option<(Vec<u64>, u64)> {
    let mut denom = BigUint::one();
    for p in mu.probs() {
        let d = p.denom().magnitude();
        denom = &denom * d / denom.gcd_lcm(d).0;
    }
    let denom_u = denom.to_u64()?;
    let mut nums = Vec::with_capacity(mu.probs().len());
    for p in mu.probs() {
        let scaled = p * BigRational::from_integer(BigInt::from(denom_u));
        debug_assert!(scaled.is_integer());
        nums.push(scaled.to_integer().to_u64()?);
    }
    Some((nums, denom_u))
}
