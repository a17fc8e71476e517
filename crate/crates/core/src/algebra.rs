//! Graded scalars: complex numbers and Grassmann numbers over a finite
//! generator pool.
//!
//! A [`Grassmann`] element is a finite sum of monomials `c · θ_{i1} θ_{i2} …`
//! where the generator subset is stored as a bitmask in ascending order.
//! Products fold the permutation sign of the merge into the coefficient, so
//! `θ_i θ_j = −θ_j θ_i` and `θ_i θ_i = 0` hold exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Bitmask over generator indices `0..64`.
pub type Mask = u64;

/// Upper bound on generators in one evaluation run.
pub const MAX_GENERATORS: u32 = Mask::BITS;

/// Absolute guard used by [`near_zero`] when the scale vanishes.
pub const ZERO_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator pool exhausted: {requested} generators requested, capacity {capacity}")]
    PoolExhausted { requested: u32, capacity: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_mask(mask: Mask) -> Self {
        if mask.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// A single anticommuting generator handed out by a [`GeneratorPool`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u32);

impl Generator {
    pub fn index(self) -> u32 {
        self.0
    }

    pub fn mask(self) -> Mask {
        1 << self.0
    }
}

/// Allocator of fresh generators for one evaluation run.
///
/// Generators are never reused: every independent fermionic component of a
/// sample gets its own.
#[derive(Debug, Clone, Default)]
pub struct GeneratorPool {
    next: u32,
}

impl GeneratorPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of generators allocated so far.
    pub fn count(&self) -> u32 {
        self.next
    }

    pub fn fresh(&mut self) -> Result<Generator, AlgebraError> {
        if self.next >= MAX_GENERATORS {
            return Err(AlgebraError::PoolExhausted {
                requested: self.next + 1,
                capacity: MAX_GENERATORS,
            });
        }
        let g = Generator(self.next);
        self.next += 1;
        Ok(g)
    }
}

/// Sign picked up when the ascending word `a` is followed by the ascending
/// word `b` and the concatenation is sorted. Masks must be disjoint.
#[inline]
pub fn merge_sign(a: Mask, b: Mask) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> j >> 1).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of reversing a word of `k` generators.
#[inline]
fn reversal_sign(k: u32) -> f64 {
    if (k * k.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Element of the Grassmann algebra with complex coefficients.
#[derive(Clone, Default, PartialEq)]
pub struct Grassmann {
    // sorted by mask, no exact zeros
    terms: Vec<(Mask, Complex64)>,
}

impl Grassmann {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn real(x: f64) -> Self {
        Self::scalar(Complex64::new(x, 0.0))
    }

    pub fn generator(g: Generator) -> Self {
        Self::monomial(g.mask(), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(mask: Mask, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            Self::zero()
        } else {
            Self { terms: vec![(mask, c)] }
        }
    }

    /// Builds an element from arbitrary `(mask, coefficient)` pairs, merging
    /// duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Mask, Complex64)>>(terms: I) -> Self {
        let mut v: Vec<(Mask, Complex64)> = terms.into_iter().collect();
        v.sort_by_key(|t| t.0);
        let mut out: Vec<(Mask, Complex64)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| t.1 != Complex64::new(0.0, 0.0));
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(Mask, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> Complex64 {
        match self.terms.first() {
            Some((0, c)) => *c,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn coefficient(&self, mask: Mask) -> Complex64 {
        self.terms
            .binary_search_by_key(&mask, |t| t.0)
            .map(|i| self.terms[i].1)
            .unwrap_or_default()
    }

    /// `Some(parity)` when every stored monomial has the same parity; zero is even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.iter().map(|t| Parity::of_mask(t.0));
        let first = match it.next() {
            Some(p) => p,
            None => return Some(Parity::Even),
        };
        it.all(|p| p == first).then_some(first)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max)
    }

    pub fn sum_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|&(m, v)| (m, v * c)).collect(),
        }
    }

    pub fn mul_ref(&self, other: &Grassmann) -> Grassmann {
        match (self.terms.len(), other.terms.len()) {
            (0, _) | (_, 0) => return Grassmann::zero(),
            (1, 1) => {
                let (ma, ca) = self.terms[0];
                let (mb, cb) = other.terms[0];
                if ma & mb != 0 {
                    return Grassmann::zero();
                }
                return Grassmann::monomial(ma | mb, ca * cb * merge_sign(ma, mb));
            }
            _ => {}
        }
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                if ma & mb == 0 {
                    out.push((ma | mb, ca * cb * merge_sign(ma, mb)));
                }
            }
        }
        Grassmann::from_terms(out)
    }

    pub fn add_ref(&self, other: &Grassmann) -> Grassmann {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a[i].1 + b[j].1;
                    if c != Complex64::new(0.0, 0.0) {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Grassmann { terms: out }
    }

    /// Complex conjugation with reversal of every generator word:
    /// `conj(c θ1…θk) = c̄ θk…θ1`, so `conj(ab) = conj(b) conj(a)`.
    pub fn conjugate(&self) -> Grassmann {
        Grassmann {
            terms: self
                .terms
                .iter()
                .map(|&(m, c)| (m, c.conj() * reversal_sign(m.count_ones())))
                .collect(),
        }
    }
}

impl fmt::Debug for Grassmann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.3e}{:+.3e}i)", c.re, c.im)?;
            let mut rest = *m;
            while rest != 0 {
                write!(f, "θ{}", rest.trailing_zeros())?;
                rest &= rest - 1;
            }
        }
        Ok(())
    }
}

impl Add for Grassmann {
    type Output = Grassmann;
    fn add(self, rhs: Grassmann) -> Grassmann {
        self.add_ref(&rhs)
    }
}

impl Sub for Grassmann {
    type Output = Grassmann;
    fn sub(self, rhs: Grassmann) -> Grassmann {
        self.add_ref(&-rhs)
    }
}

impl Mul for Grassmann {
    type Output = Grassmann;
    fn mul(self, rhs: Grassmann) -> Grassmann {
        self.mul_ref(&rhs)
    }
}

impl Neg for Grassmann {
    type Output = Grassmann;
    fn neg(self) -> Grassmann {
        Grassmann {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl<'a> Add<&'a Grassmann> for &'a Grassmann {
    type Output = Grassmann;
    fn add(self, rhs: &Grassmann) -> Grassmann {
        self.add_ref(rhs)
    }
}

impl<'a> Sub<&'a Grassmann> for &'a Grassmann {
    type Output = Grassmann;
    fn sub(self, rhs: &Grassmann) -> Grassmann {
        self.add_ref(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }
}

impl<'a> Mul<&'a Grassmann> for &'a Grassmann {
    type Output = Grassmann;
    fn mul(self, rhs: &Grassmann) -> Grassmann {
        self.mul_ref(rhs)
    }
}

/// `true` iff every coefficient of `a` is within `tol · max(scale, floor)`.
pub fn near_zero(a: &Grassmann, scale: f64, tol: f64) -> bool {
    a.max_abs() <= tol * scale.max(ZERO_FLOOR)
}

/// Arithmetic shared by the scalar types that family evaluators are generic
/// over: plain complex numbers, Grassmann numbers and [`Magnitude`].
pub trait GradedScalar: Clone + Send + Sync + fmt::Debug + 'static {
    fn zero() -> Self;
    fn from_complex(c: Complex64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, c: Complex64) -> Self;
    fn conjugate(&self) -> Self;
    fn to_grassmann(&self) -> Grassmann;

    fn is_zero(&self) -> bool {
        self.to_grassmann().is_zero()
    }

    /// `None` for mixed-parity values.
    fn parity(&self) -> Option<Parity> {
        self.to_grassmann().parity()
    }

    fn one() -> Self {
        Self::from_complex(Complex64::new(1.0, 0.0))
    }

    fn accumulate(&mut self, other: &Self) {
        *self = self.plus(other);
    }
}

impl GradedScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: Complex64) -> Self {
        self * c
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn to_grassmann(&self) -> Grassmann {
        Grassmann::scalar(*self)
    }
    fn parity(&self) -> Option<Parity> {
        Some(Parity::Even)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
}

impl GradedScalar for Grassmann {
    fn zero() -> Self {
        Grassmann::zero()
    }
    fn from_complex(c: Complex64) -> Self {
        Grassmann::scalar(c)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add_ref(other)
    }
    fn minus(&self, other: &Self) -> Self {
        self.add_ref(&other.scale(Complex64::new(-1.0, 0.0)))
    }
    fn times(&self, other: &Self) -> Self {
        self.mul_ref(other)
    }
    fn scaled(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn conjugate(&self) -> Self {
        Grassmann::conjugate(self)
    }
    fn to_grassmann(&self) -> Grassmann {
        self.clone()
    }
    fn parity(&self) -> Option<Parity> {
        Grassmann::parity(self)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Pre-cancellation magnitude accumulator: every operation adds or multiplies
/// absolute values, so evaluating an expression over `Magnitude` yields the sum
/// of the absolute values of its monomials (an upper bound for Grassmann
/// inputs).
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Magnitude(pub f64);

impl Magnitude {
    pub fn of(g: &Grassmann) -> Self {
        Magnitude(g.sum_abs())
    }
}

impl GradedScalar for Magnitude {
    fn zero() -> Self {
        Magnitude(0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        Magnitude(c.norm())
    }
    fn plus(&self, other: &Self) -> Self {
        Magnitude(self.0 + other.0)
    }
    fn minus(&self, other: &Self) -> Self {
        Magnitude(self.0 + other.0)
    }
    fn times(&self, other: &Self) -> Self {
        Magnitude(self.0 * other.0)
    }
    fn scaled(&self, c: Complex64) -> Self {
        Magnitude(self.0 * c.norm())
    }
    fn conjugate(&self) -> Self {
        *self
    }
    fn to_grassmann(&self) -> Grassmann {
        Grassmann::real(self.0)
    }
    fn parity(&self) -> Option<Parity> {
        Some(Parity::Even)
    }
}
