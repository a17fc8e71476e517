//! Dense multi-index tensors with typed slots over a graded scalar type.

pub mod einsum;
pub mod relations;
pub mod sampling;
pub mod schemes;

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use thiserror::Error;

use crate::algebra::{Grassmann, GradedScalar, Parity};

pub use relations::{find_linear_relations, RelationBasis, RelationVector};
pub use sampling::{sample_random, stream_rng, Statistics};
pub use schemes::{
    apply_scheme, enumerate_pair_contractions, ContractionScheme, Pairing, PairingContext, PairingKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Species {
    Spacetime,
    Spinor,
    SpinorDotted,
    Isospin,
    UnitLine,
}

impl Species {
    pub fn dim(self) -> usize {
        match self {
            Species::Spacetime => 4,
            Species::Spinor | Species::SpinorDotted | Species::Isospin => 2,
            Species::UnitLine => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Spacetime => "spacetime",
            Species::Spinor => "spinor",
            Species::SpinorDotted => "spinor-dotted",
            Species::Isospin => "isospin",
            Species::UnitLine => "unit-line",
        }
    }

    pub fn parse(s: &str) -> Option<Species> {
        Some(match s {
            "spacetime" => Species::Spacetime,
            "spinor" => Species::Spinor,
            "spinor-dotted" | "dotted" => Species::SpinorDotted,
            "isospin" => Species::Isospin,
            "unit-line" => Species::UnitLine,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub species: Species,
    pub variance: Variance,
}

impl Slot {
    pub const fn new(species: Species, variance: Variance) -> Self {
        Slot { species, variance }
    }
    pub const fn up(species: Species) -> Self {
        Slot::new(species, Variance::Up)
    }
    pub const fn down(species: Species) -> Self {
        Slot::new(species, Variance::Down)
    }
    pub fn dim(self) -> usize {
        self.species.dim()
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.variance {
            Variance::Up => "up",
            Variance::Down => "down",
        };
        write!(f, "{} {}", self.species.name(), v)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("cannot contract slot {a} ({left}) with slot {b} ({right})")]
    SlotMismatch { a: usize, b: usize, left: Slot, right: Slot },
    #[error("slot index {index} out of range for rank {rank}")]
    SlotOutOfRange { index: usize, rank: usize },
    #[error("data length {got} does not match slot dimensions (expected {expected})")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("entry {index} breaks uniform parity")]
    MixedParity { index: usize },
    #[error("species group {species} has odd size {size}")]
    OddGroup { species: &'static str, size: usize },
    #[error("scheme does not pair every slot")]
    IncompleteScheme,
    #[error("invalid slot permutation")]
    InvalidPermutation,
    #[error("sample matrix is identically zero; try a different seed")]
    DegenerateSampling,
    #[error("index {label} {reason}")]
    Index { label: u32, reason: &'static str },
    #[error("relation family is empty")]
    EmptyFamily,
    #[error("family members disagree in length at sample {sample}")]
    RaggedFamily { sample: usize },
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// Dense tensor with typed slots. Entries are stored row-major.
#[derive(Clone, PartialEq)]
pub struct Tensor<T = Grassmann> {
    slots: Vec<Slot>,
    data: Vec<T>,
    parity: Parity,
    scale_weight: Rational64,
}

impl<T: fmt::Debug> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("slots", &self.slots)
            .field("parity", &self.parity)
            .field("data", &self.data)
            .finish()
    }
}

fn volume(slots: &[Slot]) -> usize {
    slots.iter().map(|s| s.dim()).product()
}

impl<T: GradedScalar> Tensor<T> {
    /// Builds a tensor and infers its parity; zero entries are compatible with
    /// either parity.
    pub fn new(slots: Vec<Slot>, data: Vec<T>) -> Result<Self, TensorError> {
        let expected = volume(&slots);
        if data.len() != expected {
            return Err(TensorError::ShapeMismatch { expected, got: data.len() });
        }
        let mut parity: Option<Parity> = None;
        for (index, x) in data.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let p = x.parity().ok_or(TensorError::MixedParity { index })?;
            match parity {
                None => parity = Some(p),
                Some(q) if q != p => return Err(TensorError::MixedParity { index }),
                _ => {}
            }
        }
        Ok(Tensor {
            slots,
            data,
            parity: parity.unwrap_or(Parity::Even),
            scale_weight: Rational64::from_integer(0),
        })
    }

    pub fn from_fn(slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self, TensorError> {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim()).collect();
        let mut data = Vec::with_capacity(volume(&slots));
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..volume(&slots) {
            data.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Tensor::new(slots, data)
    }

    pub fn zeros(slots: Vec<Slot>) -> Self {
        let n = volume(&slots);
        Tensor {
            slots,
            data: vec![T::zero(); n],
            parity: Parity::Even,
            scale_weight: Rational64::from_integer(0),
        }
    }

    pub fn scalar(value: T) -> Self {
        Tensor {
            slots: Vec::new(),
            parity: value.parity().unwrap_or(Parity::Even),
            data: vec![value],
            scale_weight: Rational64::from_integer(0),
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim()).collect()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Exponent of the length unit carried by the tensor.
    pub fn scale_weight(&self) -> Rational64 {
        self.scale_weight
    }

    pub fn with_scale_weight(mut self, w: Rational64) -> Self {
        self.scale_weight = w;
        self
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims())
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        for (s, &i) in self.slots.iter().zip(idx) {
            off = off * s.dim() + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    /// Value of a rank-0 tensor.
    pub fn value(&self) -> &T {
        &self.data[0]
    }

    pub fn map<U: GradedScalar>(&self, f: impl Fn(&T) -> U) -> Result<Tensor<U>, TensorError> {
        Ok(Tensor::new(self.slots.clone(), self.data.iter().map(f).collect())?
            .with_scale_weight(self.scale_weight))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Tensor {
            slots: self.slots.clone(),
            data: self.data.iter().map(|x| x.scaled(c)).collect(),
            parity: self.parity,
            scale_weight: self.scale_weight,
        }
    }

    pub fn add(&self, other: &Tensor<T>) -> Result<Self, TensorError> {
        if self.slots != other.slots {
            return Err(TensorError::ShapeMismatch {
                expected: volume(&self.slots),
                got: volume(&other.slots),
            });
        }
        Tensor::new(
            self.slots.clone(),
            self.data.iter().zip(&other.data).map(|(a, b)| a.plus(b)).collect(),
        )
        .map(|t| t.with_scale_weight(self.scale_weight))
    }

    /// Einstein summation over one up slot and one down slot of the same
    /// species. Remaining slots keep their order.
    pub fn contract(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        let rank = self.rank();
        for index in [a, b] {
            if index >= rank {
                return Err(TensorError::SlotOutOfRange { index, rank });
            }
        }
        let (left, right) = (self.slots[a], self.slots[b]);
        if a == b || left.species != right.species || left.variance == right.variance {
            return Err(TensorError::SlotMismatch { a, b, left, right });
        }
        let kept: Vec<usize> = (0..rank).filter(|&k| k != a && k != b).collect();
        let out_slots: Vec<Slot> = kept.iter().map(|&k| self.slots[k]).collect();
        let out_dims: Vec<usize> = out_slots.iter().map(|s| s.dim()).collect();
        let st = self.strides();
        let mut data = Vec::with_capacity(volume(&out_slots));
        let mut idx = vec![0usize; kept.len()];
        for _ in 0..volume(&out_slots) {
            let base: usize = kept.iter().zip(&idx).map(|(&k, &i)| st[k] * i).sum();
            let mut acc = T::zero();
            for d in 0..left.dim() {
                acc.accumulate(&self.data[base + d * (st[a] + st[b])]);
            }
            data.push(acc);
            advance(&mut idx, &out_dims);
        }
        Ok(Tensor {
            slots: out_slots,
            data,
            parity: self.parity,
            scale_weight: self.scale_weight,
        })
    }

    /// Reorders slots: slot `k` of the result is slot `perm[k]` of `self`.
    /// Entries are untouched, so no graded sign arises.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank {
            return Err(TensorError::InvalidPermutation);
        }
        for &p in perm {
            if p >= rank || seen[p] {
                return Err(TensorError::InvalidPermutation);
            }
            seen[p] = true;
        }
        let st = self.strides();
        let slots: Vec<Slot> = perm.iter().map(|&p| self.slots[p]).collect();
        let dims: Vec<usize> = slots.iter().map(|s| s.dim()).collect();
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(self.data.len());
        for _ in 0..self.data.len() {
            let off: usize = perm.iter().zip(&idx).map(|(&p, &i)| st[p] * i).sum();
            data.push(self.data[off].clone());
            advance(&mut idx, &dims);
        }
        Ok(Tensor {
            slots,
            data,
            parity: self.parity,
            scale_weight: self.scale_weight,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.to_grassmann().max_abs())
            .fold(0.0, f64::max)
    }
}

/// Ordered tensor product. Entries are multiplied in factor order, so the
/// Grassmann signs of any later reordering are fixed relative to this order.
pub fn graded_product<T: GradedScalar>(factors: &[Tensor<T>]) -> Tensor<T> {
    let mut acc = Tensor::scalar(T::one());
    for f in factors {
        let mut data = Vec::with_capacity(acc.data.len() * f.data.len());
        for a in &acc.data {
            for b in &f.data {
                data.push(a.times(b));
            }
        }
        let mut slots = acc.slots.clone();
        slots.extend_from_slice(&f.slots);
        acc = Tensor {
            slots,
            data,
            parity: acc.parity.combine(f.parity),
            scale_weight: acc.scale_weight + f.scale_weight,
        };
    }
    acc
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * dims[k + 1];
    }
    st
}

/// Row-major odometer increment.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}
