//! Numerical discovery of linear relations among scalar families.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use super::{stream_rng, TensorError};
use crate::algebra::Grassmann;

/// Singular values below this fraction of the largest count as null.
pub const RANK_TOL: f64 = 1e-8;
/// Distance to the nearest integer accepted by the integer-pattern recovery.
pub const INTEGER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum RelationVector {
    Integer(Vec<i64>),
    Raw(Vec<Complex64>),
}

impl RelationVector {
    pub fn as_complex(&self) -> Vec<Complex64> {
        match self {
            RelationVector::Integer(v) => v.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect(),
            RelationVector::Raw(v) => v.clone(),
        }
    }
}

impl Serialize for RelationVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RelationVector::Integer(v) => v.serialize(s),
            RelationVector::Raw(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for c in v {
                    seq.serialize_element(&[c.re, c.im])?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelationBasis {
    pub labels: Vec<String>,
    /// Rows are (sample, generator monomial) pairs, normalized per sample.
    pub matrix: Vec<Vec<Complex64>>,
    pub singular_values: Vec<f64>,
    pub rank_tol: f64,
    pub basis: Vec<RelationVector>,
    /// Largest relative residual of each basis vector over the samples.
    pub residuals: Vec<f64>,
}

impl RelationBasis {
    pub fn nullspace_dim(&self) -> usize {
        self.basis.len()
    }

    /// Least-squares distance of `v` (normalized) from the nullspace.
    pub fn distance_from_nullspace(&self, v: &[Complex64]) -> f64 {
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || self.basis.is_empty() {
            return 1.0;
        }
        let vs: Vec<Vec<Complex64>> = self.basis.iter().map(|b| b.as_complex()).collect();
        let k = vs.len();
        let n = v.len();
        let b = DMatrix::from_fn(n, k, |i, j| vs[j][i]);
        let rhs = DMatrix::from_fn(n, 1, |i, _| v[i] / norm);
        let svd = b.clone().svd(true, true);
        let x = match svd.solve(&rhs, 1e-12) {
            Ok(x) => x,
            Err(_) => return 1.0,
        };
        (b * x - rhs).norm()
    }
}

/// Evaluates a family on `count` independent sample streams, in order.
pub fn sample_family<F>(count: usize, seed: u64, family: u64, f: F) -> Result<Vec<Vec<Grassmann>>, TensorError>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Vec<Grassmann>, TensorError> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|k| f(&mut stream_rng(seed, family, k as u64)))
        .collect()
}

/// Nullspace of the samples × members matrix of a scalar family.
///
/// `samples[s][j]` is member `j` evaluated on sample `s`. Grassmann values are
/// flattened into one row per generator monomial.
pub fn find_linear_relations(labels: &[String], samples: &[Vec<Grassmann>]) -> Result<RelationBasis, TensorError> {
    let cols = labels.len();
    if cols == 0 {
        return Err(TensorError::EmptyFamily);
    }
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (s, members) in samples.iter().enumerate() {
        if members.len() != cols {
            return Err(TensorError::RaggedFamily { sample: s });
        }
        let mut masks: Vec<u64> = members.iter().flat_map(|m| m.terms().iter().map(|t| t.0)).collect();
        masks.sort_unstable();
        masks.dedup();
        let block: Vec<Vec<Complex64>> = masks
            .iter()
            .map(|&mask| members.iter().map(|m| m.coefficient(mask)).collect())
            .collect();
        let peak = block.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            rows.extend(block.into_iter().map(|r| r.into_iter().map(|c| c / peak).collect()));
        }
    }
    if rows.is_empty() {
        return Err(TensorError::DegenerateSampling);
    }
    let n_rows = rows.len().max(cols);
    let a = DMatrix::from_fn(n_rows, cols, |i, j| {
        rows.get(i).map(|r| r[j]).unwrap_or_default()
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Err(TensorError::DegenerateSampling);
    }
    let null: Vec<Vec<Complex64>> = (0..sigma.len())
        .filter(|&k| sigma[k] < RANK_TOL * sigma_max)
        .map(|k| (0..cols).map(|j| v_t[(k, j)].conj()).collect())
        .collect();
    let reduced = rref(null);
    let basis: Vec<RelationVector> = reduced
        .into_iter()
        .map(|v| match integer_pattern(&v) {
            Some(ints) => RelationVector::Integer(ints),
            None => RelationVector::Raw(normalize_phase(&v)),
        })
        .collect();
    let residuals = basis
        .iter()
        .map(|b| max_relative_residual(&b.as_complex(), samples))
        .collect();
    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(RelationBasis {
        labels: labels.to_vec(),
        matrix: rows,
        singular_values,
        rank_tol: RANK_TOL,
        basis,
        residuals,
    })
}

/// Largest over samples of max-coefficient residual divided by the summand scale.
pub fn max_relative_residual(v: &[Complex64], samples: &[Vec<Grassmann>]) -> f64 {
    samples
        .iter()
        .map(|members| {
            let mut sum = Grassmann::zero();
            let mut scale = 0.0;
            for (c, m) in v.iter().zip(members) {
                sum = sum.add_ref(&m.scale(*c));
                scale += c.norm() * m.max_abs();
            }
            sum.max_abs() / scale.max(crate::algebra::ZERO_FLOOR)
        })
        .fold(0.0, f64::max)
}

fn rref(mut m: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let rows = m.len();
    if rows == 0 {
        return m;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, m[i][c].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < 1e-12 {
            continue;
        }
        m.swap(r, p);
        let pivot = m[r][c];
        for x in m[r].iter_mut() {
            *x /= pivot;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                if f != Complex64::new(0.0, 0.0) {
                    for j in 0..cols {
                        let d = f * m[r][j];
                        m[i][j] -= d;
                    }
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

fn normalize_phase(v: &[Complex64]) -> Vec<Complex64> {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    match v.iter().find(|x| x.norm() > 1e-9 * peak) {
        Some(first) => {
            let ph = first / first.norm();
            v.iter().map(|x| x / ph).collect()
        }
        None => v.to_vec(),
    }
}

/// Rescales so the smallest nonzero entry has modulus one and the first
/// nonzero entry is positive; accepts if every entry is then an integer.
pub fn integer_pattern(v: &[Complex64]) -> Option<Vec<i64>> {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return None;
    }
    let cutoff = 1e-9 * peak;
    let smallest = v.iter().map(|x| x.norm()).filter(|&n| n > cutoff).fold(f64::INFINITY, f64::min);
    let w = normalize_phase(v);
    let mut out = Vec::with_capacity(v.len());
    for x in w {
        let y = x / smallest;
        let k = y.re.round();
        if (y.re - k).abs() > INTEGER_TOL || y.im.abs() > INTEGER_TOL {
            return None;
        }
        out.push(k as i64);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sampling::{complex_gaussian, family_key};

    #[test]
    fn constructed_relation() {
        let labels: Vec<String> = ["x2", "y2", "x2+y2"].iter().map(|s| s.to_string()).collect();
        let samples = sample_family(20, 9, family_key("xy"), |rng| {
            let x = complex_gaussian(rng);
            let y = complex_gaussian(rng);
            Ok(vec![
                Grassmann::scalar(x * x),
                Grassmann::scalar(y * y),
                Grassmann::scalar(x * x + y * y),
            ])
        })
        .unwrap();
        let r = find_linear_relations(&labels, &samples).unwrap();
        assert_eq!(r.nullspace_dim(), 1);
        assert_eq!(r.basis[0], RelationVector::Integer(vec![1, 1, -1]));
        assert!(r.residuals[0] < 1e-12);
    }

    #[test]
    fn degenerate_sampling_reported() {
        let labels = vec!["a".to_string()];
        let samples = vec![vec![Grassmann::zero()]; 3];
        assert_eq!(
            find_linear_relations(&labels, &samples).unwrap_err(),
            TensorError::DegenerateSampling
        );
    }

    #[test]
    fn few_samples_still_give_full_nullspace() {
        // one sample, three members: rank ≤ 1
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let samples = vec![vec![Grassmann::real(1.0), Grassmann::real(2.0), Grassmann::real(3.0)]];
        let r = find_linear_relations(&labels, &samples).unwrap();
        assert_eq!(r.nullspace_dim(), 2);
    }

    #[test]
    fn integer_patterns() {
        let v: Vec<Complex64> = [1.0, -1.0, 0.5, -0.5].iter().map(|&x| Complex64::new(-x, 0.0)).collect();
        assert_eq!(integer_pattern(&v), Some(vec![2, -2, 1, -1]));
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(0.3333, 0.0)];
        assert_eq!(integer_pattern(&v), None);
    }
}
