//! Enumeration of full pairings of tensor slots by δ, ε and metric objects.
//!
//! Within a species group the matchings come in lexicographic order (the
//! smallest unmatched slot is paired with each later slot in turn). A pair of
//! opposite variance is closed by δ; a pair of equal variance by ε of the
//! species (the metric for spacetime). Because ε is antisymmetric the
//! orientation of each ε pair matters: δ pairs are read up-slot first, and if
//! the concatenated pair sequence is an odd permutation of the group, the
//! first ε pair is flipped. With this rule the three pairings of four lower
//! spinor slots ABCD are ε^{AB}ε^{CD}, ε^{CA}ε^{BD}, ε^{AD}ε^{BC}.

use std::fmt;

use num_complex::Complex64;

use super::{Slot, Species, Tensor, TensorError, Variance};
use crate::algebra::GradedScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    Delta,
    Epsilon,
    Metric,
}

/// One pairing of two slots. For ε and metric pairings the inserted object
/// carries indices opposite to the slots' common variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pairing {
    pub first: usize,
    pub second: usize,
    pub species: Species,
    pub kind: PairingKind,
    pub slot_variance: (Variance, Variance),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContractionScheme {
    pub pairings: Vec<Pairing>,
}

impl ContractionScheme {
    /// Renders the scheme with the given slot labels, e.g. `eps^{CA} eps^{BD}`.
    pub fn render(&self, labels: &[String]) -> String {
        let mut parts = Vec::new();
        for p in &self.pairings {
            let (a, b) = (&labels[p.first], &labels[p.second]);
            let name = match (p.kind, p.species) {
                (PairingKind::Delta, Species::Spinor) => "deltaS",
                (PairingKind::Delta, Species::SpinorDotted) => "deltaSbar",
                (PairingKind::Delta, Species::Spacetime) => "g",
                (PairingKind::Delta, _) => "delta",
                (PairingKind::Metric, _) => "g",
                (PairingKind::Epsilon, Species::Spinor) => "epsS",
                (PairingKind::Epsilon, Species::SpinorDotted) => "epsSbar",
                (PairingKind::Epsilon, _) => "eps",
            };
            let s = match (p.kind, p.slot_variance.0) {
                (PairingKind::Delta, Variance::Up) => format!("{name}_{{{a}}}^{{{b}}}"),
                (PairingKind::Delta, Variance::Down) => format!("{name}^{{{a}}}_{{{b}}}"),
                (_, Variance::Down) => format!("{name}^{{{a} {b}}}"),
                (_, Variance::Up) => format!("{name}_{{{a} {b}}}"),
            };
            parts.push(s);
        }
        parts.join(" ")
    }
}

/// Numerical values of the pairing objects: phases of the spinor and isospin
/// symplectic forms and the spacetime metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingContext {
    pub spinor_phase: Complex64,
    pub isospin_phase: Complex64,
    pub metric: [f64; 4],
}

impl Default for PairingContext {
    fn default() -> Self {
        PairingContext {
            spinor_phase: Complex64::new(1.0, 0.0),
            isospin_phase: Complex64::new(1.0, 0.0),
            metric: [1.0, -1.0, -1.0, -1.0],
        }
    }
}

const E: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

impl PairingContext {
    pub fn with_phases(spinor_phase: Complex64, isospin_phase: Complex64) -> Self {
        PairingContext {
            spinor_phase,
            isospin_phase,
            ..Default::default()
        }
    }

    /// Weight matrix `w[a][b]` of the object closing slots of the given
    /// variances (`a` runs over the first slot).
    pub fn weight(&self, species: Species, kind: PairingKind, var: Variance) -> Vec<Vec<Complex64>> {
        let n = species.dim();
        let identity = || {
            (0..n)
                .map(|a| (0..n).map(|b| Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect()
        };
        match kind {
            PairingKind::Delta => identity(),
            PairingKind::Metric => (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| Complex64::new(if a == b { self.metric[a] } else { 0.0 }, 0.0))
                        .collect()
                })
                .collect(),
            PairingKind::Epsilon => {
                // lower components carry the phase, upper ones its inverse;
                // the dotted form is the conjugate
                let lower = match species {
                    Species::Spinor => self.spinor_phase,
                    Species::SpinorDotted => self.spinor_phase.conj(),
                    _ => self.isospin_phase,
                };
                let phase = match var {
                    Variance::Up => lower,
                    Variance::Down => lower.conj(),
                };
                E.iter()
                    .map(|row| row.iter().map(|&x| phase * x).collect())
                    .collect()
            }
        }
    }
}

fn kind_for(species: Species, a: Variance, b: Variance) -> PairingKind {
    if a != b {
        PairingKind::Delta
    } else if species == Species::Spacetime {
        PairingKind::Metric
    } else {
        PairingKind::Epsilon
    }
}

fn perfect_matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|&(j, _)| j + 1 != k).map(|(_, &x)| x).collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, items[k]));
            out.push(m);
        }
    }
    out
}

fn permutation_is_odd(seq: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

fn orient(matching: &[(usize, usize)], slots: &[Slot]) -> Vec<Pairing> {
    let mut pairs: Vec<Pairing> = matching
        .iter()
        .map(|&(a, b)| {
            let (va, vb) = (slots[a].variance, slots[b].variance);
            let species = slots[a].species;
            let kind = kind_for(species, va, vb);
            let (first, second) = if kind == PairingKind::Delta && va == Variance::Down {
                (b, a)
            } else {
                (a, b)
            };
            Pairing {
                first,
                second,
                species,
                kind,
                slot_variance: (slots[first].variance, slots[second].variance),
            }
        })
        .collect();
    let seq: Vec<usize> = pairs.iter().flat_map(|p| [p.first, p.second]).collect();
    if permutation_is_odd(&seq) {
        if let Some(p) = pairs.iter_mut().find(|p| p.kind == PairingKind::Epsilon) {
            std::mem::swap(&mut p.first, &mut p.second);
        }
    }
    pairs
}

/// All full pairings of `slots`, grouped by species (groups in order of first
/// appearance) and combined as a Cartesian product with the first group
/// varying slowest.
pub fn enumerate_pair_contractions(slots: &[Slot]) -> Result<Vec<ContractionScheme>, TensorError> {
    let mut groups: Vec<(Species, Vec<usize>)> = Vec::new();
    for (k, s) in slots.iter().enumerate() {
        match groups.iter_mut().find(|g| g.0 == s.species) {
            Some(g) => g.1.push(k),
            None => groups.push((s.species, vec![k])),
        }
    }
    let mut per_group: Vec<Vec<Vec<Pairing>>> = Vec::new();
    for (species, members) in &groups {
        if members.len() % 2 == 1 {
            return Err(TensorError::OddGroup {
                species: species.name(),
                size: members.len(),
            });
        }
        per_group.push(perfect_matchings(members).iter().map(|m| orient(m, slots)).collect());
    }
    let mut schemes = vec![ContractionScheme { pairings: Vec::new() }];
    for options in per_group {
        let mut next = Vec::with_capacity(schemes.len() * options.len());
        for s in &schemes {
            for o in &options {
                let mut p = s.pairings.clone();
                p.extend_from_slice(o);
                next.push(ContractionScheme { pairings: p });
            }
        }
        schemes = next;
    }
    Ok(schemes)
}

/// Fully contracts `t` with the pairing objects of `scheme`.
pub fn apply_scheme<T: GradedScalar>(
    t: &Tensor<T>,
    scheme: &ContractionScheme,
    ctx: &PairingContext,
) -> Result<T, TensorError> {
    let rank = t.rank();
    let mut covered = vec![false; rank];
    for p in &scheme.pairings {
        for k in [p.first, p.second] {
            if k >= rank || covered[k] {
                return Err(TensorError::IncompleteScheme);
            }
            covered[k] = true;
        }
        let (a, b) = (t.slots()[p.first], t.slots()[p.second]);
        if a.species != b.species || a.species != p.species {
            return Err(TensorError::SlotMismatch {
                a: p.first,
                b: p.second,
                left: a,
                right: b,
            });
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(TensorError::IncompleteScheme);
    }
    let weights: Vec<Vec<(usize, usize, Complex64)>> = scheme
        .pairings
        .iter()
        .map(|p| {
            let w = ctx.weight(p.species, p.kind, p.slot_variance.0);
            let mut nz = Vec::new();
            for (a, row) in w.iter().enumerate() {
                for (b, &x) in row.iter().enumerate() {
                    if x != Complex64::new(0.0, 0.0) {
                        nz.push((a, b, x));
                    }
                }
            }
            nz
        })
        .collect();
    let st = t.strides();
    let mut acc = T::zero();
    walk(t, scheme, &weights, &st, 0, 0, Complex64::new(1.0, 0.0), &mut acc);
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn walk<T: GradedScalar>(
    t: &Tensor<T>,
    scheme: &ContractionScheme,
    weights: &[Vec<(usize, usize, Complex64)>],
    st: &[usize],
    depth: usize,
    offset: usize,
    w: Complex64,
    acc: &mut T,
) {
    if depth == weights.len() {
        acc.accumulate(&t.data()[offset].scaled(w));
        return;
    }
    let p = &scheme.pairings[depth];
    for &(a, b, x) in &weights[depth] {
        let off = offset + a * st[p.first] + b * st[p.second];
        walk(t, scheme, weights, st, depth + 1, off, w * x, acc);
    }
}

impl fmt::Display for ContractionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..self.pairings.len() * 2).map(|k| k.to_string()).collect();
        write!(f, "{}", self.render(&labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn spinor_down(n: usize) -> Vec<Slot> {
        vec![Slot::down(Species::Spinor); n]
    }

    fn labels(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn four_undotted_slots_match_the_positive_permutations() {
        let schemes = enumerate_pair_contractions(&spinor_down(4)).unwrap();
        let r: Vec<String> = schemes.iter().map(|s| s.render(&labels("ABCD"))).collect();
        assert_eq!(r, ["epsS^{A B} epsS^{C D}", "epsS^{C A} epsS^{B D}", "epsS^{A D} epsS^{B C}"]);
    }

    #[test]
    fn mixed_variance_table() {
        let mut slots = spinor_down(4);
        slots[0] = Slot::up(Species::Spinor);
        let schemes = enumerate_pair_contractions(&slots).unwrap();
        let r: Vec<String> = schemes.iter().map(|s| s.render(&labels("ABCD"))).collect();
        assert_eq!(
            r,
            ["deltaS_{A}^{B} epsS^{C D}", "deltaS_{A}^{C} epsS^{D B}", "deltaS_{A}^{D} epsS^{B C}"]
        );
    }

    #[test]
    fn counts() {
        let mut slots = spinor_down(4);
        slots.extend(vec![Slot::down(Species::SpinorDotted); 4]);
        assert_eq!(enumerate_pair_contractions(&slots).unwrap().len(), 9);
        assert_eq!(enumerate_pair_contractions(&spinor_down(2)).unwrap().len(), 1);
        assert_eq!(enumerate_pair_contractions(&spinor_down(6)).unwrap().len(), 15);
        assert!(matches!(
            enumerate_pair_contractions(&spinor_down(3)),
            Err(TensorError::OddGroup { size: 3, .. })
        ));
    }

    fn random_tensor(slots: Vec<Slot>, seed: u64) -> Tensor<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_fn(slots, |_| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
        .unwrap()
    }

    #[test]
    fn schouten_sums_vanish() {
        let ctx = PairingContext::default();
        for slots in [spinor_down(4), {
            let mut s = spinor_down(4);
            s[0] = Slot::up(Species::Spinor);
            s
        }] {
            let t = random_tensor(slots.clone(), 3);
            let sum: Complex64 = enumerate_pair_contractions(&slots)
                .unwrap()
                .iter()
                .map(|s| apply_scheme(&t, s, &ctx).unwrap())
                .sum();
            assert!(sum.norm() < 1e-12, "{sum}");
        }
    }

    #[test]
    fn scheme_equals_sequential_contraction() {
        // ε^{AB} δ pairing on a rank-4 tensor through explicit contraction
        let slots = vec![
            Slot::up(Species::Isospin),
            Slot::down(Species::Isospin),
            Slot::down(Species::Isospin),
            Slot::down(Species::Isospin),
        ];
        let t = random_tensor(slots.clone(), 5);
        let ctx = PairingContext::with_phases(Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, 0.4));
        let scheme = &enumerate_pair_contractions(&slots).unwrap()[0];
        let eps_up = Tensor::from_fn(vec![Slot::up(Species::Isospin); 2], |i| {
            ctx.weight(Species::Isospin, PairingKind::Epsilon, Variance::Down)[i[0]][i[1]]
        })
        .unwrap();
        let direct = super::super::graded_product(&[t.clone(), eps_up])
            .contract(2, 4)
            .unwrap()
            .contract(2, 3)
            .unwrap()
            .contract(0, 1)
            .unwrap();
        let via = apply_scheme(&t, scheme, &ctx).unwrap();
        assert!((direct.value() - via).norm() < 1e-12);
    }

    #[test]
    fn incomplete_scheme_rejected() {
        let slots = spinor_down(4);
        let t = random_tensor(slots.clone(), 1);
        let mut s = enumerate_pair_contractions(&slots).unwrap()[0].clone();
        s.pairings.pop();
        assert_eq!(apply_scheme(&t, &s, &PairingContext::default()), Err(TensorError::IncompleteScheme));
    }
}
