//! Labeled Einstein summation over several graded factors, with a
//! cost-based contraction order.
//!
//! A label occurring once is free; a label occurring twice is summed and
//! must pair an up slot with a down slot of the same species. Factors are
//! multiplied in their given order: when the plan merges factors out of order
//! the result picks up the sign of the corresponding reordering of odd
//! factors.

use std::collections::{BTreeMap, BTreeSet};

use super::{advance, strides, Slot, Tensor, TensorError};
use crate::algebra::{GradedScalar, Parity};

pub type Label = u32;

/// Factor count up to which the planner searches all orders.
pub const EXACT_PLAN_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    /// Original factor indices covered, ascending.
    pub factors: Vec<usize>,
    pub children: Option<(usize, usize)>,
    /// Labels of the intermediate, in storage order.
    pub labels: Vec<Label>,
    /// Product of the dimensions of every label touched at this node.
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    pub nodes: Vec<PlanNode>,
    pub root: Option<usize>,
    pub total_cost: u64,
}

/// Label layout of an einsum: per-factor labels, free labels (output order)
/// and the dimension of every label.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsumSpec {
    pub factor_labels: Vec<Vec<Label>>,
    pub free: Vec<Label>,
    pub dims: BTreeMap<Label, usize>,
    pub slots: BTreeMap<Label, Slot>,
}

impl EinsumSpec {
    /// Checks the occurrence rules against the factors' slots.
    pub fn new(factor_slots: &[&[Slot]], factor_labels: Vec<Vec<Label>>, free: Vec<Label>) -> Result<Self, TensorError> {
        if factor_slots.len() != factor_labels.len() {
            return Err(TensorError::ShapeMismatch {
                expected: factor_slots.len(),
                got: factor_labels.len(),
            });
        }
        let mut occ: BTreeMap<Label, Vec<Slot>> = BTreeMap::new();
        for (slots, labels) in factor_slots.iter().zip(&factor_labels) {
            if slots.len() != labels.len() {
                return Err(TensorError::ShapeMismatch {
                    expected: slots.len(),
                    got: labels.len(),
                });
            }
            for (s, l) in slots.iter().zip(labels) {
                occ.entry(*l).or_default().push(*s);
            }
        }
        let free_set: BTreeSet<Label> = free.iter().copied().collect();
        if free_set.len() != free.len() {
            return Err(TensorError::Index {
                label: free[0],
                reason: "listed twice as free",
            });
        }
        let mut dims = BTreeMap::new();
        let mut out_slots = BTreeMap::new();
        for (&label, s) in &occ {
            match (s.len(), free_set.contains(&label)) {
                (1, true) => {}
                (1, false) => return Err(TensorError::Index { label, reason: "appears once but is not free" }),
                (2, false) => {
                    if s[0].species != s[1].species {
                        return Err(TensorError::Index { label, reason: "joins slots of different species" });
                    }
                    if s[0].variance == s[1].variance {
                        return Err(TensorError::Index { label, reason: "appears twice with the same variance" });
                    }
                }
                (2, true) => return Err(TensorError::Index { label, reason: "is free but summed" }),
                _ => return Err(TensorError::Index { label, reason: "appears more than twice" }),
            }
            dims.insert(label, s[0].dim());
            out_slots.insert(label, s[0]);
        }
        for &l in &free {
            if !occ.contains_key(&l) {
                return Err(TensorError::Index { label: l, reason: "is free but never used" });
            }
        }
        Ok(EinsumSpec {
            factor_labels,
            free,
            dims,
            slots: out_slots,
        })
    }

    fn n(&self) -> usize {
        self.factor_labels.len()
    }

    /// Labels of the factors in `set` that survive: free, or shared with a
    /// factor outside `set`.
    fn kept(&self, set: &[usize]) -> BTreeSet<Label> {
        let inside: BTreeSet<Label> = set.iter().flat_map(|&i| self.factor_labels[i].iter().copied()).collect();
        let outside: BTreeSet<Label> = (0..self.n())
            .filter(|i| !set.contains(i))
            .flat_map(|i| self.factor_labels[i].iter().copied())
            .collect();
        inside
            .into_iter()
            .filter(|l| self.free.contains(l) || outside.contains(l))
            .collect()
    }

    fn volume<'a>(&self, labels: impl IntoIterator<Item = &'a Label>) -> u64 {
        labels.into_iter().map(|l| self.dims[l] as u64).product()
    }

    fn leaf_cost(&self, i: usize) -> u64 {
        let distinct: BTreeSet<Label> = self.factor_labels[i].iter().copied().collect();
        self.volume(&distinct)
    }
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask >> k & 1 == 1).collect()
}

struct Builder<'a> {
    spec: &'a EinsumSpec,
    nodes: Vec<PlanNode>,
}

impl Builder<'_> {
    fn leaf(&mut self, i: usize) -> usize {
        self.nodes.push(PlanNode {
            factors: vec![i],
            children: None,
            labels: self.spec.kept(&[i]).into_iter().collect(),
            cost: self.spec.leaf_cost(i),
        });
        self.nodes.len() - 1
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        let mut factors = self.nodes[a].factors.clone();
        factors.extend(&self.nodes[b].factors);
        factors.sort_unstable();
        let touched: BTreeSet<Label> = self.nodes[a].labels.iter().chain(&self.nodes[b].labels).copied().collect();
        let cost = self.spec.volume(&touched);
        self.nodes.push(PlanNode {
            labels: self.spec.kept(&factors).into_iter().collect(),
            factors,
            children: Some((a, b)),
            cost,
        });
        self.nodes.len() - 1
    }

    fn finish(mut self, root: Option<usize>) -> ContractionPlan {
        if let Some(r) = root {
            self.nodes[r].labels = self.spec.free.clone();
        }
        let total_cost = self.nodes.iter().map(|n| n.cost).sum();
        ContractionPlan {
            nodes: self.nodes,
            root,
            total_cost,
        }
    }
}

/// Merges factors strictly left to right.
pub fn left_fold_plan(spec: &EinsumSpec) -> ContractionPlan {
    let mut b = Builder { spec, nodes: Vec::new() };
    let mut acc: Option<usize> = None;
    for i in 0..spec.n() {
        let leaf = b.leaf(i);
        acc = Some(match acc {
            None => leaf,
            Some(a) => b.merge(a, leaf),
        });
    }
    b.finish(acc)
}

/// Cheapest order: exhaustive over subsets up to [`EXACT_PLAN_LIMIT`]
/// factors, greedy pairwise merging beyond.
pub fn plan_contraction(spec: &EinsumSpec) -> ContractionPlan {
    let n = spec.n();
    if n <= 2 {
        return left_fold_plan(spec);
    }
    if n > EXACT_PLAN_LIMIT {
        return greedy_plan(spec);
    }
    let full = (1u32 << n) - 1;
    let mut best: Vec<Option<(u64, u32)>> = vec![None; 1 << n];
    let mut kept: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); 1 << n];
    for mask in 1..=full {
        kept[mask as usize] = spec.kept(&members(mask));
        if mask.count_ones() == 1 {
            best[mask as usize] = Some((spec.leaf_cost(mask.trailing_zeros() as usize), 0));
        }
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let mut sub = (mask - 1) & mask;
        let mut choice: Option<(u64, u32)> = None;
        while sub > 0 {
            if sub & low != 0 {
                let rest = mask ^ sub;
                let (ca, _) = best[sub as usize].expect("smaller subsets first");
                let (cb, _) = best[rest as usize].expect("smaller subsets first");
                let touched: BTreeSet<Label> = kept[sub as usize].union(&kept[rest as usize]).copied().collect();
                let c = ca + cb + spec.volume(&touched);
                if choice.is_none_or(|(bc, _)| c < bc) {
                    choice = Some((c, sub));
                }
            }
            sub = (sub - 1) & mask;
        }
        best[mask as usize] = choice;
    }
    let mut b = Builder { spec, nodes: Vec::new() };
    fn build(b: &mut Builder, best: &[Option<(u64, u32)>], mask: u32) -> usize {
        if mask.count_ones() == 1 {
            return b.leaf(mask.trailing_zeros() as usize);
        }
        let (_, sub) = best[mask as usize].expect("filled above");
        let l = build(b, best, sub);
        let r = build(b, best, mask ^ sub);
        b.merge(l, r)
    }
    let root = build(&mut b, &best, full);
    b.finish(Some(root))
}

fn greedy_plan(spec: &EinsumSpec) -> ContractionPlan {
    let mut b = Builder { spec, nodes: Vec::new() };
    let mut live: Vec<usize> = (0..spec.n()).map(|i| b.leaf(i)).collect();
    while live.len() > 1 {
        let mut pick = (u64::MAX, 0, 1);
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let touched: BTreeSet<Label> = b.nodes[live[i]]
                    .labels
                    .iter()
                    .chain(&b.nodes[live[j]].labels)
                    .copied()
                    .collect();
                let c = spec.volume(&touched);
                if c < pick.0 {
                    pick = (c, i, j);
                }
            }
        }
        let (_, i, j) = pick;
        let merged = b.merge(live[i], live[j]);
        live.remove(j);
        live[i] = merged;
    }
    let root = live.first().copied();
    b.finish(root)
}

/// Dense values over `labels` (storage order) for one intermediate.
struct Partial<T> {
    labels: Vec<Label>,
    data: Vec<T>,
    factors: Vec<usize>,
}

/// Sums `parts[0] · parts[1]` (or just `parts[0]`) over every label not in `out`.
fn combine<T: GradedScalar>(spec: &EinsumSpec, parts: &[(&[T], &[Label])], out: &[Label], sign: f64) -> Vec<T> {
    let mut all: Vec<Label> = out.to_vec();
    for (_, ls) in parts {
        for l in *ls {
            if !all.contains(l) {
                all.push(*l);
            }
        }
    }
    let dims: Vec<usize> = all.iter().map(|l| spec.dims[l]).collect();
    let pos = |l: &Label| all.iter().position(|x| x == l).expect("label collected");
    // per part: stride contributed by each position in `all`
    let part_strides: Vec<Vec<usize>> = parts
        .iter()
        .map(|(_, ls)| {
            let own: Vec<usize> = ls.iter().map(|l| spec.dims[l]).collect();
            let st = strides(&own);
            let mut per = vec![0usize; all.len()];
            for (k, l) in ls.iter().enumerate() {
                per[pos(l)] += st[k];
            }
            per
        })
        .collect();
    let n_out = out.len();
    let out_vol: usize = dims[..n_out].iter().product();
    let sum_vol: usize = dims[n_out..].iter().product();
    let mut result = Vec::with_capacity(out_vol);
    let mut idx = vec![0usize; all.len()];
    for _ in 0..out_vol {
        let mut acc = T::zero();
        for k in n_out..idx.len() {
            idx[k] = 0;
        }
        for _ in 0..sum_vol {
            let mut term: Option<T> = None;
            for ((data, _), st) in parts.iter().zip(&part_strides) {
                let off: usize = idx.iter().zip(st).map(|(i, s)| i * s).sum();
                let v = &data[off];
                term = Some(match term {
                    None => v.clone(),
                    Some(t) => t.times(v),
                });
            }
            let term = term.unwrap_or_else(T::one);
            if !term.is_zero() {
                acc.accumulate(&term);
            }
            advance(&mut idx[n_out..], &dims[n_out..]);
        }
        result.push(if sign < 0.0 { acc.scaled(num_complex::Complex64::new(-1.0, 0.0)) } else { acc });
        advance(&mut idx[..n_out], &dims[..n_out]);
    }
    result
}

/// Sign of multiplying an `a`-ordered product by a `b`-ordered one relative
/// to the product in ascending factor order.
fn reorder_sign(a: &[usize], b: &[usize], odd: &[bool]) -> f64 {
    let mut swaps = 0usize;
    for &x in a.iter().filter(|&&x| odd[x]) {
        swaps += b.iter().filter(|&&y| odd[y] && y < x).count();
    }
    if swaps % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

pub fn evaluate_plan<T: GradedScalar>(
    plan: &ContractionPlan,
    spec: &EinsumSpec,
    factors: &[&Tensor<T>],
) -> Result<Tensor<T>, TensorError> {
    if factors.len() != spec.n() {
        return Err(TensorError::ShapeMismatch {
            expected: spec.n(),
            got: factors.len(),
        });
    }
    for (f, ls) in factors.iter().zip(&spec.factor_labels) {
        for (s, l) in f.slots().iter().zip(ls) {
            if spec.dims[l] != s.dim() {
                return Err(TensorError::Index { label: *l, reason: "bound to a slot of the wrong dimension" });
            }
        }
    }
    let odd: Vec<bool> = factors.iter().map(|f| f.parity() == Parity::Odd).collect();
    let weight = factors
        .iter()
        .fold(num_rational::Rational64::from_integer(0), |acc, f| acc + f.scale_weight());
    let Some(root) = plan.root else {
        return Ok(Tensor::scalar(T::one()));
    };
    let mut done: Vec<Option<Partial<T>>> = (0..plan.nodes.len()).map(|_| None).collect();
    for (k, node) in plan.nodes.iter().enumerate() {
        let p = match node.children {
            None => {
                let i = node.factors[0];
                let data = combine(
                    spec,
                    &[(factors[i].data(), &spec.factor_labels[i])],
                    &node.labels,
                    1.0,
                );
                Partial {
                    labels: node.labels.clone(),
                    data,
                    factors: node.factors.clone(),
                }
            }
            Some((a, b)) => {
                let (x, y) = (done[a].take().expect("child first"), done[b].take().expect("child first"));
                let sign = reorder_sign(&x.factors, &y.factors, &odd);
                let data = combine(
                    spec,
                    &[(&x.data, &x.labels), (&y.data, &y.labels)],
                    &node.labels,
                    sign,
                );
                Partial {
                    labels: node.labels.clone(),
                    data,
                    factors: node.factors.clone(),
                }
            }
        };
        done[k] = Some(p);
    }
    let out = done[root].take().expect("root evaluated");
    let slots: Vec<Slot> = spec.free.iter().map(|l| spec.slots[l]).collect();
    Ok(Tensor::new(slots, out.data)?.with_scale_weight(weight))
}

/// Plans and evaluates.
pub fn einsum<T: GradedScalar>(factors: &[&Tensor<T>], labels: &[Vec<Label>], free: &[Label]) -> Result<Tensor<T>, TensorError> {
    let slots: Vec<&[Slot]> = factors.iter().map(|f| f.slots()).collect();
    let spec = EinsumSpec::new(&slots, labels.to_vec(), free.to_vec())?;
    evaluate_plan(&plan_contraction(&spec), &spec, factors)
}

/// Nested-sum semantics: one loop over every distinct label, factors
/// multiplied in the given order.
pub fn brute_force_einsum<T: GradedScalar>(
    factors: &[&Tensor<T>],
    labels: &[Vec<Label>],
    free: &[Label],
) -> Result<Tensor<T>, TensorError> {
    let slots: Vec<&[Slot]> = factors.iter().map(|f| f.slots()).collect();
    let spec = EinsumSpec::new(&slots, labels.to_vec(), free.to_vec())?;
    let mut all: Vec<Label> = free.to_vec();
    for l in spec.dims.keys() {
        if !all.contains(l) {
            all.push(*l);
        }
    }
    let dims: Vec<usize> = all.iter().map(|l| spec.dims[l]).collect();
    let out_dims: Vec<usize> = dims[..free.len()].to_vec();
    let out_st = strides(&out_dims);
    let mut out = vec![T::zero(); out_dims.iter().product()];
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; all.len()];
    for _ in 0..total {
        let mut term = T::one();
        for (f, ls) in factors.iter().zip(labels) {
            let fi: Vec<usize> = ls.iter().map(|l| idx[all.iter().position(|x| x == l).unwrap()]).collect();
            term = term.times(f.get(&fi));
        }
        let o: usize = idx[..free.len()].iter().zip(&out_st).map(|(i, s)| i * s).sum();
        out[o].accumulate(&term);
        advance(&mut idx, &dims);
    }
    let slots: Vec<Slot> = free.iter().map(|l| spec.slots[l]).collect();
    Tensor::new(slots, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GeneratorPool, Grassmann};
    use crate::tensor::sampling::{sample_random_with, stream_rng};
    use crate::tensor::{Species, Statistics};

    fn sl(s: Species, up: bool) -> Slot {
        if up {
            Slot::up(s)
        } else {
            Slot::down(s)
        }
    }

    fn close(a: &Tensor, b: &Tensor) -> bool {
        a.data().iter().zip(b.data()).all(|(x, y)| {
            let d = x.add_ref(&y.scale(num_complex::Complex64::new(-1.0, 0.0)));
            d.max_abs() <= 1e-12 * (1.0 + x.max_abs())
        })
    }

    #[test]
    fn matrix_product_and_trace() {
        let mut r = stream_rng(1, 1, 0);
        let mut pool = GeneratorPool::new();
        let iso = Species::Isospin;
        let a = sample_random_with(vec![sl(iso, true), sl(iso, false)], Statistics::Bosonic, &mut r, &mut pool).unwrap();
        let b = sample_random_with(vec![sl(iso, true), sl(iso, false)], Statistics::Bosonic, &mut r, &mut pool).unwrap();
        let ab = einsum(&[&a, &b], &[vec![0, 1], vec![1, 2]], &[0, 2]).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let want = a.get(&[i, 0]).mul_ref(b.get(&[0, k])).add_ref(&a.get(&[i, 1]).mul_ref(b.get(&[1, k])));
                assert_eq!(ab.get(&[i, k]).coefficient(0), want.coefficient(0));
            }
        }
        let tr = einsum(&[&a], &[vec![5, 5]], &[]).unwrap();
        let want = a.get(&[0, 0]).add_ref(a.get(&[1, 1]));
        assert_eq!(tr.value(), &want);
    }

    #[test]
    fn rule_violations() {
        let iso = Species::Isospin;
        let t: Tensor = Tensor::zeros(vec![sl(iso, true), sl(iso, true)]);
        let e = einsum(&[&t], &[vec![0, 0]], &[]).unwrap_err();
        assert!(matches!(e, TensorError::Index { reason, .. } if reason.contains("same variance")));
        let e = einsum(&[&t], &[vec![0, 1]], &[0]).unwrap_err();
        assert!(matches!(e, TensorError::Index { label: 1, .. }));
        let u: Tensor = Tensor::zeros(vec![sl(iso, true), sl(Species::Spinor, false)]);
        let e = einsum(&[&u], &[vec![0, 0]], &[]).unwrap_err();
        assert!(matches!(e, TensorError::Index { reason, .. } if reason.contains("species")));
    }

    #[test]
    fn empty_product_is_one() {
        let out: Tensor = einsum(&[], &[], &[]).unwrap();
        assert_eq!(out.value(), &Grassmann::real(1.0));
    }

    fn chain(n: usize, stats: Statistics, seed: u64) -> (Vec<Tensor>, Vec<Vec<Label>>) {
        let mut r = stream_rng(seed, 2, 0);
        let mut pool = GeneratorPool::new();
        let iso = Species::Isospin;
        let sp = Species::Spinor;
        let mut ts = Vec::new();
        let mut ls = Vec::new();
        for k in 0..n {
            // ring of matrices with an extra spinor index shared with the next factor
            let slots = vec![sl(iso, true), sl(iso, false), sl(sp, k % 2 == 0)];
            ts.push(sample_random_with(slots, stats, &mut r, &mut pool).unwrap());
            let k = k as Label;
            let sp_label = 100 + k / 2;
            ls.push(vec![k, (k + 1) % n as Label, sp_label]);
        }
        (ts, ls)
    }

    #[test]
    fn planned_equals_brute_force_and_left_fold() {
        for stats in [Statistics::Bosonic, Statistics::Fermionic] {
            let (ts, ls) = chain(6, stats, 3);
            let refs: Vec<&Tensor> = ts.iter().collect();
            let slots: Vec<&[Slot]> = refs.iter().map(|t| t.slots()).collect();
            let spec = EinsumSpec::new(&slots, ls.clone(), vec![]).unwrap();
            let best = plan_contraction(&spec);
            let naive = left_fold_plan(&spec);
            assert!(best.total_cost <= naive.total_cost);
            let a = evaluate_plan(&best, &spec, &refs).unwrap();
            let b = evaluate_plan(&naive, &spec, &refs).unwrap();
            let c = brute_force_einsum(&refs, &ls, &[]).unwrap();
            assert!(close(&a, &c), "{stats:?}");
            assert!(close(&b, &c), "{stats:?}");
            if stats == Statistics::Fermionic {
                assert!(!c.value().is_zero());
            }
        }
    }

    #[test]
    fn greedy_beyond_exact_limit() {
        let (ts, ls) = chain(10, Statistics::Bosonic, 5);
        let refs: Vec<&Tensor> = ts.iter().collect();
        let a = einsum(&refs, &ls, &[]).unwrap();
        let c = brute_force_einsum(&refs, &ls, &[]).unwrap();
        assert!(close(&a, &c));
        // greedy order on odd factors keeps the graded signs
        let (ts, ls) = chain(6, Statistics::Fermionic, 6);
        let refs: Vec<&Tensor> = ts.iter().collect();
        let slots: Vec<&[Slot]> = refs.iter().map(|t| t.slots()).collect();
        let spec = EinsumSpec::new(&slots, ls.clone(), vec![]).unwrap();
        let a = evaluate_plan(&greedy_plan(&spec), &spec, &refs).unwrap();
        let c = brute_force_einsum(&refs, &ls, &[]).unwrap();
        assert!(close(&a, &c));
    }
}
