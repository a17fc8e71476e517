//! Binding symbols to tensors, planning and evaluating checked expressions.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::symbols::builtin;
use super::{CheckedExpression, DslError, SymbolSource, SymbolTable, BUILTINS};
use crate::algebra::{GeneratorPool, Grassmann};
use crate::tensor::einsum::{brute_force_einsum, evaluate_plan, left_fold_plan, plan_contraction, ContractionPlan, EinsumSpec};
use crate::tensor::sampling::{family_key, sample_random_with, stream_rng};
use crate::tensor::{Slot, Tensor};

type C = Complex64;

/// Contraction plan of one term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermPlan {
    pub spec: EinsumSpec,
    pub plan: ContractionPlan,
}

fn spec(e: &CheckedExpression, k: usize) -> Result<EinsumSpec, DslError> {
    let t = &e.terms[k];
    let slots: Vec<&[Slot]> = t.slots.iter().map(|s| s.as_slice()).collect();
    Ok(EinsumSpec::new(&slots, t.labels.clone(), e.free_labels())?)
}

/// Cost-optimal plans (exhaustive up to eight factors).
pub fn plan_expression(e: &CheckedExpression) -> Result<Vec<TermPlan>, DslError> {
    (0..e.terms.len())
        .map(|k| {
            let spec = spec(e, k)?;
            Ok(TermPlan {
                plan: plan_contraction(&spec),
                spec,
            })
        })
        .collect()
}

pub fn left_fold_plans(e: &CheckedExpression) -> Result<Vec<TermPlan>, DslError> {
    (0..e.terms.len())
        .map(|k| {
            let spec = spec(e, k)?;
            Ok(TermPlan {
                plan: left_fold_plan(&spec),
                spec,
            })
        })
        .collect()
}

fn conj_of(base: &Tensor, slots: Vec<Slot>, order: &[usize]) -> Result<Tensor, DslError> {
    let mut j = vec![0; order.len()];
    Ok(Tensor::from_fn(slots, |i| {
        for (k, &o) in order.iter().enumerate() {
            j[o] = i[k];
        }
        base.get(&j).conjugate()
    })?)
}

/// Values for every declared symbol used by `e`. Sampled symbols draw from
/// their own stream keyed by name and share one generator pool; conjugates
/// are built from their partner, never sampled.
pub fn bind_symbols(e: &CheckedExpression, table: &SymbolTable, seed: u64) -> Result<BTreeMap<String, Tensor>, DslError> {
    let mut wanted: Vec<String> = e
        .terms
        .iter()
        .flat_map(|t| t.names.iter().cloned())
        .filter(|n| !BUILTINS.contains(&n.as_str()))
        .collect();
    wanted.sort();
    wanted.dedup();
    let mut decls = BTreeMap::new();
    for n in &wanted {
        let d = table.lookup(n).ok_or_else(|| DslError::UnknownSymbol { at: 0, name: n.clone() })?;
        if let SymbolSource::Conjugate { of, .. } = &d.source {
            let b = table.lookup(of).ok_or_else(|| DslError::UnknownSymbol { at: 0, name: of.clone() })?;
            decls.insert(of.clone(), b);
        }
        decls.insert(n.clone(), d);
    }
    let mut pool = GeneratorPool::new();
    let mut out = BTreeMap::new();
    for (name, d) in &decls {
        let t = match &d.source {
            SymbolSource::Sample(stats) => {
                let mut rng = stream_rng(seed, family_key(&format!("dsl/{name}")), 0);
                sample_random_with(d.slots.clone(), *stats, &mut rng, &mut pool)?
            }
            SymbolSource::Values(v) => Tensor::new(d.slots.clone(), v.iter().map(|&c| Grassmann::scalar(c)).collect())?,
            SymbolSource::Conjugate { .. } => continue,
        };
        out.insert(name.clone(), t);
    }
    for (name, d) in &decls {
        if let SymbolSource::Conjugate { of, order } = &d.source {
            let base = out.get(of).ok_or_else(|| DslError::Binding {
                name: name.clone(),
                message: format!("'{of}' is itself a conjugate"),
            })?;
            let t = conj_of(base, d.slots.clone(), order)?;
            out.insert(name.clone(), t);
        }
    }
    Ok(out)
}

fn factor_tensors(
    e: &CheckedExpression,
    k: usize,
    bindings: &BTreeMap<String, Tensor>,
    table: &SymbolTable,
) -> Result<Vec<Tensor>, DslError> {
    let t = &e.terms[k];
    t.names
        .iter()
        .zip(&t.slots)
        .map(|(n, s)| {
            if BUILTINS.contains(&n.as_str()) {
                return builtin(n, s, &table.pairing);
            }
            let b = bindings.get(n).ok_or_else(|| DslError::Binding {
                name: n.clone(),
                message: "no value bound".into(),
            })?;
            if b.slots() != s.as_slice() {
                return Err(DslError::Binding {
                    name: n.clone(),
                    message: "bound tensor has the wrong slots".into(),
                });
            }
            Ok(b.clone())
        })
        .collect()
}

fn coeff(e: &CheckedExpression, k: usize) -> C {
    let q = e.terms[k].coeff;
    C::new(*q.numer() as f64 / *q.denom() as f64, 0.0)
}

fn sum_terms(e: &CheckedExpression, mut term: impl FnMut(usize) -> Result<Tensor, DslError>) -> Result<Tensor, DslError> {
    let mut acc = Tensor::zeros(e.free_slots());
    for k in 0..e.terms.len() {
        acc = acc.add(&term(k)?.scale(coeff(e, k)))?;
    }
    Ok(acc)
}

pub fn evaluate_with_plans(
    e: &CheckedExpression,
    plans: &[TermPlan],
    bindings: &BTreeMap<String, Tensor>,
    table: &SymbolTable,
) -> Result<Tensor, DslError> {
    sum_terms(e, |k| {
        let fs = factor_tensors(e, k, bindings, table)?;
        let refs: Vec<&Tensor> = fs.iter().collect();
        if refs.is_empty() {
            return Ok(Tensor::scalar(Grassmann::real(1.0)));
        }
        Ok(evaluate_plan(&plans[k].plan, &plans[k].spec, &refs)?)
    })
}

/// Sum over terms of the planned contraction; the empty sum is zero.
pub fn evaluate(e: &CheckedExpression, bindings: &BTreeMap<String, Tensor>, table: &SymbolTable) -> Result<Tensor, DslError> {
    evaluate_with_plans(e, &plan_expression(e)?, bindings, table)
}

/// Nested-loop semantics, factors multiplied in written order.
pub fn brute_force_expression(
    e: &CheckedExpression,
    bindings: &BTreeMap<String, Tensor>,
    table: &SymbolTable,
) -> Result<Tensor, DslError> {
    sum_terms(e, |k| {
        let fs = factor_tensors(e, k, bindings, table)?;
        let refs: Vec<&Tensor> = fs.iter().collect();
        if refs.is_empty() {
            return Ok(Tensor::scalar(Grassmann::real(1.0)));
        }
        Ok(brute_force_einsum(&refs, &e.terms[k].labels, &e.free_labels())?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expression;
    use crate::invariants::{eval_i, sample_gauge_higgs};
    use crate::tensor::{Statistics, Variance};

    fn rel(a: &Tensor, b: &Tensor) -> f64 {
        let d = a.add(&b.scale(C::new(-1.0, 0.0))).unwrap();
        d.max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
    }

    #[test]
    fn quartic_text_matches_family() {
        let text = "g^{l m} W_l^{a b} W_m^{c a} phi^{b} phibar_{c}";
        let table = SymbolTable::standard(Statistics::Bosonic);
        let e = parse_expression(text, &table, &[]).unwrap();
        for s in 0..10 {
            let f = sample_gauge_higgs(&mut stream_rng(7, 1, s)).unwrap();
            let mut b = BTreeMap::new();
            b.insert("W".to_string(), f.w.clone());
            b.insert("phi".to_string(), f.phi.clone());
            b.insert("phibar".to_string(), f.phibar.clone());
            let got = evaluate(&e, &b, &table).unwrap().value().clone();
            let want = eval_i(&f).unwrap()[0].clone();
            assert!(got.add_ref(&want.scale(C::new(-1.0, 0.0))).max_abs() <= 1e-12 * want.max_abs());
        }
    }

    #[test]
    fn plan_beats_left_fold_and_agrees() {
        let table = SymbolTable::standard(Statistics::Bosonic);
        let e = parse_expression("g^{l m} W_l^{a b} W_m^{c a} phi^{b} phibar_{c}", &table, &[]).unwrap();
        let best = plan_expression(&e).unwrap();
        let naive = left_fold_plans(&e).unwrap();
        assert!(best[0].plan.total_cost <= naive[0].plan.total_cost);
        let b = bind_symbols(&e, &table, 3).unwrap();
        let x = evaluate_with_plans(&e, &best, &b, &table).unwrap();
        let y = evaluate_with_plans(&e, &naive, &b, &table).unwrap();
        let z = brute_force_expression(&e, &b, &table).unwrap();
        assert!(rel(&x, &y) <= 1e-12 && rel(&x, &z) <= 1e-12);
    }

    #[test]
    fn fermionic_signs_survive_planning() {
        let table = SymbolTable::standard(Statistics::Fermionic);
        let text = "epsS^{A B} epsSbar^{A' B'} Omegabar_{a A A'} Omega^{a}_{B B'} Omegabar_{b C C'} Omega^{b}_{D D'} epsS^{C D} epsSbar^{C' D'}";
        let e = parse_expression(text, &table, &[]).unwrap();
        let b = bind_symbols(&e, &table, 11).unwrap();
        let x = evaluate(&e, &b, &table).unwrap();
        let z = brute_force_expression(&e, &b, &table).unwrap();
        assert!(x.max_abs() > 0.0);
        assert!(rel(&x, &z) <= 1e-12);
    }

    #[test]
    fn two_factor_term_has_one_node() {
        let table = SymbolTable::standard(Statistics::Bosonic);
        let e = parse_expression("phi^{a} phibar_{a}", &table, &[]).unwrap();
        let p = plan_expression(&e).unwrap();
        assert_eq!(p[0].plan.nodes.iter().filter(|n| n.children.is_some()).count(), 1);
        let b = bind_symbols(&e, &table, 5).unwrap();
        let v = evaluate(&e, &b, &table).unwrap().value().body();
        let phi = b["phi"].data().iter().map(|x| x.body().norm_sqr()).sum::<f64>();
        assert!((v - C::new(phi, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn empty_sum_and_constants() {
        let table = SymbolTable::standard(Statistics::Bosonic);
        let e = parse_expression("0", &table, &[]).unwrap();
        assert!(evaluate(&e, &BTreeMap::new(), &table).unwrap().value().is_zero());
        let e = parse_expression("3/2 - delta^{a}_{a}", &table, &[]).unwrap();
        let v = evaluate(&e, &BTreeMap::new(), &table).unwrap().value().body();
        assert!((v - C::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conjugate_reuses_generators() {
        let table = SymbolTable::standard(Statistics::Fermionic);
        let e = parse_expression("Omegabar_{a A A'} Omega^{a}_{B B'} epsS^{A B} epsSbar^{A' B'}", &table, &[]).unwrap();
        let b = bind_symbols(&e, &table, 2).unwrap();
        let o = &b["Omega"];
        let ob = &b["Omegabar"];
        assert_eq!(ob.slots()[1].variance, Variance::Down);
        assert_eq!(*ob.get(&[1, 0, 1]), o.get(&[1, 1, 0]).conjugate());
    }
}
