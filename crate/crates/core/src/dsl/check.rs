//! Symbol resolution and the index rules.

use std::collections::BTreeMap;

use super::symbols::{builtin, builtin_slots};
use super::{parse_syntax, DslError, Expression, Index, SymbolDecl, SymbolTable};
use crate::tensor::einsum::Label;
use crate::tensor::{Slot, Species};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedTerm {
    pub coeff: num_rational::Rational64,
    pub names: Vec<String>,
    pub slots: Vec<Vec<Slot>>,
    pub labels: Vec<Vec<Label>>,
}

/// An expression whose symbols resolve and whose indices obey the
/// exactly-twice rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedExpression {
    pub ast: Expression,
    pub free: Vec<(Index, Slot)>,
    pub terms: Vec<CheckedTerm>,
}

impl CheckedExpression {
    pub fn free_labels(&self) -> Vec<Label> {
        self.free.iter().map(|f| f.0.label()).collect()
    }

    pub fn free_slots(&self) -> Vec<Slot> {
        self.free.iter().map(|f| f.1).collect()
    }
}

struct Occurrence {
    at: usize,
    slot: Slot,
}

pub fn parse_expression(text: &str, table: &SymbolTable, free: &[Index]) -> Result<CheckedExpression, DslError> {
    check_expression(parse_syntax(text)?, table, free)
}

pub fn check_expression(ast: Expression, table: &SymbolTable, free: &[Index]) -> Result<CheckedExpression, DslError> {
    let mut terms = Vec::new();
    let mut free_slots: BTreeMap<Label, Slot> = BTreeMap::new();
    for (k, term) in ast.terms.iter().enumerate() {
        let mut names = Vec::new();
        let mut slots = Vec::new();
        let mut labels = Vec::new();
        let mut occ: BTreeMap<Label, (String, Vec<Occurrence>)> = BTreeMap::new();
        for f in &term.factors {
            let upper: Vec<bool> = f.indices().map(|(_, u)| u).collect();
            let decl = match builtin_slots(&f.name, &upper) {
                Some(s) => {
                    let e = builtin(&f.name, &s, &table.pairing);
                    if let Err(DslError::Binding { message, .. }) = e {
                        return Err(DslError::Binding {
                            name: format!("{} at byte {}", f.name, f.at.0),
                            message,
                        });
                    }
                    SymbolDecl {
                        slots: s,
                        source: super::SymbolSource::Values(Vec::new()),
                    }
                }
                None => table.lookup(&f.name).ok_or_else(|| DslError::UnknownSymbol {
                    at: f.at.0,
                    name: f.name.clone(),
                })?,
            };
            if decl.slots.len() != f.rank() {
                return Err(DslError::Arity {
                    at: f.at.0,
                    name: f.name.clone(),
                    expected: decl.slots.len(),
                    got: f.rank(),
                });
            }
            let mut ls = Vec::new();
            for ((ix, _), &slot) in f.indices().zip(&decl.slots) {
                if ix.dotted != (slot.species == Species::SpinorDotted) {
                    return Err(DslError::Dotted {
                        at: ix.at.0,
                        index: ix.to_string(),
                        species: slot.species.name(),
                    });
                }
                let e = occ.entry(ix.label()).or_insert_with(|| (ix.to_string(), Vec::new()));
                if let Some(first) = e.1.first() {
                    if first.slot.species != slot.species {
                        return Err(DslError::SpeciesClash {
                            at: ix.at.0,
                            index: ix.to_string(),
                            first: first.slot.species.name(),
                            second: slot.species.name(),
                        });
                    }
                }
                e.1.push(Occurrence { at: ix.at.0, slot });
                ls.push(ix.label());
            }
            names.push(f.name.clone());
            slots.push(decl.slots);
            labels.push(ls);
        }
        // report the violation that occurs first in the text
        let mut errors: Vec<(usize, DslError)> = Vec::new();
        for (label, (text, v)) in &occ {
            let is_free = free.iter().any(|f| f.label() == *label);
            let index = text.clone();
            match v.len() {
                1 if is_free => {
                    let s = v[0].slot;
                    match free_slots.get(label) {
                        Some(&prev) if prev != s => errors.push((
                            usize::MAX,
                            DslError::FreeSlotMismatch {
                                index,
                                first: prev,
                                second: s,
                            },
                        )),
                        _ => {
                            free_slots.insert(*label, s);
                        }
                    }
                }
                1 => errors.push((v[0].at, DslError::Dangling { at: v[0].at, index })),
                2 if is_free => errors.push((v[1].at, DslError::FreeContracted { at: v[1].at, index })),
                2 if v[0].slot.variance == v[1].slot.variance => {
                    errors.push((v[1].at, DslError::SameVariance { at: v[1].at, index }))
                }
                2 => {}
                n => errors.push((
                    v[2].at,
                    DslError::Repeated {
                        at: v[2].at,
                        index,
                        count: n,
                    },
                )),
            }
        }
        if let Some((_, e)) = errors.into_iter().min_by_key(|e| e.0) {
            return Err(e);
        }
        for f in free {
            if !occ.contains_key(&f.label()) {
                return Err(DslError::FreeMissing {
                    term: k + 1,
                    index: f.to_string(),
                });
            }
        }
        terms.push(CheckedTerm {
            coeff: term.coeff,
            names,
            slots,
            labels,
        });
    }
    let free = free
        .iter()
        .filter_map(|f| free_slots.get(&f.label()).map(|&s| (f.clone(), s)))
        .collect();
    Ok(CheckedExpression { ast, free, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Statistics;

    fn table() -> SymbolTable {
        SymbolTable::standard(Statistics::Bosonic)
    }

    fn ix(s: &str) -> Index {
        parse_syntax(&format!("x_{{{s}}}")).unwrap().terms[0].factors[0].groups[0].indices[0].clone()
    }

    #[test]
    fn quartic_pattern_checks() {
        let c = parse_expression("g^{l m} W_l^{a b} W_m^{c a} phi^{b} phibar_{c}", &table(), &[]).unwrap();
        assert_eq!(c.terms[0].names.len(), 5);
        assert!(c.free.is_empty());
        assert!(parse_expression("phi^{a} phibar_{a}", &table(), &[]).is_ok());
    }

    #[test]
    fn rule_violations() {
        let t = table();
        let cases: [(&str, fn(&DslError) -> bool); 8] = [
            ("W_l^{a b} W_l^{a b}", |e| matches!(e, DslError::SameVariance { at: 12, .. })),
            ("Q^{a}", |e| matches!(e, DslError::UnknownSymbol { at: 0, .. })),
            ("phi^{a}", |e| matches!(e, DslError::Dangling { at: 5, .. })),
            ("phi^{a} phibar_{a} phibar_{a}", |e| matches!(e, DslError::Repeated { count: 3, .. })),
            ("phi^{a} g_{a m}", |e| matches!(e, DslError::SpeciesClash { at: 11, .. })),
            ("Omega^{a}_{A B}", |e| matches!(e, DslError::Dotted { at: 13, .. })),
            ("phi^{a b}", |e| matches!(e, DslError::Arity { expected: 1, got: 2, .. })),
            ("delta^{a b} phibar_{a} phibar_{b}", |e| matches!(e, DslError::Binding { .. })),
        ];
        for (text, ok) in cases {
            match parse_expression(text, &t, &[]) {
                Err(e) if ok(&e) => {}
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn free_indices() {
        let t = table();
        let c = parse_expression("W_l^{a b} phi^{b} - 2 phi^{a} phibar_{c} W_l^{c b} phi^{b}", &t, &[ix("l"), ix("a")]).unwrap();
        assert_eq!(c.free_slots(), vec![Slot::down(Species::Spacetime), Slot::up(Species::Isospin)]);
        assert!(matches!(
            parse_expression("phi^{a} phibar_{a}", &t, &[ix("a")]),
            Err(DslError::FreeContracted { .. })
        ));
        assert!(matches!(
            parse_expression("phi^{a} + phibar_{a}", &t, &[ix("a")]),
            Err(DslError::FreeSlotMismatch { .. })
        ));
        assert!(matches!(
            parse_expression("phi^{a} + phi^{b} phibar_{b}", &t, &[ix("a")]),
            Err(DslError::FreeMissing { term: 2, .. })
        ));
    }
}
