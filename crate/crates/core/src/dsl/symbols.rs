//! Symbol declarations, builtin pairing objects and the JSON bind file.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;

use super::DslError;
use crate::algebra::Grassmann;
use crate::invariants::{eps_down, eps_up};
use crate::tensor::{PairingContext, Slot, Species, Statistics, Tensor, Variance};

type C = Complex64;

pub const BUILTINS: [&str; 7] = ["g", "eps", "epsS", "epsSbar", "delta", "deltaS", "deltaSbar"];

/// Where the values of a symbol come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSource {
    Sample(Statistics),
    Values(Vec<C>),
    /// `X̄[i] = conj X[j]` with `j[order[k]] = i[k]`.
    Conjugate { of: String, order: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDecl {
    pub slots: Vec<Slot>,
    pub source: SymbolSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub symbols: BTreeMap<String, SymbolDecl>,
    pub pairing: PairingContext,
}

fn conj_slot(s: Slot) -> Slot {
    match s.species {
        Species::Spinor => Slot::new(Species::SpinorDotted, s.variance),
        Species::SpinorDotted => Slot::new(Species::Spinor, s.variance),
        Species::Isospin => Slot::new(Species::Isospin, s.variance.flip()),
        _ => s,
    }
}

impl SymbolTable {
    pub fn empty() -> SymbolTable {
        SymbolTable {
            symbols: BTreeMap::new(),
            pairing: PairingContext::default(),
        }
    }

    /// The field content of the invariant families: `W`, `phi`, `Omega`,
    /// `Phi`, their conjugates, and `w`, `k` as spinor covectors.
    pub fn standard(omega_statistics: Statistics) -> SymbolTable {
        use Species::{Isospin as I, Spacetime as T, Spinor as S, SpinorDotted as D};
        let (u, d) = (Slot::up, Slot::down);
        let mut t = SymbolTable::empty();
        let b = SymbolSource::Sample(Statistics::Bosonic);
        t.declare("W", vec![d(T), u(I), d(I)], b.clone());
        t.declare("phi", vec![u(I)], b.clone());
        t.declare("Omega", vec![u(I), d(S), d(D)], SymbolSource::Sample(omega_statistics));
        t.declare("Phi", vec![u(I), u(D), d(D)], b.clone());
        t.declare("w", vec![d(S), d(D)], b.clone());
        t.declare("k", vec![d(S), d(D)], b);
        t.declare_conjugate("phibar", "phi", vec![0]).expect("declared");
        t.declare_conjugate("Omegabar", "Omega", vec![0, 2, 1]).expect("declared");
        t.declare_conjugate("Phibar", "Phi", vec![0, 1, 2]).expect("declared");
        t
    }

    pub fn declare(&mut self, name: &str, slots: Vec<Slot>, source: SymbolSource) {
        self.symbols.insert(name.to_string(), SymbolDecl { slots, source });
    }

    pub fn declare_conjugate(&mut self, name: &str, of: &str, order: Vec<usize>) -> Result<(), DslError> {
        let base = self.symbols.get(of).ok_or_else(|| DslError::Binding {
            name: name.into(),
            message: format!("conjugate of undeclared symbol '{of}'"),
        })?;
        let mut seen = vec![false; base.slots.len()];
        if order.len() != base.slots.len() || order.iter().any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(DslError::Binding {
                name: name.into(),
                message: format!("order must be a permutation of 0..{}", base.slots.len()),
            });
        }
        let slots = order.iter().map(|&k| conj_slot(base.slots[k])).collect();
        self.declare(name, slots, SymbolSource::Conjugate { of: of.into(), order });
        Ok(())
    }

    /// Declared symbol, or the implicit conjugate `Xbar` of a declared `X`.
    pub fn lookup(&self, name: &str) -> Option<SymbolDecl> {
        if let Some(d) = self.symbols.get(name) {
            return Some(d.clone());
        }
        let base = name.strip_suffix("bar")?;
        let b = self.symbols.get(base)?;
        Some(SymbolDecl {
            slots: b.slots.iter().map(|&s| conj_slot(s)).collect(),
            source: SymbolSource::Conjugate {
                of: base.into(),
                order: (0..b.slots.len()).collect(),
            },
        })
    }
}

fn builtin_species(name: &str) -> Option<Species> {
    Some(match name {
        "g" => Species::Spacetime,
        "eps" | "delta" => Species::Isospin,
        "epsS" | "deltaS" => Species::Spinor,
        "epsSbar" | "deltaSbar" => Species::SpinorDotted,
        _ => return None,
    })
}

/// Slots of a builtin with the given written variances (`true` = up).
pub(crate) fn builtin_slots(name: &str, upper: &[bool]) -> Option<Vec<Slot>> {
    let s = builtin_species(name)?;
    Some(upper.iter().map(|&u| Slot::new(s, if u { Variance::Up } else { Variance::Down })).collect())
}

/// Values of a builtin on `slots`. Mixed variance gives the identity; `g`
/// with equal variances is `diag(1,-1,-1,-1)`; `eps` uses the phases of
/// `ctx`.
pub fn builtin(name: &str, slots: &[Slot], ctx: &PairingContext) -> Result<Tensor, DslError> {
    let bad = |m: &str| DslError::Binding {
        name: name.into(),
        message: m.into(),
    };
    let s = builtin_species(name).ok_or_else(|| bad("not a builtin"))?;
    if slots.len() != 2 || slots.iter().any(|x| x.species != s) {
        return Err(bad("takes two indices of its own species"));
    }
    let mixed = slots[0].variance != slots[1].variance;
    let ident = || Tensor::from_fn(slots.to_vec(), |i| Grassmann::real(if i[0] == i[1] { 1.0 } else { 0.0 }));
    let t = match (name, mixed) {
        (_, true) if !name.starts_with("eps") => ident()?,
        ("g", false) => Tensor::from_fn(slots.to_vec(), |i| {
            Grassmann::real(if i[0] == i[1] { ctx.metric[i[0]] } else { 0.0 })
        })?,
        (_, false) if name.starts_with("eps") => {
            let phase = if s == Species::Isospin { ctx.isospin_phase } else { ctx.spinor_phase };
            if slots[0].variance == Variance::Up {
                eps_up(s, phase)
            } else {
                eps_down(s, phase)
            }
        }
        _ if name.starts_with("eps") => return Err(bad("epsilon takes two indices of equal variance")),
        _ => return Err(bad("delta takes one upper and one lower index")),
    };
    Ok(t)
}

/// `species^` or `species_`, e.g. `isospin^`, `dotted_`.
pub fn parse_slot(s: &str) -> Option<Slot> {
    let (name, v) = if let Some(n) = s.strip_suffix('^') {
        (n, Variance::Up)
    } else {
        (s.strip_suffix('_')?, Variance::Down)
    };
    Some(Slot::new(Species::parse(name)?, v))
}

/// Declarations and values read from a bind file:
///
/// ```json
/// { "free": ["a"], "statistics": "fermionic", "standard": true,
///   "isospin_phase": [1, 0], "spinor_phase": [0, 1],
///   "symbols": {
///     "X": { "slots": ["isospin^", "spinor_"], "values": [[1, 0], [0, 1], [2, 0], [0, 0]] },
///     "Y": { "slots": ["dotted^"], "parity": "odd" },
///     "Z": { "conjugate": "X", "order": [1, 0] } } }
/// ```
///
/// `statistics` applies to `Omega` of the standard table.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindFile {
    #[serde(default)]
    pub free: Vec<String>,
    #[serde(default)]
    pub statistics: Option<String>,
    #[serde(default)]
    pub standard: Option<bool>,
    #[serde(default)]
    pub isospin_phase: Option<[f64; 2]>,
    #[serde(default)]
    pub spinor_phase: Option<[f64; 2]>,
    #[serde(default)]
    pub symbols: BTreeMap<String, SymbolSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    #[serde(default)]
    pub slots: Vec<String>,
    #[serde(default)]
    pub parity: Option<String>,
    #[serde(default)]
    pub values: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub conjugate: Option<String>,
    #[serde(default)]
    pub order: Option<Vec<usize>>,
}

fn unit_phase(p: [f64; 2], what: &str) -> Result<C, DslError> {
    let c = C::new(p[0], p[1]);
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(DslError::BindFile(format!("{what} must have modulus 1")));
    }
    Ok(c)
}

impl BindFile {
    pub fn from_json(text: &str) -> Result<BindFile, DslError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn symbol_table(&self) -> Result<SymbolTable, DslError> {
        let stats = match &self.statistics {
            None => Statistics::Bosonic,
            Some(s) => Statistics::parse(s).ok_or_else(|| DslError::BindFile(format!("unknown statistics '{s}'")))?,
        };
        let mut t = if self.standard.unwrap_or(true) {
            SymbolTable::standard(stats)
        } else {
            SymbolTable::empty()
        };
        if let Some(p) = self.isospin_phase {
            t.pairing.isospin_phase = unit_phase(p, "isospin_phase")?;
        }
        if let Some(p) = self.spinor_phase {
            t.pairing.spinor_phase = unit_phase(p, "spinor_phase")?;
        }
        let mut conjugates = Vec::new();
        for (name, spec) in &self.symbols {
            if BUILTINS.contains(&name.as_str()) {
                return Err(DslError::Binding {
                    name: name.clone(),
                    message: "builtin names cannot be redeclared".into(),
                });
            }
            if !name.bytes().all(|b| b.is_ascii_alphanumeric()) || !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
                return Err(DslError::Binding {
                    name: name.clone(),
                    message: "names are ASCII letters and digits".into(),
                });
            }
            if let Some(of) = &spec.conjugate {
                conjugates.push((name, of, spec));
                continue;
            }
            let slots = spec
                .slots
                .iter()
                .map(|s| {
                    parse_slot(s).ok_or_else(|| DslError::Binding {
                        name: name.clone(),
                        message: format!("bad slot '{s}'; use species^ or species_"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let odd = match spec.parity.as_deref() {
                None | Some("even") => false,
                Some("odd") => true,
                Some(p) => {
                    return Err(DslError::Binding {
                        name: name.clone(),
                        message: format!("unknown parity '{p}'"),
                    })
                }
            };
            let source = match &spec.values {
                Some(_) if odd => {
                    return Err(DslError::ParityMismatch {
                        name: name.clone(),
                        declared: "odd",
                        bound: "even",
                    })
                }
                Some(v) => {
                    let n: usize = slots.iter().map(|s| s.dim()).product();
                    if v.len() != n {
                        return Err(DslError::ShapeMismatch {
                            name: name.clone(),
                            expected: n,
                            got: v.len(),
                        });
                    }
                    SymbolSource::Values(v.iter().map(|x| C::new(x[0], x[1])).collect())
                }
                None if odd => SymbolSource::Sample(Statistics::Fermionic),
                None => SymbolSource::Sample(Statistics::Bosonic),
            };
            t.declare(name, slots, source);
        }
        for (name, of, spec) in conjugates {
            let n = t.symbols.get(of.as_str()).map(|d| d.slots.len()).unwrap_or(0);
            t.declare_conjugate(name, of, spec.order.clone().unwrap_or_else(|| (0..n).collect()))?;
        }
        Ok(t)
    }

    pub fn free_indices(&self) -> Result<Vec<super::Index>, DslError> {
        self.free
            .iter()
            .map(|s| {
                let mut e = super::parse_syntax(&format!("x_{{{s}}}"))
                    .ok()
                    .and_then(|e| e.terms.into_iter().next())
                    .and_then(|t| t.factors.into_iter().next())
                    .filter(|f| f.rank() == 1)
                    .ok_or_else(|| DslError::BindFile(format!("bad free index '{s}'")))?;
                Ok(e.groups.remove(0).indices.remove(0))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_and_explicit_conjugates() {
        let t = SymbolTable::standard(Statistics::Bosonic);
        let ob = t.lookup("Omegabar").unwrap();
        assert_eq!(
            ob.slots,
            vec![Slot::down(Species::Isospin), Slot::down(Species::Spinor), Slot::down(Species::SpinorDotted)]
        );
        let wb = t.lookup("Wbar").unwrap();
        assert_eq!(wb.slots[1], Slot::down(Species::Isospin));
        assert!(t.lookup("Q").is_none());
    }

    #[test]
    fn builtin_values() {
        let ctx = PairingContext::default();
        let g = builtin("g", &builtin_slots("g", &[false, false]).unwrap(), &ctx).unwrap();
        assert_eq!(g.get(&[1, 1]).body(), C::new(-1.0, 0.0));
        let d = builtin("delta", &builtin_slots("delta", &[true, false]).unwrap(), &ctx).unwrap();
        assert_eq!(d.get(&[1, 1]).body(), C::new(1.0, 0.0));
        assert!(builtin("delta", &builtin_slots("delta", &[true, true]).unwrap(), &ctx).is_err());
        assert!(builtin("eps", &builtin_slots("eps", &[true, false]).unwrap(), &ctx).is_err());
    }

    #[test]
    fn bind_file_errors() {
        let shape = r#"{"symbols": {"X": {"slots": ["isospin^"], "values": [[1, 0]]}}}"#;
        assert!(matches!(
            BindFile::from_json(shape).unwrap().symbol_table(),
            Err(DslError::ShapeMismatch { expected: 2, got: 1, .. })
        ));
        let parity = r#"{"symbols": {"X": {"slots": ["isospin^"], "parity": "odd", "values": [[1, 0], [0, 0]]}}}"#;
        assert!(matches!(
            BindFile::from_json(parity).unwrap().symbol_table(),
            Err(DslError::ParityMismatch { .. })
        ));
        assert!(BindFile::from_json(r#"{"bogus": 1}"#).is_err());
        let ok = BindFile::from_json(r#"{"free": ["a", "B'"], "symbols": {"Y": {"conjugate": "phi"}}}"#).unwrap();
        assert_eq!(ok.free_indices().unwrap().len(), 2);
        assert_eq!(ok.symbol_table().unwrap().lookup("Y").unwrap().slots, vec![Slot::down(Species::Isospin)]);
    }
}
