//! Vertex extraction by momentum substitution.
//!
//! The covariant derivative is expanded symbolically through the broken-frame
//! matrices, conjugated, and only then has `∂X → i p_X X` applied. Numerical
//! validation pulls each coefficient out of the floating-point Lagrangian by a
//! discrete Cauchy integral over roots of unity in the leg amplitudes.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::symbolic::{Coef, Monomial, Sym};
use super::{
    higgs_field_components, higgs_kinetic_density, higgs_potential_at, EWParams, EwError, FieldPoint, Momenta,
};
use crate::spinor::ETA;
use crate::tensor::sampling::{complex_gaussian, family_key, stream_rng};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Leg {
    H,
    Phi0,
    PhiPlus,
    PhiMinus,
    A,
    Z,
    WPlus,
    WMinus,
    PsiLBar1,
    PsiLBar2,
    PsiR,
    PsiRBar,
    PsiL1,
    PsiL2,
}

pub const ALL_LEGS: [Leg; 14] = [
    Leg::H,
    Leg::Phi0,
    Leg::PhiPlus,
    Leg::PhiMinus,
    Leg::A,
    Leg::Z,
    Leg::WPlus,
    Leg::WMinus,
    Leg::PsiLBar1,
    Leg::PsiLBar2,
    Leg::PsiR,
    Leg::PsiRBar,
    Leg::PsiL1,
    Leg::PsiL2,
];

impl Leg {
    pub fn name(self) -> &'static str {
        match self {
            Leg::H => "H",
            Leg::Phi0 => "phi0",
            Leg::PhiPlus => "phi+",
            Leg::PhiMinus => "phi-",
            Leg::A => "A",
            Leg::Z => "Z",
            Leg::WPlus => "W+",
            Leg::WMinus => "W-",
            Leg::PsiLBar1 => "psiLbar1",
            Leg::PsiLBar2 => "psiLbar2",
            Leg::PsiR => "psiR",
            Leg::PsiRBar => "psiRbar",
            Leg::PsiL1 => "psiL1",
            Leg::PsiL2 => "psiL2",
        }
    }

    pub fn conj(self) -> Leg {
        match self {
            Leg::PhiPlus => Leg::PhiMinus,
            Leg::PhiMinus => Leg::PhiPlus,
            Leg::WPlus => Leg::WMinus,
            Leg::WMinus => Leg::WPlus,
            Leg::PsiLBar1 => Leg::PsiL1,
            Leg::PsiLBar2 => Leg::PsiL2,
            Leg::PsiL1 => Leg::PsiLBar1,
            Leg::PsiL2 => Leg::PsiLBar2,
            Leg::PsiR => Leg::PsiRBar,
            Leg::PsiRBar => Leg::PsiR,
            other => other,
        }
    }

    fn gauge_index(self) -> Option<usize> {
        match self {
            Leg::A => Some(0),
            Leg::Z => Some(1),
            Leg::WPlus => Some(2),
            Leg::WMinus => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A spacetime covector attached to a leg: a gauge polarization or the
/// momentum of a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VecRef {
    Pol(Leg),
    Mom(Leg),
}

impl fmt::Display for VecRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VecRef::Pol(l) => write!(f, "{l}"),
            VecRef::Mom(l) => write!(f, "p_{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure {
    Scalar,
    Metric(VecRef, VecRef),
    Spinor(Leg, Leg),
}

impl Structure {
    fn metric(a: VecRef, b: VecRef) -> Structure {
        if a <= b {
            Structure::Metric(a, b)
        } else {
            Structure::Metric(b, a)
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Scalar => write!(f, "1"),
            Structure::Metric(a, b) => write!(f, "g({a},{b})"),
            Structure::Spinor(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagrangianTerm {
    HiggsKinetic,
    HiggsPotential,
    Yukawa,
}

impl LagrangianTerm {
    pub fn parse(s: &str) -> Result<Self, EwError> {
        match s {
            "higgs-kinetic" => Ok(LagrangianTerm::HiggsKinetic),
            "higgs-potential" => Ok(LagrangianTerm::HiggsPotential),
            "yukawa" => Ok(LagrangianTerm::Yukawa),
            other => Err(EwError::UnknownTerm(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LagrangianTerm::HiggsKinetic => "higgs-kinetic",
            LagrangianTerm::HiggsPotential => "higgs-potential",
            LagrangianTerm::Yukawa => "yukawa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexEntry {
    /// Sorted leg multiset.
    pub legs: Vec<Leg>,
    pub coefficient: Monomial,
    pub structure: Structure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexTable {
    pub term: LagrangianTerm,
    pub params: EWParams,
    pub entries: Vec<VertexEntry>,
}

#[derive(Serialize)]
struct Row {
    legs: String,
    coefficient_numerator: String,
    coefficient_denominator: i64,
    trig_powers: String,
    index_structure: String,
}

#[derive(Serialize)]
struct JsonRow {
    legs: Vec<&'static str>,
    numerator: String,
    denominator: i64,
    powers: String,
    structure: String,
    value: [f64; 2],
}

impl VertexTable {
    /// Sum of the monomials with these legs and structure.
    pub fn coefficient(&self, legs: &[Leg], structure: Structure) -> Coef {
        let mut sorted = legs.to_vec();
        sorted.sort();
        self.entries
            .iter()
            .filter(|e| e.legs == sorted && e.structure == structure)
            .fold(Coef::zero(), |acc, e| acc.add(&e.coefficient.clone().into()))
    }

    fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        self.entries.iter().map(|e| {
            let (n, d) = e.coefficient.numerator_denominator();
            Row {
                legs: legs_string(&e.legs),
                coefficient_numerator: n,
                coefficient_denominator: d,
                trig_powers: e.coefficient.power_tags(),
                index_structure: e.structure.to_string(),
            }
        })
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.rows() {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<JsonRow> = self
            .entries
            .iter()
            .map(|e| {
                let (n, d) = e.coefficient.numerator_denominator();
                let v = e.coefficient.eval(&self.params);
                JsonRow {
                    legs: e.legs.iter().map(|l| l.name()).collect(),
                    numerator: n,
                    denominator: d,
                    powers: e.coefficient.power_tags(),
                    structure: e.structure.to_string(),
                    value: [v.re, v.im],
                }
            })
            .collect();
        serde_json::json!({
            "term": self.term,
            "params": self.params,
            "entries": rows,
        })
    }
}

fn legs_string(legs: &[Leg]) -> String {
    if legs.is_empty() {
        "vacuum".to_string()
    } else {
        legs.iter().map(|l| l.name()).collect::<Vec<_>>().join(" ")
    }
}

// ---- symbolic expansion ----

type Poly = Vec<(Coef, Vec<Leg>)>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VecObj {
    Gauge(Leg),
    Deriv(Leg),
}

#[derive(Debug, Clone)]
struct VTerm {
    coef: Coef,
    legs: Vec<Leg>,
    vec: VecObj,
}

fn c(n: i64, d: i64) -> Coef {
    Coef::rational(n, d)
}

fn sym(s: Sym, p: i32) -> Coef {
    Coef::sym(s, p)
}

/// Broken-frame matrices `[e′, e″, e⁺, e⁻]` with their gauge legs.
fn frame_symbolic() -> [(Leg, [[Coef; 2]; 2]); 4] {
    let z = Coef::zero;
    [
        (Leg::A, [[c(-2, 1).mul(&sym(Sym::Sin, 1)), z()], [z(), z()]]),
        (
            Leg::Z,
            [
                [sym(Sym::Cos, 1).add(&sym(Sym::Sin, 2).mul(&sym(Sym::Cos, -1)).neg()), z()],
                [z(), sym(Sym::Cos, -1).neg()],
            ],
        ),
        (Leg::WPlus, [[z(), z()], [sym(Sym::Sqrt2, 1), z()]]),
        (Leg::WMinus, [[z(), sym(Sym::Sqrt2, 1)], [z(), z()]]),
    ]
}

/// `M = −W + tr(W)·1`, entries linear in the gauge legs.
fn connection_symbolic() -> [[Vec<(Coef, Leg)>; 2]; 2] {
    let k = Coef::i().mul(&c(1, 2)).mul(&sym(Sym::Q, 1));
    let frame = frame_symbolic();
    let w = |a: usize, b: usize| -> Vec<(Coef, Leg)> {
        frame
            .iter()
            .map(|(leg, e)| (k.mul(&e[a][b]), *leg))
            .filter(|(x, _)| !x.is_zero())
            .collect()
    };
    let mut m: [[Vec<(Coef, Leg)>; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let mut entry: Vec<(Coef, Leg)> = w(a, b).into_iter().map(|(x, l)| (x.neg(), l)).collect();
            if a == b {
                entry.extend(w(0, 0));
                entry.extend(w(1, 1));
            }
            m[a][b] = entry;
        }
    }
    m
}

fn higgs_symbolic() -> [Poly; 2] {
    [
        vec![
            (sym(Sym::M, 1), vec![]),
            (Coef::one(), vec![Leg::H]),
            (Coef::i(), vec![Leg::Phi0]),
        ],
        vec![(Coef::one(), vec![Leg::PhiPlus])],
    ]
}

fn conj_poly(p: &Poly) -> Poly {
    p.iter()
        .map(|(c, l)| (c.conj(), l.iter().map(|x| x.conj()).collect()))
        .collect()
}

fn mul_poly(a: &Poly, b: &Poly) -> Poly {
    let mut out = Vec::new();
    for (ca, la) in a {
        for (cb, lb) in b {
            let mut legs = la.clone();
            legs.extend(lb);
            out.push((ca.mul(cb), legs));
        }
    }
    out
}

fn nabla_symbolic() -> [Vec<VTerm>; 2] {
    let phi = higgs_symbolic();
    let m = connection_symbolic();
    let mut out: [Vec<VTerm>; 2] = Default::default();
    for a in 0..2 {
        for (cf, legs) in &phi[a] {
            if let [x] = legs.as_slice() {
                out[a].push(VTerm {
                    coef: cf.clone(),
                    legs: vec![],
                    vec: VecObj::Deriv(*x),
                });
            }
        }
        for b in 0..2 {
            for (cm, g) in &m[a][b] {
                for (cp, legs) in &phi[b] {
                    out[a].push(VTerm {
                        coef: cm.mul(cp),
                        legs: legs.clone(),
                        vec: VecObj::Gauge(*g),
                    });
                }
            }
        }
    }
    out
}

fn conj_vterm(t: &VTerm) -> VTerm {
    VTerm {
        coef: t.coef.conj(),
        legs: t.legs.iter().map(|l| l.conj()).collect(),
        vec: match t.vec {
            VecObj::Gauge(g) => VecObj::Gauge(g.conj()),
            VecObj::Deriv(x) => VecObj::Deriv(x.conj()),
        },
    }
}

/// `∂X → i p_X X`; returns the coefficient, legs and covector.
fn substitute(t: &VTerm) -> (Coef, Vec<Leg>, VecRef) {
    let mut legs = t.legs.clone();
    match t.vec {
        VecObj::Gauge(g) => {
            legs.push(g);
            (t.coef.clone(), legs, VecRef::Pol(g))
        }
        VecObj::Deriv(x) => {
            legs.push(x);
            (t.coef.mul(&Coef::i()), legs, VecRef::Mom(x))
        }
    }
}

type Collected = BTreeMap<(Vec<Leg>, Structure), Coef>;

fn collect(acc: &mut Collected, coef: Coef, mut legs: Vec<Leg>, structure: Structure) {
    legs.sort();
    let slot = acc.entry((legs, structure)).or_default();
    *slot = slot.add(&coef);
}

fn kinetic_symbolic() -> Collected {
    let nabla = nabla_symbolic();
    let mut acc = Collected::new();
    for a in 0..2 {
        let bar: Vec<_> = nabla[a].iter().map(|t| substitute(&conj_vterm(t))).collect();
        let plain: Vec<_> = nabla[a].iter().map(substitute).collect();
        for (cx, lx, vx) in &bar {
            for (cy, ly, vy) in &plain {
                let mut legs = lx.clone();
                legs.extend(ly);
                collect(&mut acc, cx.mul(cy), legs, Structure::metric(*vx, *vy));
            }
        }
    }
    acc
}

fn potential_symbolic() -> Collected {
    let phi = higgs_symbolic();
    let mut s = Poly::new();
    for p in &phi {
        s.extend(mul_poly(&conj_poly(p), p));
    }
    let lam = sym(Sym::Lambda, 1);
    let two_m2 = c(2, 1).mul(&sym(Sym::M, 2));
    let mut acc = Collected::new();
    for (cf, legs) in &s {
        collect(&mut acc, lam.mul(&two_m2).mul(cf), legs.clone(), Structure::Scalar);
    }
    for (cf, legs) in mul_poly(&s, &s) {
        collect(&mut acc, lam.mul(&cf).neg(), legs, Structure::Scalar);
    }
    acc
}

fn yukawa_symbolic() -> Collected {
    let phi = higgs_symbolic();
    let lbar = [Leg::PsiLBar1, Leg::PsiLBar2];
    let l = [Leg::PsiL1, Leg::PsiL2];
    let mut acc = Collected::new();
    for a in 0..2 {
        for (cf, legs) in &phi[a] {
            let mut lg = legs.clone();
            lg.extend([lbar[a], Leg::PsiR]);
            collect(&mut acc, cf.neg(), lg, Structure::Spinor(lbar[a], Leg::PsiR));
        }
        for (cf, legs) in &conj_poly(&phi[a]) {
            let mut lg = legs.clone();
            lg.extend([Leg::PsiRBar, l[a]]);
            collect(&mut acc, cf.neg(), lg, Structure::Spinor(Leg::PsiRBar, l[a]));
        }
    }
    acc
}

pub fn extract_vertices(term: LagrangianTerm, params: &EWParams) -> Result<VertexTable, EwError> {
    params.validate()?;
    let collected = match term {
        LagrangianTerm::HiggsKinetic => kinetic_symbolic(),
        LagrangianTerm::HiggsPotential => potential_symbolic(),
        LagrangianTerm::Yukawa => yukawa_symbolic(),
    };
    let mut entries = Vec::new();
    for ((legs, structure), coef) in collected {
        for m in coef.monomials() {
            entries.push(VertexEntry {
                legs: legs.clone(),
                coefficient: m,
                structure,
            });
        }
    }
    Ok(VertexTable {
        term,
        params: *params,
        entries,
    })
}

// ---- numerical validation ----

/// Random polarizations, momenta and spinors for one validation point.
#[derive(Debug, Clone)]
pub struct ProbeData {
    pub polarizations: [[C; 4]; 4],
    pub momenta: Momenta,
    pub spinors: BTreeMap<Leg, [C; 2]>,
}

impl ProbeData {
    pub fn random(seed: u64, index: u64) -> ProbeData {
        let mut r = stream_rng(seed, family_key("vertex-probe"), index);
        let mut v4 = || [0; 4].map(|_: i32| complex_gaussian(&mut r));
        let polarizations = [v4(), v4(), v4(), v4()];
        let momenta = Momenta {
            h: v4(),
            phi0: v4(),
            phi_plus: v4(),
            phi_minus: v4(),
        };
        let spinors = ALL_LEGS[8..]
            .iter()
            .map(|&l| (l, [complex_gaussian(&mut r), complex_gaussian(&mut r)]))
            .collect();
        ProbeData {
            polarizations,
            momenta,
            spinors,
        }
    }

    fn covector(&self, v: VecRef) -> [C; 4] {
        match v {
            VecRef::Pol(l) => self.polarizations[l.gauge_index().expect("polarization of a gauge leg")],
            VecRef::Mom(Leg::H) => self.momenta.h,
            VecRef::Mom(Leg::Phi0) => self.momenta.phi0,
            VecRef::Mom(Leg::PhiPlus) => self.momenta.phi_plus,
            VecRef::Mom(Leg::PhiMinus) => self.momenta.phi_minus,
            VecRef::Mom(l) => panic!("no momentum attached to {l}"),
        }
    }

    pub fn structure_value(&self, s: &Structure) -> C {
        match s {
            Structure::Scalar => C::new(1.0, 0.0),
            Structure::Metric(a, b) => {
                let (x, y) = (self.covector(*a), self.covector(*b));
                (0..4).map(|l| x[l] * y[l] * ETA[l]).sum()
            }
            Structure::Spinor(a, b) => {
                let (x, y) = (self.spinors[a], self.spinors[b]);
                x[0] * y[0] + x[1] * y[1]
            }
        }
    }

    fn field_point(&self, amp: &[C; 14]) -> FieldPoint {
        let g = |k: usize, leg: Leg| self.polarizations[k].map(|x| x * amp[leg as usize]);
        FieldPoint {
            h: amp[Leg::H as usize],
            phi0: amp[Leg::Phi0 as usize],
            phi_plus: amp[Leg::PhiPlus as usize],
            phi_minus: amp[Leg::PhiMinus as usize],
            a: g(0, Leg::A),
            z: g(1, Leg::Z),
            w_plus: g(2, Leg::WPlus),
            w_minus: g(3, Leg::WMinus),
        }
    }

    /// The Lagrangian term evaluated in floating point at leg amplitudes `amp`.
    pub fn lagrangian(&self, term: LagrangianTerm, params: &EWParams, amp: &[C; 14]) -> Result<C, EwError> {
        let f = self.field_point(amp);
        match term {
            LagrangianTerm::HiggsKinetic => higgs_kinetic_density(&f, &self.momenta, params),
            LagrangianTerm::HiggsPotential => Ok(higgs_potential_at(&f, params)),
            LagrangianTerm::Yukawa => {
                let (phi, phib) = higgs_field_components(&f, params);
                let pair = |a: Leg, b: Leg| {
                    amp[a as usize] * amp[b as usize] * self.structure_value(&Structure::Spinor(a, b))
                };
                let lbar = [Leg::PsiLBar1, Leg::PsiLBar2];
                let l = [Leg::PsiL1, Leg::PsiL2];
                let mut s = C::new(0.0, 0.0);
                for a in 0..2 {
                    s += pair(lbar[a], Leg::PsiR) * phi[a] + pair(Leg::PsiRBar, l[a]) * phib[a];
                }
                Ok(-s)
            }
        }
    }

    pub fn table_value(&self, table: &VertexTable, amp: &[C; 14]) -> C {
        table
            .entries
            .iter()
            .map(|e| {
                let mono: C = e.legs.iter().map(|l| amp[*l as usize]).product();
                e.coefficient.eval(&table.params) * mono * self.structure_value(&e.structure)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexValidation {
    pub leg_multisets: usize,
    pub probes: usize,
    /// Largest relative error of a symbolic coefficient against the value
    /// extracted from the floating-point term.
    pub max_rel_error: f64,
    /// Relative error of the whole table against the term at random amplitudes.
    pub point_rel_error: f64,
}

const CAUCHY_POINTS: usize = 5;

fn cauchy_coefficient(
    probe: &ProbeData,
    term: LagrangianTerm,
    params: &EWParams,
    legs: &[Leg],
) -> Result<C, EwError> {
    let mut vars: Vec<(Leg, usize)> = Vec::new();
    for &l in legs {
        match vars.last_mut() {
            Some((x, k)) if *x == l => *k += 1,
            _ => vars.push((l, 1)),
        }
    }
    let n = CAUCHY_POINTS;
    let roots: Vec<C> = (0..n)
        .map(|j| C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect();
    let total = n.pow(vars.len() as u32);
    let mut acc = C::new(0.0, 0.0);
    for idx in 0..total {
        let mut amp = [C::new(0.0, 0.0); 14];
        let mut rest = idx;
        let mut phase = 0usize;
        for (leg, k) in &vars {
            let j = rest % n;
            rest /= n;
            amp[*leg as usize] = roots[j];
            phase += j * k;
        }
        acc += probe.lagrangian(term, params, &amp)? * roots[(n * 4 - phase % n) % n];
    }
    Ok(acc / total as f64)
}

pub fn validate_vertices(table: &VertexTable, seed: u64, probes: usize) -> Result<VertexValidation, EwError> {
    let mut groups: BTreeMap<&[Leg], Vec<&VertexEntry>> = BTreeMap::new();
    for e in &table.entries {
        groups.entry(e.legs.as_slice()).or_default().push(e);
    }
    let mut max_rel: f64 = 0.0;
    let mut point_rel: f64 = 0.0;
    for k in 0..probes {
        let probe = ProbeData::random(seed, k as u64);
        let errs: Vec<f64> = groups
            .par_iter()
            .map(|(legs, entries)| {
                let want: C = entries
                    .iter()
                    .map(|e| e.coefficient.eval(&table.params) * probe.structure_value(&e.structure))
                    .sum();
                let got = cauchy_coefficient(&probe, table.term, &table.params, legs)?;
                Ok((got - want).norm() / want.norm().max(got.norm()).max(1e-300))
            })
            .collect::<Result<_, EwError>>()?;
        max_rel = errs.into_iter().fold(max_rel, f64::max);

        let mut r = stream_rng(seed, family_key("vertex-point"), k as u64);
        let amp = [0; 14].map(|_: i32| complex_gaussian(&mut r) * 0.5);
        let got = probe.lagrangian(table.term, &table.params, &amp)?;
        let want = probe.table_value(table, &amp);
        point_rel = point_rel.max((got - want).norm() / got.norm().max(want.norm()).max(1e-300));
    }
    Ok(VertexValidation {
        leg_multisets: groups.len(),
        probes,
        max_rel_error: max_rel,
        point_rel_error: point_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> EWParams {
        EWParams::default()
    }

    #[test]
    fn hzz_coefficient() {
        let t = extract_vertices(LagrangianTerm::HiggsKinetic, &p()).unwrap();
        let z = VecRef::Pol(Leg::Z);
        let got = t.coefficient(&[Leg::H, Leg::Z, Leg::Z], Structure::Metric(z, z));
        let want = c(1, 2).mul(&sym(Sym::Q, 2)).mul(&sym(Sym::Cos, -2)).mul(&sym(Sym::M, 1));
        assert_eq!(got, want);
    }

    #[test]
    fn potential_coefficients() {
        let t = extract_vertices(LagrangianTerm::HiggsPotential, &p()).unwrap();
        assert_eq!(t.coefficient(&[Leg::H; 4], Structure::Scalar), sym(Sym::Lambda, 1).neg());
        assert_eq!(
            t.coefficient(&[], Structure::Scalar),
            sym(Sym::Lambda, 1).mul(&sym(Sym::M, 4))
        );
        // no tadpole: V is stationary at the vacuum
        assert!(t.coefficient(&[Leg::H], Structure::Scalar).is_zero());
        assert_eq!(
            t.coefficient(&[Leg::H, Leg::H, Leg::H], Structure::Scalar),
            c(-4, 1).mul(&sym(Sym::Lambda, 1)).mul(&sym(Sym::M, 1))
        );
    }

    #[test]
    fn kinetic_has_mass_terms() {
        let t = extract_vertices(LagrangianTerm::HiggsKinetic, &p()).unwrap();
        let w = (VecRef::Pol(Leg::WMinus), VecRef::Pol(Leg::WPlus));
        let got = t.coefficient(&[Leg::WPlus, Leg::WMinus], Structure::metric(w.0, w.1));
        assert_eq!(got, c(1, 2).mul(&sym(Sym::Q, 2)).mul(&sym(Sym::M, 2)));
        let dh = VecRef::Mom(Leg::H);
        assert_eq!(t.coefficient(&[Leg::H, Leg::H], Structure::Metric(dh, dh)), c(-1, 1));
        // the photon stays massless
        let a = VecRef::Pol(Leg::A);
        assert!(t.coefficient(&[Leg::A, Leg::A], Structure::Metric(a, a)).is_zero());
    }

    #[test]
    fn yukawa_mass_terms() {
        let t = extract_vertices(LagrangianTerm::Yukawa, &p()).unwrap();
        let s = Structure::Spinor(Leg::PsiLBar1, Leg::PsiR);
        assert_eq!(t.coefficient(&[Leg::PsiLBar1, Leg::PsiR], s), sym(Sym::M, 1).neg());
        let s = Structure::Spinor(Leg::PsiRBar, Leg::PsiL1);
        assert_eq!(t.coefficient(&[Leg::Phi0, Leg::PsiRBar, Leg::PsiL1], s), Coef::i());
    }

    #[test]
    fn every_table_matches_numerical_extraction() {
        for term in [LagrangianTerm::HiggsKinetic, LagrangianTerm::HiggsPotential, LagrangianTerm::Yukawa] {
            let t = extract_vertices(term, &p()).unwrap();
            let v = validate_vertices(&t, 17, 2).unwrap();
            assert!(v.max_rel_error < 1e-8, "{term:?}: {v:?}");
            assert!(v.point_rel_error < 1e-10, "{term:?}: {v:?}");
        }
    }

    #[test]
    fn csv_export() {
        let t = extract_vertices(LagrangianTerm::HiggsPotential, &p()).unwrap();
        let csv = t.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "legs,coefficient_numerator,coefficient_denominator,trig_powers,index_structure"
        );
        assert!(csv.lines().any(|l| l == "H H H H,-1,1,lambda,1"));
        assert!(csv.lines().any(|l| l == "vacuum,1,1,m^4 lambda,1"));
        let k = extract_vertices(LagrangianTerm::HiggsKinetic, &p()).unwrap().to_csv().unwrap();
        assert!(k.lines().any(|l| l == "H Z Z,1,2,q^2 sec^2 m,\"g(Z,Z)\""));
    }

    #[test]
    fn unknown_term() {
        assert_eq!(
            LagrangianTerm::parse("gauge-kinetic").unwrap_err(),
            EwError::UnknownTerm("gauge-kinetic".into())
        );
    }
}
