//! Exact coefficients: Laurent polynomials in `q, sinθ, cosθ, m, λ, √2` with
//! complex rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::{Complex, Complex64};
use num_rational::Rational64;

use super::EWParams;

pub type CRat = Complex<Rational64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    Q = 0,
    Sin = 1,
    Cos = 2,
    M = 3,
    Lambda = 4,
    Sqrt2 = 5,
}

/// Exponents of `[q, sin, cos, m, λ, √2]`; the `√2` exponent is kept in {0, 1}.
pub type Powers = [i32; 6];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coef(BTreeMap<Powers, CRat>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub powers: Powers,
    pub value: CRat,
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn crat(re: Rational64, im: Rational64) -> CRat {
    Complex::new(re, im)
}

fn czero() -> CRat {
    crat(rat(0, 1), rat(0, 1))
}

fn is_czero(c: &CRat) -> bool {
    c.re == rat(0, 1) && c.im == rat(0, 1)
}

fn pow2(k: i32) -> Rational64 {
    if k >= 0 {
        rat(1i64 << k, 1)
    } else {
        rat(1, 1i64 << (-k))
    }
}

impl Coef {
    pub fn zero() -> Coef {
        Coef(BTreeMap::new())
    }

    pub fn constant(value: CRat) -> Coef {
        let mut c = Coef::zero();
        c.push([0; 6], value);
        c
    }

    pub fn rational(n: i64, d: i64) -> Coef {
        Coef::constant(crat(rat(n, d), rat(0, 1)))
    }

    pub fn one() -> Coef {
        Coef::rational(1, 1)
    }

    pub fn i() -> Coef {
        Coef::constant(crat(rat(0, 1), rat(1, 1)))
    }

    pub fn sym(s: Sym, power: i32) -> Coef {
        let mut p = [0; 6];
        p[s as usize] = power;
        let mut c = Coef::zero();
        c.push(p, crat(rat(1, 1), rat(0, 1)));
        c
    }

    fn push(&mut self, mut powers: Powers, mut value: CRat) {
        let e = powers[5];
        let k = e.div_euclid(2);
        powers[5] = e.rem_euclid(2);
        if k != 0 {
            let f = pow2(k);
            value = crat(value.re * f, value.im * f);
        }
        let slot = self.0.entry(powers).or_insert_with(czero);
        *slot = *slot + value;
        if is_czero(slot) {
            self.0.remove(&powers);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Coef) -> Coef {
        let mut out = self.clone();
        for (p, v) in &other.0 {
            out.push(*p, *v);
        }
        out
    }

    pub fn neg(&self) -> Coef {
        Coef(self.0.iter().map(|(p, v)| (*p, -*v)).collect())
    }

    pub fn mul(&self, other: &Coef) -> Coef {
        let mut out = Coef::zero();
        for (pa, va) in &self.0 {
            for (pb, vb) in &other.0 {
                let mut p = *pa;
                for k in 0..6 {
                    p[k] += pb[k];
                }
                out.push(p, *va * *vb);
            }
        }
        out
    }

    /// Complex conjugate; the symbols are real.
    pub fn conj(&self) -> Coef {
        Coef(self.0.iter().map(|(p, v)| (*p, v.conj())).collect())
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.0.iter().map(|(p, v)| Monomial { powers: *p, value: *v })
    }

    pub fn eval(&self, params: &EWParams) -> Complex64 {
        self.monomials().map(|m| m.eval(params)).sum()
    }
}

impl From<Monomial> for Coef {
    fn from(m: Monomial) -> Coef {
        let mut c = Coef::zero();
        c.push(m.powers, m.value);
        c
    }
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Monomial {
    pub fn eval(&self, params: &EWParams) -> Complex64 {
        let (s, c) = params.theta.sin_cos();
        let base = [params.q, s, c, params.m, params.lambda, std::f64::consts::SQRT_2];
        let f: f64 = base.iter().zip(&self.powers).map(|(b, &e)| b.powi(e)).product();
        Complex64::new(to_f64(self.value.re), to_f64(self.value.im)) * f
    }

    /// `(numerator, denominator)` over a common denominator; the numerator is
    /// written `a`, `bi` or `a+bi`.
    pub fn numerator_denominator(&self) -> (String, i64) {
        let (re, im) = (self.value.re, self.value.im);
        let d = num_integer::lcm(*re.denom(), *im.denom());
        let a = re.numer() * (d / re.denom());
        let b = im.numer() * (d / im.denom());
        let num = match (a, b) {
            (a, 0) => format!("{a}"),
            (0, b) => format!("{b}i"),
            (a, b) if b < 0 => format!("{a}{b}i"),
            (a, b) => format!("{a}+{b}i"),
        };
        (num, d)
    }

    /// Symbol powers, e.g. `q^2 sec^2 m`; `1` when there are none.
    pub fn power_tags(&self) -> String {
        let names = ["q", "sin", "cos", "m", "lambda", "sqrt2"];
        let mut out = Vec::new();
        for (k, &e) in self.powers.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let (name, e) = if k == 2 && e < 0 { ("sec", -e) } else { (names[k], e) };
            out.push(if e == 1 { name.to_string() } else { format!("{name}^{e}") });
        }
        if out.is_empty() {
            "1".to_string()
        } else {
            out.join(" ")
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.numerator_denominator();
        if d == 1 {
            write!(f, "({n}) {}", self.power_tags())
        } else {
            write!(f, "({n}/{d}) {}", self.power_tags())
        }
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.monomials().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_normalizes() {
        let s = Coef::sym(Sym::Sqrt2, 1);
        assert_eq!(s.mul(&s), Coef::rational(2, 1));
        assert_eq!(Coef::sym(Sym::Sqrt2, -1), Coef::sym(Sym::Sqrt2, 1).mul(&Coef::rational(1, 2)));
        assert_eq!(Coef::sym(Sym::Sqrt2, -2), Coef::rational(1, 2));
    }

    #[test]
    fn arithmetic_and_eval() {
        let p = EWParams::default();
        let a = Coef::sym(Sym::Q, 2).mul(&Coef::sym(Sym::Cos, -2)).mul(&Coef::rational(1, 2));
        let want = 0.5 * p.q * p.q / p.theta.cos().powi(2);
        assert!((a.eval(&p).re - want).abs() < 1e-15);
        assert!(a.add(&a.neg()).is_zero());
        let z = Coef::i().mul(&Coef::i());
        assert_eq!(z, Coef::rational(-1, 1));
        assert_eq!(Coef::i().conj(), Coef::i().neg());
        let m = a.monomials().next().unwrap();
        assert_eq!(m.power_tags(), "q^2 sec^2");
        assert_eq!(m.numerator_denominator(), ("1".to_string(), 2));
    }

    #[test]
    fn complex_numerators() {
        let c = Coef::constant(Complex::new(rat(1, 2), rat(-1, 3)));
        let m = c.monomials().next().unwrap();
        assert_eq!(m.numerator_denominator(), ("3-2i".to_string(), 6));
        assert_eq!(m.power_tags(), "1");
    }
}
