//! Nested-loop reference evaluation of every family, with the pairing
//! tables written out by hand. Shares nothing with the contraction engine
//! beyond the field samples.

use num_complex::Complex64;

use super::fields::{Covectors, ExtendedHiggs, GaugeHiggs, HiggsDoublet, OmegaFields};
use crate::algebra::Grassmann;
use crate::spinor::pauli;
use crate::tensor::schemes::PairingContext;

type C = Complex64;
type G = Grassmann;

const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];
const E: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

fn prod(fs: &[&G]) -> G {
    let mut acc = G::real(1.0);
    for f in fs {
        acc = acc.mul_ref(f);
    }
    acc
}

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// Lower ε of the undotted or isospin kind; upper is its conjugate-phase
/// partner. Dotted forms swap the roles of the two phases.
struct Eps {
    lo: C,
    hi: C,
}

impl Eps {
    fn undotted(phase: C) -> Eps {
        Eps { lo: phase, hi: phase.conj() }
    }
    fn dotted(phase: C) -> Eps {
        Eps { lo: phase.conj(), hi: phase }
    }
    fn lo(&self, a: usize, b: usize) -> C {
        self.lo * E[a][b]
    }
    fn hi(&self, a: usize, b: usize) -> C {
        self.hi * E[a][b]
    }
}

fn r2() -> std::ops::Range<usize> {
    0..2
}

fn w(f: &GaugeHiggs, l: usize, a: usize, b: usize) -> &G {
    f.w.get(&[l, a, b])
}

pub fn oracle_i(f: &GaugeHiggs) -> Vec<G> {
    let mut out = vec![G::zero(); 4];
    let p = |a: usize| f.phi.get(&[a]);
    let pb = |a: usize| f.phibar.get(&[a]);
    for l in 0..4 {
        let g = c(ETA[l]);
        for a in r2() {
            for a2 in r2() {
                for b in r2() {
                    out[0] = &out[0] + &prod(&[w(f, l, a, a2), w(f, l, b, a), p(a2), pb(b)]).scale(g);
                    out[1] = &out[1] + &prod(&[w(f, l, a, a2), w(f, l, b, b), p(a2), pb(a)]).scale(g);
                    out[2] = &out[2] + &prod(&[w(f, l, a, a), w(f, l, b, b), p(a2), pb(a2)]).scale(g);
                    out[3] = &out[3] + &prod(&[w(f, l, a, b), w(f, l, b, a), p(a2), pb(a2)]).scale(g);
                }
            }
        }
    }
    out
}

pub fn oracle_j(f: &GaugeHiggs, iso_phase: C) -> Vec<G> {
    let e = Eps::undotted(iso_phase);
    let mut out = vec![G::zero(); 3];
    let p = |a: usize| f.phi.get(&[a]);
    let pb = |a: usize| f.phibar.get(&[a]);
    for l in 0..4 {
        let g = c(ETA[l]);
        for a in r2() {
            for b in r2() {
                for a2 in r2() {
                    for b2 in r2() {
                        for x in r2() {
                            let k1 = g * e.lo(a, b) * e.hi(a2, b2);
                            out[0] = &out[0] + &prod(&[w(f, l, a, a2), w(f, l, b, b2), p(x), pb(x)]).scale(k1);
                            // J₂ with (b, b2) as (γ, γ′) and x the trace index
                            let k2 = g * e.lo(a, b) * e.hi(a2, b2);
                            out[1] = &out[1] + &prod(&[w(f, l, a, a2), w(f, l, x, x), p(b), pb(b2)]).scale(k2);
                            // J₃ with (b, b2) as (γ, γ′) and x the summed β
                            out[2] = &out[2] + &prod(&[w(f, l, a, x), w(f, l, x, a2), p(b), pb(b2)]).scale(k2);
                        }
                    }
                }
            }
        }
    }
    out
}

fn spacetime(t: &crate::tensor::Tensor) -> [[G; 4]; 2] {
    let s = pauli();
    std::array::from_fn(|a| {
        std::array::from_fn(|l| {
            let mut acc = G::zero();
            for x in r2() {
                for y in r2() {
                    acc = &acc + &t.get(&[a, x, y]).scale(s[l][x][y] * std::f64::consts::FRAC_1_SQRT_2);
                }
            }
            acc
        })
    })
}

/// `M[l][m][a][b] = m² Ω̄_{la} Ω_m^b`.
fn m_components(o: &OmegaFields, m: f64) -> Vec<Vec<[[G; 2]; 2]>> {
    let ob = spacetime(&o.omegabar);
    let om = spacetime(&o.omega);
    (0..4)
        .map(|l| {
            (0..4)
                .map(|mu| std::array::from_fn(|a| std::array::from_fn(|b| ob[a][l].mul_ref(&om[b][mu]).scale(c(m * m)))))
                .collect()
        })
        .collect()
}

pub fn oracle_s(o: &OmegaFields, m: f64, iso_phase: C) -> Vec<G> {
    let e = Eps::undotted(iso_phase);
    let mm = m_components(o, m);
    let tr = |l: usize, mu: usize| &mm[l][mu][0][0] + &mm[l][mu][1][1];
    let mut out = vec![G::zero(); 6];
    for l in 0..4 {
        for mu in 0..4 {
            for n in 0..4 {
                for r in 0..4 {
                    // (g^{lm} g^{nr}, g^{ln} g^{mr}, g^{lr} g^{mn})
                    let gs = [
                        (l == mu && n == r, ETA[l] * ETA[n]),
                        (l == n && mu == r, ETA[l] * ETA[mu]),
                        (l == r && mu == n, ETA[l] * ETA[mu]),
                    ];
                    for (k, &(on, gv)) in gs.iter().enumerate() {
                        if !on {
                            continue;
                        }
                        out[k] = &out[k] + &tr(l, mu).mul_ref(&tr(n, r)).scale(c(gv));
                        for a in r2() {
                            for a2 in r2() {
                                for b in r2() {
                                    for b2 in r2() {
                                        let x = e.hi(a, a2) * e.lo(b, b2) * gv;
                                        if x == c(0.0) {
                                            continue;
                                        }
                                        out[3 + k] = &out[3 + k] + &mm[l][mu][a][b].mul_ref(&mm[n][r][a2][b2]).scale(x);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn oracle_sprime(o: &OmegaFields, h: &HiggsDoublet, m: f64, iso_phase: C) -> Vec<G> {
    let e = Eps::undotted(iso_phase);
    let mm = m_components(o, m);
    let p = |a: usize| h.phi.get(&[a]);
    let pb = |a: usize| h.phibar.get(&[a]);
    let (mut s1, mut s2, mut s3, mut phi4) = (G::zero(), G::zero(), G::zero(), G::zero());
    for l in 0..4 {
        let g = c(ETA[l]);
        for a in r2() {
            for b in r2() {
                s1 = &s1 + &prod(&[&mm[l][l][a][a], pb(b), p(b)]).scale(g);
                s2 = &s2 + &prod(&[&mm[l][l][a][b], pb(b), p(a)]).scale(g);
                for x in r2() {
                    for y in r2() {
                        let k = g * e.hi(a, x) * e.lo(b, y);
                        s3 = &s3 + &prod(&[&mm[l][l][a][b], pb(x), p(y)]).scale(k);
                    }
                }
            }
        }
    }
    for a in r2() {
        for b in r2() {
            phi4 = &phi4 + &prod(&[pb(a), p(a), pb(b), p(b)]);
        }
    }
    let mut omega2 = G::zero();
    for l in 0..4 {
        for a in r2() {
            for b in r2() {
                omega2 = &omega2 + &prod(&[&mm[l][l][a][a], pb(b), p(b)]).scale(c(ETA[l] / (m * m)));
            }
        }
    }
    let assembled = -(&(&(&phi4 + &s1) + &s2) + &s3);
    let expected = -(&phi4 + &omega2.scale(c(2.0 * m * m)));
    vec![s1, s2, s3, assembled, expected]
}

/// The three pairings of four slots all of one variance, as ordered pairs.
const EPS_EPS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(2, 0), (1, 3)], [(0, 3), (1, 2)]];
/// `δ` of slot 0 (the odd-variance slot) with slot `k`, then ε on the rest.
const DELTA_EPS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (3, 1)], [(0, 3), (1, 2)]];

fn idx4(code: usize) -> [usize; 4] {
    [(code >> 3) & 1, (code >> 2) & 1, (code >> 1) & 1, code & 1]
}

/// Weight of a pairing table entry on index values `i` (four slots).
fn weight(table: &[(usize, usize); 2], i: &[usize; 4], first_delta: bool, eps: &Eps) -> C {
    let mut w = c(1.0);
    for (k, &(x, y)) in table.iter().enumerate() {
        if k == 0 && first_delta {
            if i[x] != i[y] {
                return c(0.0);
            }
        } else {
            w *= eps.hi(i[x], i[y]);
        }
    }
    w
}

/// 9 scalars `Σ w_s(A..D) w_d(Ȧ..Ḋ) term(A..D, Ȧ..Ḋ)`, spinor scheme slowest.
fn pair_nine(
    table: &[[(usize, usize); 2]; 3],
    first_delta: bool,
    ctx: &PairingContext,
    term: impl Fn(&[usize; 4], &[usize; 4]) -> G,
) -> Vec<G> {
    let (es, ed) = (Eps::undotted(ctx.spinor_phase), Eps::dotted(ctx.spinor_phase));
    let mut out = vec![G::zero(); 9];
    for u in 0..16 {
        let iu = idx4(u);
        for d in 0..16 {
            let id = idx4(d);
            let t = term(&iu, &id);
            if t.is_zero() {
                continue;
            }
            for (s, ts) in table.iter().enumerate() {
                let ws = weight(ts, &iu, first_delta, &es);
                if ws == c(0.0) {
                    continue;
                }
                for (k, tk) in table.iter().enumerate() {
                    let wd = weight(tk, &id, first_delta, &ed);
                    if wd != c(0.0) {
                        out[3 * s + k] = &out[3 * s + k] + &t.scale(ws * wd);
                    }
                }
            }
        }
    }
    out
}

pub fn oracle_t18(o: &OmegaFields, ctx: &PairingContext) -> Vec<G> {
    let ie = Eps::undotted(ctx.isospin_phase);
    let (w, wb) = (&o.omega, &o.omegabar);
    let mut out = pair_nine(&EPS_EPS, false, ctx, |s, d| {
        let mut acc = G::zero();
        for a in r2() {
            for b in r2() {
                acc = &acc + &prod(&[wb.get(&[a, s[0], d[0]]), w.get(&[a, s[1], d[1]]), wb.get(&[b, s[2], d[2]]), w.get(&[b, s[3], d[3]])]);
            }
        }
        acc
    });
    out.extend(pair_nine(&EPS_EPS, false, ctx, |s, d| {
        let mut acc = G::zero();
        for a in r2() {
            for b in r2() {
                for a2 in r2() {
                    for b2 in r2() {
                        let k = ie.hi(a, a2) * ie.lo(b, b2);
                        if k == c(0.0) {
                            continue;
                        }
                        let t = prod(&[wb.get(&[a, s[0], d[0]]), w.get(&[b, s[1], d[1]]), wb.get(&[a2, s[2], d[2]]), w.get(&[b2, s[3], d[3]])]);
                        acc = &acc + &t.scale(k);
                    }
                }
            }
        }
        acc
    }));
    out
}

pub fn oracle_phi4(p: &ExtendedHiggs, ctx: &PairingContext) -> Vec<G> {
    let ie = Eps::undotted(ctx.isospin_phase);
    let (es, ed) = (Eps::undotted(ctx.spinor_phase), Eps::dotted(ctx.spinor_phase));
    let f = |a: usize, x: usize, y: usize| p.phi.get(&[a, x, y]);
    let fb = |a: usize, x: usize, y: usize| p.phibar.get(&[a, x, y]);
    let tr: [G; 2] = std::array::from_fn(|a| f(a, 0, 0) + f(a, 1, 1));
    let trb: [G; 2] = std::array::from_fn(|a| fb(a, 0, 0) + fb(a, 1, 1));
    let mut comp: [[G; 2]; 2] = Default::default();
    let mut compb: [[G; 2]; 2] = Default::default();
    let mut eps: [[G; 2]; 2] = Default::default();
    let mut epsb: [[G; 2]; 2] = Default::default();
    for a in r2() {
        for b in r2() {
            for x in r2() {
                for y in r2() {
                    comp[a][b] = &comp[a][b] + &f(a, x, y).mul_ref(f(b, y, x));
                    compb[a][b] = &compb[a][b] + &fb(a, x, y).mul_ref(fb(b, y, x));
                    for u in r2() {
                        for v in r2() {
                            // ε^{BD} ε_{AC} X^A_B Y^C_D with (x, y, u, v) = (A, B, C, D)
                            let ks = es.hi(y, v) * es.lo(x, u);
                            epsb[a][b] = &epsb[a][b] + &fb(a, x, y).mul_ref(fb(b, u, v)).scale(ks);
                            let kd = ed.hi(y, v) * ed.lo(x, u);
                            eps[a][b] = &eps[a][b] + &f(a, x, y).mul_ref(f(b, u, v)).scale(kd);
                        }
                    }
                }
            }
        }
    }
    let mut v = vec![G::zero(); 11];
    for a in r2() {
        for b in r2() {
            v[0] = &v[0] + &prod(&[&tr[a], &trb[a], &tr[b], &trb[b]]);
            v[1] = &v[1] + &prod(&[&tr[a], &tr[b], &compb[a][b]]);
            v[2] = &v[2] + &prod(&[&trb[a], &trb[b], &comp[a][b]]);
            v[3] = &v[3] + &comp[a][b].mul_ref(&compb[a][b]);
            v[4] = &v[4] + &prod(&[&tr[a], &tr[b], &epsb[a][b]]);
            v[5] = &v[5] + &prod(&[&trb[a], &trb[b], &eps[a][b]]);
            v[6] = &v[6] + &eps[a][b].mul_ref(&epsb[a][b]);
            for x in r2() {
                for y in r2() {
                    let k = ie.lo(a, b) * ie.hi(x, y);
                    if k == c(0.0) {
                        continue;
                    }
                    v[7] = &v[7] + &prod(&[&tr[a], &tr[b], &trb[x], &trb[y]]).scale(k);
                    v[8] = &v[8] + &prod(&[&tr[a], &tr[b], &compb[x][y]]).scale(k);
                    v[9] = &v[9] + &prod(&[&comp[a][b], &trb[x], &trb[y]]).scale(k);
                    v[10] = &v[10] + &comp[a][b].mul_ref(&compb[x][y]).scale(k);
                }
            }
        }
    }
    let bars = [v[0].conjugate(), v[1].conjugate(), v[3].conjugate()];
    v.extend(bars);
    v
}

pub fn oracle_mixed(p: &ExtendedHiggs, o: &OmegaFields, ctx: &PairingContext) -> Vec<G> {
    let ie = Eps::undotted(ctx.isospin_phase);
    let (f, fb, w, wb) = (&p.phi, &p.phibar, &o.omega, &o.omegabar);
    let mut out = Vec::with_capacity(27);
    for form in 0..3 {
        out.extend(pair_nine(&DELTA_EPS, true, ctx, |s, d| {
            let mut acc = G::zero();
            for a in r2() {
                for b in r2() {
                    let t = |ia: usize, ib: usize, ic: usize, id: usize| {
                        prod(&[f.get(&[ia, d[0], d[1]]), fb.get(&[ib, s[0], s[1]]), w.get(&[ic, s[2], d[2]]), wb.get(&[id, s[3], d[3]])])
                    };
                    match form {
                        0 => acc = &acc + &t(a, a, b, b),
                        1 => acc = &acc + &t(a, b, b, a),
                        _ => {
                            for x in r2() {
                                for y in r2() {
                                    let k = ie.hi(x, y) * ie.lo(a, b);
                                    if k != c(0.0) {
                                        acc = &acc + &t(a, x, b, y).scale(k);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            acc
        }));
    }
    out
}

/// Slot order here is `C` (the up slot) first: `[C, A, B, D]`.
const THREE_LEG: [[(usize, usize); 2]; 3] = [[(0, 3), (1, 2)], [(0, 1), (2, 3)], [(0, 2), (3, 1)]];

pub fn oracle_threeleg(cv: &Covectors, p: &ExtendedHiggs, q: f64, ctx: &PairingContext) -> Vec<G> {
    pair_nine(&THREE_LEG, true, ctx, |s, d| {
        // s, d are [C, A, B, D] index values
        let mut acc = G::zero();
        for a in r2() {
            acc = &acc + &prod(&[cv.w.get(&[s[1], d[1]]), cv.k.get(&[s[2], d[2]]), p.phibar.get(&[a, s[0], s[3]]), p.phi.get(&[a, d[0], d[3]])]);
        }
        acc.scale(c(q))
    })
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::super::fields::*;
    use super::*;
    use crate::algebra::GeneratorPool;
    use crate::tensor::sampling::stream_rng;
    use crate::tensor::Statistics;

    fn agree(a: &[G], b: &[G]) {
        assert_eq!(a.len(), b.len());
        let scale = a.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            let d = (x - y).max_abs();
            assert!(d <= 1e-12 * scale, "member {k}: {d:e} vs scale {scale:e}");
        }
    }

    #[test]
    fn gauge_families_match_loops() {
        let f = sample_gauge_higgs(&mut stream_rng(1, 1, 0)).unwrap();
        agree(&eval_i(&f).unwrap(), &oracle_i(&f));
        let ph = C::from_polar(1.0, 0.3);
        agree(&eval_j(&f, ph).unwrap(), &oracle_j(&f, ph));
    }

    #[test]
    fn omega_families_match_loops() {
        let ctx = PairingContext::with_phases(C::from_polar(1.0, 0.7), C::from_polar(1.0, -0.2));
        for stats in [Statistics::Bosonic, Statistics::Fermionic] {
            let mut r = stream_rng(2, 1, 0);
            let o = sample_omega(&mut r, &mut GeneratorPool::new(), stats).unwrap();
            let h = sample_higgs(&mut r).unwrap();
            let p = sample_extended_higgs(&mut r).unwrap();
            agree(&eval_s(&o, 1.3, ctx.isospin_phase).unwrap(), &oracle_s(&o, 1.3, ctx.isospin_phase));
            agree(&eval_sprime(&o, &h, 1.3, ctx.isospin_phase).unwrap(), &oracle_sprime(&o, &h, 1.3, ctx.isospin_phase));
            agree(&eval_t18(&o, &ctx).unwrap(), &oracle_t18(&o, &ctx));
            agree(&eval_mixed(&p, &o, &ctx).unwrap(), &oracle_mixed(&p, &o, &ctx));
        }
    }

    #[test]
    fn extended_higgs_families_match_loops() {
        let ctx = PairingContext::with_phases(C::from_polar(1.0, 1.2), C::from_polar(1.0, 0.5));
        let mut r = stream_rng(3, 1, 0);
        let p = sample_extended_higgs(&mut r).unwrap();
        let cv = sample_covectors(&mut r).unwrap();
        agree(&eval_phi4(&p, &ctx).unwrap(), &oracle_phi4(&p, &ctx));
        agree(&eval_threeleg(&cv, &p, 0.65, &ctx).unwrap(), &oracle_threeleg(&cv, &p, 0.65, &ctx));
    }
}
