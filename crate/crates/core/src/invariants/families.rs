//! Scalar families built from the gauge, Ω and extended-Higgs fields.
//!
//! Every evaluator is generic over the scalar type so the same contraction
//! run over [`Magnitude`](crate::algebra::Magnitude) inputs yields the
//! pre-cancellation scale of each member.

use num_complex::Complex64;

use super::fields::{ein, ein_scalar, eps_down, eps_up, metric_up, Covectors, ExtendedHiggs, GaugeHiggs, HiggsDoublet, OmegaFields};
use crate::algebra::GradedScalar;
use crate::tensor::schemes::{apply_scheme, enumerate_pair_contractions, PairingContext};
use crate::tensor::{Species, Tensor, TensorError};

type C = Complex64;

const ISO: Species = Species::Isospin;

/// `[I₁, I₂, I₃, I₄]`.
pub fn eval_i<T: GradedScalar>(f: &GaugeHiggs<T>) -> Result<Vec<T>, TensorError> {
    let g = metric_up::<T>();
    let (w, p, pb) = (&f.w, &f.phi, &f.phibar);
    Ok(vec![
        ein_scalar(&[(&g, "l m"), (w, "l a c"), (w, "m b a"), (p, "c"), (pb, "b")])?,
        ein_scalar(&[(&g, "l m"), (w, "l a c"), (w, "m b b"), (p, "c"), (pb, "a")])?,
        ein_scalar(&[(&g, "l m"), (w, "l a a"), (w, "m b b"), (p, "c"), (pb, "c")])?,
        ein_scalar(&[(&g, "l m"), (w, "l a b"), (w, "m b a"), (p, "c"), (pb, "c")])?,
    ])
}

/// `[J₁, J₂, J₃]`; `iso_phase` fixes the isospin symplectic form.
pub fn eval_j<T: GradedScalar>(f: &GaugeHiggs<T>, iso_phase: C) -> Result<Vec<T>, TensorError> {
    let g = metric_up::<T>();
    let lo = eps_down::<T>(ISO, iso_phase);
    let hi = eps_up::<T>(ISO, iso_phase);
    let (w, p, pb) = (&f.w, &f.phi, &f.phibar);
    Ok(vec![
        ein_scalar(&[(&g, "l m"), (&lo, "a b"), (&hi, "c d"), (w, "l a c"), (w, "m b d"), (p, "x"), (pb, "x")])?,
        ein_scalar(&[(&g, "l m"), (&lo, "a x"), (&hi, "c y"), (w, "l a c"), (w, "m b b"), (p, "x"), (pb, "y")])?,
        ein_scalar(&[(&g, "l m"), (&lo, "a x"), (&hi, "d y"), (w, "l a b"), (w, "m b d"), (p, "x"), (pb, "y")])?,
    ])
}

/// `M_{λμα}{}^β = m² Ω̄_{λα} Ω_μ{}^β`, slots `[λ↓, μ↓, α↓, β↑]`.
pub fn m_tensor<T: GradedScalar>(o: &OmegaFields<T>, m: f64) -> Result<Tensor<T>, TensorError> {
    Ok(ein(&[(&o.omegabar_st, "a l"), (&o.omega_st, "b m")], "l m a b")?.scale(C::new(m * m, 0.0)))
}

/// Traces `M_{λμ}`, `M_α{}^β` and `M`.
pub fn m_traces<T: GradedScalar>(mt: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>, T), TensorError> {
    let g = metric_up::<T>();
    let mlm = ein(&[(mt, "l m a a")], "l m")?;
    let mab = ein(&[(&g, "l m"), (mt, "l m a b")], "a b")?;
    let m = ein_scalar(&[(&g, "l m"), (mt, "l m a a")])?;
    Ok((mlm, mab, m))
}

/// `[S₁, S₂, S₃, S₄, S₅, F]` where `F` is the extra contraction
/// `g^{λρ} g^{μν} ε ε M M`.
pub fn eval_s<T: GradedScalar>(o: &OmegaFields<T>, m: f64, iso_phase: C) -> Result<Vec<T>, TensorError> {
    let g = metric_up::<T>();
    let hi = eps_up::<T>(ISO, iso_phase);
    let lo = eps_down::<T>(ISO, iso_phase);
    let mt = m_tensor(o, m)?;
    let (mlm, _, _) = m_traces(&mt)?;
    let ee = |a: &str, b: &str| -> Result<T, TensorError> {
        ein_scalar(&[(&g, a), (&g, b), (&hi, "a c"), (&lo, "b d"), (&mt, "l m a b"), (&mt, "n r c d")])
    };
    Ok(vec![
        ein_scalar(&[(&g, "l m"), (&g, "n r"), (&mlm, "l m"), (&mlm, "n r")])?,
        ein_scalar(&[(&g, "l n"), (&g, "m r"), (&mlm, "l m"), (&mlm, "n r")])?,
        ein_scalar(&[(&g, "l r"), (&g, "m n"), (&mlm, "l m"), (&mlm, "n r")])?,
        ee("l m", "n r")?,
        ee("l n", "m r")?,
        ee("l r", "m n")?,
    ])
}

/// `[S′₁, S′₂, S′₃, V, V₀]` with `V = −|φ|⁴ − ΣS′` the assembled potential
/// and `V₀ = −(|φ|⁴ + 2m²Ω²|φ|²)`.
pub fn eval_sprime<T: GradedScalar>(
    o: &OmegaFields<T>,
    h: &HiggsDoublet<T>,
    m: f64,
    iso_phase: C,
) -> Result<Vec<T>, TensorError> {
    let g = metric_up::<T>();
    let hi = eps_up::<T>(ISO, iso_phase);
    let lo = eps_down::<T>(ISO, iso_phase);
    let mt = m_tensor(o, m)?;
    let (p, pb) = (&h.phi, &h.phibar);
    let s1 = ein_scalar(&[(&g, "l m"), (&mt, "l m a a"), (pb, "b"), (p, "b")])?;
    let s2 = ein_scalar(&[(&g, "l m"), (&mt, "l m a b"), (pb, "b"), (p, "a")])?;
    let s3 = ein_scalar(&[(&g, "l m"), (&hi, "a x"), (&lo, "b y"), (&mt, "l m a b"), (pb, "x"), (p, "y")])?;
    let phi4 = ein_scalar(&[(pb, "a"), (p, "a"), (pb, "b"), (p, "b")])?;
    let omega2 = ein_scalar(&[(&g, "l m"), (&o.omegabar_st, "a l"), (&o.omega_st, "a m"), (pb, "b"), (p, "b")])?;
    let assembled = T::zero().minus(&phi4).minus(&s1).minus(&s2).minus(&s3);
    let expected = T::zero().minus(&phi4).minus(&omega2.scaled(C::new(2.0 * m * m, 0.0)));
    Ok(vec![s1, s2, s3, assembled, expected])
}

fn scheme_values<T: GradedScalar>(t: &Tensor<T>, ctx: &PairingContext) -> Result<Vec<T>, TensorError> {
    let schemes = enumerate_pair_contractions(t.slots())?;
    schemes.iter().map(|s| apply_scheme(t, s, ctx)).collect()
}

/// Two 9-vectors: `Ω̄_α Ω^α Ω̄_β Ω^β` and `ε^{αα′}ε_{ββ′} Ω̄_α Ω^β Ω̄_{α′} Ω^{β′}`,
/// each paired through the 3×3 products of spinor ε pairings.
pub fn eval_t18<T: GradedScalar>(o: &OmegaFields<T>, ctx: &PairingContext) -> Result<Vec<T>, TensorError> {
    let hi = eps_up::<T>(ISO, ctx.isospin_phase);
    let lo = eps_down::<T>(ISO, ctx.isospin_phase);
    let (w, wb) = (&o.omega, &o.omegabar);
    let free = "A B C D A' B' C' D'";
    let t1 = ein(&[(wb, "a A A'"), (w, "a B B'"), (wb, "b C C'"), (w, "b D D'")], free)?;
    let t2 = ein(
        &[(&hi, "a x"), (&lo, "b y"), (wb, "a A A'"), (w, "b B B'"), (wb, "x C C'"), (w, "y D D'")],
        free,
    )?;
    let mut out = scheme_values(&t1, ctx)?;
    out.extend(scheme_values(&t2, ctx)?);
    Ok(out)
}

/// `[P₁, P₂, P₃, P₄, E₂, E₃, E₄, Z₁, Z₂, Z₃, Z₄, P̄₁, P̄₂, P̄₄]`.
///
/// `P` are the trace forms, `E` the ε-pairing forms (ε on the `Φ̄` pair, on
/// the `Φ` pair, on both), `Z` the isospin-ε contractions, and the barred
/// entries conjugates used by the reality checks.
pub fn eval_phi4<T: GradedScalar>(p: &ExtendedHiggs<T>, ctx: &PairingContext) -> Result<Vec<T>, TensorError> {
    let (f, fb) = (&p.phi, &p.phibar);
    let sp_hi = eps_up::<T>(Species::Spinor, ctx.spinor_phase);
    let sp_lo = eps_down::<T>(Species::Spinor, ctx.spinor_phase);
    let dt_hi = eps_up::<T>(Species::SpinorDotted, ctx.spinor_phase);
    let dt_lo = eps_down::<T>(Species::SpinorDotted, ctx.spinor_phase);
    let i_hi = eps_up::<T>(ISO, ctx.isospin_phase);
    let i_lo = eps_down::<T>(ISO, ctx.isospin_phase);
    // traces and compositions
    let tr = ein(&[(f, "a X X")], "a")?;
    let trb = ein(&[(fb, "a X X")], "a")?;
    let comp = ein(&[(f, "a X Y"), (f, "b Y X")], "a b")?;
    let compb = ein(&[(fb, "a X Y"), (fb, "b Y X")], "a b")?;
    // ε pairing forms of the Φ̄ and Φ pairs
    let epsb = ein(&[(&sp_hi, "B D"), (&sp_lo, "A C"), (fb, "a A B"), (fb, "b C D")], "a b")?;
    let eps = ein(&[(&dt_hi, "B' D'"), (&dt_lo, "A' C'"), (f, "a A' B'"), (f, "b C' D'")], "a b")?;

    let p1 = ein_scalar(&[(&tr, "a"), (&trb, "a"), (&tr, "b"), (&trb, "b")])?;
    let p2 = ein_scalar(&[(&tr, "a"), (&tr, "b"), (&compb, "a b")])?;
    let p3 = ein_scalar(&[(&trb, "a"), (&trb, "b"), (&comp, "a b")])?;
    let p4 = ein_scalar(&[(&comp, "a b"), (&compb, "a b")])?;
    let e2 = ein_scalar(&[(&tr, "a"), (&tr, "b"), (&epsb, "a b")])?;
    let e3 = ein_scalar(&[(&trb, "a"), (&trb, "b"), (&eps, "a b")])?;
    let e4 = ein_scalar(&[(&eps, "a b"), (&epsb, "a b")])?;
    let z1 = ein_scalar(&[(&i_lo, "a b"), (&i_hi, "c d"), (&tr, "a"), (&tr, "b"), (&trb, "c"), (&trb, "d")])?;
    let z2 = ein_scalar(&[(&i_lo, "a b"), (&i_hi, "c d"), (&tr, "a"), (&tr, "b"), (&compb, "c d")])?;
    let z3 = ein_scalar(&[(&i_lo, "a b"), (&i_hi, "c d"), (&comp, "a b"), (&trb, "c"), (&trb, "d")])?;
    let z4 = ein_scalar(&[(&i_lo, "a b"), (&i_hi, "c d"), (&comp, "a b"), (&compb, "c d")])?;
    let (c1, c2, c4) = (p1.conjugate(), p2.conjugate(), p4.conjugate());
    Ok(vec![p1, p2, p3, p4, e2, e3, e4, z1, z2, z3, z4, c1, c2, c4])
}

/// Three 9-vectors `X₁, X₂, X₃` from the isospin contractions of
/// `Φ Φ̄ Ω Ω̄`: `δ δ`, exchanged `δ δ`, and `ε ε`.
pub fn eval_mixed<T: GradedScalar>(
    p: &ExtendedHiggs<T>,
    o: &OmegaFields<T>,
    ctx: &PairingContext,
) -> Result<Vec<T>, TensorError> {
    let hi = eps_up::<T>(ISO, ctx.isospin_phase);
    let lo = eps_down::<T>(ISO, ctx.isospin_phase);
    let (f, fb, w, wb) = (&p.phi, &p.phibar, &o.omega, &o.omegabar);
    let free = "A B C D A' B' C' D'";
    let x1 = ein(&[(f, "a A' B'"), (fb, "a A B"), (w, "b C C'"), (wb, "b D D'")], free)?;
    let x2 = ein(&[(f, "a A' B'"), (fb, "b A B"), (w, "b C C'"), (wb, "a D D'")], free)?;
    let x3 = ein(
        &[(&hi, "x y"), (&lo, "a b"), (f, "a A' B'"), (fb, "x A B"), (w, "b C C'"), (wb, "y D D'")],
        free,
    )?;
    let mut out = scheme_values(&x1, ctx)?;
    out.extend(scheme_values(&x2, ctx)?);
    out.extend(scheme_values(&x3, ctx)?);
    Ok(out)
}

/// Nine scalars `q W_{AȦ} k_{BḂ} Φ̄_α{}^C{}_D Φ^{αĊ}{}_Ḋ` under the δ⊗ε
/// pairings of the regular and dotted slots.
pub fn eval_threeleg<T: GradedScalar>(
    c: &Covectors<T>,
    p: &ExtendedHiggs<T>,
    q: f64,
    ctx: &PairingContext,
) -> Result<Vec<T>, TensorError> {
    let t = ein(
        &[(&c.w, "A A'"), (&c.k, "B B'"), (&p.phibar, "a C D"), (&p.phi, "a C' D'")],
        "A B C D A' B' C' D'",
    )?
    .scale(C::new(q, 0.0));
    scheme_values(&t, ctx)
}

#[cfg(test)]
mod tests {
    use super::super::fields::*;
    use super::*;
    use crate::algebra::{near_zero, GeneratorPool, Grassmann};
    use crate::tensor::sampling::stream_rng;
    use crate::tensor::Statistics;

    fn omega(seed: u64, stats: Statistics) -> OmegaFields {
        sample_omega(&mut stream_rng(seed, 3, 0), &mut GeneratorPool::new(), stats).unwrap()
    }

    fn rel(vals: &[Grassmann], coeffs: &[f64]) -> f64 {
        let mut sum = Grassmann::zero();
        let mut scale = 0.0;
        for (v, &c) in vals.iter().zip(coeffs) {
            sum = sum.add_ref(&v.scale(C::new(c, 0.0)));
            scale += c.abs() * v.max_abs();
        }
        sum.max_abs() / scale
    }

    #[test]
    fn gauge_identities() {
        let f = sample_gauge_higgs(&mut stream_rng(4, 1, 0)).unwrap();
        let i = eval_i(&f).unwrap();
        assert!(rel(&i, &[2.0, -2.0, 1.0, -1.0]) < 1e-12);
        let j = eval_j(&f, C::new(1.0, 0.0)).unwrap();
        assert!(rel(&j, &[1.0, -2.0, 2.0]) < 1e-12);
        let jr = eval_j(&f, C::from_polar(1.0, 1.1)).unwrap();
        for (a, b) in j.iter().zip(&jr) {
            assert!(near_zero(&(a.clone() - b.clone()), a.max_abs(), 1e-13));
        }
        // cross relations that make the joined family larger
        assert!(rel(&[j[0].clone(), i[2].clone(), i[3].clone()], &[1.0, -1.0, 1.0]) < 1e-12);
    }

    #[test]
    fn omega_identities_per_statistics() {
        for (stats, s) in [(Statistics::Bosonic, -1.0), (Statistics::Fermionic, 1.0)] {
            let o = omega(6, stats);
            let v = eval_s(&o, 1.3, C::new(1.0, 0.0)).unwrap();
            assert!(rel(&v, &[1.0, 0.0, s, -1.0, 0.0, 0.0]) < 1e-12, "{stats:?}");
            assert!(rel(&[v[5].clone(), v[3].clone()], &[1.0, -s]) < 1e-12);
            let h = sample_higgs(&mut stream_rng(6, 4, 0)).unwrap();
            let sp = eval_sprime(&o, &h, 1.3, C::new(1.0, 0.0)).unwrap();
            assert!(rel(&sp, &[-1.0, 1.0, 1.0, 0.0, 0.0]) < 1e-12);
            assert!(rel(&sp[3..], &[1.0, -1.0]) < 1e-12);
        }
        let b = eval_s(&omega(7, Statistics::Bosonic), 1.3, C::new(1.0, 0.0)).unwrap();
        let mag = eval_s(&omega(7, Statistics::Bosonic).magnitude(), 1.3, C::new(1.0, 0.0)).unwrap();
        assert!(b[4].max_abs() < 1e-12 * mag[4].0);
        let f = eval_s(&omega(7, Statistics::Fermionic), 1.3, C::new(1.0, 0.0)).unwrap();
        assert!(rel(&f, &[0.0, 2.0, 0.0, 0.0, -1.0, 0.0]) < 1e-12);
        assert!(f[4].max_abs() > 1e-3);
    }

    #[test]
    fn eighteen_family_sums() {
        let ctx = PairingContext::default();
        for stats in [Statistics::Bosonic, Statistics::Fermionic] {
            let v = eval_t18(&omega(8, stats), &ctx).unwrap();
            assert_eq!(v.len(), 18);
            assert!(rel(&v[..9], &[1.0; 9]) < 1e-12);
            assert!(rel(&v[9..], &[1.0; 9]) < 1e-12);
        }
    }

    #[test]
    fn phi4_routes() {
        let p = sample_extended_higgs(&mut stream_rng(9, 2, 0)).unwrap();
        let v = eval_phi4(&p, &PairingContext::with_phases(C::from_polar(1.0, 0.4), C::from_polar(1.0, -0.8))).unwrap();
        assert!(rel(&v, &[-1.0, 1.0, 0.0, 0.0, 1.0]) < 1e-12);
        assert!(rel(&v, &[-1.0, 0.0, 1.0, 0.0, 0.0, 1.0]) < 1e-12);
        assert!(rel(&v, &[-1.0, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0]) < 1e-12);
        for z in &v[7..11] {
            assert!(z.max_abs() < 1e-12 * v[0].max_abs());
        }
        assert!((v[2].body() - v[1].body().conj()).norm() < 1e-12 * v[2].max_abs());
        assert!(v[0].body().im.abs() < 1e-12 * v[0].max_abs());
    }

    #[test]
    fn phi4_reduces_to_higgs_quartic() {
        let h = sample_higgs(&mut stream_rng(2, 2, 0)).unwrap();
        let (iso, dt, sp) = (Species::Isospin, Species::SpinorDotted, Species::Spinor);
        use crate::tensor::Slot;
        let id = |i: &[usize]| if i[1] == i[2] { 1.0 } else { 0.0 };
        let phi = Tensor::from_fn(vec![Slot::up(iso), Slot::up(dt), Slot::down(dt)], |i| h.phi.get(&i[..1]).scale(C::new(id(i), 0.0))).unwrap();
        let phibar = Tensor::from_fn(vec![Slot::down(iso), Slot::up(sp), Slot::down(sp)], |i| h.phibar.get(&i[..1]).scale(C::new(id(i), 0.0))).unwrap();
        let v = eval_phi4(&ExtendedHiggs { phi, phibar }, &PairingContext::default()).unwrap();
        let n2: f64 = h.phi.data().iter().map(|x| x.body().norm_sqr()).sum();
        assert!((v[0].body() - C::new(16.0 * n2 * n2, 0.0)).norm() < 1e-12 * v[0].max_abs());
    }

    #[test]
    fn mixed_epsilon_route() {
        let ctx = PairingContext::default();
        let p = sample_extended_higgs(&mut stream_rng(3, 2, 0)).unwrap();
        for stats in [Statistics::Bosonic, Statistics::Fermionic] {
            let v = eval_mixed(&p, &omega(5, stats), &ctx).unwrap();
            assert_eq!(v.len(), 27);
            for k in 0..9 {
                assert!(rel(&[v[k].clone(), v[9 + k].clone(), v[18 + k].clone()], &[1.0, -1.0, -1.0]) < 1e-12);
            }
        }
    }

    #[test]
    fn threeleg_is_linear_and_vanishes_without_momentum() {
        let ctx = PairingContext::default();
        let mut r = stream_rng(1, 2, 0);
        let c = sample_covectors(&mut r).unwrap();
        let p = sample_extended_higgs(&mut r).unwrap();
        let v = eval_threeleg(&c, &p, 0.65, &ctx).unwrap();
        let p2 = ExtendedHiggs { phi: p.phi.scale(C::new(0.0, 2.0)), phibar: p.phibar.clone() };
        let v2 = eval_threeleg(&c, &p2, 0.65, &ctx).unwrap();
        for (a, b) in v.iter().zip(&v2) {
            assert!((a.body() * C::new(0.0, 2.0) - b.body()).norm() < 1e-12 * b.max_abs().max(1.0));
        }
        let zero = Covectors { w: c.w.clone(), k: c.k.scale(C::new(0.0, 0.0)) };
        assert!(eval_threeleg(&zero, &p, 0.65, &ctx).unwrap().iter().all(|x| x.max_abs() == 0.0));
    }
}
