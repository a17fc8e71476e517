//! Random field samples and the fixed pairing tensors (metric, symplectic
//! forms, Pauli frame).

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{GeneratorPool, GradedScalar, Grassmann, Magnitude};
use crate::spinor::pauli;
use crate::tensor::einsum::{einsum, Label};
use crate::tensor::sampling::{complex_gaussian, real_gaussian, sample_random_with};
use crate::tensor::{Slot, Species, Statistics, Tensor, TensorError};

type C = Complex64;

const E: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Labels from whitespace-separated tokens; a trailing `'` marks a
/// distinct (dotted) label.
pub fn labels(s: &str) -> Vec<Label> {
    s.split_whitespace().map(label_id).collect()
}

pub fn label_id(tok: &str) -> Label {
    let c = tok.chars().next().expect("non-empty token") as Label;
    if tok.ends_with('\'') {
        c + 0x1_0000
    } else {
        c
    }
}

pub(crate) fn ein<T: GradedScalar>(factors: &[(&Tensor<T>, &str)], free: &str) -> Result<Tensor<T>, TensorError> {
    let ts: Vec<&Tensor<T>> = factors.iter().map(|f| f.0).collect();
    let ls: Vec<Vec<Label>> = factors.iter().map(|f| labels(f.1)).collect();
    einsum(&ts, &ls, &labels(free))
}

pub(crate) fn ein_scalar<T: GradedScalar>(factors: &[(&Tensor<T>, &str)]) -> Result<T, TensorError> {
    Ok(ein(factors, "")?.value().clone())
}

fn up(s: Species) -> Slot {
    Slot::up(s)
}

fn down(s: Species) -> Slot {
    Slot::down(s)
}

/// `g^{λμ}`.
pub fn metric_up<T: GradedScalar>() -> Tensor<T> {
    Tensor::from_fn(vec![up(Species::Spacetime); 2], |i| {
        T::from_complex(C::new(if i[0] == i[1] { ETA[i[0]] } else { 0.0 }, 0.0))
    })
    .expect("even entries")
}

fn eps_with<T: GradedScalar>(species: Species, slot: Slot, phase: C) -> Tensor<T> {
    let _ = species;
    Tensor::from_fn(vec![slot; 2], |i| T::from_complex(phase * E[i[0]][i[1]])).expect("even entries")
}

/// Lower symplectic form on `species`, fixed by the phase of its undotted
/// (or isospin) lower components.
pub fn eps_down<T: GradedScalar>(species: Species, phase: C) -> Tensor<T> {
    let p = if species == Species::SpinorDotted { phase.conj() } else { phase };
    eps_with(species, down(species), p)
}

pub fn eps_up<T: GradedScalar>(species: Species, phase: C) -> Tensor<T> {
    let p = if species == Species::SpinorDotted { phase } else { phase.conj() };
    eps_with(species, up(species), p)
}

/// `τ_λ^{AȦ} = σ_λ/√2` as `[spacetime↓, spinor↑, dotted↑]`.
pub fn pauli_frame<T: GradedScalar>() -> Tensor<T> {
    let s = pauli();
    Tensor::from_fn(
        vec![down(Species::Spacetime), up(Species::Spinor), up(Species::SpinorDotted)],
        |i| T::from_complex(s[i[0]][i[1]][i[2]] * std::f64::consts::FRAC_1_SQRT_2),
    )
    .expect("even entries")
}

/// Dual frame `τ^λ_{AȦ} = σ̄_λ/√2` as `[spacetime↑, spinor↓, dotted↓]`.
pub fn pauli_coframe<T: GradedScalar>() -> Tensor<T> {
    let s = pauli();
    Tensor::from_fn(
        vec![up(Species::Spacetime), down(Species::Spinor), down(Species::SpinorDotted)],
        |i| T::from_complex(s[i[0]][i[1]][i[2]].conj() * std::f64::consts::FRAC_1_SQRT_2),
    )
    .expect("even entries")
}

pub fn magnitude(t: &Tensor) -> Tensor<Magnitude> {
    t.map(Magnitude::of).expect("magnitudes are even")
}

fn conj_tensor(t: &Tensor, slots: Vec<Slot>, index: impl Fn(&[usize]) -> Vec<usize>) -> Result<Tensor, TensorError> {
    Tensor::from_fn(slots, |i| t.get(&index(i)).conjugate())
}

/// `W_λ{}^α{}_β` (unconstrained), `φ^α` and `φ̄_α = conj φ^α`.
#[derive(Debug, Clone)]
pub struct GaugeHiggs<T: GradedScalar = Grassmann> {
    pub w: Tensor<T>,
    pub phi: Tensor<T>,
    pub phibar: Tensor<T>,
}

pub fn sample_gauge_higgs<R: Rng + ?Sized>(rng: &mut R) -> Result<GaugeHiggs, TensorError> {
    let iso = Species::Isospin;
    let mut pool = GeneratorPool::new();
    let w = sample_random_with(
        vec![down(Species::Spacetime), up(iso), down(iso)],
        Statistics::Bosonic,
        rng,
        &mut pool,
    )?;
    let (phi, phibar) = sample_doublet(rng)?;
    Ok(GaugeHiggs { w, phi, phibar })
}

fn sample_doublet<R: Rng + ?Sized>(rng: &mut R) -> Result<(Tensor, Tensor), TensorError> {
    let iso = Species::Isospin;
    let phi = Tensor::from_fn(vec![up(iso)], |_| Grassmann::scalar(complex_gaussian(rng)))?;
    let phibar = conj_tensor(&phi, vec![down(iso)], |i| i.to_vec())?;
    Ok((phi, phibar))
}

impl GaugeHiggs {
    pub fn magnitude(&self) -> GaugeHiggs<Magnitude> {
        GaugeHiggs {
            w: magnitude(&self.w),
            phi: magnitude(&self.phi),
            phibar: magnitude(&self.phibar),
        }
    }
}

/// `Ω^α_{AȦ}`, `Ω̄_{αAȦ}` and their spacetime forms `Ω^α_λ`, `Ω̄_{αλ}`.
#[derive(Debug, Clone)]
pub struct OmegaFields<T: GradedScalar = Grassmann> {
    pub omega: Tensor<T>,
    pub omegabar: Tensor<T>,
    pub omega_st: Tensor<T>,
    pub omegabar_st: Tensor<T>,
}

/// Fermionic samples attach one fresh generator to each of the eight
/// components of `Ω`; `Ω̄` reuses them through conjugation.
pub fn sample_omega<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &mut GeneratorPool,
    stats: Statistics,
) -> Result<OmegaFields, TensorError> {
    let (iso, sp, dt) = (Species::Isospin, Species::Spinor, Species::SpinorDotted);
    let omega = sample_random_with(vec![up(iso), down(sp), down(dt)], stats, rng, pool)?;
    // conj(Ω^α_{AȦ}) = Ω̄_{αȦA}; stored with the undotted slot first
    let omegabar = conj_tensor(&omega, vec![down(iso), down(sp), down(dt)], |i| vec![i[0], i[2], i[1]])?;
    omega_fields(omega, omegabar)
}

pub fn omega_fields<T: GradedScalar>(omega: Tensor<T>, omegabar: Tensor<T>) -> Result<OmegaFields<T>, TensorError> {
    let tau = pauli_frame::<T>();
    let omega_st = ein(&[(&omega, "a A A'"), (&tau, "l A A'")], "a l")?;
    let omegabar_st = ein(&[(&omegabar, "a A A'"), (&tau, "l A A'")], "a l")?;
    Ok(OmegaFields {
        omega,
        omegabar,
        omega_st,
        omegabar_st,
    })
}

impl OmegaFields {
    pub fn magnitude(&self) -> OmegaFields<Magnitude> {
        OmegaFields {
            omega: magnitude(&self.omega),
            omegabar: magnitude(&self.omegabar),
            omega_st: magnitude(&self.omega_st),
            omegabar_st: magnitude(&self.omegabar_st),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HiggsDoublet<T: GradedScalar = Grassmann> {
    pub phi: Tensor<T>,
    pub phibar: Tensor<T>,
}

pub fn sample_higgs<R: Rng + ?Sized>(rng: &mut R) -> Result<HiggsDoublet, TensorError> {
    let (phi, phibar) = sample_doublet(rng)?;
    Ok(HiggsDoublet { phi, phibar })
}

impl HiggsDoublet {
    pub fn magnitude(&self) -> HiggsDoublet<Magnitude> {
        HiggsDoublet {
            phi: magnitude(&self.phi),
            phibar: magnitude(&self.phibar),
        }
    }
}

/// Extended Higgs `Φ^{αȦ}{}_Ḃ` and `Φ̄_α{}^A{}_B = conj Φ`; always even.
#[derive(Debug, Clone)]
pub struct ExtendedHiggs<T: GradedScalar = Grassmann> {
    pub phi: Tensor<T>,
    pub phibar: Tensor<T>,
}

pub fn sample_extended_higgs<R: Rng + ?Sized>(rng: &mut R) -> Result<ExtendedHiggs, TensorError> {
    let (iso, sp, dt) = (Species::Isospin, Species::Spinor, Species::SpinorDotted);
    let phi = Tensor::from_fn(vec![up(iso), up(dt), down(dt)], |_| Grassmann::scalar(complex_gaussian(rng)))?;
    let phibar = conj_tensor(&phi, vec![down(iso), up(sp), down(sp)], |i| i.to_vec())?;
    Ok(ExtendedHiggs { phi, phibar })
}

impl ExtendedHiggs {
    pub fn magnitude(&self) -> ExtendedHiggs<Magnitude> {
        ExtendedHiggs {
            phi: magnitude(&self.phi),
            phibar: magnitude(&self.phibar),
        }
    }
}

/// A real gauge covector `W_λ` and momentum `k_λ`, mapped to `W_{AȦ}`,
/// `k_{AȦ}` through the Pauli coframe.
#[derive(Debug, Clone)]
pub struct Covectors<T: GradedScalar = Grassmann> {
    pub w: Tensor<T>,
    pub k: Tensor<T>,
}

pub fn sample_covectors<R: Rng + ?Sized>(rng: &mut R) -> Result<Covectors, TensorError> {
    let st = vec![down(Species::Spacetime)];
    let w = Tensor::from_fn(st.clone(), |_| Grassmann::real(real_gaussian(rng)))?;
    let k = Tensor::from_fn(st, |_| Grassmann::real(real_gaussian(rng)))?;
    covectors_from_spacetime(&w, &k)
}

pub fn covectors_from_spacetime(w: &Tensor, k: &Tensor) -> Result<Covectors, TensorError> {
    let co = pauli_coframe::<Grassmann>();
    Ok(Covectors {
        w: ein(&[(w, "l"), (&co, "l A A'")], "A A'")?,
        k: ein(&[(k, "l"), (&co, "l A A'")], "A A'")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sampling::stream_rng;

    #[test]
    fn frame_and_coframe_are_dual() {
        let t = pauli_frame::<C>();
        let co = pauli_coframe::<C>();
        let d = ein(&[(&t, "l A A'"), (&co, "m A A'")], "l m").unwrap();
        for l in 0..4 {
            for m in 0..4 {
                let want = if l == m { 1.0 } else { 0.0 };
                assert!((d.get(&[l, m]) - C::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn omega_conjugation_pattern() {
        let mut r = stream_rng(1, 9, 0);
        let mut pool = GeneratorPool::new();
        let o = sample_omega(&mut r, &mut pool, Statistics::Fermionic).unwrap();
        assert_eq!(pool.count(), 8);
        assert_eq!(o.omegabar.get(&[1, 0, 1]), &o.omega.get(&[1, 1, 0]).conjugate());
        let b = sample_omega(&mut r, &mut GeneratorPool::new(), Statistics::Bosonic).unwrap();
        // Ω̄_λ is the conjugate of Ω_λ for even samples
        for a in 0..2 {
            for l in 0..4 {
                let x = b.omega_st.get(&[a, l]).body();
                let y = b.omegabar_st.get(&[a, l]).body();
                assert!((x.conj() - y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn eps_phase_product_invariant() {
        let ph = C::from_polar(1.0, 0.9);
        for s in [Species::Isospin, Species::Spinor, Species::SpinorDotted] {
            let a = eps_up::<C>(s, ph);
            let b = eps_down::<C>(s, ph);
            let p = ein(&[(&a, "a b"), (&b, "b c")], "a c").unwrap();
            // ε^{ab} ε_{bc} = −δ^a_c
            assert!((p.get(&[0, 0]) + C::new(1.0, 0.0)).norm() < 1e-15);
            assert!(p.get(&[0, 1]).norm() < 1e-15);
        }
    }
}
