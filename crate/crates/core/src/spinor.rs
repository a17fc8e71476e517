//! Two-spinor geometry: symplectic forms, the Lorentz metric on Hermitian
//! tensors, the Clifford map on Dirac spinors, Dirac adjunction, unit
//! timelike vectors from spinors, mass-shell projectors, the QED vertex and
//! the curvature-like tensor of a gauge field.
//!
//! Index conventions: `ε_{01} = phase`, `ε^{01} = conj(phase)`, lowering
//! `u_B = u^A ε_{AB}`, raising `λ^A = ε^{AB} λ_B`, so raising undoes lowering.
//! Hermitian tensors are stored as `y^{AȦ}`; the Pauli frame is
//! `τ_λ = σ_λ / √2`.

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex64;
use thiserror::Error;

pub type C = Complex64;
pub type Spinor = [C; 2];
pub type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Off-shell tolerance relative to `m²`.
pub const MASS_SHELL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error("ε phase must have unit modulus, got |phase| = {0}")]
    InvalidPhase(f64),
    #[error("⟨λ,u⟩ = {0} is too small for a timelike unit vector")]
    Singular(f64),
    #[error("momentum off shell: g(p♯,p♯) − m² = {defect}")]
    OffShell { defect: f64 },
    #[error("momentum is not future pointing")]
    NotFuture,
    #[error("mass must be positive, got {0}")]
    InvalidMass(f64),
    #[error("structure constants must be antisymmetric in the lower indices")]
    StructureConstants,
    #[error("gauge field has {got} components but the structure constants expect {expected}")]
    GaugeShape { expected: usize, got: usize },
}

/// The four Pauli matrices `σ_0 = 1, σ_1, σ_2, σ_3`.
pub fn pauli() -> [Mat2; 4] {
    [
        [[ONE, ZERO], [ZERO, ONE]],
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A normalized symplectic form on the two-spinor space, fixed by its phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonForm {
    phase: C,
}

impl Default for EpsilonForm {
    fn default() -> Self {
        EpsilonForm { phase: ONE }
    }
}

fn eps_matrix(p: C) -> Mat2 {
    [[ZERO, p], [-p, ZERO]]
}

impl EpsilonForm {
    pub fn new(phase: C) -> Result<Self, SpinorError> {
        if (phase.norm() - 1.0).abs() > 1e-12 {
            return Err(SpinorError::InvalidPhase(phase.norm()));
        }
        Ok(EpsilonForm { phase })
    }

    pub fn with_angle(theta: f64) -> Self {
        EpsilonForm {
            phase: C::from_polar(1.0, theta),
        }
    }

    pub fn phase(&self) -> C {
        self.phase
    }

    /// `ε_{AB}`.
    pub fn lower(&self) -> Mat2 {
        eps_matrix(self.phase)
    }

    /// `ε^{AB}`.
    pub fn upper(&self) -> Mat2 {
        eps_matrix(self.phase.conj())
    }

    /// `ε̄_{ȦḂ}`.
    pub fn dotted_lower(&self) -> Mat2 {
        eps_matrix(self.phase.conj())
    }

    /// `ε̄^{ȦḂ}`.
    pub fn dotted_upper(&self) -> Mat2 {
        eps_matrix(self.phase)
    }

    /// `ε(u, v) = ε_{AB} u^A v^B`.
    pub fn pair(&self, u: &Spinor, v: &Spinor) -> C {
        bilinear(&self.lower(), u, v)
    }

    /// `u_B = u^A ε_{AB}`.
    pub fn flat(&self, u: &Spinor) -> Spinor {
        let e = self.lower();
        [u[0] * e[0][0] + u[1] * e[1][0], u[0] * e[0][1] + u[1] * e[1][1]]
    }

    /// `λ^A = ε^{AB} λ_B`.
    pub fn sharp(&self, l: &Spinor) -> Spinor {
        let e = self.upper();
        [e[0][0] * l[0] + e[0][1] * l[1], e[1][0] * l[0] + e[1][1] * l[1]]
    }

    pub fn dotted_flat(&self, s: &Spinor) -> Spinor {
        let e = self.dotted_lower();
        [s[0] * e[0][0] + s[1] * e[1][0], s[0] * e[0][1] + s[1] * e[1][1]]
    }

    pub fn dotted_sharp(&self, l: &Spinor) -> Spinor {
        let e = self.dotted_upper();
        [e[0][0] * l[0] + e[0][1] * l[1], e[1][0] * l[0] + e[1][1] * l[1]]
    }
}

fn bilinear(m: &Mat2, u: &Spinor, v: &Spinor) -> C {
    let mut s = ZERO;
    for a in 0..2 {
        for b in 0..2 {
            s += m[a][b] * u[a] * v[b];
        }
    }
    s
}

/// Natural pairing of a covector and a vector: `λ_A u^A`.
pub fn contract(l: &Spinor, u: &Spinor) -> C {
    l[0] * u[0] + l[1] * u[1]
}

pub fn conj2(s: &Spinor) -> Spinor {
    [s[0].conj(), s[1].conj()]
}

/// Element `y^{AȦ}` of `U⊗Ū`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HVector {
    pub m: Mat2,
}

impl HVector {
    pub fn zero() -> Self {
        HVector { m: [[ZERO; 2]; 2] }
    }

    /// `r⊗s̄`.
    pub fn simple(r: &Spinor, s_bar: &Spinor) -> Self {
        HVector {
            m: [[r[0] * s_bar[0], r[0] * s_bar[1]], [r[1] * s_bar[0], r[1] * s_bar[1]]],
        }
    }

    /// `u⊗ū`.
    pub fn null(u: &Spinor) -> Self {
        HVector::simple(u, &conj2(u))
    }

    pub fn pauli_frame() -> [HVector; 4] {
        pauli().map(|s| HVector {
            m: s.map(|row| row.map(|x| x / SQRT2)),
        })
    }

    /// `Σ x^λ τ_λ`.
    pub fn from_components(x: &[C; 4]) -> Self {
        let frame = HVector::pauli_frame();
        let mut out = HVector::zero();
        for (k, f) in frame.iter().enumerate() {
            out = out.add(&f.scale(x[k]));
        }
        out
    }

    pub fn from_real_components(x: &[f64; 4]) -> Self {
        HVector::from_components(&x.map(|v| C::new(v, 0.0)))
    }

    /// Components `x^λ` in the Pauli frame (dual frame `τ^λ = σ̄_λ/√2`).
    pub fn components(&self) -> [C; 4] {
        let s = pauli();
        let mut x = [ZERO; 4];
        for l in 0..4 {
            for a in 0..2 {
                for b in 0..2 {
                    x[l] += s[l][a][b].conj() * self.m[a][b] / SQRT2;
                }
            }
        }
        x
    }

    /// `g(x,·)` components `x_λ = η_{λμ} x^μ`.
    pub fn lowered_components(&self) -> [C; 4] {
        let x = self.components();
        [x[0] * ETA[0], x[1] * ETA[1], x[2] * ETA[2], x[3] * ETA[3]]
    }

    pub fn from_covector(p: &[C; 4]) -> Self {
        HVector::from_components(&[p[0] * ETA[0], p[1] * ETA[1], p[2] * ETA[2], p[3] * ETA[3]])
    }

    pub fn add(&self, o: &HVector) -> HVector {
        let mut m = self.m;
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += o.m[a][b];
            }
        }
        HVector { m }
    }

    pub fn scale(&self, c: C) -> HVector {
        HVector {
            m: self.m.map(|r| r.map(|x| x * c)),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..2).all(|a| (0..2).all(|b| (self.m[a][b] - self.m[b][a].conj()).norm() <= tol))
    }

    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `g(x,y) = ε_{AB} ε̄_{ȦḂ} x^{AȦ} y^{BḂ}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LorentzMetric {
    pub eps: EpsilonForm,
}

pub fn lorentz_metric(eps: EpsilonForm) -> LorentzMetric {
    LorentzMetric { eps }
}

impl LorentzMetric {
    pub fn g(&self, x: &HVector, y: &HVector) -> C {
        let e = self.eps.lower();
        let eb = self.eps.dotted_lower();
        let mut s = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                if e[a][b] == ZERO {
                    continue;
                }
                for ad in 0..2 {
                    for bd in 0..2 {
                        s += e[a][b] * eb[ad][bd] * x.m[a][ad] * y.m[b][bd];
                    }
                }
            }
        }
        s
    }

    pub fn gram(&self) -> [[C; 4]; 4] {
        let f = HVector::pauli_frame();
        let mut out = [[ZERO; 4]; 4];
        for l in 0..4 {
            for m in 0..4 {
                out[l][m] = self.g(&f[l], &f[m]);
            }
        }
        out
    }
}

/// Element `(u^A, χ_Ȧ)` of `U ⊕ Ū*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSpinor {
    pub u: Spinor,
    pub lambda_bar: Spinor,
}

impl DiracSpinor {
    pub fn new(u: Spinor, lambda_bar: Spinor) -> Self {
        DiracSpinor { u, lambda_bar }
    }

    pub fn to_vector(&self) -> Vector4<C> {
        Vector4::new(self.u[0], self.u[1], self.lambda_bar[0], self.lambda_bar[1])
    }

    pub fn from_vector(v: &Vector4<C>) -> Self {
        DiracSpinor {
            u: [v[0], v[1]],
            lambda_bar: [v[2], v[3]],
        }
    }

    /// `λ_A`, the conjugate of the dotted component.
    pub fn lambda(&self) -> Spinor {
        conj2(&self.lambda_bar)
    }

    /// `⟨λ, u⟩ = λ_A u^A`.
    pub fn lambda_u(&self) -> C {
        contract(&self.lambda(), &self.u)
    }
}

/// Element `(a_A, b^Ȧ)` of the dual `U* ⊕ Ū`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracCovector {
    pub a: Spinor,
    pub b: Spinor,
}

impl DiracCovector {
    pub fn pair(&self, psi: &DiracSpinor) -> C {
        contract(&self.a, &psi.u) + contract(&self.b, &psi.lambda_bar)
    }

    /// Inverse adjunction under the canonical identification.
    pub fn adjoint(&self) -> DiracSpinor {
        DiracSpinor {
            u: conj2(&self.b),
            lambda_bar: conj2(&self.a),
        }
    }
}

/// `(u, χ) ↦ (χ̄, ū)`.
pub fn dirac_adjoint(psi: &DiracSpinor) -> DiracCovector {
    DiracCovector {
        a: conj2(&psi.lambda_bar),
        b: conj2(&psi.u),
    }
}

/// Matrix `H` with `⟨ψ̄, ψ′⟩ = ψ† H ψ′`.
pub fn dirac_form_matrix() -> Matrix4<C> {
    let mut h = Matrix4::zeros();
    for k in 0..2 {
        h[(k, k + 2)] = ONE;
        h[(k + 2, k)] = ONE;
    }
    h
}

/// Numbers of positive and negative eigenvalues of the Dirac form.
pub fn dirac_signature() -> (usize, usize) {
    let ev = dirac_form_matrix().symmetric_eigen().eigenvalues;
    let pos = ev.iter().filter(|&&x| x > 1e-12).count();
    let neg = ev.iter().filter(|&&x| x < -1e-12).count();
    (pos, neg)
}

/// Clifford map `γ(r⊗s̄)(u,χ) = √2(⟨χ,s̄⟩ r, ⟨r♭,u⟩ s̄♭)`, extended linearly,
/// as a matrix on `(u⁰, u¹, χ₀, χ₁)`.
pub fn gamma(y: &HVector, eps: &EpsilonForm) -> Matrix4<C> {
    let mut g = Matrix4::zeros();
    let e = eps.lower();
    let eb = eps.dotted_lower();
    for a in 0..2 {
        for ad in 0..2 {
            g[(a, 2 + ad)] = y.m[a][ad] * SQRT2;
        }
    }
    // χ′_Ḃ = √2 ε̄_{ȦḂ} y^{AȦ} ε_{AB} u^B
    for bd in 0..2 {
        for b in 0..2 {
            let mut s = ZERO;
            for a in 0..2 {
                for ad in 0..2 {
                    s += eb[ad][bd] * y.m[a][ad] * e[a][b];
                }
            }
            g[(2 + bd, b)] = s * SQRT2;
        }
    }
    g
}

pub fn apply(m: &Matrix4<C>, psi: &DiracSpinor) -> DiracSpinor {
    DiracSpinor::from_vector(&(m * psi.to_vector()))
}

/// `τ = (u⊗ū + λ♯⊗λ̄♯) / (√2 |⟨λ,u⟩|)`.
pub fn tau_of(psi: &DiracSpinor, eps: &EpsilonForm) -> Result<HVector, SpinorError> {
    let lu = psi.lambda_u();
    let size = (psi.u[0].norm_sqr() + psi.u[1].norm_sqr()).sqrt()
        * (psi.lambda_bar[0].norm_sqr() + psi.lambda_bar[1].norm_sqr()).sqrt();
    if lu.norm() <= 1e-12 * size.max(f64::MIN_POSITIVE) {
        return Err(SpinorError::Singular(lu.norm()));
    }
    let ls = eps.sharp(&psi.lambda());
    let t = HVector::null(&psi.u).add(&HVector::null(&ls));
    Ok(t.scale(C::new(1.0 / (SQRT2 * lu.norm()), 0.0)))
}

/// Least-squares Hermitian `τ′` with `γ[τ′]ψ = sign·ψ`; returns the solution
/// and the residual norm.
pub fn solve_tau(psi: &DiracSpinor, sign: f64, eps: &EpsilonForm) -> (HVector, f64) {
    let frame = HVector::pauli_frame();
    let cols: Vec<Vector4<C>> = frame.iter().map(|t| gamma(t, eps) * psi.to_vector()).collect();
    let target = psi.to_vector() * C::new(sign, 0.0);
    let a = SMatrix::<f64, 8, 4>::from_fn(|r, c| {
        let z = cols[c][r % 4];
        if r < 4 {
            z.re
        } else {
            z.im
        }
    });
    let rhs = SVector::<f64, 8>::from_fn(|r, _| if r < 4 { target[r].re } else { target[r % 4].im });
    let x = a.svd(true, true).solve(&rhs, 1e-14).unwrap_or_else(|_| SVector::zeros());
    let resid = (a * x - rhs).norm();
    (HVector::from_real_components(&[x[0], x[1], x[2], x[3]]), resid)
}

/// Splits `ψ` into its components in `Ker(γ[p♯] ∓ m)`.
pub fn mass_shell_project(
    psi: &DiracSpinor,
    p: &[f64; 4],
    m: f64,
    eps: &EpsilonForm,
) -> Result<(DiracSpinor, DiracSpinor), SpinorError> {
    let (plus, minus) = mass_shell_projectors(p, m, eps)?;
    Ok((apply(&plus, psi), apply(&minus, psi)))
}

/// `(m ± γ[p♯]) / 2m`.
pub fn mass_shell_projectors(
    p: &[f64; 4],
    m: f64,
    eps: &EpsilonForm,
) -> Result<(Matrix4<C>, Matrix4<C>), SpinorError> {
    if !(m > 0.0) {
        return Err(SpinorError::InvalidMass(m));
    }
    let ps = HVector::from_covector(&p.map(|x| C::new(x, 0.0)));
    let gpp = lorentz_metric(*eps).g(&ps, &ps).re;
    if (gpp - m * m).abs() > MASS_SHELL_TOL * m * m {
        return Err(SpinorError::OffShell { defect: gpp - m * m });
    }
    if p[0] <= 0.0 {
        return Err(SpinorError::NotFuture);
    }
    let g = gamma(&ps, eps);
    let id = Matrix4::<C>::identity() * C::new(m, 0.0);
    let k = C::new(0.5 / m, 0.0);
    Ok(((id + g) * k, (id - g) * k))
}

/// `−e⟨ψ̄, γ[A]ψ′⟩`, where `psi_bar` is the spinor whose adjoint is taken.
pub fn qed_vertex(psi_bar: &DiracSpinor, a: &HVector, psi_prime: &DiracSpinor, e: f64, eps: &EpsilonForm) -> C {
    let g = gamma(a, eps);
    -dirac_adjoint(psi_bar).pair(&apply(&g, psi_prime)) * e
}

/// `u⊗v̄ + μ♯⊗λ̄♯` for `ψ̄` from `(v, μ̄)` and `ψ′ = (u, λ̄)`.
pub fn vertex_current(psi_bar: &DiracSpinor, psi_prime: &DiracSpinor, eps: &EpsilonForm) -> HVector {
    let mu_sharp = eps.sharp(&psi_bar.lambda());
    let lambda_sharp = eps.sharp(&psi_prime.lambda());
    HVector::simple(&psi_prime.u, &conj2(&psi_bar.u)).add(&HVector::simple(&mu_sharp, &conj2(&lambda_sharp)))
}

/// Two-spinor form of the vertex: `−e√2 g(A, u⊗v̄ + μ♯⊗λ̄♯)`.
pub fn qed_vertex_two_spinor(
    psi_bar: &DiracSpinor,
    a: &HVector,
    psi_prime: &DiracSpinor,
    e: f64,
    eps: &EpsilonForm,
) -> C {
    let x = vertex_current(psi_bar, psi_prime, eps);
    -lorentz_metric(*eps).g(a, &x) * (e * SQRT2)
}

/// Local gauge field `α^i_a` with structure constants `c^i_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFieldLocal {
    pub components: Vec<[C; 4]>,
    pub structure: Vec<Vec<Vec<f64>>>,
}

impl GaugeFieldLocal {
    pub fn new(components: Vec<[C; 4]>, structure: Vec<Vec<Vec<f64>>>) -> Result<Self, SpinorError> {
        let n = structure.len();
        if components.len() != n {
            return Err(SpinorError::GaugeShape {
                expected: n,
                got: components.len(),
            });
        }
        for ci in &structure {
            if ci.len() != n || ci.iter().any(|r| r.len() != n) {
                return Err(SpinorError::StructureConstants);
            }
            for j in 0..n {
                for k in 0..n {
                    if ci[j][k] != -ci[k][j] {
                        return Err(SpinorError::StructureConstants);
                    }
                }
            }
        }
        Ok(GaugeFieldLocal { components, structure })
    }

    pub fn abelian(components: Vec<[C; 4]>) -> Self {
        let n = components.len();
        GaugeFieldLocal {
            components,
            structure: vec![vec![vec![0.0; n]; n]; n],
        }
    }

    /// `c^i_{jk} = ε_{ijk}`.
    pub fn su2(components: Vec<[C; 4]>) -> Result<Self, SpinorError> {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[i][j][k] = 1.0;
            c[i][k][j] = -1.0;
        }
        GaugeFieldLocal::new(components, c)
    }

    /// `α → p⊗χ + α`.
    pub fn shifted(&self, p: &[C; 4], chi: &[C]) -> Self {
        let components = self
            .components
            .iter()
            .zip(chi)
            .map(|(a, &x)| [a[0] + p[0] * x, a[1] + p[1] * x, a[2] + p[2] * x, a[3] + p[3] * x])
            .collect();
        GaugeFieldLocal {
            components,
            structure: self.structure.clone(),
        }
    }
}

/// `ρ^i_{ab} = i(p_a α^i_b − p_b α^i_a) + c^i_{jk} α^j_a α^k_b`.
pub fn curvature_like(p: &[C; 4], alpha: &GaugeFieldLocal) -> Vec<[[C; 4]; 4]> {
    let n = alpha.components.len();
    let al = &alpha.components;
    (0..n)
        .map(|i| {
            let mut r = [[ZERO; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    let mut s = I * (p[a] * al[i][b] - p[b] * al[i][a]);
                    for j in 0..n {
                        for k in 0..n {
                            let c = alpha.structure[i][j][k];
                            if c != 0.0 {
                                s += al[j][a] * al[k][b] * c;
                            }
                        }
                    }
                    r[a][b] = s;
                }
            }
            r
        })
        .collect()
}

/// Largest entry of `ρ[p⊗χ + α] − ρ[α]`.
pub fn replacement_residual(p: &[C; 4], alpha: &GaugeFieldLocal, chi: &[C]) -> f64 {
    let before = curvature_like(p, alpha);
    let after = curvature_like(p, &alpha.shifted(p, chi));
    before
        .iter()
        .zip(&after)
        .flat_map(|(x, y)| (0..4).flat_map(move |a| (0..4).map(move |b| (x[a][b] - y[a][b]).norm())))
        .fold(0.0, f64::max)
}
