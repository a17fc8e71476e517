//! Electroweak specialization: isospin frames, the broken frame, Higgs field
//! components and potential, the covariant derivative of the Higgs doublet,
//! vertex extraction and the vacuum splitting of the isospin fiber.

pub mod symbolic;
pub mod vacuum;
pub mod vertices;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use thiserror::Error;

use crate::spinor::{pauli, Mat2, ETA};

pub use vacuum::{vacuum_split, VacuumSplit};
pub use vertices::{extract_vertices, validate_vertices, LagrangianTerm, VertexEntry, VertexTable};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);
const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EwError {
    #[error("Weinberg angle must lie strictly between 0 and π/2, got {0}")]
    Angle(f64),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("unknown Lagrangian term '{0}' (expected higgs-kinetic, higgs-potential or yukawa)")]
    UnknownTerm(String),
    #[error("vacuum map is rank deficient: rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frame matrix is singular")]
    SingularFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EWParams {
    pub q: f64,
    pub theta: f64,
    pub m: f64,
    pub lambda: f64,
}

impl Default for EWParams {
    fn default() -> Self {
        EWParams {
            q: 0.65,
            theta: 0.5,
            m: 1.3,
            lambda: 0.4,
        }
    }
}

impl EWParams {
    pub fn new(q: f64, theta: f64, m: f64, lambda: f64) -> Result<Self, EwError> {
        let p = EWParams { q, theta, m, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EwError> {
        check_angle(self.theta)?;
        for (name, value) in [("q", self.q), ("m", self.m), ("lambda", self.lambda)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(EwError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

fn check_angle(theta: f64) -> Result<(), EwError> {
    if theta > 0.0 && theta < std::f64::consts::FRAC_PI_2 {
        Ok(())
    } else {
        Err(EwError::Angle(theta))
    }
}

/// `ι_μ = σ_μ` in the isospin frame.
pub fn pauli_isospin_frame() -> [Mat2; 4] {
    pauli()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrokenFrame {
    pub e_prime: Mat2,
    pub e_dprime: Mat2,
    pub e_plus: Mat2,
    pub e_minus: Mat2,
}

impl BrokenFrame {
    pub fn elements(&self) -> [Mat2; 4] {
        [self.e_prime, self.e_dprime, self.e_plus, self.e_minus]
    }
}

fn diag(a: f64, b: f64) -> Mat2 {
    [[C::new(a, 0.0), ZERO], [ZERO, C::new(b, 0.0)]]
}

/// Broken frame in the `ξ_a⊗ξ^b` form.
pub fn broken_frame(theta: f64) -> Result<BrokenFrame, EwError> {
    check_angle(theta)?;
    let (s, c) = theta.sin_cos();
    Ok(BrokenFrame {
        e_prime: diag(-2.0 * s, 0.0),
        e_dprime: diag((2.0 * theta).cos() / c, -1.0 / c),
        e_plus: [[ZERO, ZERO], [C::new(SQRT2, 0.0), ZERO]],
        e_minus: [[ZERO, C::new(SQRT2, 0.0)], [ZERO, ZERO]],
    })
}

/// Broken frame as combinations of the `ι_μ`.
pub fn broken_frame_pauli(theta: f64) -> Result<BrokenFrame, EwError> {
    check_angle(theta)?;
    let (s, c) = theta.sin_cos();
    let i = pauli_isospin_frame();
    let comb = |w: [C; 4]| {
        let mut m = [[ZERO; 2]; 2];
        for (k, ik) in i.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += w[k] * ik[a][b];
                }
            }
        }
        m
    };
    let r = |x: f64| C::new(x, 0.0);
    let h = 1.0 / SQRT2;
    Ok(BrokenFrame {
        e_prime: comb([r(-s), ZERO, ZERO, r(-s)]),
        e_dprime: comb([r(-s * s / c), ZERO, ZERO, r(c)]),
        e_plus: comb([ZERO, r(h), -I * h, ZERO]),
        e_minus: comb([ZERO, r(h), I * h, ZERO]),
    })
}

/// Field values with every component independent (complex), as needed for
/// polynomial expansion; physical configurations come from [`EWFieldSet`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldPoint {
    pub h: C,
    pub phi0: C,
    pub phi_plus: C,
    pub phi_minus: C,
    pub a: [C; 4],
    pub z: [C; 4],
    pub w_plus: [C; 4],
    pub w_minus: [C; 4],
}

/// Physical broken-frame fields: `H`, `φ₀`, `A`, `Z` real, `φ₋ = conj φ₊`,
/// `W⁻ = conj W⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EWFieldSet {
    pub h: f64,
    pub phi0: f64,
    pub phi_plus: C,
    pub a: [f64; 4],
    pub z: [f64; 4],
    pub w_plus: [C; 4],
}

impl EWFieldSet {
    pub fn point(&self) -> FieldPoint {
        let r = |v: [f64; 4]| v.map(|x| C::new(x, 0.0));
        FieldPoint {
            h: C::new(self.h, 0.0),
            phi0: C::new(self.phi0, 0.0),
            phi_plus: self.phi_plus,
            phi_minus: self.phi_plus.conj(),
            a: r(self.a),
            z: r(self.z),
            w_plus: self.w_plus,
            w_minus: self.w_plus.map(|x| x.conj()),
        }
    }
}

/// Momentum covectors `p_λ` of the scalar fluctuations (`∂_λX → i p_λ X`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Momenta {
    pub h: [C; 4],
    pub phi0: [C; 4],
    pub phi_plus: [C; 4],
    pub phi_minus: [C; 4],
}

/// `W_λ = (i/2) q (A_λ e′ + Z_λ e″ + W⁺_λ e⁺ + W⁻_λ e⁻)` for each `λ`.
pub fn recompose_gauge_field(f: &FieldPoint, frame: &BrokenFrame, p: &EWParams) -> [Mat2; 4] {
    let k = I * (0.5 * p.q);
    let e = frame.elements();
    let mut out = [[[ZERO; 2]; 2]; 4];
    for l in 0..4 {
        let coeff = [f.a[l], f.z[l], f.w_plus[l], f.w_minus[l]];
        for (c, ek) in coeff.iter().zip(&e) {
            for a in 0..2 {
                for b in 0..2 {
                    out[l][a][b] += k * c * ek[a][b];
                }
            }
        }
    }
    out
}

/// Inverse of [`recompose_gauge_field`] on the gauge components.
pub fn decompose_gauge_field(w: &[Mat2; 4], frame: &BrokenFrame, p: &EWParams) -> Result<FieldPoint, EwError> {
    let e = frame.elements();
    let k = I * (0.5 * p.q);
    let m = Matrix4::<C>::from_fn(|r, c| e[c][r / 2][r % 2] * k);
    let lu = m.lu();
    let mut out = FieldPoint::default();
    for l in 0..4 {
        let rhs = Vector4::new(w[l][0][0], w[l][0][1], w[l][1][0], w[l][1][1]);
        let x = lu.solve(&rhs).ok_or(EwError::SingularFrame)?;
        out.a[l] = x[0];
        out.z[l] = x[1];
        out.w_plus[l] = x[2];
        out.w_minus[l] = x[3];
    }
    Ok(out)
}

/// `W^μ_λ` with `W_λ = (i/2) q W^μ_λ ι_μ`; indexed `[λ][μ]`.
pub fn pauli_components(w: &[Mat2; 4], p: &EWParams) -> [[C; 4]; 4] {
    let iota = pauli_isospin_frame();
    let mut out = [[ZERO; 4]; 4];
    for l in 0..4 {
        for (mu, im) in iota.iter().enumerate() {
            let mut tr = ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    tr += im[a][b] * w[l][b][a];
                }
            }
            out[l][mu] = tr / (I * p.q);
        }
    }
    out
}

/// `(φ¹, φ²)` and `(φ̄₁, φ̄₂)`; the barred pair uses the independent `φ₋`.
pub fn higgs_field_components(f: &FieldPoint, p: &EWParams) -> ([C; 2], [C; 2]) {
    let m = C::new(p.m, 0.0);
    ([m + f.h + I * f.phi0, f.phi_plus], [m + f.h - I * f.phi0, f.phi_minus])
}

/// `V = λ(2m² s − s²)` with `s = ⟨φ̄,φ⟩`.
pub fn higgs_potential(s: C, p: &EWParams) -> C {
    (s * (2.0 * p.m * p.m) - s * s) * p.lambda
}

pub fn higgs_potential_at(f: &FieldPoint, p: &EWParams) -> C {
    let (phi, phib) = higgs_field_components(f, p);
    higgs_potential(phib[0] * phi[0] + phib[1] * phi[1], p)
}

/// Central finite difference of `V` in `s` at `s = m²`, and the sign of the
/// curvature there (`"maximum"` or `"minimum"`).
pub fn potential_stationarity(p: &EWParams) -> (f64, &'static str) {
    let s0 = p.m * p.m;
    let h = 1e-4 * s0;
    let v = |s: f64| higgs_potential(C::new(s, 0.0), p).re;
    let d1 = (v(s0 + h) - v(s0 - h)) / (2.0 * h);
    let d2 = v(s0 + h) - 2.0 * v(s0) + v(s0 - h);
    (d1, if d2 < 0.0 { "maximum" } else { "minimum" })
}

/// `∇_λφ^α` from the two displayed component formulas, indexed `[λ][α]`.
pub fn higgs_covariant_derivative(f: &FieldPoint, mom: &Momenta, p: &EWParams) -> Result<[[C; 2]; 4], EwError> {
    p.validate()?;
    let (s, c) = p.theta.sin_cos();
    let sec = 1.0 / c;
    let q = p.q;
    let m = C::new(p.m, 0.0);
    let mut out = [[ZERO; 2]; 4];
    for l in 0..4 {
        let dh = I * mom.h[l] * f.h;
        let dphi0 = I * mom.phi0[l] * f.phi0;
        let dphip = I * mom.phi_plus[l] * f.phi_plus;
        let phi1 = m + f.h + I * f.phi0;
        out[l][0] = dh + I * dphi0 - I * (0.5 * q * sec) * phi1 * f.z[l] - I * (q / SQRT2) * f.phi_plus * f.w_minus[l];
        out[l][1] = dphip - I * (s * q) * f.phi_plus * f.a[l]
            + I * (0.5 * sec * (2.0 * p.theta).cos() * q) * f.phi_plus * f.z[l]
            - I * (q / SQRT2) * phi1 * f.w_plus[l];
    }
    Ok(out)
}

/// Conjugates of the displayed formulas, `∇_λφ̄_α`, with the momentum rule
/// applied to the conjugate fields.
pub fn higgs_covariant_derivative_bar(
    f: &FieldPoint,
    mom: &Momenta,
    p: &EWParams,
) -> Result<[[C; 2]; 4], EwError> {
    p.validate()?;
    let (s, c) = p.theta.sin_cos();
    let sec = 1.0 / c;
    let q = p.q;
    let m = C::new(p.m, 0.0);
    let mut out = [[ZERO; 2]; 4];
    for l in 0..4 {
        let dh = I * mom.h[l] * f.h;
        let dphi0 = I * mom.phi0[l] * f.phi0;
        let dphim = I * mom.phi_minus[l] * f.phi_minus;
        let phib1 = m + f.h - I * f.phi0;
        out[l][0] = dh - I * dphi0 + I * (0.5 * q * sec) * phib1 * f.z[l] + I * (q / SQRT2) * f.phi_minus * f.w_plus[l];
        out[l][1] = dphim + I * (s * q) * f.phi_minus * f.a[l]
            - I * (0.5 * sec * (2.0 * p.theta).cos() * q) * f.phi_minus * f.z[l]
            + I * (q / SQRT2) * phib1 * f.w_minus[l];
    }
    Ok(out)
}

fn partials(f: &FieldPoint, mom: &Momenta, l: usize) -> ([C; 2], [C; 2]) {
    let dh = I * mom.h[l] * f.h;
    let dphi0 = I * mom.phi0[l] * f.phi0;
    (
        [dh + I * dphi0, I * mom.phi_plus[l] * f.phi_plus],
        [dh - I * dphi0, I * mom.phi_minus[l] * f.phi_minus],
    )
}

/// Matrix route: `∇_λφ = ∂_λφ − W_λ φ + tr(W_λ) φ` with `W_λ` recomposed from
/// the broken frame.
pub fn covariant_derivative_matrix_route(
    f: &FieldPoint,
    mom: &Momenta,
    p: &EWParams,
) -> Result<[[C; 2]; 4], EwError> {
    let frame = broken_frame(p.theta)?;
    let w = recompose_gauge_field(f, &frame, p);
    let (phi, _) = higgs_field_components(f, p);
    let mut out = [[ZERO; 2]; 4];
    for l in 0..4 {
        let (d, _) = partials(f, mom, l);
        let tr = w[l][0][0] + w[l][1][1];
        for a in 0..2 {
            out[l][a] = d[a] - (w[l][a][0] * phi[0] + w[l][a][1] * phi[1]) + tr * phi[a];
        }
    }
    Ok(out)
}

/// Matrix route for the conjugate: `∇_λφ̄ = ∂_λφ̄ + φ̄ W_λ − tr(W_λ) φ̄`.
pub fn covariant_derivative_bar_matrix_route(
    f: &FieldPoint,
    mom: &Momenta,
    p: &EWParams,
) -> Result<[[C; 2]; 4], EwError> {
    let frame = broken_frame(p.theta)?;
    let w = recompose_gauge_field(f, &frame, p);
    let (_, phib) = higgs_field_components(f, p);
    let mut out = [[ZERO; 2]; 4];
    for l in 0..4 {
        let (_, d) = partials(f, mom, l);
        let tr = w[l][0][0] + w[l][1][1];
        for a in 0..2 {
            out[l][a] = d[a] + (phib[0] * w[l][0][a] + phib[1] * w[l][1][a]) - tr * phib[a];
        }
    }
    Ok(out)
}

/// `g^{λμ} ∇_λφ̄_α ∇_μφ^α` through the matrix route.
pub fn higgs_kinetic_density(f: &FieldPoint, mom: &Momenta, p: &EWParams) -> Result<C, EwError> {
    let d = covariant_derivative_matrix_route(f, mom, p)?;
    let db = covariant_derivative_bar_matrix_route(f, mom, p)?;
    let mut s = ZERO;
    for l in 0..4 {
        s += (db[l][0] * d[l][0] + db[l][1] * d[l][1]) * ETA[l];
    }
    Ok(s)
}

fn rnd4<R: rand::Rng + ?Sized>(r: &mut R) -> [C; 4] {
    [0; 4].map(|_: i32| crate::tensor::sampling::complex_gaussian(r))
}

/// Independent complex Gaussian values for every field and momentum.
pub fn random_point<R: rand::Rng + ?Sized>(r: &mut R) -> (FieldPoint, Momenta) {
    let mut c = || crate::tensor::sampling::complex_gaussian(r);
    let (h, phi0, phi_plus, phi_minus) = (c(), c(), c(), c());
    let f = FieldPoint {
        h,
        phi0,
        phi_plus,
        phi_minus,
        a: rnd4(r),
        z: rnd4(r),
        w_plus: rnd4(r),
        w_minus: rnd4(r),
    };
    let m = Momenta {
        h: rnd4(r),
        phi0: rnd4(r),
        phi_plus: rnd4(r),
        phi_minus: rnd4(r),
    };
    (f, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sampling::{complex_gaussian, real_gaussian, stream_rng};

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
    }

    #[test]
    fn pauli_frame_algebra() {
        let i = pauli_isospin_frame();
        assert!(close(&i[0], &diag(1.0, 1.0), 0.0));
        let mut comm = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    comm[a][b] += i[1][a][k] * i[2][k][b] - i[2][a][k] * i[1][k][b];
                }
            }
        }
        let want = i[3].map(|r| r.map(|x| x * 2.0 * I));
        assert!(close(&comm, &want, 1e-15));
    }

    #[test]
    fn broken_frame_closed_forms_agree() {
        let mut r = stream_rng(3, 77, 0);
        for _ in 0..20 {
            let th = 0.01 + 1.55 * real_gaussian(&mut r).abs().fract();
            let (a, b) = (broken_frame(th).unwrap(), broken_frame_pauli(th).unwrap());
            for (x, y) in a.elements().iter().zip(b.elements().iter()) {
                assert!(close(x, y, 1e-14));
            }
        }
        let f = broken_frame(std::f64::consts::FRAC_PI_4).unwrap();
        assert!(close(&f.e_dprime, &diag(0.0, -SQRT2), 1e-14));
        // e⁺ adjoint is e⁻
        let ep = f.e_plus;
        let adj = [[ep[0][0].conj(), ep[1][0].conj()], [ep[0][1].conj(), ep[1][1].conj()]];
        assert!(close(&adj, &f.e_minus, 0.0));
        assert!(broken_frame(0.0).is_err());
        assert!(broken_frame(std::f64::consts::FRAC_PI_2).is_err());
    }

    #[test]
    fn gauge_field_round_trip() {
        let p = EWParams::default();
        let frame = broken_frame(p.theta).unwrap();
        let mut r = stream_rng(4, 77, 0);
        let (f, _) = random_point(&mut r);
        let w = recompose_gauge_field(&f, &frame, &p);
        let back = decompose_gauge_field(&w, &frame, &p).unwrap();
        for l in 0..4 {
            for (x, y) in [(f.a, back.a), (f.z, back.z), (f.w_plus, back.w_plus), (f.w_minus, back.w_minus)] {
                assert!((x[l] - y[l]).norm() < 1e-13);
            }
        }
        let zero = recompose_gauge_field(&FieldPoint::default(), &frame, &p);
        assert!(zero.iter().flatten().flatten().all(|x| *x == ZERO));
    }

    #[test]
    fn physical_gauge_field_is_anti_hermitian_with_trace_w0() {
        let p = EWParams::default();
        let frame = broken_frame(p.theta).unwrap();
        let mut r = stream_rng(5, 77, 0);
        let fs = EWFieldSet {
            h: real_gaussian(&mut r),
            phi0: real_gaussian(&mut r),
            phi_plus: complex_gaussian(&mut r),
            a: [0; 4].map(|_: i32| real_gaussian(&mut r)),
            z: [0; 4].map(|_: i32| real_gaussian(&mut r)),
            w_plus: rnd4(&mut r),
        };
        let w = recompose_gauge_field(&fs.point(), &frame, &p);
        let comps = pauli_components(&w, &p);
        for l in 0..4 {
            for a in 0..2 {
                for b in 0..2 {
                    assert!((w[l][a][b] + w[l][b][a].conj()).norm() < 1e-14);
                }
            }
            for mu in 0..4 {
                assert!(comps[l][mu].im.abs() < 1e-14);
            }
            let tr = w[l][0][0] + w[l][1][1];
            assert!((tr - I * p.q * comps[l][0]).norm() < 1e-14);
            let (s, c) = p.theta.sin_cos();
            assert!((comps[l][0].re - (-s * fs.a[l] - s * s / c * fs.z[l])).abs() < 1e-13);
            assert!((comps[l][3].re - (-s * fs.a[l] + c * fs.z[l])).abs() < 1e-13);
        }
    }

    #[test]
    fn higgs_components_and_potential() {
        let p = EWParams::default();
        let vac = FieldPoint::default();
        let (phi, phib) = higgs_field_components(&vac, &p);
        assert_eq!(phi, [C::new(p.m, 0.0), ZERO]);
        let s = phib[0] * phi[0] + phib[1] * phi[1];
        assert!((s - C::new(p.m * p.m, 0.0)).norm() < 1e-15);
        assert!((higgs_potential_at(&vac, &p) - C::new(p.lambda * p.m.powi(4), 0.0)).norm() < 1e-14);
        assert_eq!(higgs_potential(ZERO, &p), ZERO);
        let (d1, kind) = potential_stationarity(&p);
        assert!(d1.abs() < 1e-6 * p.lambda * p.m * p.m);
        assert_eq!(kind, "maximum");
        let fs = EWFieldSet {
            h: 0.3,
            phi0: -0.2,
            phi_plus: C::new(0.1, 0.4),
            ..Default::default()
        };
        let (phi, phib) = higgs_field_components(&fs.point(), &p);
        assert!((phi[0].conj() - phib[0]).norm() < 1e-15);
        assert!((phi[1].conj() - phib[1]).norm() < 1e-15);
    }

    #[test]
    fn covariant_derivative_routes_agree() {
        let p = EWParams::default();
        for k in 0..100 {
            let mut r = stream_rng(6, 77, k);
            let (f, mom) = random_point(&mut r);
            let a = higgs_covariant_derivative(&f, &mom, &p).unwrap();
            let b = covariant_derivative_matrix_route(&f, &mom, &p).unwrap();
            let ab = higgs_covariant_derivative_bar(&f, &mom, &p).unwrap();
            let bb = covariant_derivative_bar_matrix_route(&f, &mom, &p).unwrap();
            for l in 0..4 {
                for al in 0..2 {
                    assert!((a[l][al] - b[l][al]).norm() <= 1e-12 * a[l][al].norm().max(1.0));
                    assert!((ab[l][al] - bb[l][al]).norm() <= 1e-12 * ab[l][al].norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn covariant_derivative_special_cases() {
        let p = EWParams::default();
        let mut r = stream_rng(7, 77, 0);
        let (f, mom) = random_point(&mut r);
        let pure = FieldPoint {
            a: [ZERO; 4],
            z: [ZERO; 4],
            w_plus: [ZERO; 4],
            w_minus: [ZERO; 4],
            ..f
        };
        let d = higgs_covariant_derivative(&pure, &mom, &p).unwrap();
        for l in 0..4 {
            let want = I * mom.h[l] * f.h + I * (I * mom.phi0[l] * f.phi0);
            assert!((d[l][0] - want).norm() < 1e-14);
        }
        let zonly = FieldPoint {
            z: f.z,
            ..FieldPoint::default()
        };
        let d = higgs_covariant_derivative(&zonly, &Momenta::default(), &p).unwrap();
        for l in 0..4 {
            let want = -I * (0.5 * p.q / p.theta.cos() * p.m) * f.z[l];
            assert!((d[l][0] - want).norm() < 1e-14);
        }
    }
}
