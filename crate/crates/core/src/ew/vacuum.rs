//! Splitting of `F_L` by a maximal-rank vacuum map `H0: F_R → F_L`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::EwError;

type C = Complex64;

#[derive(Debug, Clone)]
pub struct VacuumSplit {
    pub h0: DMatrix<C>,
    pub h_l: DMatrix<C>,
    pub h_r: DMatrix<C>,
    /// `h_L`-orthogonal projector onto `F′ = im H0`.
    pub p_image: DMatrix<C>,
    pub p_perp: DMatrix<C>,
    /// `c` with `H0†h_L H0 ≈ c h_R`.
    pub conformal_constant: f64,
    pub isometry_residual: f64,
}

/// Blocks of an endomorphism of `F_L` with respect to `F′ ⊕ F⊥`.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub inner: DMatrix<C>,
    /// `F′ → F⊥`
    pub plus: DMatrix<C>,
    /// `F⊥ → F′`
    pub minus: DMatrix<C>,
    pub perp: DMatrix<C>,
}

fn is_hermitian(h: &DMatrix<C>) -> bool {
    let scale = h.norm().max(1.0);
    (h - h.adjoint()).norm() <= 1e-12 * scale
}

pub fn vacuum_split(h0: &DMatrix<C>, h_l: &DMatrix<C>, h_r: &DMatrix<C>) -> Result<VacuumSplit, EwError> {
    let (nl, nr) = h0.shape();
    if h_l.shape() != (nl, nl) || h_r.shape() != (nr, nr) {
        return Err(EwError::Dimension(format!(
            "H0 is {nl}x{nr}, h_L is {:?}, h_R is {:?}",
            h_l.shape(),
            h_r.shape()
        )));
    }
    if nr > nl {
        return Err(EwError::Dimension(format!("dim F_R = {nr} exceeds dim F_L = {nl}")));
    }
    if !is_hermitian(h_l) || !is_hermitian(h_r) {
        return Err(EwError::Dimension("fiber metrics must be Hermitian".into()));
    }
    let sv = h0.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-12 * top.max(f64::MIN_POSITIVE)).count();
    if top == 0.0 || rank < nr {
        return Err(EwError::RankDeficient { rank, needed: nr });
    }
    let h_r_inv = h_r.clone().try_inverse().ok_or(EwError::SingularFrame)?;
    let gram = h0.adjoint() * h_l * h0;
    let c = (&h_r_inv * &gram).trace().re / nr as f64;
    let isometry_residual = (&gram - h_r * C::new(c, 0.0)).norm() / gram.norm();
    let gram_inv = gram.clone().try_inverse().ok_or(EwError::SingularFrame)?;
    let p_image = h0 * gram_inv * h0.adjoint() * h_l;
    let p_perp = DMatrix::<C>::identity(nl, nl) - &p_image;
    Ok(VacuumSplit {
        h0: h0.clone(),
        h_l: h_l.clone(),
        h_r: h_r.clone(),
        p_image,
        p_perp,
        conformal_constant: c,
        isometry_residual,
    })
}

impl VacuumSplit {
    /// `h_L`-adjoint `X‡ = h_L⁻¹ X† h_L`.
    pub fn adjoint(&self, x: &DMatrix<C>) -> DMatrix<C> {
        let inv = self.h_l.clone().try_inverse().expect("h_L checked invertible by caller");
        inv * x.adjoint() * &self.h_l
    }

    pub fn blocks(&self, xi: &DMatrix<C>) -> Blocks {
        let (p, q) = (&self.p_image, &self.p_perp);
        Blocks {
            inner: p * xi * p,
            plus: q * xi * p,
            minus: p * xi * q,
            perp: q * xi * q,
        }
    }

    /// `‖(ξ⁻)‡ + ξ⁺‖ / ‖ξ‖`, zero for `h_L`-anti-Hermitian `ξ`.
    pub fn block_adjoint_residual(&self, xi: &DMatrix<C>) -> f64 {
        let b = self.blocks(xi);
        (self.adjoint(&b.minus) + &b.plus).norm() / xi.norm().max(f64::MIN_POSITIVE)
    }

    pub fn image_dim(&self) -> usize {
        self.p_image.trace().re.round() as usize
    }
}
