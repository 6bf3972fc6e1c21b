//! Vector primitives on the closed unit ball.
//!
//! Raw vectors are plain `Vec<S>` / `&[S]`; [`ActionVec`] is the checked
//! newtype for anything that is actually played against an environment.

use rand::Rng;

use crate::error::{BanditError, Result};
use crate::scalar::Scalar;

/// A point of the closed unit ball, `‖a‖ ≤ 1 + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionVec<S>(Vec<S>);

impl<S: Scalar> ActionVec<S> {
    /// Wraps `coords`, rejecting anything outside the ball.
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(BanditError::domain("action must have dimension >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(BanditError::domain("action has non-finite coordinates"));
        }
        let n = norm(&coords);
        if n > S::one() + S::ball_slack() {
            return Err(BanditError::domain(format!(
                "action norm {n} exceeds the unit ball"
            )));
        }
        Ok(Self(coords))
    }

    /// Scales `v` onto the unit sphere.
    pub fn normalized(v: &[S]) -> Result<Self> {
        let n = norm(v);
        if n <= S::zero() || !n.is_finite() {
            return Err(BanditError::domain("cannot normalize a zero vector"));
        }
        Ok(Self(v.iter().map(|&x| x / n).collect()))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![S::zero(); d])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![S::zero(); d];
        v[i] = S::one();
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn norm(&self) -> S {
        norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// `‖a‖ = 1` within [`Scalar::orth_tol`].
    pub fn is_unit(&self) -> bool {
        (self.norm() - S::one()).abs() <= S::orth_tol()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }
}

impl<S> AsRef<[S]> for ActionVec<S> {
    fn as_ref(&self) -> &[S] {
        &self.0
    }
}

#[inline]
pub fn dot<S: Scalar>(u: &[S], v: &[S]) -> S {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).fold(S::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub fn norm_sq<S: Scalar>(v: &[S]) -> S {
    dot(v, v)
}

#[inline]
pub fn norm<S: Scalar>(v: &[S]) -> S {
    norm_sq(v).sqrt()
}

pub fn scale<S: Scalar>(v: &[S], k: S) -> Vec<S> {
    v.iter().map(|&x| x * k).collect()
}

pub fn add<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(&a, &b)| a + b).collect()
}

pub fn sub<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(&a, &b)| a - b).collect()
}

fn check_dims<S>(u: &[S], v: &[S]) -> Result<()> {
    if u.len() != v.len() {
        return Err(BanditError::domain(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(())
}

/// `P_v u = ⟨u,v⟩ v / ‖v‖²`.
pub fn project_onto<S: Scalar>(u: &[S], v: &[S]) -> Result<Vec<S>> {
    check_dims(u, v)?;
    let vv = norm_sq(v);
    if vv <= S::zero() {
        return Err(BanditError::domain("projection onto the zero vector"));
    }
    let k = dot(u, v) / vv;
    Ok(scale(v, k))
}

/// `P⊥_v u = u − P_v u`.
pub fn project_orth<S: Scalar>(u: &[S], v: &[S]) -> Result<Vec<S>> {
    let along = project_onto(u, v)?;
    Ok(sub(u, &along))
}

/// Like [`project_orth`] but treats `v = 0` as the identity projector.
pub(crate) fn project_orth_or_identity<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    if norm_sq(v) <= S::zero() {
        u.to_vec()
    } else {
        project_orth(u, v).expect("nonzero v")
    }
}

/// `(h + p) / √(‖h‖² + ‖p‖²)`, explicitly renormalized to unit length.
///
/// `h` must be a unit vector or zero, and `p` orthogonal to it.
pub fn perturb<S: Scalar>(h: &ActionVec<S>, p: &[S]) -> Result<ActionVec<S>> {
    check_dims(h.as_slice(), p)?;
    let hn = h.norm();
    let h_zero = hn <= S::orth_tol();
    if !h_zero && (hn - S::one()).abs() > S::orth_tol() {
        return Err(BanditError::domain(format!(
            "reference action must be zero or unit, got norm {hn}"
        )));
    }
    let pn = norm(p);
    if h_zero && pn <= S::zero() {
        return Err(BanditError::domain("perturbation of the zero action by p = 0"));
    }
    let ip = dot(h.as_slice(), p);
    if ip.abs() > S::orth_tol() * S::one().max(pn) {
        return Err(BanditError::domain(format!(
            "perturbation not orthogonal to reference: <p,h> = {ip}"
        )));
    }
    let sum = add(h.as_slice(), p);
    ActionVec::normalized(&sum)
}

/// `d′ = d − 1{h ≠ 0}`: degrees of freedom of the projected Gaussian.
pub fn effective_dim<S: Scalar>(h: &[S]) -> usize {
    if h.iter().all(|x| x.is_zero()) {
        h.len()
    } else {
        h.len() - 1
    }
}

/// Draws `P⊥_h g` with `g ~ N(0, (variance_scale / d′) I)`.
///
/// With `h = 0` the projector is the identity and `d′ = d`.
pub fn sample_projected_gaussian<S: Scalar, R: Rng + ?Sized>(
    h: &[S],
    variance_scale: S,
    rng: &mut R,
) -> Result<Vec<S>> {
    if !(variance_scale >= S::zero()) || !variance_scale.is_finite() {
        return Err(BanditError::domain(format!(
            "variance scale must be finite and >= 0, got {variance_scale}"
        )));
    }
    let d_eff = effective_dim(h);
    if d_eff == 0 {
        return Err(BanditError::domain("projected Gaussian needs d' >= 1"));
    }
    let sd = (variance_scale / S::from_usize(d_eff).unwrap()).sqrt();
    let g: Vec<S> = (0..h.len()).map(|_| S::standard_normal(rng) * sd).collect();
    Ok(project_orth_or_identity(&g, h))
}

/// Uniform direction on the sphere in `d` dimensions.
pub fn random_unit<S: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<S> {
    loop {
        let g: Vec<S> = (0..d).map(|_| S::standard_normal(rng)).collect();
        let n = norm(&g);
        if n > S::zero() {
            return scale(&g, S::one() / n);
        }
    }
}

/// Orthonormal basis whose first vector is `first` (normalized), completed by
/// Gram–Schmidt on random draws.
pub fn orthonormal_basis_with<S: Scalar, R: Rng + ?Sized>(
    first: &[S],
    rng: &mut R,
) -> Result<Vec<Vec<S>>> {
    let d = first.len();
    let n = norm(first);
    if n <= S::zero() {
        return Err(BanditError::domain("basis seed vector is zero"));
    }
    let mut basis = vec![scale(first, S::one() / n)];
    while basis.len() < d {
        let mut v: Vec<S> = random_unit(d, rng);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let k = dot(&v, b);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - k * bi;
                }
            }
        }
        let vn = norm(&v);
        if vn > S::lit(1e-3) {
            basis.push(scale(&v, S::one() / vn));
        }
    }
    Ok(basis)
}
