use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Policy, Turn};
use crate::error::{BanditError, Result};
use crate::scalar::Scalar;
use crate::vecmath::ActionVec;

/// Ridge-regression optimism with an ellipsoidal confidence set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfulConfig {
    /// Ridge parameter λ.
    pub lambda: f64,
    pub delta_prob: f64,
    /// Assumed bound on `‖θ*‖` in the radius.
    pub s_bound: f64,
    /// Multiplies the noise part of the radius; 1 for unit sub-Gaussian noise.
    pub noise_scale: f64,
}

impl Default for OfulConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            delta_prob: 0.1,
            s_bound: 1.0,
            noise_scale: 1.0,
        }
    }
}

impl OfulConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(BanditError::domain(format!("ridge parameter must be > 0, got {}", self.lambda)));
        }
        if !(self.delta_prob > 0.0 && self.delta_prob < 1.0) {
            return Err(BanditError::domain(format!(
                "failure probability must lie in (0,1), got {}",
                self.delta_prob
            )));
        }
        if !(self.s_bound >= 0.0) || !(self.noise_scale >= 0.0) {
            return Err(BanditError::domain("radius scales must be >= 0"));
        }
        Ok(())
    }

    /// `β_t = √λ·S + σ̃·√(2 ln(1/δ) + d ln(1 + t/(λd)))`.
    pub fn radius(&self, d: usize, t: u64) -> f64 {
        let df = d as f64;
        self.lambda.sqrt() * self.s_bound
            + self.noise_scale
                * (2.0 * (1.0 / self.delta_prob).ln() + df * (1.0 + t as f64 / (self.lambda * df)).ln()).sqrt()
    }
}

/// Point of `{x : Σ λᵢ (xᵢ − cᵢ)² ≤ β²}` farthest from the origin, in the
/// eigenbasis. All `λᵢ > 0`.
fn farthest_point(lams: &[f64], c: &[f64], beta: f64) -> Vec<f64> {
    if beta <= 0.0 {
        return c.to_vec();
    }
    let lmin = lams.iter().copied().fold(f64::INFINITY, f64::min);
    let bottom: Vec<bool> = lams.iter().map(|&l| l - lmin <= 1e-12 * lmin).collect();
    let beta2 = beta * beta;
    // with μλ_min = 1 + s, the multiplier terms are μλᵢ − 1
    let den = |i: usize, s: f64| {
        if bottom[i] {
            s
        } else {
            (1.0 + s) * lams[i] / lmin - 1.0
        }
    };
    let g = |s: f64| -> f64 {
        (0..lams.len())
            .map(|i| {
                let q = den(i, s);
                lams[i] * c[i] * c[i] / (q * q)
            })
            .sum()
    };
    let floor = 1e-14;
    if g(floor) < beta2 {
        // hard case: the constraint is slack along the bottom eigenspace
        let mut x = vec![0.0; lams.len()];
        let mut rest = 0.0;
        let mut i0: Option<usize> = None;
        for i in 0..lams.len() {
            if bottom[i] {
                x[i] = c[i];
                if i0.is_none_or(|j| c[i].abs() > c[j].abs()) {
                    i0 = Some(i);
                }
            } else {
                let q = den(i, 0.0);
                x[i] = c[i] + c[i] / q;
                rest += lams[i] * c[i] * c[i] / (q * q);
            }
        }
        let i0 = i0.expect("bottom eigenspace is nonempty");
        let extra = ((beta2 - rest).max(0.0) / lmin).sqrt();
        x[i0] += if c[i0] < 0.0 { -extra } else { extra };
        return x;
    }
    let (mut lo, mut hi) = (floor, 1.0);
    while g(hi) > beta2 {
        lo = hi;
        hi *= 2.0;
    }
    // g decreases in s; geometric bisection keeps relative precision near 0
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if g(mid) > beta2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0..lams.len()).map(|i| c[i] + c[i] / den(i, hi)).collect()
}

/// Maximizer over the unit ball of `⟨θ̂,a⟩ + β‖a‖_{V⁻¹}` for symmetric
/// positive definite `gram` (row-major, `d × d`).
pub fn optimistic_direction<S: Scalar>(gram: &[S], theta_hat: &[S], beta: S) -> Result<ActionVec<S>> {
    let d = theta_hat.len();
    if d == 0 || gram.len() != d * d {
        return Err(BanditError::domain("gram matrix must be d x d"));
    }
    let v = DMatrix::from_row_iterator(d, d, gram.iter().map(|x| x.as_f64()));
    let th = DVector::from_iterator(d, theta_hat.iter().map(|x| x.as_f64()));
    solve(&v, &th, beta.as_f64())
}

fn solve<S: Scalar>(gram: &DMatrix<f64>, theta_hat: &DVector<f64>, beta: f64) -> Result<ActionVec<S>> {
    let d = theta_hat.len();
    let eig = SymmetricEigen::new(gram.clone());
    let lams: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if lams.iter().any(|&l| !(l > 0.0)) {
        return Err(BanditError::domain("gram matrix must be positive definite"));
    }
    let c: Vec<f64> = (eig.eigenvectors.transpose() * theta_hat).iter().copied().collect();
    let x = DVector::from_vec(farthest_point(&lams, &c, beta));
    let v = &eig.eigenvectors * x;
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Ok(ActionVec::basis(d, 0));
    }
    ActionVec::normalized(&v.iter().map(|&x| S::lit(x / norm)).collect::<Vec<_>>())
}

/// Optimistic linear bandit over the unit ball.
///
/// The optimistic action is `θ̃/‖θ̃‖` with `θ̃` the point of the confidence
/// ellipsoid farthest from the origin, found through the eigendecomposition
/// of `V` and a monotone search on the dual multiplier. Internal state is
/// kept in double precision for every scalar type.
#[derive(Debug, Clone)]
pub struct Oful<S> {
    d: usize,
    cfg: OfulConfig,
    gram: DMatrix<f64>,
    b: DVector<f64>,
    t: u64,
    last: Option<ActionVec<S>>,
    turn: Turn,
}

impl<S: Scalar> Oful<S> {
    pub fn new(d: usize, cfg: OfulConfig) -> Result<Self> {
        cfg.validate()?;
        if d == 0 {
            return Err(BanditError::domain("dimension must be >= 1"));
        }
        Ok(Self {
            d,
            cfg,
            gram: DMatrix::identity(d, d) * cfg.lambda,
            b: DVector::zeros(d),
            t: 0,
            last: None,
            turn: Turn::default(),
        })
    }

    /// Observations absorbed so far.
    pub fn rounds(&self) -> u64 {
        self.t
    }

    /// `θ̂ = V⁻¹ b`.
    pub fn theta_hat(&self) -> Vec<f64> {
        let chol = self.gram.clone().cholesky().expect("ridge keeps V positive definite");
        chol.solve(&self.b).iter().copied().collect()
    }

    pub fn radius(&self) -> f64 {
        self.cfg.radius(self.d, self.t)
    }
}

impl<S: Scalar> Policy<S> for Oful<S> {
    fn next_action(&mut self) -> Result<ActionVec<S>> {
        self.turn.begin()?;
        let theta = DVector::from_vec(self.theta_hat());
        let a = solve(&self.gram, &theta, self.radius())?;
        self.last = Some(a.clone());
        Ok(a)
    }

    fn observe(&mut self, reward: S) -> Result<()> {
        self.turn.end()?;
        let a = self.last.take().expect("turn guarantees a pending action");
        let av = DVector::from_iterator(self.d, a.as_slice().iter().map(|x| x.as_f64()));
        self.gram.ger(1.0, &av, &av, 1.0);
        self.b.axpy(reward.as_f64(), &av, 1.0);
        self.t += 1;
        Ok(())
    }

    fn phase(&self) -> &'static str {
        "fallback"
    }
}
