//! Instance and hint generators, including the adversarial families used to
//! probe the regret trade-off.
//!
//! Families that are axis-aligned in their textbook form are built in an
//! orthonormal basis whose first axis is the hint and whose remaining axes
//! come from Gram–Schmidt on random draws.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::BanditInstance;
use crate::error::{BanditError, Result};
use crate::scalar::Scalar;
use crate::vecmath::{add, dot, norm, orthonormal_basis_with, random_unit, scale, sub, ActionVec};

/// Rotation-angle tolerance of [`gen_hint_of_quality`], relative to `‖θ*‖`.
pub const HINT_QUALITY_TOL: f64 = 1e-6;

fn check_unit<S: Scalar>(h: &ActionVec<S>) -> Result<()> {
    if h.is_unit() {
        Ok(())
    } else {
        Err(BanditError::domain(format!("expected a unit vector, got norm {}", h.norm())))
    }
}

/// `θ₀ = ρh` followed by `θ₀ + Δeᵢ`, `θ₀ − Δeᵢ` for each axis `eᵢ ⊥ h`.
pub fn gen_pareto_family<S: Scalar, R: Rng + ?Sized>(
    h: &ActionVec<S>,
    rho: S,
    delta: S,
    noise_sigma: S,
    rng: &mut R,
) -> Result<Vec<BanditInstance<S>>> {
    check_unit(h)?;
    if !(rho > S::zero()) || !(delta >= S::zero()) {
        return Err(BanditError::domain(format!("need ρ > 0 and Δ >= 0, got ρ = {rho}, Δ = {delta}")));
    }
    if rho * rho + delta * delta > S::one() + S::ball_slack() {
        return Err(BanditError::domain(format!("ρ² + Δ² must be <= 1, got {}", rho * rho + delta * delta)));
    }
    let basis = orthonormal_basis_with(h.as_slice(), rng)?;
    let center = scale(h.as_slice(), rho);
    let mut family = vec![BanditInstance::new(center.clone(), noise_sigma)?];
    for e in &basis[1..] {
        let step = scale(e, delta);
        family.push(BanditInstance::new(add(&center, &step), noise_sigma)?);
        family.push(BanditInstance::new(sub(&center, &step), noise_sigma)?);
    }
    Ok(family)
}

/// `(θ, s₁Δ/√d, …, s_dΔ/√d)` in dimension `d + 1`, with `d = signs.len()`.
pub fn gen_cube_family<S: Scalar>(theta: S, delta: S, signs: &[i8], noise_sigma: S) -> Result<BanditInstance<S>> {
    if signs.is_empty() {
        return Err(BanditError::domain("need at least one sign"));
    }
    if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(BanditError::domain(format!("signs must be ±1, got {s}")));
    }
    if !(delta >= S::zero()) || theta * theta + delta * delta > S::one() + S::ball_slack() {
        return Err(BanditError::domain(format!("need Δ >= 0 and θ² + Δ² <= 1, got θ = {theta}, Δ = {delta}")));
    }
    let bar = delta / S::from_usize(signs.len()).unwrap().sqrt();
    let coords = std::iter::once(theta)
        .chain(signs.iter().map(|&s| if s > 0 { bar } else { -bar }))
        .collect();
    BanditInstance::new(coords, noise_sigma)
}

/// `θ* = h/2 + v` with `v` uniform in the ball of radius `Δ`.
///
/// The lower-bound construction is stated for `θ* ∈ ℝ^{d+1}`; the output
/// dimension is `h.dim()`, i.e. one more than that `d`. The guarantees
/// `‖a* − h‖ ≤ 4Δ` and `r(a*, h) ≤ 972Δ²` are checked on every draw.
pub fn gen_near_hint<S: Scalar, R: Rng + ?Sized>(
    h: &ActionVec<S>,
    delta: S,
    noise_sigma: S,
    rng: &mut R,
) -> Result<BanditInstance<S>> {
    check_unit(h)?;
    if !(delta >= S::zero()) || delta > S::lit(0.25) {
        return Err(BanditError::domain(format!("Δ must lie in [0, 1/4], got {delta}")));
    }
    let n = h.dim();
    let dir: Vec<S> = random_unit(n, rng);
    let radius = delta * S::unit_uniform(rng).powf(S::one() / S::from_usize(n).unwrap());
    let theta = add(&scale(h.as_slice(), S::lit(0.5)), &scale(&dir, radius));
    let inst = BanditInstance::new(theta, noise_sigma)?;
    let gap = norm(&sub(inst.optimal_action().as_slice(), h.as_slice()));
    let r_h = inst.instantaneous_regret(h.as_slice());
    let slack = S::lit(1e-12);
    if gap > S::lit(4.0) * delta + slack || r_h > S::lit(972.0) * delta * delta + slack {
        return Err(BanditError::state(format!(
            "near-hint guarantee violated: ‖a* − h‖ = {gap}, r_h = {r_h}, Δ = {delta}"
        )));
    }
    Ok(inst)
}

/// Uniformly random direction scaled to `norm`.
pub fn gen_random_instance<S: Scalar, R: Rng + ?Sized>(
    dim: usize,
    norm: S,
    noise_sigma: S,
    rng: &mut R,
) -> Result<BanditInstance<S>> {
    if dim == 0 || !(norm > S::zero()) {
        return Err(BanditError::domain("need dim >= 1 and norm > 0"));
    }
    BanditInstance::new(scale(&random_unit(dim, rng), norm), noise_sigma)
}

/// Unit hint with instantaneous regret `target`: `a*` rotated by bisection
/// on the angle in a random plane containing `a*`.
pub fn gen_hint_of_quality<S: Scalar, R: Rng + ?Sized>(
    inst: &BanditInstance<S>,
    target: S,
    rng: &mut R,
) -> Result<ActionVec<S>> {
    let tn = inst.theta_norm();
    let two = S::lit(2.0);
    if !(target >= S::zero()) || target > two * tn {
        return Err(BanditError::domain(format!("target must lie in [0, 2‖θ*‖ = {}], got {target}", two * tn)));
    }
    let a = inst.optimal_action();
    if target == S::zero() {
        return Ok(a);
    }
    if target == two * tn {
        return Ok(a.neg());
    }
    if a.dim() < 2 {
        return Err(BanditError::domain("intermediate hint qualities need d >= 2"));
    }
    let u = orthonormal_basis_with(a.as_slice(), rng)?.swap_remove(1);
    let rotate = |phi: S| -> Vec<S> { add(&scale(a.as_slice(), phi.cos()), &scale(&u, phi.sin())) };
    let (mut lo, mut hi) = (S::zero(), S::lit(std::f64::consts::PI));
    let tol = S::lit(HINT_QUALITY_TOL) * tn * S::lit(0.01);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        let r = inst.instantaneous_regret(&rotate(mid));
        if (r - target).abs() <= tol {
            lo = mid;
            hi = mid;
            break;
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = ActionVec::normalized(&rotate((lo + hi) / two))?;
    debug_assert!((dot(h.as_slice(), inst.theta_star()) - (tn - target)).abs() <= S::lit(HINT_QUALITY_TOL) * tn);
    Ok(h)
}

/// Which generator to call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceKind {
    /// Uniform direction, unit norm.
    RandomUnit,
    /// Uniform direction, given norm.
    Scaled { norm: f64 },
    /// Member of the trade-off family around a random anchor: `index = 0` is
    /// the center, `index = i ≥ 1` moves by `sign·Δ` along the `i`-th axis
    /// orthogonal to the anchor. The whole vector is multiplied by `scale`.
    ParetoFamily {
        rho: f64,
        delta: f64,
        index: usize,
        sign: i8,
        #[serde(default = "unit_scale", skip_serializing_if = "is_unit_scale")]
        scale: f64,
    },
    /// Hypercube family; needs `signs.len() == dim - 1`.
    CubeFamily { theta: f64, delta: f64, signs: Vec<i8> },
    /// Half the anchor plus a uniform vector of norm at most `delta`.
    NearHint { delta: f64 },
}

/// Serializable instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub dim: usize,
    #[serde(default = "unit_noise")]
    pub noise_sigma: f64,
    /// Fixed seed shared by all replications; unset draws a fresh instance
    /// per replication.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub kind: InstanceKind,
}

fn unit_noise() -> f64 {
    1.0
}

fn unit_scale() -> f64 {
    1.0
}

fn is_unit_scale(s: &f64) -> bool {
    *s == 1.0
}

/// A built instance with the anchor direction its family was generated
/// around, when there is one.
#[derive(Debug, Clone)]
pub struct GeneratedInstance<S> {
    pub instance: BanditInstance<S>,
    pub anchor: Option<ActionVec<S>>,
}

impl InstanceSpec {
    pub fn build<S: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GeneratedInstance<S>> {
        let d = self.dim;
        if d == 0 {
            return Err(BanditError::domain("dim must be >= 1"));
        }
        let sigma = S::lit(self.noise_sigma);
        match &self.kind {
            InstanceKind::RandomUnit => Ok(GeneratedInstance {
                instance: gen_random_instance(d, S::one(), sigma, rng)?,
                anchor: None,
            }),
            InstanceKind::Scaled { norm } => Ok(GeneratedInstance {
                instance: gen_random_instance(d, S::lit(*norm), sigma, rng)?,
                anchor: None,
            }),
            InstanceKind::ParetoFamily {
                rho,
                delta,
                index,
                sign,
                scale: k,
            } => {
                if d < 2 || *index >= d {
                    return Err(BanditError::domain(format!("family index must be < dim = {d}, got {index}")));
                }
                if *sign != 1 && *sign != -1 {
                    return Err(BanditError::domain(format!("sign must be ±1, got {sign}")));
                }
                let h = ActionVec::new(random_unit(d, rng))?;
                let family = gen_pareto_family(&h, S::lit(*rho), S::lit(*delta), sigma, rng)?;
                let pick = if *index == 0 {
                    0
                } else {
                    2 * index - usize::from(*sign > 0)
                };
                if !(*k > 0.0 && k.is_finite()) {
                    return Err(BanditError::domain(format!("scale must be > 0, got {k}")));
                }
                let member = &family[pick];
                Ok(GeneratedInstance {
                    instance: BanditInstance::new(scale(member.theta_star(), S::lit(*k)), sigma)?,
                    anchor: Some(h),
                })
            }
            InstanceKind::CubeFamily { theta, delta, signs } => {
                if signs.len() + 1 != d {
                    return Err(BanditError::domain(format!(
                        "cube family needs dim - 1 = {} signs, got {}",
                        d - 1,
                        signs.len()
                    )));
                }
                Ok(GeneratedInstance {
                    instance: gen_cube_family(S::lit(*theta), S::lit(*delta), signs, sigma)?,
                    anchor: Some(ActionVec::basis(d, 0)),
                })
            }
            InstanceKind::NearHint { delta } => {
                let h = ActionVec::new(random_unit(d, rng))?;
                Ok(GeneratedInstance {
                    instance: gen_near_hint(&h, S::lit(*delta), sigma, rng)?,
                    anchor: Some(h),
                })
            }
        }
    }
}
