//! Wave strength ratios and limiter functions for the correction fluxes.

use serde::{Deserialize, Serialize};

use crate::riemann::{FaceSolver, WaveSet, MAX_WAVES};
use crate::state::{Matrix13, StateVector};
use crate::system::Direction;

const DENOMINATOR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrengthRatio {
    /// Compare with the upwind wave of the same family.
    Classical,
    /// Energy inner product against the upwind shear pair, classical for
    /// the other families.
    EShear,
    /// Energy inner product against all upwind waves travelling the same way.
    EFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimiterFunction {
    /// Unlimited second-order corrections.
    None,
    Minmod,
    Mc,
    Superbee,
    /// Corrections switched off, first-order Godunov.
    Godunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimiterChoice {
    pub strength_ratio: StrengthRatio,
    pub function: LimiterFunction,
}

impl Default for LimiterChoice {
    fn default() -> Self {
        Self {
            strength_ratio: StrengthRatio::EFull,
            function: LimiterFunction::Mc,
        }
    }
}

impl LimiterChoice {
    pub fn unlimited() -> Self {
        Self {
            strength_ratio: StrengthRatio::EFull,
            function: LimiterFunction::None,
        }
    }

    pub fn needs_ratio(&self) -> bool {
        !matches!(self.function, LimiterFunction::None | LimiterFunction::Godunov)
    }
}

pub fn phi(function: LimiterFunction, theta: f64) -> f64 {
    match function {
        LimiterFunction::None => 1.0,
        LimiterFunction::Godunov => 0.0,
        LimiterFunction::Minmod => theta.clamp(0.0, 1.0),
        LimiterFunction::Mc => 0.0f64.max(((1.0 + theta) / 2.0).min(2.0).min(2.0 * theta)),
        LimiterFunction::Superbee => 0.0f64
            .max((2.0 * theta).min(1.0))
            .max(theta.min(2.0)),
    }
}

/// `θ = Wᵀ W_up / Wᵀ W`.
pub fn theta_classical(w: &StateVector, w_up: &StateVector) -> f64 {
    ratio(w.dot(w_up), w.dot(w))
}

/// `θ = Wᵀ E ΣW_up / Wᵀ E ΣW_local`, with `E` of the medium the wave
/// propagates into and both sums over waves moving the same way as `W`.
pub fn theta_e_full(
    w: &StateVector,
    sum_upwind: &StateVector,
    sum_local: &StateVector,
    energy: &Matrix13,
) -> f64 {
    let ew = energy * w;
    ratio(ew.dot(sum_upwind), ew.dot(sum_local))
}

/// `θ = Wᵀ E (W_S1 + W_S2)_up / Wᵀ E W`.
pub fn theta_e_shear(w: &StateVector, shear_upwind: &StateVector, energy: &Matrix13) -> f64 {
    let ew = energy * w;
    ratio(ew.dot(shear_upwind), ew.dot(w))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= DENOMINATOR_FLOOR {
        0.0
    } else {
        num / den
    }
}

/// Limiter factors for the waves of `local`. `upwind_left` is the face the
/// right-going waves came through, `upwind_right` the one for left-going
/// waves. `energy_of` gives `E` for the medium each wave moves into.
pub fn apply_limiter(
    local: &WaveSet,
    upwind_left: Option<&WaveSet>,
    upwind_right: Option<&WaveSet>,
    choice: &LimiterChoice,
    energy_of: impl Fn(Direction) -> Matrix13,
) -> Vec<f64> {
    local
        .waves
        .iter()
        .map(|w| {
            if !choice.needs_ratio() {
                return phi(choice.function, 1.0);
            }
            let up = if w.speed > 0.0 { upwind_left } else { upwind_right };
            let Some(up) = up else {
                return phi(choice.function, 0.0);
            };
            let dir = w.label.direction;
            let classical = || {
                let w_up = up
                    .waves
                    .iter()
                    .find(|u| u.label == w.label)
                    .map(|u| u.jump)
                    .unwrap_or_else(StateVector::zeros);
                theta_classical(&w.jump, &w_up)
            };
            let theta = match choice.strength_ratio {
                StrengthRatio::Classical => classical(),
                StrengthRatio::EFull => {
                    theta_e_full(&w.jump, &up.sum(dir), &local.sum(dir), &energy_of(dir))
                }
                StrengthRatio::EShear if w.label.family.is_shear() => {
                    let shear = up
                        .waves
                        .iter()
                        .filter(|u| u.label.direction == dir && u.label.family.is_shear())
                        .fold(StateVector::zeros(), |acc, u| acc + u.jump);
                    theta_e_shear(&w.jump, &shear, &energy_of(dir))
                }
                StrengthRatio::EShear => classical(),
            };
            phi(choice.function, theta)
        })
        .collect()
}

/// Sum of `α_q r_q` over the waves of a face solver moving in `dir`,
/// optionally restricted to the shear families.
fn solver_sum(fs: &FaceSolver, alpha: &[f64; MAX_WAVES], dir: Direction, shear_only: bool) -> StateVector {
    let mut s = StateVector::zeros();
    for q in 0..fs.count {
        let l = fs.labels[q];
        if l.direction == dir && (!shear_only || l.family.is_shear()) {
            s += fs.vectors.column(q) * alpha[q];
        }
    }
    s
}

/// Strength ratio for wave `p` of a precomputed face solver.
///
/// Works on strengths, `W_p = α_p r_p`, so `E W_p = α_p (E r_p)` with the
/// stored `E r_p`.
pub fn theta_face(
    ratio_kind: StrengthRatio,
    local: &FaceSolver,
    alpha: &[f64; MAX_WAVES],
    p: usize,
    upwind: &FaceSolver,
    alpha_up: &[f64; MAX_WAVES],
) -> f64 {
    let label = local.labels[p];
    let classical = || {
        match (0..upwind.count).find(|&q| upwind.labels[q] == label) {
            Some(q) => {
                let r = local.vectors.column(p);
                let num = alpha[p] * alpha_up[q] * r.dot(&upwind.vectors.column(q));
                ratio(num, alpha[p] * alpha[p] * r.norm_squared())
            }
            None => 0.0,
        }
    };
    match ratio_kind {
        StrengthRatio::Classical => classical(),
        StrengthRatio::EFull => {
            let er = local.energy_vectors.column(p);
            let up = solver_sum(upwind, alpha_up, label.direction, false);
            let loc = solver_sum(local, alpha, label.direction, false);
            ratio(alpha[p] * er.dot(&up), alpha[p] * er.dot(&loc))
        }
        StrengthRatio::EShear if label.family.is_shear() => {
            let er = local.energy_vectors.column(p);
            let up = solver_sum(upwind, alpha_up, label.direction, true);
            let ew_w = alpha[p] * alpha[p] * er.dot(&local.vectors.column(p));
            ratio(alpha[p] * er.dot(&up), ew_w)
        }
        StrengthRatio::EShear => classical(),
    }
}
