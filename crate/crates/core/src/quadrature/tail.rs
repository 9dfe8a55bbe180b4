//! Closed-form bounds on the discarded tail `∫_T^∞ ‖T(t)‖ |density(t)| dt`.

use super::density::TailEnvelope;
use super::TruncationMode;
use crate::error::{Error, Result};
use crate::linalg::Generator;

/// Truncation point and a certified bound on the tail beyond it, per unit
/// norm of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub t_star: f64,
    pub bound: f64,
}

/// A bound on `‖T(t)‖` for large `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `M e^{ωt}`, `ω ≤ 0`.
    Exponential { m: f64, omega: f64 },
    /// `C t^{-δ}`.
    Algebraic { c: f64, delta: f64 },
}

/// Largest truncation point tried, `2^200`.
pub const MAX_T_STAR_LOG2: i32 = 200;

impl Profile {
    /// `∫_T^∞ profile(t) · K t^p e^{-κt} dt` for `T ≥ 1`; `None` when the
    /// product is not integrable.
    pub fn tail(&self, env: &TailEnvelope, t: f64) -> Option<f64> {
        if env.coeff == 0.0 {
            return Some(0.0);
        }
        let (k, p, kappa) = (env.coeff, env.power, env.rate);
        match *self {
            Profile::Exponential { m, omega } => {
                exp_power_tail(t, p, kappa - omega).map(|v| m * k * v)
            }
            Profile::Algebraic { c, delta } => exp_power_tail(t, p - delta, kappa).map(|v| c * k * v),
        }
    }

    pub fn profiles_of(gen: &Generator, mode: TruncationMode) -> Vec<Profile> {
        let g = gen.growth();
        let exp = Profile::Exponential {
            m: g.m,
            omega: g.omega,
        };
        let alg = gen.decay().map(|d| Profile::Algebraic {
            c: d.c,
            delta: d.delta,
        });
        match mode {
            TruncationMode::ExponentialTail => vec![exp],
            TruncationMode::AlgebraicTail => alg.into_iter().collect(),
            TruncationMode::Auto => std::iter::once(exp).chain(alg).collect(),
        }
    }
}

/// Upper bound on `∫_T^∞ t^p e^{-ct} dt`, `T ≥ 1`.
fn exp_power_tail(t: f64, p: f64, c: f64) -> Option<f64> {
    if c > 0.0 {
        // t^p e^{-ct} is log-concave beyond T; bound by the exponential
        // with the rate at T.
        let rate = c - p.max(0.0) / t;
        if rate <= 0.0 {
            return Some(f64::INFINITY);
        }
        Some(t.powf(p) * (-c * t).exp() / rate)
    } else if c == 0.0 && p < -1.0 {
        Some(t.powf(p + 1.0) / (-p - 1.0))
    } else {
        None
    }
}

/// Tail bound at a given truncation point: the smallest over the profiles.
pub fn tail_bound_for(
    profiles: &[Profile],
    env: &TailEnvelope,
    t_star: f64,
) -> Result<TailBound> {
    if !(t_star >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation point {t_star} must be at least 1"
        )));
    }
    let bound = profiles
        .iter()
        .filter_map(|p| p.tail(env, t_star))
        .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.min(b))));
    match bound {
        Some(bound) => Ok(TailBound { t_star, bound }),
        None => Err(divergent(profiles, env)),
    }
}

fn divergent(profiles: &[Profile], env: &TailEnvelope) -> Error {
    let desc: Vec<String> = profiles
        .iter()
        .map(|p| match p {
            Profile::Exponential { m, omega } => format!("{m:.3e}·exp({omega:.3e} t)"),
            Profile::Algebraic { c, delta } => format!("{c:.3e}·t^-{delta}"),
        })
        .collect();
    let profile = if desc.is_empty() {
        "no applicable growth profile".to_string()
    } else {
        desc.join(" / ")
    };
    Error::DivergentTail(format!(
        "{profile} against density envelope {:.3e}·t^{}·exp(-{} t) is not integrable at infinity",
        env.coeff, env.power, env.rate
    ))
}

/// Smallest power of two `T ≥ 1` whose tail bound is at most `target`. Past
/// `2^200` the last bound is returned as is and the caller sees it in the
/// error estimate.
pub fn choose_truncation(
    profiles: &[Profile],
    env: &TailEnvelope,
    target: f64,
) -> Result<TailBound> {
    let mut last = tail_bound_for(profiles, env, 1.0)?;
    for k in 0..=MAX_T_STAR_LOG2 {
        let tb = tail_bound_for(profiles, env, 2f64.powi(k))?;
        last = tb;
        if tb.bound <= target {
            break;
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail_closed_form() {
        let p = [Profile::Exponential { m: 2.0, omega: -1.0 }];
        let env = TailEnvelope::power(1.0, 0.0);
        let tb = tail_bound_for(&p, &env, 30.0).unwrap();
        assert!((tb.bound - 2.0 * (-30f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn bounded_semigroup_against_power_density_diverges() {
        let p = [Profile::Exponential { m: 1.0, omega: 0.0 }];
        let env = TailEnvelope::power(1.0, -0.5);
        assert!(matches!(
            tail_bound_for(&p, &env, 4.0),
            Err(Error::DivergentTail(_))
        ));
        let env = TailEnvelope::power(1.0, 0.0);
        assert!(tail_bound_for(&p, &env, 4.0).is_err());
    }

    #[test]
    fn algebraic_tail_matches_numeric() {
        let gamma_half = std::f64::consts::PI.sqrt();
        let p = [Profile::Algebraic { c: 3.0, delta: 2.0 }];
        let env = TailEnvelope::power(1.0 / gamma_half, -0.5);
        let t = 5.0;
        let tb = tail_bound_for(&p, &env, t).unwrap();
        // ∫_T^∞ t^{-2.5} dt = T^{-1.5}/1.5
        let closed = 3.0 * t.powf(-1.5) / 1.5 / gamma_half;
        assert!((tb.bound - closed).abs() < 1e-14 * closed);
        // midpoint sum on a log grid
        let mut numeric = 0.0;
        let n = 200_000;
        let (a, b) = (t.ln(), (1e8f64).ln());
        let h = (b - a) / n as f64;
        for i in 0..n {
            let s = (a + (i as f64 + 0.5) * h).exp();
            numeric += 3.0 * s.powf(-2.0) * s.powf(-0.5) / gamma_half * s * h;
        }
        assert!(numeric <= tb.bound && tb.bound - numeric < 1e-4 * closed);
    }

    #[test]
    fn bound_decreases_with_truncation_point() {
        let p = [Profile::Exponential { m: 1.5, omega: -0.2 }];
        let env = TailEnvelope::exponential(2.0, 1.5, 0.0);
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let b = tail_bound_for(&p, &env, 2f64.powi(k)).unwrap().bound;
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn truncation_meets_target() {
        let p = [Profile::Exponential { m: 1.0, omega: -0.5 }];
        let env = TailEnvelope::power(1.0, 0.0);
        let tb = choose_truncation(&p, &env, 1e-12).unwrap();
        assert!(tb.bound <= 1e-12);
        let half = tail_bound_for(&p, &env, tb.t_star / 2.0).unwrap();
        assert!(tb.t_star == 1.0 || half.bound > 1e-12);
    }
}
