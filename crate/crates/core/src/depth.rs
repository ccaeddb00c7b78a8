//! Depth selection from the z-score bound curves.
//!
//! With `z⁰ = (μ₂−μ₁)/(2σ)` and the curves `z_lower(n)`, `z_upper(n)` for
//! `n = 1..=H`:
//!
//! * if every `z_upper(n) < z⁰`, no convolution helps;
//! * otherwise `n̂` is the first depth after which `z_upper` stays at or
//!   below `z⁰` through the horizon, and both `n₀` and `n*` lie in `[0, n̂]`;
//! * if additionally some `z_lower(n) ≥ z⁰`, `n*` is bracketed around the
//!   argmax of `z_lower` by the depths where `z_upper` falls to that peak.

use serde::Serialize;

use crate::csbm::{CsbmParams, LogBase};
use crate::error::{Error, Result};
use crate::theory::theory_bounds_in;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    AllBelow,
    UpperCrossOnly,
    LowerCrossToo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthPrediction {
    pub scenario: Scenario,
    pub n0_interval: [usize; 2],
    pub nstar_interval: [usize; 2],
    /// Argmax of `z_lower` (first on ties); only in [`Scenario::LowerCrossToo`].
    pub nstar_floor: Option<usize>,
    pub horizon: usize,
    pub horizon_flags: HorizonFlags,
    /// Depths at which `z_lower > z_upper`, i.e. the variance bounds cross.
    pub crossed_depths: Vec<usize>,
    pub z0: f64,
    /// `z_lower(n)` for `n = 0..=H`.
    pub z_lower: Vec<f64>,
    /// `z_upper(n)` for `n = 0..=H`.
    pub z_upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct HorizonFlags {
    /// `z_upper(H) > z⁰`: the upper curve never settles below the threshold.
    pub horizon_exhausted: bool,
    /// No `n ≤ n*_floor` has `z_upper(n) ≤ z_lower(n*_floor)`; left end set to 0.
    pub nstar_left_fallback: bool,
    /// No `n ≥ n*_floor` has `z_upper(n) ≤ z_lower(n*_floor)`; right end set to H.
    pub nstar_right_fallback: bool,
    /// `z_lower` peaks at the horizon, so a longer horizon may move `n*`.
    pub nstar_floor_at_horizon: bool,
}

pub fn predict_depth(params: &CsbmParams, horizon: usize) -> Result<DepthPrediction> {
    predict_depth_in(params, horizon, LogBase::Natural)
}

pub fn predict_depth_in(params: &CsbmParams, horizon: usize, base: LogBase) -> Result<DepthPrediction> {
    params.validate()?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let z0 = params.mean_gap() / (2.0 * params.sigma());
    let (zl, zu): (Vec<f64>, Vec<f64>) = (0..=horizon)
        .map(|n| {
            let b = theory_bounds_in(params, n, base);
            (b.z_lower, b.z_upper)
        })
        .unzip();
    predict_from_curves(z0, &zl, &zu)
}

/// Apply the selection rule to curves indexed by depth `0..=H`. Index 0 is
/// carried for reporting only.
pub fn predict_from_curves(z0: f64, z_lower: &[f64], z_upper: &[f64]) -> Result<DepthPrediction> {
    if z_lower.len() != z_upper.len() || z_lower.len() < 2 {
        return Err(Error::InvalidParameter(
            "curves must have equal length covering depths 0..=H with H >= 1".into(),
        ));
    }
    let horizon = z_lower.len() - 1;
    let depths = 1..=horizon;
    let crossed_depths: Vec<usize> = depths.clone().filter(|&n| z_lower[n] > z_upper[n]).collect();
    let mut out = DepthPrediction {
        scenario: Scenario::AllBelow,
        n0_interval: [0, 0],
        nstar_interval: [0, 0],
        nstar_floor: None,
        horizon,
        horizon_flags: HorizonFlags::default(),
        crossed_depths,
        z0,
        z_lower: z_lower.to_vec(),
        z_upper: z_upper.to_vec(),
    };

    if depths.clone().all(|n| z_upper[n] < z0) {
        return Ok(out);
    }

    // First depth from which z_upper stays at or below z0 through H.
    let mut n_hat = None;
    for n in depths.clone().rev() {
        if z_upper[n] <= z0 {
            n_hat = Some(n);
        } else {
            break;
        }
    }
    let n_hat = n_hat.unwrap_or_else(|| {
        out.horizon_flags.horizon_exhausted = true;
        horizon
    });
    out.n0_interval = [0, n_hat];

    if depths.clone().all(|n| z_lower[n] < z0) {
        out.scenario = Scenario::UpperCrossOnly;
        out.nstar_interval = [0, n_hat];
        return Ok(out);
    }

    out.scenario = Scenario::LowerCrossToo;
    let mut floor = 1;
    for n in depths.clone() {
        if z_lower[n] > z_lower[floor] {
            floor = n;
        }
    }
    let peak = z_lower[floor];
    let left = (1..=floor).rev().find(|&n| z_upper[n] <= peak);
    let right = (floor..=horizon).find(|&n| z_upper[n] <= peak);
    out.horizon_flags.nstar_left_fallback = left.is_none();
    out.horizon_flags.nstar_right_fallback = right.is_none();
    out.horizon_flags.nstar_floor_at_horizon = floor == horizon;
    out.nstar_interval = [left.unwrap_or(0), right.unwrap_or(horizon)];
    out.nstar_floor = Some(floor);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_model_needs_no_convolution() {
        let p = CsbmParams::new(2000, 0.0038, 0.0038).unwrap();
        let d = predict_depth(&p, 30).unwrap();
        assert_eq!(d.scenario, Scenario::AllBelow);
        assert_eq!((d.n0_interval, d.nstar_interval), ([0, 0], [0, 0]));
    }

    #[test]
    fn default_model() {
        let d = predict_depth(&CsbmParams::default(), 30).unwrap();
        assert_eq!(d.scenario, Scenario::LowerCrossToo);
        assert_eq!(d.nstar_floor, Some(6));
        assert_eq!(d.nstar_interval, [6, 6]);
        assert_eq!(d.n0_interval, [0, 6]);
        assert_eq!(d.horizon_flags, HorizonFlags::default());
        assert_eq!(d.crossed_depths.first(), Some(&5));
    }

    #[test]
    fn short_horizon_is_flagged() {
        let d = predict_depth(&CsbmParams::default(), 1).unwrap();
        assert!(d.horizon_flags.horizon_exhausted);
        assert_eq!(d.n0_interval, [0, 1]);
        let d = predict_depth(&CsbmParams::default(), 4).unwrap();
        assert!(d.horizon_flags.nstar_floor_at_horizon);
    }

    #[test]
    fn noise_level_does_not_change_the_prediction() {
        let base = predict_depth(&CsbmParams::default(), 30).unwrap();
        let clean = CsbmParams::default().with_sigma2(1e-6).unwrap();
        let d = predict_depth(&clean, 30).unwrap();
        assert_eq!(d.scenario, base.scenario);
        assert_eq!(d.nstar_interval, base.nstar_interval);
        assert!((d.z0 - 250.0).abs() < 1e-9);
    }

    #[test]
    fn synthetic_curves() {
        // Upper curve rises above z0 then settles; lower never reaches z0.
        let zl = [1.0, 0.5, 0.6, 0.4, 0.2];
        let zu = [1.0, 1.5, 1.2, 0.9, 0.3];
        let d = predict_from_curves(1.0, &zl, &zu).unwrap();
        assert_eq!(d.scenario, Scenario::UpperCrossOnly);
        assert_eq!(d.n0_interval, [0, 3]);
        // Lower curve crosses; upper never falls to the lower peak on the left.
        let zl = [1.0, 1.1, 1.3, 0.9, 0.2];
        let zu = [1.0, 2.0, 1.8, 1.25, 1.4];
        let d = predict_from_curves(1.0, &zl, &zu).unwrap();
        assert_eq!(d.scenario, Scenario::LowerCrossToo);
        assert_eq!(d.nstar_floor, Some(2));
        assert_eq!(d.nstar_interval, [0, 3]);
        assert!(d.horizon_flags.nstar_left_fallback);
        assert!(d.horizon_flags.horizon_exhausted);
    }
}
