//! Correlation between the converted beam `b3_out` and the retained beam `a2`.
//!
//! The amplitude-difference combination `X_b3out - g X_a2^theta` and the
//! phase-sum combination `Y_b3out + g Y_a2^theta` have the same variance
//!
//! ```text
//! S(g, theta) = eta cosh 2r - 2 sqrt(eta) g cos(phi + theta) sinh 2r + g^2 cosh 2r + L
//! ```
//!
//! where `eta = 4 (chi E)^2 gamma1 gamma3 / R` is the conversion efficiency,
//! `phi = atan2(B, A)` the conversion phase and
//! `L = (C^2 + D^2 + Gc^2 + H^2 + M^2 + N^2) / R^2` the vacuum admixture.
//! All variances are in shot-noise units, so `S < 1` means the pair is
//! quieter than two independent vacua would allow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{RotationAngle, SqueezeFactor};
use crate::transfer::{transfer_coeffs, AnalysisFrequency, SfgParams};

/// Round-off allowance when comparing a Duan sum against the separable bound 2.
pub const INSEPARABILITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub params: SfgParams,
    pub r: SqueezeFactor,
    pub freq: AnalysisFrequency,
}

impl OperatingPoint {
    pub fn new(params: SfgParams, r: SqueezeFactor, freq: AnalysisFrequency) -> Self {
        Self { params, r, freq }
    }

    /// Builds a point from `gamma1`-normalized ratios and the normalized
    /// analysis frequency `Omega`.
    pub fn from_ratios(
        gamma3: f64,
        rho1: f64,
        rho3: f64,
        pump: f64,
        r: f64,
        omega: f64,
    ) -> Result<Self> {
        let params = SfgParams::from_ratios(gamma3, rho1, rho3, pump)?;
        let freq = AnalysisFrequency::from_normalized(omega, &params)?;
        Ok(Self::new(params, SqueezeFactor::new(r)?, freq))
    }

    /// Standard cavity at `Omega = 0` with the given squeezing.
    pub fn standard(r: f64) -> Result<Self> {
        Ok(Self::new(
            SfgParams::standard(),
            SqueezeFactor::new(r)?,
            AnalysisFrequency::zero(),
        ))
    }

    fn terms(&self) -> Terms {
        Terms::new(self)
    }
}

/// Quantities shared by every expression in this module.
struct Terms {
    eta: f64,
    sqrt_eta: f64,
    phi: f64,
    loss: f64,
    cosh2r: f64,
    sinh2r: f64,
}

impl Terms {
    fn new(op: &OperatingPoint) -> Self {
        let p = &op.params;
        let coeffs = transfer_coeffs(p, op.freq);
        let coupling = 2.0 * p.chi_e * (p.gamma1 * p.gamma3).sqrt();
        Terms {
            eta: coupling * coupling / coeffs.r,
            sqrt_eta: coupling / coeffs.r.sqrt(),
            phi: coeffs.b.atan2(coeffs.a),
            loss: coeffs.loss_sum() / (coeffs.r * coeffs.r),
            cosh2r: op.r.cosh2r(),
            sinh2r: op.r.sinh2r(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub s_min: f64,
    pub g_opt: f64,
    pub theta_opt: RotationAngle,
    pub eta: f64,
    pub duan_sum: f64,
    pub s_min_db: f64,
    /// Set when the pump is off; the conversion phase is then undefined and
    /// `g_opt = 0`, `theta_opt = 0`, `s_min = 1`.
    pub degenerate: bool,
}

impl CorrelationResult {
    /// `duan_sum < 2`. For these combinations with `g != 1` the strict Duan
    /// bound is `1 + g^2`, which is tighter when `g < 1`, so this verdict can
    /// be optimistic at weak pump.
    pub fn inseparable(&self) -> bool {
        self.duan_sum < 2.0 - INSEPARABILITY_MARGIN
    }
}

/// Variance of `X_b3out - g X_a2^theta` (equal to that of `Y_b3out + g Y_a2^theta`).
pub fn correlation_variance(op: &OperatingPoint, g: f64, theta: RotationAngle) -> f64 {
    let t = op.terms();
    t.eta * t.cosh2r - 2.0 * t.sqrt_eta * g * (t.phi + theta.radians()).cos() * t.sinh2r
        + g * g * t.cosh2r
        + t.loss
}

/// Gain minimizing [`correlation_variance`] at fixed `theta`:
/// `sqrt(eta) cos(phi + theta) tanh 2r`.
pub fn optimal_gain(op: &OperatingPoint, theta: RotationAngle) -> f64 {
    let t = op.terms();
    t.sqrt_eta * (t.phi + theta.radians()).cos() * op.r.tanh2r()
}

/// Correlation variance at the optimal gain for a given `theta`.
///
/// Written as `eta [(1 - c^2) cosh 2r + c^2 / cosh 2r] + L` with
/// `c = cos(theta + phi)`, which avoids the `cosh - sinh^2/cosh` cancellation
/// at large `r`.
pub fn variance_at_optimal_gain(op: &OperatingPoint, theta: RotationAngle) -> f64 {
    let t = op.terms();
    let c2 = (t.phi + theta.radians()).cos().powi(2);
    t.eta * ((1.0 - c2) * t.cosh2r + c2 / t.cosh2r) + t.loss
}

/// Jointly optimal gain and phase, `theta_opt = -phi`.
pub fn s_min(op: &OperatingPoint) -> CorrelationResult {
    let t = op.terms();
    if op.params.chi_e == 0.0 {
        return CorrelationResult {
            s_min: 1.0,
            g_opt: 0.0,
            theta_opt: RotationAngle::zero(),
            eta: 0.0,
            duan_sum: 2.0,
            s_min_db: 0.0,
            degenerate: true,
        };
    }
    let theta_opt = -RotationAngle::new(t.phi).expect("atan2 is finite");
    let s = t.eta / t.cosh2r + t.loss;
    CorrelationResult {
        s_min: s,
        g_opt: t.sqrt_eta * op.r.tanh2r(),
        theta_opt,
        eta: t.eta,
        duan_sum: 2.0 * s,
        s_min_db: 10.0 * s.log10(),
        degenerate: false,
    }
}

/// Duan sum of the converted pair and whether it falls below 2.
pub fn is_inseparable(op: &OperatingPoint) -> (bool, f64) {
    let res = s_min(op);
    (res.inseparable(), res.duan_sum)
}

/// Duan sum of the source pair `(a1, a2)` at the optimal gain: `2 / cosh 2r`.
pub fn source_duan_sum(r: SqueezeFactor) -> f64 {
    2.0 * crate::quadrature::epr_combination_variance(r, crate::quadrature::epr_optimal_gain(r))
}

pub fn to_decibel(s: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::invalid(
            "variance",
            format!("must be positive, got {s}"),
        ));
    }
    Ok(10.0 * s.log10())
}

/// `(eta, L)`: the converted signal weight and the vacuum admixture.
pub fn efficiency_and_loss(op: &OperatingPoint) -> (f64, f64) {
    let t = op.terms();
    (t.eta, t.loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::golden_section_min;
    use std::f64::consts::PI;

    fn standard(r: f64) -> OperatingPoint {
        OperatingPoint::standard(r).unwrap()
    }

    #[test]
    fn vacuum_input_gives_unit_variance() {
        let op = standard(0.0);
        for theta in [-2.0, 0.0, 1.0, PI] {
            let s = correlation_variance(&op, 0.0, RotationAngle::new(theta).unwrap());
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn standard_point_at_r_0_6() {
        let op = standard(0.6);
        let res = s_min(&op);
        assert!((res.s_min - 0.633327).abs() < 5e-6, "{}", res.s_min);
        assert!((res.s_min_db + 1.98).abs() < 0.01);
        assert_eq!(res.theta_opt.radians(), PI);
        assert!((res.g_opt - 0.754438).abs() < 1e-6);
        let s = correlation_variance(&op, res.g_opt, res.theta_opt);
        assert!((s - res.s_min).abs() < 1e-14);
        assert!((res.duan_sum - 1.266654).abs() < 1e-5);
        assert!(res.inseparable());
    }

    #[test]
    fn quarter_turn_kills_cross_term() {
        let op = standard(0.6);
        let res = s_min(&op);
        let theta = RotationAngle::new(res.theta_opt.radians() + PI / 2.0).unwrap();
        let g = 0.4;
        let ch = 1.2f64.cosh();
        let expected = res.eta * ch + g * g * ch + (1.0 - res.eta);
        assert!((correlation_variance(&op, g, theta) - expected).abs() < 1e-12);
        assert!(optimal_gain(&op, theta).abs() < 1e-15);
    }

    #[test]
    fn optimal_gain_minimizes() {
        let op = standard(0.6);
        let theta = RotationAngle::new(PI).unwrap();
        let g = optimal_gain(&op, theta);
        assert!((g - 0.754438).abs() < 1e-6);
        let (g_scan, _) =
            golden_section_min(|g| correlation_variance(&op, g, theta), 0.0, 2.0, 1e-12);
        assert!((g - g_scan).abs() < 1e-8);
        assert_eq!(optimal_gain(&standard(0.0), theta), 0.0);
    }

    #[test]
    fn lossless_point_reproduces_source() {
        for r in [0.0, 0.5, 1.0, 2.0] {
            let op = OperatingPoint::from_ratios(1.0, 0.0, 0.0, 1.0, r, 0.0).unwrap();
            let res = s_min(&op);
            let sq = SqueezeFactor::new(r).unwrap();
            assert!((res.s_min - 1.0 / sq.cosh2r()).abs() < 1e-12);
            assert!((res.g_opt - crate::quadrature::epr_optimal_gain(sq)).abs() < 1e-12);
            assert!((res.duan_sum - source_duan_sum(sq)).abs() < 1e-12);
        }
    }

    #[test]
    fn lossless_unit_gain_is_not_the_optimum() {
        // Unit gain at the ideal point gives 2 e^{-2r}, worse than 1/cosh 2r.
        let r = 1.0;
        let op = OperatingPoint::from_ratios(1.0, 0.0, 0.0, 1.0, r, 0.0).unwrap();
        let theta = s_min(&op).theta_opt;
        let s = correlation_variance(&op, 1.0, theta);
        assert!((s - 2.0 * (-2.0 * r).exp()).abs() < 1e-12);
        assert!(s > s_min(&op).s_min);
    }

    #[test]
    fn strong_squeezing_example() {
        let res = s_min(&standard(2.0));
        let expected = 0.818984 / 4f64.cosh() + 0.181016;
        assert!((res.s_min - expected).abs() < 1e-6);
        assert!((res.s_min - 0.211).abs() < 1e-3);
    }

    #[test]
    fn eq19_form_matches_quadratic_minimum() {
        let op = OperatingPoint::from_ratios(0.7, 0.05, 0.2, 0.8, 1.1, 0.9).unwrap();
        for theta in [-3.0, -1.0, 0.2, 2.0] {
            let th = RotationAngle::new(theta).unwrap();
            let g = optimal_gain(&op, th);
            let a = correlation_variance(&op, g, th);
            let b = variance_at_optimal_gain(&op, th);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_pump() {
        let op = OperatingPoint::from_ratios(1.0, 0.1, 0.1, 0.0, 0.6, 0.0).unwrap();
        let res = s_min(&op);
        assert!(res.degenerate);
        assert_eq!(
            (res.s_min, res.g_opt, res.theta_opt.radians()),
            (1.0, 0.0, 0.0)
        );
        assert!(!res.inseparable());
    }

    #[test]
    fn duan_verdicts() {
        let (ok, sum) = is_inseparable(&standard(0.0));
        assert!(!ok);
        assert!((sum - 2.0).abs() < 1e-12);
        let (ok, sum) = is_inseparable(&standard(0.6));
        assert!(ok);
        assert!((sum - 1.267).abs() < 1e-3);
    }

    #[test]
    fn decibels() {
        assert_eq!(to_decibel(1.0).unwrap(), 0.0);
        assert!((to_decibel(0.633327).unwrap() + 1.984).abs() < 1e-3);
        assert!((to_decibel(0.301194).unwrap() + 5.212).abs() < 1e-3);
        assert!(to_decibel(0.0).is_err());
        assert!(to_decibel(-1.0).is_err());
        assert!(to_decibel(f64::NAN).is_err());
    }
}
