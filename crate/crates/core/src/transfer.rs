//! Closed-form frequency response of the sum-frequency cavity.
//!
//! With an undepleted pump of amplitude `E`, the signal mode `b1` and the
//! sum-frequency mode `b3` form a linear two-mode system. Each input channel
//! (signal `b1_in`, signal loss `c1`, sum-frequency vacuum `b3_in`, sum-frequency
//! loss `c3`) reaches `b3_out` through a complex amplitude transfer
//! `(real - i imag) / R`, written out as the coefficient block below.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::RotationAngle;

/// Single-pass cavity coefficients and pump parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SfgParams {
    /// Coupler transmission for the signal at `w1`.
    pub gamma1: f64,
    /// Coupler transmission for the sum-frequency output at `w3`.
    pub gamma3: f64,
    /// Extra intracavity loss at `w1`.
    pub rho1: f64,
    /// Extra intracavity loss at `w3`.
    pub rho3: f64,
    /// Pump parameter `chi * E`.
    pub chi_e: f64,
}

impl SfgParams {
    pub fn new(gamma1: f64, gamma3: f64, rho1: f64, rho3: f64, chi_e: f64) -> Result<Self> {
        let check = |name, v: f64, strict: bool| {
            if !v.is_finite() {
                Err(Error::invalid(name, "must be finite"))
            } else if strict && v <= 0.0 {
                Err(Error::invalid(name, format!("must be > 0, got {v}")))
            } else if v < 0.0 {
                Err(Error::invalid(name, format!("must be >= 0, got {v}")))
            } else {
                Ok(())
            }
        };
        check("gamma1", gamma1, true)?;
        check("gamma3", gamma3, true)?;
        check("rho1", rho1, false)?;
        check("rho3", rho3, false)?;
        check("chi_e", chi_e, false)?;
        Ok(Self {
            gamma1,
            gamma3,
            rho1,
            rho3,
            chi_e,
        })
    }

    /// Parameters given as ratios to `gamma1`, which is set to 1.
    pub fn from_ratios(gamma3: f64, rho1: f64, rho3: f64, pump: f64) -> Result<Self> {
        Self::new(1.0, gamma3, rho1, rho3, pump)
    }

    /// The reference cavity used as the default everywhere:
    /// `gamma3/gamma1 = 1`, `rho/gamma1 = 0.1`, `chi E/gamma1 = 1`.
    pub fn standard() -> Self {
        Self {
            gamma1: 1.0,
            gamma3: 1.0,
            rho1: 0.1,
            rho3: 0.1,
            chi_e: 1.0,
        }
    }

    pub fn with_pump(self, chi_e: f64) -> Result<Self> {
        Self::new(self.gamma1, self.gamma3, self.rho1, self.rho3, chi_e)
    }

    /// Total signal damping `gamma1 + rho1`.
    pub fn kappa1(&self) -> f64 {
        self.gamma1 + self.rho1
    }

    /// Total sum-frequency damping `gamma3 + rho3`.
    pub fn kappa3(&self) -> f64 {
        self.gamma3 + self.rho3
    }

    /// The model linearizes around small single-pass coefficients; this flags
    /// parameter sets where any coefficient exceeds 0.5.
    pub fn outside_small_loss_regime(&self) -> bool {
        [self.gamma1, self.gamma3, self.rho1, self.rho3, self.chi_e]
            .iter()
            .any(|&v| v > 0.5)
    }
}

/// Analysis frequency as the dimensionless product `omega * tau`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AnalysisFrequency {
    pub omega_tau: f64,
}

impl AnalysisFrequency {
    pub fn new(omega_tau: f64) -> Result<Self> {
        if !omega_tau.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        Ok(Self { omega_tau })
    }

    /// From the normalized frequency `Omega = omega tau / gamma1`.
    pub fn from_normalized(omega: f64, params: &SfgParams) -> Result<Self> {
        Self::new(omega * params.gamma1)
    }

    pub fn zero() -> Self {
        Self { omega_tau: 0.0 }
    }

    pub fn normalized(&self, params: &SfgParams) -> f64 {
        self.omega_tau / params.gamma1
    }
}

/// The nine real coefficients of the quadrature transfer onto `b3_out`.
///
/// `gc` is the loss-channel coefficient usually written `G`; it is renamed so
/// it cannot be confused with the EPR gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferCoeffs {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub gc: f64,
    pub h: f64,
    pub m: f64,
    pub n: f64,
}

impl TransferCoeffs {
    /// `C^2 + D^2 + Gc^2 + H^2 + M^2 + N^2`, the weight of the vacuum channels
    /// that do not carry the EPR signal.
    pub fn loss_sum(&self) -> f64 {
        self.c * self.c
            + self.d * self.d
            + self.gc * self.gc
            + self.h * self.h
            + self.m * self.m
            + self.n * self.n
    }

    /// `A^2 + B^2`.
    pub fn signal_sum(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    /// `|sum of squares - R^2| / R^2`; vanishes for a passive cavity.
    pub fn sum_rule_residual(&self) -> f64 {
        let r2 = self.r * self.r;
        ((self.signal_sum() + self.loss_sum()) - r2).abs() / r2
    }
}

/// Complex amplitude transfer from each input channel onto `b3_out`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelTransfer {
    pub t_b1: Complex64,
    pub t_c1: Complex64,
    pub t_b3: Complex64,
    pub t_c3: Complex64,
}

impl ChannelTransfer {
    pub fn from_coeffs(k: &TransferCoeffs) -> Self {
        let t = |re: f64, im: f64| Complex64::new(re / k.r, -im / k.r);
        Self {
            t_b1: t(k.a, k.b),
            t_c1: t(k.m, k.n),
            t_b3: t(k.c, k.d),
            t_c3: t(k.gc, k.h),
        }
    }

    /// `sum |t|^2`; equal to one for a passive, vacuum-preserving cavity.
    pub fn total_power(&self) -> f64 {
        self.t_b1.norm_sqr() + self.t_c1.norm_sqr() + self.t_b3.norm_sqr() + self.t_c3.norm_sqr()
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.t_b1, self.t_c1, self.t_b3, self.t_c3]
    }
}

pub fn transfer_coeffs(p: &SfgParams, f: AnalysisFrequency) -> TransferCoeffs {
    let w = f.omega_tau;
    let w2 = w * w;
    let k = p.chi_e;
    let k2 = k * k;
    let s1 = p.kappa1();
    let s3 = p.kappa3();
    let total = s1 + s3;
    let imbalance = p.gamma3 - p.rho3 - s1;

    // Real and imaginary parts of (i w + s1)(i w + s3) + k^2.
    let re_den = s1 * s3 - w2 + k2;
    let im_den = w * total;
    // Real part of (i w + s1)(-i w + gamma3 - rho3) - k^2.
    let re_num = s1 * (p.gamma3 - p.rho3) + w2 - k2;

    let signal = -2.0 * k * (p.gamma1 * p.gamma3).sqrt();
    let c1_loss = -2.0 * k * (p.rho1 * p.gamma3).sqrt();
    let c3_loss = 2.0 * (p.gamma3 * p.rho3).sqrt();

    TransferCoeffs {
        r: re_den * re_den + im_den * im_den,
        a: signal * re_den,
        b: signal * im_den,
        c: re_num * re_den + w2 * total * imbalance,
        d: w * re_num * total - w * re_den * imbalance,
        gc: c3_loss * ((s1 * s3 + k2) * s1 + w2 * s3),
        h: c3_loss * w * (s1 * s1 + w2 - k2),
        m: c1_loss * re_den,
        n: c1_loss * im_den,
    }
}

pub fn channel_transfer(p: &SfgParams, f: AnalysisFrequency) -> ChannelTransfer {
    ChannelTransfer::from_coeffs(&transfer_coeffs(p, f))
}

/// Fraction of signal fluctuation power carried into `b3_out`: `4 (chi E)^2 gamma1 gamma3 / R`.
pub fn conversion_efficiency(p: &SfgParams, f: AnalysisFrequency) -> f64 {
    let k = transfer_coeffs(p, f);
    4.0 * p.chi_e * p.chi_e * p.gamma1 * p.gamma3 / k.r
}

/// Phase `phi = atan2(B, A)` of the signal transfer; `t_b1 = sqrt(eta) e^{-i phi}`.
pub fn rotation_angle_phi(p: &SfgParams, f: AnalysisFrequency) -> Result<RotationAngle> {
    if p.chi_e == 0.0 {
        return Err(Error::DegeneratePump);
    }
    let k = transfer_coeffs(p, f);
    RotationAngle::new(k.b.atan2(k.a))
}
