//! Brute-force reference path for the closed forms.
//!
//! Nothing here reads the coefficient block of [`crate::transfer`]: channel
//! transfers come from solving the two coupled fluctuation equations
//!
//! ```text
//! (i w + gamma1 + rho1) d1 = chiE d3 + sqrt(2 gamma1) b1_in + sqrt(2 rho1) c1
//! (i w + gamma3 + rho3) d3 = -chiE d1 + sqrt(2 gamma3) b3_in + sqrt(2 rho3) c3
//! b3_out = sqrt(2 gamma3) d3 - b3_in
//! ```
//!
//! one input channel at a time, and correlation variances come from
//! assembling each observable as a row over ten independent unit-variance
//! input quadratures and taking its squared norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{nopa_transform, RotationAngle, SqueezeFactor};
use crate::transfer::{AnalysisFrequency, ChannelTransfer, SfgParams};

/// Number of real input coordinates.
pub const BASIS_LEN: usize = 10;

/// Ordered real input coordinates, each an independent unit-variance vacuum
/// quadrature. The first four feed the amplifier; the rest enter the
/// conversion cavity directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum InputChannelBasis {
    X01 = 0,
    Y01,
    X02,
    Y02,
    XC1,
    YC1,
    XB3In,
    YB3In,
    XC3,
    YC3,
}

impl InputChannelBasis {
    pub const ALL: [InputChannelBasis; BASIS_LEN] = [
        Self::X01,
        Self::Y01,
        Self::X02,
        Self::Y02,
        Self::XC1,
        Self::YC1,
        Self::XB3In,
        Self::YB3In,
        Self::XC3,
        Self::YC3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Linear map from the input basis to one output observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearResponseRow(pub [f64; BASIS_LEN]);

impl LinearResponseRow {
    pub fn zero() -> Self {
        Self([0.0; BASIS_LEN])
    }

    pub fn unit(c: InputChannelBasis) -> Self {
        let mut row = Self::zero();
        row.0[c.index()] = 1.0;
        row
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Variance of the observable; the basis covariance is the identity.
    pub fn variance(&self) -> f64 {
        self.dot(self)
    }

    /// `self + k * other`
    pub fn add_scaled(mut self, k: f64, other: &Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += k * b;
        }
        self
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for a in &mut self.0 {
            *a *= k;
        }
        self
    }
}

/// Which quadrature combination of the converted and retained beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// `X_b3out - g X_a2^theta`
    AmplitudeDifference,
    /// `Y_b3out + g Y_a2^theta`
    PhaseSum,
}

/// Solves the cavity equations for each unit input channel.
pub fn solve_channel_transfer(p: &SfgParams, f: AnalysisFrequency) -> Result<ChannelTransfer> {
    let iw = Complex64::new(0.0, f.omega_tau);
    let k = Complex64::new(p.chi_e, 0.0);
    // Rows: [a, -k; k, b] (d1, d3)^T = (u1, u3)^T
    let m = [[iw + p.gamma1 + p.rho1, -k], [k, iw + p.gamma3 + p.rho3]];

    let out = |u1: f64, u3: f64, direct: f64| -> Result<Complex64> {
        let [_, d3] = solve2(m, [Complex64::new(u1, 0.0), Complex64::new(u3, 0.0)])?;
        Ok((2.0 * p.gamma3).sqrt() * d3 - direct)
    };

    Ok(ChannelTransfer {
        t_b1: out((2.0 * p.gamma1).sqrt(), 0.0, 0.0)?,
        t_c1: out((2.0 * p.rho1).sqrt(), 0.0, 0.0)?,
        t_b3: out(0.0, (2.0 * p.gamma3).sqrt(), 1.0)?,
        t_c3: out(0.0, (2.0 * p.rho3).sqrt(), 0.0)?,
    })
}

/// Gaussian elimination with partial pivoting on a 2x2 complex system.
fn solve2(m: [[Complex64; 2]; 2], rhs: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() <= 1e-14 {
        return Err(Error::SingularSystem { det: det.norm() });
    }
    let (m, rhs) = if m[1][0].norm() > m[0][0].norm() {
        ([m[1], m[0]], [rhs[1], rhs[0]])
    } else {
        (m, rhs)
    };
    let factor = m[1][0] / m[0][0];
    let m11 = m[1][1] - factor * m[0][1];
    let r1 = rhs[1] - factor * rhs[0];
    let x1 = r1 / m11;
    let x0 = (rhs[0] - m[0][1] * x1) / m[0][0];
    Ok([x0, x1])
}

/// Quadrature rows of the two amplifier outputs `(X_a1, Y_a1, X_a2, Y_a2)`.
pub fn epr_rows(r: SqueezeFactor) -> [LinearResponseRow; 4] {
    let m = nopa_transform(r);
    let mut rows = [LinearResponseRow::zero(); 4];
    for (row, coeffs) in rows.iter_mut().zip(m.iter()) {
        row.0[..4].copy_from_slice(coeffs);
    }
    rows
}

/// Quadrature rows `(X, Y)` of `b3_out`, with `b1_in = a1`.
pub fn output_rows(
    t: &ChannelTransfer,
    r: SqueezeFactor,
) -> (LinearResponseRow, LinearResponseRow) {
    use InputChannelBasis as B;
    let [xa1, ya1, _, _] = epr_rows(r);
    let inputs = [
        (t.t_b1, xa1, ya1),
        (
            t.t_c1,
            LinearResponseRow::unit(B::XC1),
            LinearResponseRow::unit(B::YC1),
        ),
        (
            t.t_b3,
            LinearResponseRow::unit(B::XB3In),
            LinearResponseRow::unit(B::YB3In),
        ),
        (
            t.t_c3,
            LinearResponseRow::unit(B::XC3),
            LinearResponseRow::unit(B::YC3),
        ),
    ];
    let mut x = LinearResponseRow::zero();
    let mut y = LinearResponseRow::zero();
    // A complex amplitude factor t acts on (X, Y) as a rotation-dilation.
    for (tc, xin, yin) in inputs {
        x = x.add_scaled(tc.re, &xin).add_scaled(-tc.im, &yin);
        y = y.add_scaled(tc.im, &xin).add_scaled(tc.re, &yin);
    }
    (x, y)
}

/// Rows of the rotated retained beam `(X_a2^theta, Y_a2^theta)`.
pub fn rotated_a2_rows(
    r: SqueezeFactor,
    theta: RotationAngle,
) -> (LinearResponseRow, LinearResponseRow) {
    let [_, _, xa2, ya2] = epr_rows(r);
    let (s, c) = theta.radians().sin_cos();
    (
        xa2.scaled(c).add_scaled(s, &ya2),
        xa2.scaled(-s).add_scaled(c, &ya2),
    )
}

pub fn assemble_row(
    p: &SfgParams,
    r: SqueezeFactor,
    f: AnalysisFrequency,
    g: f64,
    theta: RotationAngle,
    observable: Observable,
) -> Result<LinearResponseRow> {
    let t = solve_channel_transfer(p, f)?;
    let (xo, yo) = output_rows(&t, r);
    let (xa, ya) = rotated_a2_rows(r, theta);
    Ok(match observable {
        Observable::AmplitudeDifference => xo.add_scaled(-g, &xa),
        Observable::PhaseSum => yo.add_scaled(g, &ya),
    })
}

/// Row of `X_b3out - g X_a2^theta`.
pub fn assemble_correlation_row(
    p: &SfgParams,
    r: SqueezeFactor,
    f: AnalysisFrequency,
    g: f64,
    theta: RotationAngle,
) -> Result<LinearResponseRow> {
    assemble_row(p, r, f, g, theta, Observable::AmplitudeDifference)
}

/// Minimizes a unimodal function on `[lo, hi]`. Returns `(argmin, min)`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // The bracket endpoints are never evaluated by the loop.
    [(lo, f(lo)), (hi, f(hi)), (x, fx)]
        .into_iter()
        .fold(
            (x, fx),
            |best, cand| if cand.1 < best.1 { cand } else { best },
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptimum {
    pub g: f64,
    pub theta: RotationAngle,
    pub s: f64,
    /// The correlation is identically zero, so `theta` is arbitrary.
    pub flat: bool,
}

pub const SCAN_GAIN_STEP: f64 = 0.01;
pub const SCAN_GAIN_MAX: f64 = 2.0;
pub const SCAN_THETA_STEP: f64 = PI / 360.0;

/// Grid search over `g in [0, 2]` and `theta in (-pi, pi]`, refined by
/// alternating golden-section line searches.
pub fn scan_optimum(p: &SfgParams, r: SqueezeFactor, f: AnalysisFrequency) -> Result<ScanOptimum> {
    let t = solve_channel_transfer(p, f)?;
    let (u, _) = output_rows(&t, r);
    let [_, _, x, y] = epr_rows(r);
    // Variance of u - g (cos t x + sin t y) from its Gram entries.
    let (uu, ux, uy) = (u.variance(), u.dot(&x), u.dot(&y));
    let (xx, xy, yy) = (x.variance(), x.dot(&y), y.variance());
    let var = |g: f64, th: f64| {
        let (s, c) = th.sin_cos();
        uu - 2.0 * g * (c * ux + s * uy) + g * g * (c * c * xx + 2.0 * c * s * xy + s * s * yy)
    };

    if ux.hypot(uy) <= 1e-14 * uu.max(1.0) {
        return Ok(ScanOptimum {
            g: 0.0,
            theta: RotationAngle::zero(),
            s: uu,
            flat: true,
        });
    }

    let n_g = (SCAN_GAIN_MAX / SCAN_GAIN_STEP).round() as usize;
    let n_theta = (2.0 * PI / SCAN_THETA_STEP).round() as usize;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for j in 1..=n_theta {
        let th = -PI + j as f64 * SCAN_THETA_STEP;
        // g = 0 is flat in theta, so it cannot pick the phase; the g
        // refinement bracket still reaches it.
        for i in 1..=n_g {
            let g = i as f64 * SCAN_GAIN_STEP;
            let v = var(g, th);
            if v < best.2 {
                best = (g, th, v);
            }
        }
    }

    let (mut g, mut th, mut s) = best;
    for _ in 0..200 {
        let (g_new, _) = golden_section_min(
            |gg| var(gg, th),
            (g - 2.0 * SCAN_GAIN_STEP).max(0.0),
            g + 2.0 * SCAN_GAIN_STEP,
            1e-12,
        );
        let (th_new, s_new) = golden_section_min(
            |tt| var(g_new, tt),
            th - 2.0 * SCAN_THETA_STEP,
            th + 2.0 * SCAN_THETA_STEP,
            1e-12,
        );
        let done = (g_new - g).abs() < 1e-13 && (th_new - th).abs() < 1e-13;
        g = g_new;
        th = th_new;
        s = s_new.min(s);
        if done {
            break;
        }
    }
    Ok(ScanOptimum {
        g,
        theta: RotationAngle::new(th)?,
        s: var(g, th),
        flat: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_freq() -> (SfgParams, AnalysisFrequency) {
        (SfgParams::standard(), AnalysisFrequency::zero())
    }

    #[test]
    fn standard_point_transfer() {
        let (p, f) = standard_freq();
        let t = solve_channel_transfer(&p, f).unwrap();
        assert!((t.t_b1.re + 0.904977).abs() < 1e-6);
        assert!((t.t_b3.re + 0.004525).abs() < 1e-6);
        assert!((t.t_c3.re - 0.314797).abs() < 1e-6);
        assert!((t.t_c1.re + 0.286179).abs() < 1e-6);
        assert!((t.total_power() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_pump_blocks_signal_exactly() {
        let p = SfgParams::standard().with_pump(0.0).unwrap();
        let t = solve_channel_transfer(&p, AnalysisFrequency::new(0.8).unwrap()).unwrap();
        assert_eq!(t.t_b1, Complex64::new(0.0, 0.0));
        assert_eq!(t.t_c1, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_rows_have_unit_variance() {
        let (p, f) = standard_freq();
        let r = SqueezeFactor::vacuum();
        for obs in [Observable::AmplitudeDifference, Observable::PhaseSum] {
            let row = assemble_row(&p, r, f, 0.0, RotationAngle::zero(), obs).unwrap();
            assert!((row.variance() - 1.0).abs() < 1e-12);
            // No weight on the retained beam's own inputs through the -g term.
            assert_eq!(row.0[InputChannelBasis::X02.index()], 0.0);
        }
    }

    #[test]
    fn optimal_row_variance_at_standard_point() {
        let (p, f) = standard_freq();
        let r = SqueezeFactor::new(0.6).unwrap();
        let g = 0.818984f64.sqrt() * 1.2f64.tanh();
        let theta = RotationAngle::new(PI).unwrap();
        let x = assemble_correlation_row(&p, r, f, g, theta)
            .unwrap()
            .variance();
        let y = assemble_row(&p, r, f, g, theta, Observable::PhaseSum)
            .unwrap()
            .variance();
        assert!((x - 0.633327).abs() < 1e-5);
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn scan_standard_point() {
        let (p, f) = standard_freq();
        let opt = scan_optimum(&p, SqueezeFactor::new(0.6).unwrap(), f).unwrap();
        assert!(!opt.flat);
        assert!((opt.g - 0.754438).abs() < 1e-3);
        assert!((opt.theta.radians().abs() - PI).abs() < 1e-3);
        assert!((opt.s - 0.633327).abs() < 1e-5);
    }

    #[test]
    fn scan_vacuum_is_flat() {
        let (p, f) = standard_freq();
        let opt = scan_optimum(&p, SqueezeFactor::vacuum(), f).unwrap();
        assert!(opt.flat);
        assert_eq!(opt.g, 0.0);
        assert!((opt.s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scan_lossless_point() {
        let p = SfgParams::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let opt = scan_optimum(
            &p,
            SqueezeFactor::new(1.0).unwrap(),
            AnalysisFrequency::zero(),
        )
        .unwrap();
        assert!((opt.s - 0.265802).abs() < 1e-6);
    }

    #[test]
    fn singular_corner() {
        // Zero damping and zero pump at zero frequency.
        let p = SfgParams {
            gamma1: 0.0,
            gamma3: 0.0,
            rho1: 0.0,
            rho3: 0.0,
            chi_e: 0.0,
        };
        let err = solve_channel_transfer(&p, AnalysisFrequency::zero()).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
        // Minimum at the boundary.
        let (x, _) = golden_section_min(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 0.0);
    }
}
