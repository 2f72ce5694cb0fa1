//! Randomized consistency batteries comparing the closed forms against the
//! linear-solve oracle.
//!
//! Each battery reports the largest error over all draws together with the
//! draw that produced it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{correlation_variance, s_min, OperatingPoint};
use crate::oracle::{assemble_row, scan_optimum, solve_channel_transfer, Observable};
use crate::quadrature::{RotationAngle, SqueezeFactor};
use crate::transfer::{transfer_coeffs, AnalysisFrequency, ChannelTransfer, SfgParams};

pub const DEFAULT_DRAWS: usize = 1000;
pub const DEFAULT_SEED: u64 = 7;
/// Perturbation added to the `A` coefficient in fault-injection mode.
pub const INJECTED_FAULT: f64 = 1e-6;

/// Gains below this leave `theta_opt` too weakly determined to locate.
const LOCATION_MIN_GAIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Draw {
    pub index: usize,
    pub gamma3: f64,
    pub rho1: f64,
    pub rho3: f64,
    pub pump: f64,
    pub omega_tau: f64,
    pub r: f64,
    pub g: f64,
    pub theta: f64,
}

impl Draw {
    fn sample(index: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            index,
            gamma3: rng.random_range(0.2..=2.0),
            rho1: rng.random_range(0.01..=0.5),
            rho3: rng.random_range(0.01..=0.5),
            pump: rng.random_range(0.0..=2.0),
            omega_tau: rng.random_range(-3.0..=3.0),
            r: rng.random_range(0.0..=3.0),
            g: rng.random_range(0.0..=2.0),
            theta: rng.random_range(-PI..PI),
        }
    }

    fn params(&self) -> Result<SfgParams> {
        SfgParams::from_ratios(self.gamma3, self.rho1, self.rho3, self.pump)
    }

    fn freq(&self) -> Result<AnalysisFrequency> {
        AnalysisFrequency::new(self.omega_tau)
    }

    fn point(&self) -> Result<OperatingPoint> {
        Ok(OperatingPoint::new(
            self.params()?,
            SqueezeFactor::new(self.r)?,
            self.freq()?,
        ))
    }
}

/// Reproducible parameter draws.
pub fn draws(count: usize, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| Draw::sample(i, &mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub draws: usize,
    pub seed: u64,
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            draws: DEFAULT_DRAWS,
            seed: DEFAULT_SEED,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryResult {
    pub battery: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Draw with the largest error.
    pub worst: Option<Draw>,
    pub checked: usize,
}

type Check = fn(&Draw, bool) -> Result<Option<f64>>;

struct Battery {
    name: &'static str,
    tolerance: f64,
    check: Check,
}

const BATTERIES: &[Battery] = &[
    Battery {
        name: "sum_rule",
        tolerance: 1e-10,
        check: sum_rule,
    },
    Battery {
        name: "efficiency",
        tolerance: 1e-10,
        check: efficiency,
    },
    Battery {
        name: "unitarity",
        tolerance: 1e-10,
        check: unitarity,
    },
    Battery {
        name: "oracle_transfer",
        tolerance: 1e-10,
        check: oracle_transfer,
    },
    Battery {
        name: "oracle_variance",
        tolerance: 1e-10,
        check: oracle_variance,
    },
    Battery {
        name: "quadrature_pair",
        tolerance: 1e-12,
        check: quadrature_pair,
    },
    Battery {
        name: "decomposition",
        tolerance: 1e-10,
        check: decomposition,
    },
    Battery {
        name: "optimum_value",
        tolerance: 1e-6,
        check: optimum_value,
    },
    Battery {
        name: "optimum_location",
        tolerance: 1e-3,
        check: optimum_location,
    },
];

fn closed_coeffs(d: &Draw, fault: bool) -> Result<crate::transfer::TransferCoeffs> {
    let mut k = transfer_coeffs(&d.params()?, d.freq()?);
    if fault {
        k.a += INJECTED_FAULT;
    }
    Ok(k)
}

fn sum_rule(d: &Draw, fault: bool) -> Result<Option<f64>> {
    Ok(Some(closed_coeffs(d, fault)?.sum_rule_residual()))
}

fn efficiency(d: &Draw, fault: bool) -> Result<Option<f64>> {
    let p = d.params()?;
    let k = closed_coeffs(d, fault)?;
    let eta = 4.0 * p.chi_e * p.chi_e * p.gamma1 * p.gamma3 / k.r;
    let from_coeffs = k.signal_sum() / (k.r * k.r);
    let oracle = solve_channel_transfer(&p, d.freq()?)?.t_b1.norm_sqr();
    Ok(Some((eta - from_coeffs).abs().max((eta - oracle).abs())))
}

fn unitarity(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let t = solve_channel_transfer(&d.params()?, d.freq()?)?;
    Ok(Some((t.total_power() - 1.0).abs()))
}

fn oracle_transfer(d: &Draw, fault: bool) -> Result<Option<f64>> {
    let closed = ChannelTransfer::from_coeffs(&closed_coeffs(d, fault)?);
    let oracle = solve_channel_transfer(&d.params()?, d.freq()?)?;
    Ok(closed
        .as_array()
        .iter()
        .zip(oracle.as_array())
        .map(|(a, b)| (a - b).norm())
        .reduce(f64::max))
}

fn oracle_variance(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let op = d.point()?;
    let theta = RotationAngle::new(d.theta)?;
    let closed = correlation_variance(&op, d.g, theta);
    let row = assemble_row(
        &op.params,
        op.r,
        op.freq,
        d.g,
        theta,
        Observable::AmplitudeDifference,
    )?;
    Ok(Some((closed - row.variance()).abs() / closed.max(1.0)))
}

fn quadrature_pair(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let op = d.point()?;
    let theta = RotationAngle::new(d.theta)?;
    let x = assemble_row(
        &op.params,
        op.r,
        op.freq,
        d.g,
        theta,
        Observable::AmplitudeDifference,
    )?;
    let y = assemble_row(&op.params, op.r, op.freq, d.g, theta, Observable::PhaseSum)?;
    let (vx, vy) = (x.variance(), y.variance());
    Ok(Some((vx - vy).abs() / vx.max(1.0)))
}

fn decomposition(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let op = d.point()?;
    let res = s_min(&op);
    let expected = res.eta / op.r.cosh2r() + 1.0 - res.eta;
    Ok(Some((res.s_min - expected).abs()))
}

fn optimum_value(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let op = d.point()?;
    let scan = scan_optimum(&op.params, op.r, op.freq)?;
    Ok(Some((scan.s - s_min(&op).s_min).abs()))
}

fn optimum_location(d: &Draw, _fault: bool) -> Result<Option<f64>> {
    let op = d.point()?;
    let res = s_min(&op);
    if res.degenerate || res.g_opt < LOCATION_MIN_GAIN {
        return Ok(None);
    }
    let scan = scan_optimum(&op.params, op.r, op.freq)?;
    if scan.flat {
        return Ok(None);
    }
    let dtheta = RotationAngle::new(scan.theta.radians() - res.theta_opt.radians())?;
    Ok(Some((scan.g - res.g_opt).abs().max(dtheta.radians().abs())))
}

/// Runs every battery over the same set of draws.
pub fn run_batteries(opts: &VerifyOptions) -> Result<Vec<BatteryResult>> {
    if opts.draws == 0 {
        return Err(Error::invalid("draws", "must be at least 1"));
    }
    let draws = draws(opts.draws, opts.seed);
    BATTERIES
        .iter()
        .map(|b| run_battery(b, &draws, opts.inject_fault))
        .collect()
}

fn run_battery(b: &Battery, draws: &[Draw], fault: bool) -> Result<BatteryResult> {
    let errors = draws
        .par_iter()
        .map(|d| (b.check)(d, fault).map(|e| e.map(|e| (e, *d))))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: Option<(f64, Draw)> = None;
    let mut checked = 0;
    for (e, d) in errors.into_iter().flatten() {
        checked += 1;
        // NaN counts as the worst possible error.
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if worst.map_or(true, |(w, _)| e > w) {
            worst = Some((e, d));
        }
    }
    let max_error = worst.map_or(0.0, |w| w.0);
    Ok(BatteryResult {
        battery: b.name,
        max_error,
        tolerance: b.tolerance,
        pass: max_error <= b.tolerance,
        worst: worst.map(|w| w.1),
        checked,
    })
}
