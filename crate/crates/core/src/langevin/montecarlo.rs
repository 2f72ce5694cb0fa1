//! Monte Carlo reproduction of the correlation spectrum.
//!
//! The run is split into [`TRAJECTORIES`] independent trajectories, each
//! seeded from its own ChaCha stream of the configured seed, so results do
//! not depend on the thread count. Each trajectory contributes one batch
//! mean to the Welch estimator, and the spread of those means gives the
//! standard error.
//!
//! The compared quantity is the sideband combination
//! `d = (b3_out - g e^{i theta} conj(a2)) / sqrt(2)`, whose real and imaginary
//! parts are `X_b3out - g X_a2^theta` and `Y_b3out + g Y_a2^theta`. Its
//! spectrum at `+Omega` is the correlation variance including the `B`-term
//! mixing of the two quadratures. The cavity filter has real coefficients, so
//! a single real quadrature combination only sees `Re t_b1`. The two agree at
//! `Omega = 0`; [`Combination::AmplitudeQuadrature`] is kept for that check.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::welch::{Spectrum, WelchEstimator};
use super::{CavityInputs, EprSource, SfgIntegrator, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{s_min, OperatingPoint};
use crate::quadrature::SqueezeFactor;
use crate::transfer::{AnalysisFrequency, SfgParams};

pub const TRAJECTORIES: usize = 16;

/// Agreement threshold in standard errors.
pub const AGREEMENT_SIGMAS: f64 = 3.0;

/// Calibration band `[0, CALIBRATION_BAND]` and allowed deviation from 1.
pub const CALIBRATION_BAND: f64 = 2.0;
pub const CALIBRATION_TOLERANCE: f64 = 0.02;

/// Burn-in in units of the slower cavity decay time.
const BURN_IN_DECAY_TIMES: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Combination {
    /// `(b3_out - g e^{i theta} conj(a2)) / sqrt(2)`
    Sideband,
    /// `X_b3out - g X_a2^theta`
    AmplitudeQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloRow {
    pub omega_target: f64,
    /// Frequency of the Welch bin used.
    pub omega: f64,
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub rows: Vec<MonteCarloRow>,
    pub steps: usize,
    pub trajectories: usize,
    pub segments: usize,
}

impl MonteCarloReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// `(omega, psd, stderr)` for every bin in the calibration band.
    pub bins: Vec<(f64, f64, f64)>,
    pub mean_level: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
struct Target {
    g: f64,
    cos: f64,
    sin: f64,
}

impl Target {
    fn new(g: f64, theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { g, cos, sin }
    }

    fn combine(&self, kind: Combination, out: Complex64, a2: Complex64) -> Complex64 {
        match kind {
            Combination::Sideband => {
                let rot = Complex64::new(self.cos, self.sin);
                (out - self.g * rot * a2.conj()) * FRAC_1_SQRT_2
            }
            Combination::AmplitudeQuadrature => {
                Complex64::new(out.re - self.g * (self.cos * a2.re + self.sin * a2.im), 0.0)
            }
        }
    }
}

struct Plan {
    steps_per_trajectory: usize,
    burn_in: usize,
    segment: usize,
    overlap: f64,
    batch: usize,
}

impl Plan {
    fn new(p: &SfgParams, cfg: &SimConfig, segment: usize) -> Result<Self> {
        let steps_per_trajectory = cfg.steps().div_ceil(TRAJECTORIES);
        let segs = WelchEstimator::segments_for(segment, cfg.welch_overlap, steps_per_trajectory);
        if segs == 0 || segs * TRAJECTORIES < super::welch::MIN_SEGMENTS {
            return Err(Error::InsufficientData(format!(
                "{steps_per_trajectory} steps per trajectory give {segs} segments of {segment}"
            )));
        }
        let slow = p.kappa1().min(p.kappa3()) / p.gamma1;
        Ok(Self {
            steps_per_trajectory,
            burn_in: (BURN_IN_DECAY_TIMES / slow / cfg.dt).ceil() as usize,
            segment,
            overlap: cfg.welch_overlap,
            batch: segs,
        })
    }
}

fn simulate(
    p: &SfgParams,
    r: SqueezeFactor,
    cfg: &SimConfig,
    plan: &Plan,
    targets: &[Target],
    kind: Combination,
) -> Result<Vec<Spectrum>> {
    let per_trajectory: Vec<Vec<WelchEstimator>> = (0..TRAJECTORIES)
        .into_par_iter()
        .map(|traj| -> Result<Vec<WelchEstimator>> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(traj as u64);
            let mut src = EprSource::new(r, rng);
            let mut integ = SfgIntegrator::new(p, cfg.dt);
            let mut ests = targets
                .iter()
                .map(|_| WelchEstimator::new(plan.segment, plan.overlap, plan.batch))
                .collect::<Result<Vec<_>>>()?;
            for step in 0..plan.burn_in + plan.steps_per_trajectory {
                let (a1, a2) = src.sample();
                let u = CavityInputs::with_vacuum(a1, src.rng_mut());
                let out = integ.step(&u)?;
                if step >= plan.burn_in {
                    for (est, t) in ests.iter_mut().zip(targets) {
                        est.push(t.combine(kind, out, a2));
                    }
                }
            }
            Ok(ests)
        })
        .collect::<Result<_>>()?;

    let mut merged: Option<Vec<WelchEstimator>> = None;
    for ests in per_trajectory {
        match merged.as_mut() {
            None => merged = Some(ests),
            Some(acc) => acc.iter_mut().zip(&ests).for_each(|(a, b)| a.merge(b)),
        }
    }
    merged
        .expect("at least one trajectory")
        .iter()
        .map(|e| e.finish(cfg.dt))
        .collect()
}

/// Simulates the cavity and compares the optimal-combination spectrum to the
/// closed form at each requested normalized frequency.
pub fn run_montecarlo(
    p: &SfgParams,
    r: SqueezeFactor,
    cfg: &SimConfig,
    omegas: &[f64],
    kind: Combination,
) -> Result<MonteCarloReport> {
    cfg.validate()?;
    if !cfg.is_stable_for(p) {
        return Err(Error::invalid(
            "dt",
            format!(
                "dt * max(gamma + rho)/gamma1 = {} exceeds {}",
                cfg.stiffness(p),
                super::STABILITY_LIMIT
            ),
        ));
    }
    if omegas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let plan = Plan::new(p, cfg, cfg.welch_segment)?;
    let probe = WelchEstimator::new(plan.segment, plan.overlap, 1)?;

    let mut bins = Vec::with_capacity(omegas.len());
    let mut targets = Vec::with_capacity(omegas.len());
    let mut analytic = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let bin_omega = probe.bin_frequency(probe.nearest_bin(omega, cfg.dt), cfg.dt);
        let op = OperatingPoint::new(*p, r, AnalysisFrequency::from_normalized(bin_omega, p)?);
        let res = s_min(&op);
        bins.push(bin_omega);
        targets.push(Target::new(res.g_opt, res.theta_opt.radians()));
        analytic.push(res.s_min);
    }

    let spectra = simulate(p, r, cfg, &plan, &targets, kind)?;
    let rows = omegas
        .iter()
        .zip(&bins)
        .zip(analytic.iter().zip(&spectra))
        .map(|((&omega_target, &omega), (&analytic, spec))| {
            let est = spec.at(omega);
            let z = (est.value - analytic) / est.stderr;
            MonteCarloRow {
                omega_target,
                omega: est.omega,
                analytic,
                simulated: est.value,
                stderr: est.stderr,
                z,
                pass: z.abs() <= AGREEMENT_SIGMAS,
            }
        })
        .collect();
    Ok(MonteCarloReport {
        rows,
        steps: plan.steps_per_trajectory * TRAJECTORIES,
        trajectories: TRAJECTORIES,
        segments: spectra[0].segments,
    })
}

/// Segment length used by [`vacuum_calibration`]: a sixteenth of the main
/// segment, so the flat spectrum is averaged over many more segments.
pub fn calibration_segment(cfg: &SimConfig) -> usize {
    (cfg.welch_segment / 16).max(256)
}

/// Zero-pump run: the output is vacuum and its per-quadrature spectrum must
/// read 1 across the calibration band.
pub fn vacuum_calibration(p: &SfgParams, cfg: &SimConfig) -> Result<CalibrationReport> {
    cfg.validate()?;
    let p0 = p.with_pump(0.0)?;
    let plan = Plan::new(&p0, cfg, calibration_segment(cfg))?;
    let spectra = simulate(
        &p0,
        SqueezeFactor::vacuum(),
        cfg,
        &plan,
        &[Target::new(0.0, 0.0)],
        Combination::Sideband,
    )?;
    let bins: Vec<(f64, f64, f64)> = spectra[0]
        .band(0.0, CALIBRATION_BAND)
        .map(|e| (e.omega, e.value, e.stderr))
        .collect();
    if bins.is_empty() {
        return Err(Error::InsufficientData(
            "no bins in the calibration band".into(),
        ));
    }
    let mean_level = bins.iter().map(|b| b.1).sum::<f64>() / bins.len() as f64;
    let max_deviation = bins.iter().map(|b| (b.1 - 1.0).abs()).fold(0.0, f64::max);
    Ok(CalibrationReport {
        bins,
        mean_level,
        max_deviation,
        pass: max_deviation <= CALIBRATION_TOLERANCE,
    })
}
