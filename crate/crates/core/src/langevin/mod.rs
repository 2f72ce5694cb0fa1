//! Time-domain simulation of the linearized conversion cavity.
//!
//! Time is measured in units of `tau / gamma1`, so the two complex
//! fluctuation amplitudes obey
//!
//! ```text
//! d b1/dt = [-(gamma1 + rho1) b1 + chiE b3 + sqrt(2 gamma1) b1_in + sqrt(2 rho1) c1] / gamma1
//! d b3/dt = [-(gamma3 + rho3) b3 - chiE b1 + sqrt(2 gamma3) b3_in + sqrt(2 rho3) c3] / gamma1
//! ```
//!
//! and angular frequency in these units is the normalized `Omega = omega tau / gamma1`.
//!
//! Input noise is white: every input quadrature sample is an independent
//! unit-variance Gaussian held over one step. With the Welch normalization in
//! [`welch`] such a stream has spectral density 1, the shot-noise level, so
//! simulated spectra are directly comparable to the closed forms without any
//! rescaling. The zero-pump run in [`montecarlo::vacuum_calibration`] checks
//! that convention end to end.

pub mod montecarlo;
pub mod welch;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::SqueezeFactor;
use crate::transfer::SfgParams;

pub use montecarlo::{
    run_montecarlo, vacuum_calibration, CalibrationReport, Combination, MonteCarloReport,
    MonteCarloRow,
};
pub use welch::{PsdEstimate, Spectrum, WelchEstimator};

/// Explicit-integrator advisory bound on `dt * max(kappa) / gamma1`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Amplitude beyond which a trajectory is declared divergent.
const DIVERGENCE_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Step in units of `tau / gamma1`.
    pub dt: f64,
    /// Total simulated time in the same units.
    pub duration: f64,
    pub seed: u64,
    pub welch_segment: usize,
    pub welch_overlap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            duration: 2e5,
            seed: 20_060_214,
            welch_segment: 32_768,
            welch_overlap: 0.5,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return Err(Error::invalid("duration", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(Error::invalid("welch_overlap", "must be in [0, 1)"));
        }
        if self.welch_segment < 4 {
            return Err(Error::invalid("welch_segment", "must be at least 4"));
        }
        if (self.steps() as f64) < 10.0 * self.welch_segment as f64 {
            return Err(Error::InsufficientData(format!(
                "duration/dt = {} samples, need at least 10 x welch_segment = {}",
                self.steps(),
                10 * self.welch_segment
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// `dt * max(gamma + rho) / gamma1`; should stay below [`STABILITY_LIMIT`].
    pub fn stiffness(&self, p: &SfgParams) -> f64 {
        self.dt * p.kappa1().max(p.kappa3()) / p.gamma1
    }

    pub fn is_stable_for(&self, p: &SfgParams) -> bool {
        self.stiffness(p) < STABILITY_LIMIT
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// White two-mode squeezed noise: each call returns `(a1, a2)` as `X + iY`.
#[derive(Debug, Clone)]
pub struct EprSource {
    cosh: f64,
    sinh: f64,
    rng: ChaCha8Rng,
}

impl EprSource {
    pub fn new(r: SqueezeFactor, rng: ChaCha8Rng) -> Self {
        Self {
            cosh: r.value().cosh(),
            sinh: r.value().sinh(),
            rng,
        }
    }

    pub fn sample(&mut self) -> (Complex64, Complex64) {
        let v1 = complex_normal(&mut self.rng);
        let v2 = complex_normal(&mut self.rng);
        // a1 = cosh r v1 + sinh r conj(v2), a2 = cosh r v2 + sinh r conj(v1)
        (
            self.cosh * v1 + self.sinh * v2.conj(),
            self.cosh * v2 + self.sinh * v1.conj(),
        )
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Sampled quadratures of both amplifier outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EprTraces {
    pub dt: f64,
    pub x_a1: Vec<f64>,
    pub y_a1: Vec<f64>,
    pub x_a2: Vec<f64>,
    pub y_a2: Vec<f64>,
}

impl EprTraces {
    pub fn len(&self) -> usize {
        self.x_a1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_a1.is_empty()
    }

    pub fn a1(&self, i: usize) -> Complex64 {
        Complex64::new(self.x_a1[i], self.y_a1[i])
    }

    pub fn a2(&self, i: usize) -> Complex64 {
        Complex64::new(self.x_a2[i], self.y_a2[i])
    }
}

pub fn synthesize_epr_streams(r: SqueezeFactor, n: usize, dt: f64, seed: u64) -> Result<EprTraces> {
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 samples"));
    }
    let mut src = EprSource::new(r, ChaCha8Rng::seed_from_u64(seed));
    let mut out = EprTraces {
        dt,
        x_a1: Vec::with_capacity(n),
        y_a1: Vec::with_capacity(n),
        x_a2: Vec::with_capacity(n),
        y_a2: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let (a1, a2) = src.sample();
        out.x_a1.push(a1.re);
        out.y_a1.push(a1.im);
        out.x_a2.push(a2.re);
        out.y_a2.push(a2.im);
    }
    Ok(out)
}

/// Inputs driving the cavity during one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CavityInputs {
    pub b1_in: Complex64,
    pub c1: Complex64,
    pub b3_in: Complex64,
    pub c3: Complex64,
}

impl CavityInputs {
    /// Signal `b1_in` plus freshly drawn vacuum on the other three ports.
    pub fn with_vacuum(b1_in: Complex64, rng: &mut ChaCha8Rng) -> Self {
        Self {
            b1_in,
            c1: complex_normal(rng),
            b3_in: complex_normal(rng),
            c3: complex_normal(rng),
        }
    }
}

/// Euler-Maruyama stepper for the two intracavity amplitudes.
#[derive(Debug, Clone)]
pub struct SfgIntegrator {
    dt: f64,
    decay1: f64,
    decay3: f64,
    coupling: f64,
    in_b1: f64,
    in_c1: f64,
    in_b3: f64,
    in_c3: f64,
    out_b3: f64,
    b1: Complex64,
    b3: Complex64,
    steps: usize,
}

impl SfgIntegrator {
    pub fn new(p: &SfgParams, dt: f64) -> Self {
        let g = p.gamma1;
        Self {
            dt,
            decay1: p.kappa1() / g,
            decay3: p.kappa3() / g,
            coupling: p.chi_e / g,
            in_b1: (2.0 * p.gamma1).sqrt() / g,
            in_c1: (2.0 * p.rho1).sqrt() / g,
            in_b3: (2.0 * p.gamma3).sqrt() / g,
            in_c3: (2.0 * p.rho3).sqrt() / g,
            out_b3: (2.0 * p.gamma3).sqrt(),
            b1: Complex64::default(),
            b3: Complex64::default(),
            steps: 0,
        }
    }

    pub fn state(&self) -> (Complex64, Complex64) {
        (self.b1, self.b3)
    }

    /// Advances one step and returns the output `sqrt(2 gamma3) b3 - b3_in`,
    /// with `b3` taken at the step midpoint so it lines up with the held input.
    pub fn step(&mut self, u: &CavityInputs) -> Result<Complex64> {
        let d1 = -self.decay1 * self.b1
            + self.coupling * self.b3
            + self.in_b1 * u.b1_in
            + self.in_c1 * u.c1;
        let d3 = -self.decay3 * self.b3 - self.coupling * self.b1
            + self.in_b3 * u.b3_in
            + self.in_c3 * u.c3;
        let b3_prev = self.b3;
        self.b1 += self.dt * d1;
        self.b3 += self.dt * d3;
        self.steps += 1;
        let mag = self.b1.norm_sqr().max(self.b3.norm_sqr());
        if mag.is_nan() || mag >= DIVERGENCE_THRESHOLD * DIVERGENCE_THRESHOLD {
            return Err(Error::Unstable {
                step: self.steps,
                magnitude: mag.sqrt(),
            });
        }
        Ok(self.out_b3 * 0.5 * (b3_prev + self.b3) - u.b3_in)
    }
}

/// Recorded quadratures of the retained beam and the converted output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureTrace {
    pub dt: f64,
    pub x_a2: Vec<f64>,
    pub y_a2: Vec<f64>,
    pub x_b3: Vec<f64>,
    pub y_b3: Vec<f64>,
}

impl QuadratureTrace {
    pub const LABELS: [&'static str; 4] = ["Xa2", "Ya2", "Xb3", "Yb3"];

    pub fn len(&self) -> usize {
        self.x_b3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_b3.is_empty()
    }

    pub fn a2(&self, i: usize) -> Complex64 {
        Complex64::new(self.x_a2[i], self.y_a2[i])
    }

    pub fn b3(&self, i: usize) -> Complex64 {
        Complex64::new(self.x_b3[i], self.y_b3[i])
    }

    /// CSV dump with header `t,Xa2,Ya2,Xb3,Yb3`.
    pub fn to_table(&self) -> crate::csv::Table {
        let mut header = vec!["t".to_string()];
        header.extend(Self::LABELS.iter().map(|s| s.to_string()));
        let mut t = crate::csv::Table::new(header);
        for i in 0..self.len() {
            t.push(vec![
                i as f64 * self.dt,
                self.x_a2[i],
                self.y_a2[i],
                self.x_b3[i],
                self.y_b3[i],
            ]);
        }
        t
    }
}

/// Drives the cavity with `a1` from `inputs`; vacuum ports are drawn from `seed`.
pub fn integrate_sfg(p: &SfgParams, inputs: &EprTraces, seed: u64) -> Result<QuadratureTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut integ = SfgIntegrator::new(p, inputs.dt);
    let n = inputs.len();
    let mut out = QuadratureTrace {
        dt: inputs.dt,
        x_a2: inputs.x_a2.clone(),
        y_a2: inputs.y_a2.clone(),
        x_b3: Vec::with_capacity(n),
        y_b3: Vec::with_capacity(n),
    };
    for i in 0..n {
        let y = integ.step(&CavityInputs::with_vacuum(inputs.a1(i), &mut rng))?;
        out.x_b3.push(y.re);
        out.y_b3.push(y.im);
    }
    Ok(out)
}

/// Welch estimate at the bin nearest `omega` for a complex stream.
pub fn estimate_psd(samples: &[Complex64], cfg: &SimConfig, omega: f64) -> Result<PsdEstimate> {
    let spec = welch::welch_spectrum(samples, cfg.dt, cfg.welch_segment, cfg.welch_overlap)?;
    Ok(spec.at(omega))
}
