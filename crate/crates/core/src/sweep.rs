//! Parameter sweeps over frequency, pump strength and squeezing.
//!
//! All parameters are ratios to `gamma1`. Sweeps evaluate grid points in
//! parallel and return plain [`Table`]s ready for CSV output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csv::Table;
use crate::error::{Error, Result};
use crate::metrics::{efficiency_and_loss, s_min, CorrelationResult, OperatingPoint};
use crate::oracle::golden_section_min;

/// Fixed operating parameters, all relative to `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub gamma3: f64,
    pub rho1: f64,
    pub rho3: f64,
    pub pump: f64,
    pub r: f64,
    pub omega: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            gamma3: 1.0,
            rho1: 0.1,
            rho3: 0.1,
            pump: 1.0,
            r: 0.6,
            omega: 0.0,
        }
    }
}

impl FixedParams {
    pub fn operating_point(&self) -> Result<OperatingPoint> {
        OperatingPoint::from_ratios(
            self.gamma3,
            self.rho1,
            self.rho3,
            self.pump,
            self.r,
            self.omega,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Omega,
    Pump,
    Squeeze,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Omega => "omega",
            SweepAxis::Pump => "pump",
            SweepAxis::Squeeze => "r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub fixed: FixedParams,
}

impl SweepSpec {
    /// Default grid for each axis: `[0, 3]` in steps of 0.01.
    pub fn default_for(axis: SweepAxis) -> Self {
        Self {
            axis,
            start: 0.0,
            stop: 3.0,
            step: 0.01,
            fixed: FixedParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::invalid("step", "must be positive"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::invalid("start/stop", "must be finite"));
        }
        if self.start >= self.stop {
            return Err(Error::EmptyGrid);
        }
        Ok(())
    }

    /// Inclusive grid `start, start + step, ...` up to `stop`, with each value
    /// rounded to 12 decimals so it prints exactly as typed.
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| clean(self.start + i as f64 * self.step))
            .collect())
    }

    fn point_at(&self, x: f64) -> FixedParams {
        let mut f = self.fixed;
        match self.axis {
            SweepAxis::Omega => f.omega = x,
            SweepAxis::Pump => f.pump = x,
            SweepAxis::Squeeze => f.r = x,
        }
        f
    }
}

fn clean(x: f64) -> f64 {
    format!("{x:.12}").parse().unwrap_or(x)
}

/// Jointly optimized correlation at a single operating point.
pub fn point(fixed: &FixedParams) -> Result<CorrelationResult> {
    Ok(s_min(&fixed.operating_point()?))
}

fn column(
    spec: &SweepSpec,
    grid: &[f64],
    with: impl Fn(&mut FixedParams) + Sync,
) -> Result<Vec<f64>> {
    grid.par_iter()
        .map(|&x| {
            let mut f = spec.point_at(x);
            with(&mut f);
            point(&f).map(|res| res.s_min)
        })
        .collect()
}

fn assemble(axis: &str, grid: &[f64], labels: Vec<String>, columns: Vec<Vec<f64>>) -> Table {
    let mut header = vec![axis.to_string()];
    header.extend(labels);
    let mut table = Table::new(header);
    for (i, &x) in grid.iter().enumerate() {
        let mut row = vec![x];
        row.extend(columns.iter().map(|c| c[i]));
        table.push(row);
    }
    table
}

/// `S_min` versus normalized frequency, one column per squeezing value.
/// Header: `omega,smin_r=<r1>,...`.
pub fn spectrum(spec: &SweepSpec, rs: &[f64]) -> Result<Table> {
    if spec.axis != SweepAxis::Omega {
        return Err(Error::invalid("axis", "spectrum sweeps omega"));
    }
    if rs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = spec.grid()?;
    let columns = rs
        .iter()
        .map(|&r| column(spec, &grid, |f| f.r = r))
        .collect::<Result<Vec<_>>>()?;
    let labels = rs.iter().map(|r| format!("smin_r={r}")).collect();
    Ok(assemble("omega", &grid, labels, columns))
}

/// Which parameter distinguishes the curves of a pump sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PumpFamily {
    /// One curve per `gamma3/gamma1`.
    Gamma3(Vec<f64>),
    /// One curve per squeezing factor.
    Squeeze(Vec<f64>),
}

impl PumpFamily {
    fn values(&self) -> &[f64] {
        match self {
            PumpFamily::Gamma3(v) | PumpFamily::Squeeze(v) => v,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            PumpFamily::Gamma3(_) => "gamma3",
            PumpFamily::Squeeze(_) => "r",
        }
    }

    fn apply(&self, f: &mut FixedParams, v: f64) {
        match self {
            PumpFamily::Gamma3(_) => f.gamma3 = v,
            PumpFamily::Squeeze(_) => f.r = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSummary {
    pub column: String,
    pub value: f64,
    pub argmin: f64,
    pub min: f64,
    /// Minimum refined by golden-section search around the grid argmin.
    pub argmin_refined: f64,
    pub min_refined: f64,
    pub unimodal: bool,
}

/// True when the sequence strictly decreases to one minimum and strictly
/// increases afterwards, with the minimum away from both ends.
pub fn is_unimodal(values: &[f64]) -> bool {
    let Some(imin) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return false;
    };
    if imin == 0 || imin + 1 == values.len() {
        return false;
    }
    values[..=imin].windows(2).all(|w| w[1] < w[0])
        && values[imin..].windows(2).all(|w| w[1] > w[0])
}

/// `S_min` versus pump parameter, one column per family value.
pub fn pump_sweep(spec: &SweepSpec, family: &PumpFamily) -> Result<(Table, Vec<CurveSummary>)> {
    if spec.axis != SweepAxis::Pump {
        return Err(Error::invalid("axis", "pump sweeps vary the pump"));
    }
    if family.values().is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = spec.grid()?;
    let mut columns = Vec::new();
    let mut summaries = Vec::new();
    for &v in family.values() {
        let col = column(spec, &grid, |f| family.apply(f, v))?;
        let (imin, &min) = col
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid is non-empty");
        let lo = grid[imin.saturating_sub(1)];
        let hi = grid[(imin + 1).min(grid.len() - 1)];
        let objective = |x: f64| {
            let mut f = spec.point_at(x);
            family.apply(&mut f, v);
            point(&f).map(|r| r.s_min).unwrap_or(f64::INFINITY)
        };
        let (argmin_refined, min_refined) = golden_section_min(objective, lo, hi, 1e-10);
        summaries.push(CurveSummary {
            column: format!("smin_{}={v}", family.label()),
            value: v,
            argmin: grid[imin],
            min,
            argmin_refined,
            min_refined,
            unimodal: is_unimodal(&col),
        });
        columns.push(col);
    }
    let labels = summaries.iter().map(|s| s.column.clone()).collect();
    Ok((assemble("pump", &grid, labels, columns), summaries))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeSummary {
    pub eta: f64,
    /// Large-`r` limit `1 - eta` (the vacuum admixture).
    pub asymptote: f64,
    pub strictly_decreasing: bool,
}

/// `S_min` versus squeezing factor. Header: `r,smin`.
pub fn squeeze_sweep(spec: &SweepSpec) -> Result<(Table, SqueezeSummary)> {
    if spec.axis != SweepAxis::Squeeze {
        return Err(Error::invalid("axis", "squeeze sweeps vary r"));
    }
    let grid = spec.grid()?;
    let col = column(spec, &grid, |_| {})?;
    let (eta, loss) = efficiency_and_loss(&spec.fixed.operating_point()?);
    let summary = SqueezeSummary {
        eta,
        asymptote: loss,
        strictly_decreasing: col.windows(2).all(|w| w[1] < w[0]),
    };
    Ok((
        assemble("r", &grid, vec!["smin".into()], vec![col]),
        summary,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_clean_and_inclusive() {
        let spec = SweepSpec::default_for(SweepAxis::Omega);
        let g = spec.grid().unwrap();
        assert_eq!(g.len(), 301);
        assert_eq!(g[60], 0.6);
        assert_eq!(*g.last().unwrap(), 3.0);
        let bad = SweepSpec {
            start: 1.0,
            stop: 1.0,
            ..spec
        };
        assert_eq!(bad.grid(), Err(Error::EmptyGrid));
        let bad = SweepSpec { step: 0.0, ..spec };
        assert!(bad.grid().is_err());
    }

    #[test]
    fn spectrum_columns() {
        let spec = SweepSpec::default_for(SweepAxis::Omega);
        let t = spectrum(&spec, &[0.0, 0.6, 1.0, 2.0]).unwrap();
        assert_eq!(
            t.header,
            ["omega", "smin_r=0", "smin_r=0.6", "smin_r=1", "smin_r=2"]
        );
        let vac = t.column("smin_r=0").unwrap();
        assert!(vac.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let row0 = &t.rows[0];
        assert!(row0[4] < row0[3] && row0[3] < row0[2]);
        let standalone = point(&FixedParams::default()).unwrap().s_min;
        assert_eq!(
            crate::csv::format_sig12(row0[2]),
            crate::csv::format_sig12(standalone)
        );
    }

    #[test]
    fn pump_sweep_over_gamma3() {
        let spec = SweepSpec {
            fixed: FixedParams {
                r: 2.0,
                ..FixedParams::default()
            },
            ..SweepSpec::default_for(SweepAxis::Pump)
        };
        let (t, summary) = pump_sweep(&spec, &PumpFamily::Gamma3(vec![0.6, 1.0, 1.4])).unwrap();
        assert_eq!(t.rows.len(), 301);
        assert!(t.rows[0][1..].iter().all(|v| *v == 1.0));
        assert!(summary.iter().all(|s| s.unimodal));
        assert!(summary[0].argmin_refined < summary[1].argmin_refined);
        assert!(summary[1].argmin_refined < summary[2].argmin_refined);
        // Interior optimum at chiE^2 = (gamma1 + rho1)(gamma3 + rho3).
        for s in &summary {
            let expected = (1.1 * (s.value + 0.1)).sqrt();
            assert!((s.argmin_refined - expected).abs() < 1e-4, "{s:?}");
        }
    }

    #[test]
    fn pump_sweep_over_r_contains_anchor() {
        let spec = SweepSpec::default_for(SweepAxis::Pump);
        let (t, _) = pump_sweep(&spec, &PumpFamily::Squeeze(vec![0.6, 1.0, 2.0])).unwrap();
        let row = t.rows.iter().find(|r| r[0] == 1.0).unwrap();
        assert!((row[1] - 0.6333).abs() < 1e-4);
        assert!(row[3] < row[2] && row[2] < row[1]);
    }

    #[test]
    fn squeeze_sweep_decreases_to_asymptote() {
        let spec = SweepSpec::default_for(SweepAxis::Squeeze);
        let (t, s) = squeeze_sweep(&spec).unwrap();
        assert!(s.strictly_decreasing);
        assert!((s.asymptote - 0.181016).abs() < 1e-6);
        let col = t.column("smin").unwrap();
        assert_eq!(col[0], 1.0);
        assert!((col[60] - 0.6333).abs() < 1e-4);
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&[3.0, 2.0, 1.0, 2.0]));
        assert!(!is_unimodal(&[1.0, 2.0, 3.0]));
        assert!(!is_unimodal(&[3.0, 1.0, 2.0, 1.5, 4.0]));
        assert!(!is_unimodal(&[]));
    }

    #[test]
    fn wrong_axis() {
        let spec = SweepSpec::default_for(SweepAxis::Pump);
        assert!(spectrum(&spec, &[0.6]).is_err());
        assert!(squeeze_sweep(&spec).is_err());
    }
}
