//! Shared inputs for the benchmarks.

use qfc_core::sweep::{FixedParams, SweepAxis, SweepSpec};
use qfc_core::{AnalysisFrequency, OperatingPoint, SfgParams};

/// Standard cavity at a nonzero analysis frequency, so every coefficient is
/// exercised.
pub fn operating_point() -> OperatingPoint {
    OperatingPoint::from_ratios(1.0, 0.1, 0.1, 1.0, 0.6, 0.7).expect("valid parameters")
}

pub fn params_and_freq() -> (SfgParams, AnalysisFrequency) {
    let op = operating_point();
    (op.params, op.freq)
}

pub fn sweep(axis: SweepAxis) -> SweepSpec {
    SweepSpec {
        fixed: FixedParams {
            r: 2.0,
            ..FixedParams::default()
        },
        ..SweepSpec::default_for(axis)
    }
}
