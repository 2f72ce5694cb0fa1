use std::f64::consts::PI;

use proptest::prelude::*;
use qfc_core::metrics::{correlation_variance, optimal_gain, variance_at_optimal_gain};
use qfc_core::oracle::solve_channel_transfer;
use qfc_core::quadrature::{nopa_transform, rotate_quadratures, symplectic_form};
use qfc_core::{
    channel_transfer, s_min, transfer_coeffs, AnalysisFrequency, OperatingPoint, RotationAngle,
    SfgParams,
};

fn params() -> impl Strategy<Value = SfgParams> {
    (0.2..2.0f64, 0.0..0.5f64, 0.0..0.5f64, 0.0..3.0f64)
        .prop_map(|(g3, r1, r3, k)| SfgParams::from_ratios(g3, r1, r3, k).unwrap())
}

fn point() -> impl Strategy<Value = OperatingPoint> {
    (params(), 0.0..3.0f64, -3.0..3.0f64).prop_map(|(p, r, w)| {
        OperatingPoint::new(
            p,
            qfc_core::SqueezeFactor::new(r).unwrap(),
            AnalysisFrequency::new(w).unwrap(),
        )
    })
}

proptest! {
    #[test]
    fn sum_rule_holds(p in params(), w in -5.0..5.0f64) {
        let k = transfer_coeffs(&p, AnalysisFrequency::new(w).unwrap());
        prop_assert!(k.sum_rule_residual() < 1e-12);
    }

    #[test]
    fn spectrum_is_even(p in params(), w in 0.0..5.0f64, r in 0.0..3.0f64) {
        let s = |w| {
            let op = OperatingPoint::new(p, qfc_core::SqueezeFactor::new(r).unwrap(), AnalysisFrequency::new(w).unwrap());
            s_min(&op).s_min
        };
        prop_assert!((s(w) - s(-w)).abs() < 1e-13);
    }

    #[test]
    fn cavity_is_passive(p in params(), w in -5.0..5.0f64) {
        let f = AnalysisFrequency::new(w).unwrap();
        let t = solve_channel_transfer(&p, f).unwrap();
        prop_assert!((t.total_power() - 1.0).abs() < 1e-12);
        prop_assert!(channel_transfer(&p, f).t_b1.norm_sqr() <= 1.0 + 1e-12);
    }

    #[test]
    fn closed_form_gain_minimizes(op in point(), theta in -PI..PI, dg in -0.5..0.5f64) {
        let th = RotationAngle::new(theta).unwrap();
        let g = optimal_gain(&op, th);
        let best = correlation_variance(&op, g, th);
        prop_assert!(best <= correlation_variance(&op, g + dg, th) + 1e-12 * best.max(1.0));
        prop_assert!((best - variance_at_optimal_gain(&op, th)).abs() < 1e-9 * best.max(1.0));
    }

    #[test]
    fn joint_optimum_is_global(op in point(), g in 0.0..2.0f64, theta in -PI..PI) {
        let res = s_min(&op);
        let s = correlation_variance(&op, g, RotationAngle::new(theta).unwrap());
        prop_assert!(res.s_min <= s + 1e-12 * s.max(1.0));
    }

    #[test]
    fn conversion_never_improves_on_the_source(op in point()) {
        let res = s_min(&op);
        prop_assert!(res.s_min >= 1.0 / op.r.cosh2r() - 1e-12);
        prop_assert!(res.s_min <= 1.0 + 1e-12);
    }

    #[test]
    fn more_squeezing_helps(p in params(), r in 0.0..2.9f64, dr in 0.01..0.1f64) {
        let at = |r| s_min(&OperatingPoint::new(p, qfc_core::SqueezeFactor::new(r).unwrap(), AnalysisFrequency::zero())).s_min;
        prop_assert!(at(r + dr) <= at(r) + 1e-15);
    }

    #[test]
    fn rotation_preserves_norm(x in -10.0..10.0f64, y in -10.0..10.0f64, a in -PI..PI, b in -PI..PI) {
        let (xr, yr) = rotate_quadratures(x, y, RotationAngle::new(a).unwrap());
        prop_assert!((xr.hypot(yr) - x.hypot(y)).abs() < 1e-12);
        let (x2, y2) = rotate_quadratures(xr, yr, RotationAngle::new(b).unwrap());
        let (x3, y3) = rotate_quadratures(x, y, RotationAngle::new(a + b).unwrap());
        prop_assert!((x2 - x3).abs() < 1e-12 && (y2 - y3).abs() < 1e-12);
    }

    #[test]
    fn nopa_is_symplectic(r in 0.0..3.0f64) {
        let m = nopa_transform(qfc_core::SqueezeFactor::new(r).unwrap());
        let j = symplectic_form();
        for a in 0..4 {
            for b in 0..4 {
                let mut v = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        v += m[a][k] * j[k][l] * m[b][l];
                    }
                }
                prop_assert!((v - j[a][b]).abs() < 1e-9 * (2.0 * r).cosh());
            }
        }
    }
}
