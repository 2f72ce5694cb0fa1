//! Quadrature conventions and the two-mode squeezing source.
//!
//! Quadratures are `X = (b + b†)/2`, `Y = (b - b†)/2i`, and every variance is
//! expressed in shot-noise units: a vacuum quadrature has variance 1.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Squeezing parameter `r >= 0` of the parametric amplifier.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct SqueezeFactor(f64);

impl SqueezeFactor {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::invalid("r", "must be finite"));
        }
        if r < 0.0 {
            return Err(Error::invalid("r", format!("must be >= 0, got {r}")));
        }
        Ok(Self(r))
    }

    pub const fn vacuum() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `cosh 2r`, the single-beam quadrature variance.
    pub fn cosh2r(self) -> f64 {
        (2.0 * self.0).cosh()
    }

    pub fn sinh2r(self) -> f64 {
        (2.0 * self.0).sinh()
    }

    pub fn tanh2r(self) -> f64 {
        (2.0 * self.0).tanh()
    }
}

/// `(X_a1, Y_a1, X_a2, Y_a2)` in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureVector(pub [f64; 4]);

impl QuadratureVector {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("quadratures", "entries must be finite"));
        }
        Ok(Self(values))
    }

    /// Applies the amplifier transform to input quadratures `(X01, Y01, X02, Y02)`.
    pub fn from_inputs(r: SqueezeFactor, inputs: [f64; 4]) -> Self {
        let m = nopa_transform(r);
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(m.iter()) {
            *o = row.iter().zip(inputs.iter()).map(|(a, b)| a * b).sum();
        }
        Self(out)
    }

    pub fn x_a1(&self) -> f64 {
        self.0[0]
    }
    pub fn y_a1(&self) -> f64 {
        self.0[1]
    }
    pub fn x_a2(&self) -> f64 {
        self.0[2]
    }
    pub fn y_a2(&self) -> f64 {
        self.0[3]
    }
}

/// Quadrature rotation angle, kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RotationAngle(f64);

impl RotationAngle {
    /// Canonicalizes any finite angle into `(-pi, pi]`.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        Ok(Self(canonicalize(theta)))
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

impl std::ops::Neg for RotationAngle {
    type Output = RotationAngle;

    fn neg(self) -> Self::Output {
        RotationAngle(canonicalize(-self.0))
    }
}

fn canonicalize(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // rem_euclid can land on exactly -pi after the shift; fold it to +pi.
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Two-mode squeezing transform of the amplifier operating in amplification.
///
/// Maps `(X01, Y01, X02, Y02)` to `(X_a1, Y_a1, X_a2, Y_a2)`.
pub fn nopa_transform(r: SqueezeFactor) -> [[f64; 4]; 4] {
    let c = r.value().cosh();
    let s = r.value().sinh();
    [
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ]
}

/// Variance of `X_a1 - g X_a2` (equivalently `Y_a1 + g Y_a2`) for unit-variance
/// vacuum inputs.
pub fn epr_combination_variance(r: SqueezeFactor, g: f64) -> f64 {
    r.cosh2r() * (1.0 + g * g) - 2.0 * g * r.sinh2r()
}

/// The combination variance divided by the shot noise of both beams, `1 + g^2`.
pub fn epr_combination_variance_per_snl(r: SqueezeFactor, g: f64) -> f64 {
    epr_combination_variance(r, g) / (1.0 + g * g)
}

/// Gain minimizing [`epr_combination_variance`]: `tanh 2r`.
pub fn epr_optimal_gain(r: SqueezeFactor) -> f64 {
    r.tanh2r()
}

/// Rotates a quadrature pair: `x' = x cos t + y sin t`, `y' = -x sin t + y cos t`.
pub fn rotate_quadratures(x: f64, y: f64, theta: RotationAngle) -> (f64, f64) {
    let (s, c) = theta.radians().sin_cos();
    (x * c + y * s, -x * s + y * c)
}

/// Canonical antisymmetric form pairing `(X_i, Y_i)` for two modes.
pub fn symplectic_form() -> [[f64; 4]; 4] {
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    fn transpose(a: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[j][i];
            }
        }
        out
    }

    // Variance of w . (M x) for identity input covariance: |M^T w|^2.
    fn output_variance(m: &[[f64; 4]; 4], w: [f64; 4]) -> f64 {
        (0..4)
            .map(|j| (0..4).map(|i| w[i] * m[i][j]).sum::<f64>().powi(2))
            .sum()
    }

    #[test]
    fn vacuum_transform_is_identity() {
        let m = nopa_transform(SqueezeFactor::vacuum());
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn transform_at_r_0_6() {
        let r = SqueezeFactor::new(0.6).unwrap();
        let m = nopa_transform(r);
        assert!((m[0][0] - 1.185465).abs() < 1e-6);
        assert!((m[0][2] - 0.636654).abs() < 1e-6);
        assert!((m[1][3] + 0.636654).abs() < 1e-6);
        assert!((m[3][1] + 0.636654).abs() < 1e-6);

        let diff = output_variance(&m, [1.0, 0.0, -1.0, 0.0]);
        assert!((diff - 2.0 * (-1.2f64).exp()).abs() < 1e-12);
        let single = output_variance(&m, [1.0, 0.0, 0.0, 0.0]);
        assert!((single - 1.810656).abs() < 1e-6);
        assert!((output_variance(&m, [0.0, 0.0, 1.0, 0.0]) - single).abs() < 1e-12);
        // Phase sum is as quiet as the amplitude difference.
        let sum = output_variance(&m, [0.0, 1.0, 0.0, 1.0]);
        assert!((sum - diff).abs() < 1e-12);
    }

    #[test]
    fn transform_preserves_symplectic_form() {
        let j = symplectic_form();
        for k in 0..=30 {
            let r = SqueezeFactor::new(0.1 * k as f64).unwrap();
            let m = nopa_transform(r);
            let mjm = matmul(&matmul(&m, &j), &transpose(&m));
            for a in 0..4 {
                for b in 0..4 {
                    assert!((mjm[a][b] - j[a][b]).abs() < 1e-12, "r={}", r.value());
                }
            }
        }
    }

    #[test]
    fn combination_variance_examples() {
        let vac = SqueezeFactor::vacuum();
        assert_eq!(epr_combination_variance(vac, 1.0), 2.0);

        let r = SqueezeFactor::new(0.6).unwrap();
        let g = epr_optimal_gain(r);
        assert!((g - 0.833655).abs() < 1e-6);
        assert!((epr_combination_variance(r, g) - 0.552285).abs() < 2e-6);
        assert!((epr_combination_variance(r, 1.0) - 0.602388).abs() < 1e-6);
        assert!((epr_combination_variance_per_snl(r, 1.0) - 0.301194).abs() < 1e-6);
    }

    #[test]
    fn combination_variance_matches_matrix_product() {
        for &(r, g) in &[(0.0, 0.3), (0.6, 1.0), (1.3, 0.7), (2.5, -0.4)] {
            let sq = SqueezeFactor::new(r).unwrap();
            let m = nopa_transform(sq);
            let x = output_variance(&m, [1.0, 0.0, -g, 0.0]);
            let y = output_variance(&m, [0.0, 1.0, 0.0, g]);
            let closed = epr_combination_variance(sq, g);
            assert!((x - closed).abs() < 1e-10 * closed.max(1.0));
            assert!((y - closed).abs() < 1e-10 * closed.max(1.0));
        }
    }

    #[test]
    fn optimal_gain_agrees_with_golden_section() {
        for &r in &[0.6, 5.0] {
            let sq = SqueezeFactor::new(r).unwrap();
            let (g, _) = crate::oracle::golden_section_min(
                |g| epr_combination_variance(sq, g),
                0.0,
                2.0,
                1e-12,
            );
            assert!((g - epr_optimal_gain(sq)).abs() < 1e-8, "r={r}");
        }
        assert_eq!(epr_optimal_gain(SqueezeFactor::vacuum()), 0.0);
        assert!((epr_optimal_gain(SqueezeFactor::new(5.0).unwrap()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_minimum_is_inverse_cosh() {
        let mut prev = f64::INFINITY;
        for k in 0..=30 {
            let r = SqueezeFactor::new(0.1 * k as f64).unwrap();
            let v = epr_combination_variance(r, epr_optimal_gain(r));
            assert!((v - 1.0 / r.cosh2r()).abs() < 1e-12);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn rotation_examples() {
        let (x, y) = rotate_quadratures(1.0, 0.0, RotationAngle::zero());
        assert_eq!((x, y), (1.0, 0.0));
        let (x, y) = rotate_quadratures(1.0, 0.0, RotationAngle::new(PI / 2.0).unwrap());
        assert!(x.abs() < 1e-15 && (y + 1.0).abs() < 1e-15);
        let (x, y) = rotate_quadratures(0.3, -0.4, RotationAngle::new(PI).unwrap());
        assert!((x + 0.3).abs() < 1e-15 && (y - 0.4).abs() < 1e-15);
    }

    #[test]
    fn canonical_range() {
        assert_eq!(RotationAngle::new(PI).unwrap().radians(), PI);
        assert_eq!(RotationAngle::new(-PI).unwrap().radians(), PI);
        assert!((RotationAngle::new(3.0 * PI / 2.0).unwrap().radians() + PI / 2.0).abs() < 1e-15);
        assert_eq!((-RotationAngle::new(PI).unwrap()).radians(), PI);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SqueezeFactor::new(-0.1).is_err());
        assert!(SqueezeFactor::new(f64::NAN).is_err());
        assert!(RotationAngle::new(f64::INFINITY).is_err());
        assert!(QuadratureVector::new([0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
