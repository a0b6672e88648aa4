//! Radial, non-negative, compactly supported pair potentials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature;

/// A radial interaction V(r) >= 0 vanishing for r > R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// V(r) = depth for r <= radius.
    SquareWell { depth: f64, radius: f64 },
    /// V(r) = lambda · inner(r).
    Scaled { lambda: f64, inner: Box<PotentialSpec> },
    /// Linear interpolation of (radii, values); zero beyond `support`.
    Tabulated { radii: Vec<f64>, values: Vec<f64>, support: f64 },
}

impl PotentialSpec {
    pub fn square_well(depth: f64, radius: f64) -> Result<Self> {
        let v = PotentialSpec::SquareWell { depth, radius };
        v.validate()?;
        Ok(v)
    }

    pub fn scaled(lambda: f64, inner: PotentialSpec) -> Result<Self> {
        let v = PotentialSpec::Scaled { lambda, inner: Box::new(inner) };
        v.validate()?;
        Ok(v)
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>, support: f64) -> Result<Self> {
        let v = PotentialSpec::Tabulated { radii, values, support };
        v.validate()?;
        Ok(v)
    }

    /// The zero potential (unit support, zero depth).
    pub fn zero() -> Self {
        PotentialSpec::SquareWell { depth: 0.0, radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::SquareWell { depth, radius } => {
                if !(depth.is_finite() && *depth >= 0.0) {
                    return invalid(format!("square well depth must be finite and >= 0, got {depth}"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid(format!("square well radius must be finite and > 0, got {radius}"));
                }
            }
            PotentialSpec::Scaled { lambda, inner } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return invalid(format!("scale factor must be finite and >= 0, got {lambda}"));
                }
                inner.validate()?;
            }
            PotentialSpec::Tabulated { radii, values, support } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return invalid("tabulated potential needs >= 2 points and equal-length columns");
                }
                if radii[0] != 0.0 {
                    return invalid("tabulated radial grid must start at r = 0");
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return invalid("tabulated radial grid must be strictly increasing");
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return invalid(format!("tabulated values must be finite and >= 0, found {v}"));
                }
                if !(support.is_finite() && *support > 0.0) {
                    return invalid(format!("support radius must be > 0, got {support}"));
                }
                if *radii.last().unwrap() < *support {
                    return invalid("tabulated grid must extend to the support radius");
                }
            }
        }
        Ok(())
    }

    /// Radius R beyond which V vanishes.
    pub fn support_radius(&self) -> f64 {
        match self {
            PotentialSpec::SquareWell { radius, .. } => *radius,
            PotentialSpec::Scaled { inner, .. } => inner.support_radius(),
            PotentialSpec::Tabulated { support, .. } => *support,
        }
    }

    /// True when V vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::SquareWell { depth, .. } => *depth == 0.0,
            PotentialSpec::Scaled { lambda, inner } => *lambda == 0.0 || inner.is_zero(),
            PotentialSpec::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::SquareWell { depth, radius } => {
                if r <= *radius {
                    *depth
                } else {
                    0.0
                }
            }
            PotentialSpec::Scaled { lambda, inner } => lambda * inner.value(r),
            PotentialSpec::Tabulated { radii, values, support } => {
                if r > *support || r < 0.0 {
                    return 0.0;
                }
                let i = radii.partition_point(|&x| x <= r);
                if i == 0 {
                    return values[0];
                }
                if i >= radii.len() {
                    return *values.last().unwrap();
                }
                let (r0, r1) = (radii[i - 1], radii[i]);
                let t = (r - r0) / (r1 - r0);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }
    }

    /// Sorted radii in [0, R] between which V is smooth, starting at 0 and
    /// ending at R.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::SquareWell { radius, .. } => vec![0.0, *radius],
            PotentialSpec::Scaled { inner, .. } => inner.breakpoints(),
            PotentialSpec::Tabulated { radii, support, .. } => {
                let mut b: Vec<f64> = radii.iter().copied().take_while(|&r| r < *support).collect();
                b.push(*support);
                b
            }
        }
    }

    /// ∫₀^R r^k V(r) dr.
    pub fn radial_moment(&self, k: i32) -> f64 {
        self.segment_integral(|r| r.powi(k) * self.value(r), 0.0)
    }

    fn segment_integral<F: Fn(f64) -> f64>(&self, f: F, frequency: f64) -> f64 {
        let b = self.breakpoints();
        let mut acc = crate::summation::NeumaierSum::new();
        for w in b.windows(2) {
            let panels = ((w[1] - w[0]) * frequency / 2.0).ceil().max(1.0) as usize;
            // sample strictly inside so that the value at a jump is the left limit
            acc.add(quadrature::integrate(&f, w[0], w[1], panels));
        }
        acc.value()
    }

    /// Radial Fourier transform V̂(p) = (4π/p)∫₀^R r V(r) sin(pr) dr,
    /// continued to V̂(0) = 4π∫ r²V.
    pub fn fourier_transform(&self, p_abs: f64) -> f64 {
        match self {
            PotentialSpec::SquareWell { depth, radius } => {
                *depth * 4.0 * PI * radius.powi(3) * ball_kernel(p_abs * radius)
            }
            PotentialSpec::Scaled { lambda, inner } => lambda * inner.fourier_transform(p_abs),
            PotentialSpec::Tabulated { .. } => self.fourier_transform_quadrature(p_abs),
        }
    }

    /// Fourier transform by composite quadrature, for any variant.
    pub fn fourier_transform_quadrature(&self, p_abs: f64) -> f64 {
        4.0 * PI * self.segment_integral(|r| r * r * self.value(r) * sinc(p_abs * r), p_abs)
    }

    /// Constant C with |V̂(p)| <= C/|p|, namely 4π∫ r V.
    pub fn fourier_decay_constant(&self) -> f64 {
        4.0 * PI * self.radial_moment(1)
    }
}

/// sin(x)/x, continuous at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (sin x − x cos x)/x³, the transform of a unit ball divided by 4πR³.
fn ball_kernel(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PotentialSpec::square_well(-1.0, 1.0).is_err());
        assert!(PotentialSpec::square_well(1.0, 0.0).is_err());
        assert!(PotentialSpec::scaled(-0.5, PotentialSpec::zero()).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 1.0], vec![1.0, f64::NAN], 1.0).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 0.5], vec![1.0, 1.0], 1.0).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 1.0], vec![1.0, -1.0], 1.0).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0], 2.0).is_ok());
    }

    #[test]
    fn transform_at_zero_is_volume_integral() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        assert!((v.fourier_transform(0.0) - 8.0 * PI / 3.0).abs() < 1e-13);
        assert!((v.fourier_transform_quadrature(0.0) - 8.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_potential_transform_vanishes() {
        let v = PotentialSpec::zero();
        for p in [0.0, 1.0, 50.0] {
            assert_eq!(v.fourier_transform(p), 0.0);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        for p in [1e-3, 0.3, 2.0 * PI, 17.0, 300.0] {
            let a = v.fourier_transform(p);
            let b = v.fourier_transform_quadrature(p);
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn transform_decays_like_inverse_square() {
        // |V̂(p)|·p² stays bounded by 8π·|R cos(pR)| + lower order
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        for p in [100.0, 1000.0, 1e4] {
            let scaled = v.fourier_transform(p) * p * p;
            assert!(scaled.abs() <= 8.0 * PI * (1.0 + 1.0 / p) + 1e-9);
        }
        assert!(v.fourier_transform(1e4).abs() <= v.fourier_decay_constant() / 1e4);
    }

    #[test]
    fn tabulated_step_reproduces_square_well() {
        let well = PotentialSpec::square_well(3.0, 1.5).unwrap();
        let tab = PotentialSpec::tabulated(vec![0.0, 1.5, 2.0], vec![3.0, 3.0, 0.0], 1.5).unwrap();
        for r in [0.0, 0.7, 1.5, 1.6] {
            assert_eq!(well.value(r), tab.value(r));
        }
        for p in [0.0, 1.0, 9.0] {
            assert!((well.fourier_transform(p) - tab.fourier_transform(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_is_linear() {
        let inner = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let s = PotentialSpec::scaled(0.25, inner.clone()).unwrap();
        assert_eq!(s.value(0.5), 0.5);
        assert!((s.fourier_transform(3.0) - 0.25 * inner.fourier_transform(3.0)).abs() < 1e-15);
        assert_eq!(s.support_radius(), 1.0);
    }
}
