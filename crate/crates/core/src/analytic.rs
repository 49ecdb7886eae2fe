//! Closed-form reference values.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use thiserror::Error;

use crate::qmat::{DensityMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension {0} must be at least 2")]
    Dimension(usize),
}

/// `cos(theta)|00> + sin(theta)|11>` for `theta` in `(0, pi/4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaState {
    theta: f64,
}

impl ThetaState {
    pub fn new(theta: f64) -> Result<Self, AnalyticError> {
        if theta > 0.0 && theta <= FRAC_PI_4 + 1e-15 {
            Ok(Self { theta })
        } else {
            Err(AnalyticError::OutOfRange {
                name: "theta",
                value: theta,
                range: "(0, pi/4]",
            })
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn density(&self) -> DensityMatrix {
        let mut v = DVector::<C64>::zeros(4);
        v[0] = C64::new(self.theta.cos(), 0.0);
        v[3] = C64::new(self.theta.sin(), 0.0);
        DensityMatrix::pure(&v, &[2, 2]).expect("unit vector")
    }
}

/// Angle `arctan(2^{-1/4})` where the two-qubit formula changes branch.
pub fn theta_breakpoint() -> f64 {
    2f64.powf(-0.25).atan()
}

fn check_dim(d: usize) -> Result<(), AnalyticError> {
    if d >= 2 {
        Ok(())
    } else {
        Err(AnalyticError::Dimension(d))
    }
}

/// Optimal 2-broadcasting fidelity of the maximally entangled state,
/// `sqrt((d+1)/(2d))`.
pub fn f2_mes(d: usize) -> Result<f64, AnalyticError> {
    check_dim(d)?;
    let d = d as f64;
    Ok(((d + 1.0) / (2.0 * d)).sqrt())
}

/// `cos^2 t + sin^2 t / sqrt 2`.
pub fn f2_low_branch(theta: f64) -> f64 {
    theta.cos().powi(2) + theta.sin().powi(2) / 2f64.sqrt()
}

/// `sqrt(3/2 (cos^4 t + sin^4 t))`.
pub fn f2_high_branch(theta: f64) -> f64 {
    (1.5 * (theta.cos().powi(4) + theta.sin().powi(4))).sqrt()
}

/// Optimal 2-broadcasting fidelity of a two-qubit pure state.
pub fn f2_two_qubit(s: ThetaState) -> f64 {
    if s.theta <= theta_breakpoint() {
        f2_low_branch(s.theta)
    } else {
        f2_high_branch(s.theta)
    }
}

/// Broadcasting power of the universal cloner, `sqrt((d+1)/(2d))`; no
/// symmetric 2-broadcaster does better.
pub fn power_upsilon(d: usize) -> Result<f64, AnalyticError> {
    f2_mes(d)
}

/// `h_2(x) = -x log2 x - (1-x) log2(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64, AnalyticError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(AnalyticError::OutOfRange {
            name: "x",
            value: x,
            range: "[0, 1]",
        });
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Bound on `|I(A:B)_rho - I(A:B)_sigma|` for states at trace distance
/// `gamma`: `8 gamma log2|A| + gamma log2(|A|-1) + 2 h_2(2 gamma) + h_2(gamma)`.
pub fn mi_continuity_bound(gamma: f64, dim_a: usize) -> Result<f64, AnalyticError> {
    if !(0.0..=0.5).contains(&gamma) {
        return Err(AnalyticError::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1/2]",
        });
    }
    check_dim(dim_a)?;
    let a = dim_a as f64;
    Ok(8.0 * gamma * a.log2()
        + gamma * (a - 1.0).log2()
        + 2.0 * binary_entropy(2.0 * gamma)?
        + binary_entropy(gamma)?)
}
