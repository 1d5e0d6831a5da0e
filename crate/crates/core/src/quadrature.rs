//! Quadrature rules on the reference triangle and on faces.
//!
//! Weights are normalized to sum to one; callers multiply by the element
//! area or face length.

use crate::{Error, Result};

/// Volume rule in barycentric coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Face rule on the unit parameter interval [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VolumeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integral of `f` over a triangle of the given area.
    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, area: f64, f: F) -> f64 {
        area * self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum::<f64>()
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, length: f64, f: F) -> f64 {
        length
            * self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(s, w)| w * f(*s))
                .sum::<f64>()
    }
}

/// Volume rule used for an approximation of the given degree: the centroid
/// for P1 and the 7-point degree-5 rule for P2.
pub fn volume_rule(degree: usize) -> Result<VolumeRule> {
    match degree {
        1 => Ok(centroid_rule()),
        2 => Ok(seven_point_rule()),
        _ => Err(Error::invalid(format!("no volume rule for degree {degree}"))),
    }
}

pub fn centroid_rule() -> VolumeRule {
    let t = 1.0 / 3.0;
    VolumeRule {
        points: vec![[t, t, t]],
        weights: vec![1.0],
    }
}

/// Degree-5 rule with 7 points (centroid plus two symmetric orbits).
pub fn seven_point_rule() -> VolumeRule {
    let s15 = 15f64.sqrt();
    let a1 = (9.0 + 2.0 * s15) / 21.0;
    let b1 = (6.0 - s15) / 21.0;
    let a2 = (9.0 - 2.0 * s15) / 21.0;
    let b2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let t = 1.0 / 3.0;
    VolumeRule {
        points: vec![
            [t, t, t],
            [a1, b1, b1],
            [b1, a1, b1],
            [b1, b1, a1],
            [a2, b2, b2],
            [b2, a2, b2],
            [b2, b2, a2],
        ],
        weights: vec![0.225, w1, w1, w1, w2, w2, w2],
    }
}

/// Edge-midpoint rule (degree 2). Used as the cheaper filter quadrature.
pub fn midpoint_rule() -> VolumeRule {
    let t = 1.0 / 3.0;
    VolumeRule {
        points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
        weights: vec![t, t, t],
    }
}

/// Two-point Gauss rule mapped to [0, 1].
pub fn edge_rule() -> EdgeRule {
    let d = 0.5 / 3f64.sqrt();
    EdgeRule {
        points: vec![0.5 - d, 0.5 + d],
        weights: vec![0.5, 0.5],
    }
}
