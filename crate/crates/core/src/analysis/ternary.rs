use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Position of a three-type composition in the equilateral triangle with
/// vertices `A = (0, 0)`, `C = (1, 0)`, `V = (1/2, sqrt(3)/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TernaryPoint {
    /// Barycentric weights `N_s / (N*M)`.
    pub weights: [f64; 3],
    pub x: f64,
    pub y: f64,
}

impl TernaryPoint {
    pub fn from_weights(weights: [f64; 3]) -> Self {
        Self { weights, x: weights[1] + 0.5 * weights[2], y: weights[2] * SQRT3 / 2.0 }
    }

    /// Inverse of the projection.
    pub fn from_xy(x: f64, y: f64) -> Self {
        let w2 = 2.0 * y / SQRT3;
        let w1 = x - 0.5 * w2;
        Self { weights: [1.0 - w1 - w2, w1, w2], x, y }
    }

    pub fn inside_triangle(&self, eps: f64) -> bool {
        self.weights.iter().all(|&w| w >= -eps)
    }
}

/// Projects use counts onto the triangle; `sites` is `N*M`.
pub fn ternary_project(counts: &[usize], sites: usize) -> Result<TernaryPoint> {
    if counts.len() != 3 {
        return Err(Error::RequiresThreeTypes(counts.len()));
    }
    let sum: usize = counts.iter().sum();
    if sum != sites || sites == 0 {
        return Err(Error::CountSumMismatch { expected: sites, got: sum });
    }
    let n = sites as f64;
    Ok(TernaryPoint::from_weights([counts[0] as f64 / n, counts[1] as f64 / n, counts[2] as f64 / n]))
}
