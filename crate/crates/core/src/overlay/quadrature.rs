//! Symmetric triangle rules and Gauss-Legendre line rules.

use crate::error::{Error, Result};
use crate::mesh::{orient2d, Point};

/// Barycentric point and weight, weights summing to one.
pub type BaryRule = [([f64; 3], f64)];

const T2: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

const A1: f64 = 0.445_948_490_915_964_886_32;
const W1: f64 = 0.223_381_589_678_011_465_70;
const A2: f64 = 0.091_576_213_509_770_743_46;
const W2: f64 = 0.109_951_743_655_321_867_64;

// 6-point rule exact for polynomials of total degree 4.
const T4: [([f64; 3], f64); 6] = [
    ([A1, A1, 1.0 - 2.0 * A1], W1),
    ([A1, 1.0 - 2.0 * A1, A1], W1),
    ([1.0 - 2.0 * A1, A1, A1], W1),
    ([A2, A2, 1.0 - 2.0 * A2], W2),
    ([A2, 1.0 - 2.0 * A2, A2], W2),
    ([1.0 - 2.0 * A2, A2, A2], W2),
];

/// Triangle rule exact to polynomial degree `order` (2 or 4).
pub fn triangle_rule(order: usize) -> Result<&'static BaryRule> {
    match order {
        2 => Ok(&T2),
        4 => Ok(&T4),
        other => Err(Error::UnsupportedQuadratureOrder(other)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub point: Point,
    /// Barycentric coordinates in the integration triangle.
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Quadrature points on a counterclockwise triangle; weights sum to its area.
pub fn quad_points(tri: &[Point; 3], order: usize) -> Result<Vec<QuadPoint>> {
    let rule = triangle_rule(order)?;
    let area = 0.5 * orient2d(&tri[0], &tri[1], &tri[2]).abs();
    Ok(rule
        .iter()
        .map(|&(b, w)| QuadPoint {
            point: Point::from(tri[0].coords * b[0] + tri[1].coords * b[1] + tri[2].coords * b[2]),
            bary: b,
            weight: w * area,
        })
        .collect())
}

/// 5-point Gauss-Legendre rule on `[0, 1]`: (parameter, weight).
pub const GAUSS_LEGENDRE_5: [[f64; 2]; 5] = gauss5();
/// 2-point Gauss-Legendre rule on `[0, 1]`.
pub const GAUSS_LEGENDRE_2: [[f64; 2]; 2] = [
    [0.5 - 0.288_675_134_594_812_9, 0.5],
    [0.5 + 0.288_675_134_594_812_9, 0.5],
];

const fn gauss5() -> [[f64; 2]; 5] {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683_1,
        0.0,
        0.538_469_310_105_683_1,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let mut out = [[0.0; 2]; 5];
    let mut i = 0;
    while i < 5 {
        out[i] = [0.5 * (X[i] + 1.0), 0.5 * W[i]];
        i += 1;
    }
    out
}
