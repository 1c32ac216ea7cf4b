//! Uniform grid on `[0, X]` with composite Simpson weights and
//! fourth-order finite differences.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Smallest accepted node count.
pub const MIN_NODES: usize = 16;
/// Default truncation length.
pub const DEFAULT_X_MAX: f64 = 20.0;

/// Nodes `x_j = j h`, `j = 0..n`, with `n` odd so Simpson applies.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineGrid {
    x_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
}

impl HalfLineGrid {
    /// `n` is rounded up to the next odd number.
    pub fn new(x_max: f64, n: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::InvalidGrid(format!("x_max must be positive, got {x_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::GridTooSmall { got: n, min: MIN_NODES });
        }
        let n = if n.is_multiple_of(2) { n + 1 } else { n };
        let h = x_max / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        let mut weights = vec![0.0; n];
        for (j, w) in weights.iter_mut().enumerate() {
            *w = if j == 0 || j == n - 1 {
                h / 3.0
            } else if j % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
        Ok(HalfLineGrid {
            x_max,
            nodes,
            weights,
            h,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Simpson weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cell midpoints `x_{j+1/2}`, `j = 0..n-1`.
    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.len() - 1).map(|j| (j as f64 + 0.5) * self.h).collect()
    }

    /// Index range of the last 10% of nodes (at least three nodes).
    pub fn tail_range(&self) -> std::ops::Range<usize> {
        let n = self.len();
        let k = (n / 10).max(3);
        n - k..n
    }
}

/// Complex samples tied to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<HalfLineGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<HalfLineGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSample { x: grid.nodes[j] });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Pointwise map, same grid.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| f(x, v))
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction::new(self.grid.clone(), values)
    }
}

fn same_grid(f: &GridFunction, g: &GridFunction) -> Result<()> {
    if Arc::ptr_eq(&f.grid, &g.grid) || *f.grid == *g.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Evaluate `f` at every node.
pub fn sample(f: impl Fn(f64) -> Complex64, grid: &Arc<HalfLineGrid>) -> Result<GridFunction> {
    let values = grid.nodes.iter().map(|&x| f(x)).collect();
    GridFunction::new(grid.clone(), values)
}

/// `<f|g> = sum_j w_j conj(f_j) g_j` with Simpson weights.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    same_grid(f, g)?;
    Ok(f.grid
        .weights
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(w, (a, b))| *w * a.conj() * b)
        .sum())
}

/// First or second derivative, fourth order everywhere (one-sided near the ends).
pub fn derivative(f: &GridFunction, order: usize) -> Result<GridFunction> {
    let v = &f.values;
    let n = v.len();
    let h = f.grid.h;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    match order {
        1 => {
            let s = 1.0 / (12.0 * h);
            let edge0 =
                |v: &[Complex64]| -25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4];
            let edge1 =
                |v: &[Complex64]| -3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4];
            out[0] = edge0(&v[0..5]) * s;
            out[1] = edge1(&v[0..5]) * s;
            // mirrored stencils flip sign for odd derivatives
            let rev: Vec<Complex64> = v[n - 5..].iter().rev().copied().collect();
            out[n - 1] = -edge0(&rev) * s;
            out[n - 2] = -edge1(&rev) * s;
            for j in 2..n - 2 {
                out[j] = (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) * s;
            }
        }
        2 => {
            let s = 1.0 / (12.0 * h * h);
            let edge0 = |v: &[Complex64]| {
                45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]
            };
            let edge1 = |v: &[Complex64]| {
                10.0 * v[0] - 15.0 * v[1] - 4.0 * v[2] + 14.0 * v[3] - 6.0 * v[4] + v[5]
            };
            out[0] = edge0(&v[0..6]) * s;
            out[1] = edge1(&v[0..6]) * s;
            let rev: Vec<Complex64> = v[n - 6..].iter().rev().copied().collect();
            out[n - 1] = edge0(&rev) * s;
            out[n - 2] = edge1(&rev) * s;
            for j in 2..n - 2 {
                out[j] = (-v[j - 2] + 16.0 * v[j - 1] - 30.0 * v[j] + 16.0 * v[j + 1] - v[j + 2]) * s;
            }
        }
        _ => {
            return Err(Error::InvalidParams(format!(
                "derivative order must be 1 or 2, got {order}"
            )))
        }
    }
    GridFunction::new(f.grid.clone(), out)
}

/// Composite Gauss-Legendre nodes/weights (8 points) on `[a, b]`.
pub(crate) fn gauss_legendre_8(a: f64, b: f64) -> [(f64, f64); 8] {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[2 * i] = (c - r * X[i], r * W[i]);
        out[2 * i + 1] = (c + r * X[i], r * W[i]);
    }
    out
}
