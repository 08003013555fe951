//! Tensor Gauss-Legendre rules and panels graded toward the corner `(-1, -1)`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let order = NonZeroUsize::new(order)
        .ok_or_else(|| Error::InvalidArgument("quadrature order must be positive".into()))?;
    let rule = GaussLegendre::new(order);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Rule on `[a, b]` obtained by an affine map.
pub fn mapped(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (h, c) = (0.5 * (b - a), 0.5 * (a + b));
    (
        rule.0.iter().map(|&x| c + h * x).collect(),
        rule.1.iter().map(|&w| h * w).collect(),
    )
}

/// Tensor rule on a rectangle: points `(x[a], y[b])` with weight `wx[a] wy[b]`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub x: Vec<f64>,
    pub wx: Vec<f64>,
    pub y: Vec<f64>,
    pub wy: Vec<f64>,
}

impl Panel {
    pub fn rectangle(rule: &(Vec<f64>, Vec<f64>), x: (f64, f64), y: (f64, f64)) -> Panel {
        let (px, wx) = mapped(rule, x.0, x.1);
        let (py, wy) = mapped(rule, y.0, y.1);
        Panel { x: px, wx, y: py, wy }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_{a,b} wx[a] wy[b] f(x[a], y[b])`.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (xa, wa) in self.x.iter().zip(&self.wx) {
            let mut inner = 0.0;
            for (yb, wb) in self.y.iter().zip(&self.wy) {
                inner += wb * f(*xa, *yb);
            }
            total += wa * inner;
        }
        total
    }
}

/// Geometric grading toward `(-1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub ratio: f64,
    pub levels: usize,
}

impl Default for Grading {
    fn default() -> Self {
        Grading { ratio: 0.25, levels: 12 }
    }
}

/// Composite panels covering `[-1, 1]^2`. Level `l` is the L-shaped region
/// between the corner squares of side `2 ratio^l` and `2 ratio^(l+1)`,
/// split into three rectangles; the last corner square is one panel.
pub fn graded_panels(order: usize, grading: Grading) -> Result<Vec<Panel>> {
    if !(grading.ratio > 0.0 && grading.ratio < 1.0) {
        return Err(Error::InvalidArgument("grading ratio must lie in (0, 1)".into()));
    }
    let rule = gauss_legendre(order)?;
    let mut panels = Vec::with_capacity(3 * grading.levels + 1);
    let mut side = 2.0;
    for _ in 0..grading.levels {
        let inner = side * grading.ratio;
        let (a, b, c) = (-1.0, -1.0 + inner, -1.0 + side);
        panels.push(Panel::rectangle(&rule, (b, c), (a, b)));
        panels.push(Panel::rectangle(&rule, (a, b), (b, c)));
        panels.push(Panel::rectangle(&rule, (b, c), (b, c)));
        side = inner;
    }
    panels.push(Panel::rectangle(&rule, (-1.0, -1.0 + side), (-1.0, -1.0 + side)));
    Ok(panels)
}
