//! Sampling grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::families::from_reference;
use crate::{Error, Result};

/// Point locations, 1D or 2D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Points {
    Line(Vec<f64>),
    Plane(Vec<[f64; 2]>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Line(p) => p.len(),
            Points::Plane(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// An empty point set with the same dimension as `self`.
    pub fn empty_like(&self) -> Points {
        match self {
            Points::Line(_) => Points::Line(Vec::new()),
            Points::Plane(_) => Points::Plane(Vec::new()),
        }
    }
}

/// Structure of the structured part of a grid. Fast partial inverses are
/// only available for the structured kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    /// `t_m = m / M` on `[0, 1)`.
    Equispaced { m: usize },
    /// `cos(pi (2a + 1) / (2M))` on `[-1, 1]`.
    ChebyshevNodes { m: usize },
    /// `cos(pi b / (M - 1))` on `[-1, 1]`.
    ChebyshevExtremae { m: usize },
    /// Nodes in `s_x` times extremae in `s_y`, mapped onto `range`; point
    /// `(a, b)` is stored at index `a * extremae + b`.
    ChebyshevTensor { nodes: usize, extremae: usize, range: (f64, f64) },
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    PointEvaluation,
    GalerkinInnerProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub structured: Points,
    pub extra: Points,
    pub kind: GridKind,
    pub functional: FunctionalKind,
}

impl Grid {
    fn structured(points: Points, kind: GridKind) -> Grid {
        let extra = points.empty_like();
        Grid {
            structured: points,
            extra,
            kind,
            functional: FunctionalKind::PointEvaluation,
        }
    }

    pub fn scattered(points: Points) -> Grid {
        Grid::structured(points, GridKind::Scattered)
    }

    /// Replace the extra points.
    pub fn with_extra(mut self, extra: Points) -> Result<Grid> {
        if std::mem::discriminant(&extra) != std::mem::discriminant(&self.structured) {
            return Err(Error::DimensionMismatch(
                "extra points must have the dimension of the structured points".into(),
            ));
        }
        self.extra = extra;
        Ok(self)
    }

    pub fn m_n(&self) -> usize {
        self.structured.len()
    }

    pub fn m_k(&self) -> usize {
        self.extra.len()
    }
}

fn require_points(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("a grid needs at least one point".into()));
    }
    Ok(())
}

pub fn equispaced_points(m: usize) -> Vec<f64> {
    (0..m).map(|j| j as f64 / m as f64).collect()
}

pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..m)
        .map(|a| (PI * (2 * a + 1) as f64 / (2 * m) as f64).cos())
        .collect()
}

pub fn chebyshev_extremae(m: usize) -> Vec<f64> {
    (0..m)
        .map(|b| (PI * b as f64 / (m - 1) as f64).cos())
        .collect()
}

/// Periodic equispaced grid on `[0, 1)`.
pub fn grid_equispaced(m: usize) -> Result<Grid> {
    require_points(m)?;
    Ok(Grid::structured(
        Points::Line(equispaced_points(m)),
        GridKind::Equispaced { m },
    ))
}

pub fn grid_chebyshev_nodes(m: usize) -> Result<Grid> {
    require_points(m)?;
    Ok(Grid::structured(
        Points::Line(chebyshev_nodes(m)),
        GridKind::ChebyshevNodes { m },
    ))
}

pub fn grid_chebyshev_extremae(m: usize) -> Result<Grid> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "Chebyshev extremae need at least two points".into(),
        ));
    }
    Ok(Grid::structured(
        Points::Line(chebyshev_extremae(m)),
        GridKind::ChebyshevExtremae { m },
    ))
}

/// Tensor grid of Chebyshev nodes (`s_x`) and extremae (`s_y`) on `range`.
///
/// With an even `nodes == extremae` the two families never coincide, so
/// the grid stays off the diagonal `s_x = s_y`.
pub fn grid_chebyshev_tensor(nodes: usize, extremae: usize, range: (f64, f64)) -> Result<Grid> {
    require_points(nodes)?;
    if extremae < 2 {
        return Err(Error::InvalidArgument(
            "Chebyshev extremae need at least two points".into(),
        ));
    }
    if !(range.0 < range.1) {
        return Err(Error::InvalidArgument("empty parameter range".into()));
    }
    let xs: Vec<f64> = chebyshev_nodes(nodes).iter().map(|&x| from_reference(x, range)).collect();
    let ys: Vec<f64> = chebyshev_extremae(extremae)
        .iter()
        .map(|&y| from_reference(y, range))
        .collect();
    let pts = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
        .collect();
    Ok(Grid::structured(
        Points::Plane(pts),
        GridKind::ChebyshevTensor { nodes, extremae, range },
    ))
}

/// `1 / r_j` followed by `1 - 1 / r_j`, with `r_j` equispaced on `[1, 1000]`.
pub fn grid_clustered_boundary(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one clustered point".into()));
    }
    let r: Vec<f64> = if k == 1 {
        vec![1.0]
    } else {
        (0..k).map(|j| 1.0 + 999.0 * j as f64 / (k - 1) as f64).collect()
    };
    let mut out: Vec<f64> = r.iter().map(|&r| 1.0 / r).collect();
    out.extend(r.iter().map(|&r| 1.0 - 1.0 / r));
    Ok(out)
}

/// `K` points at `offset` above the diagonal, then `K` below. Base points
/// sit at the cell midpoints of `range`; they are pulled inward when the
/// offset would leave the square.
pub fn grid_near_diagonal(k: usize, offset: f64, range: (f64, f64)) -> Result<Vec<[f64; 2]>> {
    if !(offset > 0.0) || !offset.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "near-diagonal offset must be positive, got {offset}"
        )));
    }
    if offset >= range.1 - range.0 {
        return Err(Error::InvalidArgument("offset exceeds the parameter range".into()));
    }
    let h = (range.1 - range.0) / k as f64;
    let base: Vec<f64> = (0..k).map(|j| range.0 + (j as f64 + 0.5) * h).collect();
    let mut out = Vec::with_capacity(2 * k);
    for &s in &base {
        let s = s.min(range.1 - offset);
        out.push([s, s + offset]);
    }
    for &s in &base {
        let s = s.max(range.0 + offset);
        out.push([s, s - offset]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_formulas() {
        assert_eq!(equispaced_points(2), vec![0.0, 0.5]);
        let n = chebyshev_nodes(1);
        assert!(n[0].abs() < 1e-16);
        let mut e = chebyshev_extremae(3);
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((e[0] + 1.0).abs() < 1e-15 && e[1].abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
        assert!(grid_equispaced(0).is_err());
        assert!(grid_chebyshev_extremae(1).is_err());
    }

    #[test]
    fn clustered() {
        assert_eq!(grid_clustered_boundary(1).unwrap(), vec![1.0, 0.0]);
        let p = grid_clustered_boundary(2).unwrap();
        let expect = [1.0, 1e-3, 0.0, 0.999];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = grid_clustered_boundary(5).unwrap();
        assert_eq!(p.len(), 10);
        for j in 0..5 {
            assert!((p[j] + p[j + 5] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn near_diagonal() {
        let p = grid_near_diagonal(1, 1e-3, (0.0, 0.5)).unwrap();
        assert_eq!(p[0], [0.25, 0.251]);
        assert_eq!(p[1], [0.25, 0.249]);
        assert!(grid_near_diagonal(3, 0.0, (0.0, 0.5)).is_err());
        let p = grid_near_diagonal(50, 0.02, (0.0, 0.5)).unwrap();
        assert_eq!(p.len(), 100);
        for q in &p {
            assert!(((q[0] - q[1]).abs() - 0.02).abs() < 1e-14);
            assert!(q.iter().all(|&s| (0.0..=0.5).contains(&s)));
        }
    }

    #[test]
    fn tensor_grid_avoids_diagonal() {
        let g = grid_chebyshev_tensor(40, 40, (0.0, 0.5)).unwrap();
        let Points::Plane(p) = &g.structured else { panic!() };
        let gap = p.iter().map(|q| (q[0] - q[1]).abs()).fold(f64::INFINITY, f64::min);
        assert!(gap > 1e-6);
        assert_eq!(g.m_n(), 1600);
    }

    #[test]
    fn deterministic() {
        assert_eq!(grid_chebyshev_tensor(6, 7, (0.0, 0.5)).unwrap(), grid_chebyshev_tensor(6, 7, (0.0, 0.5)).unwrap());
    }
}
