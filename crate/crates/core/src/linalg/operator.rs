use super::{CMatrix, CVector, C64};

/// A linear map `C^ncols -> C^nrows` with a matching adjoint.
///
/// Implementations must satisfy `<A x, y> = <x, A* y>`; [`check_adjoint`]
/// verifies that on random pairs.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    fn apply(&self, x: &CVector) -> CVector;

    fn apply_adjoint(&self, y: &CVector) -> CVector;

    /// Rough flop count of one [`apply`](Self::apply).
    fn cost_hint(&self) -> f64 {
        (self.nrows() * self.ncols()) as f64
    }

    fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.nrows(), self.ncols(), "operand row count");
        let mut out = CMatrix::zeros(self.nrows(), x.ncols());
        for j in 0..x.ncols() {
            let col = self.apply(&x.column(j).into_owned());
            out.set_column(j, &col);
        }
        out
    }

    fn apply_adjoint_columns(&self, y: &CMatrix) -> CMatrix {
        assert_eq!(y.nrows(), self.nrows(), "operand row count");
        let mut out = CMatrix::zeros(self.ncols(), y.ncols());
        for j in 0..y.ncols() {
            let col = self.apply_adjoint(&y.column(j).into_owned());
            out.set_column(j, &col);
        }
        out
    }
}

impl LinearOperator for CMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &CVector) -> CVector {
        self * x
    }

    fn apply_adjoint(&self, y: &CVector) -> CVector {
        self.ad_mul(y)
    }

    fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        self * x
    }

    fn apply_adjoint_columns(&self, y: &CMatrix) -> CMatrix {
        self.ad_mul(y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &CVector) -> CVector {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &CVector) -> CVector {
        (**self).apply_adjoint(y)
    }
    fn cost_hint(&self) -> f64 {
        (**self).cost_hint()
    }
    fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        (**self).apply_columns(x)
    }
    fn apply_adjoint_columns(&self, y: &CMatrix) -> CMatrix {
        (**self).apply_adjoint_columns(y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &CVector) -> CVector {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &CVector) -> CVector {
        (**self).apply_adjoint(y)
    }
    fn cost_hint(&self) -> f64 {
        (**self).cost_hint()
    }
    fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        (**self).apply_columns(x)
    }
    fn apply_adjoint_columns(&self, y: &CMatrix) -> CMatrix {
        (**self).apply_adjoint_columns(y)
    }
}

/// Materialize an operator by applying it to every unit vector.
pub fn densify<A: LinearOperator + ?Sized>(op: &A) -> CMatrix {
    let n = op.ncols();
    op.apply_columns(&CMatrix::identity(n, n))
}

/// The zero map of a given shape.
#[derive(Debug, Clone, Copy)]
pub struct ZeroOperator {
    pub rows: usize,
    pub cols: usize,
}

impl LinearOperator for ZeroOperator {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, _x: &CVector) -> CVector {
        CVector::zeros(self.rows)
    }
    fn apply_adjoint(&self, _y: &CVector) -> CVector {
        CVector::zeros(self.cols)
    }
    fn cost_hint(&self) -> f64 {
        0.0
    }
}

type VecMap<'a> = Box<dyn Fn(&CVector) -> CVector + Send + Sync + 'a>;

/// An operator built from a pair of closures.
pub struct FnOperator<'a> {
    rows: usize,
    cols: usize,
    forward: VecMap<'a>,
    adjoint: VecMap<'a>,
    cost: f64,
}

impl<'a> FnOperator<'a> {
    pub fn new<F, G>(rows: usize, cols: usize, forward: F, adjoint: G) -> Self
    where
        F: Fn(&CVector) -> CVector + Send + Sync + 'a,
        G: Fn(&CVector) -> CVector + Send + Sync + 'a,
    {
        Self {
            rows,
            cols,
            forward: Box::new(forward),
            adjoint: Box::new(adjoint),
            cost: (rows * cols) as f64,
        }
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }
}

impl LinearOperator for FnOperator<'_> {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &CVector) -> CVector {
        (self.forward)(x)
    }
    fn apply_adjoint(&self, y: &CVector) -> CVector {
        (self.adjoint)(y)
    }
    fn cost_hint(&self) -> f64 {
        self.cost
    }
}

/// Largest relative adjoint defect `|<Ax,y> - <x,A*y>| / (|x| |y| |A|)` over
/// `trials` random pairs. `norm_a` is a norm estimate of the operator.
pub fn check_adjoint<A: LinearOperator + ?Sized>(op: &A, norm_a: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = super::seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = super::gaussian_vector(op.ncols(), &mut rng);
        let y = super::gaussian_vector(op.nrows(), &mut rng);
        let lhs: C64 = op.apply(&x).dotc(&y);
        let rhs: C64 = x.dotc(&op.apply_adjoint(&y));
        let scale = x.norm() * y.norm() * norm_a.max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    worst
}
