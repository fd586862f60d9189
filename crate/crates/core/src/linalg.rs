//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::graph::{Matrix, Vector};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Linear time-invariant realization `ẋ = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Self {
        assert!(a.is_square(), "state matrix must be square");
        assert_eq!(a.nrows(), b.nrows(), "B rows must match the state dimension");
        assert_eq!(a.ncols(), c.ncols(), "C columns must match the state dimension");
        StateSpace { a, b, c }
    }

    /// Block-diagonal stack with shared input and output `y₁ − y₂`.
    pub fn difference(&self, other: &StateSpace) -> StateSpace {
        StateSpace::new(block_diag(&self.a, &other.a), vstack(&self.b, &other.b), hstack(&self.c, &(-&other.c)))
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues in ascending
/// order and orthonormal eigenvectors as columns.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    if a.nrows() == 0 {
        return (vec![], Matrix::zeros(0, 0));
    }
    let sym = 0.5 * (a + a.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

/// Matrix exponential (Padé with scaling and squaring).
pub fn expm(a: &Matrix) -> Matrix {
    if a.nrows() == 0 {
        return a.clone();
    }
    a.clone().exp()
}

/// Orthonormal basis (as columns) of the orthogonal complement of `im a`.
pub fn orthonormal_complement(a: &Matrix) -> Matrix {
    let n = a.nrows();
    if a.ncols() == 0 {
        return Matrix::identity(n, n);
    }
    let gram = a.transpose() * a;
    let Some(gram_inv) = gram.clone().try_inverse() else {
        panic!("orthonormal_complement: columns must be linearly independent");
    };
    let projector = Matrix::identity(n, n) - a * gram_inv * a.transpose();
    let (values, vectors) = symmetric_eigen(&projector);
    let cols: Vec<Vector> = values
        .iter()
        .zip(vectors.column_iter())
        .filter(|(v, _)| **v > 0.5)
        .map(|(_, c)| c.into_owned())
        .collect();
    columns(n, &cols)
}

/// Inverse of a diagonal matrix.
pub fn diag_inverse(d: &Matrix) -> Matrix {
    Matrix::from_diagonal(&d.diagonal().map(|x| 1.0 / x))
}

/// Matrix with the given column-vectors stacked side by side, tolerating an
/// empty list.
pub fn columns(nrows: usize, cols: &[Vector]) -> Matrix {
    if cols.is_empty() {
        Matrix::zeros(nrows, 0)
    } else {
        Matrix::from_columns(cols)
    }
}

pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut m = Matrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((r1, c1), (r2, c2)).copy_from(b);
    m
}

pub fn vstack(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.ncols());
    let mut m = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

pub fn hstack(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

pub fn to_complex(a: &Matrix) -> CMatrix {
    a.map(|x| Complex::new(x, 0.0))
}

/// Largest absolute entry.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
