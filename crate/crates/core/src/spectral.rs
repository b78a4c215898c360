//! Chebyshev–Gauss–Lobatto grids, Lagrange interpolation on them, and the
//! associated collocation differentiation matrices.
//!
//! Nodes are ordered from `+1` down to `-1`, i.e. `nodes[j] = cos(jπ/N)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Distance below which an interpolation point is treated as a node.
pub const NODE_COINCIDENCE: f64 = 1e-14;

/// The `N + 1` Chebyshev–Gauss–Lobatto points for a resolution `N >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid<T> {
    n: usize,
    nodes: Vec<T>,
}

impl<T: Real> ChebyshevGrid<T> {
    pub fn new(n: usize) -> Result<Self> {
        cgl_nodes(n)
    }

    /// Resolution `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> T {
        self.nodes[j]
    }

    /// `c_j` weights of the Lobatto formulas: 2 at the endpoints, 1 inside.
    pub fn endpoint_weight(&self, j: usize) -> T {
        if j == 0 || j == self.n {
            real(2.0)
        } else {
            T::one()
        }
    }
}

/// Builds the CGL grid `cos(jπ/N)`, `j = 0..=N`.
///
/// The upper half is evaluated and mirrored so that `ζ_j = -ζ_{N-j}` holds
/// bit for bit; endpoints are assigned exactly.
pub fn cgl_nodes<T: Real>(n: usize) -> Result<ChebyshevGrid<T>> {
    if n == 0 {
        return Err(Error::InvalidResolution(n, 1));
    }
    let mut nodes = vec![T::zero(); n + 1];
    let step = T::pi() / real::<T>(n as f64);
    for j in 0..=n / 2 {
        let z = if j == 0 {
            T::one()
        } else if 2 * j == n {
            T::zero()
        } else {
            (step * real::<T>(j as f64)).cos()
        };
        nodes[j] = z;
        nodes[n - j] = -z;
    }
    Ok(ChebyshevGrid { n, nodes })
}

/// How the diagonal of the first-order matrix is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalRule {
    /// `d_ii = -Σ_{j≠i} d_ij`; annihilates constants exactly.
    #[default]
    NegativeSum,
    /// The closed-form diagonal, including the `±(2N²+1)/6` corners.
    ClosedForm,
}

/// Dense `(N+1) × (N+1)` collocation differentiation matrix of a given order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix<T: Real> {
    order: usize,
    n: usize,
    entries: DMatrix<T>,
}

impl<T: Real> DiffMatrix<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    /// `Σ_j d_ij z_j` for every row.
    pub fn apply(&self, values: &[T]) -> Result<Vec<T>> {
        let len = self.n + 1;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: values.len(),
            });
        }
        Ok((0..len).map(|i| self.row_dot(i, values)).collect())
    }

    /// `Σ_j d_ij z_j` for a single row; `values` must have `N + 1` entries.
    pub fn row_dot(&self, i: usize, values: &[T]) -> T {
        let row = self.entries.row(i);
        row.iter().zip(values).fold(T::zero(), |acc, (&d, &z)| acc + d * z)
    }
}

/// First-order differentiation matrix with the default diagonal rule.
pub fn diff_matrix<T: Real>(grid: &ChebyshevGrid<T>) -> DiffMatrix<T> {
    diff_matrix_with(grid, DiagonalRule::default())
}

pub fn diff_matrix_with<T: Real>(grid: &ChebyshevGrid<T>, rule: DiagonalRule) -> DiffMatrix<T> {
    let n = grid.n();
    let z = grid.nodes();
    let mut d = DMatrix::<T>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i == j {
                continue;
            }
            let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
            d[(i, j)] = grid.endpoint_weight(i) / grid.endpoint_weight(j) * sign / (z[i] - z[j]);
        }
    }
    match rule {
        DiagonalRule::NegativeSum => {
            for i in 0..=n {
                let off: T = (0..=n).filter(|&j| j != i).fold(T::zero(), |acc, j| acc + d[(i, j)]);
                d[(i, i)] = -off;
            }
        }
        DiagonalRule::ClosedForm => {
            let nf = real::<T>(n as f64);
            let corner = (real::<T>(2.0) * nf * nf + T::one()) / real(6.0);
            d[(0, 0)] = corner;
            d[(n, n)] = -corner;
            for i in 1..n {
                d[(i, i)] = -z[i] / (real::<T>(2.0) * (T::one() - z[i] * z[i]));
            }
        }
    }
    DiffMatrix {
        order: 1,
        n,
        entries: d,
    }
}

/// `k`-th matrix power of a first-order differentiation matrix.
pub fn diff_matrix_power<T: Real>(d: &DiffMatrix<T>, k: usize) -> Result<DiffMatrix<T>> {
    if k == 0 || d.order != 1 {
        return Err(Error::InvalidOrder(if k == 0 { 0 } else { d.order }));
    }
    let mut acc = d.entries.clone();
    for _ in 1..k {
        acc = &acc * &d.entries;
    }
    Ok(DiffMatrix {
        order: k,
        n: d.n,
        entries: acc,
    })
}

/// Samples `z(ζ_0), …, z(ζ_N)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues<T> {
    grid: ChebyshevGrid<T>,
    values: Vec<T>,
}

impl<T: Real> NodeValues<T> {
    pub fn new(grid: ChebyshevGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples of `f` at every node.
    pub fn from_fn(grid: ChebyshevGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().iter().map(|&z| f(z)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &ChebyshevGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Evaluates the Lagrange interpolant through the samples at `x ∈ [-1, 1]`.
    pub fn interpolate(&self, x: T) -> Result<T> {
        interpolate(self, x)
    }
}

/// `Σ_j L_{N,j}(x) z_j` with the Lobatto cardinal functions
/// `L_{N,j}(x) = (-1)^{j+1} (1 - x²) T'_N(x) / (c_j N² (x - ζ_j))`.
pub fn interpolate<T: Real>(vals: &NodeValues<T>, x: T) -> Result<T> {
    if !(x.abs() <= T::one()) {
        return Err(Error::OutOfDomain(to_f64(x)));
    }
    let grid = vals.grid();
    let tol: T = real(NODE_COINCIDENCE);
    if let Some(k) = grid.nodes().iter().position(|&z| (x - z).abs() <= tol) {
        return Ok(vals.values()[k]);
    }
    let n = grid.n();
    let nf = real::<T>(n as f64);
    let numer = (T::one() - x * x) * chebyshev_t_derivative(n, x);
    let scale = nf * nf;
    let mut sum = T::zero();
    for (j, (&z, &v)) in grid.nodes().iter().zip(vals.values()).enumerate() {
        let sign = if j % 2 == 0 { -T::one() } else { T::one() };
        sum += sign * numer / (grid.endpoint_weight(j) * scale * (x - z)) * v;
    }
    Ok(sum)
}

/// `T'_N(x) = N U_{N-1}(x)`, with `U` from the three-term recurrence.
pub fn chebyshev_t_derivative<T: Real>(n: usize, x: T) -> T {
    if n == 0 {
        return T::zero();
    }
    let two_x = real::<T>(2.0) * x;
    let (mut prev, mut cur) = (T::one(), two_x);
    if n == 1 {
        return T::one();
    }
    for _ in 2..n {
        let next = two_x * cur - prev;
        prev = cur;
        cur = next;
    }
    real::<T>(n as f64) * cur
}
