use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Smallest accepted number of grid points per axis.
pub const MIN_POINTS: usize = 5;

/// Uniform tensor grid on a rectangle in R^{2n}. Points are numbered
/// lexicographically with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    points: usize,
    strides: Vec<usize>,
}

impl GridSpec {
    pub fn new(n: usize, lo: Vec<f64>, hi: Vec<f64>, points: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "the grid solver supports n = 1 or 2, got n = {n}"
            )));
        }
        let dim = 2 * n;
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "domain corners need {dim} coordinates, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(a) =
            (0..dim).find(|&a| !(lo[a].is_finite() && hi[a].is_finite() && lo[a] < hi[a]))
        {
            return Err(Error::InvalidArgument(format!(
                "axis {a}: need finite lo < hi, got [{}, {}]",
                lo[a], hi[a]
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "pointsPerAxis must be at least {MIN_POINTS}, got {points}"
            )));
        }
        let strides = (0..dim).map(|a| points.pow((dim - 1 - a) as u32)).collect();
        Ok(GridSpec {
            n,
            lo,
            hi,
            points,
            strides,
        })
    }

    /// Same `points` on the cube `[lo, hi]^{2n}`.
    pub fn cube(n: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(n, vec![lo; 2 * n], vec![hi; 2 * n], points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.points - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, k: usize) -> Vec<usize> {
        self.strides.iter().map(|s| (k / s) % self.points).collect()
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lo[a] + self.spacing(a) * i as f64)
            .collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.multi_index(k)
            .iter()
            .any(|&i| i == 0 || i == self.points - 1)
    }

    /// Interior point indices in lexicographic order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.is_boundary(k)).collect()
    }

    /// Same domain with a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.n, self.lo.clone(), self.hi.clone(), points)
    }
}

/// Grid values of `u` or `g`. For solutions the boundary layer carries the
/// Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::EntryCount {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.coords(k))).collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &GridSpec, v: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![v; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Centered second differences at an interior point; cross derivatives use
/// the 4-point stencil. Exact for quadratics.
pub fn discrete_hessian(u: &ScalarField, point: usize) -> SymmetricMatrix {
    let grid = u.grid();
    assert!(
        point < grid.len() && !grid.is_boundary(point),
        "discrete_hessian: point {point} is not interior"
    );
    let v = u.values();
    let dim = grid.dim();
    let mut h = vec![0.0; dim * dim];
    for a in 0..dim {
        let (sa, ha) = (grid.stride(a), grid.spacing(a));
        h[a * dim + a] = (v[point + sa] - 2.0 * v[point] + v[point - sa]) / (ha * ha);
        for b in a + 1..dim {
            let (sb, hb) = (grid.stride(b), grid.spacing(b));
            let cross = (v[point + sa + sb] - v[point + sa - sb] - v[point - sa + sb]
                + v[point - sa - sb])
                / (4.0 * ha * hb);
            h[a * dim + b] = cross;
            h[b * dim + a] = cross;
        }
    }
    SymmetricMatrix::symmetrized(dim, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = GridSpec::new(1, vec![0.0, -1.0], vec![1.0, 1.0], 5).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.multi_index(7), vec![1, 2]);
        assert_eq!(g.coords(7), vec![0.25, 0.0]);
        assert!(g.is_boundary(4) && !g.is_boundary(12));
        assert_eq!(g.interior().len(), 9);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::cube(3, 0.0, 1.0, 5).is_err());
        assert!(GridSpec::cube(1, 0.0, 1.0, 4).is_err());
        assert!(GridSpec::new(1, vec![0.0, 1.0], vec![1.0, 1.0], 5).is_err());
        assert!(GridSpec::new(1, vec![0.0], vec![1.0], 5).is_err());
    }

    #[test]
    fn hessian_is_exact_for_quadratics() {
        let g = GridSpec::new(1, vec![-1.0, 0.5], vec![1.0, 2.0], 7).unwrap();
        let sq = ScalarField::from_fn(&g, |x| x[0] * x[0] + x[1] * x[1]);
        let mixed = ScalarField::from_fn(&g, |x| x[0] * x[1]);
        let flat = ScalarField::constant(&g, 3.0);
        for k in g.interior() {
            let h = discrete_hessian(&sq, k);
            assert!(h.max_abs_diff(&SymmetricMatrix::scaled_identity(2, 2.0)) < 1e-12);
            let h = discrete_hessian(&mixed, k);
            assert!(
                h.max_abs_diff(&SymmetricMatrix::from_fn(2, |i, j| (i != j) as u8 as f64)) < 1e-12
            );
            assert_eq!(discrete_hessian(&flat, k), SymmetricMatrix::zeros(2));
        }
    }

    #[test]
    fn hessian_in_four_dimensions() {
        let g = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        let u = ScalarField::from_fn(&g, |x| x[0] * x[3] + 0.5 * x[1] * x[1] - x[2] * x[1]);
        let k = g.interior()[10];
        let h = discrete_hessian(&u, k);
        let expected = SymmetricMatrix::from_rows(&[
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, -1.0, 0.0],
            vec![0.0, -1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-12);
    }
}
