//! Points, exact distances, farthest-point scans, and Radon points.

use crate::scalar::Scalar;
use indexmap::IndexMap;
use thiserror::Error;

/// Identifier of a point within a live set.
pub type PointId = u64;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty point set")]
    EmptySet,
    #[error("radon_point expects exactly d+2 = {expected} points, got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("degenerate configuration: no sign-split Radon partition")]
    Degenerate,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("id {0} already live")]
    DuplicateId(PointId),
    #[error("id {0} not live")]
    UnknownId(PointId),
}

/// A point with identity: the unit of insertion and deletion.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<F: Scalar> {
    pub id: PointId,
    pub coords: Vec<F>,
}

impl<F: Scalar> Point<F> {
    pub fn new(id: PointId, coords: Vec<F>) -> Result<Self, GeomError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        Ok(Point { id, coords })
    }

    /// Anonymous point (id 0), for synthesized locations such as centerpoints.
    pub fn anon(coords: Vec<F>) -> Self {
        Point { id: 0, coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn dist<F: Scalar>(p: &Point<F>, q: &Point<F>) -> F {
    assert_eq!(
        p.dim(),
        q.dim(),
        "dist: dimension mismatch {} vs {}",
        p.dim(),
        q.dim()
    );
    dist_coords(&p.coords, &q.coords)
}

pub fn dist_coords<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        let dlt = *x - *y;
        acc = acc + dlt * dlt;
    }
    acc.sqrt()
}

/// An id-indexed collection of points sharing one ambient dimension.
#[derive(Debug, Clone)]
pub struct PointSet<F: Scalar> {
    members: IndexMap<PointId, Point<F>>,
    dim: usize,
}

impl<F: Scalar> PointSet<F> {
    pub fn new(dim: usize) -> Self {
        PointSet {
            members: IndexMap::new(),
            dim,
        }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Point<F>>) -> Result<Self, GeomError> {
        let mut set = Self::new(dim);
        for p in points {
            set.insert(p)?;
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn insert(&mut self, p: Point<F>) -> Result<(), GeomError> {
        if p.dim() != self.dim {
            return Err(GeomError::DimensionMismatch(p.dim(), self.dim));
        }
        if self.members.contains_key(&p.id) {
            return Err(GeomError::DuplicateId(p.id));
        }
        self.members.insert(p.id, p);
        Ok(())
    }

    pub fn remove(&mut self, id: PointId) -> Result<Point<F>, GeomError> {
        self.members.shift_remove(&id).ok_or(GeomError::UnknownId(id))
    }

    pub fn get(&self, id: PointId) -> Option<&Point<F>> {
        self.members.get(&id)
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.members.contains_key(&id)
    }

    /// Iteration order is insertion order, which keeps runs reproducible.
    pub fn iter(&self) -> impl Iterator<Item = &Point<F>> {
        self.members.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.members.keys().copied()
    }

    pub fn nth(&self, idx: usize) -> Option<&Point<F>> {
        self.members.get_index(idx).map(|(_, p)| p)
    }
}

/// The member of `set` farthest from `c`, with its distance.
/// Ties break toward the smallest id.
pub fn farthest<'a, F: Scalar>(
    c: &Point<F>,
    set: &'a PointSet<F>,
) -> Result<(&'a Point<F>, F), GeomError> {
    farthest_of(c, set.iter())
}

pub fn farthest_of<'a, F: Scalar, I>(c: &Point<F>, points: I) -> Result<(&'a Point<F>, F), GeomError>
where
    I: IntoIterator<Item = &'a Point<F>>,
{
    let mut best: Option<(&Point<F>, F)> = None;
    for p in points {
        let d = dist(c, p);
        best = match best {
            None => Some((p, d)),
            Some((bp, bd)) => {
                if d > bd || (d == bd && p.id < bp.id) {
                    Some((p, d))
                } else {
                    Some((bp, bd))
                }
            }
        };
    }
    best.ok_or(GeomError::EmptySet)
}

/// A Radon point together with the partition that certifies it.
#[derive(Debug, Clone)]
pub struct RadonPartition<F: Scalar> {
    pub point: Point<F>,
    pub part_a: Vec<usize>,
    pub part_b: Vec<usize>,
    pub coeffs_a: Vec<F>,
    pub coeffs_b: Vec<F>,
}

/// Radon point of exactly d+2 points in dimension d.
///
/// Solves the affine dependence sum(l_i q_i) = 0, sum(l_i) = 0 with l != 0 and
/// partitions the inputs by the sign of l. Rank-deficient sign splits are
/// reported as [`GeomError::Degenerate`]; callers resample.
pub fn radon_point<F: Scalar>(points: &[Point<F>]) -> Result<RadonPartition<F>, GeomError> {
    let d = points
        .first()
        .map(|p| p.dim())
        .ok_or(GeomError::BadArity { expected: 2, got: 0 })?;
    if points.len() != d + 2 {
        return Err(GeomError::BadArity {
            expected: d + 2,
            got: points.len(),
        });
    }
    for p in points {
        if p.dim() != d {
            return Err(GeomError::DimensionMismatch(p.dim(), d));
        }
    }
    let lambda = affine_dependence(points, d)?;
    radon_from_dependence(points, &lambda)
}

/// Kernel vector of the (d+1) x (d+2) system [q_1..q_{d+2}; 1..1] l = 0.
fn affine_dependence<F: Scalar>(points: &[Point<F>], d: usize) -> Result<Vec<F>, GeomError> {
    let rows = d + 1;
    let cols = d + 2;
    let mut mat = vec![vec![F::zero(); cols]; rows];
    for (j, p) in points.iter().enumerate() {
        for i in 0..d {
            mat[i][j] = p.coords[i];
        }
        mat[d][j] = F::one();
    }
    gaussian_kernel(&mut mat)
}

/// One elimination pivot: clears column `col` below row `row` after swapping
/// in the largest pivot. Returns false when the column is already null.
pub(crate) fn eliminate_pivot<F: Scalar>(mat: &mut [Vec<F>], row: usize, col: usize) -> bool {
    let rows = mat.len();
    let mut piv = row;
    for r in row + 1..rows {
        if mat[r][col].abs() > mat[piv][col].abs() {
            piv = r;
        }
    }
    let scale = mat
        .iter()
        .skip(row)
        .map(|r| r[col].abs())
        .fold(F::zero(), F::max);
    let rel_tol = F::from_f64(1e-12).unwrap();
    if scale <= rel_tol || mat[piv][col].abs() <= rel_tol * scale.max(F::one()) {
        return false;
    }
    mat.swap(row, piv);
    for r in row + 1..rows {
        let factor = mat[r][col] / mat[row][col];
        if factor != F::zero() {
            for c in col..mat[r].len() {
                let sub = factor * mat[row][c];
                mat[r][c] = mat[r][c] - sub;
            }
        }
    }
    true
}

/// Kernel vector of an underdetermined system via pivoted elimination.
fn gaussian_kernel<F: Scalar>(mat: &mut [Vec<F>]) -> Result<Vec<F>, GeomError> {
    let rows = mat.len();
    let cols = mat[0].len();
    let mut pivot_cols = Vec::with_capacity(rows);
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        if eliminate_pivot(mat, row, col) {
            pivot_cols.push(col);
            row += 1;
        }
    }
    // Choose the first free column, set its variable to 1, back-substitute.
    let free_col = (0..cols)
        .find(|c| !pivot_cols.contains(c))
        .ok_or(GeomError::Degenerate)?;
    let mut sol = vec![F::zero(); cols];
    sol[free_col] = F::one();
    for (r, &pc) in pivot_cols.iter().enumerate().rev() {
        let mut acc = F::zero();
        for c in pc + 1..cols {
            acc = acc + mat[r][c] * sol[c];
        }
        sol[pc] = -acc / mat[r][pc];
    }
    Ok(sol)
}

fn radon_from_dependence<F: Scalar>(
    points: &[Point<F>],
    lambda: &[F],
) -> Result<RadonPartition<F>, GeomError> {
    let d = points[0].dim();
    let tol = F::geom_tol();
    let mut part_a = Vec::new();
    let mut part_b = Vec::new();
    let mut sum_a = F::zero();
    for (i, &l) in lambda.iter().enumerate() {
        if l > tol {
            part_a.push(i);
            sum_a = sum_a + l;
        } else if l < -tol {
            part_b.push(i);
        }
    }
    if part_a.is_empty() || part_b.is_empty() {
        return Err(GeomError::Degenerate);
    }
    let sum_b: F = part_b.iter().map(|&i| -lambda[i]).sum();
    let coeffs_a: Vec<F> = part_a.iter().map(|&i| lambda[i] / sum_a).collect();
    let coeffs_b: Vec<F> = part_b.iter().map(|&i| -lambda[i] / sum_b).collect();
    let mut coords = vec![F::zero(); d];
    for (&i, &w) in part_a.iter().zip(coeffs_a.iter()) {
        for c in 0..d {
            coords[c] = coords[c] + w * points[i].coords[c];
        }
    }
    Ok(RadonPartition {
        point: Point::anon(coords),
        part_a,
        part_b,
        coeffs_a,
        coeffs_b,
    })
}
