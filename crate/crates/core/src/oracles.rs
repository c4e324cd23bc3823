//! Brute-force reference computations.
//!
//! Everything here is independent of the dynamic engines and may be slow by
//! design. Budgets are hard caps: exceeding one is an error, never a silent
//! approximation.

use crate::geometry::{dist, dist_coords, Point, PointId, PointSet};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("empty point set")]
    EmptySet,
}

#[derive(Debug, Clone)]
pub struct OracleBudget {
    pub max_points: usize,
    pub max_depth_points: usize,
    pub max_dim: usize,
    pub max_kcenter_subsets: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_points: 2000,
            max_depth_points: 500,
            max_dim: 10,
            max_kcenter_subsets: 1_000_000,
        }
    }
}

/// Exact diameter by scanning all pairs.
pub fn brute_diameter<F: Scalar>(set: &PointSet<F>) -> Result<F, OracleError> {
    brute_diameter_with(set, &OracleBudget::default())
}

pub fn brute_diameter_with<F: Scalar>(
    set: &PointSet<F>,
    budget: &OracleBudget,
) -> Result<F, OracleError> {
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    if set.len() > budget.max_points {
        return Err(OracleError::BudgetExceeded(format!(
            "diameter on {} points (cap {})",
            set.len(),
            budget.max_points
        )));
    }
    let pts: Vec<&Point<F>> = set.iter().collect();
    let mut best = F::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = dist(pts[i], pts[j]);
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Exact minimum enclosing ball via Welzl's recursion over boundary supports.
pub fn exact_meb<F: Scalar>(set: &PointSet<F>) -> Result<(Vec<F>, F), OracleError> {
    exact_meb_with(set, &OracleBudget::default())
}

pub fn exact_meb_with<F: Scalar>(
    set: &PointSet<F>,
    budget: &OracleBudget,
) -> Result<(Vec<F>, F), OracleError> {
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    if set.len() > budget.max_points || set.dim() > budget.max_dim {
        return Err(OracleError::BudgetExceeded(format!(
            "meb on {} points in d={} (caps {}, {})",
            set.len(),
            set.dim(),
            budget.max_points,
            budget.max_dim
        )));
    }
    let mut pts: Vec<Vec<F>> = set.iter().map(|p| p.coords.clone()).collect();
    // deterministic shuffle keeps the recursion shallow in expectation
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65625f);
    for i in (1..pts.len()).rev() {
        pts.swap(i, rng.gen_range(0..=i));
    }
    let d = set.dim();
    let mut boundary: Vec<Vec<F>> = Vec::with_capacity(d + 1);
    let (center, radius) = welzl(&pts, pts.len(), &mut boundary, d);
    Ok((center, radius))
}

fn welzl<F: Scalar>(
    pts: &[Vec<F>],
    n: usize,
    boundary: &mut Vec<Vec<F>>,
    d: usize,
) -> (Vec<F>, F) {
    if n == 0 || boundary.len() == d + 1 {
        return ball_from_boundary(boundary, d);
    }
    let p = &pts[n - 1];
    let (c, r) = welzl(pts, n - 1, boundary, d);
    if dist_coords(&c, p) <= r + F::geom_tol() {
        return (c, r);
    }
    boundary.push(p.clone());
    let result = welzl(pts, n - 1, boundary, d);
    boundary.pop();
    result
}

/// Smallest ball with all of `boundary` on its surface: the center lies in
/// the affine hull of the boundary points.
fn ball_from_boundary<F: Scalar>(boundary: &[Vec<F>], d: usize) -> (Vec<F>, F) {
    match boundary.len() {
        0 => (vec![F::zero(); d], -F::one()),
        1 => (boundary[0].clone(), F::zero()),
        _ => {
            let base = &boundary[0];
            let m = boundary.len() - 1;
            // A x = b with A_jk = 2 (p_j - base) . (p_k - base),
            // b_j = |p_j - base|^2
            let two = F::from_f64(2.0).unwrap();
            let diffs: Vec<Vec<F>> = boundary[1..]
                .iter()
                .map(|p| p.iter().zip(base.iter()).map(|(a, b)| *a - *b).collect())
                .collect();
            let mut mat = vec![vec![F::zero(); m + 1]; m];
            for j in 0..m {
                for k in 0..m {
                    let dot: F = diffs[j]
                        .iter()
                        .zip(diffs[k].iter())
                        .map(|(a, b)| *a * *b)
                        .sum();
                    mat[j][k] = two * dot;
                }
                let norm2: F = diffs[j].iter().map(|&v| v * v).sum();
                mat[j][m] = norm2;
            }
            match solve_square(&mut mat) {
                Some(x) => {
                    let mut center = base.clone();
                    for (j, &w) in x.iter().enumerate() {
                        for c in 0..d {
                            center[c] = center[c] + w * diffs[j][c];
                        }
                    }
                    let radius = dist_coords(&center, base);
                    (center, radius)
                }
                // co-affine support: drop the newest point
                None => ball_from_boundary(&boundary[..boundary.len() - 1], d),
            }
        }
    }
}

/// Solve an m x (m+1) augmented system in place. `None` if singular.
fn solve_square<F: Scalar>(mat: &mut [Vec<F>]) -> Option<Vec<F>> {
    let m = mat.len();
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if mat[r][col].abs() > mat[piv][col].abs() {
                piv = r;
            }
        }
        if mat[piv][col].abs() <= F::from_f64(1e-12).unwrap() {
            return None;
        }
        mat.swap(col, piv);
        for r in col + 1..m {
            let f = mat[r][col] / mat[col][col];
            for c in col..m + 1 {
                let sub = f * mat[col][c];
                mat[r][c] = mat[r][c] - sub;
            }
        }
    }
    let mut x = vec![F::zero(); m];
    for r in (0..m).rev() {
        let mut acc = mat[r][m];
        for c in r + 1..m {
            acc = acc - mat[r][c] * x[c];
        }
        x[r] = acc / mat[r][r];
    }
    Some(x)
}

/// Exact Tukey depth of `x` with respect to `set`, for d <= 3.
pub fn tukey_depth_exact<F: Scalar>(x: &Point<F>, set: &PointSet<F>) -> Result<usize, OracleError> {
    tukey_worst_halfspace(x, set).map(|(depth, _)| depth)
}

/// Exact Tukey depth together with a unit normal of a minimizing closed
/// halfspace (the halfspace is `{p : u . (p - x) >= 0}`).
pub fn tukey_worst_halfspace<F: Scalar>(
    x: &Point<F>,
    set: &PointSet<F>,
) -> Result<(usize, Vec<F>), OracleError> {
    let budget = OracleBudget::default();
    let d = set.dim();
    if d > 3 {
        return Err(OracleError::BudgetExceeded(format!(
            "exact tukey depth in d={d} (cap 3)"
        )));
    }
    if set.len() > budget.max_depth_points {
        return Err(OracleError::BudgetExceeded(format!(
            "exact tukey depth on {} points (cap {})",
            set.len(),
            budget.max_depth_points
        )));
    }
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let tol = F::geom_tol();
    // offsets from x; coincident points lie in every closed halfspace
    let mut vs: Vec<Vec<F>> = Vec::new();
    let mut coincident = 0usize;
    for p in set.iter() {
        let v: Vec<F> = p
            .coords
            .iter()
            .zip(x.coords.iter())
            .map(|(a, b)| *a - *b)
            .collect();
        let norm: F = v.iter().map(|&c| c * c).sum::<F>().sqrt();
        if norm <= tol {
            coincident += 1;
        } else {
            vs.push(v.iter().map(|&c| c / norm).collect());
        }
    }
    if vs.is_empty() {
        let mut u = vec![F::zero(); d];
        u[0] = F::one();
        return Ok((coincident, u));
    }

    let eta = F::from_f64(1e-7).unwrap();
    let mut candidates: Vec<Vec<F>> = Vec::new();
    let push_pm = |cands: &mut Vec<Vec<F>>, u: Vec<F>| {
        let neg = u.iter().map(|&c| -c).collect();
        cands.push(u);
        cands.push(neg);
    };
    for v in &vs {
        push_pm(&mut candidates, v.clone());
    }
    match d {
        1 => {}
        2 => {
            for v in &vs {
                let perp = vec![-v[1], v[0]];
                for (a, b) in [(F::zero(), F::zero()), (eta, F::zero()), (-eta, F::zero())] {
                    let _ = b;
                    let u = vec![perp[0] + a * v[0], perp[1] + a * v[1]];
                    push_pm(&mut candidates, u);
                }
            }
        }
        3 => {
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let (a, b) = (&vs[i], &vs[j]);
                    let cr = vec![
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    ];
                    let norm: F = cr.iter().map(|&c| c * c).sum::<F>().sqrt();
                    if norm <= tol {
                        continue;
                    }
                    let cr: Vec<F> = cr.iter().map(|&c| c / norm).collect();
                    for (wa, wb) in [
                        (F::zero(), F::zero()),
                        (eta, F::zero()),
                        (-eta, F::zero()),
                        (F::zero(), eta),
                        (F::zero(), -eta),
                        (eta, eta),
                        (eta, -eta),
                        (-eta, eta),
                        (-eta, -eta),
                    ] {
                        let u: Vec<F> = (0..3)
                            .map(|c| cr[c] + wa * a[c] + wb * b[c])
                            .collect();
                        push_pm(&mut candidates, u);
                    }
                }
            }
            // configurations collinear through x need the planar candidates too
            for v in &vs {
                let aux = if v[0].abs() < F::from_f64(0.9).unwrap() {
                    vec![F::one(), F::zero(), F::zero()]
                } else {
                    vec![F::zero(), F::one(), F::zero()]
                };
                let perp = vec![
                    v[1] * aux[2] - v[2] * aux[1],
                    v[2] * aux[0] - v[0] * aux[2],
                    v[0] * aux[1] - v[1] * aux[0],
                ];
                for s in [eta, -eta] {
                    let u: Vec<F> = (0..3).map(|c| perp[c] + s * v[c]).collect();
                    push_pm(&mut candidates, u);
                }
                push_pm(&mut candidates, perp);
            }
        }
        _ => unreachable!(),
    }

    let mut best = usize::MAX;
    let mut best_u = candidates[0].clone();
    for u in &candidates {
        let mut count = coincident;
        for v in &vs {
            let dot: F = u.iter().zip(v.iter()).map(|(a, b)| *a * *b).sum();
            if dot >= -tol {
                count += 1;
            }
        }
        if count < best {
            best = count;
            best_u = u.clone();
        }
    }
    Ok((best, best_u))
}

/// Upper bound on Tukey depth via sampled directions. Valid in any dimension.
pub fn tukey_depth_upper<F: Scalar>(
    x: &Point<F>,
    set: &PointSet<F>,
    trials: usize,
    seed: u64,
) -> usize {
    assert!(trials >= 1);
    let d = set.dim();
    let tol = F::geom_tol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = set.len();
    for _ in 0..trials {
        let u: Vec<F> = (0..d)
            .map(|_| F::from_f64(rng.sample::<f64, _>(rand_distr_standard())).unwrap())
            .collect();
        let mut count = 0usize;
        for p in set.iter() {
            let dot: F = u
                .iter()
                .zip(p.coords.iter().zip(x.coords.iter()))
                .map(|(uc, (pc, xc))| *uc * (*pc - *xc))
                .sum();
            if dot >= -tol {
                count += 1;
            }
        }
        best = best.min(count);
    }
    best
}

fn rand_distr_standard() -> rand::distributions::Uniform<f64> {
    rand::distributions::Uniform::new(-1.0, 1.0)
}

/// Exhaustive discrete k-center: minimum over all k-subsets of centers.
pub fn exact_kcenter<F: Scalar>(
    set: &PointSet<F>,
    k: usize,
) -> Result<(Vec<PointId>, F), OracleError> {
    exact_kcenter_with(set, k, &OracleBudget::default())
}

pub fn exact_kcenter_with<F: Scalar>(
    set: &PointSet<F>,
    k: usize,
    budget: &OracleBudget,
) -> Result<(Vec<PointId>, F), OracleError> {
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let n = set.len();
    if k >= n {
        return Ok((set.ids().collect(), F::zero()));
    }
    let mut subsets: u64 = 1;
    for i in 0..k {
        subsets = subsets.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    if subsets > budget.max_kcenter_subsets {
        return Err(OracleError::BudgetExceeded(format!(
            "C({n},{k}) = {subsets} subsets (cap {})",
            budget.max_kcenter_subsets
        )));
    }
    let pts: Vec<&Point<F>> = set.iter().collect();
    let mut choice = vec![0usize; k];
    let mut best: Option<(Vec<PointId>, F)> = None;
    enumerate_subsets(&pts, k, 0, 0, &mut choice, &mut best);
    Ok(best.expect("non-empty set has at least one subset"))
}

fn enumerate_subsets<F: Scalar>(
    pts: &[&Point<F>],
    k: usize,
    depth: usize,
    start: usize,
    choice: &mut [usize],
    best: &mut Option<(Vec<PointId>, F)>,
) {
    if depth == k {
        let mut radius = F::zero();
        for p in pts {
            let mut nearest = F::infinity();
            for &c in choice.iter() {
                let d = dist(p, pts[c]);
                if d < nearest {
                    nearest = d;
                }
            }
            if nearest > radius {
                radius = nearest;
            }
        }
        match best {
            Some((_, r)) if radius >= *r => {}
            _ => *best = Some((choice.iter().map(|&c| pts[c].id).collect(), radius)),
        }
        return;
    }
    for i in start..pts.len() - (k - depth - 1) {
        choice[depth] = i;
        enumerate_subsets(pts, k, depth + 1, i + 1, choice, best);
    }
}

/// Gonzalez farthest-point traversal: 2-approximate k-center.
/// First center is the smallest id; ties break toward smaller ids.
pub fn gonzalez<F: Scalar>(set: &PointSet<F>, k: usize) -> Result<(Vec<PointId>, F), OracleError> {
    if set.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let mut pts: Vec<&Point<F>> = set.iter().collect();
    pts.sort_by_key(|p| p.id);
    let mut centers = vec![pts[0]];
    let mut mindist: Vec<F> = pts.iter().map(|p| dist(p, pts[0])).collect();
    while centers.len() < k && centers.len() < pts.len() {
        let mut far = 0usize;
        for i in 1..pts.len() {
            if mindist[i] > mindist[far] {
                far = i;
            }
        }
        centers.push(pts[far]);
        for i in 0..pts.len() {
            let d = dist(pts[i], pts[far]);
            if d < mindist[i] {
                mindist[i] = d;
            }
        }
    }
    let radius = mindist.iter().fold(F::zero(), |a, &b| a.max(b));
    let radius = if centers.len() >= pts.len() { F::zero() } else { radius };
    Ok((centers.iter().map(|c| c.id).collect(), radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: PointId, coords: &[f64]) -> Point<f64> {
        Point::new(id, coords.to_vec()).unwrap()
    }

    fn set_of(dim: usize, coords: &[&[f64]]) -> PointSet<f64> {
        let mut s = PointSet::new(dim);
        for (i, c) in coords.iter().enumerate() {
            s.insert(pt(i as PointId, c)).unwrap();
        }
        s
    }

    #[test]
    fn diameter_basics() {
        let s = set_of(2, &[&[0.0, 0.0], &[3.0, 4.0]]);
        assert_eq!(brute_diameter(&s).unwrap(), 5.0);
        let single = set_of(2, &[&[1.0, 1.0]]);
        assert_eq!(brute_diameter(&single).unwrap(), 0.0);
    }

    #[test]
    fn diameter_hexagon() {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let a = std::f64::consts::PI / 3.0 * i as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|v| v.as_slice()).collect();
        let s = set_of(2, &refs);
        assert!((brute_diameter(&s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn meb_two_points() {
        let s = set_of(2, &[&[0.0, 0.0], &[2.0, 0.0]]);
        let (c, r) = exact_meb(&s).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        assert!((c[0] - 1.0).abs() < 1e-9 && c[1].abs() < 1e-9);
    }

    #[test]
    fn meb_equilateral_triangle() {
        let s = set_of(
            2,
            &[&[0.0, 0.0], &[1.0, 0.0], &[0.5, 3f64.sqrt() / 2.0]],
        );
        let (_, r) = exact_meb(&s).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn meb_random_is_minimal() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut s = PointSet::new(3);
        for id in 0..30u64 {
            s.insert(pt(
                id,
                &[
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            ))
            .unwrap();
        }
        let (c, r) = exact_meb(&s).unwrap();
        for p in s.iter() {
            assert!(dist_coords(&c, &p.coords) <= r + 1e-9);
        }
        // no ball determined by a support subset is smaller yet enclosing
        let diam = brute_diameter(&s).unwrap();
        assert!(r >= diam / 2.0 - 1e-9 && r <= diam + 1e-9);
    }

    #[test]
    fn depth_median_of_five() {
        let s = set_of(1, &[&[1.0], &[2.0], &[3.0], &[4.0], &[5.0]]);
        let x = pt(100, &[3.0]);
        assert_eq!(tukey_depth_exact(&x, &s).unwrap(), 3);
    }

    #[test]
    fn depth_outside_hull_is_zero() {
        let s = set_of(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let x = pt(100, &[5.0, 5.0]);
        assert_eq!(tukey_depth_exact(&x, &s).unwrap(), 0);
    }

    #[test]
    fn depth_center_of_square() {
        let s = set_of(2, &[&[1.0, 1.0], &[-1.0, 1.0], &[-1.0, -1.0], &[1.0, -1.0]]);
        let x = pt(100, &[0.0, 0.0]);
        // any halfspace through the center keeps at least one side pair
        assert_eq!(tukey_depth_exact(&x, &s).unwrap(), 2);
    }

    #[test]
    fn depth_paper_figure_configuration() {
        // 11 interior points plus one near-boundary point; c has depth 4
        let coords: [[f64; 2]; 11] = [
            [3.6, 1.0],
            [0.8, 2.9],
            [1.6, 3.3],
            [1.4, 2.6],
            [1.8, 1.8],
            [3.0, 1.8],
            [2.7, 3.4],
            [3.3, 2.9],
            [1.0, 1.9],
            [1.4, 1.3],
            [2.45, 1.3],
        ];
        let mut s = PointSet::new(2);
        for (i, c) in coords.iter().enumerate() {
            s.insert(pt(i as PointId, c)).unwrap();
        }
        s.insert(pt(11, &[2.5, 0.8])).unwrap();
        let c = pt(100, &[2.53, 1.9]);
        assert_eq!(tukey_depth_exact(&c, &s).unwrap(), 4);
    }

    #[test]
    fn depth_upper_dominates_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for d in 1..=3usize {
            let mut s = PointSet::new(d);
            for id in 0..60u64 {
                let coords: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                s.insert(Point::new(id, coords).unwrap()).unwrap();
            }
            let x = pt(1000, &vec![0.05; d]);
            let exact = tukey_depth_exact(&x, &s).unwrap();
            let upper = tukey_depth_upper(&x, &s, 200, 9);
            assert!(upper >= exact, "d={d}: upper {upper} < exact {exact}");
        }
    }

    #[test]
    fn depth_upper_degenerate_line_in_5d() {
        // points on a line embedded in d=5: bound matches 1-d depth
        let mut s = PointSet::new(5);
        for id in 0..21u64 {
            let mut coords = vec![0.0; 5];
            coords[2] = id as f64;
            s.insert(Point::new(id, coords).unwrap()).unwrap();
        }
        let mut xc = vec![0.0; 5];
        xc[2] = 10.0; // the median of the line
        let x = pt(1000, &xc);
        let upper = tukey_depth_upper(&x, &s, 500, 4);
        // 1-d depth of the median of 21 collinear points is 11
        assert!(upper <= 11);
        let far = pt(1001, &[100.0; 5]);
        assert_eq!(tukey_depth_upper(&far, &s, 500, 4), 0);
    }

    #[test]
    fn kcenter_unit_square() {
        let s = set_of(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let (_, r) = exact_kcenter(&s, 2).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let (_, r4) = exact_kcenter(&s, 4).unwrap();
        assert_eq!(r4, 0.0);
    }

    #[test]
    fn kcenter_planted_clusters() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let centers = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]];
        let mut s = PointSet::new(2);
        let mut id = 0u64;
        for c in &centers {
            for _ in 0..8 {
                s.insert(pt(
                    id,
                    &[c[0] + rng.gen_range(-1.0..1.0), c[1] + rng.gen_range(-1.0..1.0)],
                ))
                .unwrap();
                id += 1;
            }
        }
        let (centers_found, r) = exact_kcenter(&s, 3).unwrap();
        assert_eq!(centers_found.len(), 3);
        assert!(r < 3.0);
        let (_, rg) = gonzalez(&s, 3).unwrap();
        assert!(rg <= 2.0 * r + 1e-9);
    }

    #[test]
    fn gonzalez_properties() {
        let s = set_of(2, &[&[0.0, 0.0], &[4.0, 0.0], &[2.0, 5.0]]);
        let (c, r) = gonzalez(&s, 3).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(c.len(), 3);
        // deterministic first center: smallest id
        let (c1, _) = gonzalez(&s, 1).unwrap();
        assert_eq!(c1, vec![0]);
    }
}
