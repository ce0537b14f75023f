//! Zonotope volumes: exact determinant enumeration, volumes of orthogonal
//! projections, hit-or-miss Monte Carlo (the only estimator offered for
//! constrained zonotopes), and 2D outlines for plotting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd, Matrix, Rng, Vector};
use crate::sets::{ReachSet, Zonotope};

pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

/// Halfspace descriptions with at most this many facets replace per-sample LPs.
const MAX_FACET_PAIRS: u128 = 20_000;

const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeMethod {
    Exact,
    #[serde(rename = "projected3d")]
    Projected,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeDetail {
    Subsets { count: u128 },
    Samples { count: usize, hits: usize, std_error: f64 },
    Basis { rows: Vec<Vec<f64>>, subsets: u128 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub value: f64,
    pub method: VolumeMethod,
    pub detail: VolumeDetail,
}

impl VolumeResult {
    pub fn std_error(&self) -> f64 {
        match self.detail {
            VolumeDetail::Samples { std_error, .. } => std_error,
            _ => 0.0,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Calls `f` on each `k`-subset of `start..p` prefixed by `prefix`, in
/// lexicographic order.
fn for_each_subset(prefix: &mut Vec<usize>, start: usize, p: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if prefix.len() == k {
        f(prefix);
        return;
    }
    let remaining = k - prefix.len();
    for i in start..=(p - remaining) {
        prefix.push(i);
        for_each_subset(prefix, i + 1, p, k, f);
        prefix.pop();
    }
}

fn subset_det(g: &Matrix, idx: &[usize]) -> f64 {
    let n = g.nrows();
    Matrix::from_fn(n, n, |i, j| g[(i, idx[j])]).determinant().abs()
}

/// Sum of `|det|` over all `n`-subsets of columns, accumulated in ascending
/// magnitude so the result does not depend on scheduling.
fn subset_det_sum(g: &Matrix) -> f64 {
    let (n, p) = g.shape();
    let mut dets: Vec<f64> = (0..=(p - n))
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut local = Vec::new();
            let mut prefix = vec![first];
            for_each_subset(&mut prefix, first + 1, p, n, &mut |idx| {
                local.push(subset_det(g, idx))
            });
            local
        })
        .collect();
    dets.sort_by(f64::total_cmp);
    dets.iter().sum()
}

pub fn exact_volume(z: &Zonotope, subset_cap: u128) -> Result<VolumeResult> {
    let (n, p) = z.generators().shape();
    if n == 0 {
        return Err(Error::Parameter("volume of a zero-dimensional set".into()));
    }
    let count = binomial(p, n);
    if count > subset_cap {
        return Err(Error::Budget {
            subsets: count,
            cap: subset_cap,
        });
    }
    let value = if p < n {
        0.0
    } else {
        2f64.powi(n as i32) * subset_det_sum(z.generators())
    };
    Ok(VolumeResult {
        value,
        method: VolumeMethod::Exact,
        detail: VolumeDetail::Subsets { count },
    })
}

/// Exact volume of `<basis^T c, basis^T G>` for a basis with orthonormal columns.
pub fn projected_volume(z: &Zonotope, basis: &Matrix, subset_cap: u128) -> Result<VolumeResult> {
    Error::check_dim("projection basis rows", z.dim(), basis.nrows())?;
    if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
        return Err(Error::Parameter(format!(
            "projection basis must have between 1 and {} columns",
            basis.nrows()
        )));
    }
    let residual = (basis.tr_mul(basis) - Matrix::identity(basis.ncols(), basis.ncols())).norm();
    if residual > 1e-8 {
        return Err(Error::NotOrthogonal { residual });
    }
    let projected = z.linear_map(&basis.transpose())?.compact(1e-12);
    let exact = exact_volume(&projected, subset_cap)?;
    let subsets = match exact.detail {
        VolumeDetail::Subsets { count } => count,
        _ => 0,
    };
    Ok(VolumeResult {
        value: exact.value,
        method: VolumeMethod::Projected,
        detail: VolumeDetail::Basis {
            rows: crate::numerics::linalg::to_rows(basis),
            subsets,
        },
    })
}

/// The first `k` canonical axes of `R^n`.
pub fn canonical_basis(n: usize, k: usize) -> Matrix {
    Matrix::identity(n, k)
}

/// Exact volume of the projection onto the first three axes (all axes when `n <= 3`).
pub fn projected3d_volume(set: &Zonotope) -> Result<VolumeResult> {
    let n = set.dim();
    projected_volume(set, &canonical_basis(n, n.min(3)), DEFAULT_SUBSET_CAP)
}

/// Exact membership test for a full-dimensional zonotope via its facets,
/// whose normals are the generalized cross products of `(n-1)`-subsets.
struct Facets {
    center: Vector,
    normals: Vec<Vector>,
    offsets: Vec<f64>,
}

impl Facets {
    fn build(z: &Zonotope) -> Option<Facets> {
        let (n, p) = z.generators().shape();
        if n < 2 || binomial(p, n - 1) > MAX_FACET_PAIRS {
            return None;
        }
        let g = z.generators();
        let scale = g.amax();
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        let mut prefix = Vec::new();
        for_each_subset(&mut prefix, 0, p, n - 1, &mut |idx| {
            let normal = Vector::from_fn(n, |row, _| {
                let minor = Matrix::from_fn(n - 1, n - 1, |i, j| {
                    let r = if i < row { i } else { i + 1 };
                    g[(r, idx[j])]
                });
                let sign = if row % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            });
            let norm = normal.norm();
            if norm > 1e-12 * scale.powi(n as i32 - 1) {
                let unit = normal / norm;
                offsets.push(g.tr_mul(&unit).abs().sum());
                normals.push(unit);
            }
        });
        Some(Facets {
            center: z.center().clone(),
            normals,
            offsets,
        })
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        let d = x - &self.center;
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(nv, off)| nv.dot(&d).abs() <= off + tol)
    }
}

fn is_full_dimensional(g: &Matrix) -> Result<bool> {
    let n = g.nrows();
    if g.ncols() < n {
        return Ok(false);
    }
    let sv = svd(g)?;
    Ok(sv.rank(1e-12) == n)
}

/// Hit-or-miss estimate over the interval hull. Samples are drawn serially
/// and tested in parallel, so the result depends only on the seed.
pub fn mc_volume(set: &ReachSet, samples: usize, rng: &mut Rng) -> Result<VolumeResult> {
    if samples < 1000 {
        return Err(Error::Parameter(format!("at least 1000 samples required, got {samples}")));
    }
    let (lo, hi) = match set {
        ReachSet::Zonotope(z) => z.interval_hull(),
        ReachSet::Constrained(c) => match c.interval_hull() {
            Ok(h) => h,
            Err(Error::EmptySet) | Err(Error::Infeasible) => return Ok(zero_mc(samples)),
            Err(e) => return Err(e),
        },
    };
    let widths = &hi - &lo;
    let hull_volume: f64 = widths.iter().product();
    if hull_volume <= 0.0 {
        return Ok(zero_mc(samples));
    }
    let facets = match set {
        ReachSet::Zonotope(z) => {
            if !is_full_dimensional(z.generators())? {
                return Ok(zero_mc(samples));
            }
            Facets::build(z)
        }
        ReachSet::Constrained(_) => None,
    };
    let points: Vec<Vector> = (0..samples)
        .map(|_| Vector::from_fn(lo.len(), |i, _| rng.uniform(lo[i], hi[i])))
        .collect();
    let hits = points
        .par_iter()
        .filter(|x| match &facets {
            Some(f) => f.contains(x, MEMBERSHIP_TOL),
            None => set.contains_point(x, MEMBERSHIP_TOL),
        })
        .count();
    let frac = hits as f64 / samples as f64;
    Ok(VolumeResult {
        value: hull_volume * frac,
        method: VolumeMethod::MonteCarlo,
        detail: VolumeDetail::Samples {
            count: samples,
            hits,
            std_error: hull_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
        },
    })
}

fn zero_mc(samples: usize) -> VolumeResult {
    VolumeResult {
        value: 0.0,
        method: VolumeMethod::MonteCarlo,
        detail: VolumeDetail::Samples {
            count: samples,
            hits: 0,
            std_error: 0.0,
        },
    }
}

/// Counter-clockwise vertices of the projection onto coordinates `dims`.
pub fn polygon_2d(z: &Zonotope, dims: (usize, usize)) -> Result<Vec<[f64; 2]>> {
    let n = z.dim();
    if n < 2 || dims.0 >= n || dims.1 >= n || dims.0 == dims.1 {
        return Err(Error::Parameter(format!("invalid projection axes {dims:?} for dimension {n}")));
    }
    let mut select = Matrix::zeros(2, n);
    select[(0, dims.0)] = 1.0;
    select[(1, dims.1)] = 1.0;
    let flat = z.linear_map(&select)?.compact(1e-12);
    let c = flat.center();
    let mut gens: Vec<[f64; 2]> = flat
        .generators()
        .column_iter()
        .map(|g| {
            // upper half-plane representative, angle in [0, pi)
            if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
                [-g[0], -g[1]]
            } else {
                [g[0], g[1]]
            }
        })
        .collect();
    if gens.is_empty() {
        return Ok(vec![[c[0], c[1]]]);
    }
    gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let mut v = [
        c[0] - gens.iter().map(|g| g[0]).sum::<f64>(),
        c[1] - gens.iter().map(|g| g[1]).sum::<f64>(),
    ];
    let mut out = Vec::with_capacity(2 * gens.len());
    for sign in [2.0, -2.0] {
        for g in &gens {
            out.push(v);
            v = [v[0] + sign * g[0], v[1] + sign * g[1]];
        }
    }
    Ok(out)
}

pub fn shoelace_area(vertices: &[[f64; 2]]) -> f64 {
    let k = vertices.len();
    let twice: f64 = (0..k)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % k]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random_orthogonal;
    use crate::reduction::intersection_refine;
    use crate::sets::ConstrainedZonotope;
    use approx::assert_relative_eq;

    fn zono(rows: usize, cols: usize, g: &[f64]) -> Zonotope {
        Zonotope::new(Vector::zeros(rows), Matrix::from_row_slice(rows, cols, g)).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_volume(&zono(2, 2, &[1.0, 0.0, 0.0, 1.0]), DEFAULT_SUBSET_CAP).unwrap().value, 4.0);
        let v = exact_volume(&zono(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]), DEFAULT_SUBSET_CAP).unwrap();
        assert_relative_eq!(v.value, 12.0, epsilon = 1e-12);
        assert_eq!(v.detail, VolumeDetail::Subsets { count: 3 });
        assert_eq!(exact_volume(&zono(3, 2, &[1.0; 6]), DEFAULT_SUBSET_CAP).unwrap().value, 0.0);
    }

    #[test]
    fn subset_cap_enforced() {
        let mut rng = Rng::new(1);
        let z = Zonotope::new(Vector::zeros(3), rng.normal_matrix(3, 10)).unwrap();
        assert!(matches!(exact_volume(&z, 119), Err(Error::Budget { subsets: 120, cap: 119 })));
        assert!(exact_volume(&z, 120).is_ok());
    }

    #[test]
    fn exact_volume_matches_brute_force_in_lexicographic_order() {
        let mut rng = Rng::new(2);
        let g = rng.normal_matrix(3, 6);
        let mut expected = 0.0;
        let mut order = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    order.push(vec![a, b, c]);
                    expected += subset_det(&g, &[a, b, c]);
                }
            }
        }
        let mut seen = Vec::new();
        for_each_subset(&mut Vec::new(), 0, 6, 3, &mut |idx| seen.push(idx.to_vec()));
        assert_eq!(seen, order);
        let z = Zonotope::new(Vector::zeros(3), g).unwrap();
        assert_relative_eq!(exact_volume(&z, DEFAULT_SUBSET_CAP).unwrap().value, 8.0 * expected, max_relative = 1e-12);
    }

    #[test]
    fn exact_volume_invariances() {
        let mut rng = Rng::new(3);
        for n in 2..=4 {
            let z = Zonotope::new(rng.normal_vector(n), rng.normal_matrix(n, n + 3)).unwrap();
            let v = exact_volume(&z, DEFAULT_SUBSET_CAP).unwrap().value;
            let q = random_orthogonal(n, &mut rng);
            let rotated = exact_volume(&z.linear_map(&q).unwrap(), DEFAULT_SUBSET_CAP).unwrap().value;
            assert!((rotated - v).abs() <= 1e-9 * v);
            let mut g = z.generators().clone();
            g.swap_columns(0, 2);
            g.column_mut(1).neg_mut();
            let permuted = Zonotope::new(z.center().clone(), g).unwrap();
            assert!((exact_volume(&permuted, DEFAULT_SUBSET_CAP).unwrap().value - v).abs() <= 1e-9 * v);
        }
    }

    #[test]
    fn projected_examples() {
        let mut rng = Rng::new(4);
        let z = Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 5)).unwrap();
        let full = projected_volume(&z, &Matrix::identity(3, 3), DEFAULT_SUBSET_CAP).unwrap();
        let exact = exact_volume(&z, DEFAULT_SUBSET_CAP).unwrap();
        assert_relative_eq!(full.value, exact.value, max_relative = 1e-12);
        assert_eq!(full.method, VolumeMethod::Projected);

        let boxed = Zonotope::from_box(Vector::zeros(3), &Vector::from_vec(vec![0.5, 2.0, 7.0])).unwrap();
        let v = projected_volume(&boxed, &canonical_basis(3, 2), DEFAULT_SUBSET_CAP).unwrap();
        assert_relative_eq!(v.value, 4.0 * 0.5 * 2.0, epsilon = 1e-12);

        let basis = canonical_basis(3, 2);
        let q = random_orthogonal(3, &mut rng);
        let a = projected_volume(&z, &basis, DEFAULT_SUBSET_CAP).unwrap().value;
        let b = projected_volume(&z.linear_map(&q).unwrap(), &(&q * &basis), DEFAULT_SUBSET_CAP)
            .unwrap()
            .value;
        assert!((a - b).abs() <= 1e-9 * a);

        assert!(matches!(
            projected_volume(&z, &(canonical_basis(3, 2) * 2.0), DEFAULT_SUBSET_CAP),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn mc_examples() {
        let unit = ReachSet::Zonotope(zono(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let v = mc_volume(&unit, 100_000, &mut Rng::new(5)).unwrap();
        assert!((v.value - 4.0).abs() <= 3.0 * v.std_error().max(1e-12));

        let skew = ReachSet::Zonotope(zono(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]));
        let v = mc_volume(&skew, 200_000, &mut Rng::new(6)).unwrap();
        assert!((v.value - 12.0).abs() <= 0.05 * 12.0);

        assert!(mc_volume(&unit, 999, &mut Rng::new(7)).is_err());
        let flat = ReachSet::Zonotope(zono(2, 1, &[1.0, 1.0]));
        assert_eq!(mc_volume(&flat, 1000, &mut Rng::new(8)).unwrap().value, 0.0);
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let mut rng = Rng::new(9);
        let z = ReachSet::Zonotope(Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 5)).unwrap());
        let a = mc_volume(&z, 5000, &mut Rng::new(10)).unwrap();
        let b = mc_volume(&z, 5000, &mut Rng::new(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn facet_test_agrees_with_lp_membership() {
        let mut rng = Rng::new(11);
        for n in 2..=4 {
            let z = Zonotope::new(rng.normal_vector(n), rng.normal_matrix(n, n + 2)).unwrap();
            let facets = Facets::build(&z).unwrap();
            let (lo, hi) = z.interval_hull();
            for _ in 0..300 {
                let x = Vector::from_fn(n, |i, _| rng.uniform(lo[i], hi[i]));
                assert_eq!(facets.contains(&x, 1e-9), z.contains_point(&x, 1e-9));
            }
        }
    }

    #[test]
    fn mc_of_intersection_bounded_by_operands() {
        let mut rng = Rng::new(12);
        let z = Zonotope::new(rng.normal_vector(2), rng.normal_matrix(2, 8)).unwrap();
        let p = random_orthogonal(2, &mut rng);
        let cz = intersection_refine(&z, &p, 1.5).unwrap();
        let (direct, _) = crate::reduction::girard_reduce(&z, 1.5).unwrap();
        let (proj, _) = crate::reduction::projected_reduce(&z, &p, 1.5).unwrap();
        let v = mc_volume(&ReachSet::Constrained(cz), 4000, &mut rng).unwrap();
        let bound = exact_volume(&direct, DEFAULT_SUBSET_CAP)
            .unwrap()
            .value
            .min(exact_volume(&proj, DEFAULT_SUBSET_CAP).unwrap().value);
        assert!(v.value >= 0.0);
        assert!(v.value <= bound + 3.0 * v.std_error());
    }

    #[test]
    fn mc_of_empty_constrained_set_is_zero() {
        let cz = ConstrainedZonotope::new(
            Vector::zeros(2),
            Matrix::identity(2, 2),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Vector::from_vec(vec![3.0]),
        )
        .unwrap();
        assert_eq!(mc_volume(&ReachSet::Constrained(cz), 1000, &mut Rng::new(1)).unwrap().value, 0.0);
    }

    #[test]
    fn unit_box_polygon() {
        let v = polygon_2d(&zono(2, 2, &[1.0, 0.0, 0.0, 1.0]), (0, 1)).unwrap();
        assert_eq!(v.len(), 4);
        for corner in [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] {
            assert!(v.iter().any(|p| (p[0] - corner[0]).abs() < 1e-12 && (p[1] - corner[1]).abs() < 1e-12));
        }
        assert_relative_eq!(shoelace_area(&v), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn polygon_vertices_attain_supports_and_area() {
        let mut rng = Rng::new(13);
        for _ in 0..20 {
            let z = Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 6)).unwrap();
            let v = polygon_2d(&z, (0, 2)).unwrap();
            assert!(v.len() <= 12);
            let mut sel = Matrix::zeros(2, 3);
            sel[(0, 0)] = 1.0;
            sel[(1, 2)] = 1.0;
            let flat = z.linear_map(&sel).unwrap();
            let k = v.len();
            for i in 0..k {
                let p = Vector::from_vec(v[i].to_vec());
                assert!(flat.contains_point(&p, 1e-9));
                // outward normal of edge i -> i+1 for a ccw polygon
                let (a, b) = (v[i], v[(i + 1) % k]);
                let normal = Vector::from_vec(vec![b[1] - a[1], a[0] - b[0]]);
                if normal.norm() > 1e-12 {
                    let s = flat.support(&normal).unwrap();
                    assert!((normal.dot(&p) - s).abs() <= 1e-9 * (1.0 + s.abs()));
                }
            }
            let area = shoelace_area(&v);
            let exact = exact_volume(&flat, DEFAULT_SUBSET_CAP).unwrap().value;
            assert!((area - exact).abs() <= 1e-9 * exact);
        }
    }
}
