//! Girard order reduction, its orthogonally transformed variant, and the
//! interval-hull volume bound that motivates choosing the transform.
//!
//! Girard reduction keeps the `floor(rho n) - n` longest generators (in
//! the 2-norm) and replaces the rest with their axis-aligned interval hull.
//! Because the hull is axis-aligned, reducing `P^T Z` and mapping back by
//! `P` gives a different (often much smaller) enclosure than reducing `Z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_orthogonal, sym_eig, Matrix, Vector};
use crate::sets::{ConstrainedZonotope, ReachSet, Zonotope, ORTHOGONALITY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub kept_indices: Vec<usize>,
    pub discarded_indices: Vec<usize>,
    pub box_halfwidths: Vec<f64>,
    pub box_volume: f64,
    pub hadamard_bound: f64,
}

impl ReductionReport {
    fn unchanged(p: usize, n: usize) -> Self {
        ReductionReport {
            kept_indices: (0..p).collect(),
            discarded_indices: Vec::new(),
            box_halfwidths: vec![0.0; n],
            box_volume: 0.0,
            hadamard_bound: 0.0,
        }
    }
}

/// `floor(rho * n)`, saturating for infinite `rho`.
pub fn generator_budget(n: usize, rho: f64) -> usize {
    let b = (rho * n as f64).floor();
    if b.is_finite() && b < usize::MAX as f64 {
        b as usize
    } else {
        usize::MAX
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("reduction order must be >= 1, got {rho}")))
    }
}

/// Column indices sorted by descending 2-norm, ties to the lower index.
fn rank_by_norm(g: &Matrix) -> Vec<usize> {
    let norms: Vec<f64> = g.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..g.ncols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

pub fn girard_reduce(z: &Zonotope, rho: f64) -> Result<(Zonotope, ReductionReport)> {
    check_rho(rho)?;
    let n = z.dim();
    let p = z.num_generators();
    let budget = generator_budget(n, rho);
    if p <= budget {
        return Ok((z.clone(), ReductionReport::unchanged(p, n)));
    }
    let order = rank_by_norm(z.generators());
    let keep_count = budget - n;
    let mut kept: Vec<usize> = order[..keep_count].to_vec();
    let mut discarded: Vec<usize> = order[keep_count..].to_vec();
    kept.sort_unstable();
    discarded.sort_unstable();

    let g_disc = z.select_generators(&discarded);
    let d = abs_row_sums(&g_disc);
    let mut generators = Matrix::zeros(n, budget);
    generators
        .columns_mut(0, keep_count)
        .copy_from(&z.select_generators(&kept));
    generators
        .columns_mut(keep_count, n)
        .copy_from(&Matrix::from_diagonal(&d));

    let (box_volume, hadamard_bound) = box_bound(&g_disc, &Matrix::identity(n, n));
    let report = ReductionReport {
        kept_indices: kept,
        discarded_indices: discarded,
        box_halfwidths: d.iter().copied().collect(),
        box_volume,
        hadamard_bound,
    };
    Ok((Zonotope::new(z.center().clone(), generators)?, report))
}

/// `P * GR(P^T Z)`. The report describes the reduction in the rotated frame.
pub fn projected_reduce(
    z: &Zonotope,
    p: &Matrix,
    rho: f64,
) -> Result<(Zonotope, ReductionReport)> {
    check_orthogonal(p, ORTHOGONALITY_TOL)?;
    Error::check_dim("projected_reduce", z.dim(), p.nrows())?;
    let (reduced, report) = girard_reduce(&z.linear_map(&p.transpose())?, rho)?;
    Ok((reduced.linear_map(p)?, report))
}

/// Girard reduction of a constrained zonotope through its lifted zonotope
/// `<[c; -b], [G; A]>`, with the order taken relative to the lifted
/// dimension. Enclosing the lifted set encloses every slice of it.
pub fn girard_reduce_constrained(cz: &ConstrainedZonotope, rho: f64) -> Result<ConstrainedZonotope> {
    if cz.num_constraints() == 0 {
        let (z, _) = girard_reduce(&cz.without_constraints(), rho)?;
        return Ok(ConstrainedZonotope::from(z));
    }
    let (lifted, _) = girard_reduce(&cz.lift(), rho)?;
    ConstrainedZonotope::unlift(&lifted, cz.dim())
}

pub fn reduce_set(set: &ReachSet, rho: f64) -> Result<ReachSet> {
    Ok(match set {
        ReachSet::Zonotope(z) => ReachSet::Zonotope(girard_reduce(z, rho)?.0),
        ReachSet::Constrained(c) => ReachSet::Constrained(girard_reduce_constrained(c, rho)?),
    })
}

/// `GR(Z) ∩ P GR(P^T Z)` as a constrained zonotope.
pub fn intersection_refine(z: &Zonotope, p: &Matrix, rho: f64) -> Result<ConstrainedZonotope> {
    let (direct, _) = girard_reduce(z, rho)?;
    let (projected, _) = projected_reduce(z, p, rho)?;
    ConstrainedZonotope::from(direct).intersect(
        &ConstrainedZonotope::from(projected),
        &Matrix::identity(z.dim(), z.dim()),
    )
}

/// Eigenvectors of `G_disc G_disc^T`, by descending eigenvalue.
pub fn dominant_directions(g_disc: &Matrix) -> Result<Matrix> {
    let n = g_disc.nrows();
    if g_disc.ncols() == 0 || g_disc.amax() == 0.0 {
        return Ok(Matrix::identity(n, n));
    }
    let s = g_disc * g_disc.transpose();
    Ok(sym_eig(&s)?.vectors)
}

/// Volume of the interval hull of `P^T G_disc` and its Cauchy-Schwarz
/// bound `(2 sqrt(m))^n sqrt(prod diag(P^T S P))`.
pub fn box_bound(g_disc: &Matrix, p: &Matrix) -> (f64, f64) {
    let n = g_disc.nrows();
    let m = g_disc.ncols();
    if m == 0 {
        return (0.0, 0.0);
    }
    let rotated = p.tr_mul(g_disc);
    let two_n = 2f64.powi(n as i32);
    let vol_box = two_n * abs_row_sums(&rotated).iter().product::<f64>();
    let row_norms: f64 = rotated.row_iter().map(|r| r.norm()).product();
    let bound = two_n * (m as f64).powf(n as f64 / 2.0) * row_norms;
    (vol_box, bound)
}

/// `prod_i (P^T S P)_ii` with `S = G_disc G_disc^T`.
pub fn hadamard_product(g_disc: &Matrix, p: &Matrix) -> f64 {
    p.tr_mul(g_disc)
        .row_iter()
        .map(|r| r.norm_squared())
        .product()
}

fn abs_row_sums(g: &Matrix) -> Vector {
    Vector::from_iterator(
        g.nrows(),
        g.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()),
    )
}
