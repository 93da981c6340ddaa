//! Brute-force nearest-neighbour reference for the network.
//!
//! Everything here works from squared Euclidean distances by linear scan
//! and shares no code with [`crate::network`], so agreement between the two
//! is evidence rather than tautology.

use rayon::prelude::*;

use crate::domain::{BoxDomain, Stream};
use crate::error::{Error, Result};
use crate::network::NetworkParams;
use crate::samples::SampleSet;

/// Relative squared-distance gap below which a query counts as a near tie.
pub const DEFAULT_NEAR_TIE_TOL: f64 = 1e-12;

// Cells with at most this many Monte-Carlo points get an exact pairwise
// diameter; larger ones use repeated farthest-point sweeps.
const PAIRWISE_DIAMETER_MAX: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestResult {
    /// 0-based index of the lowest-index closest sample.
    pub index: usize,
    pub distance: f64,
    /// Another sample attains exactly the same squared distance.
    pub tied: bool,
    /// `(d2_second - d2_best) / d2_second`, or 0 when both are 0.
    pub relative_gap: f64,
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dim(samples: &SampleSet, x: &[f64]) -> Result<()> {
    if x.len() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            found: x.len(),
            index: None,
        });
    }
    Ok(())
}

// (best index, best d2, runner-up d2)
fn scan(samples: &SampleSet, x: &[f64]) -> (usize, f64, f64) {
    let mut best = (0, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (k, p) in samples.points().enumerate() {
        let d2 = squared_distance(x, p);
        if d2 < best.1 {
            second = best.1;
            best = (k, d2);
        } else if d2 < second {
            second = d2;
        }
    }
    (best.0, best.1, second)
}

pub fn nearest(samples: &SampleSet, x: &[f64]) -> Result<NearestResult> {
    check_dim(samples, x)?;
    let (index, best, second) = scan(samples, x);
    let relative_gap = if second > 0.0 {
        (second - best) / second
    } else {
        0.0
    };
    Ok(NearestResult {
        index,
        distance: best.sqrt(),
        tied: best == second,
        relative_gap,
    })
}

/// Membership in the closed Voronoi cell of sample `i`.
pub fn in_cell(samples: &SampleSet, i: usize, x: &[f64]) -> Result<bool> {
    if i >= samples.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: samples.len(),
        });
    }
    check_dim(samples, x)?;
    let own = squared_distance(x, samples.point(i));
    Ok(samples
        .points()
        .enumerate()
        .all(|(j, p)| j == i || own <= squared_distance(x, p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    pub network: f64,
    pub oracle: f64,
    pub nearest: usize,
    pub matched: bool,
    pub tied: bool,
    pub near_tie: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub outcomes: Vec<QueryOutcome>,
    pub matched: usize,
    pub ties: usize,
    pub near_ties: usize,
    /// Mismatches on queries that are not near ties.
    pub hard_mismatches: usize,
    pub near_tie_tol: f64,
}

impl EquivalenceReport {
    pub fn total(&self) -> usize {
        self.outcomes.len()
    }

    pub fn passed(&self) -> bool {
        self.hard_mismatches == 0
    }

    pub fn mismatches(&self) -> impl Iterator<Item = (usize, &QueryOutcome)> {
        self.outcomes.iter().enumerate().filter(|(_, o)| !o.matched)
    }
}

/// Compares the network against nearest-neighbour lookup on every query.
///
/// Values match when their bit patterns are equal. Queries whose best and
/// runner-up squared distances differ by less than `near_tie_tol`
/// (relative) are reported but do not count as hard mismatches, because the
/// half-space test and the distance comparison round differently there.
pub fn check_equivalence<P>(
    samples: &SampleSet,
    params: &NetworkParams,
    queries: &[P],
    near_tie_tol: f64,
) -> Result<EquivalenceReport>
where
    P: AsRef<[f64]> + Sync,
{
    let network = params.eval_batch(queries)?;
    let outcomes: Vec<QueryOutcome> = queries
        .par_iter()
        .zip(network.par_iter())
        .map(|(x, &y)| {
            let near = nearest(samples, x.as_ref())?;
            let oracle = samples.value(near.index);
            Ok(QueryOutcome {
                network: y,
                oracle,
                nearest: near.index,
                matched: y.to_bits() == oracle.to_bits(),
                tied: near.tied,
                near_tie: near.relative_gap < near_tie_tol,
            })
        })
        .collect::<Result<_>>()?;
    let count = |f: fn(&QueryOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
    Ok(EquivalenceReport {
        matched: count(|o| o.matched),
        ties: count(|o| o.tied),
        near_ties: count(|o| o.near_tie),
        hard_mismatches: count(|o| !o.matched && !o.near_tie),
        near_tie_tol,
        outcomes,
    })
}

/// A Monte-Carlo mean with its naive standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub points: usize,
}

impl McEstimate {
    /// Mean and standard error of `xs`, summed sequentially for reproducibility.
    pub fn from_samples(xs: &[f64]) -> McEstimate {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        McEstimate {
            value: mean,
            std_error: (var / m).sqrt(),
            points: xs.len(),
        }
    }
}

fn check_mc(samples: &SampleSet, domain: &BoxDomain, mc_points: usize) -> Result<()> {
    if mc_points == 0 {
        return Err(Error::InvalidArgument(
            "mc_points must be at least 1".into(),
        ));
    }
    if domain.dim() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            found: domain.dim(),
            index: None,
        });
    }
    Ok(())
}

/// Estimates `Σ_i ∫_{V_i} |x_i - x|² dμ` for `μ` uniform on `domain`
/// (normalised to total mass 1), i.e. the mean squared distance from a
/// uniform point to its nearest sample.
pub fn estimate_cell_moment(
    samples: &SampleSet,
    domain: &BoxDomain,
    mc_points: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_mc(samples, domain, mc_points)?;
    let d = samples.dim();
    let pts = domain.sample(mc_points, seed, Stream::CellMoment, 0);
    let d2: Vec<f64> = pts
        .par_chunks_exact(d)
        .map(|x| scan(samples, x).1)
        .collect();
    Ok(McEstimate::from_samples(&d2))
}

/// Lower-bound estimate of the largest cell diameter within `domain`.
///
/// Uniform points are assigned to cells by nearest sample; each cell's
/// diameter is estimated from its assigned points only (exact pairwise for
/// small cells, farthest-point sweeps otherwise). Never exceeds the true
/// value; converges to it as `mc_points` grows.
pub fn estimate_max_diameter(
    samples: &SampleSet,
    domain: &BoxDomain,
    mc_points: usize,
    seed: u64,
) -> Result<f64> {
    check_mc(samples, domain, mc_points)?;
    let d = samples.dim();
    let pts = domain.sample(mc_points, seed, Stream::CellDiameter, 0);
    let owner: Vec<usize> = pts
        .par_chunks_exact(d)
        .map(|x| scan(samples, x).0)
        .collect();
    let mut cells: Vec<Vec<&[f64]>> = vec![Vec::new(); samples.len()];
    for (x, &k) in pts.chunks_exact(d).zip(&owner) {
        cells[k].push(x);
    }
    Ok(cells
        .par_iter()
        .map(|cell| point_cloud_diameter(cell))
        .reduce(|| 0.0, f64::max))
}

fn point_cloud_diameter(points: &[&[f64]]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points.len() <= PAIRWISE_DIAMETER_MAX {
        let mut best = 0.0_f64;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                best = best.max(squared_distance(a, b));
            }
        }
        return best.sqrt();
    }
    let farthest = |from: &[f64]| {
        points
            .iter()
            .map(|p| (squared_distance(from, p), *p))
            .fold((0.0, points[0]), |acc, c| if c.0 > acc.0 { c } else { acc })
    };
    let mut best = 0.0_f64;
    let mut from = points[0];
    for _ in 0..4 {
        let (d2, p) = farthest(from);
        if d2 <= best {
            break;
        }
        best = d2;
        from = p;
    }
    best.sqrt()
}

/// Exact Voronoi cells of a 1-D sample set clipped to `[lo, hi]`, as
/// `(sample index, left, right)` in increasing position.
pub fn exact_cells_1d(samples: &SampleSet, lo: f64, hi: f64) -> Result<Vec<(usize, f64, f64)>> {
    if samples.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: samples.dim(),
            index: None,
        });
    }
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::DegenerateDomain(format!("[{lo}, {hi}]")));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples.point(a)[0].total_cmp(&samples.point(b)[0]));
    let x = |k: usize| samples.point(order[k])[0];
    let last = order.len() - 1;
    Ok((0..=last)
        .map(|k| {
            let left = if k == 0 { lo } else { 0.5 * (x(k - 1) + x(k)) };
            let right = if k == last {
                hi
            } else {
                0.5 * (x(k) + x(k + 1))
            };
            (order[k], left.clamp(lo, hi), right.clamp(lo, hi))
        })
        .collect())
}

/// Closed form of [`estimate_cell_moment`] in one dimension.
pub fn exact_cell_moment_1d(samples: &SampleSet, lo: f64, hi: f64) -> Result<f64> {
    let cube = |t: f64| t * t * t;
    let total: f64 = exact_cells_1d(samples, lo, hi)?
        .into_iter()
        .map(|(k, l, r)| {
            let g = samples.point(k)[0];
            // signed cubes handle generators outside the clipped interval
            (cube(r - g) - cube(l - g)) / 3.0
        })
        .sum();
    Ok(total / (hi - lo))
}

/// Exact largest clipped cell length in one dimension.
pub fn exact_max_diameter_1d(samples: &SampleSet, lo: f64, hi: f64) -> Result<f64> {
    Ok(exact_cells_1d(samples, lo, hi)?
        .into_iter()
        .map(|(_, l, r)| r - l)
        .fold(0.0, f64::max))
}
