use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Training data: `n` distinct generator points in `dim` dimensions, each
/// carrying one (possibly noisy) function value.
///
/// Points are stored row-major in a flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    values: Vec<f64>,
}

impl SampleSet {
    /// Validates and wraps a flat row-major coordinate buffer.
    ///
    /// Rejects fewer than two samples, non-finite entries and points whose
    /// coordinates are exactly equal. Near duplicates are accepted.
    pub fn new(dim: usize, points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if points.len() != values.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: values.len() * dim,
                found: points.len(),
                index: None,
            });
        }
        let n = values.len();
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        if let Some(i) = points.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "coordinate",
                index: i / dim,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "value",
                index: i,
            });
        }
        let set = SampleSet {
            dim,
            points,
            values,
        };
        if let Some((first, second)) = set.find_duplicate() {
            return Err(Error::DuplicatePoint { first, second });
        }
        Ok(set)
    }

    pub fn from_rows(rows: &[Vec<f64>], values: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                    index: Some(i),
                });
            }
            points.extend_from_slice(row);
        }
        if rows.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} values",
                rows.len(),
                values.len()
            )));
        }
        Self::new(dim, points, values)
    }

    // Lexicographic sort with index as tiebreaker, so the first equal
    // neighbours found form the lowest-index duplicate pair of their group.
    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(self.point(a), self.point(b)).then(a.cmp(&b)));
        order
            .windows(2)
            .filter(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .min()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false for a validated set; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns a copy with every value replaced by `f(point)`.
    pub fn relabel(&self, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = self.points().map(f).collect();
        Self::new(self.dim, self.points.clone(), values)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_single_sample() {
        let err = SampleSet::new(1, vec![0.0], vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::TooFewSamples(1)));
    }

    #[test]
    fn reports_lowest_duplicate_pair() {
        let rows = vec![
            vec![0.0, 1.0],
            vec![2.0, 2.0],
            vec![0.0, 1.0],
            vec![2.0, 2.0],
        ];
        let err = SampleSet::from_rows(&rows, vec![1.0; 4]).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicatePoint {
                first: 0,
                second: 2
            }
        ));
    }

    #[test]
    fn signed_zero_counts_as_duplicate() {
        let err = SampleSet::new(1, vec![0.0, -0.0], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicatePoint {
                first: 0,
                second: 1
            }
        ));
    }

    #[test]
    fn near_duplicates_are_legal() {
        let x = 0.25_f64;
        let y = f64::from_bits(x.to_bits() + 1);
        assert!(SampleSet::new(1, vec![x, y], vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let err = SampleSet::new(1, vec![0.0, f64::NAN], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFinite {
                what: "coordinate",
                index: 1
            }
        ));
        let err = SampleSet::new(1, vec![0.0, 1.0], vec![1.0, f64::INFINITY]).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFinite {
                what: "value",
                index: 1
            }
        ));
    }

    #[test]
    fn ragged_rows() {
        let rows = vec![vec![0.0, 1.0], vec![2.0]];
        let err = SampleSet::from_rows(&rows, vec![1.0; 2]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch { index: Some(1), .. }
        ));
    }
}
