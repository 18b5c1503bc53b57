use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::partition::BinPartition;
use crate::error::Result;
use crate::interval_maps::{BranchForm, Interval, IntervalSet, OpenSystem};

/// Nonzero entries of one matrix row and the retained mass fraction.
type Row = (Vec<(u32, f64)>, f64);

/// Which part of each bin is kept before the map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The whole interval (no hole).
    Closed,
    /// `X0`.
    Open,
    /// `X0` minus a target ball.
    TargetPerturbed,
}

/// Sparse Ulam matrix in row (CSR) form.
///
/// `M[i][j] = m(b_i ∩ R ∩ T^{-1} b_j) / m(b_i)` where `R` is the retained
/// set. Bin masses are pushed forward as `p -> p M`; bin-level densities
/// of the dual (conformal) measure are pulled back as `g -> M g`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    partition: Arc<BinPartition>,
    variant: Variant,
    retained: IntervalSet,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    retained_fraction: Vec<f64>,
}

impl DiscretizedOperator {
    pub fn partition(&self) -> &Arc<BinPartition> {
        &self.partition
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn retained(&self) -> &IntervalSet {
        &self.retained
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `m(b_i ∩ R) / m(b_i)`.
    pub fn retained_fraction(&self) -> &[f64] {
        &self.retained_fraction
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&j, &v)| (j as usize, v))
    }

    /// `p M` (bin masses forward).
    pub fn push_forward(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                out[j] += pi * v;
            }
        }
        out
    }

    /// `M g` (bin densities of the dual measure backward).
    pub fn pull_back(&self, g: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.row(i).map(|(j, v)| v * g[j]).sum())
            .collect()
    }

    /// All nonzero entries as `(i, j, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        (0..self.len())
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }
}

/// Builds the Ulam matrix for the given variant. `ball` is the removed
/// target ball for [`Variant::TargetPerturbed`] and ignored otherwise.
pub fn build_operator(
    sys: &OpenSystem,
    partition: &Arc<BinPartition>,
    variant: Variant,
    ball: Option<Interval>,
) -> Result<DiscretizedOperator> {
    let retained = match variant {
        Variant::Closed => IntervalSet::unit(),
        Variant::Open => sys.x0().clone(),
        Variant::TargetPerturbed => match ball {
            Some(b) => sys.x0().difference(&IntervalSet::from_interval(b)),
            None => sys.x0().clone(),
        },
    };
    let map = sys.map();
    let rows: Vec<Result<Row>> = (0..partition.len())
        .into_par_iter()
        .map(|i| {
            let bin = partition.bin(i);
            let w = bin.len();
            let kept = retained.intersect_interval(&bin);
            let mut row: Vec<(u32, f64)> = Vec::new();
            let mut kept_len = 0.0;
            for piece in kept.components() {
                kept_len += piece.len();
                for branch in map.branches() {
                    let Some(part) = piece.intersect(&branch.domain) else {
                        continue;
                    };
                    let img = branch.image_of(&part);
                    for j in partition.overlapping(img.lo, img.hi) {
                        let Some(ov) = img.intersect(&partition.bin(j)) else {
                            continue;
                        };
                        let frac = match &branch.form {
                            BranchForm::Affine { slope, .. } => ov.len() / slope.abs() / w,
                            BranchForm::Smooth { .. } => branch
                                .preimage_interval(&ov)?
                                .and_then(|pre| pre.intersect(&part))
                                .map_or(0.0, |pre| pre.len() / w),
                        };
                        if frac > 0.0 {
                            row.push((j as u32, frac));
                        }
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            Ok((row, kept_len / w))
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(partition.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut retained_fraction = Vec::with_capacity(partition.len());
    row_ptr.push(0);
    for r in rows {
        let (row, frac) = r?;
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
        retained_fraction.push(frac);
    }
    Ok(DiscretizedOperator {
        partition: Arc::clone(partition),
        variant,
        retained,
        row_ptr,
        cols,
        vals,
        retained_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::PiecewiseExpandingMap;
    use crate::ulam::partition::build_partition;

    fn golden_mean() -> OpenSystem {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap()
    }

    #[test]
    fn golden_mean_quarter_bins() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let op = build_operator(&sys, &p, Variant::Open, None).unwrap();
        let expected = [
            vec![],
            vec![(2, 0.5), (3, 0.5)],
            vec![(0, 0.5), (1, 0.5)],
            vec![(2, 0.5), (3, 0.5)],
        ];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(&op.row(i).collect::<Vec<_>>(), e);
        }
        assert_eq!(op.retained_fraction(), &[0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn closed_rows_are_stochastic() {
        let sys = OpenSystem::closed(PiecewiseExpandingMap::linear_markov(&[3.0, 1.5]).unwrap());
        let p = Arc::new(build_partition(&sys, 97, false).unwrap());
        let op = build_operator(&sys, &p, Variant::Closed, None).unwrap();
        for i in 0..op.len() {
            let s: f64 = op.row(i).map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-12, "row {i} sums to {s}");
        }
    }

    #[test]
    fn smooth_rows_are_stochastic() {
        use crate::interval_maps::Branch;
        let map = PiecewiseExpandingMap::new(vec![
            Branch::smooth(Interval::new(0.0, 0.5).unwrap(), |x| 2.5 * x - x * x, |x| 2.5 - 2.0 * x),
            Branch::affine(Interval::new(0.5, 1.0).unwrap(), 2.0, -1.0),
        ])
        .unwrap();
        let sys = OpenSystem::closed(map);
        let p = Arc::new(build_partition(&sys, 64, false).unwrap());
        let op = build_operator(&sys, &p, Variant::Closed, None).unwrap();
        for i in 0..op.len() {
            let s: f64 = op.row(i).map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-9, "row {i} sums to {s}");
        }
    }

    #[test]
    fn perturbed_rows_drop_the_ball() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 8, true).unwrap());
        let ball = Interval::new(0.5, 0.5625);
        let op = build_operator(&sys, &p, Variant::TargetPerturbed, ball).unwrap();
        let i = p.locate(0.5);
        assert_eq!(op.retained_fraction()[i], 0.5);
        let s: f64 = op.row(i).map(|e| e.1).sum();
        assert_eq!(s, 0.5);
    }
}
