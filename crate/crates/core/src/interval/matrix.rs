//! Dense row-major interval matrices.

use rayon::prelude::*;

use super::round::{add_down, add_up};
use super::Interval;

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        IntervalMatrix { rows, cols, data: vec![Interval::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    /// Point matrix from row-major values.
    pub fn from_points(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "value count does not match shape");
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        IntervalMatrix { rows, cols, data: values.iter().map(|&x| Interval::point(x)).collect() }
    }

    pub fn from_intervals(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        IntervalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Interval] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major midpoints.
    pub fn midpoints(&self) -> Vec<f64> {
        self.data.iter().map(Interval::mid).collect()
    }

    pub fn has_empty(&self) -> bool {
        self.data.iter().any(Interval::is_empty)
    }

    /// Map every entry.
    pub fn map(&self, f: impl Fn(&Interval) -> Interval) -> Self {
        IntervalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Interval product; rows are computed in parallel.
    pub fn mul(&self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let (n, m) = (self.rows, rhs.cols);
        let mut data = vec![Interval::ZERO; n * m];
        data.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
            let a_row = self.row(i);
            for (k, a) in a_row.iter().enumerate() {
                if a.lo() == 0.0 && a.hi() == 0.0 {
                    continue;
                }
                let b_row = rhs.row(k);
                for (o, b) in out.iter_mut().zip(b_row) {
                    *o = *o + *a * *b;
                }
            }
        });
        IntervalMatrix { rows: n, cols: m, data }
    }

    /// `I - self` for a square matrix.
    pub fn identity_minus(&self) -> IntervalMatrix {
        assert!(self.is_square(), "identity_minus needs a square matrix");
        let mut out = self.map(|x| -*x);
        for i in 0..self.rows {
            out[(i, i)] = Interval::ONE + out[(i, i)];
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for IntervalMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntervalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

/// Range of the max-row-sum norm over all point matrices in `m`: the lower
/// endpoint sums mignitudes rounded down, the upper endpoint sums magnitudes
/// rounded up.
pub fn inf_norm(m: &IntervalMatrix) -> Interval {
    if m.has_empty() {
        return Interval::EMPTY;
    }
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for i in 0..m.rows() {
        let row = m.row(i);
        let row_lo = row.iter().fold(0.0, |acc, x| add_down(acc, x.mig()));
        let row_hi = row.iter().fold(0.0, |acc, x| add_up(acc, x.mag()));
        lo = lo.max(row_lo);
        hi = hi.max(row_hi);
    }
    Interval::new(lo, hi).unwrap_or(Interval::EMPTY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_norm_examples() {
        assert_eq!(inf_norm(&IntervalMatrix::identity(2)), Interval::ONE);
        let m = IntervalMatrix::from_points(2, 2, &[1.0, -2.0, 0.5, 0.5]);
        assert_eq!(inf_norm(&m), Interval::point(3.0));
    }

    #[test]
    fn inf_norm_of_straddling_entries() {
        let m = IntervalMatrix::from_intervals(
            1,
            2,
            vec![Interval::new(-1.0, 2.0).unwrap(), Interval::new(0.5, 1.0).unwrap()],
        );
        assert_eq!(inf_norm(&m), Interval::new(0.5, 3.0).unwrap());
    }

    #[test]
    fn product_with_identity() {
        let a = IntervalMatrix::from_points(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = IntervalMatrix::identity(2).mul(&a);
        assert_eq!(p, a);
        let e = IntervalMatrix::identity(2).identity_minus();
        assert!(e.entries().iter().all(|x| *x == Interval::ZERO));
    }
}
