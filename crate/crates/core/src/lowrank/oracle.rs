/// A matrix that can only be sampled entry by entry (or row/column at a time).
///
/// Implementations must be pure: the same index always yields the same value, and
/// `row(i)[j] == entry(i, j) == col(j)[i]`.
pub trait EntryOracle {
    fn shape(&self) -> (usize, usize);

    fn entry(&self, i: usize, j: usize) -> f64;

    fn row(&self, i: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.entry(i, j);
        }
    }

    fn col(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.entry(i, j);
        }
    }
}

impl<T: EntryOracle + ?Sized> EntryOracle for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        (**self).entry(i, j)
    }
    fn row(&self, i: usize, out: &mut [f64]) {
        (**self).row(i, out)
    }
    fn col(&self, j: usize, out: &mut [f64]) {
        (**self).col(j, out)
    }
}

/// Row-major dense matrix; mostly used for initial data and reference computations.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { nrows, ncols, data }
    }

    pub fn from_oracle(oracle: &impl EntryOracle) -> Self {
        let (nrows, ncols) = oracle.shape();
        let mut data = vec![0.0; nrows * ncols];
        for (i, row) in data.chunks_exact_mut(ncols.max(1)).enumerate().take(nrows) {
            oracle.row(i, row);
        }
        DenseMatrix { nrows, ncols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.ncols + j] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl EntryOracle for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.data[i * self.ncols..(i + 1) * self.ncols]);
    }
}

/// Wraps a closure `(i, j) -> value` as an oracle.
pub struct FnOracle<F> {
    nrows: usize,
    ncols: usize,
    f: F,
}

impl<F: Fn(usize, usize) -> f64> FnOracle<F> {
    pub fn new(nrows: usize, ncols: usize, f: F) -> Self {
        FnOracle { nrows, ncols, f }
    }
}

impl<F: Fn(usize, usize) -> f64> EntryOracle for FnOracle<F> {
    fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        (self.f)(i, j)
    }
}
