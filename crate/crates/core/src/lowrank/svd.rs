use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::time::Instant;

use faer::{Mat, MatRef};

use super::aca::CurFactors;
use super::oracle::{DenseMatrix, EntryOracle};
use crate::error::{Error, Result};

/// `U diag(sigma) V^T` with orthonormal columns in `U` (nx x r) and `V` (nv x r).
///
/// Both factors are stored row-major so that a row of `U` or `V` is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdMatrix {
    pub nx: usize,
    pub nv: usize,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub v: Vec<f64>,
}

impl SvdMatrix {
    pub fn zeros(nx: usize, nv: usize) -> Self {
        SvdMatrix {
            nx,
            nv,
            u: Vec::new(),
            sigma: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.nv)
    }

    pub fn u_row(&self, i: usize) -> &[f64] {
        let r = self.rank();
        &self.u[i * r..(i + 1) * r]
    }

    pub fn v_row(&self, j: usize) -> &[f64] {
        let r = self.rank();
        &self.v[j * r..(j + 1) * r]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (ui, vj) = (self.u_row(i), self.v_row(j));
        (0..self.rank())
            .map(|l| ui[l] * self.sigma[l] * vj[l])
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.nx, self.nv, |i, j| self.get(i, j))
    }

    /// Multiplies by a scalar; negative factors flip the sign of `V`.
    pub fn scaled(&self, c: f64) -> SvdMatrix {
        if c == 0.0 {
            return SvdMatrix::zeros(self.nx, self.nv);
        }
        let mut out = self.clone();
        for s in &mut out.sigma {
            *s *= c.abs();
        }
        if c < 0.0 {
            for x in &mut out.v {
                *x = -*x;
            }
        }
        out
    }

    /// `U^T`-weighted reduction: returns `sum_j f(i, j) w_j` for every row `i`.
    pub fn apply_right(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.nv);
        let r = self.rank();
        let mut vw = vec![0.0; r];
        for (j, wj) in w.iter().enumerate() {
            for (acc, vjl) in vw.iter_mut().zip(self.v_row(j)) {
                *acc += vjl * wj;
            }
        }
        for (acc, s) in vw.iter_mut().zip(&self.sigma) {
            *acc *= s;
        }
        (0..self.nx)
            .map(|i| self.u_row(i).iter().zip(&vw).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Exact SVD of a dense matrix truncated at `sigma < eps * sigma_1`.
    pub fn from_dense(a: &DenseMatrix, eps: f64) -> Result<SvdMatrix> {
        let m = Mat::from_fn(a.nrows, a.ncols, |i, j| a.get(i, j));
        let (u, s, v) = sorted_svd(m.as_ref())?;
        let keep = truncation_rank(&s, eps, 0.0);
        Ok(from_factors(
            u.as_ref(),
            &s,
            v.as_ref(),
            keep,
            a.nrows,
            a.ncols,
        ))
    }

    /// Writes the factors in a little-endian binary layout:
    /// `u64 nx, u64 nv, u64 r`, then `U` (nx x r), `sigma` (r), `V` (nv x r), each column-major f64.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let r = self.rank();
        let mut bytes = Vec::with_capacity(24 + 8 * (r * (self.nx + self.nv + 1)));
        for n in [self.nx, self.nv, r] {
            bytes.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for l in 0..r {
            for i in 0..self.nx {
                bytes.extend_from_slice(&self.u[i * r + l].to_le_bytes());
            }
        }
        for s in &self.sigma {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        for l in 0..r {
            for j in 0..self.nv {
                bytes.extend_from_slice(&self.v[j * r + l].to_le_bytes());
            }
        }
        w.write_all(&bytes)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_dump(path: &Path) -> Result<SvdMatrix> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file)
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        let word = |k: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * k..8 * k + 8)
                .map(|s| s.try_into().expect("slice of length 8"))
                .ok_or_else(|| Error::Parse(format!("{}: truncated dump", path.display())))
        };
        let nx = u64::from_le_bytes(word(0)?) as usize;
        let nv = u64::from_le_bytes(word(1)?) as usize;
        let r = u64::from_le_bytes(word(2)?) as usize;
        let expected = 3 + r * (nx + nv + 1);
        if bytes.len() != 8 * expected {
            return Err(Error::Parse(format!(
                "{}: expected {} bytes, found {}",
                path.display(),
                8 * expected,
                bytes.len()
            )));
        }
        let f = |k: usize| f64::from_le_bytes(word(k).expect("length checked"));
        let mut m = SvdMatrix {
            nx,
            nv,
            u: vec![0.0; nx * r],
            sigma: vec![0.0; r],
            v: vec![0.0; nv * r],
        };
        let mut k = 3;
        for l in 0..r {
            for i in 0..nx {
                m.u[i * r + l] = f(k);
                k += 1;
            }
        }
        for l in 0..r {
            m.sigma[l] = f(k);
            k += 1;
        }
        for l in 0..r {
            for j in 0..nv {
                m.v[j * r + l] = f(k);
                k += 1;
            }
        }
        Ok(m)
    }
}

impl EntryOracle for SvdMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.nx, self.nv)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

fn sorted_svd(m: MatRef<'_, f64>) -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
    let svd = m.thin_svd().map_err(|_| Error::SvdFailure {
        nrows: m.nrows(),
        ncols: m.ncols(),
    })?;
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let (u, v) = (svd.U(), svd.V());
    let su = Mat::from_fn(u.nrows(), order.len(), |i, l| u[(i, order[l])]);
    let sv = Mat::from_fn(v.nrows(), order.len(), |j, l| v[(j, order[l])]);
    let ss = order.iter().map(|&l| s[l]).collect();
    Ok((su, ss, sv))
}

/// Number of leading singular values with `sigma >= max(eps * sigma_1, floor)` and `sigma > 0`.
fn truncation_rank(s: &[f64], eps: f64, floor: f64) -> usize {
    let Some(&s1) = s.first() else { return 0 };
    let cut = (eps * s1).max(floor);
    s.iter().take_while(|&&x| x > 0.0 && x >= cut).count()
}

fn from_factors(
    u: MatRef<'_, f64>,
    s: &[f64],
    v: MatRef<'_, f64>,
    r: usize,
    nx: usize,
    nv: usize,
) -> SvdMatrix {
    let mut out = SvdMatrix {
        nx,
        nv,
        u: vec![0.0; nx * r],
        sigma: s[..r].to_vec(),
        v: vec![0.0; nv * r],
    };
    for i in 0..nx {
        for l in 0..r {
            out.u[i * r + l] = u[(i, l)];
        }
    }
    for j in 0..nv {
        for l in 0..r {
            out.v[j * r + l] = v[(j, l)];
        }
    }
    out
}

/// Recompresses `left * right^T` (given as column lists) into SVD form.
///
/// Both factor sets are orthogonalised by thin QR, the small core is diagonalised
/// and the result truncated at `sigma < max(eps * sigma_1, floor)`.
fn compress_factored(
    nx: usize,
    nv: usize,
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    eps: f64,
    floor: f64,
) -> Result<SvdMatrix> {
    let k = left.len();
    if k == 0 {
        return Ok(SvdMatrix::zeros(nx, nv));
    }
    let l = Mat::from_fn(nx, k, |i, c| left[c][i]);
    let r = Mat::from_fn(nv, k, |j, c| right[c][j]);
    let (q1, r1) = thin_qr(&l);
    let (q2, r2) = thin_qr(&r);
    let core = &r1 * r2.transpose();
    let (cu, s, cv) = sorted_svd(core.as_ref())?;
    let keep = truncation_rank(&s, eps, floor);
    let u = &q1 * &cu;
    let v = &q2 * &cv;
    Ok(from_factors(u.as_ref(), &s, v.as_ref(), keep, nx, nv))
}

/// Thin QR: `Q` is `m x min(m, k)` and `R` is `min(m, k) x k`.
fn thin_qr(a: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let qr = a.qr();
    (qr.compute_thin_Q(), qr.thin_R().to_owned())
}

/// Timing of the QR + SVD recompression, recorded alongside the ACA statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TruncationStats {
    pub seconds: f64,
}

/// Converts cross factors into a truncated SVD with relative threshold `eps_s`.
pub fn svd_truncate(cur: &CurFactors, eps_s: f64) -> Result<SvdMatrix> {
    Ok(svd_truncate_timed(cur, eps_s)?.0)
}

pub fn svd_truncate_timed(cur: &CurFactors, eps_s: f64) -> Result<(SvdMatrix, TruncationStats)> {
    if !(eps_s > 0.0 && eps_s < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "eps_s must lie in (0, 1), got {eps_s}"
        )));
    }
    let start = Instant::now();
    let right: Vec<Vec<f64>> = cur
        .row_factors
        .iter()
        .zip(&cur.pivots)
        .map(|(r, p)| r.iter().map(|x| x / p).collect())
        .collect();
    let out = compress_factored(cur.nrows, cur.ncols, &cur.col_factors, &right, eps_s, 0.0)?;
    Ok((
        out,
        TruncationStats {
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Sum of two factored matrices, recompressed with relative threshold `eps_s`.
///
/// Singular values at roundoff level relative to the summands are dropped too, so
/// that `a + (-a)` comes back as rank zero.
pub fn add_lowrank(a: &SvdMatrix, b: &SvdMatrix, eps_s: f64) -> Result<SvdMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    if !(eps_s > 0.0 && eps_s < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "eps_s must lie in (0, 1), got {eps_s}"
        )));
    }
    let (nx, nv) = a.shape();
    let mut left = Vec::with_capacity(a.rank() + b.rank());
    let mut right = Vec::with_capacity(a.rank() + b.rank());
    for m in [a, b] {
        let r = m.rank();
        for l in 0..r {
            left.push((0..nx).map(|i| m.u[i * r + l]).collect());
            right.push((0..nv).map(|j| m.v[j * r + l] * m.sigma[l]).collect());
        }
    }
    let s1 = a.sigma.first().copied().unwrap_or(0.0) + b.sigma.first().copied().unwrap_or(0.0);
    let floor = 64.0 * f64::EPSILON * s1;
    compress_factored(nx, nv, &left, &right, eps_s, floor)
}

/// Values `sum_l u[i,l] sigma[l] v[j,l]` at each requested index pair.
pub fn evaluate_entries(m: &SvdMatrix, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&(i, j)| {
            if i >= m.nx || j >= m.nv {
                Err(Error::IndexOutOfRange {
                    row: i,
                    col: j,
                    nrows: m.nx,
                    ncols: m.nv,
                })
            } else {
                Ok(m.get(i, j))
            }
        })
        .collect()
}
