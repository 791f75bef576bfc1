//! Dense column-major matrices and the CHIRP1 on-disk format.
//!
//! A matrix is stored as complex entries regardless of kind; real matrices
//! carry zero imaginary parts and are serialized without them. CHIRP1 layout:
//!
//! ```text
//! bytes 0..6    magic ASCII "CHIRP1"
//! byte  6       flag: 1 = complex, 0 = real
//! bytes 7..15   n (rows), unsigned 64-bit little-endian
//! bytes 15..23  N (cols), unsigned 64-bit little-endian
//! then          column-major IEEE-754 binary64 little-endian entries
//!               (complex: interleaved real, imaginary)
//! ```

use num_complex::Complex64;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad CHIRP1 header")]
    BadHeader,
    #[error("truncated CHIRP1 payload")]
    Truncated,
}

const MAGIC: &[u8; 6] = b"CHIRP1";

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    /// Column-major.
    data: Vec<Complex64>,
    real: bool,
}

impl DenseMatrix {
    pub fn from_columns(rows: usize, columns: Vec<Vec<Complex64>>) -> Self {
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for c in &columns {
            assert_eq!(c.len(), rows);
            data.extend_from_slice(c);
        }
        DenseMatrix { rows, cols, data, real: false }
    }

    pub fn from_real_columns(rows: usize, columns: Vec<Vec<f64>>) -> Self {
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for c in &columns {
            assert_eq!(c.len(), rows);
            data.extend(c.iter().map(|&v| Complex64::new(v, 0.0)));
        }
        DenseMatrix { rows, cols, data, real: true }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    /// <u, v> = sum_x u_x * conj(v_x): conjugate-linear in the second slot.
    pub fn inner(&self, i: usize, j: usize) -> Complex64 {
        inner_product(self.col(i), self.col(j))
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        self.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// y = M x by direct accumulation.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += self.get(i, j) * xj;
            }
        }
        y
    }

    pub fn write_chirp1<W: Write>(&self, w: &mut W) -> Result<(), MatrixError> {
        w.write_all(MAGIC)?;
        w.write_all(&[if self.real { 0u8 } else { 1u8 }])?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            if !self.real {
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_chirp1<R: Read>(r: &mut R) -> Result<Self, MatrixError> {
        let mut head = [0u8; 23];
        r.read_exact(&mut head).map_err(|_| MatrixError::BadHeader)?;
        if &head[0..6] != MAGIC || head[6] > 1 {
            return Err(MatrixError::BadHeader);
        }
        let real = head[6] == 0;
        let rows = u64::from_le_bytes(head[7..15].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(head[15..23].try_into().unwrap()) as usize;
        let scalars = rows * cols * if real { 1 } else { 2 };
        let mut buf = vec![0u8; scalars * 8];
        r.read_exact(&mut buf).map_err(|_| MatrixError::Truncated)?;
        let mut data = Vec::with_capacity(rows * cols);
        let mut take = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        for _ in 0..rows * cols {
            let re = take.next().unwrap();
            let im = if real { 0.0 } else { take.next().unwrap() };
            data.push(Complex64::new(re, im));
        }
        Ok(DenseMatrix { rows, cols, data, real })
    }

    pub fn write_chirp1_file(&self, path: &std::path::Path) -> Result<(), MatrixError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_chirp1(&mut f)?;
        Ok(())
    }

    pub fn read_chirp1_file(path: &std::path::Path) -> Result<Self, MatrixError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_chirp1(&mut f)
    }
}

/// <u, v> = sum_x u_x * conj(v_x).
pub fn inner_product(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}
