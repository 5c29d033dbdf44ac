//! Tabulated b_n^± samples and their on-disk cache.
//!
//! Cache layout: one line of JSON ([`TableHeader`]) terminated by `\n`,
//! followed by little-endian f64 values in row-major order
//! (n, sign, point, re/im). Points are the real points followed by the
//! complex points; sign 0 is `+`.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::Basis;
use super::eval::{QuadParams, SquareNode};
use super::gn::Parity;
use crate::error::{FilError, Result};

pub const TABLE_FORMAT: &str = "fil-basis-table";
pub const TABLE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub format: String,
    pub version: u32,
    pub code_version: String,
    pub n_max: usize,
    pub bits: usize,
    pub order: i64,
    pub quad: QuadParams,
    pub real_points: Vec<SquareNode>,
    pub complex_points: Vec<[f64; 2]>,
}

impl TableHeader {
    /// Header describing a table of `basis` on the given points.
    pub fn for_basis(basis: &Basis, real: &[SquareNode], complex: &[Complex<f64>]) -> Self {
        TableHeader {
            format: TABLE_FORMAT.to_string(),
            version: TABLE_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            n_max: basis.n_max(),
            bits: basis.bits(),
            order: basis.family().order,
            quad: basis.params().clone(),
            real_points: real.to_vec(),
            complex_points: complex.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisTable {
    pub header: TableHeader,
    values: Vec<f64>,
}

/// Runs `f` on a pool with `jobs` threads; 0 means the global pool.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    if jobs == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

impl BasisTable {
    /// Evaluates every b_n^± on the real points (real route) and the complex
    /// points (contour route). Each point is computed independently and
    /// written to its own slot, so the result does not depend on `jobs`.
    pub fn tabulate(basis: &Basis, real: &[SquareNode], complex: &[Complex<f64>], jobs: usize) -> Self {
        let header = TableHeader::for_basis(basis, real, complex);
        let per_point: Vec<Vec<[Complex<f64>; 2]>> = with_jobs(jobs, || {
            let mut out: Vec<Vec<[Complex<f64>; 2]>> = real
                .par_iter()
                .map(|node| {
                    basis
                        .real_all(*node)
                        .into_iter()
                        .map(|[p, m]| [Complex::new(p, 0.0), Complex::new(m, 0.0)])
                        .collect()
                })
                .collect();
            out.extend(complex.par_iter().map(|z| basis.contour_all(*z)).collect::<Vec<_>>());
            out
        });
        let n_points = per_point.len();
        let mut values = vec![0.0; (basis.n_max() + 1) * 2 * n_points * 2];
        let mut table = BasisTable { header, values: Vec::new() };
        for (p, row) in per_point.iter().enumerate() {
            for (n, pair) in row.iter().enumerate() {
                for sign in Parity::BOTH {
                    let i = table.index(n, sign, p);
                    values[i] = pair[sign.index()].re;
                    values[i + 1] = pair[sign.index()].im;
                }
            }
        }
        table.values = values;
        table
    }

    pub fn n_max(&self) -> usize {
        self.header.n_max
    }

    pub fn n_real(&self) -> usize {
        self.header.real_points.len()
    }

    pub fn n_complex(&self) -> usize {
        self.header.complex_points.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_real() + self.n_complex()
    }

    pub fn is_empty(&self) -> bool {
        self.n_points() == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn index(&self, n: usize, sign: Parity, point: usize) -> usize {
        ((n * 2 + sign.index()) * self.n_points() + point) * 2
    }

    fn check(&self, n: usize, point: usize) -> Result<()> {
        if n > self.n_max() || point >= self.n_points() {
            Err(FilError::MissingValue { n, node: point })
        } else {
            Ok(())
        }
    }

    /// b_n^± at the i-th real point.
    pub fn b_real(&self, n: usize, sign: Parity, i: usize) -> Result<f64> {
        if i >= self.n_real() {
            return Err(FilError::MissingValue { n, node: i });
        }
        self.check(n, i)?;
        Ok(self.values[self.index(n, sign, i)])
    }

    /// (a_n, â_n) at the i-th real point.
    pub fn a_real(&self, n: usize, i: usize) -> Result<(f64, f64)> {
        let p = self.b_real(n, Parity::Plus, i)?;
        let m = self.b_real(n, Parity::Minus, i)?;
        Ok((p + m, p - m))
    }

    /// b_n^± at the i-th complex point.
    pub fn b_complex(&self, n: usize, sign: Parity, i: usize) -> Result<Complex<f64>> {
        let p = self.n_real() + i;
        if i >= self.n_complex() {
            return Err(FilError::MissingValue { n, node: p });
        }
        self.check(n, p)?;
        let k = self.index(n, sign, p);
        Ok(Complex::new(self.values[k], self.values[k + 1]))
    }

    pub fn a_complex(&self, n: usize, i: usize) -> Result<(Complex<f64>, Complex<f64>)> {
        let p = self.b_complex(n, Parity::Plus, i)?;
        let m = self.b_complex(n, Parity::Minus, i)?;
        Ok((p + m, p - m))
    }

    /// Index of a real point with exactly this split.
    pub fn find_real(&self, node: SquareNode) -> Option<usize> {
        self.header.real_points.iter().position(|p| p.k == node.k && p.eps.to_bits() == node.eps.to_bits())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(&self.header)?;
        out.push(b'\n');
        out.reserve(self.values.len() * 8);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| FilError::CacheCorrupt("missing header line".into()))?;
        let header: TableHeader = serde_json::from_slice(&bytes[..nl])
            .map_err(|e| FilError::CacheCorrupt(format!("header: {e}")))?;
        if header.format != TABLE_FORMAT {
            return Err(FilError::CacheCorrupt(format!("unknown format {:?}", header.format)));
        }
        if header.version != TABLE_VERSION {
            return Err(FilError::CacheVersion { found: header.version, expected: TABLE_VERSION });
        }
        let payload = &bytes[nl + 1..];
        let points = header.real_points.len() + header.complex_points.len();
        let want = (header.n_max + 1) * 2 * points * 2;
        if payload.len() != want * 8 {
            return Err(FilError::CacheCorrupt(format!("payload has {} bytes, expected {}", payload.len(), want * 8)));
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        Ok(BasisTable { header, values })
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Loads the cache when it matches `header`; otherwise (missing, stale,
    /// corrupt or for other points) rebuilds and rewrites it. The flag is
    /// true when a rebuild happened.
    pub fn load_or_build(
        path: &Path,
        basis: &Basis,
        real: &[SquareNode],
        complex: &[Complex<f64>],
        jobs: usize,
    ) -> Result<(Self, bool)> {
        let want = TableHeader::for_basis(basis, real, complex);
        if let Ok(t) = Self::load(path) {
            if t.header == want {
                return Ok((t, false));
            }
        }
        let t = Self::tabulate(basis, real, complex, jobs);
        t.store(path)?;
        Ok((t, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Precision;

    fn basis() -> Basis {
        Basis::new(4, Precision::Double, QuadParams::default()).unwrap()
    }

    #[test]
    fn exact_grid_reproduces_deltas() {
        let b = basis();
        let real: Vec<_> = (1..=4).map(SquareNode::exact).collect();
        let t = BasisTable::tabulate(&b, &real, &[], 0);
        for n in 1..=4 {
            for (i, node) in real.iter().enumerate() {
                let (a, ah) = t.a_real(n, i).unwrap();
                assert_eq!(a, if node.k == n as u64 { 1.0 } else { 0.0 });
                assert_eq!(ah, 0.0);
            }
        }
    }

    #[test]
    fn empty_grid() {
        let t = BasisTable::tabulate(&basis(), &[], &[], 0);
        assert!(t.is_empty());
        assert!(t.values().is_empty());
        assert!(t.b_real(0, Parity::Plus, 0).is_err());
    }

    #[test]
    fn round_trip_and_schedule_independence() {
        let b = basis();
        let real = [SquareNode::from_x(0.3), SquareNode::new(2, 0.01)];
        let cx = [Complex::new(0.5, 0.5), Complex::new(0.0, 1.0)];
        let t1 = BasisTable::tabulate(&b, &real, &cx, 1);
        let t3 = BasisTable::tabulate(&b, &real, &cx, 3);
        assert_eq!(t1.to_bytes().unwrap(), t3.to_bytes().unwrap());
        let back = BasisTable::from_bytes(&t1.to_bytes().unwrap()).unwrap();
        assert_eq!(back, t1);
        let z = t1.b_complex(2, Parity::Minus, 1).unwrap();
        let direct = b.eval_bn(2, Parity::Minus, cx[1]).unwrap();
        assert_eq!(z, direct);
        assert_eq!(t1.find_real(SquareNode::new(2, 0.01)), Some(1));
        assert!(matches!(t1.b_real(5, Parity::Plus, 0), Err(FilError::MissingValue { n: 5, .. })));
    }

    #[test]
    fn version_and_corruption() {
        let b = basis();
        let t = BasisTable::tabulate(&b, &[SquareNode::exact(1)], &[], 0);
        let mut h = t.header.clone();
        h.version = 99;
        let mut bytes = serde_json::to_vec(&h).unwrap();
        bytes.push(b'\n');
        bytes.extend_from_slice(&t.to_bytes().unwrap()[serde_json::to_vec(&t.header).unwrap().len() + 1..]);
        assert!(matches!(BasisTable::from_bytes(&bytes), Err(FilError::CacheVersion { found: 99, .. })));
        let mut good = t.to_bytes().unwrap();
        good.pop();
        assert!(matches!(BasisTable::from_bytes(&good), Err(FilError::CacheCorrupt(_))));
        assert!(matches!(BasisTable::from_bytes(b"garbage"), Err(FilError::CacheCorrupt(_))));
    }

    #[test]
    fn corrupt_cache_is_rebuilt() {
        let dir = std::env::temp_dir().join(format!("fil-table-{}", std::process::id()));
        let path = dir.join("t.bin");
        fs::create_dir_all(&dir).unwrap();
        fs::write(&path, b"not a table").unwrap();
        let b = basis();
        let real = [SquareNode::exact(2)];
        let (t, rebuilt) = BasisTable::load_or_build(&path, &b, &real, &[], 0).unwrap();
        assert!(rebuilt);
        let (t2, rebuilt2) = BasisTable::load_or_build(&path, &b, &real, &[], 0).unwrap();
        assert!(!rebuilt2);
        assert_eq!(t, t2);
        fs::remove_dir_all(&dir).ok();
    }
}
