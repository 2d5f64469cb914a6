//! Eigenframes: an orthonormal basis with descending eigenvalues.
//!
//! File layout: an ASCII header line `EIGENFRAME v1 d=<d> k=<k>` terminated
//! by `\n`, then `k` eigenvalues and `k` basis rows of length `d`, all as
//! little-endian f64.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::DiagnosticsError;
use crate::linalg::{dot, random_orthonormal_rows};

pub const DEFAULT_CUTOFF: usize = 800;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    pub values: Vec<f64>,
    /// `basis[k]` is the eigenvector of `values[k]`.
    pub basis: Vec<Vec<f64>>,
}

impl EigenFrame {
    pub fn new(values: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self, DiagnosticsError> {
        let f = Self { values, basis };
        f.validate_shape()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Default split between "top" and "rest" dimensions: 800, capped so the
    /// rest keeps at least one dimension.
    pub fn default_cutoff(&self) -> usize {
        DEFAULT_CUTOFF.min(self.len().saturating_sub(1)).max(1)
    }

    fn validate_shape(&self) -> Result<(), DiagnosticsError> {
        let fmt = |m: String| Err(DiagnosticsError::Format(m));
        if self.values.len() != self.basis.len() || self.values.is_empty() {
            return fmt(format!(
                "{} eigenvalues for {} basis rows",
                self.values.len(),
                self.basis.len()
            ));
        }
        let d = self.dim();
        if self.basis.iter().any(|r| r.len() != d) || self.len() > d {
            return fmt("basis rows must share a length d >= k".into());
        }
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return fmt("eigenvalues must be sorted descending".into());
        }
        if self
            .values
            .iter()
            .chain(self.basis.iter().flatten())
            .any(|x| !x.is_finite())
        {
            return Err(DiagnosticsError::NonFinite);
        }
        Ok(())
    }

    /// Largest deviation of `U U^T` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.basis[i], &self.basis[j]) - target).abs());
            }
        }
        worst
    }

    /// Random orthonormal basis with eigenvalues spaced log-linearly from 1
    /// down to `10^-decades`.
    pub fn synthetic<R: rand::Rng + ?Sized>(
        dim: usize,
        count: usize,
        decades: f64,
        rng: &mut R,
    ) -> Self {
        let basis = random_orthonormal_rows(dim, count, rng);
        let values = (0..count)
            .map(|k| 10f64.powf(-decades * k as f64 / (count.max(2) - 1) as f64))
            .collect();
        Self { values, basis }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), DiagnosticsError> {
        writeln!(w, "EIGENFRAME v1 d={} k={}", self.dim(), self.len())?;
        for x in self.values.iter().chain(self.basis.iter().flatten()) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, DiagnosticsError> {
        let mut r = BufReader::new(r);
        let mut header = Vec::new();
        r.read_until(b'\n', &mut header)?;
        let header = String::from_utf8(header)
            .map_err(|_| DiagnosticsError::Format("header is not UTF-8".into()))?;
        let (d, k) = parse_header(header.trim_end())?;
        let mut buf = vec![0u8; 8];
        let mut next = || -> Result<f64, DiagnosticsError> {
            r.read_exact(&mut buf)
                .map_err(|_| DiagnosticsError::Format("file truncated".into()))?;
            Ok(f64::from_le_bytes(buf[..8].try_into().expect("8 bytes")))
        };
        let values = (0..k).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
        let basis = (0..k)
            .map(|_| (0..d).map(|_| next()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(DiagnosticsError::Format(format!(
                "{} trailing bytes",
                rest.len()
            )));
        }
        Self::new(values, basis)
    }

    pub fn save(&self, path: &Path) -> Result<(), DiagnosticsError> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, DiagnosticsError> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), DiagnosticsError> {
    let bad = || DiagnosticsError::Format(format!("bad header {line:?}"));
    let mut parts = line.split_whitespace();
    if parts.next() != Some("EIGENFRAME") || parts.next() != Some("v1") {
        return Err(bad());
    }
    let mut field = |name: &str| -> Result<usize, DiagnosticsError> {
        parts
            .next()
            .and_then(|p| p.strip_prefix(name))
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)
    };
    let d = field("d=")?;
    let k = field("k=")?;
    if parts.next().is_some() || k == 0 || k > d {
        return Err(bad());
    }
    Ok((d, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn file_round_trip() {
        let mut rng = crate::rng::Rng::seed_from_u64(1);
        let f = EigenFrame::synthetic(16, 10, 4.0, &mut rng);
        assert!(f.orthonormality_error() < 1e-8);
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"EIGENFRAME v1 d=16 k=10\n"));
        assert_eq!(bytes.len(), 24 + 8 * (10 + 160));
        assert_eq!(EigenFrame::read_from(&bytes[..]).unwrap(), f);
        assert!(EigenFrame::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(EigenFrame::read_from(&extra[..]).is_err());
        assert!(EigenFrame::read_from(&b"EIGENFRAME v2 d=16 k=10\n"[..]).is_err());
    }

    #[test]
    fn synthetic_spectrum_is_descending() {
        let mut rng = crate::rng::Rng::seed_from_u64(2);
        let f = EigenFrame::synthetic(8, 8, 3.0, &mut rng);
        assert_eq!(f.values[0], 1.0);
        assert!((f.values[7] - 1e-3).abs() < 1e-15);
        assert_eq!(f.default_cutoff(), 7);
    }
}
