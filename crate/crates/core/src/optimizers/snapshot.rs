//! Versioned binary snapshot format.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic  "EVOS"       4 bytes
//! version             u32
//! optimizer kind      u32   (see OptimizerKind::code)
//! d                   u64
//! t                   u64
//! body                optimizer specific; floats are f64, counts u64
//! ```
//!
//! Vectors are written as a u64 length followed by that many f64 values.
//! RNG state is the 32-byte ChaCha seed, the stream id and the word position.

use nalgebra::DMatrix;
use rand::SeedableRng;

use super::{OptimizerError, OptimizerKind};
use crate::rng::Rng;

pub const MAGIC: &[u8; 4] = b"EVOS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub kind: OptimizerKind,
    pub dim: u64,
    pub generation: u64,
}

fn err(msg: impl Into<String>) -> OptimizerError {
    OptimizerError::Snapshot(msg.into())
}

pub fn peek_header(bytes: &[u8]) -> Result<Header, OptimizerError> {
    SnapReader::new(bytes).header()
}

pub struct SnapWriter {
    buf: Vec<u8>,
}

impl SnapWriter {
    pub fn new(kind: OptimizerKind, dim: usize, generation: usize) -> Self {
        let mut w = Self {
            buf: Vec::with_capacity(HEADER_LEN),
        };
        w.buf.extend_from_slice(MAGIC);
        w.u32(VERSION);
        w.u32(kind.code());
        w.u64(dim as u64);
        w.u64(generation as u64);
        w
    }

    pub fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn f64(&mut self, x: f64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn f64s(&mut self, xs: &[f64]) {
        self.u64(xs.len() as u64);
        for &x in xs {
            self.f64(x);
        }
    }

    pub fn matrix(&mut self, m: &DMatrix<f64>) {
        self.u64(m.nrows() as u64);
        self.u64(m.ncols() as u64);
        for &x in m.as_slice() {
            self.f64(x);
        }
    }

    pub fn rows(&mut self, rows: &[Vec<f64>]) {
        self.u64(rows.len() as u64);
        for r in rows {
            self.f64s(r);
        }
    }

    pub fn rng(&mut self, rng: &Rng) {
        self.buf.extend_from_slice(&rng.get_seed());
        self.u64(rng.get_stream());
        let pos = rng.get_word_pos();
        self.u64(pos as u64);
        self.u64((pos >> 64) as u64);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct SnapReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> SnapReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], OptimizerError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| err("truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn header(&mut self) -> Result<Header, OptimizerError> {
        if self.take(4)? != MAGIC {
            return Err(err("bad magic"));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(err(format!("unsupported version {version}")));
        }
        let code = self.u32()?;
        let kind = OptimizerKind::from_code(code)
            .ok_or_else(|| err(format!("unknown optimizer kind {code}")))?;
        let dim = self.u64()?;
        let generation = self.u64()?;
        Ok(Header {
            version,
            kind,
            dim,
            generation,
        })
    }

    /// Read the header and check it names `kind`.
    pub fn expect(&mut self, kind: OptimizerKind) -> Result<Header, OptimizerError> {
        let h = self.header()?;
        if h.kind != kind {
            return Err(err(format!("snapshot holds {}, expected {kind}", h.kind)));
        }
        Ok(h)
    }

    pub fn u32(&mut self) -> Result<u32, OptimizerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, OptimizerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize, OptimizerError> {
        usize::try_from(self.u64()?).map_err(|_| err("count overflow"))
    }

    pub fn f64(&mut self) -> Result<f64, OptimizerError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>, OptimizerError> {
        let n = self.usize()?;
        if n > (self.buf.len() - self.pos) / 8 {
            return Err(err("truncated"));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn matrix(&mut self) -> Result<DMatrix<f64>, OptimizerError> {
        let r = self.usize()?;
        let c = self.usize()?;
        let n = r
            .checked_mul(c)
            .ok_or_else(|| err("matrix size overflow"))?;
        if n > (self.buf.len() - self.pos) / 8 {
            return Err(err("truncated"));
        }
        let data: Vec<f64> = (0..n).map(|_| self.f64()).collect::<Result<_, _>>()?;
        Ok(DMatrix::from_vec(r, c, data))
    }

    pub fn rows(&mut self) -> Result<Vec<Vec<f64>>, OptimizerError> {
        let n = self.usize()?;
        (0..n).map(|_| self.f64s()).collect()
    }

    pub fn rng(&mut self) -> Result<Rng, OptimizerError> {
        let seed: [u8; 32] = self.take(32)?.try_into().unwrap();
        let stream = self.u64()?;
        let lo = self.u64()? as u128;
        let hi = self.u64()? as u128;
        let mut rng = Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(lo | (hi << 64));
        Ok(rng)
    }

    pub fn finish(self) -> Result<(), OptimizerError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(err("trailing bytes"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn header_layout_is_fixed() {
        let bytes = SnapWriter::new(OptimizerKind::CholeskyCma, 4096, 75).finish();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(&bytes[0..4], b"EVOS");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..20], &4096u64.to_le_bytes());
        assert_eq!(&bytes[20..28], &75u64.to_le_bytes());
        let h = peek_header(&bytes).unwrap();
        assert_eq!(
            (h.kind, h.dim, h.generation),
            (OptimizerKind::CholeskyCma, 4096, 75)
        );
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = SnapWriter::new(OptimizerKind::Ga, 3, 1).finish();
        assert!(peek_header(&bytes[..10]).is_err());
        bytes[0] = b'X';
        assert!(peek_header(&bytes).is_err());
        let mut bytes = SnapWriter::new(OptimizerKind::Ga, 3, 1).finish();
        bytes[8] = 99;
        assert!(peek_header(&bytes).is_err());
    }

    #[test]
    fn rng_state_resumes_mid_stream() {
        let mut rng = crate::rng::stream(5, &[1]);
        for _ in 0..17 {
            rng.random::<u32>();
        }
        let mut w = SnapWriter::new(OptimizerKind::RandomSearch, 1, 0);
        w.rng(&rng);
        let bytes = w.finish();
        let mut r = SnapReader::new(&bytes);
        r.header().unwrap();
        let mut back = r.rng().unwrap();
        r.finish().unwrap();
        for _ in 0..10 {
            assert_eq!(rng.random::<u64>(), back.random::<u64>());
        }
    }
}
