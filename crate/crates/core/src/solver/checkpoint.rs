//! Binary restart files: little-endian, versioned.
//!
//! Layout: magic `YAWSTAB\0`, u32 version, u64 step, f64 phase, u64 cell
//! count, then `5 * cells` f64 conservative values, then two mesh levels
//! (current, previous), each a u64 node count followed by `3 * nodes` f64.

use std::io::{Read, Write};
use std::path::Path;

use super::state::Conservative;
use crate::error::{Error, Result};
use crate::geom::Vec3;

const MAGIC: &[u8; 8] = b"YAWSTAB\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub phase: f64,
    pub q: Vec<Conservative>,
    pub mesh_current: Vec<Vec3>,
    pub mesh_previous: Vec<Vec3>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + 40 * self.q.len() + 24 * (self.mesh_current.len() + self.mesh_previous.len()));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&self.step.to_le_bytes());
        b.extend_from_slice(&self.phase.to_le_bytes());
        b.extend_from_slice(&(self.q.len() as u64).to_le_bytes());
        for q in &self.q {
            q.iter().for_each(|v| b.extend_from_slice(&v.to_le_bytes()));
        }
        for level in [&self.mesh_current, &self.mesh_previous] {
            b.extend_from_slice(&(level.len() as u64).to_le_bytes());
            for p in level {
                p.iter().for_each(|v| b.extend_from_slice(&v.to_le_bytes()));
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Parse("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {version}")));
        }
        let step = r.u64()?;
        let phase = r.f64()?;
        let cells = r.count(40)?;
        let mut q = Vec::with_capacity(cells);
        for _ in 0..cells {
            let mut s = [0.0; 5];
            for v in s.iter_mut() {
                *v = r.f64()?;
            }
            q.push(s);
        }
        let mut levels = Vec::new();
        for _ in 0..2 {
            let n = r.count(24)?;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                pts.push([r.f64()?, r.f64()?, r.f64()?]);
            }
            levels.push(pts);
        }
        if r.pos != bytes.len() {
            return Err(Error::Parse("trailing bytes in checkpoint".into()));
        }
        let mesh_previous = levels.pop().expect("two levels");
        let mesh_current = levels.pop().expect("two levels");
        Ok(Checkpoint { step, phase, q, mesh_current, mesh_previous })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Parse("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// Element count whose payload of `size` bytes each must fit.
    fn count(&mut self, size: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n.saturating_mul(size) > self.bytes.len() - self.pos {
            return Err(Error::Parse("truncated checkpoint".into()));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_truncation() {
        let c = Checkpoint {
            step: 17,
            phase: 1.25,
            q: vec![[1.0, 2.0, 3.0, 4.0, 5.5]; 3],
            mesh_current: vec![[0.1, 0.2, 0.3]; 4],
            mesh_previous: vec![[0.0, -0.2, 0.3]; 4],
        };
        let b = c.to_bytes();
        assert_eq!(Checkpoint::from_bytes(&b).unwrap(), c);
        assert!(Checkpoint::from_bytes(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
    }
}
