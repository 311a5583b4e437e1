//! Binary and JSON containers for grid distributions and masks.
//!
//! Binary layout, all little-endian `f64`: `n`, then `N` per axis, then `L`
//! per axis. Distributions continue with interleaved `re, im` pairs in
//! row-major order; masks continue with the point flags packed into bytes,
//! least significant bit first.

use std::path::Path;

use num_complex::Complex64;

use super::{DomainMask, GridDistribution, GridShape};
use crate::error::{Error, Result};

fn header(grid: &GridShape) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend((grid.dim() as f64).to_le_bytes());
    for &n in &grid.shape {
        out.extend((n as f64).to_le_bytes());
    }
    for &l in &grid.box_length {
        out.extend(l.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn f64(&mut self) -> Result<f64> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + 8)
            .ok_or_else(|| Error::invalid("truncated grid container"))?;
        self.pos += 8;
        Ok(f64::from_le_bytes(chunk.try_into().expect("8 bytes")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let v = self.f64()?;
        if !((0.0..=1e12).contains(&v) && v.fract() == 0.0) {
            return Err(Error::invalid(format!("{what} must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn grid(&mut self) -> Result<GridShape> {
        let n = self.count("dimension")?;
        if !(1..=3).contains(&n) {
            return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        let shape = (0..n)
            .map(|_| self.count("points per axis"))
            .collect::<Result<Vec<_>>>()?;
        let lengths = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        GridShape::new(shape, lengths)
    }

    fn rest(&self) -> &[u8] {
        &self.bytes[self.pos..]
    }
}

pub fn distribution_to_bytes(u: &GridDistribution) -> Vec<u8> {
    let mut out = header(u.grid());
    for c in u.samples() {
        out.extend(c.re.to_le_bytes());
        out.extend(c.im.to_le_bytes());
    }
    out
}

pub fn distribution_from_bytes(bytes: &[u8]) -> Result<GridDistribution> {
    let mut r = Reader { bytes, pos: 0 };
    let grid = r.grid()?;
    let expect = grid.len() * 16;
    if r.rest().len() != expect {
        return Err(Error::invalid(format!(
            "payload has {} bytes, expected {expect}",
            r.rest().len()
        )));
    }
    let samples = (0..grid.len())
        .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    GridDistribution::new(grid, samples)
}

pub fn mask_to_bytes(mask: &DomainMask) -> Vec<u8> {
    let mut out = header(&mask.grid);
    let mut packed = vec![0u8; mask.inside.len().div_ceil(8)];
    for (i, &b) in mask.inside.iter().enumerate() {
        if b {
            packed[i / 8] |= 1 << (i % 8);
        }
    }
    out.extend(packed);
    out
}

pub fn mask_from_bytes(bytes: &[u8]) -> Result<DomainMask> {
    let mut r = Reader { bytes, pos: 0 };
    let grid = r.grid()?;
    let total = grid.len();
    let packed = r.rest();
    if packed.len() != total.div_ceil(8) {
        return Err(Error::invalid(format!(
            "mask payload has {} bytes, expected {}",
            packed.len(),
            total.div_ceil(8)
        )));
    }
    let inside = (0..total).map(|i| packed[i / 8] >> (i % 8) & 1 == 1).collect();
    DomainMask::new(grid, inside)
}

fn looks_like_json(path: &Path, bytes: &[u8]) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{')
}

/// Reads a distribution, JSON if the file says so, binary otherwise.
pub fn load_distribution(path: &Path) -> Result<GridDistribution> {
    let bytes = std::fs::read(path)?;
    if looks_like_json(path, &bytes) {
        Ok(serde_json::from_slice(&bytes)?)
    } else {
        distribution_from_bytes(&bytes)
    }
}

pub fn load_mask(path: &Path) -> Result<DomainMask> {
    let bytes = std::fs::read(path)?;
    if looks_like_json(path, &bytes) {
        let mask: DomainMask = serde_json::from_slice(&bytes)?;
        DomainMask::new(mask.grid, mask.inside)
    } else {
        mask_from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = GridShape::new(vec![4, 6], vec![1.5, 2.0]).unwrap();
        let u = GridDistribution::random(g.clone(), 11).unwrap();
        let bytes = distribution_to_bytes(&u);
        assert_eq!(bytes.len(), 8 * 5 + 24 * 16);
        assert_eq!(distribution_from_bytes(&bytes).unwrap(), u);
        assert!(distribution_from_bytes(&bytes[..bytes.len() - 1]).is_err());

        let mask = DomainMask::new(g, (0..24).map(|i| i % 3 == 0).collect()).unwrap();
        let mb = mask_to_bytes(&mask);
        assert_eq!(mb.len(), 40 + 3);
        assert_eq!(mb[40], 0b0100_1001);
        assert_eq!(mask_from_bytes(&mb).unwrap(), mask);
    }

    #[test]
    fn rejects_malformed_headers() {
        let mut bytes = 4.0f64.to_le_bytes().to_vec();
        bytes.extend([0u8; 64]);
        assert!(distribution_from_bytes(&bytes).is_err());
        let mut bytes = 1.0f64.to_le_bytes().to_vec();
        bytes.extend(2.5f64.to_le_bytes());
        bytes.extend(1.0f64.to_le_bytes());
        assert!(distribution_from_bytes(&bytes).is_err());
        assert!(distribution_from_bytes(&[1, 2, 3]).is_err());
    }

    #[test]
    fn files_by_format() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridShape::new(vec![8], vec![1.0]).unwrap();
        let u = GridDistribution::random(g, 2).unwrap();
        let bin = dir.path().join("u.bin");
        std::fs::write(&bin, distribution_to_bytes(&u)).unwrap();
        let js = dir.path().join("u.json");
        std::fs::write(&js, serde_json::to_vec(&u).unwrap()).unwrap();
        assert_eq!(load_distribution(&bin).unwrap(), u);
        assert_eq!(load_distribution(&js).unwrap(), u);
    }
}
