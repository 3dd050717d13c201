//! Periodic grids and sampled scalar fields.
//!
//! All discrete work in this crate happens on a uniform periodic grid over
//! the torus [0, box_len)^d with m cells per axis. Fields are stored flat,
//! row-major, one value per cell center.

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Cap on total grid size (m^d), keeping every experiment desk-scale.
pub const MAX_POINTS: usize = 1 << 22;

/// Magic bytes opening the on-disk field format.
pub const FIELD_MAGIC: &[u8; 4] = b"BVC1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    d: usize,
    m: usize,
    box_len: f64,
}

impl GridSpec {
    /// Per-axis resolution caps: 4096 (d=1), 256 (d=2), 64 (d=3).
    pub fn new(d: usize, m: usize, box_len: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::invalid(format!("grid dimension must be 1..=3, got {d}")));
        }
        if !m.is_power_of_two() || m < 8 {
            return Err(Error::invalid(format!(
                "grid resolution must be a power of two >= 8, got {m}"
            )));
        }
        let cap = match d {
            1 => 4096,
            2 => 256,
            _ => 64,
        };
        if m > cap {
            return Err(Error::invalid(format!("resolution {m} exceeds cap {cap} for d={d}")));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(Error::invalid(format!("box length must be positive, got {box_len}")));
        }
        let total = m.pow(d as u32);
        if total > MAX_POINTS {
            return Err(Error::invalid(format!("total grid size {total} exceeds {MAX_POINTS}")));
        }
        Ok(GridSpec { d, m, box_len })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    /// Total number of cells, m^d.
    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell width along one axis.
    pub fn cell_width(&self) -> f64 {
        self.box_len / self.m as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.d as i32)
    }

    /// Multi-index of a flat index, row-major (last axis fastest).
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        debug_assert!(flat < self.len());
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            idx[a] = rest % self.m;
            rest /= self.m;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.d);
        let mut flat = 0;
        for &i in idx {
            debug_assert!(i < self.m);
            flat = flat * self.m + i;
        }
        flat
    }

    /// Coordinates of the cell center for a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.cell_width();
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Signed displacement u - v wrapped to [-box/2, box/2) per axis.
    pub fn torus_delta(&self, u: f64, v: f64) -> f64 {
        let mut delta = (u - v) % self.box_len;
        if delta < -0.5 * self.box_len {
            delta += self.box_len;
        } else if delta >= 0.5 * self.box_len {
            delta -= self.box_len;
        }
        delta
    }

    /// Periodic Euclidean distance between two cell centers.
    pub fn distance(&self, flat_a: usize, flat_b: usize) -> f64 {
        let xa = self.coords(flat_a);
        let xb = self.coords(flat_b);
        let mut s = 0.0;
        for a in 0..self.d {
            let delta = self.torus_delta(xa[a], xb[a]);
            s += delta * delta;
        }
        s.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid wants {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField(i));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Sample a function of cell-center coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..grid.d()])
            })
            .collect();
        SampledField::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise a*self + b*other. Grids must match exactly.
    pub fn axpy(&self, a: f64, other: &SampledField, b: f64) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("axpy over different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        Ok(SampledField {
            grid: self.grid,
            values,
        })
    }

    /// Write in the binary field format: magic, then d, m (u64 LE) and
    /// box_len (f64 LE), then the values row-major as f64 LE.
    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&(self.grid.d as u64).to_le_bytes())?;
        w.write_all(&(self.grid.m as u64).to_le_bytes())?;
        w.write_all(&self.grid.box_len.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut dyn Read) -> Result<SampledField> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Parse(format!("bad field magic {magic:?}")));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let d = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let m = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let box_len = f64::from_le_bytes(buf8);
        let grid = GridSpec::new(d, m, box_len)?;
        let mut values = vec![0.0; grid.len()];
        for v in values.iter_mut() {
            r.read_exact(&mut buf8)?;
            *v = f64::from_le_bytes(buf8);
        }
        SampledField::new(grid, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> Result<SampledField> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        SampledField::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1, 256, 1.0).is_ok());
        assert!(GridSpec::new(0, 256, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(1, 100, 1.0).is_err(), "non power of two");
        assert!(GridSpec::new(1, 8192, 1.0).is_err(), "over d=1 cap");
        assert!(GridSpec::new(2, 512, 1.0).is_err(), "over d=2 cap");
        assert!(GridSpec::new(3, 128, 1.0).is_err(), "over d=3 cap");
        assert!(GridSpec::new(1, 256, 0.0).is_err());
        assert!(GridSpec::new(1, 256, f64::NAN).is_err());
    }

    #[test]
    fn flat_round_trip_d3() {
        let g = GridSpec::new(3, 8, 2.0).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            let idx = g.unflatten(flat);
            assert_eq!(g.flatten(&idx[..3]), flat);
        }
    }

    #[test]
    fn torus_distance_wraps() {
        let g = GridSpec::new(1, 8, 8.0).unwrap();
        // cells at x=1 and x=7 are distance 2 apart around the back
        assert!((g.distance(1, 7) - 2.0).abs() < 1e-15);
        assert!((g.distance(0, 4) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        match SampledField::new(g, v) {
            Err(Error::NonFiniteField(3)) => {}
            other => panic!("expected NonFiniteField(3), got {other:?}"),
        }
    }

    #[test]
    fn binary_round_trip() {
        let g = GridSpec::new(2, 8, 3.5).unwrap();
        let f = SampledField::from_fn(g, |x| (x[0] - 1.7) * (x[1] + 0.25)).unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], FIELD_MAGIC);
        assert_eq!(buf.len(), 4 + 3 * 8 + 64 * 8);
        let back = SampledField::read_from(&mut &buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn read_rejects_bad_magic() {
        let data = b"NOPE\x01\x00\x00\x00\x00\x00\x00\x00";
        assert!(SampledField::read_from(&mut &data[..]).is_err());
    }
}
