//! Binary solver checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `LLNS` |
//! | 4 | `u32` format version (1) |
//! | 4 | `u32` grid size `n` |
//! | 8 | `f64` box size |
//! | 8 | `f64` time |
//! | 8 | `f64` viscosity |
//! | 8 | `u64` step count |
//! | 48 n³ | coefficients |
//!
//! Coefficients are component-major: all `n³` modes of component 0, then 1,
//! then 2. Within a component mode `(i, j, l)` of the FFT index grid sits at
//! position `i n² + j n + l`; each mode is written as `re` then `im`.

use std::path::Path;

use num_complex::Complex64;

use super::artifacts::write_atomic;
use crate::dynamics::SolverState;
use crate::error::{Error, Result};
use crate::spectral::{make_grid, SpectralField};

pub const MAGIC: &[u8; 4] = b"LLNS";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8 + 8;

pub fn encode(state: &SolverState) -> Vec<u8> {
    let v = state.velocity();
    let g = v.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 48 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.box_size().to_le_bytes());
    out.extend_from_slice(&state.time().to_le_bytes());
    out.extend_from_slice(&state.viscosity().to_le_bytes());
    out.extend_from_slice(&state.step_count().to_le_bytes());
    for c in 0..3 {
        for z in v.component(c) {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.at + N;
        let chunk = self.bytes.get(self.at..end).ok_or_else(|| {
            Error::Checkpoint(format!(
                "truncated file: {} bytes, ran out while reading {what}",
                self.bytes.len()
            ))
        })?;
        self.at = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<SolverState> {
    let mut r = Reader { bytes, at: 0 };
    let magic: [u8; 4] = r.take("magic")?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected \"LLNS\"",
            String::from_utf8_lossy(&magic)
        )));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let n = r.u32("grid size")? as usize;
    let box_size = r.f64("box size")?;
    let t = r.f64("time")?;
    let mu = r.f64("viscosity")?;
    let step = r.u64("step count")?;
    let grid = make_grid(n, box_size)?;
    let expected = HEADER_LEN + 48 * grid.len();
    if bytes.len() < expected {
        return Err(Error::Checkpoint(format!(
            "truncated file: {} bytes, expected {expected} for n = {n}",
            bytes.len()
        )));
    }
    if bytes.len() > expected {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the coefficients",
            bytes.len() - expected
        )));
    }
    let mut coeffs: [Vec<Complex64>; 3] = Default::default();
    for comp in &mut coeffs {
        comp.reserve_exact(grid.len());
        for _ in 0..grid.len() {
            let re = r.f64("coefficients")?;
            let im = r.f64("coefficients")?;
            comp.push(Complex64::new(re, im));
        }
    }
    let v = SpectralField::from_coeffs(&grid, coeffs)?;
    SolverState::restore(v, mu, t, step)
}

pub fn checkpoint_save(state: &SolverState, path: &Path) -> Result<()> {
    write_atomic(path, &encode(state))
}

pub fn checkpoint_load(path: &Path) -> Result<SolverState> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{step, StepperConfig};
    use crate::initial_data::random_divfree;
    use std::f64::consts::PI;

    fn sample_state() -> SolverState {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let v = random_divfree(5, -1.0, 2, 0.7, &g).unwrap();
        step(&SolverState::new(v, 0.9).unwrap(), &StepperConfig::fixed(0.01)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample_state();
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 48 * 512);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.time().to_bits(), s.time().to_bits());
        assert_eq!(back.viscosity().to_bits(), s.viscosity().to_bits());
        assert_eq!(back.step_count(), 1);
        for c in 0..3 {
            for (a, b) in back.velocity().component(c).iter().zip(s.velocity().component(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample_state());
        assert_eq!(&bytes[0..4], b"LLNS");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 0.01);
        assert_eq!(u64::from_le_bytes(bytes[36..44].try_into().unwrap()), 1);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let good = encode(&sample_state());
        let mut bad = good.clone();
        bad[0] = b'X';
        let msg = decode(&bad).unwrap_err().to_string();
        assert!(msg.contains("LLNS"), "{msg}");

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(decode(&bad).unwrap_err().to_string().contains("version"));

        for cut in [3, 20, good.len() - 1] {
            let msg = decode(&good[..cut]).unwrap_err().to_string();
            assert!(msg.contains("truncated"), "{cut}: {msg}");
        }
        let mut long = good;
        long.push(0);
        assert!(decode(&long).is_err());
    }
}
