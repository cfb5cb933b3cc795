//! Binary instance dump.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic  b"AMPINST1"
//! n      u64
//! N      u64
//! seed   u64
//! len    u32, then `len` bytes of UTF-8 config echo
//! A      n·N f64, row-major
//! x_o    N f64
//! w      n f64
//! y      n f64
//! ```

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use super::{InstanceConfig, ProblemError, ProblemInstance};

const MAGIC: &[u8; 8] = b"AMPINST1";

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDump {
    pub seed: u64,
    pub config_echo: String,
    pub instance: ProblemInstance,
}

pub fn write_instance_dump(
    mut out: impl Write,
    cfg: &InstanceConfig,
    inst: &ProblemInstance,
) -> Result<(), ProblemError> {
    out.write_all(MAGIC)?;
    out.write_all(&(inst.n_rows() as u64).to_le_bytes())?;
    out.write_all(&(inst.n_cols() as u64).to_le_bytes())?;
    out.write_all(&cfg.seed.to_le_bytes())?;
    let echo = cfg.to_string();
    out.write_all(&(echo.len() as u32).to_le_bytes())?;
    out.write_all(echo.as_bytes())?;
    let floats = inst
        .a
        .iter()
        .chain(inst.x_o.iter())
        .chain(inst.w.iter())
        .chain(inst.y.iter());
    for v in floats {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64, ProblemError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, len: usize) -> Result<Vec<f64>, ProblemError> {
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_instance_dump(mut r: impl Read) -> Result<InstanceDump, ProblemError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ProblemError::Dump("bad magic".into()));
    }
    let n = read_u64(&mut r)? as usize;
    let big_n = read_u64(&mut r)? as usize;
    let seed = read_u64(&mut r)?;
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut echo = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut echo)?;
    let config_echo = String::from_utf8(echo)
        .map_err(|_| ProblemError::Dump("config echo is not UTF-8".into()))?;
    let a = Array2::from_shape_vec((n, big_n), read_f64s(&mut r, n * big_n)?)
        .map_err(|e| ProblemError::Dump(e.to_string()))?;
    let x_o = Array1::from(read_f64s(&mut r, big_n)?);
    let w = Array1::from(read_f64s(&mut r, n)?);
    let y = Array1::from(read_f64s(&mut r, n)?);
    Ok(InstanceDump {
        seed,
        config_echo,
        instance: ProblemInstance { a, x_o, w, y },
    })
}
