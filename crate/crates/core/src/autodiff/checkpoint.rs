//! Parameter checkpoints: magic `HGN1`, a little-endian `u32` entry count,
//! then per entry `u32` name length, UTF-8 name, `u32` rank, `u32` dims and
//! little-endian `f32` values in row-major order.

use std::io::{Read, Write};

use super::ParameterStore;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub const MAGIC: &[u8; 4] = b"HGN1";

pub fn write_checkpoint(store: &ParameterStore<f32>, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(store.len() as u32).to_le_bytes())?;
    for (name, p) in store.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        let (r, c) = p.value.shape();
        w.write_all(&2u32.to_le_bytes())?;
        w.write_all(&(r as u32).to_le_bytes())?;
        w.write_all(&(c as u32).to_le_bytes())?;
        for x in p.value.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_checkpoint(mut r: impl Read) -> Result<Vec<(String, Matrix<f32>)>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::input("not an HGN1 checkpoint"));
    }
    let count = read_u32(&mut r)?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::input("checkpoint name is not UTF-8"))?;
        let rank = read_u32(&mut r)? as usize;
        let dims = (0..rank).map(|_| read_u32(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let (rows, cols) = match dims[..] {
            [n] => (1, n),
            [a, b] => (a, b),
            _ => return Err(Error::input(format!("unsupported tensor rank {rank} for {name:?}"))),
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            data.push(f32::from_le_bytes(b));
        }
        out.push((name, Matrix::from_vec(rows, cols, data)?));
    }
    Ok(out)
}

/// Overwrites the values of `store` from a checkpoint; every stored name
/// must be present with a matching shape.
pub fn load_into(store: &mut ParameterStore<f32>, r: impl Read) -> Result<()> {
    let entries = read_checkpoint(r)?;
    let expected: Vec<String> = store.names().map(str::to_owned).collect();
    for name in &expected {
        if !entries.iter().any(|(n, _)| n == name) {
            return Err(Error::input(format!("checkpoint lacks parameter {name:?}")));
        }
    }
    for (name, value) in entries {
        store.set_value(&name, value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_exact() {
        let mut s = ParameterStore::<f32>::new();
        s.insert("b", Matrix::from_vec(1, 2, vec![1.0, -2.0]).unwrap());
        let mut buf = Vec::new();
        write_checkpoint(&s, &mut buf).unwrap();
        let mut want = b"HGN1".to_vec();
        for x in [1u32, 1] {
            want.extend(x.to_le_bytes());
        }
        want.push(b'b');
        for x in [2u32, 1, 2] {
            want.extend(x.to_le_bytes());
        }
        want.extend(1.0f32.to_le_bytes());
        want.extend((-2.0f32).to_le_bytes());
        assert_eq!(buf, want);
    }

    #[test]
    fn round_trip_and_bad_magic() {
        let mut s = ParameterStore::<f32>::new();
        s.insert("w", Matrix::from_vec(2, 3, vec![0.5, 1.5, 2.5, -1.0, 0.0, 3.25]).unwrap());
        s.insert("b", Matrix::zeros(1, 3));
        let mut buf = Vec::new();
        write_checkpoint(&s, &mut buf).unwrap();
        let mut t = s.clone();
        t.set_value("w", Matrix::zeros(2, 3)).unwrap();
        load_into(&mut t, buf.as_slice()).unwrap();
        assert_eq!(t.value("w").unwrap(), s.value("w").unwrap());
        buf[0] = b'X';
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
