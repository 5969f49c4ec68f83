//! THOB field files.
//!
//! Layout, all little-endian: `b"THOB"`, version `u32`, dim `u32`, node
//! count per axis `u32 x dim`, spacing `f64 x dim`, origin `f64 x dim`, then
//! one `f64` per node in row-major order with the last axis fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{GeometryError, HalfGrid, ScalarField};

pub const THOB_MAGIC: &[u8; 4] = b"THOB";
pub const THOB_VERSION: u32 = 1;

pub fn write_field<W: Write>(mut w: W, field: &ScalarField) -> Result<(), GeometryError> {
    let lattice = field.grid().lattice();
    let dim = lattice.dim();
    w.write_all(THOB_MAGIC)?;
    w.write_all(&THOB_VERSION.to_le_bytes())?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    for &n in lattice.nodes_per_axis() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &h in lattice.spacing() {
        w.write_all(&h.to_le_bytes())?;
    }
    for &o in lattice.origin() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, GeometryError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, GeometryError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a field and rebuilds its grid. The stored spacing and origin must
/// match the canonical half-box for the stored node counts.
pub fn read_field<R: Read>(mut r: R) -> Result<ScalarField, GeometryError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != THOB_MAGIC {
        return Err(GeometryError::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != THOB_VERSION {
        return Err(GeometryError::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    if !(2..=3).contains(&dim) {
        return Err(GeometryError::UnsupportedDim(dim));
    }
    let nodes: Vec<usize> = (0..dim).map(|_| read_u32(&mut r).map(|n| n as usize)).collect::<Result<_, _>>()?;
    let spacing: Vec<f64> = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<_, _>>()?;
    let origin: Vec<f64> = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<_, _>>()?;
    let grid = HalfGrid::new(dim, &nodes)?;
    if grid.spacing() != spacing.as_slice() || grid.lattice().origin() != origin.as_slice() {
        return Err(GeometryError::Format(format!(
            "spacing {spacing:?} / origin {origin:?} do not describe the half-box"
        )));
    }
    let mut values = Vec::with_capacity(grid.node_count());
    for _ in 0..grid.node_count() {
        values.push(read_f64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(GeometryError::Format("trailing bytes after node values".into()));
    }
    ScalarField::new(Arc::new(grid), values)
}

pub fn write_field_file(path: impl AsRef<Path>, field: &ScalarField) -> Result<(), GeometryError> {
    write_field(BufWriter::new(File::create(path)?), field)
}

pub fn read_field_file(path: impl AsRef<Path>) -> Result<ScalarField, GeometryError> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_exact() {
        let grid = Arc::new(HalfGrid::new(2, &[5, 3]).unwrap());
        let field = ScalarField::from_fn(grid, |x| x[0] + 10.0 * x[1]);
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 4 + 2 * 8 + 2 * 8 + 15 * 8);
        assert_eq!(&buf[..4], b"THOB");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..16], &5u32.to_le_bytes());
        assert_eq!(&buf[16..20], &3u32.to_le_bytes());
        assert_eq!(&buf[20..28], &0.5f64.to_le_bytes());
        assert_eq!(&buf[36..44], &(-1.0f64).to_le_bytes());
        assert_eq!(&buf[44..52], &0.0f64.to_le_bytes());
        // node 1 is (x1, x2) = (-1, 0.5): last axis fastest
        assert_eq!(&buf[60..68], &4.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_corruption() {
        let grid = Arc::new(HalfGrid::new(2, &[5, 3]).unwrap());
        let mut buf = Vec::new();
        write_field(&mut buf, &ScalarField::zeros(grid)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad.push(0);
        assert!(read_field(bad.as_slice()).is_err());
        assert!(read_field(&buf[..buf.len() - 1]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(values in proptest::collection::vec(-1e6f64..1e6, 9 * 5 * 3), three_d in any::<bool>()) {
            let grid = if three_d {
                HalfGrid::new(3, &[9, 5, 3]).unwrap()
            } else {
                HalfGrid::new(2, &[27, 5]).unwrap()
            };
            let n = grid.node_count();
            let field = ScalarField::new(Arc::new(grid), values[..n].to_vec()).unwrap();
            let mut buf = Vec::new();
            write_field(&mut buf, &field).unwrap();
            let back = read_field(buf.as_slice()).unwrap();
            prop_assert_eq!(back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            field.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back.grid().as_ref(), field.grid().as_ref());
        }
    }
}
