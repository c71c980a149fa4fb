//! MCAF v1 field container.
//!
//! Little-endian layout: magic `4D 43 41 46 31 00`, u8 dimension, u8 flags
//! (bit0 axisymmetric, bit1 arrival), u64 counts per axis, f64 origin per
//! axis, f64 spacing, then the row-major f64 values (last axis fastest).
//! Arrival fields store masked-out nodes as IEEE NaN.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::arrival::ArrivalField;
use crate::error::{Error, Result};
use crate::field::{FieldLabel, GridSpec, ScalarField};

pub const MAGIC: [u8; 6] = [0x4D, 0x43, 0x41, 0x46, 0x31, 0x00];

const FLAG_AXISYMMETRIC: u8 = 0b01;
const FLAG_ARRIVAL: u8 = 0b10;

pub enum McafContent {
    LevelSet(ScalarField),
    Arrival(ArrivalField),
}

fn encode(spec: &GridSpec, values: &[f64], arrival: bool, partial: bool) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * (2 * spec.dim + 1 + values.len()));
    buf.extend_from_slice(&MAGIC);
    buf.push(spec.dim as u8);
    let mut flags = 0u8;
    if spec.axisymmetric {
        flags |= FLAG_AXISYMMETRIC;
    }
    if arrival {
        flags |= FLAG_ARRIVAL;
    }
    // bit2 marks a partial sweep; readers that only know v1 ignore it
    if partial {
        flags |= 0b100;
    }
    buf.push(flags);
    for a in 0..spec.dim {
        buf.extend_from_slice(&(spec.counts[a] as u64).to_le_bytes());
    }
    for a in 0..spec.dim {
        buf.extend_from_slice(&spec.origin[a].to_le_bytes());
    }
    buf.extend_from_slice(&spec.spacing.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn encode_levelset(field: &ScalarField) -> Vec<u8> {
    encode(
        &field.spec,
        &field.values,
        field.label == FieldLabel::Arrival,
        false,
    )
}

pub fn encode_arrival(field: &ArrivalField) -> Vec<u8> {
    encode(&field.spec, &field.values, true, field.partial)
}

pub fn write_levelset(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_levelset(field))?;
    Ok(())
}

pub fn write_arrival(path: &Path, field: &ArrivalField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_arrival(field))?;
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<McafContent> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > bytes.len() {
            return Err(Error::Format("truncated MCAF data".into()));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    let magic = take(&mut pos, 6)?;
    if magic != MAGIC {
        return Err(Error::Format("bad magic: not an MCAF v1 file".into()));
    }
    let dim = take(&mut pos, 1)?[0] as usize;
    if !(2..=3).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let flags = take(&mut pos, 1)?[0];
    let axisymmetric = flags & FLAG_AXISYMMETRIC != 0;
    let arrival = flags & FLAG_ARRIVAL != 0;
    let partial = flags & 0b100 != 0;

    let mut counts = vec![0usize; dim];
    for c in counts.iter_mut() {
        let raw = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        *c = usize::try_from(raw).map_err(|_| Error::Format("count overflow".into()))?;
    }
    let mut origin = vec![0f64; dim];
    for o in origin.iter_mut() {
        *o = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    }
    let spacing = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let spec = GridSpec::new(dim, &counts, &origin, spacing, axisymmetric)
        .map_err(|e| Error::Format(format!("bad grid header: {e}")))?;

    let n = spec.n_nodes();
    if bytes.len() - pos != 8 * n {
        return Err(Error::Format(format!(
            "value payload is {} bytes, expected {}",
            bytes.len() - pos,
            8 * n
        )));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    if arrival {
        Ok(McafContent::Arrival(ArrivalField::new(
            spec, values, partial,
        )?))
    } else {
        let f = ScalarField::new(spec, values, FieldLabel::LevelSet)
            .map_err(|e| Error::Format(format!("bad level-set payload: {e}")))?;
        Ok(McafContent::LevelSet(f))
    }
}

pub fn read(path: &Path) -> Result<McafContent> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Read a file that must contain an arrival field.
pub fn read_arrival(path: &Path) -> Result<ArrivalField> {
    match read(path)? {
        McafContent::Arrival(u) => Ok(u),
        McafContent::LevelSet(_) => Err(Error::Format(
            "file holds a level-set field, not an arrival field".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_golden() {
        let spec = GridSpec::new(2, &[8, 9], &[-1.0, 0.5], 0.25, false).unwrap();
        let f = ScalarField::from_fn(spec, FieldLabel::LevelSet, |p| p[0] + p[1]);
        let bytes = encode_levelset(&f);
        assert_eq!(&bytes[..6], &MAGIC);
        assert_eq!(bytes[6], 2); // dimension
        assert_eq!(bytes[7], 0); // flags
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 8);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 9);
        assert_eq!(
            f64::from_le_bytes(bytes[24..32].try_into().unwrap()),
            -1.0
        );
        assert_eq!(bytes.len(), 6 + 2 + 16 + 16 + 8 + 72 * 8);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = vec![0u8; 64];
        bytes[..6].copy_from_slice(b"NOTMC\0");
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn arrival_flag_roundtrip() {
        let spec = GridSpec::new(2, &[8, 8], &[0.0, 0.0], 0.1, true).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| (p[0] < 0.4).then_some(p[0] + p[1]));
        let bytes = encode_arrival(&u);
        assert_eq!(bytes[7] & FLAG_ARRIVAL, FLAG_ARRIVAL);
        match decode(&bytes).unwrap() {
            McafContent::Arrival(back) => {
                assert_eq!(back.mask, u.mask);
                assert!(!back.partial);
            }
            _ => panic!("expected arrival content"),
        }
    }

    proptest! {
        #[test]
        fn roundtrip_preserves_bits(
            n0 in 8usize..12,
            n1 in 8usize..12,
            seed in 0u64..1000,
        ) {
            let spec = GridSpec::new(2, &[n0, n1], &[-0.5, -0.5], 0.125, false).unwrap();
            // cheap deterministic value pattern
            let f = ScalarField::from_fn(spec, FieldLabel::LevelSet, |p| {
                ((seed as f64) * 0.001 + p[0] * 1.7 + p[1] * 0.3).sin()
            });
            let bytes = encode_levelset(&f);
            match decode(&bytes).unwrap() {
                McafContent::LevelSet(back) => {
                    prop_assert_eq!(back.spec, f.spec);
                    prop_assert_eq!(back.values, f.values);
                }
                _ => prop_assert!(false, "wrong content kind"),
            }
        }
    }
}
