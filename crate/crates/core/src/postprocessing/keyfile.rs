//! Raw bit files: bits packed little-endian within each byte (bit `i` is
//! bit `i % 8` of byte `i / 8`), with the bit count stored as a single
//! decimal line in a `<file>.len` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".len");
    PathBuf::from(name)
}

pub fn write_key(path: &Path, bits: &[bool]) -> Result<()> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), format!("{}\n", bits.len()))?;
    Ok(())
}

pub fn read_key(path: &Path) -> Result<Vec<bool>> {
    let len_text = fs::read_to_string(sidecar_path(path))?;
    let len: usize = len_text
        .trim()
        .parse()
        .map_err(|_| Error::invalid("key.len", format!("bad length line {:?}", len_text.trim())))?;
    let bytes = fs::read(path)?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::LengthMismatch {
            left: bytes.len(),
            right: len.div_ceil(8),
        });
    }
    Ok((0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.bin");
        // bits 0 and 9 set
        let mut bits = vec![false; 12];
        bits[0] = true;
        bits[9] = true;
        write_key(&path, &bits).unwrap();
        assert_eq!(fs::read(&path).unwrap(), vec![0x01, 0x02]);
        assert_eq!(fs::read_to_string(sidecar_path(&path)).unwrap(), "12\n");
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.bin");
        write_key(&path, &[true; 20]).unwrap();
        fs::write(&path, [0xffu8]).unwrap();
        assert!(read_key(&path).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("key.bin");
            write_key(&path, &bits).unwrap();
            prop_assert_eq!(read_key(&path).unwrap(), bits);
        }
    }
}
