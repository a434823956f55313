//! IDX binary files (the MNIST distribution format).
//!
//! Layout: a big-endian u32 magic (0x00000803 for 3-D unsigned-byte images,
//! 0x00000801 for 1-D unsigned-byte labels), one big-endian u32 per
//! dimension, then the raw bytes. Gzip-compressed files are detected by their
//! header and decompressed transparently.

use std::fs;
use std::io::{self, Read};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::nn::Tensor2;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let head = self.take(4)?;
        Ok(u32::from_be_bytes(head.try_into().expect("four bytes")))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Io(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("IDX data truncated: needed {n} bytes, {} left", self.bytes.len()),
            )));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }
}

fn expect_magic(found: u32, want: u32) -> Result<()> {
    if found == want {
        Ok(())
    } else {
        Err(Error::format(format!(
            "IDX magic 0x{found:08x}, expected 0x{want:08x}"
        )))
    }
}

/// Parses image bytes into one flattened row per image, scaled to [0, 1].
pub fn parse_idx_images(bytes: &[u8]) -> Result<Tensor2> {
    let mut r = Reader { bytes };
    expect_magic(r.u32()?, IMAGES_MAGIC)?;
    let count = r.u32()? as usize;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let width = rows * cols;
    let pixels = r.take(count * width)?;
    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    Tensor2::new(count, width, data)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let mut r = Reader { bytes };
    expect_magic(r.u32()?, LABELS_MAGIC)?;
    let count = r.u32()? as usize;
    Ok(r.take(count)?.iter().map(|&b| usize::from(b)).collect())
}

pub fn load_idx_images(path: &Path) -> Result<Tensor2> {
    parse_idx_images(&read_file(path)?)
}

pub fn load_idx_labels(path: &Path) -> Result<Vec<usize>> {
    parse_idx_labels(&read_file(path)?)
}

/// Encodes a [0, 1] tensor as an IDX image file of `rows x cols` images,
/// rounding each value to the nearest byte.
pub fn encode_idx_images(images: &Tensor2, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if rows * cols != images.cols() {
        return Err(Error::shape(format!(
            "{rows}x{cols} images do not match rows of width {}",
            images.cols()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.as_slice().len());
    for v in [IMAGES_MAGIC, images.rows() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend(
        images
            .as_slice()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    Ok(out)
}

pub fn encode_idx_labels(labels: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    for &l in labels {
        let b = u8::try_from(l).map_err(|_| Error::format(format!("label {l} exceeds a byte")))?;
        out.push(b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;

    use super::*;

    fn fixture_images() -> Vec<u8> {
        let mut b = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
        b.extend_from_slice(&[0, 255, 51, 102]);
        b.extend_from_slice(&[255, 0, 0, 204]);
        b
    }

    #[test]
    fn parses_hand_built_images() {
        let t = parse_idx_images(&fixture_images()).unwrap();
        assert_eq!(t.shape(), (2, 4));
        assert_eq!(t.row(0), &[0.0, 1.0, 0.2, 0.4]);
        assert_eq!(t.row(1), &[1.0, 0.0, 0.0, 0.8]);
    }

    #[test]
    fn parses_hand_built_labels() {
        let bytes = [0, 0, 8, 1, 0, 0, 0, 3, 3, 1, 4];
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![3, 1, 4]);
        assert!(parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 0]).unwrap().is_empty());
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let labels = [0, 0, 8, 1, 0, 0, 0, 1, 7];
        assert!(matches!(parse_idx_images(&labels), Err(Error::Format(_))));
        assert!(matches!(
            parse_idx_labels(&fixture_images()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn truncation_is_io_error() {
        let bytes = fixture_images();
        let err = parse_idx_images(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(err.is_io());
        assert!(parse_idx_labels(&[0, 0, 8]).unwrap_err().is_io());
    }

    #[test]
    fn gzip_files_are_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imgs.gz");
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&fixture_images()).unwrap();
        fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(
            load_idx_images(&path).unwrap(),
            parse_idx_images(&fixture_images()).unwrap()
        );
        assert!(load_idx_images(&dir.path().join("missing")).unwrap_err().is_io());
    }

    proptest! {
        #[test]
        fn encode_parse_round_trip(
            n in 0usize..6,
            rows in 1usize..5,
            cols in 1usize..5,
            seed in any::<u64>(),
        ) {
            let bytes: Vec<u8> = (0..n * rows * cols)
                .map(|i| (seed.wrapping_mul(i as u64 + 1) >> 13) as u8)
                .collect();
            let t = Tensor2::new(n, rows * cols, bytes.iter().map(|&b| f64::from(b) / 255.0).collect()).unwrap();
            let parsed = parse_idx_images(&encode_idx_images(&t, rows, cols).unwrap()).unwrap();
            prop_assert_eq!(parsed, t);

            let labels: Vec<usize> = bytes.iter().map(|&b| usize::from(b)).collect();
            prop_assert_eq!(parse_idx_labels(&encode_idx_labels(&labels).unwrap()).unwrap(), labels);
        }
    }
}
