//! File ingestion and deterministic export.
//!
//! CSV matrices come in; JSON trees, plain-text trees, DOT graphs, CSV
//! tables, and SVG figures go out. Every exporter is a pure function of its
//! inputs: fixed key order, fixed element order, reals rounded to 6
//! significant digits in JSON and 4 decimals in SVG coordinates, so
//! identical inputs produce byte-identical files. File writes go through
//! [`write_atomic`] (write a sibling temp file, then rename) so readers
//! never observe a half-written artifact.

pub mod dataset;
pub mod svg;
pub mod text;
pub mod tree_json;

use std::fs;
use std::path::Path;

use crate::Result;

/// Round to 6 significant digits through a correctly rounded decimal
/// representation. Idempotent; maps negative zero to zero.
pub fn sig6(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    format!("{v:.5e}")
        .parse()
        .expect("formatted float always parses")
}

/// Write via a sibling temp file and rename, so the destination is always
/// either absent, the old content, or the complete new content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_rounds_to_six_significant_digits() {
        assert_eq!(sig6(29.640001), 29.64);
        assert_eq!(sig6(1234567.0), 1234570.0);
        assert_eq!(sig6(0.000123456789), 0.000123457);
        assert_eq!(sig6(-1.0 / 3.0), -0.333333);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(-0.0).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn sig6_is_idempotent() {
        for v in [std::f64::consts::PI, 29.64, -0.001234567, 9.999995e5] {
            assert_eq!(sig6(sig6(v)), sig6(v));
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        assert!(!path.with_extension("txt.tmp").exists());
    }
}
