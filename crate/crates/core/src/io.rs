//! Serialization helpers shared by the library types and the CLI.

use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square complex matrix as a flat row-major array of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<[f64; 2]>);

impl MatrixRepr {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                out.push([z.re, z.im]);
            }
        }
        Self(out)
    }

    pub fn into_matrix(self) -> Result<DMatrix<Complex64>> {
        let len = self.0.len();
        let n = (len as f64).sqrt().round() as usize;
        if n == 0 || n * n != len {
            return Err(Error::InvalidInput(format!("{len} entries do not form a square matrix")));
        }
        Ok(DMatrix::from_row_iterator(n, n, self.0.into_iter().map(|[re, im]| Complex64::new(re, im))))
    }
}

/// `serde_json` formatter printing every float with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Formats a float with 17 significant digits, as in JSON output.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON text of `value` with 17-significant-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser).map_err(|e| Error::InvalidInput(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.5),
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 3.0),
        ]);
        let r = MatrixRepr::from_matrix(&m);
        assert_eq!(r.0[1], [2.0, 0.0]);
        assert_eq!(r.into_matrix().unwrap(), m);
        assert!(MatrixRepr(vec![[0.0, 0.0]; 3]).into_matrix().is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json_string(&serde_json::json!({"x": 0.1, "n": 3})).unwrap();
        assert_eq!(s, "{\"n\":3,\"x\":1.0000000000000001e-1}\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
    }
}
