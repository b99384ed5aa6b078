//! Matrix Market files and on-disk system bundles.
//!
//! A bundle is a directory with `M.mtx`, `E.mtx`, `K.mtx` (coordinate
//! format), `B.mtx`, `Cp.mtx`, `Cv.mtx` (array format) and `system.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::system::SecondOrderSystem;

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxLayout {
    /// Nonzeros only.
    Coordinate,
    /// Every entry, column by column.
    Array,
}

pub fn write_mtx_string(a: &Mat, layout: MtxLayout) -> String {
    let (rows, cols) = a.shape();
    let mut out = String::new();
    match layout {
        MtxLayout::Coordinate => {
            let nnz = a.iter().filter(|x| **x != 0.0).count();
            out.push_str("%%MatrixMarket matrix coordinate real general\n");
            let _ = writeln!(out, "{rows} {cols} {nnz}");
            for j in 0..cols {
                for i in 0..rows {
                    let x = a[(i, j)];
                    if x != 0.0 {
                        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, format_f64(x));
                    }
                }
            }
        }
        MtxLayout::Array => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{rows} {cols}");
            for x in a.iter() {
                let _ = writeln!(out, "{}", format_f64(*x));
            }
        }
    }
    out
}

pub fn write_mtx(path: &Path, a: &Mat, layout: MtxLayout) -> Result<()> {
    fs::write(path, write_mtx_string(a, layout)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn mm_err(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.ok_or_else(|| mm_err(format!("missing {what}")))?
        .parse()
        .map_err(|_| mm_err(format!("bad {what}")))
}

fn parse_f64(tok: Option<&str>) -> Result<f64> {
    let t = tok.ok_or_else(|| mm_err("missing value"))?;
    t.parse().map_err(|_| mm_err(format!("bad value '{t}'")))
}

/// Reads real or integer matrices in coordinate or array format with
/// general, symmetric or skew-symmetric storage.
pub fn read_mtx_str(text: &str) -> Result<Mat> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| mm_err("empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(mm_err(format!("bad header '{header}'")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(mm_err(format!("unsupported format '{f}'"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(mm_err(format!("unsupported field '{}'", fields[3])));
    }
    let sign = match fields[4].as_str() {
        "general" => 0.0,
        "symmetric" => 1.0,
        "skew-symmetric" => -1.0,
        s => return Err(mm_err(format!("unsupported symmetry '{s}'"))),
    };
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or_else(|| mm_err("missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows = parse_usize(tok.next(), "row count")?;
    let cols = parse_usize(tok.next(), "column count")?;
    let mut a = Mat::zeros(rows, cols);
    if sign != 0.0 && rows != cols {
        return Err(mm_err("symmetric storage needs a square matrix"));
    }
    if coordinate {
        let nnz = parse_usize(tok.next(), "entry count")?;
        for k in 0..nnz {
            let line = body.next().ok_or_else(|| mm_err(format!("expected {nnz} entries, found {k}")))?;
            let mut t = line.split_whitespace();
            let i = parse_usize(t.next(), "row index")?;
            let j = parse_usize(t.next(), "column index")?;
            let x = parse_f64(t.next())?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(mm_err(format!("entry ({i}, {j}) outside {rows} x {cols}")));
            }
            a[(i - 1, j - 1)] += x;
            if sign != 0.0 && i != j {
                a[(j - 1, i - 1)] += sign * x;
            }
        }
    } else {
        let mut values = body.flat_map(str::split_whitespace);
        for j in 0..cols {
            // symmetric arrays list the lower triangle only
            let start = if sign == 0.0 {
                0
            } else if sign > 0.0 {
                j
            } else {
                j + 1
            };
            for i in start..rows {
                let x = parse_f64(values.next())?;
                a[(i, j)] = x;
                if sign != 0.0 && i != j {
                    a[(j, i)] = sign * x;
                }
            }
        }
    }
    Ok(a)
}

pub fn read_mtx(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_mtx_str(&text).map_err(|e| match e {
        Error::MatrixMarket(m) => Error::MatrixMarket(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Contents of `system.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleInfo {
    pub name: String,
    pub order: usize,
    pub inputs: usize,
    pub outputs: usize,
    /// Free-form description of how the system was produced.
    #[serde(default)]
    pub metadata: serde_json::Value,
}

const FILES: [(&str, MtxLayout); 6] = [
    ("M.mtx", MtxLayout::Coordinate),
    ("E.mtx", MtxLayout::Coordinate),
    ("K.mtx", MtxLayout::Coordinate),
    ("B.mtx", MtxLayout::Array),
    ("Cp.mtx", MtxLayout::Array),
    ("Cv.mtx", MtxLayout::Array),
];

pub fn write_bundle(dir: &Path, sys: &SecondOrderSystem, name: &str, metadata: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mats = [&sys.m, &sys.e, &sys.k, &sys.bu, &sys.cp, &sys.cv];
    for ((file, layout), a) in FILES.iter().zip(mats) {
        write_mtx(&dir.join(file), a, *layout)?;
    }
    let info = BundleInfo {
        name: name.to_string(),
        order: sys.order(),
        inputs: sys.inputs(),
        outputs: sys.outputs(),
        metadata,
    };
    let json = serde_json::to_string_pretty(&info).expect("bundle info serializes");
    fs::write(dir.join("system.json"), json + "\n").map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

pub fn read_bundle(dir: &Path) -> Result<(SecondOrderSystem, BundleInfo)> {
    let info_path = dir.join("system.json");
    let text = fs::read_to_string(&info_path).map_err(|e| Error::Io(format!("{}: {e}", info_path.display())))?;
    let info: BundleInfo =
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", info_path.display())))?;
    let mut mats = Vec::with_capacity(FILES.len());
    for (file, _) in FILES {
        mats.push(read_mtx(&dir.join(file))?);
    }
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("six matrices");
    let sys = SecondOrderSystem::new(next(), next(), next(), next(), next(), next())?;
    if (sys.order(), sys.inputs(), sys.outputs()) != (info.order, info.inputs, info.outputs) {
        return Err(Error::DimensionMismatch(format!(
            "{} declares order {}, {} inputs, {} outputs; matrices give {}, {}, {}",
            info_path.display(),
            info.order,
            info.inputs,
            info.outputs,
            sys.order(),
            sys.inputs(),
            sys.outputs()
        )));
    }
    Ok((sys, info))
}
