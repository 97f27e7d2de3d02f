//! SPL1 binary format for fitted curve sets.
//!
//! Layout (little-endian): magic `SPL1`, u32 version = 1, u32 num_curves,
//! u32 order k, u32 dim, then per curve u32 n, `f64 knots[n+k]`,
//! `f64 control_points[n*dim]`.
//!
//! The format carries no time axis; callers supply the dataset time range
//! when reassembling a [`SplineSet`] (the CLI keeps it in a sidecar file).

use crate::bspline::{ParamKind, SplineCurve, SplineSet};
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub const SPL1_MAGIC: &[u8; 4] = b"SPL1";

/// Knots and control points of one curve as stored on disk, before any
/// clamping validation.
#[derive(Debug, Clone)]
pub struct RawCurve {
    pub knots: Vec<f64>,
    pub control_points: Vec<f64>,
}

/// Parsed SPL1 contents.
#[derive(Debug, Clone)]
pub struct Spl1File {
    pub order: usize,
    pub dim: usize,
    pub curves: Vec<RawCurve>,
}

impl Spl1File {
    /// Validate every curve as a clamped spline and assemble a set over the
    /// given physical time axis.
    pub fn into_spline_set(self, times: Vec<f64>) -> Result<SplineSet> {
        let kind = ParamKind::from_dim(self.dim)?;
        let curves = self
            .curves
            .into_iter()
            .map(|raw| SplineCurve::new(self.order, self.dim, raw.knots, raw.control_points, kind))
            .collect::<Result<Vec<_>>>()?;
        SplineSet::new(curves, times)
    }
}

/// Write raw curve data; `curves` yields (knots, flat control points).
pub fn write_spl1<'a, I>(path: &Path, order: usize, dim: usize, curves: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let curves: Vec<_> = curves.into_iter().collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(SPL1_MAGIC).map_err(io_err)?;
    w.write_all(&1u32.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(curves.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(order as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(dim as u32).to_le_bytes()).map_err(io_err)?;
    for (knots, ctrl) in curves {
        debug_assert_eq!(knots.len(), ctrl.len() / dim + order);
        let n = ctrl.len() / dim;
        w.write_all(&(n as u32).to_le_bytes()).map_err(io_err)?;
        for t in knots {
            w.write_all(&t.to_le_bytes()).map_err(io_err)?;
        }
        for v in ctrl {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Write a fitted set.
pub fn write_spline_set(set: &SplineSet, path: &Path) -> Result<()> {
    write_spl1(
        path,
        set.order(),
        set.dim(),
        set.curves()
            .iter()
            .map(|c| (c.knots(), c.control_points_flat())),
    )
}

pub fn read_spl1(path: &Path) -> Result<Spl1File> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    parse_spl1(path, &bytes)
}

fn parse_spl1(path: &Path, bytes: &[u8]) -> Result<Spl1File> {
    let mut cursor = Cursor::new(path, bytes);
    let magic = cursor.take(4)?;
    if magic != SPL1_MAGIC {
        return Err(Error::format(path, "bad magic, not an SPL1 file"));
    }
    let version = cursor.u32()?;
    if version != 1 {
        return Err(Error::format(
            path,
            format!("unsupported version {version}"),
        ));
    }
    let num_curves = cursor.u32()? as usize;
    let order = cursor.u32()? as usize;
    let dim = cursor.u32()? as usize;
    if order < 2 {
        return Err(Error::format(path, format!("order {order} < 2")));
    }
    if dim != 3 && dim != 4 {
        return Err(Error::format(path, format!("dimension {dim} not 3 or 4")));
    }
    let mut curves = Vec::with_capacity(num_curves);
    for _ in 0..num_curves {
        let n = cursor.u32()? as usize;
        let mut knots = Vec::with_capacity(n + order);
        for _ in 0..n + order {
            knots.push(cursor.f64()?);
        }
        let mut control_points = Vec::with_capacity(n * dim);
        for _ in 0..n * dim {
            control_points.push(cursor.f64()?);
        }
        curves.push(RawCurve {
            knots,
            control_points,
        });
    }
    if !cursor.at_end() {
        return Err(Error::format(path, "trailing bytes after curve data"));
    }
    Ok(Spl1File { order, dim, curves })
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Cursor { path, bytes, at: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.at + len > self.bytes.len() {
            return Err(Error::format(self.path, "unexpected end of file"));
        }
        let out = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn at_end(&self) -> bool {
        self.at == self.bytes.len()
    }
}
