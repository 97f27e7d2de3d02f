//! Pathline file formats.
//!
//! CSV: header `pathline_id,step,x,y,z`, rows sorted by (pathline_id, step),
//! coordinates printed with 17 significant digits so values round-trip.
//!
//! PLN1 binary layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "PLN1"
//! 4       4     u32 version = 1
//! 8       4     u32 num_pathlines
//! 12      4     u32 num_timesteps
//! 16      8     u64 reserved = 0
//! 24      8     u64 payload offset = 32
//! 32      ...   f64 x,y,z triples, pathline-major
//! ```
//!
//! Neither format carries the physical time axis; datasets read from files
//! use the identity time map (step j at time j).

use crate::flowdata::PathlineSet;
use crate::{Error, Result, Vec3};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const PLN1_MAGIC: &[u8; 4] = b"PLN1";
pub const PLN1_HEADER_LEN: u64 = 32;
const CSV_HEADER: &str = "pathline_id,step,x,y,z";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Binary,
}

impl FileFormat {
    /// Guess from the file extension; `.csv` is CSV, everything else binary.
    pub fn from_path(path: &Path) -> FileFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FileFormat::Csv,
            _ => FileFormat::Binary,
        }
    }
}

pub fn write_pathlines(set: &PathlineSet, path: &Path, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Csv => write_csv(set, path),
        FileFormat::Binary => write_binary(set, path),
    }
}

pub fn read_pathlines(path: &Path, format: FileFormat) -> Result<PathlineSet> {
    match format {
        FileFormat::Csv => read_csv(path),
        FileFormat::Binary => read_binary(path),
    }
}

fn write_csv(set: &PathlineSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{CSV_HEADER}").map_err(io_err)?;
    for i in 0..set.num_pathlines() {
        for j in 0..set.num_timesteps() {
            let p = set.position(i, j);
            // {:.16e} prints 17 significant digits, enough to round-trip f64.
            writeln!(w, "{i},{j},{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

fn read_csv(path: &Path) -> Result<PathlineSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => return Err(Error::io(path, e)),
        None => return Err(Error::format(path, "empty file")),
    };
    if header.trim() != CSV_HEADER {
        return Err(Error::format(
            path,
            format!("bad header '{}', expected '{CSV_HEADER}'", header.trim()),
        ));
    }

    // Rows arrive sorted by (pathline_id, step); steps restart at 0 for
    // each new pathline.
    let mut positions: Vec<Vec3> = Vec::new();
    let mut steps_per_pathline: Vec<usize> = Vec::new();
    let mut current_id: Option<usize> = None;
    let mut current_steps = 0usize;

    for (line_no, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next_field = |name: &str| {
            fields
                .next()
                .ok_or_else(|| Error::format(path, format!("line {}: missing {name}", line_no + 1)))
        };
        let id: usize = parse_field(path, line_no, next_field("pathline_id")?, "pathline_id")?;
        let step: usize = parse_field(path, line_no, next_field("step")?, "step")?;
        let x: f64 = parse_field(path, line_no, next_field("x")?, "x")?;
        let y: f64 = parse_field(path, line_no, next_field("y")?, "y")?;
        let z: f64 = parse_field(path, line_no, next_field("z")?, "z")?;

        match current_id {
            None => {
                if id != 0 {
                    return Err(Error::format(
                        path,
                        format!(
                            "line {}: first pathline id must be 0, got {id}",
                            line_no + 1
                        ),
                    ));
                }
                current_id = Some(0);
            }
            Some(cur) if id == cur => {}
            Some(cur) if id == cur + 1 => {
                steps_per_pathline.push(current_steps);
                current_steps = 0;
                current_id = Some(id);
            }
            Some(cur) => {
                return Err(Error::format(
                    path,
                    format!(
                        "line {}: pathline ids must be consecutive, got {id} after {cur}",
                        line_no + 1
                    ),
                ));
            }
        }
        if step != current_steps {
            return Err(Error::format(
                path,
                format!(
                    "line {}: expected step {current_steps} of pathline {id}, got {step}",
                    line_no + 1
                ),
            ));
        }
        let p = Vec3::new(x, y, z);
        if !p.is_finite() {
            return Err(Error::NonFinitePosition { pathline: id, step });
        }
        positions.push(p);
        current_steps += 1;
    }
    if current_id.is_none() {
        return Err(Error::format(path, "no data rows"));
    }
    steps_per_pathline.push(current_steps);

    let expected = steps_per_pathline[0];
    for (i, &found) in steps_per_pathline.iter().enumerate() {
        if found != expected {
            return Err(Error::RaggedPathline {
                pathline: i,
                expected,
                found,
            });
        }
    }
    let num_pathlines = steps_per_pathline.len();
    PathlineSet::new(
        positions,
        num_pathlines,
        expected,
        PathlineSet::identity_times(expected),
    )
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line_no: usize,
    field: &str,
    name: &str,
) -> Result<T> {
    field.trim().parse().map_err(|_| {
        Error::format(
            path,
            format!("line {}: cannot parse {name} from '{field}'", line_no + 1),
        )
    })
}

fn write_binary(set: &PathlineSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(PLN1_MAGIC).map_err(io_err)?;
    w.write_all(&1u32.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(set.num_pathlines() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(set.num_timesteps() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&0u64.to_le_bytes()).map_err(io_err)?;
    w.write_all(&PLN1_HEADER_LEN.to_le_bytes())
        .map_err(io_err)?;
    for p in set.positions_flat() {
        w.write_all(&p.x.to_le_bytes()).map_err(io_err)?;
        w.write_all(&p.y.to_le_bytes()).map_err(io_err)?;
        w.write_all(&p.z.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Header fields of a PLN1 file, used by readers and by `info`.
#[derive(Debug, Clone, Copy)]
pub struct Pln1Header {
    pub num_pathlines: usize,
    pub num_timesteps: usize,
    pub payload_offset: u64,
}

pub fn read_pln1_header(path: &Path, bytes: &[u8]) -> Result<Pln1Header> {
    if bytes.len() < PLN1_HEADER_LEN as usize {
        return Err(Error::format(path, "file shorter than the PLN1 header"));
    }
    if &bytes[0..4] != PLN1_MAGIC {
        return Err(Error::format(path, "bad magic, not a PLN1 file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != 1 {
        return Err(Error::format(
            path,
            format!("unsupported version {version}"),
        ));
    }
    let num_pathlines = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let num_timesteps = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let payload_offset = u64::from_le_bytes(bytes[24..32].try_into().unwrap());
    Ok(Pln1Header {
        num_pathlines,
        num_timesteps,
        payload_offset,
    })
}

fn read_binary(path: &Path) -> Result<PathlineSet> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let header = read_pln1_header(path, &bytes)?;

    let count = header.num_pathlines * header.num_timesteps;
    let need = header.payload_offset as usize + count * 24;
    if bytes.len() != need {
        return Err(Error::format(
            path,
            format!("expected {need} bytes, found {}", bytes.len()),
        ));
    }
    let mut positions = Vec::with_capacity(count);
    let payload = &bytes[header.payload_offset as usize..];
    for i in 0..count {
        let at = i * 24;
        let read = |o: usize| f64::from_le_bytes(payload[at + o..at + o + 8].try_into().unwrap());
        positions.push(Vec3::new(read(0), read(8), read(16)));
    }
    PathlineSet::new(
        positions,
        header.num_pathlines,
        header.num_timesteps,
        PathlineSet::identity_times(header.num_timesteps),
    )
}
