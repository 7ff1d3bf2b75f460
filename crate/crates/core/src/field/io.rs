//! File formats.
//!
//! Binary field files start with a short text header, one `key value` pair
//! per line, followed by the row-major little-endian payload:
//!
//! ```text
//! BELTRAMI-FIELD v1
//! dimension 2
//! L 2.0
//! N 256
//! kind complex64
//! byteorder little-endian
//! mask present
//! end
//! ```
//!
//! `complex64` stores two `f64` per sample (re, im), `real64` one and
//! `matrix2x2` four (a11, a12, a21, a22). With `mask present` the payload is
//! followed by one byte (0 or 1) per sample. Floats in the header use Rust's
//! shortest round-trip formatting, so files round-trip bit for bit.
//!
//! The CSV form carries the same header on a single `#` comment line,
//! followed by `i,j,<values>[,mask]` rows.
//!
//! Domain files list boundary polylines:
//!
//! ```text
//! BELTRAMI-DOMAIN v1
//! L 2.0
//! N 256
//! component 3
//! 0.0 0.0
//! 1.0 0.0
//! 0.0 1.0
//! end
//! ```
//!
//! Boundary data CSV has columns `component,x,y,value`; probe CSV has `x,y`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{BoundaryData, ComplexField, DomainSpec, Field, Grid, MatrixField, MuField, Polyline, RealField};
use crate::conductivity::Mat2;
use crate::{Error, Result};

pub const FIELD_FORMAT: &str = "BELTRAMI-FIELD v1";
pub const DOMAIN_FORMAT: &str = "BELTRAMI-DOMAIN v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Complex64,
    Real64,
    Matrix2x2,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Complex64 => "complex64",
            ValueKind::Real64 => "real64",
            ValueKind::Matrix2x2 => "matrix2x2",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "complex64" => Some(ValueKind::Complex64),
            "real64" => Some(ValueKind::Real64),
            "matrix2x2" => Some(ValueKind::Matrix2x2),
            _ => None,
        }
    }

    fn width(self) -> usize {
        match self {
            ValueKind::Complex64 => 2,
            ValueKind::Real64 => 1,
            ValueKind::Matrix2x2 => 4,
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            ValueKind::Complex64 => &["re", "im"],
            ValueKind::Real64 => &["value"],
            ValueKind::Matrix2x2 => &["a11", "a12", "a21", "a22"],
        }
    }
}

/// Field payload of any supported kind.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Complex(ComplexField),
    Real(RealField),
    Matrix(MatrixField),
}

impl FieldData {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldData::Complex(f) => f.grid(),
            FieldData::Real(f) => f.grid(),
            FieldData::Matrix(f) => f.grid(),
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            FieldData::Complex(_) => ValueKind::Complex64,
            FieldData::Real(_) => ValueKind::Real64,
            FieldData::Matrix(_) => ValueKind::Matrix2x2,
        }
    }

    fn flat(&self) -> Vec<f64> {
        match self {
            FieldData::Complex(f) => f.values().iter().flat_map(|v| [v.re, v.im]).collect(),
            FieldData::Real(f) => f.values().to_vec(),
            FieldData::Matrix(f) => f.values().iter().flat_map(|m| m.to_array()).collect(),
        }
    }

    fn from_flat(grid: Grid, kind: ValueKind, flat: &[f64]) -> Result<Self> {
        Ok(match kind {
            ValueKind::Complex64 => FieldData::Complex(Field::from_values(
                grid,
                flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
            )?),
            ValueKind::Real64 => FieldData::Real(Field::from_values(grid, flat.to_vec())?),
            ValueKind::Matrix2x2 => FieldData::Matrix(Field::from_values(
                grid,
                flat.chunks_exact(4)
                    .map(|c| Mat2::new(c[0], c[1], c[2], c[3]))
                    .collect(),
            )?),
        })
    }
}

/// Contents of a field file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub data: FieldData,
    pub mask: Option<Vec<bool>>,
}

impl FieldFile {
    pub fn new(data: FieldData) -> Self {
        Self { data, mask: None }
    }

    pub fn from_mu(mu: &MuField) -> Self {
        Self {
            data: FieldData::Complex(mu.values().clone()),
            mask: Some(mu.support().to_vec()),
        }
    }

    /// Interprets the file as a Beltrami coefficient. Without a mask the
    /// support is the set of nonzero samples.
    pub fn into_mu(self) -> Result<MuField> {
        let FieldData::Complex(values) = self.data else {
            return Err(Error::InvalidParameter(format!(
                "expected a complex64 field, found {}",
                self.data.kind().name()
            )));
        };
        let support = match self.mask {
            Some(m) => m,
            None => values.values().iter().map(|v| *v != Complex64::new(0.0, 0.0)).collect(),
        };
        MuField::new(values, support)
    }

    pub fn into_real(self) -> Result<RealField> {
        match self.data {
            FieldData::Real(f) => Ok(f),
            other => Err(Error::InvalidParameter(format!(
                "expected a real64 field, found {}",
                other.kind().name()
            ))),
        }
    }

    pub fn into_complex(self) -> Result<ComplexField> {
        match self.data {
            FieldData::Complex(f) => Ok(f),
            other => Err(Error::InvalidParameter(format!(
                "expected a complex64 field, found {}",
                other.kind().name()
            ))),
        }
    }

    pub fn into_matrix(self) -> Result<MatrixField> {
        match self.data {
            FieldData::Matrix(f) => Ok(f),
            other => Err(Error::InvalidParameter(format!(
                "expected a matrix2x2 field, found {}",
                other.kind().name()
            ))),
        }
    }
}

fn header(file: &FieldFile) -> Vec<(String, String)> {
    let grid = file.data.grid();
    let mut h = vec![
        ("dimension".to_string(), "2".to_string()),
        ("L".to_string(), format!("{:?}", grid.half_width())),
        ("N".to_string(), grid.n().to_string()),
        ("kind".to_string(), file.data.kind().name().to_string()),
        ("byteorder".to_string(), "little-endian".to_string()),
    ];
    if file.mask.is_some() {
        h.push(("mask".to_string(), "present".to_string()));
    }
    h
}

pub fn write_field(mut w: impl Write, file: &FieldFile) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{FIELD_FORMAT}")?;
    for (k, v) in header(file) {
        writeln!(out, "{k} {v}")?;
    }
    writeln!(out, "end")?;
    for x in file.data.flat() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    if let Some(mask) = &file.mask {
        out.extend(mask.iter().map(|&m| m as u8));
    }
    w.write_all(&out)?;
    Ok(())
}

struct Header {
    grid: Grid,
    kind: ValueKind,
    mask: bool,
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset: offset as u64,
        message: message.into(),
    }
}

/// Parses `key value` lines after the version line. `lines` yields
/// `(byte offset, line)`.
fn parse_header<'a>(
    mut lines: impl Iterator<Item = (usize, &'a str)>,
    terminator: &str,
) -> Result<(Header, Option<usize>)> {
    let (mut l, mut n, mut kind, mut mask, mut order) = (None, None, None, false, None);
    let mut end = None;
    for (off, line) in lines.by_ref() {
        let line = line.trim();
        if line == terminator {
            end = Some(off);
            break;
        }
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "dimension" => {
                if value != "2" {
                    return Err(parse_err(off, format!("unsupported dimension {value:?}")));
                }
            }
            "L" => l = Some((off, value.parse::<f64>().map_err(|e| parse_err(off, format!("L: {e}")))?)),
            "N" => n = Some((off, value.parse::<usize>().map_err(|e| parse_err(off, format!("N: {e}")))?)),
            "kind" => {
                kind = Some(ValueKind::parse(value).ok_or_else(|| parse_err(off, format!("unknown kind {value:?}")))?)
            }
            "byteorder" => {
                if value != "little-endian" {
                    return Err(parse_err(off, format!("unsupported byte order {value:?}")));
                }
                order = Some(());
            }
            "mask" => mask = value == "present",
            _ => return Err(parse_err(off, format!("unknown header key {key:?}"))),
        }
    }
    let (l_off, l) = l.ok_or_else(|| parse_err(0, "missing L"))?;
    let (n_off, n) = n.ok_or_else(|| parse_err(0, "missing N"))?;
    let kind = kind.ok_or_else(|| parse_err(0, "missing kind"))?;
    order.ok_or_else(|| parse_err(0, "missing byteorder"))?;
    let grid = Grid::new(l, n).map_err(|e| parse_err(if l > 0.0 { n_off } else { l_off }, e.to_string()))?;
    Ok((Header { grid, kind, mask }, end))
}

fn check_version(found: &str, expected: &str) -> Result<()> {
    let found = found.trim_end_matches('\r');
    if found == expected {
        return Ok(());
    }
    let magic = expected.split(' ').next().unwrap_or(expected);
    if found.starts_with(magic) {
        Err(Error::Version {
            found: found.to_string(),
            expected: expected.to_string(),
        })
    } else {
        Err(parse_err(0, format!("not a {magic} file")))
    }
}

/// Splits `text` into lines tagged with their starting byte offset.
fn offset_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |line| {
        let start = offset;
        offset += line.len();
        (start, line.trim_end_matches(['\n', '\r']))
    })
}

pub fn read_field(mut r: impl Read) -> Result<FieldFile> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_field(&bytes)
}

pub fn parse_field(bytes: &[u8]) -> Result<FieldFile> {
    // The header is ASCII and ends at the "end\n" line.
    let mut pos = 0;
    let mut header_lines = Vec::new();
    loop {
        let Some(nl) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(parse_err(pos, "unterminated header"));
        };
        let line = std::str::from_utf8(&bytes[pos..pos + nl])
            .map_err(|_| parse_err(pos, "header is not text"))?;
        header_lines.push((pos, line));
        pos += nl + 1;
        if line.trim() == "end" {
            break;
        }
        if header_lines.len() > 32 {
            return Err(parse_err(pos, "header too long"));
        }
    }
    check_version(header_lines[0].1, FIELD_FORMAT)?;
    let (h, _) = parse_header(header_lines[1..].iter().copied(), "end")?;
    let count = h.grid.len() * h.kind.width();
    let need = count * 8 + if h.mask { h.grid.len() } else { 0 };
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(parse_err(
            bytes.len(),
            format!("payload truncated: {} of {need} bytes", payload.len()),
        ));
    }
    if payload.len() > need {
        return Err(parse_err(pos + need, "trailing bytes after payload"));
    }
    let flat: Vec<f64> = payload[..count * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    if let Some(k) = flat.iter().position(|x| !x.is_finite()) {
        let (i, j) = h.grid.ij(k / h.kind.width());
        return Err(parse_err(pos + 8 * k, format!("non-finite value at sample ({i}, {j})")));
    }
    let mask = if h.mask {
        let m = &payload[count * 8..];
        if let Some(k) = m.iter().position(|&b| b > 1) {
            return Err(parse_err(pos + count * 8 + k, "mask byte is not 0 or 1"));
        }
        Some(m.iter().map(|&b| b == 1).collect())
    } else {
        None
    };
    Ok(FieldFile {
        data: FieldData::from_flat(h.grid, h.kind, &flat)?,
        mask,
    })
}

pub fn save_field(path: impl AsRef<Path>, file: &FieldFile) -> Result<()> {
    let mut out = Vec::new();
    write_field(&mut out, file)?;
    fs::write(path, out)?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<FieldFile> {
    parse_field(&fs::read(path)?)
}

pub fn write_field_csv(mut w: impl Write, file: &FieldFile) -> Result<()> {
    let meta: Vec<String> = header(file).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(w, "# {FIELD_FORMAT} {}", meta.join(" "))?;
    let mut cw = csv::Writer::from_writer(w);
    let kind = file.data.kind();
    let mut head = vec!["i", "j"];
    head.extend(kind.columns());
    if file.mask.is_some() {
        head.push("mask");
    }
    cw.write_record(&head)?;
    let grid = *file.data.grid();
    let flat = file.data.flat();
    let width = kind.width();
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        let mut rec = vec![i.to_string(), j.to_string()];
        rec.extend(flat[k * width..(k + 1) * width].iter().map(|x| format!("{x:?}")));
        if let Some(mask) = &file.mask {
            rec.push((mask[k] as u8).to_string());
        }
        cw.write_record(&rec)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_field_csv(mut r: impl Read) -> Result<FieldFile> {
    let mut text = String::new();
    r.read_to_string(&mut text)
        .map_err(|_| parse_err(0, "CSV is not UTF-8 text"))?;
    let first_len = text.find('\n').map_or(text.len(), |p| p + 1);
    let first = text[..first_len].trim_end();
    let rest = first
        .strip_prefix("# ")
        .ok_or_else(|| parse_err(0, "missing metadata comment line"))?;
    let mut parts = rest.splitn(3, ' ');
    let version = format!("{} {}", parts.next().unwrap_or(""), parts.next().unwrap_or(""));
    check_version(&version, FIELD_FORMAT)?;
    let meta = parts.next().unwrap_or("");
    let pairs: Vec<String> = meta.split(' ').map(|kv| kv.replacen('=', " ", 1)).collect();
    let (h, _) = parse_header(pairs.iter().map(|s| (0usize, s.as_str())), "end")?;
    let width = h.kind.width();
    let mut flat = vec![f64::NAN; h.grid.len() * width];
    let mut mask = h.mask.then(|| vec![false; h.grid.len()]);
    let mut seen = vec![false; h.grid.len()];
    let mut cr = csv::Reader::from_reader(&text.as_bytes()[first_len..]);
    let expect = 2 + width + h.mask as usize;
    for rec in cr.records() {
        let rec = rec?;
        let off = first_len + rec.position().map_or(0, |p| p.byte() as usize);
        if rec.len() != expect {
            return Err(parse_err(off, format!("expected {expect} columns, found {}", rec.len())));
        }
        let idx = |c: usize| -> Result<usize> {
            rec[c].trim().parse().map_err(|e| parse_err(off, format!("index: {e}")))
        };
        let (i, j) = (idx(0)?, idx(1)?);
        if i >= h.grid.n() || j >= h.grid.n() {
            return Err(parse_err(off, format!("index ({i}, {j}) outside the grid")));
        }
        let k = h.grid.index(i, j);
        for c in 0..width {
            let x: f64 = rec[2 + c]
                .trim()
                .parse()
                .map_err(|e| parse_err(off, format!("value: {e}")))?;
            if !x.is_finite() {
                return Err(parse_err(off, format!("non-finite value at sample ({i}, {j})")));
            }
            flat[k * width + c] = x;
        }
        if let Some(m) = mask.as_mut() {
            m[k] = match rec[2 + width].trim() {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(off, format!("mask value {other:?}"))),
            };
        }
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        let (i, j) = h.grid.ij(k);
        return Err(parse_err(text.len(), format!("missing sample ({i}, {j})")));
    }
    Ok(FieldFile {
        data: FieldData::from_flat(h.grid, h.kind, &flat)?,
        mask,
    })
}

pub fn write_domain(mut w: impl Write, domain: &DomainSpec) -> Result<()> {
    let grid = domain.grid();
    writeln!(w, "{DOMAIN_FORMAT}")?;
    writeln!(w, "L {:?}", grid.half_width())?;
    writeln!(w, "N {}", grid.n())?;
    for p in domain.components() {
        writeln!(w, "component {}", p.len())?;
        for v in p.vertices() {
            writeln!(w, "{:?} {:?}", v.re, v.im)?;
        }
    }
    writeln!(w, "end")?;
    Ok(())
}

pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let mut lines = offset_lines(text).filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, first) = lines.next().ok_or_else(|| parse_err(0, "empty domain file"))?;
    check_version(first, DOMAIN_FORMAT)?;
    let (mut l, mut n) = (None, None);
    let mut components = Vec::new();
    let mut ended = false;
    while let Some((off, line)) = lines.next() {
        let line = line.trim();
        if line == "end" {
            ended = true;
            break;
        }
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "L" => l = Some(value.trim().parse::<f64>().map_err(|e| parse_err(off, format!("L: {e}")))?),
            "N" => n = Some(value.trim().parse::<usize>().map_err(|e| parse_err(off, format!("N: {e}")))?),
            "component" => {
                let count: usize = value
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(off, format!("vertex count: {e}")))?;
                let mut vs = Vec::with_capacity(count);
                for _ in 0..count {
                    let (voff, vline) = lines
                        .next()
                        .ok_or_else(|| parse_err(text.len(), "unexpected end of file in component"))?;
                    let mut it = vline.split_whitespace();
                    let mut coord = || -> Result<f64> {
                        it.next()
                            .ok_or_else(|| parse_err(voff, "expected two coordinates"))?
                            .parse::<f64>()
                            .map_err(|e| parse_err(voff, format!("coordinate: {e}")))
                    };
                    let (x, y) = (coord()?, coord()?);
                    vs.push(Complex64::new(x, y));
                }
                components.push(Polyline::new_unchecked(vs).map_err(|e| parse_err(off, e.to_string()))?);
            }
            _ => return Err(parse_err(off, format!("unknown key {key:?}"))),
        }
    }
    if !ended {
        return Err(parse_err(text.len(), "missing end line"));
    }
    let grid = Grid::new(
        l.ok_or_else(|| parse_err(0, "missing L"))?,
        n.ok_or_else(|| parse_err(0, "missing N"))?,
    )?;
    DomainSpec::from_components(grid, components)
}

pub fn save_domain(path: impl AsRef<Path>, domain: &DomainSpec) -> Result<()> {
    let mut out = Vec::new();
    write_domain(&mut out, domain)?;
    fs::write(path, out)?;
    Ok(())
}

pub fn load_domain(path: impl AsRef<Path>) -> Result<DomainSpec> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| parse_err(e.valid_up_to(), "domain file is not UTF-8"))?;
    parse_domain(text)
}

pub fn write_boundary_csv(w: impl Write, phi: &BoundaryData) -> Result<()> {
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(["component", "x", "y", "value"])?;
    for (c, comp) in phi.components().iter().enumerate() {
        for &(z, v) in comp {
            cw.write_record([c.to_string(), format!("{:?}", z.re), format!("{:?}", z.im), format!("{v:?}")])?;
        }
    }
    cw.flush()?;
    Ok(())
}

fn parse_floats(rec: &csv::StringRecord, off: usize, cols: std::ops::Range<usize>) -> Result<Vec<f64>> {
    cols.map(|c| {
        rec.get(c)
            .ok_or_else(|| parse_err(off, format!("missing column {c}")))?
            .trim()
            .parse::<f64>()
            .map_err(|e| parse_err(off, format!("column {c}: {e}")))
    })
    .collect()
}

pub fn read_boundary_csv(r: impl Read) -> Result<BoundaryData> {
    let mut cr = csv::Reader::from_reader(r);
    let mut comps: Vec<Vec<(Complex64, f64)>> = Vec::new();
    for rec in cr.records() {
        let rec = rec?;
        let off = rec.position().map_or(0, |p| p.byte() as usize);
        let c: usize = rec
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| parse_err(off, format!("component: {e}")))?;
        let v = parse_floats(&rec, off, 1..4)?;
        if c > comps.len() {
            return Err(parse_err(off, format!("component {c} listed before {}", comps.len())));
        }
        if c == comps.len() {
            comps.push(Vec::new());
        }
        comps[c].push((Complex64::new(v[0], v[1]), v[2]));
    }
    BoundaryData::new(comps)
}

pub fn load_boundary_csv(path: impl AsRef<Path>) -> Result<BoundaryData> {
    read_boundary_csv(fs::File::open(path)?)
}

pub fn save_boundary_csv(path: impl AsRef<Path>, phi: &BoundaryData) -> Result<()> {
    write_boundary_csv(fs::File::create(path)?, phi)
}

pub fn read_probes_csv(r: impl Read) -> Result<Vec<Complex64>> {
    let mut cr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in cr.records() {
        let rec = rec?;
        let off = rec.position().map_or(0, |p| p.byte() as usize);
        let v = parse_floats(&rec, off, 0..2)?;
        out.push(Complex64::new(v[0], v[1]));
    }
    Ok(out)
}

pub fn load_probes_csv(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    read_probes_csv(fs::File::open(path)?)
}

/// Writes a real field as a `x,y,value` CSV for plotting.
pub fn write_plot_csv(mut w: impl Write, field: &RealField) -> Result<()> {
    writeln!(w, "x,y,value")?;
    let grid = field.grid();
    for (k, v) in field.values().iter().enumerate() {
        let (i, j) = grid.ij(k);
        writeln!(w, "{:e},{:e},{:e}", grid.coord(i), grid.coord(j), v)?;
    }
    Ok(())
}
