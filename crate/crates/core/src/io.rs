//! Tensor files.
//!
//! `MXT1` is a minimal dense container:
//!
//! | bytes          | content                                   |
//! |----------------|-------------------------------------------|
//! | 4              | magic `MXT1`                              |
//! | 1              | dtype: 0 = f32 LE, 1 = f64 LE             |
//! | 1              | ndim                                      |
//! | 8 × ndim       | dims, u64 LE, each ≥ 1                    |
//! | rest           | row-major payload                         |
//!
//! `MXQ1` stores a quantized tensor: config names, one code byte per element
//! (sign in the top bit of the element width), per-group scales as f64 plus
//! their encoded bits, zero-points and the optional tensor scale.
//!
//! Files ending in `.csv` are read as 2-D comma-separated decimals.

use std::fs;
use std::path::Path;

use crate::error::{MxError, Result};
use crate::formats::ElementCode;
use crate::quantizer::{QuantConfig, QuantizedTensor, Symmetry};
use crate::scaling::{AsymScalePair, TensorScale};
use crate::tensor::Tensor;

pub const TENSOR_MAGIC: &[u8; 4] = b"MXT1";
pub const QUANT_MAGIC: &[u8; 4] = b"MXQ1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dtype {
    #[default]
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            c => Err(MxError::Parse(format!("unknown dtype byte {c}"))),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = MxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            _ => Err(MxError::Config(format!("unknown dtype {s:?}; expected f32 or f64"))),
        }
    }
}

/// Little-endian byte reader that reports truncation as a parse error.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| MxError::Parse(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(self.u64()? as i64)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u8()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| MxError::Parse("invalid utf-8 name".into()))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| MxError::Parse("length overflows usize".into()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(MxError::Parse(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn read_dims(r: &mut Reader) -> Result<Vec<usize>> {
    let ndim = r.u8()? as usize;
    if ndim == 0 {
        return Err(MxError::Parse("ndim must be at least 1".into()));
    }
    let dims = (0..ndim).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    if dims.contains(&0) {
        return Err(MxError::Parse(format!("zero extent in dims {dims:?}")));
    }
    Ok(dims)
}

fn element_count(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| MxError::Parse(format!("dims {dims:?} overflow")))
}

fn put_dims(out: &mut Vec<u8>, dims: &[usize]) -> Result<()> {
    let ndim = u8::try_from(dims.len()).map_err(|_| MxError::Shape("more than 255 dims".into()))?;
    out.push(ndim);
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    Ok(())
}

/// Serializes a tensor as MXT1.
pub fn encode_tensor(x: &Tensor, dtype: Dtype) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(6 + 8 * x.ndim() + dtype.size() * x.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.push(dtype.code());
    put_dims(&mut out, x.shape())?;
    for &v in x.data() {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    Ok(out)
}

/// Parses an MXT1 buffer.
pub fn decode_tensor(bytes: &[u8]) -> Result<(Tensor, Dtype)> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != TENSOR_MAGIC {
        return Err(MxError::Parse("bad magic, expected MXT1".into()));
    }
    let dtype = Dtype::from_code(r.u8()?)?;
    let dims = read_dims(&mut r)?;
    let n = element_count(&dims)?;
    let payload = r.take(
        n.checked_mul(dtype.size())
            .ok_or_else(|| MxError::Parse("payload size overflows".into()))?,
    )?;
    r.finish()?;
    let data = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    };
    Ok((Tensor::new(dims, data)?, dtype))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| MxError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| MxError::io(path, e))
}

pub fn write_tensor(path: impl AsRef<Path>, x: &Tensor, dtype: Dtype) -> Result<()> {
    write_bytes(path.as_ref(), &encode_tensor(x, dtype)?)
}

/// Reads an MXT1 file, or a CSV file when the extension is `.csv`.
///
/// CSV input reports [`Dtype::F64`].
pub fn read_tensor(path: impl AsRef<Path>) -> Result<(Tensor, Dtype)> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let text = String::from_utf8(bytes)
            .map_err(|_| MxError::Parse(format!("{}: not utf-8", path.display())))?;
        Ok((parse_csv(&text)?, Dtype::F64))
    } else {
        decode_tensor(&bytes)
    }
}

/// Parses comma-separated decimals into a `rows x cols` tensor. Blank lines
/// are skipped; every row must have the same number of fields.
pub fn parse_csv(text: &str) -> Result<Tensor> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| MxError::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| MxError::Parse(format!("line {line}: cannot parse {field:?}")))?;
            data.push(v);
        }
        cols = record.len();
        rows += 1;
    }
    if rows == 0 {
        return Err(MxError::Parse("empty csv".into()));
    }
    Tensor::new(vec![rows, cols], data)
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let n = u8::try_from(s.len()).map_err(|_| MxError::Config(format!("name too long: {s}")))?;
    out.push(n);
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

/// Serializes a quantized tensor as MXQ1. Element formats wider than 8 bits
/// are rejected.
pub fn encode_quantized(q: &QuantizedTensor) -> Result<Vec<u8>> {
    let bits = q.config.format.total_bits();
    if bits > 8 {
        return Err(MxError::UnsupportedPath(format!(
            "MXQ1 stores codes in one byte; {} has {bits} bits",
            q.config.format.name()
        )));
    }
    let mut out = Vec::new();
    out.extend_from_slice(QUANT_MAGIC);
    put_str(&mut out, &q.config.format_name())?;
    put_str(&mut out, q.config.scale_mode.name())?;
    put_str(&mut out, &q.config.group_size.to_string())?;
    out.extend_from_slice(&(q.config.axis as i64).to_le_bytes());
    put_dims(&mut out, &q.shape)?;
    let sign_bit = 1u32 << (bits - 1);
    for c in &q.codes {
        let byte = if q.config.symmetry == Symmetry::ZeroPoint {
            c.code
        } else {
            c.code | if c.sign { sign_bit } else { 0 }
        };
        out.push(byte as u8);
    }
    out.extend_from_slice(&(q.scales.len() as u64).to_le_bytes());
    for s in &q.scales {
        for v in [s.pos_scale, s.neg_scale] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [s.pos_scale, s.neg_scale] {
            out.extend_from_slice(&q.config.scale_mode.encode_scale_bits(v).to_le_bytes());
        }
    }
    out.extend_from_slice(&(q.zero_points.len() as u64).to_le_bytes());
    for z in &q.zero_points {
        out.extend_from_slice(&z.to_le_bytes());
    }
    match q.tensor_scale {
        None => out.push(0),
        Some(t) => {
            out.push(1);
            out.extend_from_slice(&t.encode.to_le_bytes());
            out.extend_from_slice(&t.bits().to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses an MXQ1 buffer. The stored encoded bits are informational and are
/// not checked against the f64 scales.
pub fn decode_quantized(bytes: &[u8]) -> Result<QuantizedTensor> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != QUANT_MAGIC {
        return Err(MxError::Parse("bad magic, expected MXQ1".into()));
    }
    let format = r.string()?;
    let scale = r.string()?;
    let group = r.string()?;
    let axis = r.i64()? as isize;
    let config = QuantConfig::from_names(&format, &scale, &group)?.with_axis(axis);
    let shape = read_dims(&mut r)?;
    let n = element_count(&shape)?;
    let layout = config.layout(&shape)?;
    let bits = config.format.total_bits();
    let sign_bit = 1u32 << (bits - 1);
    let codes = r
        .take(n)?
        .iter()
        .map(|&b| {
            let b = b as u32;
            if config.symmetry == Symmetry::ZeroPoint {
                ElementCode { sign: false, code: b }
            } else {
                ElementCode { sign: b & sign_bit != 0, code: b & (sign_bit - 1) }
            }
        })
        .collect();
    let groups = r.usize()?;
    if groups != layout.num_groups() {
        return Err(MxError::Parse(format!(
            "{groups} scale entries for {} groups",
            layout.num_groups()
        )));
    }
    let mut scales = Vec::with_capacity(groups);
    for _ in 0..groups {
        let pos_scale = r.f64()?;
        let neg_scale = r.f64()?;
        r.u32()?;
        r.u32()?;
        scales.push(AsymScalePair { pos_scale, neg_scale });
    }
    let nz = r.usize()?;
    let zero_points = (0..nz).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let tensor_scale = match r.u8()? {
        0 => None,
        1 => {
            let encode = r.f64()?;
            r.u32()?;
            Some(TensorScale { encode })
        }
        f => return Err(MxError::Parse(format!("bad tensor-scale flag {f}"))),
    };
    r.finish()?;
    Ok(QuantizedTensor {
        shape,
        config,
        codes,
        scales,
        zero_points,
        tensor_scale,
    })
}

pub fn write_quantized(path: impl AsRef<Path>, q: &QuantizedTensor) -> Result<()> {
    write_bytes(path.as_ref(), &encode_quantized(q)?)
}

pub fn read_quantized(path: impl AsRef<Path>) -> Result<QuantizedTensor> {
    let path = path.as_ref();
    decode_quantized(&read_bytes(path)?)
}
