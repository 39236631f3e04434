//! HSRC raster container.
//!
//! Little-endian, 64-byte header followed by band-sequential samples:
//!
//! | offset | size | field                  |
//! |--------|------|------------------------|
//! | 0      | 4    | magic `HSRC`           |
//! | 4      | 2    | version (u16, = 1)     |
//! | 6      | 2    | dtype code (u16)       |
//! | 8      | 4    | bands (u32)            |
//! | 12     | 4    | height (u32)           |
//! | 16     | 4    | width (u32)            |
//! | 20     | 4    | nodata (i32)           |
//! | 24     | 8    | gsd (f64)              |
//! | 32     | 8    | origin_x (f64)         |
//! | 40     | 8    | origin_y (f64)         |
//! | 48     | 4    | crs (u32)              |
//! | 52     | 12   | reserved, zero         |
//!
//! The origin is the upper-left corner of the upper-left pixel; rows run
//! north to south.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const MAGIC: &[u8; 4] = b"HSRC";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum DType {
    I16 = 1,
    U8 = 2,
    U16 = 3,
}

impl DType {
    pub fn from_code(code: u16) -> Option<Self> {
        match code {
            1 => Some(DType::I16),
            2 => Some(DType::U8),
            3 => Some(DType::U16),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::U8 => 1,
            DType::I16 | DType::U16 => 2,
        }
    }
}

/// Pixel sample types storable in HSRC.
pub trait Sample: Copy + Default + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    const DTYPE: DType;
    fn read_le(bytes: &[u8]) -> Self;
    /// Writes the little-endian encoding into `out`, which has exactly the
    /// sample's size.
    fn put_le(self, out: &mut [u8]);
    fn as_i64(self) -> i64;
}

impl Sample for i16 {
    const DTYPE: DType = DType::I16;
    fn read_le(b: &[u8]) -> Self {
        i16::from_le_bytes([b[0], b[1]])
    }
    fn put_le(self, out: &mut [u8]) {
        out.copy_from_slice(&self.to_le_bytes());
    }
    fn as_i64(self) -> i64 {
        i64::from(self)
    }
}

impl Sample for u8 {
    const DTYPE: DType = DType::U8;
    fn read_le(b: &[u8]) -> Self {
        b[0]
    }
    fn put_le(self, out: &mut [u8]) {
        out[0] = self;
    }
    fn as_i64(self) -> i64 {
        i64::from(self)
    }
}

impl Sample for u16 {
    const DTYPE: DType = DType::U16;
    fn read_le(b: &[u8]) -> Self {
        u16::from_le_bytes([b[0], b[1]])
    }
    fn put_le(self, out: &mut [u8]) {
        out.copy_from_slice(&self.to_le_bytes());
    }
    fn as_i64(self) -> i64 {
        i64::from(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterHeader {
    pub width: u32,
    pub height: u32,
    pub bands: u32,
    pub dtype: DType,
    pub nodata: i32,
    /// Upper-left corner in projected meters.
    pub origin: Point2,
    pub gsd: f64,
    pub crs: u32,
    /// Band center wavelengths in nm, when known. Not stored in HSRC.
    pub wavelengths: Option<Vec<f64>>,
}

/// Default reflectance no-data sentinel.
pub const DEFAULT_NODATA: i32 = -32768;

impl RasterHeader {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.bands == 0 {
            return Err(Error::Validation(format!(
                "raster dimensions must be positive, got {}x{}x{}",
                self.bands, self.height, self.width
            )));
        }
        if !(self.gsd.is_finite() && self.gsd > 0.0) {
            return Err(Error::Validation(format!("gsd must be positive, got {}", self.gsd)));
        }
        if let Some(w) = &self.wavelengths {
            if w.len() != self.bands as usize {
                return Err(Error::Validation(format!("{} wavelengths for {} bands", w.len(), self.bands)));
            }
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.bands as usize * self.height as usize * self.width as usize
    }

    pub fn file_len(&self) -> u64 {
        (HEADER_LEN + self.sample_count() * self.dtype.size()) as u64
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(MAGIC);
        b[4..6].copy_from_slice(&VERSION.to_le_bytes());
        b[6..8].copy_from_slice(&(self.dtype as u16).to_le_bytes());
        b[8..12].copy_from_slice(&self.bands.to_le_bytes());
        b[12..16].copy_from_slice(&self.height.to_le_bytes());
        b[16..20].copy_from_slice(&self.width.to_le_bytes());
        b[20..24].copy_from_slice(&self.nodata.to_le_bytes());
        b[24..32].copy_from_slice(&self.gsd.to_le_bytes());
        b[32..40].copy_from_slice(&self.origin.x.to_le_bytes());
        b[40..48].copy_from_slice(&self.origin.y.to_le_bytes());
        b[48..52].copy_from_slice(&self.crs.to_le_bytes());
        b
    }

    pub fn decode(b: &[u8; HEADER_LEN]) -> std::result::Result<Self, String> {
        if &b[0..4] != MAGIC {
            return Err("bad magic".into());
        }
        let u16_at = |o: usize| u16::from_le_bytes([b[o], b[o + 1]]);
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let dtype = DType::from_code(u16_at(6)).ok_or_else(|| format!("unknown dtype code {}", u16_at(6)))?;
        let h = RasterHeader {
            bands: u32_at(8),
            height: u32_at(12),
            width: u32_at(16),
            nodata: i32::from_le_bytes(b[20..24].try_into().unwrap()),
            gsd: f64_at(24),
            origin: Point2::new(f64_at(32), f64_at(40)),
            crs: u32_at(48),
            dtype,
            wavelengths: None,
        };
        h.validate().map_err(|e| e.to_string())?;
        Ok(h)
    }
}

/// A full in-memory raster, band-sequential.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T: Sample> {
    pub header: RasterHeader,
    pub data: Vec<T>,
}

impl<T: Sample> Raster<T> {
    pub fn new(mut header: RasterHeader, data: Vec<T>) -> Result<Self> {
        header.dtype = T::DTYPE;
        header.validate()?;
        if data.len() != header.sample_count() {
            return Err(Error::Shape(format!("{} samples for a {} sample raster", data.len(), header.sample_count())));
        }
        Ok(Raster { header, data })
    }

    pub fn get(&self, band: usize, row: usize, col: usize) -> T {
        let h = &self.header;
        self.data[(band * h.height as usize + row) * h.width as usize + col]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header.file_len() as usize);
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        const CHUNK: usize = 1 << 16;
        let size = T::DTYPE.size();
        w.write_all(&self.header.encode())?;
        let mut buf = vec![0u8; CHUNK * size];
        for samples in self.data.chunks(CHUNK) {
            let bytes = &mut buf[..samples.len() * size];
            for (b, &v) in bytes.chunks_exact_mut(size).zip(samples) {
                v.put_le(b);
            }
            w.write_all(bytes)?;
        }
        Ok(())
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), reason: reason.into() }
}

pub fn write_raster<T: Sample>(raster: &Raster<T>, path: &Path) -> Result<()> {
    raster.header.validate()?;
    if raster.header.dtype != T::DTYPE {
        return Err(Error::Validation("header dtype disagrees with sample type".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    raster.write_to(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_header(path: &Path) -> Result<RasterHeader> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let header = read_header_from(&mut f, path)?;
    let len = f.metadata().map_err(|e| Error::io(path, e))?.len();
    if len != header.file_len() {
        return Err(format_err(path, format!("file is {len} bytes, header implies {}", header.file_len())));
    }
    Ok(header)
}

fn read_header_from(r: &mut impl Read, path: &Path) -> Result<RasterHeader> {
    let mut buf = [0u8; HEADER_LEN];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => format_err(path, "truncated header"),
        _ => Error::io(path, e),
    })?;
    RasterHeader::decode(&buf).map_err(|r| format_err(path, r))
}

pub fn read_raster<T: Sample>(path: &Path) -> Result<Raster<T>> {
    let header = read_header(path)?;
    if header.dtype != T::DTYPE {
        return Err(format_err(path, format!("dtype {:?}, expected {:?}", header.dtype, T::DTYPE)));
    }
    let mut bytes = Vec::new();
    let mut f = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    f.seek(SeekFrom::Start(HEADER_LEN as u64)).map_err(|e| Error::io(path, e))?;
    f.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let data = bytes.chunks_exact(T::DTYPE.size()).map(T::read_le).collect();
    Ok(Raster { header, data })
}

/// Reads a `rows x cols` block starting at (`row0`, `col0`) from each of
/// `bands` without loading the whole file.
pub fn read_block<T: Sample>(
    path: &Path,
    header: &RasterHeader,
    bands: &[usize],
    row0: usize,
    col0: usize,
    rows: usize,
    cols: usize,
) -> Result<Vec<T>> {
    if header.dtype != T::DTYPE {
        return Err(format_err(path, format!("dtype {:?}, expected {:?}", header.dtype, T::DTYPE)));
    }
    let (w, h) = (header.width as usize, header.height as usize);
    if row0 + rows > h || col0 + cols > w || bands.iter().any(|&b| b >= header.bands as usize) {
        return Err(Error::OutOfBounds(format!(
            "block rows {row0}..{} cols {col0}..{} outside {h}x{w}",
            row0 + rows,
            col0 + cols
        )));
    }
    let size = T::DTYPE.size();
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut span = vec![0u8; rows * w * size];
    let mut out = Vec::with_capacity(bands.len() * rows * cols);
    for &b in bands {
        let offset = HEADER_LEN + (b * h + row0) * w * size;
        f.seek(SeekFrom::Start(offset as u64)).map_err(|e| Error::io(path, e))?;
        f.read_exact(&mut span).map_err(|e| Error::io(path, e))?;
        for line in span.chunks_exact(w * size) {
            out.extend(line[col0 * size..(col0 + cols) * size].chunks_exact(size).map(T::read_le));
        }
    }
    Ok(out)
}
