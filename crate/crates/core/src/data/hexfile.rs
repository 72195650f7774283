//! `HEXI` v1: magic, u16 version, u32 rows, u32 cols, u16 channels, f64
//! circumradius, f64 origin x, f64 origin y, then `rows * cols * channels`
//! f32 values, row-major with interleaved channels. Little-endian; odd
//! rows are shifted right.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::hexgrid::HexGeometry;
use crate::resample::HexImage;
use crate::{Error, Result};

pub const HEXI_MAGIC: [u8; 4] = *b"HEXI";
pub const HEXI_VERSION: u16 = 1;

pub fn write_hex_image<W: Write>(img: &HexImage, w: &mut W) -> Result<()> {
    let g = &img.geometry;
    let channels = u16::try_from(img.channels).map_err(|_| Error::dim("too many channels for HEXI"))?;
    w.write_all(&HEXI_MAGIC)?;
    w.write_all(&HEXI_VERSION.to_le_bytes())?;
    w.write_all(&(g.rows as u32).to_le_bytes())?;
    w.write_all(&(g.cols as u32).to_le_bytes())?;
    w.write_all(&channels.to_le_bytes())?;
    for v in [g.circumradius, g.origin_x, g.origin_y] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(img.data.len() * 4);
    for v in &img.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("HEXI payload length mismatch".into()),
        _ => Error::Io(e),
    })
}

pub fn read_hex_image<R: Read>(r: &mut R) -> Result<HexImage> {
    let mut head = [0u8; 4 + 2 + 4 + 4 + 2 + 24];
    fill(r, &mut head)?;
    if head[..4] != HEXI_MAGIC {
        return Err(Error::Format(format!("bad HEXI magic {:?}", &head[..4])));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != HEXI_VERSION {
        return Err(Error::UnsupportedVersion(version as u32));
    }
    let u32_at = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap()) as usize;
    let f64_at = |i: usize| f64::from_le_bytes(head[i..i + 8].try_into().unwrap());
    let (rows, cols) = (u32_at(6), u32_at(10));
    let channels = u16::from_le_bytes([head[14], head[15]]) as usize;
    let geometry = HexGeometry::new(rows, cols, f64_at(16), f64_at(24), f64_at(32))?;
    let mut payload = vec![0u8; rows * cols * channels * 4];
    fill(r, &mut payload)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("HEXI payload length mismatch".into()));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    HexImage::new(geometry, channels, data)
}

pub fn save_hex_image(img: &HexImage, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_hex_image(img, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_hex_image(path: &Path) -> Result<HexImage> {
    read_hex_image(&mut BufReader::new(File::open(path)?))
}
