//! Binary and text codecs for CSI tensors and spectrograms.
//!
//! `RFB1` (CSI): magic, little-endian `u32` T, F, L, `f64` sample rate, then
//! T·F·L `(f32 re, f32 im)` pairs in t-major/f/l order.
//!
//! `RFS1` (spectrogram): magic, `u32` B, `u32` N, `f64` frequency axis,
//! `f64` time axis, then B·N `f32` values row-major. A stacked tensor file
//! is several `RFS1` records back to back.
//!
//! The text CSI format has a `T F L sample_rate_hz` header line followed by
//! T lines of F·L whitespace-separated `re,im` pairs.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex32;

use crate::csi::{CsiTensor, Spectrogram};
use crate::error::{Error, Result};

pub const CSI_MAGIC: &[u8; 4] = b"RFB1";
pub const SPEC_MAGIC: &[u8; 4] = b"RFS1";

const CSI_HEADER_LEN: usize = 4 + 4 * 3 + 8;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Corrupt(format!(
                "truncated {what}: need {n} bytes, {} left",
                self.remaining()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn encode_csi(csi: &CsiTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(CSI_HEADER_LEN + csi.raw().len() * 8);
    out.extend_from_slice(CSI_MAGIC);
    out.extend_from_slice(&(csi.t_count() as u32).to_le_bytes());
    out.extend_from_slice(&(csi.f_count() as u32).to_le_bytes());
    out.extend_from_slice(&(csi.l_count() as u32).to_le_bytes());
    out.extend_from_slice(&csi.sample_rate_hz().to_le_bytes());
    for c in csi.raw() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_csi(bytes: &[u8]) -> Result<CsiTensor> {
    if bytes.len() < 4 || &bytes[..4] != CSI_MAGIC {
        return Err(Error::Format("missing RFB1 magic".into()));
    }
    let mut cur = Cursor::new(&bytes[4..]);
    let t = cur.u32("header")? as usize;
    let f = cur.u32("header")? as usize;
    let l = cur.u32("header")? as usize;
    let rate = cur.f64("header")?;
    if t < 2 || f < 1 || l < 1 {
        return Err(Error::Corrupt(format!(
            "invalid dimensions T={t} F={f} L={l}"
        )));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Corrupt(format!("invalid sample rate {rate}")));
    }
    let have = cur.remaining();
    let count = t
        .checked_mul(f)
        .and_then(|v| v.checked_mul(l))
        .unwrap_or(usize::MAX);
    if count.checked_mul(8) != Some(have) {
        return Err(Error::Corrupt(format!(
            "header declares {t}x{f}x{l} complex values, payload has {have} bytes"
        )));
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let re = cur.f32("payload")?;
        let im = cur.f32("payload")?;
        data.push(Complex32::new(re, im));
    }
    CsiTensor::new(data, t, f, l, rate)
}

/// Reads an `RFB1` file, or the text CSI format when the magic is absent.
pub fn read_csi(path: impl AsRef<Path>) -> Result<CsiTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io_at(path, e))?;
    if bytes.starts_with(CSI_MAGIC) {
        return decode_csi(&bytes);
    }
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Format(format!("{}: not RFB1 and not UTF-8 text", path.display())))?;
    parse_csi_text(text)
}

pub fn write_csi(csi: &CsiTensor, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_csi(csi))
}

pub fn parse_csi_text(text: &str) -> Result<CsiTensor> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSI text".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::Format(format!(
            "CSI text header must be `T F L sample_rate_hz`, got {header:?}"
        )));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad dimension {s:?}")))
    };
    let (t, f, l) = (dim(fields[0])?, dim(fields[1])?, dim(fields[2])?);
    let rate: f64 = fields[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad sample rate {:?}", fields[3])))?;
    let mut data = Vec::with_capacity(t * f * l);
    let mut rows = 0usize;
    for (row, line) in lines.enumerate() {
        rows += 1;
        let pairs: Vec<&str> = line.split_whitespace().collect();
        if pairs.len() != f * l {
            return Err(Error::Corrupt(format!(
                "line {} has {} values, expected {}",
                row + 2,
                pairs.len(),
                f * l
            )));
        }
        for p in pairs {
            let (re, im) = p
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("expected re,im pair, got {p:?}")))?;
            let parse = |s: &str| {
                s.parse::<f32>()
                    .map_err(|_| Error::Format(format!("bad number {s:?}")))
            };
            data.push(Complex32::new(parse(re)?, parse(im)?));
        }
    }
    if rows != t {
        return Err(Error::Corrupt(format!(
            "header declares T={t}, found {rows} packet lines"
        )));
    }
    CsiTensor::new(data, t, f, l, rate)
}

pub fn format_csi_text(csi: &CsiTensor) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        csi.t_count(),
        csi.f_count(),
        csi.l_count(),
        csi.sample_rate_hz()
    );
    let width = csi.f_count() * csi.l_count();
    for packet in csi.raw().chunks(width) {
        let line: Vec<String> = packet
            .iter()
            .map(|c| format!("{},{}", c.re, c.im))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn encode_spectrogram(spec: &Spectrogram, out: &mut Vec<u8>) {
    out.extend_from_slice(SPEC_MAGIC);
    out.extend_from_slice(&(spec.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(spec.cols() as u32).to_le_bytes());
    for v in spec.bin_freqs_hz().iter().chain(spec.bin_times_s()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in spec.values() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
}

fn decode_one(cur: &mut Cursor<'_>) -> Result<Spectrogram> {
    let magic = cur
        .take(4, "magic")
        .map_err(|_| Error::Format("missing RFS1 magic".into()))?;
    if magic != SPEC_MAGIC {
        return Err(Error::Format("missing RFS1 magic".into()));
    }
    let b = cur.u32("header")? as usize;
    let n = cur.u32("header")? as usize;
    let need = b
        .checked_mul(n)
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add((b + n) * 8));
    if need.is_none_or(|need| cur.remaining() < need) {
        return Err(Error::Corrupt(format!(
            "header declares {b}x{n} spectrogram, payload has {} bytes",
            cur.remaining()
        )));
    }
    let freqs = (0..b)
        .map(|_| cur.f64("axis"))
        .collect::<Result<Vec<_>>>()?;
    let times = (0..n)
        .map(|_| cur.f64("axis"))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..b * n)
        .map(|_| cur.f32("values").map(f64::from))
        .collect::<Result<Vec<_>>>()?;
    Spectrogram::new(values, freqs, times)
}

pub fn decode_spectrogram(bytes: &[u8]) -> Result<Spectrogram> {
    let mut cur = Cursor::new(bytes);
    let spec = decode_one(&mut cur)?;
    if cur.remaining() != 0 {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after spectrogram payload",
            cur.remaining()
        )));
    }
    Ok(spec)
}

pub fn decode_spectrogram_stack(bytes: &[u8]) -> Result<Vec<Spectrogram>> {
    let mut cur = Cursor::new(bytes);
    let mut out = Vec::new();
    while cur.remaining() > 0 {
        out.push(decode_one(&mut cur)?);
    }
    if out.is_empty() {
        return Err(Error::Format("empty spectrogram stack".into()));
    }
    Ok(out)
}

pub fn write_spectrogram(spec: &Spectrogram, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    encode_spectrogram(spec, &mut buf);
    write_atomic(path.as_ref(), &buf)
}

pub fn read_spectrogram(path: impl AsRef<Path>) -> Result<Spectrogram> {
    let path = path.as_ref();
    decode_spectrogram(&fs::read(path).map_err(|e| Error::io_at(path, e))?)
}

/// Writes several spectrograms as consecutive `RFS1` records in one file.
pub fn write_spectrogram_stack(specs: &[Spectrogram], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    for s in specs {
        encode_spectrogram(s, &mut buf);
    }
    write_atomic(path.as_ref(), &buf)
}

pub fn read_spectrogram_stack(path: impl AsRef<Path>) -> Result<Vec<Spectrogram>> {
    let path = path.as_ref();
    decode_spectrogram_stack(&fs::read(path).map_err(|e| Error::io_at(path, e))?)
}

/// Write to a sibling temp file, then rename over the destination.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::arg(format!("{} is not a file path", path.display())))?;
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let tmp_name = format!(
        ".{}.tmp{}-{}",
        file_name.to_string_lossy(),
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => tmp_name.into(),
    };
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_data()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io_at(path, e));
    }
    Ok(())
}
