//! On-disk formats for bit streams.
//!
//! Packed format: raw bytes in LSB-first order (bit `i` of the stream is
//! bit `i mod 8` of byte `i / 8`) in a `.bits` file, plus a sidecar
//! `<file>.meta.json` holding `{"length_bits": N, "origin": "...",
//! "one_fraction": x}`. The sidecar is required to read a packed file
//! back, since trailing padding makes the byte count alone ambiguous.
//!
//! ASCII format: one '0' or '1' character per bit, no terminator. The
//! sidecar is still written for provenance but is optional on read.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bitstream::{BitStream, Origin};

/// Serialized form of the sidecar metadata file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarMeta {
    pub length_bits: u64,
    pub origin: Origin,
    pub one_fraction: Option<f64>,
}

/// Path of the metadata sidecar for a given bit file.
pub fn sidecar_path(bits_path: &Path) -> PathBuf {
    let mut name = bits_path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_sidecar(stream: &BitStream, path: &Path) -> crate::Result<()> {
    let meta = SidecarMeta {
        length_bits: stream.len(),
        origin: stream.meta().origin,
        one_fraction: stream.meta().one_fraction,
    };
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| crate::Error::Format(format!("cannot serialize metadata: {e}")))?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

fn read_sidecar(path: &Path) -> crate::Result<SidecarMeta> {
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| {
        crate::Error::Format(format!(
            "missing or unreadable metadata sidecar {}: {e}",
            sidecar.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        crate::Error::Format(format!("corrupt metadata sidecar {}: {e}", sidecar.display()))
    })
}

/// Write a stream in packed format plus its sidecar.
pub fn write_packed(stream: &BitStream, path: &Path) -> crate::Result<()> {
    fs::write(path, stream.to_bytes())?;
    write_sidecar(stream, path)
}

/// Read a packed stream, validating byte count, padding, and the recorded
/// one-fraction against the actual content.
pub fn read_packed(path: &Path) -> crate::Result<BitStream> {
    let meta = read_sidecar(path)?;
    let bytes = fs::read(path)?;
    let stream = BitStream::from_bytes(meta.origin, &bytes, meta.length_bits)?;
    if let (Some(recorded), Some(actual)) = (meta.one_fraction, stream.meta().one_fraction) {
        if recorded != actual {
            return Err(crate::Error::Format(format!(
                "metadata one_fraction {recorded} does not match file content {actual}"
            )));
        }
    }
    Ok(stream)
}

/// Write a stream as ASCII '0'/'1' characters plus the sidecar.
pub fn write_ascii(stream: &BitStream, path: &Path) -> crate::Result<()> {
    fs::write(path, stream.to_ascii())?;
    write_sidecar(stream, path)
}

/// Read an ASCII stream; whitespace (newlines etc.) is ignored. Origin
/// comes from the sidecar when present, otherwise `Origin::File`.
pub fn read_ascii(path: &Path) -> crate::Result<BitStream> {
    let text = fs::read_to_string(path)?;
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut stream = BitStream::from_ascii(Origin::File, &cleaned)?;
    if let Ok(meta) = read_sidecar(path) {
        stream.set_origin(meta.origin);
        if meta.length_bits != stream.len() {
            return Err(crate::Error::Format(format!(
                "metadata declares {} bits but ASCII file holds {}",
                meta.length_bits,
                stream.len()
            )));
        }
    }
    Ok(stream)
}

/// File format selector shared by the CLI commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFileFormat {
    Packed,
    Ascii,
}

impl BitFileFormat {
    pub fn write(&self, stream: &BitStream, path: &Path) -> crate::Result<()> {
        match self {
            BitFileFormat::Packed => write_packed(stream, path),
            BitFileFormat::Ascii => write_ascii(stream, path),
        }
    }

    pub fn read(&self, path: &Path) -> crate::Result<BitStream> {
        match self {
            BitFileFormat::Packed => read_packed(path),
            BitFileFormat::Ascii => read_ascii(path),
        }
    }
}
