//! Little-endian helpers shared by the binary container formats.

use std::io::{self, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("stream truncated while reading {what}")]
    Truncated { what: &'static str },
    #[error("invalid utf-8 in {what}")]
    Utf8 { what: &'static str },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(io::Error),
}

fn map_eof(err: io::Error, what: &'static str) -> FormatError {
    if err.kind() == io::ErrorKind::UnexpectedEof {
        FormatError::Truncated { what }
    } else {
        FormatError::Io(err)
    }
}

pub(crate) fn read_array<const N: usize, R: Read>(
    r: &mut R,
    what: &'static str,
) -> Result<[u8; N], FormatError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| map_eof(e, what))?;
    Ok(buf)
}

pub(crate) fn expect_magic<R: Read>(r: &mut R, magic: &'static str) -> Result<(), FormatError> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf).map_err(|e| map_eof(e, "magic"))?;
    if buf != magic.as_bytes() {
        return Err(FormatError::BadMagic { expected: magic });
    }
    Ok(())
}

pub(crate) fn read_u8<R: Read>(r: &mut R, what: &'static str) -> Result<u8, FormatError> {
    Ok(read_array::<1, _>(r, what)?[0])
}

pub(crate) fn read_u16<R: Read>(r: &mut R, what: &'static str) -> Result<u16, FormatError> {
    read_array(r, what).map(u16::from_le_bytes)
}

pub(crate) fn read_u32<R: Read>(r: &mut R, what: &'static str) -> Result<u32, FormatError> {
    read_array(r, what).map(u32::from_le_bytes)
}

pub(crate) fn read_u64<R: Read>(r: &mut R, what: &'static str) -> Result<u64, FormatError> {
    read_array(r, what).map(u64::from_le_bytes)
}

pub(crate) fn read_f32<R: Read>(r: &mut R, what: &'static str) -> Result<f32, FormatError> {
    read_array(r, what).map(f32::from_le_bytes)
}

/// Reads a `u16` length-prefixed UTF-8 string.
pub(crate) fn read_str16<R: Read>(r: &mut R, what: &'static str) -> Result<String, FormatError> {
    let len = read_u16(r, what)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(|e| map_eof(e, what))?;
    String::from_utf8(buf).map_err(|_| FormatError::Utf8 { what })
}

pub(crate) fn write_str16<W: Write>(w: &mut W, s: &str) -> Result<(), FormatError> {
    let len = u16::try_from(s.len())
        .map_err(|_| FormatError::Invalid(format!("string longer than 65535 bytes: {s:.32}...")))?;
    w.write_all(&len.to_le_bytes()).map_err(FormatError::Io)?;
    w.write_all(s.as_bytes()).map_err(FormatError::Io)
}

pub(crate) fn write_all<W: Write>(w: &mut W, bytes: &[u8]) -> Result<(), FormatError> {
    w.write_all(bytes).map_err(FormatError::Io)
}

/// Fails with `Invalid` if the reader still has bytes.
pub(crate) fn expect_eof<R: Read>(r: &mut R) -> Result<(), FormatError> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => Ok(()),
        Ok(_) => Err(FormatError::Invalid("trailing bytes after payload".into())),
        Err(e) => Err(FormatError::Io(e)),
    }
}
