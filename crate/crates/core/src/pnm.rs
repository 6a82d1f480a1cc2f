//! Binary PGM (P5) and PPM (P6) readers/writers, maxval 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PnmImage {
    pub width: u32,
    pub height: u32,
    /// 1 for PGM, 3 for PPM.
    pub channels: u8,
    pub pixels: Vec<u8>,
}

/// Parse a binary PGM/PPM from raw bytes.
pub fn decode(bytes: &[u8]) -> Result<PnmImage> {
    let mut cursor = 0usize;
    let magic = take_token(bytes, &mut cursor)?;
    let channels = match magic.as_str() {
        "P5" => 1u8,
        "P6" => 3u8,
        other => {
            return Err(parse_err(
                bytes,
                0,
                format!("unsupported magic `{other}`, expected P5 or P6"),
            ))
        }
    };
    let width = take_number(bytes, &mut cursor)?;
    let height = take_number(bytes, &mut cursor)?;
    let maxval = take_number(bytes, &mut cursor)?;
    if maxval != 255 {
        return Err(parse_err(bytes, cursor, format!("maxval {maxval} not supported, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(parse_err(bytes, cursor, "zero image dimension".to_string()));
    }
    // Exactly one whitespace byte separates the header from the samples.
    if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
        return Err(parse_err(bytes, cursor, "missing whitespace before samples".to_string()));
    }
    cursor += 1;
    let expected = width as usize * height as usize * channels as usize;
    let data = &bytes[cursor..];
    if data.len() < expected {
        return Err(parse_err(
            bytes,
            cursor,
            format!("truncated sample data: got {} bytes, expected {expected}", data.len()),
        ));
    }
    Ok(PnmImage {
        width,
        height,
        channels,
        pixels: data[..expected].to_vec(),
    })
}

pub fn read(path: &Path) -> Result<PnmImage> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}

/// Encode to binary PGM (1 channel) or PPM (3 channels).
pub fn encode(width: u32, height: u32, channels: u8, pixels: &[u8]) -> Result<Vec<u8>> {
    let magic = match channels {
        1 => "P5",
        3 => "P6",
        other => return Err(Error::validation(format!("cannot encode {other}-channel raster"))),
    };
    let expected = width as usize * height as usize * channels as usize;
    if pixels.len() != expected {
        return Err(Error::validation(format!(
            "pixel buffer has {} bytes, expected {expected}",
            pixels.len()
        )));
    }
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

pub fn write(path: &Path, width: u32, height: u32, channels: u8, pixels: &[u8]) -> Result<()> {
    let bytes = encode(width, height, channels, pixels)?;
    fs::write(path, bytes)?;
    Ok(())
}

fn parse_err(bytes: &[u8], offset: usize, msg: String) -> Error {
    // Report the 1-based line/column of the offending header byte.
    let mut line = 1;
    let mut column = 1;
    for &b in bytes.iter().take(offset) {
        if b == b'\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Error::Parse { line, column, msg }
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn take_token(bytes: &[u8], cursor: &mut usize) -> Result<String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return Err(parse_err(bytes, *cursor, "unexpected end of header".to_string()));
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    String::from_utf8(bytes[start..*cursor].to_vec())
        .map_err(|_| parse_err(bytes, start, "non-UTF-8 header token".to_string()))
}

fn take_number(bytes: &[u8], cursor: &mut usize) -> Result<u32> {
    let start = *cursor;
    let tok = take_token(bytes, cursor)?;
    tok.parse::<u32>()
        .map_err(|_| parse_err(bytes, start, format!("expected unsigned integer, got `{tok}`")))
}
