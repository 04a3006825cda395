//! Left-to-right parser for grounding labels.
//!
//! Text outside special tokens is skipped. A reference wrapper must be
//! immediately followed by a geometry block; geometry blocks hold a JSON-style
//! integer array with arbitrary whitespace. Every failure carries the byte
//! offset where it was detected.

use std::fmt;

use thiserror::Error;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    InvalidUtf8,
    /// A start token whose matching end token never appears.
    UnclosedToken(&'static str),
    /// An end token with no open block.
    UnmatchedEnd(&'static str),
    /// A special token inside a reference or geometry block.
    MisplacedToken(&'static str),
    /// A reference wrapper not immediately followed by a geometry block.
    DanglingReference,
    Syntax { expected: &'static str },
    NonIntegerCoordinate,
    CoordinateOutOfRange(String),
    Invalid(Violation),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::InvalidUtf8 => f.write_str("invalid utf-8"),
            ParseErrorKind::UnclosedToken(t) => write!(f, "{t} is never closed"),
            ParseErrorKind::UnmatchedEnd(t) => write!(f, "{t} without a matching start token"),
            ParseErrorKind::MisplacedToken(t) => write!(f, "{t} is not allowed here"),
            ParseErrorKind::DanglingReference => {
                f.write_str("reference must be immediately followed by a geometry block")
            }
            ParseErrorKind::Syntax { expected } => write!(f, "expected {expected}"),
            ParseErrorKind::NonIntegerCoordinate => f.write_str("coordinate is not an integer"),
            ParseErrorKind::CoordinateOutOfRange(v) => write!(f, "coordinate {v} outside [0, 1000)"),
            ParseErrorKind::Invalid(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { offset, kind })
}

fn token_at(s: &str, i: usize) -> Option<&'static str> {
    let rest = s.as_bytes().get(i..)?;
    RESERVED_TOKENS.iter().copied().find(|t| rest.starts_with(t.as_bytes()))
}

fn next_token(s: &str, from: usize) -> Option<(usize, &'static str)> {
    let mut i = from;
    while let Some(off) = s.get(i..).and_then(|r| r.find("<|")) {
        let pos = i + off;
        if let Some(t) = token_at(s, pos) {
            return Some((pos, t));
        }
        i = pos + 2;
    }
    None
}

fn ref_kind_of(tok: &str) -> Option<RefKind> {
    match tok {
        OBJECT_REF_START => Some(RefKind::Object),
        OCR_TEXT_START => Some(RefKind::Ocr),
        _ => None,
    }
}

fn geometry_kind_of(tok: &str) -> Option<GeometryKind> {
    match tok {
        POINT_START => Some(GeometryKind::Points),
        BOX_START => Some(GeometryKind::Boxes),
        POLYGON_START => Some(GeometryKind::Polygons),
        _ => None,
    }
}

/// Parses every annotation in `s`, left to right.
pub fn parse(s: &str) -> Result<Vec<GroundingAnnotation>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Some((pos, tok)) = next_token(s, i) {
        if let Some(kind) = ref_kind_of(tok) {
            let (_, close) = kind.delimiters();
            let text_start = pos + tok.len();
            let (end_pos, end_tok) = match next_token(s, text_start) {
                Some(t) => t,
                None => return err(pos, ParseErrorKind::UnclosedToken(tok)),
            };
            if end_tok != close {
                return err(end_pos, ParseErrorKind::MisplacedToken(end_tok));
            }
            let reference = Reference {
                kind,
                text: s[text_start..end_pos].to_string(),
            };
            let after = end_pos + end_tok.len();
            match token_at(s, after).and_then(geometry_kind_of) {
                Some(g) => {
                    let (ann, next) = GeometryParser::new(s, after, g).run(Some(reference))?;
                    out.push(ann);
                    i = next;
                }
                None => return err(pos, ParseErrorKind::DanglingReference),
            }
        } else if let Some(g) = geometry_kind_of(tok) {
            let (ann, next) = GeometryParser::new(s, pos, g).run(None)?;
            out.push(ann);
            i = next;
        } else {
            return err(pos, ParseErrorKind::UnmatchedEnd(tok));
        }
    }
    Ok(out)
}

/// [`parse`] over raw bytes; invalid UTF-8 is reported at the first bad byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<Vec<GroundingAnnotation>, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse(s),
        Err(e) => err(e.valid_up_to(), ParseErrorKind::InvalidUtf8),
    }
}

struct GeometryParser<'a> {
    s: &'a str,
    bytes: &'a [u8],
    start: usize,
    pos: usize,
    kind: GeometryKind,
    open: &'static str,
    close: &'static str,
}

impl<'a> GeometryParser<'a> {
    fn new(s: &'a str, start: usize, kind: GeometryKind) -> Self {
        let (open, close) = kind.delimiters();
        Self {
            s,
            bytes: s.as_bytes(),
            start,
            pos: start + open.len(),
            kind,
            open,
            close,
        }
    }

    fn run(mut self, reference: Option<Reference>) -> Result<(GroundingAnnotation, usize), ParseError> {
        let mut item_offsets = Vec::new();
        let geometry = match self.kind {
            GeometryKind::Points => Geometry::Points(self.list(|p| {
                item_offsets.push(p.pos);
                p.pair()
            })?),
            GeometryKind::Boxes => Geometry::Boxes(self.list(|p| {
                item_offsets.push(p.pos);
                p.quad()
            })?),
            GeometryKind::Polygons => Geometry::Polygons(self.list(|p| {
                item_offsets.push(p.pos);
                p.list(|q| q.pair())
            })?),
        };
        self.skip_ws();
        if !self.bytes[self.pos..].starts_with(self.close.as_bytes()) {
            return self.unexpected("closing token");
        }
        let next = self.pos + self.close.len();
        let ann = GroundingAnnotation::new(reference, geometry).map_err(|v| {
            let offset = match &v {
                Violation::Item { index, .. } => item_offsets.get(*index).copied().unwrap_or(self.start),
                _ => self.start,
            };
            ParseError {
                offset,
                kind: ParseErrorKind::Invalid(v),
            }
        })?;
        Ok((ann, next))
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    /// Diagnoses whatever sits at the cursor when `expected` was wanted.
    fn unexpected<T>(&self, expected: &'static str) -> Result<T, ParseError> {
        if self.pos >= self.bytes.len() {
            return err(self.start, ParseErrorKind::UnclosedToken(self.open));
        }
        match token_at(self.s, self.pos) {
            Some(t) if t == self.close => err(self.pos, ParseErrorKind::Syntax { expected }),
            Some(t) => err(self.pos, ParseErrorKind::MisplacedToken(t)),
            None => err(self.pos, ParseErrorKind::Syntax { expected }),
        }
    }

    fn expect(&mut self, byte: u8, expected: &'static str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.unexpected(expected)
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.expect(b'[', "'['")?;
        let mut out = Vec::new();
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&b']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            self.skip_ws();
            out.push(item(self)?);
            self.skip_ws();
            match self.bytes.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.unexpected("',' or ']'"),
            }
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let begin = self.pos;
        let mut end = begin;
        if self.bytes.get(end) == Some(&b'-') {
            end += 1;
        }
        let digits_start = end;
        while self.bytes.get(end).is_some_and(u8::is_ascii_digit) {
            end += 1;
        }
        if end == digits_start {
            return self.unexpected("integer");
        }
        if matches!(self.bytes.get(end), Some(b'.' | b'e' | b'E')) {
            return err(begin, ParseErrorKind::NonIntegerCoordinate);
        }
        let text = &self.s[begin..end];
        self.pos = end;
        match text.parse::<i64>() {
            Ok(v) if (0..i64::from(COORD_LIMIT)).contains(&v) => Ok(v),
            _ => err(begin, ParseErrorKind::CoordinateOutOfRange(text.to_string())),
        }
    }

    fn pair(&mut self) -> Result<NormCoord, ParseError> {
        self.expect(b'[', "'['")?;
        let x = self.int()?;
        self.expect(b',', "','")?;
        let y = self.int()?;
        self.expect(b']', "']'")?;
        Ok(NormCoord::new(x, y).expect("range checked"))
    }

    fn quad(&mut self) -> Result<NormBox, ParseError> {
        self.expect(b'[', "'['")?;
        let x1 = self.int()?;
        self.expect(b',', "','")?;
        let y1 = self.int()?;
        self.expect(b',', "','")?;
        let x2 = self.int()?;
        self.expect(b',', "','")?;
        let y2 = self.int()?;
        self.expect(b']', "']'")?;
        Ok(NormBox {
            top_left: NormCoord::new(x1, y1).expect("range checked"),
            bottom_right: NormCoord::new(x2, y2).expect("range checked"),
        })
    }
}
