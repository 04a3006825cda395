//! Grounding label grammar: points, boxes and polygons with an optional
//! object or OCR reference, coordinates normalized to integers in `[0, 1000)`.
//!
//! ```text
//! <|object_ref_start|>cat<|object_ref_end|><|box_start|>[[10, 20, 30, 40]]<|box_end|>
//! ```

mod jsonl;
mod normalize;
mod parse;
mod serialize;

use std::fmt;

use thiserror::Error;

pub use jsonl::{AnnotationRecord, PixelRecord, RefRecord};
pub use normalize::{normalize, normalize_coord, PixelGeometry, PixelShape};
pub use parse::{parse, parse_bytes, ParseError, ParseErrorKind};
pub use serialize::serialize;

/// Exclusive upper bound of normalized coordinates.
pub const COORD_LIMIT: u16 = 1000;

pub const OBJECT_REF_START: &str = "<|object_ref_start|>";
pub const OBJECT_REF_END: &str = "<|object_ref_end|>";
pub const OCR_TEXT_START: &str = "<|ocr_text_start|>";
pub const OCR_TEXT_END: &str = "<|ocr_text_end|>";
pub const POINT_START: &str = "<|point_start|>";
pub const POINT_END: &str = "<|point_end|>";
pub const BOX_START: &str = "<|box_start|>";
pub const BOX_END: &str = "<|box_end|>";
pub const POLYGON_START: &str = "<|polygon_start|>";
pub const POLYGON_END: &str = "<|polygon_end|>";

/// Every reserved special token; none may appear inside reference text.
pub const RESERVED_TOKENS: [&str; 10] = [
    OBJECT_REF_START,
    OBJECT_REF_END,
    OCR_TEXT_START,
    OCR_TEXT_END,
    POINT_START,
    POINT_END,
    BOX_START,
    BOX_END,
    POLYGON_START,
    POLYGON_END,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormCoord {
    x: u16,
    y: u16,
}

impl NormCoord {
    pub fn new(x: i64, y: i64) -> Result<Self, Violation> {
        let limit = i64::from(COORD_LIMIT);
        if !(0..limit).contains(&x) || !(0..limit).contains(&y) {
            return Err(Violation::CoordOutOfRange { x, y });
        }
        Ok(Self {
            x: x as u16,
            y: y as u16,
        })
    }

    pub fn x(self) -> u16 {
        self.x
    }

    pub fn y(self) -> u16 {
        self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormBox {
    pub top_left: NormCoord,
    pub bottom_right: NormCoord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefKind {
    Object,
    Ocr,
}

impl RefKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RefKind::Object => "object",
            RefKind::Ocr => "ocr",
        }
    }

    fn delimiters(self) -> (&'static str, &'static str) {
        match self {
            RefKind::Object => (OBJECT_REF_START, OBJECT_REF_END),
            RefKind::Ocr => (OCR_TEXT_START, OCR_TEXT_END),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reference {
    pub kind: RefKind,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Points,
    Boxes,
    Polygons,
}

impl GeometryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::Points => "points",
            GeometryKind::Boxes => "boxes",
            GeometryKind::Polygons => "polygons",
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        match s {
            "points" => Some(GeometryKind::Points),
            "boxes" => Some(GeometryKind::Boxes),
            "polygons" => Some(GeometryKind::Polygons),
            _ => None,
        }
    }

    fn delimiters(self) -> (&'static str, &'static str) {
        match self {
            GeometryKind::Points => (POINT_START, POINT_END),
            GeometryKind::Boxes => (BOX_START, BOX_END),
            GeometryKind::Polygons => (POLYGON_START, POLYGON_END),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    Points(Vec<NormCoord>),
    Boxes(Vec<NormBox>),
    Polygons(Vec<Vec<NormCoord>>),
}

impl Geometry {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Points(_) => GeometryKind::Points,
            Geometry::Boxes(_) => GeometryKind::Boxes,
            Geometry::Polygons(_) => GeometryKind::Polygons,
        }
    }
}

/// A validated grounding annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundingAnnotation {
    reference: Option<Reference>,
    geometry: Geometry,
}

impl GroundingAnnotation {
    pub fn new(reference: Option<Reference>, geometry: Geometry) -> Result<Self, Violation> {
        if let Some(r) = &reference {
            if let Some(tok) = RESERVED_TOKENS.iter().find(|t| r.text.contains(**t)) {
                return Err(Violation::ReservedToken(tok));
            }
        }
        match &geometry {
            Geometry::Points(p) if p.is_empty() => return Err(Violation::EmptyPayload),
            Geometry::Boxes(b) if b.is_empty() => return Err(Violation::EmptyPayload),
            Geometry::Polygons(p) if p.is_empty() => return Err(Violation::EmptyPayload),
            Geometry::Boxes(boxes) => {
                for (i, b) in boxes.iter().enumerate() {
                    check_box(b).map_err(|v| v.at_item(i))?;
                }
            }
            Geometry::Polygons(rings) => {
                for (i, ring) in rings.iter().enumerate() {
                    check_ring(ring).map_err(|v| v.at_item(i))?;
                }
            }
            Geometry::Points(_) => {}
        }
        Ok(Self { reference, geometry })
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn kind(&self) -> GeometryKind {
        self.geometry.kind()
    }
}

pub(crate) fn check_box(b: &NormBox) -> Result<(), Violation> {
    if b.top_left.x > b.bottom_right.x || b.top_left.y > b.bottom_right.y {
        return Err(Violation::BoxOrder {
            top_left: b.top_left,
            bottom_right: b.bottom_right,
        });
    }
    Ok(())
}

pub(crate) fn check_ring(ring: &[NormCoord]) -> Result<(), Violation> {
    match shoelace(ring)? {
        s if s > 0 => Ok(()),
        0 => Err(Violation::DegeneratePolygon),
        _ => Err(Violation::CounterClockwise),
    }
}

/// Twice the signed area, `sum(x_i * y_{i+1} - x_{i+1} * y_i)`; positive for
/// clockwise rings when y grows downward.
pub fn shoelace(ring: &[NormCoord]) -> Result<i64, Violation> {
    if ring.len() < 3 {
        return Err(Violation::TooFewVertices(ring.len()));
    }
    let n = ring.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            i64::from(a.x) * i64::from(b.y) - i64::from(b.x) * i64::from(a.y)
        })
        .sum())
}

pub fn is_clockwise(ring: &[NormCoord]) -> Result<bool, Violation> {
    shoelace(ring).map(|s| s > 0)
}

/// An annotation invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("coordinate ({x}, {y}) outside [0, 1000)")]
    CoordOutOfRange { x: i64, y: i64 },
    #[error("empty coordinate list")]
    EmptyPayload,
    #[error("box corners out of order: {top_left} / {bottom_right}")]
    BoxOrder {
        top_left: NormCoord,
        bottom_right: NormCoord,
    },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertices are counter-clockwise")]
    CounterClockwise,
    #[error("polygon has zero area")]
    DegeneratePolygon,
    #[error("reference text contains reserved token {0}")]
    ReservedToken(&'static str),
    #[error("item {index}: {inner}")]
    Item { index: usize, inner: Box<Violation> },
}

impl Violation {
    fn at_item(self, index: usize) -> Self {
        Violation::Item {
            index,
            inner: Box::new(self),
        }
    }

    /// The innermost violation, stripping item positions.
    pub fn root(&self) -> &Violation {
        match self {
            Violation::Item { inner, .. } => inner.root(),
            v => v,
        }
    }
}

impl fmt::Display for NormCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

#[derive(Debug, Error)]
pub enum GroundingError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("coordinate {value} outside [0, {extent}]")]
    Range { value: f64, extent: f64 },
    #[error("image extent must be finite and >= 1, got {0}")]
    Extent(f64),
    #[error("record: {0}")]
    Record(String),
}
