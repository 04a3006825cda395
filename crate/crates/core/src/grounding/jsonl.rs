//! JSONL record shapes for annotation files.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    normalize, serialize, Geometry, GeometryKind, GroundingAnnotation, GroundingError, NormBox, NormCoord,
    PixelGeometry, PixelShape, RefKind, Reference,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefRecord {
    pub kind: String,
    pub text: String,
}

/// `{"sample_id", "ref", "kind", "coords", "label"}` where `label` is the
/// serialized annotation string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub sample_id: String,
    #[serde(rename = "ref")]
    pub reference: Option<RefRecord>,
    pub kind: String,
    pub coords: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Pixel-space input to normalization: like [`AnnotationRecord`] plus image
/// `width` and `height`, with real-valued coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelRecord {
    pub sample_id: String,
    pub width: f64,
    pub height: f64,
    #[serde(rename = "ref")]
    pub reference: Option<RefRecord>,
    pub kind: String,
    pub coords: Value,
}

fn bad(msg: impl Into<String>) -> GroundingError {
    GroundingError::Record(msg.into())
}

fn reference_from(r: &Option<RefRecord>) -> Result<Option<Reference>, GroundingError> {
    r.as_ref()
        .map(|r| {
            let kind = match r.kind.as_str() {
                "object" => RefKind::Object,
                "ocr" => RefKind::Ocr,
                other => return Err(bad(format!("unknown ref kind {other:?}"))),
            };
            Ok(Reference {
                kind,
                text: r.text.clone(),
            })
        })
        .transpose()
}

fn kind_from(s: &str) -> Result<GeometryKind, GroundingError> {
    GeometryKind::parse_name(s).ok_or_else(|| bad(format!("unknown kind {s:?}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, GroundingError> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

fn tuple<const N: usize>(v: &Value) -> Result<[f64; N], GroundingError> {
    let a = array(v, "coordinate tuple")?;
    if a.len() != N {
        return Err(bad(format!("expected {N} numbers, got {}", a.len())));
    }
    let mut out = [0.0; N];
    for (o, x) in out.iter_mut().zip(a) {
        *o = x.as_f64().ok_or_else(|| bad(format!("{x} is not a number")))?;
    }
    Ok(out)
}

fn int_tuple<const N: usize>(v: &Value) -> Result<[i64; N], GroundingError> {
    let a = array(v, "coordinate tuple")?;
    if a.len() != N {
        return Err(bad(format!("expected {N} integers, got {}", a.len())));
    }
    let mut out = [0; N];
    for (o, x) in out.iter_mut().zip(a) {
        *o = x.as_i64().ok_or_else(|| bad(format!("{x} is not an integer")))?;
    }
    Ok(out)
}

fn coord([x, y]: [i64; 2]) -> Result<NormCoord, GroundingError> {
    Ok(NormCoord::new(x, y)?)
}

impl AnnotationRecord {
    pub fn from_annotation(sample_id: impl Into<String>, ann: &GroundingAnnotation) -> Self {
        let pair = |c: &NormCoord| json!([c.x(), c.y()]);
        let coords = match ann.geometry() {
            Geometry::Points(ps) => Value::Array(ps.iter().map(pair).collect()),
            Geometry::Boxes(bs) => Value::Array(
                bs.iter()
                    .map(|b| json!([b.top_left.x(), b.top_left.y(), b.bottom_right.x(), b.bottom_right.y()]))
                    .collect(),
            ),
            Geometry::Polygons(rs) => {
                Value::Array(rs.iter().map(|r| Value::Array(r.iter().map(pair).collect())).collect())
            }
        };
        Self {
            sample_id: sample_id.into(),
            reference: ann.reference().map(|r| RefRecord {
                kind: r.kind.as_str().to_string(),
                text: r.text.clone(),
            }),
            kind: ann.kind().as_str().to_string(),
            coords,
            label: Some(serialize(ann)),
        }
    }

    /// Builds the annotation from the structured fields, ignoring `label`.
    pub fn to_annotation(&self) -> Result<GroundingAnnotation, GroundingError> {
        let reference = reference_from(&self.reference)?;
        let items = array(&self.coords, "coords")?;
        let geometry = match kind_from(&self.kind)? {
            GeometryKind::Points => {
                Geometry::Points(items.iter().map(|v| coord(int_tuple(v)?)).collect::<Result<_, _>>()?)
            }
            GeometryKind::Boxes => Geometry::Boxes(
                items
                    .iter()
                    .map(|v| {
                        let [x1, y1, x2, y2] = int_tuple(v)?;
                        Ok(NormBox {
                            top_left: coord([x1, y1])?,
                            bottom_right: coord([x2, y2])?,
                        })
                    })
                    .collect::<Result<_, GroundingError>>()?,
            ),
            GeometryKind::Polygons => Geometry::Polygons(
                items
                    .iter()
                    .map(|ring| {
                        array(ring, "polygon ring")?
                            .iter()
                            .map(|v| coord(int_tuple(v)?))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        Ok(GroundingAnnotation::new(reference, geometry)?)
    }
}

impl PixelRecord {
    pub fn to_geometry(&self) -> Result<PixelGeometry<f64>, GroundingError> {
        let items = array(&self.coords, "coords")?;
        let pt = |v: &Value| tuple::<2>(v).map(|[x, y]| (x, y));
        let shape = match kind_from(&self.kind)? {
            GeometryKind::Points => PixelShape::Points(items.iter().map(pt).collect::<Result<_, _>>()?),
            GeometryKind::Boxes => PixelShape::Boxes(
                items
                    .iter()
                    .map(|v| tuple::<4>(v).map(|[a, b, c, d]| (a, b, c, d)))
                    .collect::<Result<_, _>>()?,
            ),
            GeometryKind::Polygons => PixelShape::Polygons(
                items
                    .iter()
                    .map(|ring| array(ring, "polygon ring")?.iter().map(pt).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<_, _>>()?,
            ),
        };
        Ok(PixelGeometry {
            width: self.width,
            height: self.height,
            reference: reference_from(&self.reference)?,
            shape,
        })
    }

    pub fn normalize(&self) -> Result<AnnotationRecord, GroundingError> {
        let ann = normalize(&self.to_geometry()?)?;
        Ok(AnnotationRecord::from_annotation(self.sample_id.clone(), &ann))
    }
}
