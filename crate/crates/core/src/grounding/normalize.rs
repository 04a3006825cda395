use super::{Geometry, GroundingAnnotation, GroundingError, NormBox, NormCoord, Reference, COORD_LIMIT};
use crate::scalar::Scalar;

/// Pixel-space shapes prior to normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum PixelShape<T> {
    Points(Vec<(T, T)>),
    /// `(x1, y1, x2, y2)`: top-left then bottom-right.
    Boxes(Vec<(T, T, T, T)>),
    Polygons(Vec<Vec<(T, T)>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelGeometry<T> {
    pub width: T,
    pub height: T,
    pub reference: Option<Reference>,
    pub shape: PixelShape<T>,
}

/// `min(floor(v * 1000 / extent), 999)` for `v` in `[0, extent]`.
pub fn normalize_coord<T: Scalar>(v: T, extent: T) -> Result<u16, GroundingError> {
    if !extent.is_finite() || extent < T::one() {
        return Err(GroundingError::Extent(extent.as_f64()));
    }
    if !v.is_finite() || v < T::zero() || v > extent {
        return Err(GroundingError::Range {
            value: v.as_f64(),
            extent: extent.as_f64(),
        });
    }
    let limit = T::lit(f64::from(COORD_LIMIT));
    let scaled = (v * limit / extent).floor();
    let max = COORD_LIMIT - 1;
    Ok(scaled.to_u16().map_or(max, |n| n.min(max)))
}

/// Converts pixel geometry to a validated annotation with integer
/// coordinates in `[0, 1000)`. Invariants are re-checked after rounding;
/// boxes collapsed to zero width or height are kept.
pub fn normalize<T: Scalar>(geom: &PixelGeometry<T>) -> Result<GroundingAnnotation, GroundingError> {
    let pt = |(x, y): (T, T)| -> Result<NormCoord, GroundingError> {
        let nx = normalize_coord(x, geom.width)?;
        let ny = normalize_coord(y, geom.height)?;
        Ok(NormCoord::new(i64::from(nx), i64::from(ny)).expect("normalized into range"))
    };
    let geometry = match &geom.shape {
        PixelShape::Points(ps) => Geometry::Points(ps.iter().map(|&p| pt(p)).collect::<Result<_, _>>()?),
        PixelShape::Boxes(bs) => Geometry::Boxes(
            bs.iter()
                .map(|&(x1, y1, x2, y2)| {
                    Ok(NormBox {
                        top_left: pt((x1, y1))?,
                        bottom_right: pt((x2, y2))?,
                    })
                })
                .collect::<Result<_, GroundingError>>()?,
        ),
        PixelShape::Polygons(rings) => Geometry::Polygons(
            rings
                .iter()
                .map(|ring| ring.iter().map(|&p| pt(p)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?,
        ),
    };
    Ok(GroundingAnnotation::new(geom.reference.clone(), geometry)?)
}
