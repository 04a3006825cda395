use std::fmt::Write;

use super::{Geometry, GroundingAnnotation, NormCoord};

fn push_pair(out: &mut String, c: NormCoord) {
    write!(out, "[{}, {}]", c.x(), c.y()).expect("writing to a String");
}

fn push_list<I, F>(out: &mut String, items: I, mut each: F)
where
    I: IntoIterator,
    F: FnMut(&mut String, I::Item),
{
    out.push('[');
    for (i, item) in items.into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        each(out, item);
    }
    out.push(']');
}

/// Canonical label string: optional reference wrapper immediately followed
/// by the geometry block, integers separated by `", "`.
pub fn serialize(ann: &GroundingAnnotation) -> String {
    let mut out = String::new();
    if let Some(r) = ann.reference() {
        let (open, close) = r.kind.delimiters();
        out.push_str(open);
        out.push_str(&r.text);
        out.push_str(close);
    }
    let (open, close) = ann.kind().delimiters();
    out.push_str(open);
    match ann.geometry() {
        Geometry::Points(points) => push_list(&mut out, points, |o, &p| push_pair(o, p)),
        Geometry::Boxes(boxes) => push_list(&mut out, boxes, |o, b| {
            write!(
                o,
                "[{}, {}, {}, {}]",
                b.top_left.x(),
                b.top_left.y(),
                b.bottom_right.x(),
                b.bottom_right.y()
            )
            .expect("writing to a String")
        }),
        Geometry::Polygons(rings) => push_list(&mut out, rings, |o, ring| {
            push_list(o, ring, |o, &p| push_pair(o, p))
        }),
    }
    out.push_str(close);
    out
}
