use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use kyc_core::grounding::{parse, serialize, AnnotationRecord, GroundingAnnotation, PixelRecord};

use crate::diag::{read_jsonl, write_jsonl, Diagnostics};
use crate::GroundingCmd;

#[derive(Serialize)]
struct LabelLine<'a> {
    sample_id: &'a str,
    label: String,
}

/// A line with `coords` is a structured record (its optional `label` must
/// agree); otherwise `label` is parsed as a label string.
fn check_line(v: &Value) -> Result<Vec<GroundingAnnotation>, String> {
    let label = v.get("label").and_then(Value::as_str);
    if v.get("coords").is_some() {
        let rec: AnnotationRecord = serde_json::from_value(v.clone()).map_err(|e| format!("malformed record: {e}"))?;
        let ann = rec.to_annotation().map_err(|e| e.to_string())?;
        if let Some(l) = label {
            if parse(l).map_err(|e| format!("label: {e}"))? != vec![ann.clone()] {
                return Err("label disagrees with coords".into());
            }
        }
        return Ok(vec![ann]);
    }
    let l = label.ok_or("record has neither coords nor a label string")?;
    let anns = parse(l).map_err(|e| e.to_string())?;
    if anns.is_empty() {
        return Err("label holds no annotation".into());
    }
    Ok(anns)
}

pub fn run(cmd: &GroundingCmd) -> Result<usize> {
    let mut diag = Diagnostics::default();
    match cmd {
        GroundingCmd::Validate { input } => {
            let lines = read_jsonl::<Value>(input, &mut diag)?;
            let mut annotations = 0;
            for l in &lines {
                let id = l.value.get("sample_id").and_then(Value::as_str);
                match check_line(&l.value) {
                    Ok(a) => annotations += a.len(),
                    Err(msg) => diag.report(input, l.line, id, msg),
                }
            }
            println!("{} records, {annotations} annotations, {} invalid", lines.len(), diag.count());
        }
        GroundingCmd::Normalize { input, out } => {
            let mut rows = Vec::new();
            for l in read_jsonl::<PixelRecord>(input, &mut diag)? {
                match l.value.normalize() {
                    Ok(rec) => rows.push(rec),
                    Err(e) => diag.report(input, l.line, Some(&l.value.sample_id), e),
                }
            }
            write_jsonl(out, &rows)?;
        }
        GroundingCmd::Emit { input, out } => {
            let lines = read_jsonl::<AnnotationRecord>(input, &mut diag)?;
            let mut rows = Vec::new();
            for l in &lines {
                match l.value.to_annotation() {
                    Ok(a) => rows.push(LabelLine { sample_id: &l.value.sample_id, label: serialize(&a) }),
                    Err(e) => diag.report(input, l.line, Some(&l.value.sample_id), e),
                }
            }
            write_jsonl(out, &rows)?;
        }
    }
    Ok(diag.count())
}
