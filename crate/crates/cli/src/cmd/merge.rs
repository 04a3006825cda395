use anyhow::{bail, Result};

use kyc_core::merge::{merge_average, MergeError, ParamMap};

use crate::diag::{open_input, write_bytes, Diagnostics};
use crate::MergeArgs;

pub fn run(args: &MergeArgs) -> Result<usize> {
    if let Some(w) = &args.weights {
        if w.len() != args.inputs.len() {
            bail!("{} weights given for {} inputs", w.len(), args.inputs.len());
        }
    }
    let mut diag = Diagnostics::default();
    let mut models = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let mut r = std::io::BufReader::new(open_input(path)?);
        match ParamMap::<f64>::read_from(&mut r) {
            Ok(m) => models.push(m),
            Err(e) => diag.report(path, 0, None, e),
        }
    }
    if diag.count() > 0 {
        return Ok(diag.count());
    }
    match merge_average(&models, args.weights.as_deref()) {
        Ok(merged) => write_bytes(&args.out, &merged.to_bytes()?)?,
        Err(e @ MergeError::Weights(_)) => bail!(e),
        Err(e) => {
            let model = match &e {
                MergeError::NameMismatch { model, .. }
                | MergeError::ShapeMismatch { model, .. }
                | MergeError::NonFinite { model, .. } => *model,
                _ => 0,
            };
            diag.report(&args.inputs[model], 0, None, e);
        }
    }
    Ok(diag.count())
}
