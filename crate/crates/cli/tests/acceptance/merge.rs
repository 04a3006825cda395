use kyc_core::merge::{merge_average, ParamMap, Tensor};
use kyc_core::scalar::Scalar;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::Verdict;

const TOL: f64 = 1e-7;
const TRIALS: usize = 500;

fn random_layout(rng: &mut StdRng) -> Vec<(String, Vec<usize>)> {
    (0..rng.gen_range(1..=6))
        .map(|i| {
            let rank = rng.gen_range(0..=3);
            (format!("layer{i}.w"), (0..rank).map(|_| rng.gen_range(1..=6)).collect())
        })
        .collect()
}

fn random_model<T: Scalar>(rng: &mut StdRng, layout: &[(String, Vec<usize>)]) -> ParamMap<T> {
    let mut m = ParamMap::new();
    for (name, shape) in layout {
        let n = shape.iter().product();
        let scale = 10f64.powi(rng.gen_range(-3..=2));
        let values = (0..n).map(|_| T::lit(rng.gen_range(-scale..scale))).collect();
        m.insert(name.clone(), Tensor::new(shape.clone(), values).unwrap());
    }
    m
}

/// Largest violation seen for each property, in absolute units.
#[derive(Default)]
struct Worst {
    idempotence: f64,
    permutation: f64,
    hull: f64,
}

fn check<T: Scalar>(rng: &mut StdRng, worst: &mut Worst) {
    let layout = random_layout(rng);
    let k = rng.gen_range(1..=5);
    let models: Vec<ParamMap<T>> = (0..k).map(|_| random_model(rng, &layout)).collect();
    let weights: Vec<T> = (0..k).map(|_| T::lit(rng.gen_range(0.01..1.0))).collect();

    let same = vec![models[0].clone(); k];
    let fixed = merge_average(&same, Some(&weights)).unwrap();
    for (name, _) in &layout {
        for (a, b) in fixed.get(name).unwrap().values.iter().zip(&models[0].get(name).unwrap().values) {
            worst.idempotence = worst.idempotence.max((a.as_f64() - b.as_f64()).abs());
        }
    }

    let merged = merge_average(&models, Some(&weights)).unwrap();
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let shuffled_models: Vec<_> = order.iter().map(|&i| models[i].clone()).collect();
    let shuffled_weights: Vec<_> = order.iter().map(|&i| weights[i]).collect();
    let permuted = merge_average(&shuffled_models, Some(&shuffled_weights)).unwrap();

    for (name, _) in &layout {
        let out = &merged.get(name).unwrap().values;
        for (e, (a, b)) in out.iter().zip(&permuted.get(name).unwrap().values).enumerate() {
            worst.permutation = worst.permutation.max((a.as_f64() - b.as_f64()).abs());
            let inputs = models.iter().map(|m| m.get(name).unwrap().values[e].as_f64());
            let lo = inputs.clone().fold(f64::INFINITY, f64::min);
            let hi = inputs.fold(f64::NEG_INFINITY, f64::max);
            let x = a.as_f64();
            worst.hull = worst.hull.max(lo - x).max(x - hi);
        }
    }
}

pub fn merge_properties() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x3e46e);
    let mut worst = Worst::default();
    for _ in 0..TRIALS {
        check::<f64>(&mut rng, &mut worst);
        check::<f32>(&mut rng, &mut worst);
    }
    let pass = worst.idempotence <= TOL && worst.permutation <= TOL && worst.hull <= TOL;
    Verdict::new(
        pass,
        format!(
            "{TRIALS} f64 + {TRIALS} f32 trials: max idempotence dev {:.2e}, max permutation dev {:.2e}, max hull excess {:.2e} (tol {TOL:e})",
            worst.idempotence, worst.permutation, worst.hull
        ),
    )
}
