//! Browser bindings: Weierstrass preparation, growth curves of module
//! layers and seeded batches of the group identity for complexes.
//!
//! Every entry point takes and returns JSON text.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use iwalab::schema;
use iwalab::{random_complex, ComplexParams, Family, IwasawaElement, PGroup, PrecisionContext};

/// Largest seed batch accepted from the page.
const MAX_BATCH: u64 = 1000;

fn context(p: u32, n: u32, m: u32) -> iwalab::Result<PrecisionContext> {
    PrecisionContext::new(p as u64, n, m as usize)
}

pub fn prepare_json(element: &str, p: u32, n: u32, m: u32) -> iwalab::Result<Value> {
    let ctx = context(p, n, m)?;
    let coeffs = schema::parse_element(element)?;
    let prep = IwasawaElement::series(&ctx, &coeffs).prepare()?;
    let head = |x: &IwasawaElement, len: usize| {
        let mut c = x.coeffs()[..len.min(x.coeffs().len())].to_vec();
        while c.len() > 1 && c.last() == Some(&0) {
            c.pop();
        }
        c
    };
    Ok(json!({
        "mu": prep.mu,
        "lambda": prep.lambda,
        "distinguished": head(&prep.distinguished, prep.lambda + 1),
        "unit": head(&prep.unit, ctx.t_precision()),
    }))
}

/// `log_p |M/ω_n M|` for each layer, plus the fitted invariants and the
/// determinant route when it applies.
pub fn growth_curve_json(module: &str, p: u32, n: u32, m: u32, lo: u32, hi: u32) -> iwalab::Result<Value> {
    let ctx = context(p, n, m)?;
    let module = schema::parse_module(module, &ctx)?.lambda_module();
    let growth = module.growth_invariants((lo, hi), iwalab::module::DEFAULT_MATRIX_BUDGET)?;
    let exact = module.exact_invariants().ok();
    Ok(json!({
        "layers": growth.layers,
        "lambda": growth.lambda,
        "mu": growth.mu,
        "nu": growth.nu,
        "determinant": exact.map(|e| json!({ "lambda": e.lambda, "mu": e.mu })),
    }))
}

fn family(name: &str) -> iwalab::Result<Family> {
    match name {
        "mu-zero" => Ok(Family::MuZero),
        "mu-positive" => Ok(Family::MuPositive),
        "unconstrained" => Ok(Family::Unconstrained),
        other => Err(iwalab::Error::Schema(format!(
            "unknown family {other:?}, expected mu-zero, mu-positive or unconstrained"
        ))),
    }
}

/// Runs the identity check on seeds `start..start + count`.
pub fn verify_kida_json(group: &str, fam: &str, start: u64, count: u64, p: u32, n: u32) -> iwalab::Result<Value> {
    let ctx = context(p, n, 32)?;
    let g = PGroup::from_name(group, p as u64)?;
    let fam = family(fam)?;
    let mut trials = Vec::new();
    let (mut holds, mut violations, mut skipped) = (0, 0, 0);
    for seed in start..start + count.min(MAX_BATCH) {
        let c = random_complex(&g, &ctx, ComplexParams::new(fam, 1 + (seed % 4) as usize), seed);
        let row = match c.verify_kida() {
            Ok(k) => {
                violations += k.violation as usize;
                holds += (k.identity_holds == Some(true)) as usize;
                json!({ "seed": seed, "ranks": c.ranks(), "lambdaC": k.lambda_c, "lambdaCbar": k.lambda_cbar,
                        "muZero": k.mu_zero_c, "violation": k.violation })
            }
            Err(e) => {
                skipped += 1;
                json!({ "seed": seed, "ranks": c.ranks(), "error": e.to_string() })
            }
        };
        trials.push(row);
    }
    Ok(
        json!({ "groupOrder": g.order(), "holds": holds, "violations": violations, "skipped": skipped, "trials": trials }),
    )
}

fn to_js(r: iwalab::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn prepare(element: &str, p: u32, n: u32, m: u32) -> Result<String, JsError> {
    to_js(prepare_json(element, p, n, m))
}

#[wasm_bindgen(js_name = growthCurve)]
pub fn growth_curve(module: &str, p: u32, n: u32, m: u32, lo: u32, hi: u32) -> Result<String, JsError> {
    to_js(growth_curve_json(module, p, n, m, lo, hi))
}

#[wasm_bindgen(js_name = verifyKida)]
pub fn verify_kida(group: &str, family: &str, start: u64, count: u64, p: u32, n: u32) -> Result<String, JsError> {
    to_js(verify_kida_json(group, family, start, count, p, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preparation() {
        let v = prepare_json("[3, 1]", 3, 8, 32).unwrap();
        assert_eq!((v["mu"].as_u64(), v["lambda"].as_u64()), (Some(0), Some(1)));
        assert!(prepare_json("[3, 1", 3, 8, 32).is_err());
    }

    #[test]
    fn growth() {
        let v = growth_curve_json(r#"{"generators": 1, "relations": [[[3, 1]]]}"#, 3, 8, 32, 0, 4).unwrap();
        assert_eq!(v["lambda"], 1);
        assert_eq!(v["determinant"]["lambda"], 1);
        assert_eq!(v["layers"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn kida_batch() {
        let v = verify_kida_json("Z/3", "mu-zero", 0, 20, 3, 8).unwrap();
        assert_eq!((v["holds"].as_u64(), v["violations"].as_u64()), (Some(20), Some(0)));
        assert!(verify_kida_json("Z/3", "sideways", 0, 1, 3, 8).is_err());
    }
}
