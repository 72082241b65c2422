use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use iwalab::schema::{self, ModuleData};
use iwalab::{
    kida, lambda_by_reduction, random_complex, ComplexParams, Error, InvariantReport, IwasawaElement, LambdaModule,
    PGroup, PrecisionContext,
};

use crate::report::{self, RunReport, EXIT_VIOLATION};
use crate::{Global, KidaArgs, MethodFlag};

/// Reads the input and opens a report keyed on command, flags and bytes.
fn start(
    command: &str,
    g: &Global,
    file: &Path,
    extra: &str,
) -> Result<(RunReport, String, PrecisionContext), Box<RunReport>> {
    let read = std::fs::read(file);
    let bytes = read.as_deref().unwrap_or(&[]);
    let mut rep = RunReport::new(
        command,
        report::digest(&[command.as_bytes(), g.fingerprint().as_bytes(), extra.as_bytes(), bytes]),
    );
    let text = match read {
        Ok(b) => match String::from_utf8(b) {
            Ok(t) => t,
            Err(_) => {
                rep.fail(&Error::Schema(format!("{}: not UTF-8", file.display())));
                return Err(Box::new(rep));
            }
        },
        Err(e) => {
            rep.errors.push(format!("{}: {e}", file.display()));
            rep.raise(report::EXIT_OTHER);
            return Err(Box::new(rep));
        }
    };
    match g.context() {
        Ok(ctx) => Ok((rep, text, ctx)),
        Err(e) => {
            rep.fail(&e);
            Err(Box::new(rep))
        }
    }
}

/// Coefficients below `len`, without trailing zeros.
fn residues(x: &IwasawaElement, len: usize) -> Vec<u64> {
    let mut c = x.coeffs()[..len.min(x.coeffs().len())].to_vec();
    while c.len() > 1 && c.last() == Some(&0) {
        c.pop();
    }
    c
}

pub fn prepare(g: &Global, file: &Path) -> RunReport {
    let (mut rep, text, ctx) = match start("prepare", g, file, "") {
        Ok(x) => x,
        Err(rep) => return *rep,
    };
    let run = || -> iwalab::Result<Value> {
        let coeffs = schema::parse_element(&text)?;
        if coeffs.len() > ctx.t_precision() {
            return Err(Error::Schema(format!(
                "{} coefficients exceed T-precision {}",
                coeffs.len(),
                ctx.t_precision()
            )));
        }
        let f = IwasawaElement::series(&ctx, &coeffs);
        let prep = f.prepare()?;
        Ok(json!({
            "mu": prep.mu,
            "lambda": prep.lambda,
            "distinguished": residues(&prep.distinguished, prep.lambda + 1),
            "unit": residues(&prep.unit, ctx.t_precision()),
        }))
    };
    match run() {
        Ok(v) => rep.results = v,
        Err(e) => rep.fail(&e),
    }
    rep
}

fn pair(r: &InvariantReport) -> (Option<usize>, Option<u32>) {
    (r.lambda, r.mu)
}

fn invariants_of(
    g: &Global,
    m: &LambdaModule,
    method: MethodFlag,
    rep: &mut RunReport,
) -> BTreeMap<&'static str, Value> {
    let mut out = BTreeMap::new();
    let exact = (method != MethodFlag::Growth).then(|| m.exact_invariants());
    let growth = (method != MethodFlag::Determinant).then(|| m.growth_invariants(g.n_range, g.matrix_budget));
    for (key, r) in [("determinant", &exact), ("growth", &growth)] {
        match r {
            Some(Ok(x)) => {
                out.insert(key, serde_json::to_value(x).unwrap());
            }
            Some(Err(e)) => {
                out.insert(key, json!({ "error": e.to_string() }));
                if method == MethodFlag::Both {
                    rep.warnings.push(format!("{key} route: {e}"));
                } else {
                    rep.fail(e);
                }
            }
            None => {}
        }
    }
    if let (Some(Ok(a)), Some(Ok(b))) = (&exact, &growth) {
        let agree = pair(a) == pair(b);
        out.insert("crossCheck", json!(if agree { "pass" } else { "fail" }));
        if !agree {
            rep.fail(&Error::CrossCheckFailed(format!("determinant {:?} vs growth {:?}", pair(a), pair(b))));
            rep.raise(EXIT_VIOLATION);
        }
    } else if method == MethodFlag::Both {
        out.insert("crossCheck", json!("skipped"));
        if exact.as_ref().is_some_and(|x| x.is_err()) && growth.as_ref().is_some_and(|x| x.is_err()) {
            if let Some(Err(e)) = &exact {
                rep.fail(e);
            }
        }
    }
    out
}

pub fn module(g: &Global, file: &Path, method: MethodFlag) -> RunReport {
    let flag = format!("{method:?}");
    let (mut rep, text, ctx) = match start("module", g, file, &flag) {
        Ok(x) => x,
        Err(rep) => return *rep,
    };
    let data = match schema::parse_module(&text, &ctx) {
        Ok(d) => d,
        Err(e) => {
            rep.fail(&e);
            return rep;
        }
    };
    let mut results = serde_json::Map::new();
    let main = invariants_of(g, &data.lambda_module(), method, &mut rep);
    results.insert("module".into(), json!(main));
    if let ModuleData::GroupRing(r) = &data {
        let order = r.group().order();
        results.insert("groupOrder".into(), json!(order));
        results.insert("muZero".into(), json!(r.expanded_module().mu_vanishes()));
        results.insert("coinvariantsMuZero".into(), json!(r.coinvariants().mu_vanishes()));
        if method != MethodFlag::Growth {
            let top = data.lambda_module().exact_invariants();
            let bottom = r.coinvariants().exact_invariants();
            match (&top, &bottom) {
                (Ok(a), Ok(b)) => {
                    results.insert("coinvariants".into(), serde_json::to_value(b).unwrap());
                    if let (Some(la), Some(lb), Some(0)) = (a.lambda, b.lambda, a.mu) {
                        let holds = la == order * lb;
                        results.insert("identityHolds".into(), json!(holds));
                        if !holds {
                            rep.errors.push(format!("lambda(M) = {la} but |G|·lambda(Mbar) = {}", order * lb));
                            rep.raise(EXIT_VIOLATION);
                        }
                    }
                }
                (_, Err(e)) => rep.warnings.push(format!("coinvariants: {e}")),
                _ => {}
            }
        }
    }
    rep.results = Value::Object(results);
    rep
}

pub fn complex(g: &Global, file: &Path) -> RunReport {
    let (mut rep, text, ctx) = match start("complex", g, file, "") {
        Ok(x) => x,
        Err(rep) => return *rep,
    };
    let c = match schema::parse_complex(&text, &ctx) {
        Ok(c) => c,
        Err(e) => {
            rep.fail(&e);
            return rep;
        }
    };
    let mut results = serde_json::Map::new();
    results.insert("minDegree".into(), json!(c.min_degree()));
    results.insert("ranks".into(), json!(c.ranks()));
    results.insert("groupOrder".into(), json!(c.group().order()));
    match c.classify() {
        Ok(cls) => {
            results.insert("classification".into(), serde_json::to_value(&cls).unwrap());
            if cls.torsion && !cls.mu_zero {
                match lambda_by_reduction(&c) {
                    Ok(l) => {
                        results.insert("lambdaByReduction".into(), json!(l));
                    }
                    Err(e) => rep.warnings.push(format!("lambda by reduction: {e}")),
                }
            }
        }
        Err(e) => rep.fail(&e),
    }
    match c.verify_kida() {
        Ok(k) => {
            if k.violation {
                rep.errors.push("group identity violated".into());
                rep.raise(EXIT_VIOLATION);
            }
            results.insert("kida".into(), serde_json::to_value(&k).unwrap());
        }
        Err(e) => rep.fail(&e),
    }
    rep.results = Value::Object(results);
    rep
}

pub fn formula(g: &Global, file: &Path) -> RunReport {
    let (mut rep, text, _) = match start("formula", g, file, "") {
        Ok(x) => x,
        Err(rep) => return *rep,
    };
    match schema::parse_formula(&text).and_then(|f| kida::evaluate(&f)) {
        Ok(out) => {
            rep.warnings.extend(out.warnings.iter().cloned());
            rep.results = serde_json::to_value(&out).unwrap();
        }
        Err(e) => rep.fail(&e),
    }
    rep
}

#[derive(Serialize, Default)]
#[serde(rename_all = "camelCase")]
struct Tally {
    trials: usize,
    identity_holds: usize,
    consistent_non_mu_zero: usize,
    not_torsion: usize,
    violations: Vec<u64>,
    unstable: Vec<u64>,
    errors: Vec<String>,
    /// `"λ(C),λ(C̄)"` to count.
    lambda_pairs: BTreeMap<String, usize>,
}

enum Trial {
    Holds(i64, i64),
    NonMuZero,
    NotTorsion,
    Violation,
    Unstable,
    Failed(String),
}

fn trial(g: &PGroup, ctx: &PrecisionContext, params: ComplexParams, seed: u64) -> Trial {
    let c = random_complex(g, ctx, params, seed);
    match c.verify_kida() {
        Ok(k) if k.violation => Trial::Violation,
        Ok(k) => match (k.lambda_c, k.lambda_cbar) {
            (Some(a), Some(b)) => Trial::Holds(a, b),
            _ if k.mu_zero_c || k.mu_zero_cbar => Trial::Violation,
            _ => match c.classify() {
                Ok(cls) if !cls.torsion => Trial::NotTorsion,
                _ => Trial::NonMuZero,
            },
        },
        Err(Error::NotTorsion) => Trial::NotTorsion,
        Err(Error::Unstable(_) | Error::PrecisionExhausted(_)) => Trial::Unstable,
        Err(e) => Trial::Failed(e.to_string()),
    }
}

pub fn verify_kida(g: &Global, args: &KidaArgs) -> RunReport {
    let seeds = args.seeds.unwrap_or((g.seed, g.seed + args.trials));
    let extra = format!("{:?} {:?} {:?} {:?} {}", args.groups, args.families, seeds, args.length, args.max_rank);
    let mut rep =
        RunReport::new("verify-kida", report::digest(&[b"verify-kida", g.fingerprint().as_bytes(), extra.as_bytes()]));
    rep.seed_range = Some(seeds);
    let ctx = match g.context() {
        Ok(c) => c,
        Err(e) => {
            rep.fail(&e);
            return rep;
        }
    };
    let mut groups = Vec::new();
    for name in &args.groups {
        match PGroup::from_name(name, g.prime) {
            Ok(x) => groups.push((name.clone(), x)),
            Err(e) => rep.fail(&e),
        }
    }
    if !rep.errors.is_empty() {
        return rep;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            rep.errors.push(e.to_string());
            rep.raise(report::EXIT_OTHER);
            return rep;
        }
    };
    let mut tallies: BTreeMap<String, BTreeMap<&'static str, Tally>> = BTreeMap::new();
    let mut total_unstable = 0;
    let mut total = 0;
    for (name, group) in &groups {
        for &fam in &args.families {
            let params = |seed: u64| {
                let mut p = ComplexParams::new(fam.family(), args.length.unwrap_or(1 + (seed % 4) as usize));
                p.max_rank = args.max_rank.clamp(1, 4);
                p
            };
            let outcomes: Vec<Trial> =
                pool.install(|| (seeds.0..seeds.1).into_par_iter().map(|s| trial(group, &ctx, params(s), s)).collect());
            let t = tallies.entry(name.clone()).or_default().entry(fam.name()).or_default();
            for (seed, o) in (seeds.0..seeds.1).zip(outcomes) {
                t.trials += 1;
                match o {
                    Trial::Holds(a, b) => {
                        t.identity_holds += 1;
                        *t.lambda_pairs.entry(format!("{a},{b}")).or_default() += 1;
                    }
                    Trial::NonMuZero => t.consistent_non_mu_zero += 1,
                    Trial::NotTorsion => t.not_torsion += 1,
                    Trial::Violation => t.violations.push(seed),
                    Trial::Unstable => t.unstable.push(seed),
                    Trial::Failed(msg) => t.errors.push(format!("seed {seed}: {msg}")),
                }
            }
            total += t.trials;
            total_unstable += t.unstable.len();
            if !t.violations.is_empty() {
                rep.errors.push(format!("{name} {}: violations at seeds {:?}", fam.name(), t.violations));
                rep.raise(EXIT_VIOLATION);
            }
            if !t.errors.is_empty() {
                rep.warnings.push(format!("{name} {}: {} trials failed", fam.name(), t.errors.len()));
            }
        }
    }
    if total_unstable > 0 {
        rep.warnings.push(format!("{total_unstable} of {total} trials ran out of precision"));
    }
    rep.results = json!({ "byGroup": tallies, "trials": total });
    rep
}
