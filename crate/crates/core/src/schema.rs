//! Versioned JSON text forms for elements, modules, complexes and formula
//! inputs.
//!
//! Parsing ignores whitespace and accepts a missing `schema` tag; a tag that
//! is present must match. Serialization is canonical: fixed key order, no
//! whitespace, coefficients in the symmetric range.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coeff::PrecisionContext;
use crate::complex::PerfectComplex;
use crate::error::{Error, Result};
use crate::group::{GroupRingElement, GroupRingMatrix, PGroup};
use crate::kida::FormulaInput;
use crate::matrix::PolyMatrix;
use crate::module::LambdaModule;
use crate::poly::Poly;

pub const ELEMENT_SCHEMA: &str = "iwalab-element-1";
pub const MODULE_SCHEMA: &str = "iwalab-module-1";
pub const COMPLEX_SCHEMA: &str = "iwalab-complex-1";
pub const FORMULA_SCHEMA: &str = "iwalab-formula-1";

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

fn check_tag(found: &Option<String>, expected: &str) -> Result<()> {
    match found {
        Some(tag) if tag != expected => {
            Err(Error::Schema(format!("unsupported schema {tag:?}, expected {expected:?}")))
        }
        _ => Ok(()),
    }
}

fn canonical<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("plain data serializes")
}

/// `{ "order": n, "table": [[...]] }` or a name such as `"Z/3xZ/3"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Table { order: usize, table: Vec<Vec<usize>> },
    Name(String),
}

impl GroupSpec {
    pub fn of(g: &PGroup) -> Self {
        GroupSpec::Table { order: g.order(), table: g.table() }
    }

    pub fn resolve(&self, p: u64) -> Result<PGroup> {
        match self {
            GroupSpec::Name(n) => PGroup::from_name(n, p),
            GroupSpec::Table { order, table } => {
                if *order != table.len() {
                    return Err(Error::InvalidTable(format!("order {order} but {} rows", table.len())));
                }
                PGroup::validate(table, p)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementText {
    Bare(Vec<i64>),
    Tagged {
        #[serde(default)]
        schema: Option<String>,
        coefficients: Vec<i64>,
    },
}

#[derive(Serialize)]
struct ElementOut<'a> {
    schema: &'a str,
    coefficients: Vec<i64>,
}

/// Lowest-degree-first coefficients, either bare or under `coefficients`.
pub fn parse_element(text: &str) -> Result<Vec<i64>> {
    match parse::<ElementText>(text)? {
        ElementText::Bare(c) => Ok(c),
        ElementText::Tagged { schema, coefficients } => {
            check_tag(&schema, ELEMENT_SCHEMA)?;
            Ok(coefficients)
        }
    }
}

pub fn element_to_text(f: &Poly) -> String {
    canonical(&ElementOut { schema: ELEMENT_SCHEMA, coefficients: f.to_i64() })
}

/// Group-ring entry: one coefficient list per group element.
type EntryText = Vec<Vec<i64>>;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ModuleText {
    #[serde(default)]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<GroupSpec>,
    generators: usize,
    relations: Vec<Vec<serde_json::Value>>,
}

/// A presentation over `Λ` or over `Λ[G]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleData {
    Lambda(LambdaModule),
    GroupRing(GroupRingMatrix),
}

impl ModuleData {
    /// The underlying `Λ`-module, expanding a group-ring presentation.
    pub fn lambda_module(&self) -> LambdaModule {
        match self {
            ModuleData::Lambda(m) => m.clone(),
            ModuleData::GroupRing(r) => r.expanded_module(),
        }
    }

    pub fn group(&self) -> Option<&PGroup> {
        match self {
            ModuleData::Lambda(_) => None,
            ModuleData::GroupRing(r) => Some(r.group()),
        }
    }
}

fn value_as<T: DeserializeOwned>(v: &serde_json::Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Schema(e.to_string()))
}

fn group_entry(ctx: &PrecisionContext, g: &PGroup, e: &EntryText) -> Result<GroupRingElement> {
    if e.len() != g.order() {
        return Err(Error::Schema(format!(
            "group-ring entry has {} coefficients, group order is {}",
            e.len(),
            g.order()
        )));
    }
    GroupRingElement::new(g, e.iter().map(|c| Poly::from_i64(ctx, c)).collect())
}

fn entry_text(x: &GroupRingElement) -> EntryText {
    x.coeffs().iter().map(Poly::to_i64).collect()
}

fn check_rows<T>(rows: &[Vec<T>], n_rows: usize, what: &str) -> Result<usize> {
    if rows.len() != n_rows {
        return Err(Error::Schema(format!("{what}: expected {n_rows} rows, found {}", rows.len())));
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema(format!("{what}: ragged rows")));
    }
    Ok(cols)
}

/// `relations` is the `generators × r` matrix whose columns are relations.
pub fn parse_module(text: &str, ctx: &PrecisionContext) -> Result<ModuleData> {
    let m: ModuleText = parse(text)?;
    check_tag(&m.schema, MODULE_SCHEMA)?;
    let cols = check_rows(&m.relations, m.generators, "relations")?;
    match &m.group {
        None => {
            let mut rel = PolyMatrix::zeros(ctx, m.generators, cols);
            for (i, row) in m.relations.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    rel.set(i, j, Poly::from_i64(ctx, &value_as::<Vec<i64>>(v)?));
                }
            }
            Ok(ModuleData::Lambda(LambdaModule::new(m.generators, rel)?))
        }
        Some(spec) => {
            let g = spec.resolve(ctx.p())?;
            let mut entries = Vec::with_capacity(m.generators * cols);
            for row in &m.relations {
                for v in row {
                    entries.push(group_entry(ctx, &g, &value_as::<EntryText>(v)?)?);
                }
            }
            Ok(ModuleData::GroupRing(GroupRingMatrix::from_entries(ctx, &g, m.generators, cols, entries)?))
        }
    }
}

pub fn module_to_text(m: &ModuleData) -> String {
    let (group, generators, relations) = match m {
        ModuleData::Lambda(l) => {
            let rel = l.relations();
            let rows = (0..rel.rows())
                .map(|i| (0..rel.cols()).map(|j| serde_json::json!(rel.get(i, j).to_i64())).collect())
                .collect();
            (None, l.generators(), rows)
        }
        ModuleData::GroupRing(r) => {
            let rows = (0..r.rows())
                .map(|i| (0..r.cols()).map(|j| serde_json::json!(entry_text(r.get(i, j)))).collect())
                .collect();
            (Some(GroupSpec::of(r.group())), r.rows(), rows)
        }
    };
    canonical(&ModuleText { schema: Some(MODULE_SCHEMA.into()), group, generators, relations })
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ComplexText {
    #[serde(default)]
    schema: Option<String>,
    group: GroupSpec,
    min_degree: i64,
    ranks: Vec<usize>,
    boundaries: Vec<Vec<Vec<EntryText>>>,
}

pub fn parse_complex(text: &str, ctx: &PrecisionContext) -> Result<PerfectComplex> {
    let c: ComplexText = parse(text)?;
    check_tag(&c.schema, COMPLEX_SCHEMA)?;
    let g = c.group.resolve(ctx.p())?;
    if c.boundaries.len() + 1 != c.ranks.len().max(1) {
        return Err(Error::Schema(format!(
            "{} ranks need {} boundaries, found {}",
            c.ranks.len(),
            c.ranks.len().saturating_sub(1),
            c.boundaries.len()
        )));
    }
    let mut bounds = Vec::with_capacity(c.boundaries.len());
    for (k, d) in c.boundaries.iter().enumerate() {
        let (rows, cols) = (c.ranks[k + 1], c.ranks[k]);
        let found = check_rows(d, rows, &format!("boundary {k}"))?;
        if rows > 0 && found != cols {
            return Err(Error::BoundaryMismatch(c.min_degree + k as i64));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for row in d {
            for e in row {
                entries.push(group_entry(ctx, &g, e)?);
            }
        }
        bounds.push(GroupRingMatrix::from_entries(ctx, &g, rows, cols, entries)?);
    }
    PerfectComplex::new(&g, ctx, c.min_degree, c.ranks, bounds)
}

pub fn complex_to_text(c: &PerfectComplex) -> String {
    let boundaries = c
        .boundaries()
        .iter()
        .map(|d| (0..d.rows()).map(|i| (0..d.cols()).map(|j| entry_text(d.get(i, j))).collect()).collect())
        .collect();
    canonical(&ComplexText {
        schema: Some(COMPLEX_SCHEMA.into()),
        group: GroupSpec::of(c.group()),
        min_degree: c.min_degree(),
        ranks: c.ranks().to_vec(),
        boundaries,
    })
}

/// A formula record, optionally carrying `"schema": "iwalab-formula-1"`.
pub fn parse_formula(text: &str) -> Result<FormulaInput> {
    let mut v: serde_json::Value = parse(text)?;
    if let Some(obj) = v.as_object_mut() {
        if let Some(tag) = obj.remove("schema") {
            let tag = tag.as_str().map(str::to_owned);
            check_tag(&tag.or(Some(String::new())), FORMULA_SCHEMA)?;
        }
    }
    value_as(&v)
}

pub fn formula_to_text(f: &FormulaInput) -> String {
    let mut v = serde_json::to_value(f).expect("plain data serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.insert("schema".into(), serde_json::json!(FORMULA_SCHEMA));
    }
    canonical(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_complex, ComplexParams, Family};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(3, 8, 32).unwrap()
    }

    #[test]
    fn elements() {
        assert_eq!(parse_element(" [3, 1] ").unwrap(), vec![3, 1]);
        assert_eq!(parse_element(r#"{"schema":"iwalab-element-1","coefficients":[9]}"#).unwrap(), vec![9]);
        assert!(matches!(parse_element(r#"{"schema":"iwalab-element-9","coefficients":[9]}"#), Err(Error::Schema(_))));
        let err = parse_element("[3,\n 1,]").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let f = Poly::from_i64(&ctx(), &[-4, 0, 1]);
        assert_eq!(element_to_text(&f), r#"{"schema":"iwalab-element-1","coefficients":[-4,0,1]}"#);
    }

    #[test]
    fn modules_round_trip() {
        let text = r#"{"generators": 1, "relations": [[[3, 1]]]}"#;
        let m = parse_module(text, &ctx()).unwrap();
        assert_eq!(m.lambda_module(), LambdaModule::cyclic(&Poly::from_i64(&ctx(), &[3, 1])));
        assert_eq!(parse_module(&module_to_text(&m), &ctx()).unwrap(), m);

        let text = r#"{"group": "Z/3", "generators": 1, "relations": [[[[-1, -1], [1], []]]]}"#;
        let m = parse_module(text, &ctx()).unwrap();
        assert_eq!(m.group().unwrap().order(), 3);
        assert_eq!(parse_module(&module_to_text(&m), &ctx()).unwrap(), m);
        assert!(parse_module(r#"{"generators": 2, "relations": [[[1]]]}"#, &ctx()).is_err());
    }

    #[test]
    fn complexes_round_trip() {
        for (k, name) in ["1", "Z/3", "Z/9", "Z/3xZ/3"].iter().enumerate() {
            let g = PGroup::from_name(name, 3).unwrap();
            for seed in 0..5 {
                let c = random_complex(&g, &ctx(), ComplexParams::new(Family::Unconstrained, 1 + k), seed);
                let text = complex_to_text(&c);
                assert_eq!(parse_complex(&text, &ctx()).unwrap(), c);
                assert_eq!(complex_to_text(&parse_complex(&text, &ctx()).unwrap()), text);
            }
        }
        let bad = r#"{"group":"1","minDegree":0,"ranks":[1,1],"boundaries":[[[[0,1]]],[[[0,1]]]]}"#;
        assert!(matches!(parse_complex(bad, &ctx()), Err(Error::Schema(_))));
    }

    #[test]
    fn formulas() {
        let text = r#"{"schema":"iwalab-formula-1","formula":"elliptic-ordinary","degree":3,"lambdaBase":2,"primes":[{"e":3,"label":"good"}]}"#;
        let f = parse_formula(text).unwrap();
        assert_eq!(parse_formula(&formula_to_text(&f)).unwrap(), f);
        let err = parse_formula(r#"{"formula":"kida-modern","degree":3}"#).unwrap_err().to_string();
        assert!(err.contains("kida-classical"), "{err}");
        assert!(parse_formula(r#"{"schema":"iwalab-formula-2","formula":"sigma-ramified","degree":1,"lambdaBase":0}"#)
            .is_err());
    }
}
