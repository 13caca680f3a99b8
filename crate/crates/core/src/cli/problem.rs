use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::parse_expression;
use super::CliError;
use crate::algebra::Statistics;
use crate::correlator::{Charge, FieldSpec, Mode, ProductSpec, RelativeRules};
use crate::perturb::{VertexKind, VertexSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Pairing,
    Genfun,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDecl {
    pub name: String,
    pub statistics: Statistics,
    #[serde(default = "neutral")]
    pub charge: Charge,
}

fn neutral() -> Charge {
    Charge::Neutral
}

fn time_ordered() -> Mode {
    Mode::TimeOrdered
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDecl {
    pub fields: [String; 2],
    pub same_index: i32,
    pub different_index: i32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexKindDecl {
    DiagonalPower { field: String, degree: usize },
    NestedAllDifferent { fields: Vec<String> },
    Yukawa { fermion: String, boson: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDecl {
    #[serde(flatten)]
    pub kind: VertexKindDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

/// On-disk problem description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub fields: Vec<FieldDecl>,
    pub correlator: String,
    #[serde(default = "time_ordered")]
    pub mode: Mode,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relative_rules: Vec<RuleDecl>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub explicit_rules_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexDecl>,
}

impl ProblemFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }
}

/// A validated problem ready to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub file: ProblemFile,
    pub product: ProductSpec,
    pub vertex: Option<VertexSpec>,
}

pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(file)
}

pub fn build(file: ProblemFile) -> Result<Problem, CliError> {
    let fields: Vec<FieldSpec> = file
        .fields
        .iter()
        .map(|d| FieldSpec::new(d.name.clone(), d.statistics, d.charge))
        .collect();
    let index: BTreeMap<&str, usize> = fields
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| CliError::Semantic(format!("undeclared field `{name}`")))
    };
    let mut rules = if file.explicit_rules_only {
        RelativeRules::explicit_only()
    } else {
        RelativeRules::default()
    };
    for r in &file.relative_rules {
        for name in &r.fields {
            lookup(name)?;
        }
        if r.fields[0] == r.fields[1] {
            return Err(CliError::Semantic(format!(
                "relative rule needs two distinct fields, got `{}` twice",
                r.fields[0]
            )));
        }
        rules.set(&r.fields[0], &r.fields[1], r.same_index, r.different_index)?;
    }
    let insertions = parse_expression(&file.correlator, &fields, file.mode)?;
    let vertex = match &file.vertex {
        None => None,
        Some(v) => {
            let kind = match &v.kind {
                VertexKindDecl::DiagonalPower { field, degree } => VertexKind::DiagonalPower {
                    field: lookup(field)?,
                    degree: *degree,
                },
                VertexKindDecl::NestedAllDifferent { fields } => VertexKind::NestedAllDifferent {
                    fields: fields.iter().map(|f| lookup(f)).collect::<Result<_, _>>()?,
                },
                VertexKindDecl::Yukawa { fermion, boson } => VertexKind::Yukawa {
                    fermion: lookup(fermion)?,
                    boson: lookup(boson)?,
                },
            };
            let mut spec = VertexSpec::new(kind);
            if let Some(c) = &v.coupling {
                spec.coupling = c.clone();
            }
            if let Some(z) = &v.point {
                spec.point = z.clone();
            }
            Some(spec)
        }
    };
    let product = ProductSpec::new(fields, insertions, file.mode, rules)?;
    Ok(Problem {
        file,
        product,
        vertex,
    })
}
