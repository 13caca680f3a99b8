use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::problem::{Engine, Problem};
use super::CliError;
use crate::algebra::PPoly;
use crate::correlator::{
    evaluate, CorrelatorResult, KernelKind, LabelOrder, Mode, ProductSpec, Term,
};
use crate::fock::{vacuum_expectation, FockConfig, ModeLadders, OperatorMatrix};
use crate::genfun::n_point;
use crate::perturb::{first_order_correction, vertex_admissibility, Admissibility, FirstOrder};

pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub engine: Option<Engine>,
    pub p: Option<u32>,
    pub oracle: bool,
    pub max_dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub pairing_terms: usize,
    pub genfun_terms: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstOrderRecord {
    pub text: String,
    pub correction: FirstOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<Admissibility>,
}

/// Comparison of the symbolic value at concrete `p` with a matrix VEV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub p: u32,
    pub modes: usize,
    pub cutoff: u32,
    pub dim: usize,
    /// Exact real and imaginary parts.
    pub symbolic: [String; 2],
    pub matrix: [f64; 2],
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub engine: Engine,
    pub mode: Mode,
    pub expression: String,
    pub text: String,
    pub result: CorrelatorResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_p: Option<CorrelatorResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order: Option<FirstOrderRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

impl ResultDocument {
    /// False when an engine cross-check or the oracle disagrees.
    pub fn passed(&self) -> bool {
        self.cross_check.as_ref().is_none_or(|c| c.agree)
            && self.oracle.as_ref().is_none_or(|o| o.agree)
    }
}

pub fn run(problem: &Problem, opts: &RunOptions) -> Result<ResultDocument, CliError> {
    let engine = opts.engine.unwrap_or(problem.file.engine);
    let p = opts.p.or(problem.file.p);
    if p == Some(0) {
        return Err(CliError::Semantic("p must be at least 1".into()));
    }
    let product = &problem.product;
    let (result, cross_check) = match engine {
        Engine::Pairing => (evaluate(product)?, None),
        Engine::Genfun => (n_point(product)?, None),
        Engine::Both => {
            let a = evaluate(product)?;
            let b = n_point(product)?;
            let check = CrossCheck {
                pairing_terms: a.terms().len(),
                genfun_terms: b.terms().len(),
                agree: a == b,
            };
            (a, Some(check))
        }
    };
    let order = product.label_order();
    let at_p = p.map(|p| at(&result, p, &order));
    let first_order = match &problem.vertex {
        None => None,
        Some(v) => {
            let correction = first_order_correction(product, v)?;
            Some(FirstOrderRecord {
                text: correction.to_string(),
                correction,
                admissibility: p.map(|p| vertex_admissibility(v, p)),
            })
        }
    };
    let oracle = if opts.oracle || problem.file.oracle.is_some() {
        let p = p.ok_or_else(|| CliError::Oracle("a concrete p is required".into()))?;
        Some(run_oracle(problem, &result, p, opts)?)
    } else {
        None
    };
    Ok(ResultDocument {
        engine,
        mode: product.mode(),
        expression: problem.file.correlator.clone(),
        text: result.to_string(),
        result,
        cross_check,
        p,
        at_p,
        first_order,
        oracle,
    })
}

/// Coefficients evaluated at `p`; terms that vanish there are dropped.
fn at(result: &CorrelatorResult, p: u32, order: &LabelOrder) -> CorrelatorResult {
    let terms = result.terms().iter().map(|t| {
        Term::new(
            PPoly::constant(t.coefficient.eval(i64::from(p))),
            t.i_power,
            t.factors.clone(),
        )
    });
    CorrelatorResult::from_terms(terms, order)
}

/// How each insertion of the product becomes a sum of mode operators.
struct Reduction {
    stat: crate::algebra::Statistics,
    modes: usize,
    /// Mode of each distinct operator-string label.
    label_modes: BTreeMap<String, usize>,
}

fn reduction(problem: &Problem, cap: Option<usize>) -> Result<Reduction, CliError> {
    let product = &problem.product;
    let fields = product.fields();
    let used: Vec<usize> = {
        let mut v: Vec<usize> = product.insertions().iter().map(|i| i.field).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    if used.len() > 1 {
        return Err(CliError::Oracle(
            "matrix comparison supports products of a single field".into(),
        ));
    }
    if problem.vertex.is_some() {
        return Err(CliError::Oracle(
            "matrix comparison does not cover vertex corrections".into(),
        ));
    }
    let field = used.first().map_or(&fields[0], |&f| &fields[f]);
    let mut label_modes = BTreeMap::new();
    let modes = match product.mode() {
        Mode::OperatorString => {
            for ins in product.insertions() {
                let next = label_modes.len();
                label_modes.entry(ins.label.clone()).or_insert(next);
            }
            label_modes.len().max(1)
        }
        Mode::TimeOrdered if field.pairs_with_adjoint() => 2,
        Mode::TimeOrdered => 1,
    };
    if let Some(cap) = cap {
        if modes > cap {
            return Err(CliError::Oracle(format!(
                "the product needs {modes} modes but the oracle allows {cap}"
            )));
        }
    }
    Ok(Reduction {
        stat: field.stat,
        modes,
        label_modes,
    })
}

fn run_oracle(
    problem: &Problem,
    result: &CorrelatorResult,
    p: u32,
    opts: &RunOptions,
) -> Result<OracleReport, CliError> {
    let decl = problem.file.oracle.unwrap_or_default();
    let red = reduction(problem, decl.modes)?;
    let product = &problem.product;
    // a path back to the vacuum never holds more quanta than half the string
    let cutoff = decl.cutoff.unwrap_or((product.len() as u32 / 2).max(1));
    let mut cfg = FockConfig::new(red.stat, p, decl.modes.unwrap_or(red.modes)).with_cutoff(cutoff);
    if let Some(max) = opts.max_dim {
        cfg = cfg.with_max_dim(max);
    }
    let dim = cfg.dim()?;
    let ladders = ModeLadders::new(&cfg)?;
    let matrices: Vec<OperatorMatrix> = product
        .insertions()
        .iter()
        .map(|ins| match product.mode() {
            Mode::OperatorString => {
                let k = red.label_modes[&ins.label];
                if ins.adjoint {
                    ladders.creator(k).clone()
                } else {
                    ladders.annihilator(k).clone()
                }
            }
            // neutral: a_0 + a†_0; charged: phi = a_0 + a†_1, phi* = a_1 + a†_0
            Mode::TimeOrdered => {
                let (lower, upper) = match (red.modes, ins.adjoint) {
                    (1, _) => (0, 0),
                    (_, false) => (0, 1),
                    (_, true) => (1, 0),
                };
                ladders.annihilator(lower) + ladders.creator(upper)
            }
        })
        .collect();
    let matrix = vacuum_expectation(&matrices);
    let (re, im) = symbolic_value(product, result, p, &red.label_modes);
    let diff = Complex64::new(
        re.to_f64().unwrap_or(f64::NAN),
        im.to_f64().unwrap_or(f64::NAN),
    ) - matrix;
    Ok(OracleReport {
        p,
        modes: cfg.modes,
        cutoff,
        dim,
        symbolic: [re.to_string(), im.to_string()],
        matrix: [matrix.re, matrix.im],
        agree: diff.norm() < ORACLE_TOLERANCE,
    })
}

/// Every propagator symbol of the reduced single-mode problem evaluates to
/// one contraction, `+1` in string order; a fermion kernel whose psibar
/// point comes first in the string reads `−1`.
fn symbolic_value(
    product: &ProductSpec,
    result: &CorrelatorResult,
    p: u32,
    label_modes: &BTreeMap<String, usize>,
) -> (BigInt, BigInt) {
    let order = product.label_order();
    let (mut re, mut im) = (BigInt::zero(), BigInt::zero());
    for t in result.terms() {
        let mut value = t.coefficient.eval(i64::from(p));
        for k in &t.factors {
            let factor = match k.kind {
                KernelKind::ScalarFeynman => 1,
                KernelKind::FermionFeynman => {
                    if order.rank(&k.args[0]) < order.rank(&k.args[1]) {
                        1
                    } else {
                        -1
                    }
                }
                KernelKind::Kronecker => {
                    (label_modes.get(&k.args[0]) == label_modes.get(&k.args[1])) as i32
                }
            };
            value *= factor;
        }
        match t.extra_i_power() {
            0 => re += value,
            1 => im += value,
            2 => re -= value,
            _ => im -= value,
        }
    }
    (re, im)
}

pub fn emit(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(doc).expect("result documents always serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = format!("{}\n", doc.text);
            if let Some(c) = &doc.cross_check {
                let verdict = if c.agree { "agree" } else { "DISAGREE" };
                out += &format!(
                    "engines: pairing {} terms, genfun {} terms, {verdict}\n",
                    c.pairing_terms, c.genfun_terms
                );
            }
            if let (Some(p), Some(r)) = (doc.p, &doc.at_p) {
                out += &format!("at p={p}: {r}\n");
            }
            if let Some(f) = &doc.first_order {
                out += &format!("first order: {}\n", f.text);
                if let Some(a) = &f.admissibility {
                    if !a.admissible() {
                        out += &format!(
                            "vertex warning: arity {} at p={}{}{}\n",
                            a.arity,
                            a.p,
                            if a.unsaturated {
                                ", indices not saturated"
                            } else {
                                ""
                            },
                            if a.even_degree { ", even degree" } else { "" }
                        );
                    }
                }
            }
            if let Some(o) = &doc.oracle {
                let verdict = if o.agree { "agree" } else { "DISAGREE" };
                let symbolic = if o.symbolic[1] == "0" {
                    o.symbolic[0].clone()
                } else {
                    format!("{} + ({})i", o.symbolic[0], o.symbolic[1])
                };
                out += &format!(
                    "oracle p={} modes={} cutoff={} dim={}: symbolic {symbolic}, matrix {:.9} + ({:.9})i, {verdict}\n",
                    o.p, o.modes, o.cutoff, o.dim, o.matrix[0], o.matrix[1]
                );
            }
            out
        }
    }
}
