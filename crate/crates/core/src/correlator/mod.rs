//! Canonical pairing route: enumerate Wick pairings of a field product and
//! weight each one by its Green-index sum.

mod matching;
mod product;
mod result;

pub(crate) use matching::signed_edges;
pub use matching::{
    crossing_edges, enumerate_matchings, matching_coefficient, partition_sum, BlockConstraints,
    CrossingGraph, Matching, SignedEdge,
};
pub use product::{
    Charge, FieldSpec, Insertion, Mode, OpKind, ProductSpec, RelativeRules, SignTable,
};
pub use result::{CorrelatorResult, Kernel, KernelKind, LabelOrder, Term};

use num_bigint::BigInt;

use crate::algebra::{GreenIndex, PPoly};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorrelatorError {
    #[error("duplicate field name `{0}`")]
    DuplicateField(String),
    #[error("insertion {position} references unknown field #{field}")]
    UnknownField { position: usize, field: usize },
    #[error("insertion {position} has operator kind {kind:?}, not allowed in {mode:?} mode")]
    ModeMismatch {
        position: usize,
        kind: OpKind,
        mode: Mode,
    },
    #[error("no relative exchange rule between fields `{0}` and `{1}`")]
    MissingRelativeRule(String, String),
    #[error("relative rule signs must be +1 or -1, got ({0}, {1})")]
    BadRuleSign(i32, i32),
    #[error("expected {expected} green indices, got {got}")]
    IndexCount { expected: usize, got: usize },
    #[error(transparent)]
    GreenIndex(#[from] crate::algebra::GreenIndexError),
    #[error("operation requires a time-ordered product")]
    NotTimeOrdered,
}

/// How a contraction of the pair `(i, j)` (with `i < j`) is written: the
/// kernel symbol and the extra sign needed to bring it to that form.
pub(crate) fn contraction_kernel(
    product: &ProductSpec,
    order: &LabelOrder,
    i: usize,
    j: usize,
) -> Option<(Option<Kernel>, i32)> {
    let left = &product.insertions()[i];
    let right = &product.insertions()[j];
    match product.mode() {
        Mode::OperatorString => Kernel::kronecker(&left.label, &right.label, order).map(|k| (k, 1)),
        Mode::TimeOrdered => {
            let field = &product.fields()[left.field];
            match field.kernel() {
                KernelKind::FermionFeynman => {
                    // iS_F(x − y) is <T psi(x) psibar(y)>; a psibar on the left costs a sign
                    if left.adjoint {
                        Some((Some(Kernel::fermion(&right.label, &left.label)), -1))
                    } else {
                        Some((Some(Kernel::fermion(&left.label, &right.label)), 1))
                    }
                }
                _ => Some((Some(Kernel::scalar(&left.label, &right.label, order)), 1)),
            }
        }
    }
}

/// Symbolic vacuum expectation value of `product` summed over all Green indices.
pub fn evaluate(product: &ProductSpec) -> Result<CorrelatorResult, CorrelatorError> {
    let order = product.label_order();
    let n = product.len();
    if n == 0 {
        return Ok(CorrelatorResult::unit());
    }
    if n % 2 == 1 {
        return Ok(CorrelatorResult::zero());
    }
    let signs = product.sign_table()?;
    let mut terms = Vec::new();
    for m in enumerate_matchings(product) {
        let Some((factors, orientation)) = assemble_factors(product, &order, &m) else {
            continue;
        };
        let graph = CrossingGraph::for_product(product, &m);
        let coefficient = matching_coefficient(&graph, &signs)?.scale(orientation);
        let i_power = feynman_count(&factors);
        terms.push(Term::new(coefficient, i_power, factors));
    }
    Ok(CorrelatorResult::from_terms(terms, &order))
}

/// Collects the kernel factors for a matching. `None` when a Kronecker factor
/// between distinct concrete modes kills the term.
pub(crate) fn assemble_factors(
    product: &ProductSpec,
    order: &LabelOrder,
    m: &Matching,
) -> Option<(Vec<Kernel>, i32)> {
    let mut factors = Vec::with_capacity(m.pairs().len());
    let mut sign = 1;
    for &(i, j) in m.pairs() {
        let (kernel, s) = contraction_kernel(product, order, i, j)?;
        sign *= s;
        factors.extend(kernel);
    }
    Some((factors, sign))
}

pub(crate) fn feynman_count(factors: &[Kernel]) -> u8 {
    (factors.iter().filter(|k| k.kind.is_feynman()).count() % 4) as u8
}

/// Value of the product with every insertion pinned to a concrete Green
/// component. Only equal-index insertions contract; each crossing of two
/// contractions contributes the exchange sign of their two indices.
pub fn evaluate_green_components(
    product: &ProductSpec,
    indices: &[u32],
    p: u32,
) -> Result<CorrelatorResult, CorrelatorError> {
    if indices.len() != product.len() {
        return Err(CorrelatorError::IndexCount {
            expected: product.len(),
            got: indices.len(),
        });
    }
    let indices = indices
        .iter()
        .map(|&v| GreenIndex::new(v, p))
        .collect::<Result<Vec<_>, _>>()?;
    let order = product.label_order();
    if product.is_empty() {
        return Ok(CorrelatorResult::unit());
    }
    let signs = product.sign_table()?;
    let mut terms = Vec::new();
    for m in enumerate_matchings(product) {
        if m.pairs().iter().any(|&(i, j)| indices[i] != indices[j]) {
            continue;
        }
        let Some((factors, orientation)) = assemble_factors(product, &order, &m) else {
            continue;
        };
        let graph = CrossingGraph::for_product(product, &m);
        let mut sign = orientation;
        for &(u, v) in graph.edges() {
            let (a, b) = (graph.pairs()[u].0, graph.pairs()[v].0);
            let same = indices[a] == indices[b];
            sign *= signs.sign(graph.fields()[u], graph.fields()[v], same)?;
        }
        let i_power = feynman_count(&factors);
        terms.push(Term::new(
            PPoly::constant(BigInt::from(sign)),
            i_power,
            factors,
        ));
    }
    Ok(CorrelatorResult::from_terms(terms, &order))
}

#[cfg(test)]
mod tests;
