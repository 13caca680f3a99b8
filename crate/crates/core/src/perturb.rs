//! First-order corrections from a single interaction vertex.
//!
//! The vertex legs are appended to the right of the external insertions, all
//! at the integration point, and the extended product goes through the same
//! pairing machinery as [`crate::correlator::evaluate`]. Green-index
//! restrictions at the vertex become block constraints on the contraction
//! pairs that own the legs. Every term carries one extra factor `i g` and an
//! implicit integral over the vertex point. Vacuum bubbles are kept.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{PPoly, Statistics};
use crate::correlator::{
    enumerate_matchings, partition_sum, BlockConstraints, CorrelatorError, CorrelatorResult,
    CrossingGraph, Insertion, KernelKind, Mode, ProductSpec, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerturbError {
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error("vertex references unknown field #{0}")]
    UnknownField(usize),
    #[error("vertex point `{0}` is already used by an external insertion")]
    PointClash(String),
    #[error("vertices act on time-ordered products only")]
    NotTimeOrdered,
    #[error("nested vertex fields must be distinct neutral parabose fields; `{0}` is not")]
    NestedField(String),
    #[error("yukawa vertex needs a parafermi and a parabose field")]
    YukawaFields,
    #[error("vertex degree must be at least 1")]
    ZeroDegree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexKind {
    /// `(Σ_α φ^(α)* φ^(α))^degree`; both legs of a bilinear share an index.
    DiagonalPower { field: usize, degree: usize },
    /// Product of distinct neutral fields with pairwise different indices.
    NestedAllDifferent { fields: Vec<usize> },
    /// `ψ̄ ψ φ` with pairwise different indices.
    Yukawa { fermion: usize, boson: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    #[serde(flatten)]
    pub kind: VertexKind,
    #[serde(default = "default_coupling")]
    pub coupling: String,
    #[serde(default = "default_point")]
    pub point: String,
}

fn default_coupling() -> String {
    "g".into()
}

fn default_point() -> String {
    "z".into()
}

impl VertexSpec {
    pub fn new(kind: VertexKind) -> Self {
        VertexSpec {
            kind,
            coupling: default_coupling(),
            point: default_point(),
        }
    }

    /// Number of legs.
    pub fn arity(&self) -> usize {
        match &self.kind {
            VertexKind::DiagonalPower { degree, .. } => 2 * degree,
            VertexKind::NestedAllDifferent { fields } => fields.len(),
            VertexKind::Yukawa { .. } => 3,
        }
    }

    /// Vertex legs and the leg pairs forced into one block or kept apart.
    /// Leg numbers are offsets from the first leg.
    fn legs(
        &self,
        product: &ProductSpec,
    ) -> Result<(Vec<Insertion>, BlockConstraints), PerturbError> {
        let fields = product.fields();
        let check = |f: usize| {
            if f < fields.len() {
                Ok(&fields[f])
            } else {
                Err(PerturbError::UnknownField(f))
            }
        };
        let z = self.point.as_str();
        let mut constraints = BlockConstraints::default();
        let legs = match &self.kind {
            VertexKind::DiagonalPower { field, degree } => {
                if *degree == 0 {
                    return Err(PerturbError::ZeroDegree);
                }
                let charged = check(*field)?.pairs_with_adjoint();
                let mut legs = Vec::with_capacity(2 * degree);
                for b in 0..*degree {
                    legs.push(Insertion::field(*field, charged, z));
                    legs.push(Insertion::field(*field, false, z));
                    constraints.same.push((2 * b, 2 * b + 1));
                }
                legs
            }
            VertexKind::NestedAllDifferent { fields: list } => {
                for (n, &f) in list.iter().enumerate() {
                    let spec = check(f)?;
                    if spec.pairs_with_adjoint()
                        || spec.stat != Statistics::ParaBose
                        || list[..n].contains(&f)
                    {
                        return Err(PerturbError::NestedField(spec.name.clone()));
                    }
                }
                all_distinct(list.len(), &mut constraints);
                list.iter()
                    .map(|&f| Insertion::field(f, false, z))
                    .collect()
            }
            VertexKind::Yukawa { fermion, boson } => {
                if check(*fermion)?.stat != Statistics::ParaFermi
                    || check(*boson)?.stat != Statistics::ParaBose
                {
                    return Err(PerturbError::YukawaFields);
                }
                all_distinct(3, &mut constraints);
                vec![
                    Insertion::field(*fermion, true, z),
                    Insertion::field(*fermion, false, z),
                    Insertion::field(*boson, false, z),
                ]
            }
        };
        Ok((legs, constraints))
    }
}

fn all_distinct(n: usize, constraints: &mut BlockConstraints) {
    for a in 0..n {
        for b in a + 1..n {
            constraints.distinct.push((a, b));
        }
    }
}

/// First-order correction `i g ∫d⁴z ⟨T (externals) V(z)⟩₀`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstOrder {
    pub coupling: String,
    pub point: String,
    /// Terms with the extra `i` of the vertex folded into `i_power`.
    pub result: CorrelatorResult,
}

impl FirstOrder {
    pub fn terms(&self) -> &[Term] {
        self.result.terms()
    }

    pub fn is_zero(&self) -> bool {
        self.result.is_zero()
    }
}

impl fmt::Display for FirstOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        write!(
            f,
            "{} * int d4{} [{}]",
            self.coupling, self.point, self.result
        )
    }
}

pub fn first_order_correction(
    product: &ProductSpec,
    vertex: &VertexSpec,
) -> Result<FirstOrder, PerturbError> {
    correction(product, vertex, true)
}

/// Same pairings with every vertex index constraint dropped.
pub fn first_order_unconstrained(
    product: &ProductSpec,
    vertex: &VertexSpec,
) -> Result<FirstOrder, PerturbError> {
    correction(product, vertex, false)
}

fn correction(
    product: &ProductSpec,
    vertex: &VertexSpec,
    constrained: bool,
) -> Result<FirstOrder, PerturbError> {
    if product.mode() != Mode::TimeOrdered {
        return Err(PerturbError::NotTimeOrdered);
    }
    if product.insertions().iter().any(|i| i.label == vertex.point) {
        return Err(PerturbError::PointClash(vertex.point.clone()));
    }
    let (legs, leg_constraints) = vertex.legs(product)?;
    let first_leg = product.len();
    let extended = product.extended(legs);
    let order = extended.label_order();
    let signs = extended.sign_table()?;
    let yukawa_pair =
        matches!(vertex.kind, VertexKind::Yukawa { .. }).then_some((first_leg, first_leg + 1));
    let mut terms = Vec::new();
    if extended.len() % 2 == 0 {
        for m in enumerate_matchings(&extended) {
            if yukawa_pair.is_some_and(|p| m.pairs().contains(&p)) {
                continue;
            }
            let Some((factors, orientation)) =
                crate::correlator::assemble_factors(&extended, &order, &m)
            else {
                continue;
            };
            // pair owning each position
            let mut owner = vec![0; extended.len()];
            for (v, &(i, j)) in m.pairs().iter().enumerate() {
                owner[i] = v;
                owner[j] = v;
            }
            let mut constraints = BlockConstraints::default();
            let mut feasible = true;
            if constrained {
                for &(a, b) in &leg_constraints.same {
                    constraints
                        .same
                        .push((owner[first_leg + a], owner[first_leg + b]));
                }
                for &(a, b) in &leg_constraints.distinct {
                    let (u, v) = (owner[first_leg + a], owner[first_leg + b]);
                    feasible &= u != v;
                    constraints.distinct.push((u, v));
                }
            }
            if !feasible {
                continue;
            }
            let graph = CrossingGraph::for_product(&extended, &m);
            let edges = crate::correlator::signed_edges(&graph, &signs)?;
            let coefficient: PPoly =
                partition_sum(graph.vertex_count(), &edges, &constraints).scale(orientation);
            let feynman = factors
                .iter()
                .filter(|k| k.kind != KernelKind::Kronecker)
                .count();
            terms.push(Term::new(coefficient, ((feynman + 1) % 4) as u8, factors));
        }
    }
    Ok(FirstOrder {
        coupling: vertex.coupling.clone(),
        point: vertex.point.clone(),
        result: CorrelatorResult::from_terms(terms, &order),
    })
}

/// Whether a vertex saturates the Green indices at order `p` and has odd degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub arity: usize,
    pub p: u32,
    pub unsaturated: bool,
    pub even_degree: bool,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        !self.unsaturated && !self.even_degree
    }
}

pub fn vertex_admissibility(vertex: &VertexSpec, p: u32) -> Admissibility {
    let arity = vertex.arity();
    let constrained = !matches!(vertex.kind, VertexKind::DiagonalPower { .. });
    Admissibility {
        arity,
        p,
        unsaturated: constrained && arity != p as usize,
        even_degree: matches!(vertex.kind, VertexKind::NestedAllDifferent { .. }) && arity % 2 == 0,
    }
}
