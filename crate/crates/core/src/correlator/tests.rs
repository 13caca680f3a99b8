use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::algebra::Statistics::{self, ParaBose, ParaFermi};

fn neutral(name: &str) -> FieldSpec {
    FieldSpec::new(name, ParaBose, Charge::Neutral)
}

fn charged(name: &str) -> FieldSpec {
    FieldSpec::new(name, ParaBose, Charge::Charged)
}

fn fermion(name: &str) -> FieldSpec {
    FieldSpec::new(name, ParaFermi, Charge::Charged)
}

fn ins(adjoint: bool, label: &str) -> Insertion {
    Insertion::field(0, adjoint, label)
}

fn df(a: &str, b: &str) -> Kernel {
    Kernel {
        kind: KernelKind::ScalarFeynman,
        args: [a.into(), b.into()],
    }
}

fn sf(a: &str, b: &str) -> Kernel {
    Kernel::fermion(a, b)
}

fn poly(c: &[i64]) -> PPoly {
    PPoly::from_i64s(c)
}

/// Brute-force sum over every assignment of `p0` indices to the vertices.
fn brute_force(g: &CrossingGraph, stat: Statistics, p0: u32) -> i64 {
    let v = g.vertex_count() as u32;
    let mut total = 0i64;
    for code in 0..p0.pow(v) {
        let idx: Vec<u32> = (0..v).map(|k| (code / p0.pow(k)) % p0).collect();
        let sign: i32 = g
            .edges()
            .iter()
            .map(|&(a, b)| stat.exchange_sign(idx[a] == idx[b]))
            .product();
        total += sign as i64;
    }
    total
}

/// Lagrange interpolation through `(x_k, y_k)`, returning coefficients.
fn interpolate(points: &[(i64, i64)]) -> Vec<BigRational> {
    let n = points.len();
    let mut out = vec![BigRational::zero(); n];
    for (k, &(xk, yk)) in points.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (m, &(xm, _)) in points.iter().enumerate() {
            if m == k {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (d, c) in basis.iter().enumerate() {
                next[d + 1] += c.clone();
                next[d] -= c.clone() * BigRational::from_integer(xm.into());
            }
            basis = next;
            denom *= BigRational::from_integer((xk - xm).into());
        }
        for (d, c) in basis.into_iter().enumerate() {
            out[d] += c * BigRational::from_integer(yk.into()) / denom.clone();
        }
    }
    while out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

/// All perfect matchings of `0..n` with no admissibility restriction.
fn all_matchings(n: usize) -> Vec<Matching> {
    let product = ProductSpec::time_ordered(
        vec![neutral("phi")],
        (0..n).map(|k| ins(false, &format!("x{k}"))).collect(),
    )
    .unwrap();
    enumerate_matchings(&product)
}

/// Parity of the permutation that lists the pairs side by side.
fn pairing_permutation_parity(m: &Matching) -> usize {
    let perm: Vec<usize> = m.pairs().iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2
}

#[test]
fn matchings_two_point() {
    let prod = ProductSpec::time_ordered(
        vec![neutral("phi")],
        vec![ins(false, "x2"), ins(false, "x1")],
    )
    .unwrap();
    let ms = enumerate_matchings(&prod);
    assert_eq!(ms, vec![Matching::new(vec![(0, 1)])]);
}

#[test]
fn matchings_charged_four_point() {
    let prod = ProductSpec::time_ordered(
        vec![charged("phi")],
        vec![
            ins(true, "x4"),
            ins(true, "x3"),
            ins(false, "x2"),
            ins(false, "x1"),
        ],
    )
    .unwrap();
    let ms = enumerate_matchings(&prod);
    assert_eq!(
        ms,
        vec![
            Matching::new(vec![(0, 2), (1, 3)]),
            Matching::new(vec![(0, 3), (1, 2)]),
        ]
    );
    assert_eq!(ms[1].to_string(), "{(1,4),(2,3)}");
}

#[test]
fn odd_products_have_no_matchings() {
    let prod = ProductSpec::time_ordered(
        vec![neutral("phi")],
        vec![ins(false, "x1"), ins(false, "x2"), ins(false, "x3")],
    )
    .unwrap();
    assert!(enumerate_matchings(&prod).is_empty());
    assert!(evaluate(&prod).unwrap().is_zero());
}

#[test]
fn crossing_graph_examples() {
    assert!(crossing_edges(&Matching::new(vec![(0, 1), (2, 3)]))
        .edges()
        .is_empty());
    assert_eq!(
        crossing_edges(&Matching::new(vec![(0, 2), (1, 3)])).edges(),
        &[(0, 1)]
    );
    assert!(crossing_edges(&Matching::new(vec![(0, 3), (1, 2)]))
        .edges()
        .is_empty());
}

#[test]
fn coefficient_examples() {
    let single = CrossingGraph::from_edges(1, vec![]);
    assert_eq!(
        matching_coefficient(&single, &SignTable::uniform(ParaBose)).unwrap(),
        PPoly::p()
    );
    let cross = CrossingGraph::from_edges(2, vec![(0, 1)]);
    assert_eq!(
        matching_coefficient(&cross, &SignTable::uniform(ParaBose)).unwrap(),
        poly(&[0, 2, -1])
    );
    assert_eq!(
        matching_coefficient(&cross, &SignTable::uniform(ParaFermi)).unwrap(),
        poly(&[0, -2, 1])
    );
}

#[test]
fn triangle_coefficient_matches_brute_force() {
    let tri = CrossingGraph::from_edges(3, vec![(0, 1), (0, 2), (1, 2)]);
    let c = matching_coefficient(&tri, &SignTable::uniform(ParaBose)).unwrap();
    for p0 in 1..=4 {
        assert_eq!(
            c.eval(p0 as i64),
            BigInt::from(brute_force(&tri, ParaBose, p0))
        );
    }
    // frozen from the brute-force sums 1, 8, 15, 0 at p0 = 1..4
    assert_eq!(c, poly(&[0, -4, 6, -1]));
}

#[test]
fn coefficients_interpolate_brute_force() {
    for n in [2, 4, 6, 8] {
        for m in all_matchings(n) {
            let g = crossing_edges(&m);
            for stat in [ParaBose, ParaFermi] {
                let c = matching_coefficient(&g, &SignTable::uniform(stat)).unwrap();
                let pairs = g.vertex_count() as u32;
                let points: Vec<(i64, i64)> = (1..=pairs + 1)
                    .map(|p0| (p0 as i64, brute_force(&g, stat, p0)))
                    .collect();
                let interp = interpolate(&points);
                assert!(c.degree().unwrap_or(0) <= pairs as usize);
                assert_eq!(interp.len(), c.coeffs().len(), "{m} {stat}");
                for (a, b) in interp.iter().zip(c.coeffs()) {
                    assert_eq!(a, &BigRational::from_integer(b.clone()));
                }
            }
        }
    }
}

#[test]
fn p_equals_one_reduces_to_wick() {
    for n in [2, 4, 6, 8] {
        for m in all_matchings(n) {
            let g = crossing_edges(&m);
            let pb = matching_coefficient(&g, &SignTable::uniform(ParaBose)).unwrap();
            let pf = matching_coefficient(&g, &SignTable::uniform(ParaFermi)).unwrap();
            assert_eq!(pb.eval(1), BigInt::one());
            let parity = pairing_permutation_parity(&m);
            let expected = if parity == 0 { 1 } else { -1 };
            assert_eq!(pf.eval(1), BigInt::from(expected), "{m}");
        }
    }
}

#[test]
fn parafermi_parabose_sign_relation() {
    for n in [0, 2, 4, 6, 8, 10] {
        for m in all_matchings(n) {
            let g = crossing_edges(&m);
            let pb = matching_coefficient(&g, &SignTable::uniform(ParaBose)).unwrap();
            let pf = matching_coefficient(&g, &SignTable::uniform(ParaFermi)).unwrap();
            let sign = if m.crossing_count() % 2 == 0 { 1 } else { -1 };
            assert_eq!(pf, pb.scale(sign), "{m}");
        }
    }
}

#[test]
fn neutral_two_point() {
    let prod = ProductSpec::time_ordered(
        vec![neutral("phi")],
        vec![ins(false, "x2"), ins(false, "x1")],
    )
    .unwrap();
    let r = evaluate(&prod).unwrap();
    assert_eq!(r.terms().len(), 1);
    assert_eq!(r.terms()[0].coefficient, PPoly::p());
    assert_eq!(r.terms()[0].factors, vec![df("x1", "x2")]);
    assert_eq!(r.terms()[0].i_power, 1);
    assert_eq!(r.to_string(), "p * iDF(x1-x2)");
}

#[test]
fn neutral_four_point() {
    let prod = ProductSpec::time_ordered(
        vec![neutral("phi")],
        ["x4", "x3", "x2", "x1"]
            .iter()
            .map(|l| ins(false, l))
            .collect(),
    )
    .unwrap();
    let r = evaluate(&prod).unwrap();
    assert_eq!(r.terms().len(), 3);
    let sq = poly(&[0, 0, 1]);
    assert_eq!(
        r.coefficient_of(&[df("x1", "x2"), df("x3", "x4")]),
        Some(&sq)
    );
    assert_eq!(
        r.coefficient_of(&[df("x2", "x4"), df("x1", "x3")]),
        Some(&poly(&[0, 2, -1]))
    );
    assert_eq!(
        r.coefficient_of(&[df("x1", "x4"), df("x2", "x3")]),
        Some(&sq)
    );
    assert!(r.terms().iter().all(|t| t.i_power == 2));
    assert_eq!(
        r.to_string(),
        "p^2 * iDF(x3-x4) * iDF(x1-x2) + (2p - p^2) * iDF(x2-x4) * iDF(x1-x3) + p^2 * iDF(x1-x4) * iDF(x2-x3)"
    );
}

#[test]
fn charged_four_points() {
    let prod = ProductSpec::time_ordered(
        vec![charged("phi")],
        vec![
            ins(true, "x4"),
            ins(true, "x3"),
            ins(false, "x2"),
            ins(false, "x1"),
        ],
    )
    .unwrap();
    let r = evaluate(&prod).unwrap();
    assert_eq!(r.terms().len(), 2);
    assert_eq!(
        r.coefficient_of(&[df("x1", "x3"), df("x2", "x4")]),
        Some(&poly(&[0, 2, -1]))
    );
    assert_eq!(
        r.coefficient_of(&[df("x1", "x4"), df("x2", "x3")]),
        Some(&poly(&[0, 0, 1]))
    );

    let alt = ProductSpec::time_ordered(
        vec![charged("phi")],
        vec![
            ins(true, "x4"),
            ins(false, "x3"),
            ins(true, "x2"),
            ins(false, "x1"),
        ],
    )
    .unwrap();
    let r = evaluate(&alt).unwrap();
    assert_eq!(r.terms().len(), 2);
    assert_eq!(
        r.coefficient_of(&[df("x1", "x2"), df("x3", "x4")]),
        Some(&poly(&[0, 0, 1]))
    );
    assert_eq!(
        r.coefficient_of(&[df("x1", "x4"), df("x2", "x3")]),
        Some(&poly(&[0, 0, 1]))
    );
}

#[test]
fn parafermi_four_point() {
    let prod = ProductSpec::time_ordered(
        vec![fermion("psi")],
        vec![
            ins(false, "x4"),
            ins(false, "x3"),
            ins(true, "x2"),
            ins(true, "x1"),
        ],
    )
    .unwrap();
    let r = evaluate(&prod).unwrap();
    assert_eq!(
        r.coefficient_of(&[sf("x3", "x2"), sf("x4", "x1")]),
        Some(&poly(&[0, 0, 1]))
    );
    assert_eq!(
        r.coefficient_of(&[sf("x3", "x1"), sf("x4", "x2")]),
        Some(&poly(&[0, -2, 1]))
    );
    assert_eq!(r.terms().len(), 2);
}

#[test]
fn parafermi_two_point_orientation() {
    let forward =
        ProductSpec::time_ordered(vec![fermion("psi")], vec![ins(false, "x"), ins(true, "y")])
            .unwrap();
    let backward =
        ProductSpec::time_ordered(vec![fermion("psi")], vec![ins(true, "y"), ins(false, "x")])
            .unwrap();
    let f = evaluate(&forward).unwrap();
    let b = evaluate(&backward).unwrap();
    assert_eq!(f.coefficient_of(&[sf("x", "y")]), Some(&PPoly::p()));
    assert_eq!(b.coefficient_of(&[sf("x", "y")]), Some(&-PPoly::p()));
}

#[test]
fn operator_string_norm() {
    let prod = ProductSpec::operator_string(
        neutral("a"),
        vec![Insertion::annihilator(0, "k"), Insertion::creator(0, "l")],
    )
    .unwrap();
    let r = evaluate(&prod).unwrap();
    assert_eq!(r.to_string(), "p * delta(k,l)");
    assert_eq!(r.terms()[0].i_power, 0);

    let wrong_order = ProductSpec::operator_string(
        neutral("a"),
        vec![Insertion::creator(0, "k"), Insertion::annihilator(0, "k")],
    )
    .unwrap();
    assert!(evaluate(&wrong_order).unwrap().is_zero());

    let concrete = ProductSpec::operator_string(
        neutral("a"),
        vec![
            Insertion::annihilator(0, "1"),
            Insertion::annihilator(0, "1"),
            Insertion::creator(0, "1"),
            Insertion::creator(0, "1"),
        ],
    )
    .unwrap();
    // p^2 + p(2 - p) = 2p
    assert_eq!(evaluate(&concrete).unwrap().to_string(), "2p");
}

#[test]
fn empty_product_is_unit() {
    let prod = ProductSpec::time_ordered(vec![neutral("phi")], vec![]).unwrap();
    assert_eq!(evaluate(&prod).unwrap(), CorrelatorResult::unit());
    assert_eq!(evaluate(&prod).unwrap().to_string(), "1");
}

#[test]
fn green_component_examples() {
    let two = ProductSpec::time_ordered(
        vec![neutral("phi")],
        vec![ins(false, "x2"), ins(false, "x1")],
    )
    .unwrap();
    let r = evaluate_green_components(&two, &[1, 1], 2).unwrap();
    assert_eq!(r.to_string(), "iDF(x1-x2)");
    assert!(evaluate_green_components(&two, &[1, 2], 2)
        .unwrap()
        .is_zero());
    assert!(evaluate_green_components(&two, &[1, 3], 2).is_err());

    let four = ProductSpec::time_ordered(
        vec![neutral("phi")],
        ["x4", "x3", "x2", "x1"]
            .iter()
            .map(|l| ins(false, l))
            .collect(),
    )
    .unwrap();
    let r = evaluate_green_components(&four, &[1, 2, 1, 2], 2).unwrap();
    assert_eq!(r.terms().len(), 1);
    assert_eq!(
        r.coefficient_of(&[df("x2", "x4"), df("x1", "x3")]),
        Some(&PPoly::constant(-1))
    );
}

#[test]
fn missing_relative_rule_is_an_error() {
    let prod = ProductSpec::new(
        vec![neutral("phi"), neutral("chi")],
        vec![
            Insertion::field(0, false, "x1"),
            Insertion::field(1, false, "x2"),
            Insertion::field(0, false, "x3"),
            Insertion::field(1, false, "x4"),
        ],
        Mode::TimeOrdered,
        RelativeRules::explicit_only(),
    )
    .unwrap();
    assert!(matches!(
        evaluate(&prod),
        Err(CorrelatorError::MissingRelativeRule(_, _))
    ));

    let mut rules = RelativeRules::explicit_only();
    rules.set("phi", "chi", 1, 1).unwrap();
    let prod = ProductSpec::new(
        prod.fields().to_vec(),
        prod.insertions().to_vec(),
        Mode::TimeOrdered,
        rules,
    )
    .unwrap();
    // commuting fields: crossing weight is p^2
    let r = evaluate(&prod).unwrap();
    assert_eq!(r.terms()[0].coefficient, poly(&[0, 0, 1]));
}

#[test]
fn neutral_term_counts_are_double_factorials() {
    for (m, dfact) in [(1usize, 1usize), (2, 3), (3, 15), (4, 105), (5, 945)] {
        let labels: Vec<String> = (1..=2 * m).map(|k| format!("x{k}")).collect();
        let prod = ProductSpec::time_ordered(
            vec![neutral("phi")],
            labels.iter().map(|l| ins(false, l)).collect(),
        )
        .unwrap();
        assert_eq!(enumerate_matchings(&prod).len(), dfact);
        // distinct point pairs: no two matchings share a factor multiset
        assert!(evaluate(&prod).unwrap().terms().len() <= dfact);
    }
}

#[test]
fn deterministic_output() {
    let prod = ProductSpec::time_ordered(
        vec![neutral("phi")],
        (1..=6).map(|k| ins(false, &format!("x{k}"))).collect(),
    )
    .unwrap();
    let a = evaluate(&prod).unwrap().to_string();
    let b = evaluate(&prod).unwrap().to_string();
    assert_eq!(a, b);
}

/// Random small products over one or two fields.
fn arb_product() -> impl Strategy<Value = ProductSpec> {
    let field = prop_oneof![
        Just(neutral("phi")),
        Just(charged("phi")),
        Just(fermion("phi")),
    ];
    let second = prop_oneof![
        Just(None),
        Just(Some(neutral("chi"))),
        Just(Some(charged("chi"))),
        Just(Some(fermion("chi"))),
    ];
    (field, second, 0usize..4).prop_flat_map(|(a, b, half)| {
        let b: Option<FieldSpec> = b;
        let nfields: usize = if b.is_some() { 2 } else { 1 };
        let fields: Vec<FieldSpec> = std::iter::once(a).chain(b).collect();
        prop::collection::vec((0..nfields, any::<bool>()), 2 * half).prop_map(move |picks| {
            let insertions = picks
                .iter()
                .enumerate()
                .map(|(k, &(f, adj))| Insertion::field(f, adj, format!("x{}", k + 1)))
                .collect();
            ProductSpec::time_ordered(fields.clone(), insertions).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Summing fixed-component values over all index assignments gives the
    /// symbolic result at that p.
    #[test]
    fn green_ansatz_consistency(prod in arb_product(), p0 in 1u32..=3) {
        let symbolic = evaluate(&prod).unwrap();
        let n = prod.len() as u32;
        let mut summed = std::collections::BTreeMap::<Vec<Kernel>, BigInt>::new();
        for code in 0..p0.pow(n) {
            let idx: Vec<u32> = (0..n).map(|k| (code / p0.pow(k)) % p0 + 1).collect();
            let r = evaluate_green_components(&prod, &idx, p0).unwrap();
            for t in r.terms() {
                *summed.entry(t.factors.clone()).or_default() += t.coefficient.eval(0);
            }
        }
        summed.retain(|_, v| !v.is_zero());
        let mut expected = std::collections::BTreeMap::new();
        for t in symbolic.terms() {
            let v = t.coefficient.eval(p0 as i64);
            if !v.is_zero() {
                expected.insert(t.factors.clone(), v);
            }
        }
        prop_assert_eq!(summed, expected);
    }
}
