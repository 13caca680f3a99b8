use super::*;
use crate::algebra::Statistics;
use crate::correlator::{evaluate, Charge, Insertion};
use proptest::prelude::*;

fn neutral(name: &str) -> FieldSpec {
    FieldSpec::new(name, Statistics::ParaBose, Charge::Neutral)
}

fn charged(name: &str) -> FieldSpec {
    FieldSpec::new(name, Statistics::ParaBose, Charge::Charged)
}

fn fermion(name: &str) -> FieldSpec {
    FieldSpec::new(name, Statistics::ParaFermi, Charge::Charged)
}

fn product(fields: Vec<FieldSpec>, picks: &[(usize, bool)]) -> ProductSpec {
    let insertions = picks
        .iter()
        .enumerate()
        .map(|(k, &(f, adj))| Insertion::field(f, adj, format!("x{}", k + 1)))
        .collect();
    ProductSpec::time_ordered(fields, insertions).unwrap()
}

#[test]
fn neutral_two_and_four_point() {
    let two = product(vec![neutral("phi")], &[(0, false), (0, false)]);
    assert_eq!(n_point(&two).unwrap().to_string(), "p * iDF(x2-x1)");
    let four = product(vec![neutral("phi")], &[(0, false); 4]);
    assert_eq!(n_point(&four).unwrap(), evaluate(&four).unwrap());
    assert_eq!(
        n_point(&four).unwrap().to_string(),
        evaluate(&four).unwrap().to_string()
    );
}

#[test]
fn fermion_two_point_orientation() {
    let f = vec![fermion("psi")];
    let r = n_point(&product(f.clone(), &[(0, false), (0, true)])).unwrap();
    assert_eq!(r.to_string(), "p * iSF(x1-x2)");
    let r = n_point(&product(f, &[(0, true), (0, false)])).unwrap();
    assert_eq!(r.to_string(), "-p * iSF(x2-x1)");
}

#[test]
fn charged_and_fermion_four_points_agree() {
    for f in [charged("phi"), fermion("psi")] {
        for picks in [
            [(0, false), (0, true), (0, false), (0, true)],
            [(0, false), (0, false), (0, true), (0, true)],
            [(0, true), (0, false), (0, false), (0, true)],
        ] {
            let prod = product(vec![f.clone()], &picks);
            assert_eq!(
                n_point(&prod).unwrap(),
                evaluate(&prod).unwrap(),
                "{picks:?}"
            );
        }
    }
}

#[test]
fn mixed_fields_respect_overrides() {
    let fields = vec![neutral("phi"), neutral("chi")];
    let ins: Vec<_> = [0, 1, 0, 1]
        .iter()
        .enumerate()
        .map(|(k, &f)| Insertion::field(f, false, format!("x{}", k + 1)))
        .collect();
    let mut rules = RelativeRules::default();
    rules.set("phi", "chi", -1, 1).unwrap();
    let prod = ProductSpec::new(fields, ins, Mode::TimeOrdered, rules).unwrap();
    let a = n_point(&prod).unwrap();
    assert_eq!(a, evaluate(&prod).unwrap());
    assert!(!a.is_zero());
}

#[test]
fn missing_rule_is_reported() {
    let fields = vec![neutral("phi"), neutral("chi")];
    let ins: Vec<_> = [0, 1, 0, 1]
        .iter()
        .enumerate()
        .map(|(k, &f)| Insertion::field(f, false, format!("x{}", k + 1)))
        .collect();
    let prod = ProductSpec::new(
        fields,
        ins,
        Mode::TimeOrdered,
        RelativeRules::explicit_only(),
    )
    .unwrap();
    assert!(matches!(
        n_point(&prod),
        Err(GenfunError::Correlator(
            CorrelatorError::MissingRelativeRule(..)
        ))
    ));
}

#[test]
fn operator_strings_are_rejected() {
    let prod = ProductSpec::operator_string(
        neutral("a"),
        vec![Insertion::annihilator(0, "k"), Insertion::creator(0, "l")],
    )
    .unwrap();
    assert_eq!(n_point(&prod), Err(GenfunError::NotTimeOrdered));
}

#[test]
fn truncation_is_exact() {
    let cases = [
        product(vec![neutral("phi")], &[(0, false); 4]),
        product(
            vec![charged("phi")],
            &[(0, false), (0, true), (0, true), (0, false)],
        ),
        product(vec![fermion("psi")], &[(0, false), (0, true)]),
    ];
    for prod in cases {
        let m = prod.len() / 2;
        assert!(!n_point_at_order(&prod, m).unwrap().is_zero());
        assert!(n_point_at_order(&prod, m - 1).unwrap().is_zero());
        assert!(n_point_at_order(&prod, m + 1).unwrap().is_zero());
    }
}

#[test]
fn expansion_weights() {
    let f = FreeFunctional::new(vec![neutral("phi")], &RelativeRules::default());
    assert_eq!(f.w_free_expansion(2, 0), FunctionalState::unit());
    // (−i)^2 Y^2 / 2! / 2^2 in the one-sector case
    let one = f.w_free_expansion(1, 2);
    let (mono, s) = one.iter().next().unwrap();
    assert_eq!(mono.bilinears.get(&(0, 0)), Some(&2));
    assert_eq!(s.re, BigRational::new((-1).into(), 8.into()));
    assert_eq!(f.w_free_expansion(3, 2).len(), 6);
}

#[test]
fn nilpotent_components_vanish() {
    let f = FreeFunctional::new(vec![fermion("psi")], &RelativeRules::default());
    let c = SourceComponent {
        field: 0,
        block: 0,
        starred: true,
        partner: "x".into(),
    };
    assert_eq!(f.canonicalize(vec![c.clone(), c.clone()]).unwrap(), None);
    let b = FreeFunctional::new(vec![charged("phi")], &RelativeRules::default());
    assert!(b.canonicalize(vec![c.clone(), c]).unwrap().is_some());
}

#[test]
fn derivative_without_target_is_zero() {
    let f = FreeFunctional::new(vec![charged("phi")], &RelativeRules::default());
    let state = f.w_free_expansion(1, 1);
    let d = SourceDerivative {
        field: 0,
        block: 1,
        starred: true,
        point: "x".into(),
    };
    assert!(f.apply_derivative(&state, &d).unwrap().is_empty());
}

fn arb_components() -> impl Strategy<Value = (Statistics, Vec<SourceComponent>)> {
    let stat = prop_oneof![Just(Statistics::ParaBose), Just(Statistics::ParaFermi)];
    let comp =
        (0usize..2, 0usize..3, any::<bool>(), 0u8..3).prop_map(|(field, block, starred, x)| {
            SourceComponent {
                field,
                block,
                starred,
                partner: format!("x{x}"),
            }
        });
    (stat, prop::collection::vec(comp, 0..7))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn grading_confluence(
        (stat, list) in arb_components(),
        swaps in prop::collection::vec(0usize..6, 0..12),
    ) {
        let fields = vec![
            FieldSpec::new("phi", stat, Charge::Charged),
            FieldSpec::new("chi", stat, Charge::Charged),
        ];
        let f = FreeFunctional::new(fields, &RelativeRules::default());
        let mut shuffled = list.clone();
        let mut sign = 1;
        for s in swaps {
            if s + 1 < shuffled.len() {
                let (a, b) = (&shuffled[s], &shuffled[s + 1]);
                sign *= f.grading_sign(a.field, a.block, b.field, b.block).unwrap();
                shuffled.swap(s, s + 1);
            }
        }
        let direct = f.canonicalize(list).unwrap();
        let via = f.canonicalize(shuffled).unwrap();
        match (direct, via) {
            (None, None) => {}
            (Some((a, sa)), Some((b, sb))) => {
                prop_assert_eq!(a, b);
                prop_assert_eq!(sa, sb * sign);
            }
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }
}

fn arb_product() -> impl Strategy<Value = ProductSpec> {
    let field = prop_oneof![
        Just(neutral("phi")),
        Just(charged("phi")),
        Just(fermion("phi"))
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
        prop::collection::vec((0..nfields, any::<bool>()), 2 * half)
            .prop_map(move |picks| product(fields.clone(), &picks))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree(prod in arb_product()) {
        prop_assert_eq!(n_point(&prod).unwrap(), evaluate(&prod).unwrap());
    }
}
