use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use ewcheck::dsl::{
    bind_symbols, brute_force_expression, check_expression, evaluate_with_plans, left_fold_plans, parse_syntax,
    plan_expression, Expression, Factor, Index, IndexGroup, Span, SymbolSource, SymbolTable, Term,
};
use ewcheck::tensor::{Slot, Species, Statistics, Tensor};

fn index() -> impl Strategy<Value = Index> {
    (prop::char::range('a', 'z'), any::<bool>()).prop_map(|(letter, dotted)| Index {
        letter,
        dotted,
        at: Span(0),
    })
}

fn factor() -> impl Strategy<Value = Factor> {
    let group = (any::<bool>(), prop::collection::vec(index(), 0..4)).prop_map(|(upper, indices)| IndexGroup { upper, indices });
    ("[a-zA-Z][a-zA-Z0-9]{0,5}", prop::collection::vec(group, 0..3)).prop_map(|(name, groups)| Factor {
        name,
        groups,
        at: Span(0),
    })
}

fn term() -> impl Strategy<Value = Term> {
    let coeff = (-50i64..50, 1i64..12)
        .prop_filter("non-zero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| Rational64::new(n, d));
    (coeff, prop::collection::vec(factor(), 0..4)).prop_map(|(coeff, factors)| Term { coeff, factors })
}

fn expression() -> impl Strategy<Value = Expression> {
    prop::collection::vec(term(), 0..4).prop_map(|terms| Expression { terms })
}

const SPECIES: [Species; 4] = [Species::Spacetime, Species::Isospin, Species::Spinor, Species::SpinorDotted];

/// A single well-formed term: each pair puts one upper and one lower index
/// on (possibly the same) factors; each free index sits on one factor.
#[derive(Debug, Clone)]
struct Shape {
    factors: usize,
    pairs: Vec<(usize, usize, usize, bool)>,
    free: Vec<(usize, usize, bool)>,
    fermionic: Vec<bool>,
    seed: u64,
}

fn shape() -> impl Strategy<Value = Shape> {
    (2usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec((0..4usize, 0..n, 0..n, any::<bool>()), 1..=5),
            prop::collection::vec((0..4usize, 0..n, any::<bool>()), 0..=2),
            prop::collection::vec(prop::bool::weighted(0.3), n),
            any::<u64>(),
        )
            .prop_map(move |(pairs, free, fermionic, seed)| Shape {
                factors: n,
                pairs,
                free,
                fermionic,
                seed,
            })
    })
}

fn build(shape: &Shape) -> (Expression, SymbolTable, Vec<Index>) {
    let mut slots: Vec<Vec<(Index, bool, Species)>> = vec![Vec::new(); shape.factors];
    let mut letters = 'a'..='z';
    let mut next = |sp: Species| Index {
        letter: letters.next().expect("enough letters"),
        dotted: sp == Species::SpinorDotted,
        at: Span(0),
    };
    for &(s, f1, f2, flip) in &shape.pairs {
        let ix = next(SPECIES[s]);
        slots[f1].push((ix.clone(), !flip, SPECIES[s]));
        slots[f2].push((ix, flip, SPECIES[s]));
    }
    let mut free = Vec::new();
    for &(s, f, up) in &shape.free {
        let ix = next(SPECIES[s]);
        slots[f].push((ix.clone(), up, SPECIES[s]));
        free.push(ix);
    }
    let mut table = SymbolTable::empty();
    let mut factors = Vec::new();
    // one generator per fermionic component; keep the total small
    let mut budget = 24;
    for (k, s) in slots.iter().enumerate() {
        let name = format!("X{k}");
        let size: usize = s.iter().map(|(_, _, sp)| sp.dim()).product();
        let stats = if shape.fermionic[k] && size <= budget {
            budget -= size;
            Statistics::Fermionic
        } else {
            Statistics::Bosonic
        };
        let decl = s.iter().map(|(_, up, sp)| if *up { Slot::up(*sp) } else { Slot::down(*sp) }).collect();
        table.declare(&name, decl, SymbolSource::Sample(stats));
        let groups = s
            .iter()
            .map(|(ix, up, _)| IndexGroup {
                upper: *up,
                indices: vec![ix.clone()],
            })
            .collect();
        factors.push(Factor { name, groups, at: Span(0) });
    }
    let e = Expression {
        terms: vec![Term {
            coeff: Rational64::new(3, 2),
            factors,
        }],
    };
    (e, table, free)
}

fn rel(a: &Tensor, b: &Tensor) -> f64 {
    let d = a.add(&b.scale(Complex64::new(-1.0, 0.0))).unwrap();
    d.max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(e in expression()) {
        let text = e.to_string();
        let back = parse_syntax(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn planned_contraction_matches_nested_loops(shape in shape()) {
        let (e, table, free) = build(&shape);
        let checked = check_expression(e, &table, &free).unwrap();
        let bindings = bind_symbols(&checked, &table, shape.seed).unwrap();
        let best = evaluate_with_plans(&checked, &plan_expression(&checked).unwrap(), &bindings, &table).unwrap();
        let naive = evaluate_with_plans(&checked, &left_fold_plans(&checked).unwrap(), &bindings, &table).unwrap();
        let brute = brute_force_expression(&checked, &bindings, &table).unwrap();
        prop_assert!(rel(&best, &brute) <= 1e-12, "{}", checked.ast);
        prop_assert!(rel(&naive, &brute) <= 1e-12, "{}", checked.ast);
        let cost = |p: Vec<ewcheck::dsl::TermPlan>| p.iter().map(|t| t.plan.total_cost).sum::<u64>();
        prop_assert!(cost(plan_expression(&checked).unwrap()) <= cost(left_fold_plans(&checked).unwrap()));
    }
}
