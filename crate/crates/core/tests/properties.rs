use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use lpcheck::probe::{infallible, Syntactic};
use lpcheck::queens::nqueens_program;
use lpcheck::queens_spec::{down_diag_number, in_s_pq, up_diag_number, SampleBound, SpecSet};
use lpcheck::verify::{
    check_covered, row_shift_check, row_shift_instances, RowShiftConfig, VerifyConfig,
};
use lpcheck::{mgu, parse_term, Atom, Signature, Substitution, Term, UnifyOptions, Var};

fn pool(which: usize) -> &'static [Var] {
    static POOLS: OnceLock<[Vec<Var>; 2]> = OnceLock::new();
    &POOLS.get_or_init(|| {
        [
            ["X", "Y", "Z", "W"].map(Var::named).to_vec(),
            ["P", "Q", "R"].map(Var::named).to_vec(),
        ]
    })[which]
}

fn ground_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::numeral(0)),
        Just(Term::nil()),
        Just(Term::constant("a")),
        Just(Term::constant("b")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("s", vec![t])),
            (inner.clone(), inner).prop_map(|(h, t)| Term::cons(h, t)),
        ]
    })
}

fn term_over(which: usize) -> impl Strategy<Value = Term> {
    let vars = pool(which);
    let leaf = prop_oneof![
        3 => (0..vars.len()).prop_map(move |i| Term::Var(vars[i].clone())),
        1 => Just(Term::numeral(0)),
        1 => Just(Term::nil()),
        1 => Just(Term::constant("a")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("s", vec![t])),
            (inner.clone(), inner).prop_map(|(h, t)| Term::cons(h, t)),
        ]
    })
}

fn subst_over(domain: usize, range: usize) -> impl Strategy<Value = Substitution> {
    let vars = pool(domain);
    proptest::collection::vec(proptest::option::of(term_over(range)), vars.len()).prop_map(
        move |ts| {
            Substitution::from_pairs(
                vars.iter()
                    .zip(ts)
                    .filter_map(|(v, t)| t.map(|t| (v.clone(), t))),
            )
        },
    )
}

fn sig() -> Signature {
    Signature::default_queens()
}

/// One-way matching: is `g` an instance of `p`?
fn is_instance(p: &Term, g: &Term, env: &mut Vec<(Var, Term)>) -> bool {
    match p {
        Term::Var(v) => match env.iter().find(|(w, _)| w == v) {
            Some((_, t)) => t == g,
            None => {
                env.push((v.clone(), g.clone()));
                true
            }
        },
        Term::App(f, pa) => match g {
            Term::App(h, ga) if f == h && pa.len() == ga.len() => pa
                .iter()
                .zip(ga.iter())
                .all(|(x, y)| is_instance(x, y, env)),
            _ => false,
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn numerals_round_trip(n in 0u64..200) {
        let t = Term::numeral(n);
        prop_assert_eq!(t.numeral_value(), Some(n));
        prop_assert_eq!(t.to_string(), n.to_string());
        prop_assert_eq!(parse_term(&n.to_string(), &sig()).unwrap(), t);
    }

    #[test]
    fn ground_terms_print_and_parse(t in ground_term()) {
        let back = parse_term(&t.to_string(), &sig()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn open_terms_print_and_parse_up_to_renaming(t in term_over(0)) {
        let once = parse_term(&t.to_string(), &sig()).unwrap();
        let twice = parse_term(&once.to_string(), &sig()).unwrap();
        prop_assert_eq!(once.variant_key(), t.variant_key());
        prop_assert_eq!(twice.to_string(), once.to_string());
    }

    #[test]
    fn kth_member_commutes_with_substitution(t in term_over(0), s in subst_over(0, 1), k in 1usize..5) {
        if let Some(e) = t.kth_member(k) {
            prop_assert_eq!(s.apply(&t).kth_member(k), Some(s.apply(&e)));
        }
    }

    #[test]
    fn composition_applies_in_sequence(t in term_over(0), a in subst_over(0, 1), b in subst_over(1, 0)) {
        prop_assert_eq!(a.then(&b).apply(&t), b.apply(&a.apply(&t)));
    }

    #[test]
    fn composition_is_associative(
        t in term_over(0),
        a in subst_over(0, 1),
        b in subst_over(1, 0),
        c in subst_over(0, 1),
    ) {
        let left = a.then(&b).then(&c);
        let right = a.then(&b.then(&c));
        prop_assert_eq!(left.apply(&t), right.apply(&t));
    }

    #[test]
    fn mgu_unifies_and_is_idempotent(s in term_over(0), t in term_over(0)) {
        let opts = UnifyOptions::default();
        let st = mgu(&s, &t, opts);
        let ts = mgu(&t, &s, opts);
        prop_assert_eq!(st.is_some(), ts.is_some());
        if let (Some(a), Some(b)) = (st, ts) {
            prop_assert_eq!(a.apply(&s), a.apply(&t));
            prop_assert!(a.is_idempotent());
            prop_assert_eq!(a.apply(&s).variant_key(), b.apply(&s).variant_key());
        }
    }

    #[test]
    fn mgu_is_most_general(t in term_over(0), rho in subst_over(0, 1)) {
        // t and rho(t) share no variables, so they unify and rho(t) is an
        // instance of the unified term
        let s = rho.apply(&t);
        let sigma = mgu(&t, &s, UnifyOptions::default());
        prop_assert!(sigma.is_some());
        let sigma = sigma.unwrap();
        let u = sigma.apply(&t);
        prop_assert_eq!(&u, &sigma.apply(&s));
        prop_assert!(is_instance(&u, &s, &mut Vec::new()));
    }

    #[test]
    fn diagonal_equality_is_row_independent(
        j in 1i64..8, k in 1i64..8, j2 in 1i64..8, k2 in 1i64..8, i in 0i64..8, i2 in 0i64..8,
    ) {
        prop_assert_eq!(
            up_diag_number(j, k, i) == up_diag_number(j2, k2, i),
            up_diag_number(j, k, i2) == up_diag_number(j2, k2, i2)
        );
        prop_assert_eq!(
            down_diag_number(j, k, i) == down_diag_number(j2, k2, i),
            down_diag_number(j, k, i2) == down_diag_number(j2, k2, i2)
        );
    }

    #[test]
    fn s_pq_closed_under_prefixing(idx in 0usize..4000, x in ground_term(), y in ground_term(), z in ground_term()) {
        let b = SampleBound::new(2, 3, vec![Term::constant("a")], vec![Term::nil()]);
        let a = SpecSet::SPq.sample(&b).nth(idx);
        if let Some(a) = a {
            let ext = Atom::new(
                "pq",
                vec![
                    a.args[0].clone(),
                    Term::cons(x, a.args[1].clone()),
                    Term::cons(y, a.args[2].clone()),
                    Term::cons(z, a.args[3].clone()),
                ],
            );
            prop_assert!(infallible(in_s_pq(&Syntactic, &ext)), "{}", ext);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_shift_both_directions(seed in any::<u64>()) {
        let cfg = RowShiftConfig { instances: 200, seed, ..RowShiftConfig::default() };
        let sig = Arc::new(Signature::default_queens());
        for inst in row_shift_instances(&cfg) {
            let out = row_shift_check(&inst, &sig, 4);
            prop_assert!(out.forward_holds, "{:?}", inst);
            if out.backward_premise {
                prop_assert!(out.backward_witness.is_some(), "{:?}", inst);
            }
        }
    }

    #[test]
    fn coverage_witnesses_reverify(idx in 0usize..200_000) {
        let b = SampleBound::new(3, 5, vec![Term::constant("a")], vec![Term::nil()]);
        let p = nqueens_program();
        let cfg = VerifyConfig::new(Signature::default_queens(), 4);
        if let Some(a) = SpecSet::S0.sample(&b).nth(idx) {
            let w = check_covered(&a, &p, SpecSet::S0, &cfg).witness;
            prop_assert!(w.is_some(), "{}", a);
            prop_assert!(w.unwrap().verify(&a, &p, SpecSet::S0));
        }
    }
}
