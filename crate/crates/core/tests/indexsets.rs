use std::collections::BTreeSet;

use num_rational::Rational64;
use proptest::prelude::*;
use scri::indexsets::*;

const A: f64 = 3.5;

type Key = (Rational64, Rational64, u32);

/// Explicit enumeration of all pairs, closed by fixpoint iteration.
fn oracle_close(mut s: BTreeSet<Key>, depth: f64) -> BTreeSet<Key> {
    let inside = |im: Rational64| (*im.numer() as f64 / *im.denom() as f64) > -depth + 1e-12;
    s.retain(|&(_, im, _)| inside(im));
    loop {
        let mut add = Vec::new();
        for &(re, im, k) in &s {
            for l in 0..k {
                add.push((re, im, l));
            }
            let next = im - 1;
            if inside(next) {
                add.push((re, next, k));
            }
        }
        let before = s.len();
        s.extend(add);
        if s.len() == before {
            return s;
        }
    }
}

fn oracle_ext_union(e: &BTreeSet<Key>, f: &BTreeSet<Key>, depth: f64) -> BTreeSet<Key> {
    let mut out: BTreeSet<Key> = e.union(f).copied().collect();
    for &(r1, i1, l1) in e {
        for &(r2, i2, l2) in f {
            if r1 == r2 && i1 == i2 {
                out.insert((r1, i1, l1 + l2 + 1));
            }
        }
    }
    oracle_close(out, depth)
}

fn keys(s: &IndexSet) -> BTreeSet<Key> {
    s.entries()
        .into_iter()
        .map(|e| match e.z {
            Exponent::Exact { re, im } => (re, im, e.k),
            Exponent::Approx { .. } => panic!("expected exact exponents"),
        })
        .collect()
}

fn ex(re: i64, im: i64) -> Exponent {
    Exponent::exact(Rational64::from_integer(re), Rational64::from_integer(im))
}

fn set(items: &[(i64, i64, u32)], depth: f64) -> IndexSet {
    IndexSet::from_entries(items.iter().map(|&(r, i, k)| IndexEntry::new(ex(r, i), k)), depth)
}

fn raw_keys(items: &[(Rational64, Rational64, u32)]) -> BTreeSet<Key> {
    items.iter().copied().collect()
}

fn build(items: &[(Rational64, Rational64, u32)]) -> IndexSet {
    IndexSet::from_entries(items.iter().map(|&(r, i, k)| IndexEntry::new(Exponent::exact(r, i), k)), A)
}

fn arb_items() -> impl Strategy<Value = Vec<(Rational64, Rational64, u32)>> {
    prop::collection::vec(
        ((-2i64..=2), (0i64..=6), (0u32..=2)).prop_map(|(r, i, k)| {
            (Rational64::new(r, 2), Rational64::new(-i, 2), k)
        }),
        0..5,
    )
}

#[test]
fn extended_union_examples() {
    let half = |re: i64, im: i64| Exponent::exact(Rational64::new(re, 2), Rational64::new(im, 2));
    let e = set(&[(0, 0, 0)], 1.5);
    let f = IndexSet::from_entries([IndexEntry::new(half(0, -1), 0)], 1.5);
    let u = e.extended_union(&f).unwrap();
    assert!(u.same_as(&e.union(&f).unwrap()));

    // The closure of {(0,0)} already contains -i, so a second set starting
    // at -i collides there.
    let g = set(&[(0, -1, 0)], 1.5);
    let u = e.extended_union(&g).unwrap();
    assert_eq!(u.max_log(&ex(0, -1)), Some(1));
    assert_eq!(u.max_log(&ex(0, 0)), Some(0));

    let a = set(&[(0, 0, 0)], A);
    let u = a.extended_union(&a).unwrap();
    assert_eq!(u.max_log(&ex(0, 0)), Some(1));
    assert_eq!(u.max_log(&ex(0, -1)), Some(1));

    let b = set(&[(0, 0, 1)], A);
    assert_eq!(b.extended_union(&a).unwrap().max_log(&ex(0, 0)), Some(2));

    assert!(matches!(a.extended_union(&set(&[], 2.0)), Err(scri::Error::DepthMismatch(..))));
}

#[test]
fn shift_examples() {
    let s = set(&[(0, 0, 0)], A).shift_s();
    assert!(s.contains(&ex(0, -1), 1) && s.contains(&ex(0, -1), 0));
    assert!(!s.contains(&ex(0, 0), 0));
    assert!(IndexSet::empty(A).shift_s().is_empty());
    let s2 = s.shift_s();
    assert_eq!(s2.max_log(&ex(0, -2)), Some(2));
}

#[test]
fn logify_examples() {
    let smooth = IndexSet::smooth(6.5);
    let lg = smooth.logify();
    for n in 0..=6 {
        assert_eq!(lg.max_log(&ex(0, -n)), Some(n as u32));
    }
    assert_eq!(lg.len(), (1..=7).sum::<usize>());
    assert!(IndexSet::empty(A).logify().is_empty());

    let s0 = Exponent::exact(Rational64::from_integer(0), Rational64::new(-3, 10));
    let e = IndexSet::from_entries([IndexEntry::new(s0, 0)], 2.5);
    let lg = e.logify();
    for j in 0..=2 {
        assert_eq!(lg.max_log(&s0.shift_down(j)), Some(j as u32));
    }
    assert_eq!(lg.exponents().count(), 3);
}

#[test]
fn resonance_set_examples() {
    let e0 = [IndexEntry::new(ex(0, -1), 0)];
    let r = resonance_sets(&e0, false, A);
    assert!(r.e_res0.same_as(&set(&[(0, -1, 0), (0, -2, 0), (0, -3, 0)], A)));
    assert_eq!(r.e_res0.len(), 3);
    assert!(r.e_scri.same_as(&IndexSet::smooth(A)));

    let r = resonance_sets(&e0, true, A);
    for n in 1..=3 {
        assert_eq!(r.e_res.max_log(&ex(0, -n)), Some(n as u32 - 1));
    }
    assert_eq!(r.e_res.len(), 6);
    for j in 0..=3 {
        assert_eq!(r.e_scri.max_log(&ex(0, -j)), Some(2 * j as u32));
    }

    let e0 = [IndexEntry::new(ex(0, -1), 0), IndexEntry::new(ex(0, -2), 0)];
    let r = resonance_sets(&e0, false, A);
    assert!(r.e_res0.contains(&ex(0, -2), 1));
    assert!(r.e_res0.is_closed() && r.e_res.is_closed() && r.e_scri.is_closed());
}

#[test]
fn text_round_trip() {
    let s = IndexSet::from_entries(
        [
            IndexEntry::new(Exponent::exact(Rational64::new(1, 2), Rational64::new(-1, 3)), 1),
            IndexEntry::new(Exponent::Approx { re: 0.1234567, im: -0.7654321 }, 0),
        ],
        A,
    );
    let text = s.to_text();
    let back = IndexSet::from_text(&text, A).unwrap();
    assert!(back.same_as(&s));
    let again = IndexSet::from_text(&back.to_text(), A).unwrap();
    assert_eq!(again.to_text(), back.to_text());
    assert!(IndexSet::from_text("1,2", A).is_err());
    assert!(IndexSet::from_text("1,x,0", A).is_err());
    let parsed = IndexSet::from_text("# comment\nz_re,z_im,k\n0,-0.5,1\n", A).unwrap();
    assert!(parsed.contains(&Exponent::exact(Rational64::from_integer(0), Rational64::new(-1, 2)), 1));
}

#[test]
fn float_exponents_collide_within_tolerance() {
    let a = IndexSet::from_entries([IndexEntry::new(Exponent::Approx { re: 0.1, im: -0.31 }, 0)], A);
    let b = IndexSet::from_entries([IndexEntry::new(Exponent::Approx { re: 0.1 + 1e-14, im: -0.31 }, 0)], A);
    let u = a.extended_union(&b).unwrap();
    assert_eq!(u.max_log(&Exponent::Approx { re: 0.1, im: -0.31 }), Some(1));
}

proptest! {
    #[test]
    fn closure_matches_oracle(items in arb_items()) {
        prop_assert_eq!(keys(&build(&items)), oracle_close(raw_keys(&items), A));
    }

    #[test]
    fn extended_union_matches_oracle(e in arb_items(), f in arb_items()) {
        let (se, sf) = (build(&e), build(&f));
        let got = keys(&se.extended_union(&sf).unwrap());
        prop_assert_eq!(got, oracle_ext_union(&keys(&se), &keys(&sf), A));
    }

    #[test]
    fn extended_union_commutes_and_associates(e in arb_items(), f in arb_items(), g in arb_items()) {
        let (se, sf, sg) = (build(&e), build(&f), build(&g));
        let ef = se.extended_union(&sf).unwrap();
        prop_assert!(ef.same_as(&sf.extended_union(&se).unwrap()));
        let l = ef.extended_union(&sg).unwrap();
        let r = se.extended_union(&sf.extended_union(&sg).unwrap()).unwrap();
        prop_assert!(l.same_as(&r));
    }

    #[test]
    fn extended_union_contains_union(e in arb_items(), f in arb_items()) {
        let (se, sf) = (build(&e), build(&f));
        let ext = se.extended_union(&sf).unwrap();
        let plain = se.union(&sf).unwrap();
        prop_assert!(plain.is_subset(&ext));
        let disjoint = se.exponents().all(|(z, _)| sf.max_log(&z).is_none());
        prop_assert_eq!(disjoint, ext.same_as(&plain));
    }

    #[test]
    fn logify_is_monotone(e in arb_items(), f in arb_items()) {
        let se = build(&e);
        let sef = se.union(&build(&f)).unwrap();
        prop_assert!(se.logify().is_subset(&sef.logify()));
    }

    #[test]
    fn outputs_are_closed(e in arb_items(), f in arb_items(), m in any::<bool>()) {
        let (se, sf) = (build(&e), build(&f));
        prop_assert!(se.is_closed());
        prop_assert!(se.extended_union(&sf).unwrap().is_closed());
        prop_assert!(se.shift_s().is_closed());
        prop_assert!(se.logify().is_closed());
        let raw: Vec<IndexEntry> = e.iter().map(|&(r, i, k)| IndexEntry::new(Exponent::exact(r, i), k)).collect();
        let rs = resonance_sets(&raw, m, A);
        prop_assert!(rs.e_res0.is_closed() && rs.e_res.is_closed() && rs.e_scri.is_closed());
    }

    #[test]
    fn smooth_logify_is_the_log_triangle(depth in 0.5f64..9.0) {
        let lg = IndexSet::smooth(depth).logify();
        let n_max = (depth - 1e-9).ceil() as i64 - 1;
        for n in 0..=n_max {
            prop_assert_eq!(lg.max_log(&ex(0, -n)), Some(n as u32));
        }
        prop_assert_eq!(lg.exponents().count() as i64, n_max + 1);
    }
}
