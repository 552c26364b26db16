use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use spatial_alex::lattice::{smith_invariants, HalfMonomial};
use spatial_alex::moves::random_plane_graph;
use spatial_alex::ring::{GroupRingElement, RingFraction};

const RANK: usize = 2;

fn monomial(rank: usize) -> impl Strategy<Value = HalfMonomial> {
    prop::collection::vec(-6i64..=6, rank).prop_map(HalfMonomial::from_halves)
}

fn integral(rank: usize) -> impl Strategy<Value = HalfMonomial> {
    prop::collection::vec(-4i64..=4, rank).prop_map(|e| HalfMonomial::from_exponents(&e))
}

fn element() -> impl Strategy<Value = GroupRingElement> {
    prop::collection::vec((integral(RANK), -5i64..=5), 0..5)
        .prop_map(|terms| GroupRingElement::from_terms(RANK, terms.into_iter().map(|(m, c)| (m, BigInt::from(c)))))
}

fn nonzero() -> impl Strategy<Value = GroupRingElement> {
    element().prop_filter("nonzero", |p| !p.is_zero())
}

fn fraction() -> impl Strategy<Value = RingFraction> {
    (element(), nonzero()).prop_map(|(n, d)| RingFraction::new(n, d).unwrap())
}

/// Rank over the rationals by plain elimination.
#[allow(clippy::needless_range_loop)]
fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                for j in 0..cols {
                    let v = &f * &m[rank][j];
                    m[i][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #[test]
    fn lattice_rank_is_cycle_rank(seed in 0u64..500, size in 2usize..7) {
        let d = random_plane_graph(seed, size).unwrap();
        let lat = d.lattice().unwrap();
        let e = lat.edge_ids().len();
        prop_assert_eq!(lat.rank(), e - d.vertex_count() + 1);
        prop_assert_eq!(lat.rank(), e - rational_rank(lat.relation_matrix()));
        let big: Vec<Vec<BigInt>> = lat.relation_matrix().iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
        prop_assert!(smith_invariants(&big).iter().all(|x| x.is_one()));
        // relations die under the projection
        for row in lat.relation_matrix() {
            for p in lat.projection() {
                prop_assert_eq!(p.iter().zip(row).map(|(a, b)| a * b).sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn square_root_of_square(a in monomial(3)) {
        prop_assert_eq!(a.mul(&a).sqrt().unwrap(), a);
    }

    #[test]
    fn integral_iff_even(a in monomial(3)) {
        prop_assert_eq!(a.is_integral(), a.halves().iter().all(|h| h % 2 == 0));
        prop_assert_eq!(a.sqrt().is_ok(), a.is_integral());
    }

    #[test]
    fn monomials_form_a_group(a in monomial(3), b in monomial(3), c in monomial(3)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert!(a.mul(&a.inv()).is_identity());
        prop_assert_eq!(a.pow(3), a.mul(&a).mul(&a));
        prop_assert_eq!(a == b, a.halves() == b.halves());
    }

    #[test]
    fn fraction_eq_is_an_equivalence(f in fraction(), k in nonzero(), j in nonzero()) {
        let g = RingFraction::new(f.num.mul(&k), f.den.mul(&k)).unwrap();
        let h = RingFraction::new(g.num.mul(&j), g.den.mul(&j)).unwrap();
        prop_assert!(f.fraction_eq(&f).unwrap());
        prop_assert!(f.fraction_eq(&g).unwrap() && g.fraction_eq(&f).unwrap());
        prop_assert!(g.fraction_eq(&h).unwrap() && f.fraction_eq(&h).unwrap());
    }

    #[test]
    fn exact_division_undoes_product(p in element(), d in nonzero()) {
        prop_assert_eq!(p.mul(&d).exact_div(&d).unwrap(), p);
    }

    #[test]
    fn canonical_form_is_stable(f in fraction()) {
        let c = f.canonicalize();
        prop_assert!(c.fraction_eq(&f).unwrap());
        let cc = c.canonicalize();
        prop_assert_eq!(&cc.num, &c.num);
        prop_assert_eq!(&cc.den, &c.den);
    }

    #[test]
    fn balanced_form_keeps_the_value(f in fraction()) {
        let b = f.balanced();
        prop_assert!(b.fraction_eq(&f).unwrap());
        if !b.is_zero() {
            let (lo, hi) = (b.den.min_halves().unwrap(), b.den.max_halves().unwrap());
            prop_assert!(lo.iter().zip(&hi).all(|(a, c)| (a + c) == 0 || (a + c) == 1));
        }
    }

    #[test]
    fn ring_laws(a in element(), b in element(), c in element()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&GroupRingElement::one(RANK)), a);
    }

    #[test]
    fn fraction_arithmetic(f in fraction(), g in fraction().prop_filter("nonzero", |g| !g.is_zero())) {
        let q = f.div(&g).unwrap();
        prop_assert!(q.mul(&g).fraction_eq(&f).unwrap());
        prop_assert!(f.add(&f.neg()).is_zero());
        let one = RingFraction::one(RANK);
        prop_assert!(f.mul(&one).fraction_eq(&f).unwrap());
    }
}
