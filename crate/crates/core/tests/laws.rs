mod common;

use common::{equal, join_dim, meet_dim, rank, tol, vectors};
use mslab_core::sample::{random_partial_isometry, random_subspace, rng};
use mslab_core::Subspace;
use proptest::prelude::*;

fn subspace(n: usize, seed: u64) -> Subspace {
    random_subspace(&mut rng(seed), n, tol())
}

fn triple() -> impl Strategy<Value = (Subspace, Subspace, Subspace)> {
    (1usize..=3, any::<u64>(), any::<u64>(), any::<u64>())
        .prop_map(|(n, a, b, c)| (subspace(n, a), subspace(n, b), subspace(n, c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn lattice_laws((a, b, _) in triple()) {
        let t = tol();
        let j = a.join(&b, t).unwrap();
        let m = a.meet(&b, t).unwrap();
        prop_assert!(j.contains(&a, t).unwrap() && j.contains(&b, t).unwrap());
        prop_assert!(a.contains(&m, t).unwrap() && b.contains(&m, t).unwrap());
        prop_assert!(equal(&j, &b.join(&a, t).unwrap()));
        prop_assert!(equal(&a.join(&m, t).unwrap(), &a));
        prop_assert!(equal(&a.meet(&j, t).unwrap(), &a));
    }

    #[test]
    fn dimensions_match_the_oracle((a, b, _) in triple()) {
        let t = tol();
        prop_assert_eq!(a.dim(), rank(&vectors(&a)));
        let j = a.join(&b, t).unwrap();
        let m = a.meet(&b, t).unwrap();
        prop_assert_eq!(j.dim(), join_dim(&a, &b));
        prop_assert_eq!(m.dim(), meet_dim(&a, &b));
        prop_assert_eq!(j.dim() + m.dim(), a.dim() + b.dim());
    }

    #[test]
    fn involution_laws((a, b, _) in triple()) {
        let t = tol();
        prop_assert!(equal(&a.involution(t).involution(t), &a));
        let ab_star = a.product(&b, t).unwrap().involution(t);
        prop_assert!(equal(&ab_star, &b.involution(t).product(&a.involution(t), t).unwrap()));
        let join_star = a.join(&b, t).unwrap().involution(t);
        prop_assert!(equal(&join_star, &a.involution(t).join(&b.involution(t), t).unwrap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let t = tol();
        let left = a.product(&b, t).unwrap().product(&c, t).unwrap();
        let right = a.product(&b.product(&c, t).unwrap(), t).unwrap();
        prop_assert!(equal(&left, &right));
    }

    #[test]
    fn product_distributes_over_joins((a, b, c) in triple()) {
        let t = tol();
        let left = a.product(&b.join(&c, t).unwrap(), t).unwrap();
        let right = a.product(&b, t).unwrap().join(&a.product(&c, t).unwrap(), t).unwrap();
        prop_assert!(equal(&left, &right));
        let left = b.join(&c, t).unwrap().product(&a, t).unwrap();
        let right = b.product(&a, t).unwrap().join(&c.product(&a, t).unwrap(), t).unwrap();
        prop_assert!(equal(&left, &right));
    }

    #[test]
    fn partial_isometry_spans_are_stable(n in 1usize..=3, seed in any::<u64>()) {
        let t = tol();
        let p = Subspace::span(&[random_partial_isometry(&mut rng(seed), n)], t).unwrap();
        let ppp = p.product(&p.involution(t), t).unwrap().product(&p, t).unwrap();
        prop_assert!(equal(&ppp, &p));
        prop_assert!(ppp.equal(&p, t).unwrap());
    }

    #[test]
    fn stably_gelfand_premise_forces_equality((a, _, _) in triple()) {
        let t = tol();
        let ppp = a.product(&a.involution(t), t).unwrap().product(&a, t).unwrap();
        if a.contains(&ppp, t).unwrap() {
            prop_assert!(equal(&ppp, &a));
        }
    }
}
