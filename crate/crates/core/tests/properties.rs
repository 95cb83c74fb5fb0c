use proptest::prelude::*;

use densym::classifier::local_dim;
use densym::density::{lie_derivative_density, pairing};
use densym::invariant::conjugate;
use densym::rational::{int, rat};
use densym::ring::{PolyFn, TrigFn};
use densym::{CoefficientFunction, Density, DensityOperator, Rat, Space, VectorField};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn poly() -> impl Strategy<Value = CoefficientFunction> {
    prop::collection::vec(small_rat(), 0..5).prop_map(|c| CoefficientFunction::Poly(PolyFn::new(c)))
}

fn trig() -> impl Strategy<Value = CoefficientFunction> {
    (
        small_rat(),
        prop::collection::vec((small_rat(), small_rat()), 0..3),
    )
        .prop_map(|(c0, modes)| {
            let mut f = CoefficientFunction::Trig(TrigFn::constant(c0));
            for (n, (a, b)) in modes.into_iter().enumerate() {
                let n = n as u32 + 1;
                f = &f + &CoefficientFunction::Trig(TrigFn::cos(n, a));
                f = &f + &CoefficientFunction::Trig(TrigFn::sin(n, b));
            }
            f
        })
}

fn function(space: Space) -> BoxedStrategy<CoefficientFunction> {
    match space {
        Space::Line => poly().boxed(),
        Space::Circle => trig().boxed(),
    }
}

fn any_space() -> impl Strategy<Value = Space> {
    prop_oneof![Just(Space::Line), Just(Space::Circle)]
}

fn operator(space: Space, lambda: Rat, mu: Rat) -> impl Strategy<Value = DensityOperator> {
    prop::collection::vec(function(space), 1..4)
        .prop_map(move |c| DensityOperator::new(lambda.clone(), mu.clone(), space, c).unwrap())
}

fn triple(
    space: Space,
) -> impl Strategy<
    Value = (
        CoefficientFunction,
        CoefficientFunction,
        CoefficientFunction,
    ),
> {
    (function(space), function(space), function(space))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((space, (f, g, h)) in any_space().prop_flat_map(|s| (Just(s), triple(s)))) {
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&f * &CoefficientFunction::one(space), f.clone());
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn leibniz_rule((f, g) in any_space().prop_flat_map(|s| (function(s), function(s)))) {
        prop_assert_eq!((&f * &g).diff(), &(&f.diff() * &g) + &(&f * &g.diff()));
    }

    #[test]
    fn mean_of_derivative_vanishes(f in trig()) {
        prop_assert_eq!(f.diff().circle_mean().unwrap(), int(0));
    }

    #[test]
    fn density_action_is_a_representation(
        (x, y, phi) in any_space().prop_flat_map(triple),
        lambda in small_rat(),
    ) {
        let (x, y) = (VectorField::new(x), VectorField::new(y));
        let phi = Density::new(lambda, phi);
        let xy = lie_derivative_density(&x, &lie_derivative_density(&y, &phi).unwrap()).unwrap();
        let yx = lie_derivative_density(&y, &lie_derivative_density(&x, &phi).unwrap()).unwrap();
        let bracket = lie_derivative_density(&x.bracket(&y), &phi).unwrap();
        prop_assert_eq!(&xy.value - &yx.value, bracket.value);
    }

    #[test]
    fn operator_action_is_a_representation(
        (space, x, y) in any_space().prop_flat_map(|s| (Just(s), function(s), function(s))),
        lambda in small_rat(),
        mu in small_rat(),
        seed in any::<u64>(),
    ) {
        let coeffs = vec![
            CoefficientFunction::constant(space, rat((seed % 7) as i64 - 3, 2)),
            match space {
                Space::Line => CoefficientFunction::x(),
                Space::Circle => CoefficientFunction::cos(1),
            },
        ];
        let a = DensityOperator::new(lambda, mu, space, coeffs).unwrap();
        let (x, y) = (VectorField::new(x), VectorField::new(y));
        let xy = a.lie_derivative(&y).unwrap().lie_derivative(&x).unwrap();
        let yx = a.lie_derivative(&x).unwrap().lie_derivative(&y).unwrap();
        let bracket = a.lie_derivative(&x.bracket(&y)).unwrap();
        prop_assert_eq!(xy.try_sub(&yx).unwrap(), bracket);
    }

    #[test]
    fn composition_is_associative(
        (a, b, c) in any_space().prop_flat_map(|s| (
            operator(s, int(2), rat(1, 3)),
            operator(s, rat(-1, 2), int(2)),
            operator(s, int(0), rat(-1, 2)),
        )),
    ) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn pairing_is_invariant((x, phi, psi) in triple(Space::Circle), lambda in small_rat()) {
        let x = VectorField::new(x);
        let phi = Density::new(lambda.clone(), phi);
        let psi = Density::new(int(1) - lambda, psi);
        let a = pairing(&lie_derivative_density(&x, &phi).unwrap(), &psi).unwrap();
        let b = pairing(&phi, &lie_derivative_density(&x, &psi).unwrap()).unwrap();
        prop_assert_eq!(a + b, int(0));
    }

    #[test]
    fn adjoint_identity(
        a in operator(Space::Circle, rat(1, 3), rat(-2, 5)),
        phi in trig(),
        psi in trig(),
    ) {
        let phi = Density::new(rat(1, 3), phi);
        let psi = Density::new(rat(7, 5), psi);
        let lhs = pairing(&a.apply(&phi).unwrap(), &psi).unwrap();
        let rhs = pairing(&phi, &conjugate(&a).apply(&psi).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(conjugate(&conjugate(&a)), a);
    }

    #[test]
    fn dimension_is_conjugation_symmetric(k in 0usize..=6, lambda in small_rat(), mu in small_rat()) {
        let one = int(1);
        prop_assert_eq!(local_dim(k, &lambda, &mu), local_dim(k, &(&one - &mu), &(&one - &lambda)));
    }

    #[test]
    fn dimension_stabilizes_from_order_three(lambda in small_rat(), mu in small_rat()) {
        let dims: Vec<usize> = (3..=9).map(|k| local_dim(k, &lambda, &mu)).collect();
        prop_assert!(dims.windows(2).all(|w| w[1] <= w[0]), "{:?}", dims);
        prop_assert!(dims[3..].iter().all(|&d| d == dims[3]), "{:?}", dims);
    }
}
