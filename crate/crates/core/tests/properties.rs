use circunit::arith::{is_prime, pow_mod};
use circunit::cyclotomic::{galois_apply, CycloElt};
use circunit::howell::Howell;
use circunit::iwasawa::{
    one_minus_frob_inv, trace_element, FiniteAbelianGroup, GroupRingElt, ModulusPoly, RingSpec,
};
use circunit::modules::{FPModule, Scalars};
use circunit::padic::{frobenius_exponent, PadicInt};
use circunit::prospector::verify_tuple;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, q: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0..q, cols), 0..=rows)
}

fn spec_strategy() -> impl Strategy<Value = RingSpec> {
    (prop_oneof![Just(3u64), Just(5)], 1u32..=3, 1usize..=4, any::<bool>()).prop_map(|(p, k, d, cyclic)| {
        let group = if cyclic { FiniteAbelianGroup::cyclic(p) } else { FiniteAbelianGroup::trivial() };
        RingSpec::new(p, k, ModulusPoly::Truncation(d), group).unwrap()
    })
}

fn elt(spec: &RingSpec, seed: &[u64]) -> GroupRingElt {
    let coeffs = (0..spec.rank()).map(|i| seed[i % seed.len()].wrapping_mul(i as u64 + 7) % spec.q()).collect();
    GroupRingElt::from_coeffs(spec, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn howell_is_idempotent_and_preserves_span(rows in matrix(5, 4, 27)) {
        let h = Howell::new(3, 3, 4, rows.clone());
        let again = Howell::new(3, 3, 4, h.rows().to_vec());
        prop_assert_eq!(&h, &again);
        for r in &rows {
            prop_assert!(h.contains(r));
        }
        let back = Howell::new(3, 3, 4, rows);
        prop_assert!(h.is_subspan_of(&back) && back.is_subspan_of(&h));
    }

    #[test]
    fn howell_reduction_is_canonical(rows in matrix(4, 3, 25), x in prop::collection::vec(0u64..25, 3), y in matrix(2, 3, 25)) {
        let h = Howell::new(5, 2, 3, rows);
        // x and x + (something in the span) reduce alike
        let mut shifted = x.clone();
        for r in h.rows().iter().chain(y.iter().filter(|r| h.contains(r))) {
            for (s, c) in shifted.iter_mut().zip(r) {
                *s = (*s + 2 * c) % 25;
            }
        }
        prop_assert_eq!(h.reduce(&x), h.reduce(&shifted));
    }

    #[test]
    fn group_ring_is_a_commutative_ring(spec in spec_strategy(), a in prop::collection::vec(any::<u64>(), 1..6), b in prop::collection::vec(any::<u64>(), 1..6), c in prop::collection::vec(any::<u64>(), 1..6)) {
        let (x, y, z) = (elt(&spec, &a), elt(&spec, &b), elt(&spec, &c));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.times_t(), x.mul(&GroupRingElt::t(&spec)));
    }

    #[test]
    fn level_reduction_is_a_ring_map(a in prop::collection::vec(any::<u64>(), 1..6), b in prop::collection::vec(any::<u64>(), 1..6), n in 0u32..=2) {
        let k = 3;
        let series = RingSpec::truncated(3, k, k as usize * 3usize.pow(n)).unwrap();
        let (x, y) = (elt(&series, &a), elt(&series, &b));
        let lhs = x.mul(&y).to_level(n).unwrap();
        let rhs = x.to_level(n).unwrap().mul(&y.to_level(n).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn frobenius_factor_leading_term(l in 2u64..2000, d in 2usize..10) {
        prop_assume!(is_prime(l) && l != 3);
        let spec = RingSpec::truncated(3, 4, d).unwrap();
        let c = frobenius_exponent(l, 3, 4 + circunit::arith::ilog(d as u64 - 1, 3)).unwrap();
        let u = one_minus_frob_inv(&c, &spec).unwrap();
        prop_assert_eq!(u.coeffs()[0], 0);
        prop_assert_eq!(u.coeffs()[1], c.value() % 81);
        // mod p, (1+T)^(p^v c') = (1 + T^(p^v))^c', so the first surviving term is T^(p^v)
        let v = c.valuation();
        prop_assert_eq!(u.is_prime_to_p(), !c.is_zero() && 3usize.pow(v) < d);
    }

    #[test]
    fn frobenius_exponent_round_trip(l in 2u64..5000, k in 1u32..=8) {
        prop_assume!(is_prime(l) && l != 5);
        let c = frobenius_exponent(l, 5, k).unwrap();
        let w = circunit::padic::teichmuller((l % 5) as i64, 5, k).unwrap();
        let principal = PadicInt::new(5, k, l as i128).unwrap().mul(&w.inverse().unwrap());
        prop_assert_eq!(c.exp_one_plus_p(), principal);
    }

    #[test]
    fn galois_action_is_multiplicative(a in 1i64..60, b in 1i64..60) {
        let m = 15;
        prop_assume!(circunit::arith::gcd(a as u64, m) == 1 && circunit::arith::gcd(b as u64, m) == 1);
        let x = CycloElt::one_minus_zeta(m, 1).mul(&CycloElt::zeta_power(m, 4));
        let lhs = galois_apply(a, &galois_apply(b, &x).unwrap()).unwrap();
        prop_assert_eq!(lhs, galois_apply(a * b, &x).unwrap());
    }

    #[test]
    fn tuple_verification_ignores_order(seed in 0usize..24) {
        let mut t = vec![139u64, 199, 661, 1303];
        // a permutation from the seed
        let mut s = seed;
        for i in (1..t.len()).rev() {
            t.swap(i, s % (i + 1));
            s /= i + 1;
        }
        prop_assert!(verify_tuple(&t, 3).is_ok());
        for &a in &t {
            for &b in &t {
                if a != b {
                    prop_assert_eq!(pow_mod(a, (b - 1) / 3, b), 1);
                }
            }
        }
    }

    #[test]
    fn coinvariants_of_free_are_free(spec in spec_strategy(), rank in 1usize..3) {
        let m = FPModule::free(&spec, rank);
        let c = m.coinvariants();
        prop_assert_eq!(c.nakayama_rank().unwrap(), rank);
        prop_assert!(c.is_free_local().unwrap());
    }

    #[test]
    fn span_with_contains_its_generators(spec in spec_strategy(), a in prop::collection::vec(any::<u64>(), 1..6)) {
        let m = FPModule::free(&spec, 2);
        let v = vec![elt(&spec, &a), GroupRingElt::zero(&spec)];
        prop_assert!(m.in_span(&v, std::slice::from_ref(&v), Scalars::Lambda));
        prop_assert!(m.in_span(&v, std::slice::from_ref(&v), Scalars::Full));
    }
}

#[test]
fn invariants_of_free_cyclic_modules_are_trace_images() {
    for (p, k, d) in [(3u64, 2u32, 1usize), (3, 3, 3), (5, 2, 2)] {
        let spec = RingSpec::new(p, k, ModulusPoly::Truncation(d), FiniteAbelianGroup::cyclic(p)).unwrap();
        let m = FPModule::free(&spec, 2);
        let h = GroupRingElt::group_element(&spec, 1);
        let inv = m.subgroup_invariants(&[h]);
        let all: Vec<usize> = (0..p as usize).collect();
        let tr = trace_element(&all, &spec);
        let traces: Vec<Vec<GroupRingElt>> =
            (0..2).map(|j| m.generator(j).iter().map(|x| x.mul(&tr)).collect()).collect();
        assert_eq!(m.span_with(&inv, Scalars::Full), m.span_with(&traces, Scalars::Full));
    }
}
