//! Property tests for structural invariants across modules.

use proptest::prelude::*;

use tmk::besov::{besov_norm, BesovParams};
use tmk::elliptic::{direct_inverse_difference, inverse_difference, EllipticSymbol};
use tmk::io::{read_polynomial, write_polynomial};
use tmk::lattice::{LatticeBox, LatticePoint};
use tmk::linalg::{self, C64};
use tmk::pde::{exact_mode_solution, solve_periodic, PeriodicSpec};
use tmk::random::{hashed_symbol, random_polynomial, seeded};
use tmk::resolution::UnityResolution;
use tmk::symbol::{riesz_symbol, variation_on_box};
use tmk::transform::apply_multiplier;
use tmk::TrigPolynomial;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn poly(seed: u64, n: usize, k: i64, dim: usize) -> TrigPolynomial {
    random_polynomial(&mut seeded(seed), &LatticeBox::cube(n, -k, k).unwrap(), dim)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn q_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn resolution_sums_to_one(n in 1usize..=3, xi in prop::collection::vec(-3000.0f64..3000.0, 3)) {
        let res = UnityResolution::standard(n);
        let total: f64 = (0..=14).map(|j| res.eval(j, &xi[..n])).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {total}");
    }

    #[test]
    fn besov_norm_is_homogeneous(seed in any::<u64>(), s in -1.0f64..2.0, p in 1.0f64..4.0, q in q_strategy(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let f = poly(seed, 1, 12, 2);
        let params = BesovParams::new(s, p, q).unwrap();
        let res = UnityResolution::standard(1);
        let c = C64::new(re, im);
        let lhs = besov_norm(&f.scale(c), &params, &res).unwrap();
        let rhs = c.norm() * besov_norm(&f, &params, &res).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn besov_norm_is_subadditive(seed in any::<u64>(), s in -1.0f64..2.0, p in 1.0f64..4.0, q in q_strategy()) {
        let f = poly(seed, 2, 5, 1);
        let g = poly(seed.wrapping_add(1), 2, 7, 1);
        let params = BesovParams::new(s, p, q).unwrap();
        let res = UnityResolution::standard(2);
        let sum = besov_norm(&f.add(&g).unwrap(), &params, &res).unwrap();
        let parts = besov_norm(&f, &params, &res).unwrap() + besov_norm(&g, &params, &res).unwrap();
        prop_assert!(sum <= parts * (1.0 + 1e-10), "{sum} > {parts}");
    }

    #[test]
    fn variation_is_translation_invariant(seed in any::<u64>(), lo in -20i64..20, side in 0i64..6, shift in -40i64..40) {
        let m = hashed_symbol(seed, 2, 2, 0.0, 1.0);
        let a = LatticePoint::new(vec![shift, -shift / 2]);
        let q = LatticeBox::new(LatticePoint::new(vec![lo, lo - 3]), LatticePoint::new(vec![lo + side, lo - 3 + side])).unwrap();
        let moved = LatticeBox::new(q.lo() + &a, q.hi() + &a).unwrap();
        let v0 = variation_on_box(&m, &q);
        let v1 = variation_on_box(&m.shift(&a), &moved);
        prop_assert!(close(v0, v1, 1e-12), "{v0} vs {v1}");
    }

    #[test]
    fn variation_scales_and_is_subadditive(seed in any::<u64>(), c in -4.0f64..4.0, side in 0i64..8) {
        let m = hashed_symbol(seed, 1, 2, 0.0, 1.0);
        let r = riesz_symbol(1, 2);
        let q = LatticeBox::cube(1, -side, side).unwrap();
        let scaled = variation_on_box(&m.scale(C64::new(c, 0.0)), &q);
        prop_assert!(close(scaled, c.abs() * variation_on_box(&m, &q), 1e-12));
        let both = variation_on_box(&m.sum(&r).unwrap(), &q);
        prop_assert!(both <= (variation_on_box(&m, &q) + variation_on_box(&r, &q)) * (1.0 + 1e-12));
    }

    #[test]
    fn inverse_difference_matches_direct(seed in any::<u64>(), a in prop::collection::vec(0u32..=1, 3), k in prop::collection::vec(-30i64..30, 3)) {
        let s = hashed_symbol(seed, 3, 2, 2.0, 0.3);
        let (alpha, k) = (&a[..], &k[..]);
        let formula = inverse_difference(&s, alpha, k).unwrap();
        let direct = direct_inverse_difference(&s, alpha, k).unwrap();
        let err = linalg::op_norm(&(&formula - &direct));
        prop_assert!(err <= 1e-10 * (1.0 + linalg::op_norm(&direct)), "error {err}");
        let mut repeated = a.clone();
        repeated[0] = 2;
        prop_assert!(inverse_difference(&s, &repeated, k).is_err());
    }

    #[test]
    fn polynomial_csv_round_trip(seed in any::<u64>(), n in 1usize..=3, dim in 1usize..=3, joint in any::<bool>()) {
        let f = poly(seed, n, 2, dim);
        let mut buf = Vec::new();
        write_polynomial(&f, &mut buf, joint).unwrap();
        let g = read_polynomial(buf.as_slice()).unwrap();
        prop_assert_eq!(g.n(), n);
        prop_assert_eq!(g.dim(), dim);
        prop_assert_eq!(g.len(), f.len());
        for (k, v) in f.modes() {
            prop_assert_eq!(&g.coefficient(k.coords()), v);
        }
    }

    #[test]
    fn multiplier_composition(seed in any::<u64>()) {
        let f = poly(seed, 1, 10, 2);
        let a = hashed_symbol(seed, 1, 2, 0.5, 1.0);
        let b = riesz_symbol(1, 2);
        let twice = apply_multiplier(&a, &apply_multiplier(&b, &f).unwrap()).unwrap();
        let once = apply_multiplier(&a.product(&b).unwrap(), &f).unwrap();
        prop_assert!(twice.sub(&once).unwrap().max_coefficient_norm() < 1e-12);
    }

    #[test]
    fn exact_solution_is_a_semigroup(seed in any::<u64>(), t in 0.0f64..1.0, s in 0.0f64..1.0) {
        let a = hashed_symbol(seed, 1, 3, 2.0, 0.5).eval(&[0]);
        let u0 = poly(seed, 1, 0, 3).coefficient(&[0]);
        let f = linalg::CVec::zeros(3);
        let direct = exact_mode_solution(&a, &f, &u0, t + s);
        let stepped = exact_mode_solution(&a, &f, &exact_mode_solution(&a, &f, &u0, t), s);
        prop_assert!((&direct - &stepped).norm() < 1e-10 * (1.0 + u0.norm()));
    }

    #[test]
    fn periodic_solution_of_real_data_is_real(seed in any::<u64>(), omega in 0.0f64..5.0) {
        // f(-l, -k) = conj f(l, k) makes the forcing real valued
        let g = poly(seed, 2, 3, 1);
        let mut f = g.clone();
        for (k, v) in g.modes() {
            let minus = LatticePoint::new(k.coords().iter().map(|x| -x).collect());
            f.add_mode(minus, &v.map(|z| z.conj()));
        }
        let spec = PeriodicSpec { symbol: EllipticSymbol::negative_laplacian(1, 1), omega, omega0: 0.0, forcing: f };
        let u = solve_periodic(&spec).unwrap();
        for (k, v) in u.modes() {
            let minus: Vec<i64> = k.coords().iter().map(|x| -x).collect();
            let w = u.coefficient(&minus);
            prop_assert!((v[0] - w[0].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_modes_decouple(seed in any::<u64>(), l in -2i64..=2, k0 in -2i64..=2, k1 in -2i64..=2) {
        let symbol = EllipticSymbol::negative_laplacian(2, 2);
        let f = poly(seed, 3, 2, 2);
        let point = LatticePoint::new(vec![l, k0, k1]);
        let single = TrigPolynomial::single_mode(point.clone(), f.coefficient(point.coords()));
        let full = solve_periodic(&PeriodicSpec { symbol: symbol.clone(), omega: 1.0, omega0: 0.0, forcing: f }).unwrap();
        let alone = solve_periodic(&PeriodicSpec { symbol, omega: 1.0, omega0: 0.0, forcing: single }).unwrap();
        prop_assert_eq!(alone.len(), 1);
        prop_assert!((full.coefficient(point.coords()) - alone.coefficient(point.coords())).norm() < 1e-14);
    }
}
