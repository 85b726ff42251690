use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use unfriendly_core::hardcore::{self, fib};
use unfriendly_core::series::{series_gy, ZSeries};
use unfriendly_core::spectral::{lambert_w, rho};
use unfriendly_core::{
    build_config, exact_distribution, fmt_rational, parse_rational, pgf, sd_ge, simulate, CutPolicy, ExactDistribution,
    Family, FamilyTag, MomentReport, PgfEngine, Rational, RationalPoly, Seat, SeatGrid, SelectionMode,
};

fn family_tag() -> impl Strategy<Value = FamilyTag> {
    prop::sample::select(FamilyTag::ALL.to_vec())
}

/// Random seat sets on two rows, at most `max` seats, columns in 0..8.
fn seats(max: usize) -> impl Strategy<Value = Vec<Seat>> {
    prop::collection::btree_set((0u8..2, 0i64..8), 1..=max)
        .prop_map(|s| s.into_iter().map(|(r, c)| Seat::new(r, c)).collect())
}

fn grid(s: &[Seat]) -> SeatGrid {
    SeatGrid::from_seats(s.iter().copied()).unwrap()
}

fn law(tag: FamilyTag, n: usize) -> ExactDistribution {
    ExactDistribution::from_pgf(&pgf::pgf(tag, n))
}

fn shifted(d: &ExactDistribution, c: usize) -> ExactDistribution {
    ExactDistribution::from_pmf(d.pmf().iter().map(|(k, p)| (k + c, p.clone())).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_is_a_probability_law(s in seats(11)) {
        let d = exact_distribution(&grid(&s)).unwrap();
        prop_assert!(d.total().is_one());
        prop_assert!(d.pmf().values().all(|p| !p.is_negative()));
        prop_assert!(d.support_max().unwrap() <= s.len());
    }

    #[test]
    fn oracle_invariant_under_symmetries(s in seats(10), dx in -20i64..20) {
        let base = exact_distribution(&grid(&s)).unwrap();
        let moved: Vec<Seat> = s.iter().map(|p| Seat::new(p.row, p.col + dx)).collect();
        let mirrored: Vec<Seat> = s.iter().map(|p| Seat::new(p.row, -p.col)).collect();
        let flipped: Vec<Seat> = s.iter().map(|p| Seat::new(1 - p.row, p.col)).collect();
        prop_assert_eq!(&exact_distribution(&grid(&moved)).unwrap(), &base);
        prop_assert_eq!(&exact_distribution(&grid(&mirrored)).unwrap(), &base);
        prop_assert_eq!(&exact_distribution(&grid(&flipped)).unwrap(), &base);
    }

    #[test]
    fn grid_text_round_trip(s in seats(16)) {
        let g = grid(&s);
        let back = SeatGrid::parse(&g.to_text()).unwrap();
        prop_assert_eq!(back.len(), g.len());
        prop_assert_eq!(exact_distribution(&back).unwrap(), exact_distribution(&g).unwrap());
    }

    #[test]
    fn family_x_support(n in 1usize..=10, seed in any::<u64>()) {
        let g = build_config(Family::new(FamilyTag::X, n));
        let lo = n / 2 + 1;
        let d = exact_distribution(&g).unwrap();
        prop_assert!(d.support_min().unwrap() >= lo && d.support_max().unwrap() <= n);
        let sim = simulate(&g, 200, seed, SelectionMode::UniformFree).unwrap();
        prop_assert!(sim.histogram.keys().all(|&k| k >= lo && k <= n));
    }

    #[test]
    fn pgf_is_normalized_and_nonnegative(tag in family_tag(), n in 0usize..40) {
        let p = pgf::pgf(tag, n);
        prop_assert!(p.eval(&Rational::one()).is_one());
        prop_assert!(p.coeffs().iter().all(|c| !c.is_negative()));
        prop_assert!(p.degree().unwrap() <= Family::new(tag, n).seat_count().max(1));
    }

    #[test]
    fn cumulant_identities(tag in family_tag(), n in 0usize..30) {
        let p = pgf::pgf(tag, n);
        let m = MomentReport::from_pgf(n, &p);
        let d = ExactDistribution::from_pgf(&p);
        let central = |j: i32| -> Rational {
            d.pmf()
                .iter()
                .map(|(k, q)| q * num_traits::pow(Rational::from_integer((*k as i64).into()) - &m.mean, j as usize))
                .sum()
        };
        prop_assert_eq!(&m.mean, &d.mean());
        prop_assert_eq!(&m.variance, &central(2));
        prop_assert!(!m.variance.is_negative());
        prop_assert_eq!(&m.kappa3, &central(3));
        prop_assert_eq!(&m.kappa4, &(central(4) - Rational::from_integer(3.into()) * central(2) * central(2)));
    }

    #[test]
    fn sd_ge_reflexive_and_shift_invariant(
        a in family_tag(), na in 0usize..14,
        b in family_tag(), nb in 0usize..14,
        shift in -3i64..=3, c in 0usize..5,
    ) {
        let (la, lb) = (law(a, na), law(b, nb));
        prop_assert!(sd_ge(&la, &la, 0).holds);
        let v = sd_ge(&la, &lb, shift);
        let w = sd_ge(&shifted(&la, c), &shifted(&lb, c), shift);
        prop_assert_eq!(v.holds, w.holds);
        prop_assert_eq!(&v.slack, &w.slack);
        if !v.holds {
            prop_assert!(la.cdf(v.witness - shift) > lb.cdf(v.witness));
        }
    }

    #[test]
    fn sd_ge_transitive(
        tags in prop::collection::vec(family_tag(), 3),
        ns in prop::collection::vec(0usize..12, 3),
        shifts in prop::collection::vec(-2i64..=2, 2),
    ) {
        let l: Vec<_> = tags.iter().zip(&ns).map(|(&t, &n)| law(t, n)).collect();
        if sd_ge(&l[0], &l[1], shifts[0]).holds && sd_ge(&l[1], &l[2], shifts[1]).holds {
            prop_assert!(sd_ge(&l[0], &l[2], shifts[0] + shifts[1]).holds);
        }
    }

    #[test]
    fn hardcore_forms_agree(n in 0usize..50) {
        for tag in [FamilyTag::X, FamilyTag::Y] {
            let p = hardcore::pgf_hardcore(tag, n).unwrap();
            prop_assert!(p.eval(&Rational::one()).is_one());
            prop_assert_eq!(&p, &hardcore::pgf_hardcore_closed(tag, n).unwrap());
        }
        if n >= 2 {
            prop_assert_eq!(fib(n).value, fib(n - 1).value + fib(n - 2).value);
        }
    }

    #[test]
    fn transfer_matrix_matches_enumeration(s in seats(12)) {
        let g = grid(&s);
        let sets = hardcore::enumerate_maximal(&g).unwrap();
        let tm = hardcore::TransferMatrix::new(&g);
        prop_assert_eq!(tm.count(), sets.len().into());
        let mut hist: BTreeMap<usize, Rational> = BTreeMap::new();
        let w = Rational::new(1.into(), sets.len().into());
        for set in &sets {
            *hist.entry(set.len()).or_insert_with(Rational::zero) += &w;
        }
        prop_assert_eq!(ExactDistribution::from_pgf(&tm.pgf()), ExactDistribution::from_pmf(hist));
    }

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = Rational::new(p.into(), q.into());
        prop_assert_eq!(parse_rational(&fmt_rational(&r)), Some(r));
    }

    #[test]
    fn lambert_defining_equation(k in -20i64..=20, re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3 && (z + (-1.0f64).exp()).norm() > 1e-3);
        let w = lambert_w(k, z).unwrap();
        prop_assert!((w * w.exp() - z).norm() <= 1e-12 * z.norm());
    }

    #[test]
    fn pole_set_closed_under_conjugation(t in 0.05f64..=1.0) {
        // on the real cut the branch labels are not paired, so compare sets
        let t = Complex64::new(t, 0.0);
        let poles: Vec<Complex64> = (-14i64..=14)
            .filter_map(|k| rho(k, t, CutPolicy::UpperSide).unwrap())
            .collect();
        for k in -10i64..=10 {
            if let Some(p) = rho(k, t, CutPolicy::UpperSide).unwrap() {
                prop_assert!(poles.iter().any(|q| (q - p.conj()).norm() <= 1e-9 * p.norm()), "k = {}", k);
            }
        }
    }

    #[test]
    fn zseries_division_inverts_product(
        a in prop::collection::vec(prop::collection::vec(-5i64..5, 1..4), 1..6),
        b in prop::collection::vec(prop::collection::vec(-5i64..5, 1..4), 1..6),
    ) {
        let order = 6;
        let to = |v: &[Vec<i64>]| {
            ZSeries::from_terms(v.iter().map(|c| RationalPoly::from_integers(c.iter().copied())).collect(), order)
        };
        let (sa, mut sb) = (to(&a), to(&b));
        let mut head = sb.terms().to_vec();
        head[0] = RationalPoly::one();
        sb = ZSeries::from_terms(head, order);
        let prod = sa.mul_series(&sb);
        prop_assert_eq!(prod.div_series(&sb).unwrap(), sa.clone());
        prop_assert_eq!(sa.antiderivative().derivative(), sa);
    }

    #[test]
    fn simulation_is_deterministic(tag in family_tag(), n in 1usize..12, seed in any::<u64>()) {
        let g = build_config(Family::new(tag, n));
        let a = simulate(&g, 100, seed, SelectionMode::UniformFree).unwrap();
        let b = simulate(&g, 100, seed, SelectionMode::UniformFree).unwrap();
        prop_assert_eq!(a.counts, b.counts);
    }
}

#[test]
fn gy_coefficients_are_y_laws() {
    let s = series_gy(40);
    let mut e = PgfEngine::new();
    for n in 0..=40 {
        assert_eq!(s.term(n), e.y(n), "n = {n}");
    }
}
