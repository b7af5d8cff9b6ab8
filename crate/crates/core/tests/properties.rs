use maxweights_core::lattice::{CellBox, LatticeFunction, LatticeParams, Shift, WeightSpec};
use maxweights_core::maximal::{eval_dyadic_maximal, eval_lattice_maximal, sandwich_factor};
use maxweights_core::weights::{single_weight_constant, Clamp, ConstantKind, CubeFamily, Weight};
use proptest::prelude::*;

fn small_params(n: usize) -> LatticeParams {
    if n == 1 {
        LatticeParams::new(1, 2, 1, 1).unwrap()
    } else {
        LatticeParams::new(2, 0, 1, 1).unwrap()
    }
}

/// Nonnegative data on the domain, zero on the padding.
fn domain_data(n: usize) -> impl Strategy<Value = Vec<f64>> {
    let cells = small_params(n).domain_cells();
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], cells)
}

fn function(params: LatticeParams, data: &[f64]) -> LatticeFunction {
    let mut it = data.iter();
    LatticeFunction::from_domain_fn(params, |_| *it.next().unwrap()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn inputs() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, f64)> {
    (1usize..=2, 1usize..=2).prop_flat_map(|(n, m)| {
        let top = (m * n) as f64;
        (
            Just(n),
            prop::collection::vec(domain_data(n), m),
            prop_oneof![Just(0.0), 0.0..top * 0.99],
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn box_sums_match_naive(n in 1usize..=2, data in prop::collection::vec(0.0f64..5.0, 1..2), seed in any::<u64>()) {
        let params = small_params(n);
        let side = params.ext_side() as i64;
        let f = LatticeFunction::from_fn(params, |idx| {
            let h = (idx[0] as u64 * 31 + idx[1] as u64 * 17) ^ seed;
            data[0] * ((h % 97) as f64)
        }).unwrap();
        let a = (seed % side as u64) as i64;
        let b = ((seed >> 16) % side as u64) as i64;
        let (lo, hi) = (a.min(b), a.max(b) + 1);
        let bx = CellBox { n, lo: [lo, if n == 2 { lo } else { 0 }], hi: [hi, if n == 2 { hi } else { 1 }] };
        prop_assert!(close(f.box_sum(&bx) * params.cell_volume(), f.naive_box_integral(&bx), 1e-12));
    }

    #[test]
    fn dyadic_maximal_is_multiplicatively_homogeneous((n, data, alpha) in inputs(), scales in prop::collection::vec(0.1f64..20.0, 2)) {
        let params = small_params(n);
        let funcs: Vec<_> = data.iter().map(|d| function(params, d)).collect();
        let scaled: Vec<_> = funcs.iter().zip(&scales).map(|(f, c)| f.scale(*c).unwrap()).collect();
        let prod: f64 = scales.iter().take(funcs.len()).product();
        for shift in Shift::all(n) {
            let a = eval_dyadic_maximal(&funcs, alpha, shift).unwrap();
            let b = eval_dyadic_maximal(&scaled, alpha, shift).unwrap();
            for (x, y) in a.values.cells().iter().zip(b.values.cells()) {
                prop_assert!(close(x * prod, *y, 1e-12), "{x} * {prod} vs {y}");
            }
        }
    }

    #[test]
    fn maximal_functions_are_monotone((n, data, alpha) in inputs(), bumps in prop::collection::vec(0.0f64..3.0, 8)) {
        let params = small_params(n);
        let funcs: Vec<_> = data.iter().map(|d| function(params, d)).collect();
        let mut k = 0;
        let larger: Vec<_> = funcs
            .iter()
            .map(|f| {
                f.map_domain(|x| {
                    k += 1;
                    x + bumps[k % bumps.len()]
                })
                .unwrap()
            })
            .collect();
        let lo = eval_lattice_maximal(&funcs, alpha, None).unwrap();
        let hi = eval_lattice_maximal(&larger, alpha, None).unwrap();
        for (a, b) in lo.values.cells().iter().zip(hi.values.cells()) {
            prop_assert!(*a <= *b * (1.0 + 1e-12));
        }
        let lo = eval_dyadic_maximal(&funcs, alpha, Shift::ZERO).unwrap();
        let hi = eval_dyadic_maximal(&larger, alpha, Shift::ZERO).unwrap();
        for (a, b) in lo.values.cells().iter().zip(hi.values.cells()) {
            prop_assert!(*a <= *b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lattice_maximal_is_sandwiched_by_shifted_grids((n, data, alpha) in inputs()) {
        let params = small_params(n);
        let funcs: Vec<_> = data.iter().map(|d| function(params, d)).collect();
        let exact = eval_lattice_maximal(&funcs, alpha, None).unwrap();
        let dyadic: Vec<_> = Shift::all(n).into_iter().map(|s| eval_dyadic_maximal(&funcs, alpha, s).unwrap()).collect();
        let factor = sandwich_factor(n, funcs.len(), alpha);
        for flat in params.domain_cell_indices() {
            let idx = params.unflat(flat);
            let lower = dyadic.iter().map(|d| d.value(idx)).fold(0.0, f64::max);
            let mid = exact.value(idx);
            prop_assert!(lower <= mid * (1.0 + 1e-9), "{lower} > {mid}");
            prop_assert!(mid <= factor * lower * (1.0 + 1e-9), "{mid} > {factor} * {lower}");
        }
    }

    #[test]
    fn muckenhoupt_constants_ignore_constant_multiples(seed in any::<u64>(), c in 0.01f64..100.0, p in 1.2f64..4.0) {
        let params = LatticeParams::new(1, 2, 1, 1).unwrap();
        let spec = WeightSpec::Lognormal { seed, s: 0.8 };
        let w = Weight::from_spec(&spec, &params, Clamp::default()).unwrap();
        let cw = Weight::from_function(w.values().scale(c).unwrap());
        let a = single_weight_constant(&w, p, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        let b = single_weight_constant(&cw, p, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        prop_assert!(a.value >= 1.0 - 1e-12);
        prop_assert!(close(a.value, b.value, 1e-10), "{} vs {}", a.value, b.value);
    }

    #[test]
    fn witness_cube_attains_the_constant(seed in any::<u64>(), p in 1.2f64..4.0) {
        use maxweights_core::weights::ConstantDisplay;
        let params = LatticeParams::new(1, 2, 1, 1).unwrap();
        let w = Weight::from_spec(&WeightSpec::Lognormal { seed, s: 1.2 }, &params, Clamp::default()).unwrap();
        let display = ConstantDisplay::single(&w, p, None, ConstantKind::Ap).unwrap();
        let sup = display.sup(CubeFamily::AllLattice).unwrap();
        prop_assert_eq!(display.eval(&sup.witness), sup.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn power_weight_a2_matches_closed_form(a in -0.9f64..0.9) {
        let params = LatticeParams::new(1, 2, 4, 1).unwrap();
        let w = Weight::from_spec(&WeightSpec::power(a), &params, Clamp::default()).unwrap();
        let c = single_weight_constant(&w, 2.0, None, ConstantKind::Ap, CubeFamily::AllLattice).unwrap();
        let expected = 1.0 / ((1.0 + a) * (1.0 - a));
        prop_assert!((c.value - expected).abs() < 1e-6, "a = {a}: {} vs {expected}", c.value);
    }
}
