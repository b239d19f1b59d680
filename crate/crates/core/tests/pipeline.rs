use proptest::prelude::*;

use unruh_cavity::cell::{cell_channel, CellConfig};
use unruh_cavity::collision::{fixed_point, spectral_gap};
use unruh_cavity::sweep::run_point;
use unruh_cavity::thermometry::standard_form;

fn config() -> impl Strategy<Value = CellConfig> {
    (-1.5f64..1.5, -1.0f64..0.6, 0.005f64..0.1)
        .prop_map(|(la, lw, l)| CellConfig::new(10f64.powf(la), 10f64.powf(lw), l, 4).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cell_channel_is_completely_positive(cfg in config()) {
        let cc = cell_channel(&cfg).unwrap();
        prop_assert!(cc.cell.complete_positivity_margin() > -1e-9);
        let [d1, d2] = cc.symplectic_deviation.unwrap();
        prop_assert!(d1 < 1e-9 && d2 < 1e-9);
    }

    #[test]
    fn fixed_point_is_invariant_and_physical(cfg in config()) {
        let ch = cell_channel(&cfg).unwrap().cell;
        prop_assume!(spectral_gap(&ch) > 1e-9);
        let s = fixed_point(&ch).unwrap();
        let next = ch.apply_matrix(s.matrix());
        prop_assert!((next - s.matrix()).amax() <= 1e-9 * s.matrix().amax());
        let sf = standard_form(&s).unwrap();
        prop_assert!(sf.nu >= 1.0 && sf.r >= 0.0);
    }

    #[test]
    fn point_results_are_reproducible(cfg in config()) {
        let a = run_point(&cfg);
        prop_assert_eq!(&a, &run_point(&cfg));
        if let Some(t) = a.temperature() {
            prop_assert!(t > 0.0);
        }
    }
}
