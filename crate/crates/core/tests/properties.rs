use num_complex::Complex64;
use proptest::prelude::*;

use cesaro_core::sections::{resolvent, resolvent_residual};
use cesaro_core::spectra::{member_shape, Lambda, Membership, Shape};
use cesaro_core::weights::{log_sum_exp, WeightedVector};
use cesaro_core::dynamics::cesaro_step;

proptest! {
    // open disk D(1) is Re(1/z) > 1, i.e. |z - 1/2| < 1/2
    #[test]
    fn disk_membership_matches_geometry(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let z = Complex64::new(re, im);
        let d = (z - 0.5).norm();
        prop_assume!((d - 0.5).abs() > 1e-9 && z.norm() > 1e-9);
        let m = member_shape(Shape::DiskClosed, &Lambda::Double(z));
        prop_assert_eq!(m.contained(), d < 0.5);
        let m = member_shape(Shape::DiskOpenPlusEndpoints, &Lambda::Double(z));
        prop_assert_eq!(m == Membership::Inside, d < 0.5);
    }

    #[test]
    fn resolvent_residual_small_off_spectrum(re in -3.0f64..3.0, im in 0.2f64..3.0, n in 1usize..40) {
        let mu = Complex64::new(re, im);
        let r = resolvent(mu, n).unwrap();
        prop_assert!(resolvent_residual(mu, &r) <= 1e-10);
    }

    // C maps real nonnegative vectors to vectors with the same first entry
    // and preserves the maximum bound
    #[test]
    fn cesaro_step_averages(xs in proptest::collection::vec(0.0f64..1.0, 1..50)) {
        let x = WeightedVector::from_real(&xs).unwrap();
        let y = cesaro_step(x.entries());
        prop_assert!((y[0] - x.entries()[0]).norm() == 0.0);
        let top = xs.iter().cloned().fold(0.0, f64::max);
        prop_assert!(y.iter().all(|v| v.re <= top + 1e-15 && v.im == 0.0));
    }

    #[test]
    fn log_sum_exp_against_direct(xs in proptest::collection::vec(-30.0f64..30.0, 1..20)) {
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((log_sum_exp(xs.iter().cloned()) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }
}
