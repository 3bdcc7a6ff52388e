use std::f64::consts::{FRAC_PI_2, PI};

use illusionpad::geometry::{spherical_to_cartesian, visual_angle, visual_angle_spherical};
use illusionpad::keypad::{shuffle_ordering, DigitOrdering, KeypadLayout};
use illusionpad::perception::{daf_gain, effective_f1};
use illusionpad::spectral::GaussianFilterSpec;
use illusionpad::visibility::mssim;
use illusionpad::{DafSpec, DeviceProfile, GrayImage, SsimParams, ViewingPosition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nexus() -> illusionpad::DisplayGeometry {
    DeviceProfile::nexus6().display
}

proptest! {
    #[test]
    fn visual_angle_forms_agree(r in 1.0f64..300.0, theta in 0.05f64..PI - 0.05, phi in -1.5f64..1.5) {
        let p = spherical_to_cartesian(r, theta, phi).unwrap();
        let a = visual_angle(&p, &nexus()).unwrap();
        let b = visual_angle_spherical(r, theta, phi, &nexus()).unwrap();
        prop_assert!((a.theta_x - b.theta_x).abs() < 1e-9);
        prop_assert!((a.theta_y - b.theta_y).abs() < 1e-9);
    }

    #[test]
    fn visual_angle_mirror_symmetry(x in -50.0f64..50.0, y in -50.0f64..50.0, z in 0.5f64..100.0) {
        let d = nexus();
        let base = visual_angle(&ViewingPosition::new(x, y, z).unwrap(), &d).unwrap();
        for (sx, sy) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let m = visual_angle(&ViewingPosition::new(sx * x, sy * y, z).unwrap(), &d).unwrap();
            prop_assert!((m.theta_x - base.theta_x).abs() < 1e-12);
            prop_assert!((m.theta_y - base.theta_y).abs() < 1e-12);
        }
    }

    #[test]
    fn on_axis_maximises_visual_angle(x in -50.0f64..50.0, y in -50.0f64..50.0, z in 0.5f64..100.0) {
        let d = nexus();
        let off = visual_angle(&ViewingPosition::new(x, y, z).unwrap(), &d).unwrap();
        let r = (x * x + y * y + z * z).sqrt();
        let on = visual_angle(&ViewingPosition::new(0.0, 0.0, r).unwrap(), &d).unwrap();
        prop_assert!(off.theta_x <= on.theta_x + 1e-12);
        prop_assert!(off.theta_y <= on.theta_y + 1e-12);
    }

    #[test]
    fn spherical_roundtrip(r in 0.5f64..300.0, theta in 0.01f64..PI - 0.01, phi in -1.55f64..1.55) {
        let p = spherical_to_cartesian(r, theta, phi).unwrap();
        let (r2, t2, p2) = p.spherical();
        prop_assert!((r2 - r).abs() < 1e-9 * r);
        prop_assert!((t2 - theta).abs() < 1e-9);
        prop_assert!((p2 - phi).abs() < 1e-9);
    }

    #[test]
    fn gaussian_pair_is_complementary(sigma in 1.0f64..800.0, fx in -400.0f64..400.0, fy in -700.0f64..700.0) {
        let lo = GaussianFilterSpec::lowpass(sigma).gain(fx, fy, 360, 640);
        let hi = GaussianFilterSpec::highpass(sigma).gain(fx, fy, 360, 640);
        prop_assert!((lo + hi - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn lowpass_decreases_outwards(sigma in 1.0f64..800.0, f in 0.0f64..500.0, step in 0.0f64..100.0) {
        let g = GaussianFilterSpec::lowpass(sigma);
        prop_assert!(g.gain(0.0, f + step, 360, 640) <= g.gain(0.0, f, 360, 640));
        prop_assert!(g.gain(f + step, 0.0, 360, 640) <= g.gain(f, 0.0, 360, 640));
    }

    #[test]
    fn daf_gain_is_bounded_and_non_increasing(f in 0.0f64..60.0, step in 0.0f64..10.0, f1 in 1.0f64..40.0) {
        let a = daf_gain(f, f1, 3.0);
        let b = daf_gain(f + step, f1, 3.0);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn effective_f1_is_even_and_peaks_head_on(phi in -1.5f64..1.5, dt in -1.5f64..1.5) {
        let spec = DafSpec::default();
        let f = effective_f1(phi, FRAC_PI_2 + dt, &spec).unwrap();
        prop_assert!((f - effective_f1(-phi, FRAC_PI_2 - dt, &spec).unwrap()).abs() < 1e-12);
        prop_assert!(f <= spec.f1_base + 1e-12);
        prop_assert!(f >= 0.0);
    }

    #[test]
    fn mssim_is_symmetric_and_bounded(seed in any::<u64>(), noise in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = GrayImage::from_fn(24, 24, |_, _| rand::Rng::gen::<f64>(&mut rng));
        let b = a.map(|v| v + noise * (v - 0.5));
        let p = SsimParams::default();
        let ab = mssim(&a, &b, &p).unwrap();
        let ba = mssim(&b, &a, &p).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
        prop_assert!((mssim(&a, &a, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shuffles_are_permutations(seed in any::<u64>()) {
        let o = shuffle_ordering(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(DigitOrdering::new(o.digits()).is_ok());
        for b in 0..10 {
            prop_assert_eq!(o.button_of(o.digit_at(b)), b);
        }
    }

    #[test]
    fn layout_fits_any_valid_canvas(w in 300usize..1500, h in 533usize..2700) {
        let l = KeypadLayout::standard(w, h, DigitOrdering::REGULAR);
        prop_assert!(l.validate(w, h).is_ok());
    }
}
