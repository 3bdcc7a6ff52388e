use illusionpad::keypad::{hybrid_keypad_with_ordering, make_hybrid_keypad, RenderStyle};
use illusionpad::safety::{
    naked_eye_safety_distance, naked_eye_safety_distance_with, solve_sigma_hf_with,
    visibility_region, AnalysisConfig, GridAxis, RaySearch, RegionGrid, SafetyMode,
};
use illusionpad::visibility::{visibility_index, VisibilityEvaluator};
use illusionpad::{
    Category, DafSpec, DeviceProfile, DigitOrdering, Error, SsimParams, ViewingPosition,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn working() -> DeviceProfile {
    DeviceProfile::nexus6().at_resolution(360, 640)
}

fn keypad(c: Category, seed: u64) -> illusionpad::HybridKeypad {
    make_hybrid_keypad(
        &working(),
        c.sigma_lf(),
        c.sigma_hf(),
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
    .unwrap()
}

#[test]
fn naked_eye_distance_brackets_the_threshold() {
    let kp = keypad(Category::C1, 3);
    let res = naked_eye_safety_distance(&kp, &working(), 0.93).unwrap();
    assert_eq!(res.mode, SafetyMode::NakedEye);
    let d = res.safety_distance;
    assert!(d > 10.0 && d < 100.0, "{d}");
    let ev = VisibilityEvaluator::new(&kp, DafSpec::default(), SsimParams::default()).unwrap();
    let at = |r: f64| {
        ev.index(
            &ViewingPosition::from_spherical(
                r,
                std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_6,
            )
            .unwrap(),
        )
        .unwrap()
    };
    assert!(at(d) >= 0.93);
    assert!(at(d - 0.5) < 0.93);
    let json = serde_json::to_value(&res).unwrap();
    for key in ["safety_distance", "mode", "inputs", "trace"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn native_profile_is_accepted_for_a_working_keypad() {
    let kp = keypad(Category::C2, 3);
    let a = naked_eye_safety_distance(&kp, &working(), 0.93).unwrap();
    let b = naked_eye_safety_distance(&kp, &DeviceProfile::nexus6(), 0.93).unwrap();
    assert_eq!(a.safety_distance, b.safety_distance);
    assert!(matches!(
        naked_eye_safety_distance(&kp, &DeviceProfile::iphone6(), 0.93),
        Err(Error::Domain(_))
    ));
}

#[test]
fn short_search_reports_unbounded() {
    let kp = keypad(Category::C1, 3);
    let search = RaySearch {
        r_max: 15.0,
        ..RaySearch::default()
    };
    match naked_eye_safety_distance_with(&kp, &working(), &AnalysisConfig::default(), &search) {
        Err(e @ Error::Unbounded { .. }) => {
            assert!(e.is_search_failure());
            if let Error::Unbounded { trace, .. } = e {
                assert_eq!(trace.len(), 3);
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unmasked_user_keypad_is_visible_everywhere_close() {
    let dev = working();
    let kp = hybrid_keypad_with_ordering(
        &dev,
        35.0,
        5.0,
        DigitOrdering::new([0, 9, 8, 7, 6, 5, 4, 3, 2, 1]).unwrap(),
        &RenderStyle::default(),
    )
    .unwrap();
    let pos = ViewingPosition::from_spherical(20.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
    let v = visibility_index(&kp, &pos, &dev, &DafSpec::default(), &SsimParams::default()).unwrap();
    assert!(v < 0.5, "{v}");
}

#[test]
fn region_is_mirror_symmetric() {
    let kp = keypad(Category::C1, 5);
    let grid = RegionGrid {
        x: GridAxis::centered(40.0, 5),
        y: GridAxis::centered(40.0, 5),
        z: GridAxis::new(10.0, 70.0, 4),
    };
    let region = visibility_region(&kp, &working(), &grid, 0.93).unwrap();
    assert_eq!(region.cells.len(), grid.len());
    for iz in 0..4 {
        for iy in 0..5 {
            for ix in 0..5 {
                let c = region.cell(ix, iy, iz);
                assert_eq!(c.visible, region.cell(4 - ix, iy, iz).visible);
                assert_eq!(c.visible, region.cell(ix, 4 - iy, iz).visible);
            }
        }
    }
    let b = region.boundary.expect("something is visible");
    assert!(b.x.abs() <= grid.x.step() && b.y.abs() <= grid.y.step());
    let csv = region.to_csv();
    assert!(csv.starts_with("x,y,z,v,visible\n"));
    assert_eq!(csv.lines().count(), grid.len() + 1);
    let slice = region.zx_slice(4);
    assert_eq!(slice.dims(), (20, 16));
}

#[test]
fn solved_sigma_meets_target() {
    let dev = working();
    let seeds = [11, 23];
    let sol = solve_sigma_hf_with(40.0, &dev, 35.0, &AnalysisConfig::default(), &seeds).unwrap();
    assert!(sol.v >= 0.93);
    assert!((50.0..=800.0).contains(&sol.sigma_hf));
    // anything clearly below the solution stays readable at the target
    let below: Vec<_> = sol
        .trace
        .iter()
        .filter(|(s, _)| *s < sol.sigma_hf)
        .collect();
    assert!(below.iter().all(|(_, v)| *v < 0.93));
    assert!(matches!(
        solve_sigma_hf_with(200.0, &dev, 35.0, &AnalysisConfig::default(), &seeds),
        Err(Error::Domain(_))
    ));
}
