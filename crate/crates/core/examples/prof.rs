use illusionpad::keypad::*;
use illusionpad::perception::*;
use illusionpad::spectral::*;
use illusionpad::*;
use rand::SeedableRng;
use std::time::Instant;
fn main() {
    let dev = DeviceProfile::nexus6().at_resolution(360, 640);
    let kp = make_hybrid_keypad(
        &dev,
        35.0,
        145.0,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(7),
    )
    .unwrap();
    let fft = Fft2d::new(360, 640);
    let s = Spectrum::forward(&kp.hybrid.composed, &fft).unwrap();
    let pos = ViewingPosition::from_spherical(30.0, 1.5, 0.3).unwrap();
    let n = 20;
    let t = Instant::now();
    for _ in 0..n {
        let c = ViewingConditions::new(&pos, &dev.display, &DafSpec::default()).unwrap();
        std::hint::black_box(c.gain_grid(360, 640, 3.0));
    }
    println!("gain {:?}", t.elapsed() / n);
    let g = ViewingConditions::new(&pos, &dev.display, &DafSpec::default())
        .unwrap()
        .gain_grid(360, 640, 3.0);
    let t = Instant::now();
    for _ in 0..n {
        std::hint::black_box(s.scaled(&g));
    }
    println!("scale {:?}", t.elapsed() / n);
    let sc = s.scaled(&g);
    let t = Instant::now();
    for _ in 0..n {
        std::hint::black_box(sc.inverse(&fft));
    }
    println!("inverse {:?}", t.elapsed() / n);
    let img = sc.inverse(&fft);
    let t = Instant::now();
    for _ in 0..n {
        std::hint::black_box(segment_buttons(&img, &kp.layout).unwrap());
    }
    println!("segment {:?}", t.elapsed() / n);
    let b = segment_buttons(&img, &kp.layout).unwrap();
    let b2 = segment_buttons(&kp.hybrid.surfer_low, &kp.layout).unwrap();
    let t = Instant::now();
    for _ in 0..n {
        for i in 0..10 {
            std::hint::black_box(visibility::mssim(&b[i], &b2[i], &SsimParams::default()).unwrap());
        }
    }
    println!("ssim10 {:?}", t.elapsed() / n);
}
