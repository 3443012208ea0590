use proptest::prelude::*;

use roadspeed_core::detection::{
    associate_tracks, close, open, segment_mask, BinaryMask, FrameObservations, Observation, TrackerParams,
};
use roadspeed_core::simulator::{camera_road_homography, CameraModel};
use roadspeed_core::speed::{
    estimate_speed, pairwise_projected_speeds, rho_from_height, SiteConfig, TrackSample, TrackSequence,
};
use roadspeed_core::{Homography, Point2};

fn blob_mask(w: usize, h: usize, rects: &[(usize, usize, usize, usize)], dx: usize, dy: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        rects
            .iter()
            .any(|&(x0, y0, rw, rh)| x >= x0 + dx && x < x0 + dx + rw && y >= y0 + dy && y < y0 + dy + rh)
    })
}

fn random_mask() -> impl Strategy<Value = BinaryMask> {
    (
        8usize..40,
        8usize..40,
        proptest::collection::vec(any::<bool>(), 64..1600),
    )
        .prop_map(|(w, h, bits)| BinaryMask::from_fn(w, h, |x, y| bits[(y * w + x) % bits.len()]))
}

fn site(h: Homography) -> SiteConfig {
    let mut s = SiteConfig::new(h, 25.0);
    s.camera_height_m = Some(6.0);
    s.default_plate_height_m = Some(0.5);
    s
}

fn wavy_track(n: usize, dt: f64, seed: u64) -> TrackSequence {
    let samples = (0..n)
        .map(|i| {
            let wobble = (((i as u64 * 2654435761) ^ seed) % 97) as f64 / 97.0 - 0.5;
            let corner = Point2::new(0.012 * i as f64 + 0.05 * wobble, -0.56 * i as f64);
            TrackSample {
                frame: i,
                timestamp: i as f64 * dt,
                corner,
                edge: Some([Point2::new(corner.x - 0.6, corner.y), corner]),
            }
        })
        .collect();
    TrackSequence::new(0, samples)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closing_grows_and_opening_shrinks(mask in random_mask(), r in 1usize..4) {
        let closed = close(&mask, r);
        let opened = open(&mask, r);
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if mask.get(x, y) {
                    prop_assert!(closed.get(x, y));
                } else {
                    prop_assert!(!opened.get(x, y));
                }
            }
        }
    }

    #[test]
    fn segmentation_follows_translation(
        rects in proptest::collection::vec((12usize..30, 12usize..30, 3usize..14, 3usize..14), 1..4),
        dx in 0usize..30,
        dy in 0usize..30,
    ) {
        let a = segment_mask(&blob_mask(96, 96, &rects, 0, 0), 2);
        let b = segment_mask(&blob_mask(96, 96, &rects, dx, dy), 2);
        prop_assert_eq!(a.len(), b.len());
        for (ca, cb) in a.iter().zip(&b) {
            let mut shifted: Vec<_> = ca.component.pixels.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
            let mut other = cb.component.pixels.clone();
            shifted.sort_unstable();
            other.sort_unstable();
            prop_assert_eq!(shifted, other);
            prop_assert!((ca.rect.area() - cb.rect.area()).abs() < 1e-6 * ca.rect.area());
        }
    }

    #[test]
    fn speeds_scale_inversely_with_time(n in 3usize..30, k in 0.1f64..10.0, seed in any::<u64>()) {
        let a = wavy_track(n, 0.04, seed);
        let b = wavy_track(n, 0.04 * k, seed);
        let cfg = site(Homography::identity());
        let ea = estimate_speed(&a, &cfg).unwrap();
        let eb = estimate_speed(&b, &cfg).unwrap();
        prop_assert!((eb.s_projected * k - ea.s_projected).abs() <= 1e-9 * ea.s_projected);
        prop_assert_eq!(ea.rho_m2, eb.rho_m2);
    }

    #[test]
    fn sample_order_does_not_matter(n in 3usize..30, seed in any::<u64>(), perm_seed in any::<u64>()) {
        let track = wavy_track(n, 0.04, seed);
        let mut shuffled = track.clone();
        let len = shuffled.samples.len();
        for i in (1..len).rev() {
            let j = (perm_seed.wrapping_mul(i as u64 + 7) >> 11) as usize % (i + 1);
            shuffled.samples.swap(i, j);
        }
        let cfg = site(Homography::identity());
        let a = estimate_speed(&track, &cfg).unwrap();
        let b = estimate_speed(&shuffled, &cfg).unwrap();
        prop_assert_eq!(a.s_projected, b.s_projected);
        prop_assert_eq!(a.rho_m2, b.rho_m2);
        prop_assert_eq!(a.v_m1, b.v_m1);
    }

    #[test]
    fn correction_falls_as_plate_rises(hc in 1.0f64..12.0, f1 in 0.0f64..0.99, f2 in 0.0f64..0.99) {
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        let r_lo = rho_from_height(hc, lo * hc).unwrap();
        let r_hi = rho_from_height(hc, hi * hc).unwrap();
        prop_assert!(r_hi <= r_lo);
        prop_assert!(r_lo <= 1.0 && r_hi > 0.0);
        prop_assert!(rho_from_height(hc, hc).is_err());
    }

    #[test]
    fn road_level_points_move_at_true_speed(
        hc in 3.0f64..10.0,
        lateral in -2.0f64..2.0,
        yaw in -0.1f64..0.1,
        v in 2.0f64..40.0,
        n in 2usize..12,
    ) {
        let center = [lateral, 0.0, hc];
        let target = [lateral + 30.0 * yaw, 30.0, 0.0];
        let camera = CameraModel::looking_at(center, target, 1500.0, 1500.0, [1280, 720]).unwrap();
        let h = camera_road_homography(&camera).unwrap();
        let dt = 0.04;
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                let corner = camera.project([0.0, 40.0 - v * t, 0.0]).unwrap();
                TrackSample { frame: i, timestamp: t, corner, edge: None }
            })
            .collect();
        let track = TrackSequence::new(0, samples);
        let cfg = SiteConfig::new(h, 25.0);
        for s in pairwise_projected_speeds(&track, &h, &cfg).unwrap() {
            prop_assert!((s - v).abs() < 1e-6 * v, "{} vs {}", s, v);
        }
        prop_assert_eq!(rho_from_height(hc, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn a_track_never_takes_two_detections_from_one_frame(
        frames in proptest::collection::vec(
            proptest::collection::vec((0.0f64..300.0, 0.0f64..300.0), 0..5),
            1..25,
        ),
    ) {
        let input: Vec<FrameObservations> = frames
            .iter()
            .enumerate()
            .map(|(i, obs)| FrameObservations {
                frame: i,
                timestamp: i as f64 / 25.0,
                observations: obs
                    .iter()
                    .map(|&(x, y)| Observation { corner: Point2::new(x, y), edge: None })
                    .collect(),
            })
            .collect();
        let tracks = associate_tracks(&input, &TrackerParams::default());
        let mut used = std::collections::HashSet::new();
        for t in &tracks {
            let mut frames_seen = std::collections::HashSet::new();
            for &(pos, idx) in &t.members {
                prop_assert!(frames_seen.insert(pos));
                prop_assert!(used.insert((pos, idx)));
            }
            prop_assert_eq!(t.members.len(), t.sequence.samples.len());
        }
        let total: usize = frames.iter().map(Vec::len).sum();
        prop_assert_eq!(used.len(), total);
    }
}
