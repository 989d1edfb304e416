use std::f64::consts::PI;

use mobitrace::kernel::{
    center_of_mass, radius_of_gyration, reduce_mod_pi, rg_time_series, summarize, to_intrinsic_frame,
};
use mobitrace::selftest::{angle_gap_mod_pi, rel_err, summary_disagreement};
use mobitrace::synth::naive_summary_oracle;
use mobitrace::{Position, Trajectory};
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..80).prop_map(|pts| {
        let ps: Vec<Position> = pts.into_iter().map(|(x, y)| Position::new(x, y)).collect();
        Trajectory::from_positions("p", &ps).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_oracle(t in cloud()) {
        let err = summary_disagreement(&summarize(&t), &naive_summary_oracle(&t));
        prop_assert!(matches!(err, Ok(e) if e <= 1e-9), "{err:?}");
    }

    #[test]
    fn translation_leaves_shape_unchanged(t in cloud(), dx in -1e3f64..1e3, dy in -1e3f64..1e3) {
        let a = summarize(&t);
        let b = summarize(&t.map_positions(|p| p + Position::new(dx, dy)));
        let scale = a.rg.max(1e-3);
        prop_assert!(rel_err(a.rg, b.rg, scale) <= 1e-9);
        prop_assert!(rel_err(b.com.x, a.com.x + dx, scale.max(dx.abs())) <= 1e-9);
        prop_assert!(rel_err(b.com.y, a.com.y + dy, scale.max(dy.abs())) <= 1e-9);
    }

    #[test]
    fn rotation_turns_the_principal_axis(t in cloud(), alpha in 0.0f64..2.0 * PI) {
        let a = summarize(&t);
        let b = summarize(&t.map_positions(|p| p.rotated(alpha)));
        prop_assert!(rel_err(a.rg, b.rg, 0.0) <= 1e-9);
        prop_assert!(rel_err(a.mu, b.mu, a.tensor.trace()) <= 1e-9);
        // Nearly isotropic clouds have an ill-conditioned axis.
        if a.mu > 1e-6 * a.tensor.trace() {
            prop_assert!(angle_gap_mod_pi(b.theta, reduce_mod_pi(a.theta + alpha)) <= 1e-6);
        }
    }

    #[test]
    fn scaling_is_covariant(t in cloud(), s in 1e-3f64..1e3) {
        let a = summarize(&t);
        let b = summarize(&t.map_positions(|p| p.scaled(s)));
        prop_assert!(rel_err(b.rg, s * a.rg, 0.0) <= 1e-9);
        prop_assert!(rel_err(b.sigma_x, s * a.sigma_x, s * a.rg) <= 1e-9);
        prop_assert!(rel_err(b.sigma_y, s * a.sigma_y, s * a.rg) <= 1e-9);
        prop_assert!(rel_err(b.mu, s * s * a.mu, s * s * a.tensor.trace()) <= 1e-9);
    }

    #[test]
    fn rg_bounded_by_farthest_point(t in cloud()) {
        let com = center_of_mass(&t);
        let far = t.positions().map(|p| p.distance(&com)).fold(0.0, f64::max);
        prop_assert!(radius_of_gyration(&t) <= far * (1.0 + 1e-12));
    }

    #[test]
    fn series_ends_at_rg(t in cloud()) {
        let series = rg_time_series(&t);
        prop_assert_eq!(series.len(), t.len());
        prop_assert_eq!(series[0].1, 0.0);
        prop_assert_eq!(series.last().unwrap().1, radius_of_gyration(&t));
    }

    #[test]
    fn intrinsic_frame_is_standardized(t in cloud()) {
        let s = summarize(&t);
        prop_assume!(t.len() >= 3 && s.sigma_y > 1e-6 * s.sigma_x && s.rg > 1e-6);
        let f = to_intrinsic_frame(&t).unwrap();
        let n = f.points.len() as f64;
        let mu = f.points.iter().map(|p| p.u).sum::<f64>() / n;
        let mv = f.points.iter().map(|p| p.v).sum::<f64>() / n;
        let su = (f.points.iter().map(|p| p.u * p.u).sum::<f64>() / n).sqrt();
        let sv = (f.points.iter().map(|p| p.v * p.v).sum::<f64>() / n).sqrt();
        prop_assert!(mu.abs() <= 1e-9 && mv.abs() <= 1e-9);
        prop_assert!((su - 1.0).abs() <= 1e-9 && (sv - 1.0).abs() <= 1e-9);
    }
}
