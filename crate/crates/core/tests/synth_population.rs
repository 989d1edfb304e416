use std::f64::consts::SQRT_2;

use mobitrace::ingest::{ingest_str, write_cdr_csv, IngestOptions, Reference};
use mobitrace::kernel::{radius_of_gyration, summarize_all};
use mobitrace::synth::{gen_population, gen_population_with_truth, gen_user, PopulationSpec, UserSpec};
use mobitrace::trajectory::build_trajectories;
use mobitrace::{GeoPoint, Position, Timestamp};

#[test]
fn gaussian_users_average_sigma_root_two() {
    let sigma = 3.0;
    let rgs: Vec<f64> = (0..1000)
        .map(|i| {
            let spec = UserSpec {
                user_id: format!("g{i}"),
                home: Position::new(0.0, 0.0),
                work: None,
                scale_km: sigma,
                n_events: 400,
                t_start: Timestamp(0),
                t_end: Timestamp(86_400),
                seed: 1000 + i,
            };
            radius_of_gyration(&gen_user(&spec).unwrap())
        })
        .collect();
    let mean = rgs.iter().sum::<f64>() / rgs.len() as f64;
    let want = sigma * SQRT_2;
    assert!((mean / want - 1.0).abs() <= 0.02, "mean rg {mean} vs {want}");
}

#[test]
fn measured_rg_tracks_target() {
    let spec = PopulationSpec {
        n_users: 1000,
        events_per_user: (300, 300),
        commuter_fraction: 0.5,
        master_seed: 4,
        ..PopulationSpec::default()
    };
    let (records, truth) = gen_population_with_truth(&spec).unwrap();
    let summaries = summarize_all(&build_trajectories(&records));
    assert_eq!(summaries.len(), truth.len());
    let ratio: f64 = summaries
        .iter()
        .zip(&truth)
        .map(|(s, t)| {
            assert_eq!(s.user_id, t.spec.user_id);
            s.rg / t.rg_target
        })
        .sum::<f64>()
        / truth.len() as f64;
    assert!((ratio - 1.0).abs() <= 0.02, "mean measured/target = {ratio}");
}

#[test]
fn csv_round_trip_preserves_trajectories() {
    let spec = PopulationSpec {
        n_users: 200,
        commuter_fraction: 0.3,
        master_seed: 12,
        ..PopulationSpec::default()
    };
    let records = gen_population(&spec).unwrap();
    let reference = GeoPoint::new(-33.9, 151.2).unwrap();
    let mut csv = Vec::new();
    write_cdr_csv(&mut csv, &records, reference).unwrap();
    let text = String::from_utf8(csv).unwrap();

    let ingested = ingest_str(&text, &IngestOptions { reference: Reference::Fixed(reference), window: None }).unwrap();
    assert_eq!(ingested.stats.records_rejected, 0);
    assert_eq!(ingested.stats.records_ok, records.len());

    let before = build_trajectories(&records);
    let after = build_trajectories(&ingested.records);
    assert_eq!(before.keys().collect::<Vec<_>>(), after.keys().collect::<Vec<_>>());
    for (id, a) in &before {
        let b = &after[id];
        assert_eq!(a.len(), b.len());
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p.t, q.t);
            assert!(p.pos.distance(&q.pos) <= 1e-9, "{id}: {:?} vs {:?}", p.pos, q.pos);
        }
    }
}

#[test]
fn population_is_reproducible_from_seed() {
    let spec = PopulationSpec { n_users: 50, master_seed: 99, ..PopulationSpec::default() };
    assert_eq!(gen_population(&spec).unwrap(), gen_population(&spec).unwrap());
    let other = PopulationSpec { master_seed: 100, ..spec.clone() };
    assert_ne!(gen_population(&spec).unwrap(), gen_population(&other).unwrap());
}
