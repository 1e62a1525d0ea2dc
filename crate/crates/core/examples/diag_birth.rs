use glmb_core::dynamics::predict;
use glmb_core::likelihood::build_compatibility;
use glmb_core::rng::StreamKey;
use glmb_core::scenario::*;
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn main() {
    let region = Region::square(80.0);
    let track = synth_ground_track(54.8, 0.1, &region).unwrap();
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(7);
    let k_lo: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let k_hi: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10);
    let params = ScenarioParams {
        n_objects: n,
        delta: 2,
        seed,
        ..Default::default()
    };
    let truth = make_convoy(&track, region, params).unwrap();
    let scenario = build_scenario(truth);

    let mut config = TrackerConfig::<f64>::default();
    config.h_max = 25;
    config.seed = seed;
    let key = StreamKey::new(seed);
    let mut posterior = GlmbPosterior::initial();
    for k in 0..k_hi {
        if k < k_lo {
            let out = filter_step(&posterior, &scenario.measurements[k], &config, &key).unwrap();
            posterior = out.posterior;
            continue;
        }
        // Peek at the predicted state the same way filter_step does.
        let predicted = predict(&posterior, &config, &key);
        let tracks: Vec<&LabeledTrack<f64>> = predicted.track_pool.values().collect();
        let compat = build_compatibility(&scenario.measurements[k], &tracks, &config);
        println!("--- step {k}: {} tracks, M={}", tracks.len(), scenario.measurements[k].len());
        for t in &tracks {
            let m = t.mean_position();
            let spread: f64 = t
                .particles
                .iter()
                .map(|p| {
                    let w = p.weight();
                    w * ((p.px - m[0]).powi(2) + (p.py - m[1]).powi(2))
                })
                .sum::<f64>()
                .sqrt();
            let dmin = scenario
                .truth
                .active_at(k)
                .iter()
                .map(|(_, q)| ((q[0] - m[0]).powi(2) + (q[1] - m[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            let vmean: f64 = t.particles.iter().map(|p| p.weight() * p.v).sum();
            println!(
                "  track {} mean=({:7.3},{:7.3}) spread={:.3} dist_truth={:.3} vbar={:.2}",
                t.label, m[0], m[1], spread, dmin, vmean
            );
        }
        for (i, z) in scenario.measurements[k].detections.iter().enumerate() {
            let mut evidence: f64 = 0.0;
            for j in 0..compat.num_tracks() {
                let c = compat.entry(i, j + 1);
                evidence = evidence.max(c / (c + config.clutter_kappa));
            }
            if evidence < config.birth.seed_threshold {
                let dmin = scenario
                    .truth
                    .active_at(k)
                    .iter()
                    .map(|(_, q)| ((q[0] - z[0]).powi(2) + (q[1] - z[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                println!("  SEED meas {i} z=({:.2},{:.2}) evidence={evidence:.4} dist_truth={dmin:.3}", z[0], z[1]);
            }
        }
        let out = filter_step(&posterior, &scenario.measurements[k], &config, &key).unwrap();
        posterior = out.posterior;
    }
}
