use glmb_core::rng::{normal, StreamDomain, StreamKey};
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let speed: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1);

    let config = TrackerConfig::<f64>::default();
    let key = StreamKey::new(seed);
    let mut posterior = GlmbPosterior::initial();
    for k in 0..100i64 {
        let truth = [5.0 + speed * 0.1 * k as f64, 20.0];
        let mut rng = key.stream(k, StreamDomain::Custom(99), 0, 0);
        let mut detections: Vec<[f64; 2]> = (0..5)
            .map(|_| {
                [
                    normal(&mut rng, truth[0], 0.25),
                    normal(&mut rng, truth[1], 0.25),
                ]
            })
            .collect();
        detections.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let z = MeasurementSet { step: k, detections };
        let out = filter_step(&posterior, &z, &config, &key).unwrap();
        posterior = out.posterior;
        if k % 5 == 0 || k > 90 {
            let map = posterior.map_hypothesis().unwrap();
            if let Some(&label) = map.labels.first() {
                let tr = &posterior.track_pool[&(label, map.signature_for(label))];
                let m = tr.mean_position();
                let vbar: f64 = tr.particles.iter().map(|p| p.weight() * p.v).sum();
                let lag = truth[0] - m[0];
                println!(
                    "k={k:3} est_n={} vbar={vbar:5.2} lag={lag:+.3} dy={:+.3}",
                    map.labels.len(),
                    truth[1] - m[1]
                );
            } else {
                println!("k={k:3} est_n=0");
            }
        }
    }
}
