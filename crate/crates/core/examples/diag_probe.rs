use glmb_core::rng::StreamKey;
use glmb_core::scenario::*;
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let k_lo: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(327);
    let k_hi: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(334);

    let region = Region::square(80.0);
    let track = synth_ground_track(54.8, 0.1, &region).unwrap();
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
        let out = filter_step(&posterior, &scenario.measurements[k], &config, &key).unwrap();
        posterior = out.posterior;
        if k < k_lo {
            continue;
        }
        println!("=== after update k={k}");
        let map = posterior.map_hypothesis().unwrap();
        for &label in &map.labels {
            let sig = map.signature_for(label);
            let tr = &posterior.track_pool[&(label, sig.clone())];
            let m = tr.mean_position();
            let vbar: f64 = tr.particles.iter().map(|p| p.weight() * p.v).sum();
            let v2: f64 = tr.particles.iter().map(|p| p.weight() * p.v * p.v).sum();
            let vstd = (v2 - vbar * vbar).max(0.0).sqrt();
            let cos: f64 = tr.particles.iter().map(|p| p.weight() * p.phi.cos()).sum();
            let sin: f64 = tr.particles.iter().map(|p| p.weight() * p.phi.sin()).sum();
            let dmin = scenario
                .truth
                .active_at(k)
                .iter()
                .map(|(_, q)| ((q[0] - m[0]).powi(2) + (q[1] - m[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            println!(
                "  {label} claims={} pos=({:6.2},{:6.2}) dtruth={dmin:.3} v={vbar:.2}+-{vstd:.2} phi={:.2}",
                sig.len(),
                m[0],
                m[1],
                sin.atan2(cos),
            );
        }
    }
}
