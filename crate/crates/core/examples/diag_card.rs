use glmb_core::rng::StreamKey;
use glmb_core::scenario::*;
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn main() {
    let region = Region::square(80.0);
    let track = synth_ground_track(54.8, 0.1, &region).unwrap();
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let particles: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(256);
    let h_max: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(10);
    let seed: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(7);
    let params = ScenarioParams {
        n_objects: n,
        delta: 2,
        seed,
        ..Default::default()
    };
    let truth = make_convoy(&track, region, params).unwrap();
    let scenario = build_scenario(truth);

    let mut config = TrackerConfig::<f64>::default();
    config.h_max = h_max;
    config.particles_per_track = particles;
    config.seed = seed;
    let key = StreamKey::new(seed);
    let mut posterior = GlmbPosterior::initial();
    let (mut over, mut under) = (0i64, 0i64);
    let mut last_d = 0i64;
    let (mut over_steps, mut under_steps) = (0usize, 0usize);
    for k in 0..scenario.truth.n_steps {
        let show = {
            let tmp_true = scenario.truth.cardinality_at(k);
            k < 2 || true_est_differs(&posterior, tmp_true)
        };
        let _ = show;
        let out = filter_step(&posterior, &scenario.measurements[k], &config, &key).unwrap();
        posterior = out.posterior;
        let map = posterior.map_hypothesis().unwrap();
        let true_n = scenario.truth.cardinality_at(k);
        if k > 50 {
            let d = map.labels.len() as i64 - true_n as i64;
            if d > 0 { over += d; over_steps += 1; } else if d < 0 { under -= d; under_steps += 1; }
        }
        {
            let d = map.labels.len() as i64 - true_n as i64;
            if d != last_d {
                println!("k={k:3} true={true_n} est={} (d={d:+})", map.labels.len());
                last_d = d;
            }
        }
        if false {
            let labels: Vec<String> = map.labels.iter().map(|l| l.to_string()).collect();
            println!(
                "k={k:3} M={:2} true={} est={} hyps={:2} map_w={:.3} labels={:?}",
                scenario.measurements[k].len(),
                true_n,
                map.labels.len(),
                posterior.hypotheses.len(),
                map.weight,
                labels
            );
        }
    }
    println!("seed={} over={over} steps={over_steps} | under={under} steps={under_steps}", config.seed);
}

fn true_est_differs(_p: &GlmbPosterior<f64>, _n: usize) -> bool { false }
