use glmb_core::metrics::tracking_error;
use glmb_core::rng::StreamKey;
use glmb_core::scenario::*;
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn run(n_objects: usize, config: &TrackerConfig<f64>, seed: u64) -> (f64, f64, f64) {
    let region = Region::square(80.0);
    let track = synth_ground_track(54.8, 0.1, &region).unwrap();
    let params = ScenarioParams {
        n_objects,
        delta: 2,
        seed,
        ..Default::default()
    };
    let truth = make_convoy(&track, region, params).unwrap();
    let scenario = build_scenario(truth);

    let key = StreamKey::new(seed);
    let mut posterior = GlmbPosterior::initial();
    let mut card_errs = Vec::new();
    let mut track_errs = Vec::new();
    let mut times = Vec::new();
    for k in 0..scenario.truth.n_steps {
        let out = filter_step(&posterior, &scenario.measurements[k], config, &key).unwrap();
        let truth_pos: Vec<[f64; 2]> = scenario
            .truth
            .active_at(k)
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        let est: Vec<[f64; 2]> = out.estimates.iter().map(|e| e.position()).collect();
        if k > 50 {
            card_errs
                .push((est.len() as f64 - truth_pos.len() as f64) / truth_pos.len() as f64);
            if let Some(e) = tracking_error(&truth_pos, &est) {
                track_errs.push(e);
            }
        }
        times.push(out.stats.update_seconds);
        posterior = out.posterior;
    }
    (
        {
            let abs = card_errs.iter().map(|e| e.abs()).sum::<f64>() / card_errs.len() as f64;
            let signed = card_errs.iter().sum::<f64>() / card_errs.len() as f64;
            eprintln!("    signed bias {signed:+.4}");
            abs
        },
        track_errs.iter().sum::<f64>() / track_errs.len() as f64,
        times.iter().sum::<f64>() / times.len() as f64,
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let sigma_pos: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.05);
    let gate: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(9.21);
    let h_max: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(25);
    let sigma_v: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let sigma_omega: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0.3);
    let particles: usize = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(1024);
    let birth_sigma: f64 = args.get(8).map(|s| s.parse().unwrap()).unwrap_or(0.3);
    let kappa: f64 = args.get(9).map(|s| s.parse().unwrap()).unwrap_or(1e-4);
    let r_birth: f64 = args.get(10).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let reps: u64 = args.get(11).map(|s| s.parse().unwrap()).unwrap_or(3);

    let mut config = TrackerConfig::<f64>::default();
    if let Ok(ps) = std::env::var("P_SURV") { config.p_survival = ps.parse().unwrap(); }
    if let Ok(pd) = std::env::var("P_DET") { config.p_detect = pd.parse().unwrap(); }
    config.h_max = h_max;
    config.noise.sigma_pos = sigma_pos;
    config.noise.sigma_v = sigma_v;
    config.noise.sigma_omega = sigma_omega;
    config.particles_per_track = particles;
    config.birth.pos_sigma = birth_sigma;
    config.clutter_kappa = kappa;
    config.birth.r_birth = r_birth;
    config.gate_chi2 = gate;

    let mut cards = Vec::new();
    let mut tracks = Vec::new();
    let mut times = Vec::new();
    for rep in 0..reps {
        let (c, t, u) = run(n, &config, 1000 + rep);
        println!("  rep {rep}: card_err={c:.4} track_err={t:.3} update={:.4}s", u);
        cards.push(c);
        tracks.push(t);
        times.push(u);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "n={n} sp={sigma_pos} gate={gate} h={h_max} sv={sigma_v} so={sigma_omega} P={particles} bs={birth_sigma} k={kappa} r={r_birth}: card={:.4} track={:.3} update={:.4}",
        mean(&cards),
        mean(&tracks),
        mean(&times)
    );
}
