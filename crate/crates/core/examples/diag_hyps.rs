use glmb_core::rng::StreamKey;
use glmb_core::scenario::*;
use glmb_core::types::*;
use glmb_core::update::filter_step;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1002);
    let k_lo: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(198);
    let k_hi: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(208);

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
        println!(
            "=== k={k} true={} cands={}",
            scenario.truth.cardinality_at(k),
            out.stats.n_candidates
        );
        // Weight mass by cardinality, and the top hypotheses.
        let mut by_card: std::collections::BTreeMap<usize, f64> = Default::default();
        for h in &posterior.hypotheses {
            *by_card.entry(h.labels.len()).or_default() += h.weight;
        }
        println!("  card mass: {by_card:?}");
        let mut hyps: Vec<_> = posterior.hypotheses.iter().collect();
        hyps.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap());
        for h in hyps.iter().take(3) {
            let claims: Vec<String> = h
                .labels
                .iter()
                .map(|&l| format!("{l}:{}", h.signature_for(l).len()))
                .collect();
            println!("  w={:.3} parent={} {:?}", h.weight, h.parent_id, claims);
        }
        // Positions of MAP tracks vs truth.
        let map = posterior.map_hypothesis().unwrap();
        for &label in &map.labels {
            let tr = &posterior.track_pool[&(label, map.signature_for(label))];
            let m = tr.mean_position();
            let dmin = scenario
                .truth
                .active_at(k)
                .iter()
                .map(|(_, q)| ((q[0] - m[0]).powi(2) + (q[1] - m[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            println!("    {label} d={dmin:.2} pos=({:.1},{:.1})", m[0], m[1]);
        }
    }
}
