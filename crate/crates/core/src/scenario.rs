//! Convoy benchmark scenarios: synthetic or file-loaded ground tracks,
//! time-offset object copies, noisy multi-detection sampling with Poisson
//! clutter, and scenario (de)serialization.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, Real};
use crate::rng::{normal, poisson_count, uniform_range, StreamDomain, StreamKey};
use crate::types::MeasurementSet;

/// Axis-aligned tracking region, meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region<T> {
    pub min_x: T,
    pub min_y: T,
    pub max_x: T,
    pub max_y: T,
}

impl<T: Real> Region<T> {
    /// Square region `[0, side] x [0, side]`.
    pub fn square(side: T) -> Self {
        Self {
            min_x: T::zero(),
            min_y: T::zero(),
            max_x: side,
            max_y: side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_x > self.min_x && self.max_y > self.min_y {
            Ok(())
        } else {
            Err(Error::DegenerateRegion(format!(
                "[{}, {}] x [{}, {}]",
                self.min_x, self.max_x, self.min_y, self.max_y
            )))
        }
    }

    pub fn area(&self) -> T {
        (self.max_x - self.min_x) * (self.max_y - self.min_y)
    }

    pub fn center(&self) -> [T; 2] {
        let half = real::<T>(0.5);
        [
            (self.min_x + self.max_x) * half,
            (self.min_y + self.max_y) * half,
        ]
    }

    pub fn contains(&self, p: &[T; 2]) -> bool {
        p[0] >= self.min_x && p[0] <= self.max_x && p[1] >= self.min_y && p[1] <= self.max_y
    }
}

/// A single-object reference trajectory sampled at a fixed step.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTrack<T> {
    /// Step duration, seconds.
    pub dt: T,
    /// Positions, one per step.
    pub points: Vec<[T; 2]>,
}

impl<T: Real> GroundTrack<T> {
    pub fn validate(&self, v_max: T) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::InvalidConfig(
                "ground track needs at least 2 points".into(),
            ));
        }
        let max_step = v_max * self.dt;
        for (k, w) in self.points.windows(2).enumerate() {
            let dx = w[1][0] - w[0][0];
            let dy = w[1][1] - w[0][1];
            if (dx * dx + dy * dy).sqrt() > max_step {
                return Err(Error::InvalidConfig(format!(
                    "ground track jump at step {k} exceeds v_max * dt"
                )));
            }
        }
        Ok(())
    }
}

/// Synthesizes a smooth closed loop inside the region:
/// `x(t) = cx + 0.75 rx sin(2 pi t / T)`,
/// `y(t) = cy + 0.75 ry sin(4 pi t / T + pi/3)`, sampled every `dt`, where
/// `T` is the duration and `rx, ry` the region half-extents.
pub fn synth_ground_track<T: Real>(
    duration: T,
    dt: T,
    region: &Region<T>,
) -> Result<GroundTrack<T>> {
    region.validate()?;
    let steps = (duration / dt).round().to_usize().unwrap_or(0);
    if steps < 2 {
        return Err(Error::InvalidConfig(
            "duration/dt must give at least 2 steps".into(),
        ));
    }
    let [cx, cy] = region.center();
    let half = real::<T>(0.5);
    let rx = (region.max_x - region.min_x) * half;
    let ry = (region.max_y - region.min_y) * half;
    let amp = real::<T>(0.75);
    let two_pi = T::PI() + T::PI();
    let phase = T::PI() / real(3.0);
    let points = (0..steps)
        .map(|k| {
            let t = real::<T>(k as f64) * dt;
            let x = cx + amp * rx * (two_pi * t / duration).sin();
            let y = cy + amp * ry * ((two_pi + two_pi) * t / duration + phase).sin();
            [x, y]
        })
        .collect();
    Ok(GroundTrack { dt, points })
}

/// Benchmark scenario parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams<T> {
    /// Number of convoy objects `N`.
    pub n_objects: usize,
    /// Detections sampled per active object per step `D`.
    pub detections_per_object: usize,
    /// Expected clutter detections per step.
    pub lambda_clutter: T,
    /// Detection noise std dev, meters.
    pub sigma: T,
    /// Entry stagger between consecutive objects, steps.
    pub delta: usize,
    /// Scenario sampling seed.
    pub seed: u64,
}

impl<T: Real> Default for ScenarioParams<T> {
    fn default() -> Self {
        Self {
            n_objects: 5,
            detections_per_object: 5,
            lambda_clutter: T::zero(),
            sigma: real(0.25),
            delta: 2,
            seed: 0,
        }
    }
}

/// One convoy object: enters at `entry_step` and then replays the base
/// track from its start.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthObject<T> {
    pub id: usize,
    pub entry_step: usize,
    /// Position at step `entry_step + i` is `positions[i]`.
    pub positions: Vec<[T; 2]>,
}

/// Ground-truth object positions for every step of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioTruth<T> {
    pub objects: Vec<TruthObject<T>>,
    pub region: Region<T>,
    pub params: ScenarioParams<T>,
    pub dt: T,
    pub n_steps: usize,
}

impl<T: Real> ScenarioTruth<T> {
    /// Ids and positions of objects active at step `k`.
    pub fn active_at(&self, k: usize) -> Vec<(usize, [T; 2])> {
        self.objects
            .iter()
            .filter_map(|o| {
                (k >= o.entry_step && k - o.entry_step < o.positions.len())
                    .then(|| (o.id, o.positions[k - o.entry_step]))
            })
            .collect()
    }

    pub fn cardinality_at(&self, k: usize) -> usize {
        self.active_at(k).len()
    }
}

/// Builds the convoy: `n` copies of the base track, copy `n` entering at
/// step `n * delta` and thereafter replaying the track from its beginning,
/// so the true cardinality ramps up one object every `delta` steps.
pub fn make_convoy<T: Real>(
    track: &GroundTrack<T>,
    region: Region<T>,
    params: ScenarioParams<T>,
) -> Result<ScenarioTruth<T>> {
    if params.n_objects < 1 {
        return Err(Error::InvalidConfig("need at least one object".into()));
    }
    let k_total = track.points.len();
    let mut objects = Vec::with_capacity(params.n_objects);
    for n in 0..params.n_objects {
        let entry_step = n * params.delta;
        if entry_step >= k_total {
            return Err(Error::ObjectNeverEnters {
                object: n,
                entry_step,
                track_len: k_total,
            });
        }
        objects.push(TruthObject {
            id: n,
            entry_step,
            positions: track.points[..k_total - entry_step].to_vec(),
        });
    }
    Ok(ScenarioTruth {
        objects,
        region,
        params,
        dt: track.dt,
        n_steps: k_total,
    })
}

/// Samples the detection set for step `k`: exactly `D` Gaussian detections
/// per active object plus Poisson clutter uniform over the region, returned
/// in sorted order.
pub fn sample_detections<T: Real>(
    truth: &ScenarioTruth<T>,
    k: usize,
    key: &StreamKey,
) -> MeasurementSet<T> {
    let mut detections: Vec<[T; 2]> = Vec::new();
    for (id, pos) in truth.active_at(k) {
        let mut rng = key.stream(k as i64, StreamDomain::Detection, id as u64, 0);
        for _ in 0..truth.params.detections_per_object {
            detections.push([
                normal(&mut rng, pos[0], truth.params.sigma),
                normal(&mut rng, pos[1], truth.params.sigma),
            ]);
        }
    }
    let mut rng = key.stream(k as i64, StreamDomain::Clutter, 0, 0);
    let n_clutter = poisson_count(&mut rng, truth.params.lambda_clutter.to_f64().unwrap_or(0.0));
    for _ in 0..n_clutter {
        detections.push([
            uniform_range(&mut rng, truth.region.min_x, truth.region.max_x),
            uniform_range(&mut rng, truth.region.min_y, truth.region.max_y),
        ]);
    }
    detections.sort_by(|a, b| a.partial_cmp(b).expect("finite detections"));
    MeasurementSet {
        step: k as i64,
        detections,
    }
}

/// A complete benchmark input: truth plus the sampled detection sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub truth: ScenarioTruth<T>,
    pub measurements: Vec<MeasurementSet<T>>,
}

/// Samples detections for every step of the truth using its seed.
pub fn build_scenario<T: Real>(truth: ScenarioTruth<T>) -> Scenario<T> {
    let key = StreamKey::new(truth.params.seed);
    let measurements = (0..truth.n_steps)
        .map(|k| sample_detections(&truth, k, &key))
        .collect();
    Scenario {
        truth,
        measurements,
    }
}

// ---------------------------------------------------------------------------
// Serialization. Line-delimited JSON: one header record, then one record per
// step. Documented in docs/formats.md.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    schema: String,
    n_objects: usize,
    detections_per_object: usize,
    lambda_clutter: f64,
    sigma: f64,
    delta: usize,
    seed: u64,
    dt: f64,
    n_steps: usize,
    region: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct TruthRecord {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct StepRecordDto {
    k: i64,
    time: f64,
    truth: Vec<TruthRecord>,
    detections: Vec<[f64; 2]>,
}

const SCENARIO_SCHEMA: &str = "glmb-scenario/1";

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

/// Writes a scenario as line-delimited JSON.
pub fn write_scenario<T: Real, W: Write>(mut out: W, scenario: &Scenario<T>) -> Result<()> {
    let truth = &scenario.truth;
    let header = HeaderRecord {
        schema: SCENARIO_SCHEMA.to_string(),
        n_objects: truth.params.n_objects,
        detections_per_object: truth.params.detections_per_object,
        lambda_clutter: f(truth.params.lambda_clutter),
        sigma: f(truth.params.sigma),
        delta: truth.params.delta,
        seed: truth.params.seed,
        dt: f(truth.dt),
        n_steps: truth.n_steps,
        region: [
            f(truth.region.min_x),
            f(truth.region.min_y),
            f(truth.region.max_x),
            f(truth.region.max_y),
        ],
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for k in 0..truth.n_steps {
        let record = StepRecordDto {
            k: k as i64,
            time: k as f64 * f(truth.dt),
            truth: truth
                .active_at(k)
                .into_iter()
                .map(|(id, p)| TruthRecord {
                    id,
                    x: f(p[0]),
                    y: f(p[1]),
                })
                .collect(),
            detections: scenario.measurements[k]
                .detections
                .iter()
                .map(|d| [f(d[0]), f(d[1])])
                .collect(),
        };
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a scenario written by [`write_scenario`]. Malformed records are
/// rejected with the offending line number.
pub fn read_scenario<T: Real, R: BufRead>(input: R) -> Result<Scenario<T>> {
    let t = |x: f64| T::from_f64(x).expect("f64 convertible to scalar");
    let mut lines = input.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty scenario file"))?;
    let header: HeaderRecord = serde_json::from_str(&first?)
        .map_err(|e| parse_err(1, format!("bad header record: {e}")))?;
    if header.schema != SCENARIO_SCHEMA {
        return Err(parse_err(
            1,
            format!("unsupported schema {:?}", header.schema),
        ));
    }

    let mut steps: Vec<StepRecordDto> = Vec::with_capacity(header.n_steps);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StepRecordDto = serde_json::from_str(&line)
            .map_err(|e| parse_err(line_no, format!("bad step record: {e}")))?;
        if record.k != steps.len() as i64 {
            return Err(parse_err(
                line_no,
                format!("expected step {}, found {}", steps.len(), record.k),
            ));
        }
        steps.push(record);
    }
    if steps.len() != header.n_steps {
        return Err(parse_err(
            steps.len() + 1,
            format!("expected {} steps, found {}", header.n_steps, steps.len()),
        ));
    }

    // Rebuild per-object position runs from the per-step truth lists.
    let mut objects: Vec<TruthObject<T>> = Vec::with_capacity(header.n_objects);
    for (k, record) in steps.iter().enumerate() {
        for tr in &record.truth {
            let pos = [t(tr.x), t(tr.y)];
            match objects.iter_mut().find(|o| o.id == tr.id) {
                Some(o) => {
                    if o.entry_step + o.positions.len() != k {
                        return Err(parse_err(
                            k + 2,
                            format!("object {} has a gap in its activity", tr.id),
                        ));
                    }
                    o.positions.push(pos);
                }
                None => objects.push(TruthObject {
                    id: tr.id,
                    entry_step: k,
                    positions: vec![pos],
                }),
            }
        }
    }
    objects.sort_by_key(|o| o.id);

    let truth = ScenarioTruth {
        objects,
        region: Region {
            min_x: t(header.region[0]),
            min_y: t(header.region[1]),
            max_x: t(header.region[2]),
            max_y: t(header.region[3]),
        },
        params: ScenarioParams {
            n_objects: header.n_objects,
            detections_per_object: header.detections_per_object,
            lambda_clutter: t(header.lambda_clutter),
            sigma: t(header.sigma),
            delta: header.delta,
            seed: header.seed,
        },
        dt: t(header.dt),
        n_steps: header.n_steps,
    };
    let measurements = steps
        .into_iter()
        .map(|r| MeasurementSet {
            step: r.k,
            detections: r.detections.iter().map(|d| [t(d[0]), t(d[1])]).collect(),
        })
        .collect();
    Ok(Scenario {
        truth,
        measurements,
    })
}

/// Writes a ground track as `step,x,y` CSV.
pub fn write_ground_track<T: Real, W: Write>(mut out: W, track: &GroundTrack<T>) -> Result<()> {
    writeln!(out, "step,x,y")?;
    for (k, p) in track.points.iter().enumerate() {
        writeln!(out, "{},{},{}", k, f(p[0]), f(p[1]))?;
    }
    Ok(())
}

/// Reads a `step,x,y` CSV ground track, e.g. an exported GPS trajectory.
pub fn read_ground_track<T: Real, R: BufRead>(input: R, dt: T) -> Result<GroundTrack<T>> {
    let t = |x: f64| T::from_f64(x).expect("f64 convertible to scalar");
    let mut points = Vec::new();
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !saw_header {
            if trimmed != "step,x,y" {
                return Err(parse_err(line_no, "expected header 'step,x,y'"));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad step index: {e}")))?;
        if step != points.len() {
            return Err(parse_err(
                line_no,
                format!("expected step {}, found {step}", points.len()),
            ));
        }
        let x: f64 = fields[1]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad x: {e}")))?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad y: {e}")))?;
        points.push([t(x), t(y)]);
    }
    if points.len() < 2 {
        return Err(parse_err(
            points.len() + 1,
            "ground track needs at least 2 points",
        ));
    }
    Ok(GroundTrack { dt, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn region80() -> Region<f64> {
        Region::square(80.0)
    }

    #[test]
    fn synth_track_point_count() {
        let track = synth_ground_track(54.8, 0.1, &region80()).unwrap();
        assert_eq!(track.points.len(), 548);
    }

    #[test]
    fn synth_track_start_point() {
        let track = synth_ground_track(54.8, 0.1, &region80()).unwrap();
        assert_relative_eq!(track.points[0][0], 40.0, epsilon = 1e-9);
        assert_relative_eq!(
            track.points[0][1],
            40.0 + 30.0 * (std::f64::consts::PI / 3.0).sin(),
            epsilon = 1e-9
        );
        assert_relative_eq!(track.points[0][1], 65.98, epsilon = 1e-2);
    }

    #[test]
    fn synth_track_stays_inside_region_and_is_smooth() {
        let region = region80();
        let track = synth_ground_track(54.8, 0.1, &region).unwrap();
        for p in &track.points {
            assert!(region.contains(p));
        }
        track.validate(15.0).unwrap();
    }

    #[test]
    fn synth_track_rejects_degenerate_inputs() {
        assert!(synth_ground_track(
            54.8,
            0.1,
            &Region {
                min_x: 0.0,
                min_y: 0.0,
                max_x: 0.0,
                max_y: 80.0
            }
        )
        .is_err());
        assert!(synth_ground_track(0.1, 0.1, &region80()).is_err());
    }

    fn convoy(n: usize, delta: usize) -> ScenarioTruth<f64> {
        let track = synth_ground_track(54.8, 0.1, &region80()).unwrap();
        let params = ScenarioParams {
            n_objects: n,
            delta,
            ..Default::default()
        };
        make_convoy(&track, region80(), params).unwrap()
    }

    #[test]
    fn convoy_single_object_is_base_track() {
        let track = synth_ground_track(54.8, 0.1, &region80()).unwrap();
        let truth = convoy(1, 2);
        assert_eq!(truth.objects.len(), 1);
        assert_eq!(truth.objects[0].entry_step, 0);
        assert_eq!(truth.objects[0].positions, track.points);
    }

    #[test]
    fn convoy_offset_indexing() {
        let track = synth_ground_track(54.8, 0.1, &region80()).unwrap();
        let truth = convoy(5, 2);
        // Object 3 enters at step 6; its position at k = 10 is x*_4.
        assert_eq!(truth.objects[3].entry_step, 6);
        let active = truth.active_at(10);
        let pos = active.iter().find(|(id, _)| *id == 3).unwrap().1;
        assert_eq!(pos, track.points[4]);
    }

    #[test]
    fn convoy_cardinality_ramp() {
        let truth = convoy(20, 2);
        for k in 0..truth.n_steps {
            let expected = (k / 2 + 1).min(20);
            assert_eq!(truth.cardinality_at(k), expected, "step {k}");
        }
        assert_eq!(truth.cardinality_at(38), 20);
    }

    #[test]
    fn convoy_shifted_copies_identical() {
        let truth = convoy(4, 3);
        let base = &truth.objects[0].positions;
        for o in &truth.objects {
            assert_eq!(&base[..o.positions.len()], o.positions.as_slice());
        }
    }

    #[test]
    fn convoy_rejects_object_past_track_end() {
        let track = GroundTrack {
            dt: 0.1,
            points: vec![[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]],
        };
        let params = ScenarioParams {
            n_objects: 2,
            delta: 5,
            ..Default::default()
        };
        assert!(matches!(
            make_convoy(&track, region80(), params),
            Err(Error::ObjectNeverEnters { object: 1, .. })
        ));
    }

    #[test]
    fn detections_exact_count_without_clutter() {
        let truth = convoy(3, 2);
        let key = StreamKey::new(truth.params.seed);
        for k in 0..truth.n_steps {
            let m = sample_detections(&truth, k, &key);
            assert_eq!(m.len(), 5 * truth.cardinality_at(k));
            assert!(m.detections.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn detection_noise_statistics() {
        // 1e5 detections of a single fixed object: mean within
        // 3*sigma/sqrt(n) of truth, std within 1% of sigma.
        let track = GroundTrack {
            dt: 0.1,
            points: vec![[10.0, 20.0]; 2],
        };
        let params = ScenarioParams {
            n_objects: 1,
            detections_per_object: 100_000,
            delta: 0,
            seed: 9,
            ..Default::default()
        };
        let truth = make_convoy(&track, region80(), params).unwrap();
        let m = sample_detections(&truth, 0, &StreamKey::new(9));
        let n = m.len() as f64;
        let mean_x = m.detections.iter().map(|d| d[0]).sum::<f64>() / n;
        let var_x = m
            .detections
            .iter()
            .map(|d| (d[0] - mean_x).powi(2))
            .sum::<f64>()
            / n;
        assert!((mean_x - 10.0).abs() < 3.0 * 0.25 / n.sqrt());
        assert!((var_x.sqrt() - 0.25).abs() < 0.0025);
    }

    #[test]
    fn clutter_poisson_mean() {
        let track = GroundTrack {
            dt: 0.1,
            points: vec![[10.0, 20.0]; 10_000],
        };
        let params = ScenarioParams {
            n_objects: 1,
            detections_per_object: 0,
            lambda_clutter: 3.0,
            delta: 0,
            seed: 4,
            ..Default::default()
        };
        let truth = make_convoy(&track, region80(), params).unwrap();
        let key = StreamKey::new(4);
        let total: usize = (0..10_000)
            .map(|k| sample_detections(&truth, k, &key).len())
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 3.0).abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn scenario_round_trip() {
        let truth = convoy(3, 2);
        let scenario = build_scenario(truth);
        let mut buf = Vec::new();
        write_scenario(&mut buf, &scenario).unwrap();
        let back: Scenario<f64> = read_scenario(buf.as_slice()).unwrap();
        assert_eq!(back, scenario);
        // Second write is byte-identical.
        let mut buf2 = Vec::new();
        write_scenario(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn scenario_rejects_truncated_line() {
        let truth = convoy(2, 2);
        let scenario = build_scenario(truth);
        let mut buf = Vec::new();
        write_scenario(&mut buf, &scenario).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let truncated = &lines[3][..lines[3].len() / 2];
        lines[3] = truncated;
        let bad = lines.join("\n");
        match read_scenario::<f64, _>(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn scenario_allows_empty_detection_steps() {
        let track = GroundTrack {
            dt: 0.1,
            points: vec![[1.0, 1.0]; 5],
        };
        let params = ScenarioParams {
            n_objects: 1,
            detections_per_object: 0,
            lambda_clutter: 0.0,
            delta: 0,
            ..Default::default()
        };
        let truth = make_convoy(&track, region80(), params).unwrap();
        let scenario = build_scenario(truth);
        assert!(scenario.measurements.iter().all(|m| m.is_empty()));
        let mut buf = Vec::new();
        write_scenario(&mut buf, &scenario).unwrap();
        let back: Scenario<f64> = read_scenario(buf.as_slice()).unwrap();
        assert_eq!(back, scenario);
    }

    #[test]
    fn ground_track_round_trip_and_errors() {
        let track = synth_ground_track(10.0, 0.1, &region80()).unwrap();
        let mut buf = Vec::new();
        write_ground_track(&mut buf, &track).unwrap();
        let back: GroundTrack<f64> = read_ground_track(buf.as_slice(), 0.1).unwrap();
        assert_eq!(back, track);

        let bad = "step,x,y\n0,1.0\n";
        match read_ground_track::<f64, _>(bad.as_bytes(), 0.1) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
