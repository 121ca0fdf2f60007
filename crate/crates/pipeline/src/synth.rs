//! Seeded synthetic corpus in the on-disk layout of [`crate::corpus`].
//!
//! Labels come first. Each split gets an exact number of depressed sessions,
//! placed at shuffled positions; a depressed session draws its PHQ-8 score
//! uniformly from 10..=24, any other from 0..=9. Every planted effect is then a
//! function of the score `L` plus noise:
//!
//! * response gap after an agent turn: `(base + slope * L) * exp(sigma * z)`, z standard normal
//! * answer to the depression-diagnosis question: "yes" with probability
//!   `dep_yes_depressed` for depressed sessions and `dep_yes_other` otherwise
//! * disfluency and sigh rates grow with `L`, laughter falls with `L`
//! * negative words replace neutral ones with probability `0.4 * L / 24`
//! * pitch vibrato depth, loudness and facial expression amplitude shrink with `L`
//!
//! Per-session seeds are drawn in order from one ChaCha8 stream, so sessions
//! can be generated in parallel and the output is byte-identical per seed.

use std::f64::consts::TAU;
use std::path::Path;

use phq_core::io::{save_labels, save_landmarks, save_transcript, save_wav, LabelRow};
use phq_core::model::{AudioSignal, LandmarkFrame, LandmarkSequence, Phq8, Speaker, TurnRecord, LANDMARK_COUNT};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Split;
use crate::error::{create_dir, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub train_depressed: usize,
    pub dev_depressed: usize,
    pub test_depressed: usize,
    pub first_id: u32,
    pub audio: bool,
    pub landmarks: bool,
    pub sample_rate: u32,
    pub landmark_fps: f64,
    pub response_base: f64,
    pub response_slope: f64,
    pub response_sigma: f64,
    pub dep_yes_depressed: f64,
    pub dep_yes_other: f64,
    /// Chance per second that a tracking failure burst starts.
    pub failure_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            train: 107,
            dev: 35,
            test: 0,
            train_depressed: 30,
            dev_depressed: 13,
            test_depressed: 0,
            first_id: 300,
            audio: true,
            landmarks: true,
            sample_rate: 8000,
            landmark_fps: 2.0,
            response_base: 0.4,
            response_slope: 0.12,
            response_sigma: 0.35,
            dep_yes_depressed: 0.8,
            dep_yes_other: 0.15,
            failure_rate: 0.004,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synth: {m}")));
        for (split, n, d) in [
            (Split::Train, self.train, self.train_depressed),
            (Split::Dev, self.dev, self.dev_depressed),
            (Split::Test, self.test, self.test_depressed),
        ] {
            if d > n {
                return bad(format!("{d} depressed sessions exceed {split} size {n}"));
            }
        }
        if self.train < 2 {
            return bad("need at least two training sessions".into());
        }
        for (name, p) in [
            ("dep_yes_depressed", self.dep_yes_depressed),
            ("dep_yes_other", self.dep_yes_other),
            ("failure_rate", self.failure_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.sample_rate < phq_core::audio::frames::MIN_SAMPLE_RATE {
            return bad(format!("sample rate {} below 8000", self.sample_rate));
        }
        if !(self.landmark_fps >= 1.0) {
            return bad("landmark_fps must be at least 1".into());
        }
        if !(self.response_base > 0.0 && self.response_slope >= 0.0 && self.response_sigma >= 0.0) {
            return bad("response timing parameters must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Plan {
    id: String,
    split: Split,
    score: u8,
    seed: u64,
}

fn plan(spec: &SynthSpec, seed: u64) -> Vec<Plan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut next_id = spec.first_id;
    for (split, n, d) in [
        (Split::Train, spec.train, spec.train_depressed),
        (Split::Dev, spec.dev, spec.dev_depressed),
        (Split::Test, spec.test, spec.test_depressed),
    ] {
        let mut flags: Vec<bool> = (0..n).map(|i| i < d).collect();
        flags.shuffle(&mut rng);
        for depressed in flags {
            let score = if depressed { rng.gen_range(10..=24) } else { rng.gen_range(0..=9) };
            out.push(Plan {
                id: next_id.to_string(),
                split,
                score,
                seed: rng.gen(),
            });
            next_id += 1;
        }
    }
    out
}

/// Writes a full corpus under `root`.
pub fn generate(spec: &SynthSpec, seed: u64, root: &Path) -> Result<()> {
    spec.validate()?;
    let plans = plan(spec, seed);
    create_dir(&root.join("sessions"))?;
    for split in Split::ALL {
        let rows: Vec<LabelRow> = plans
            .iter()
            .filter(|p| p.split == split)
            .map(|p| LabelRow {
                participant_id: p.id.clone(),
                binary: u8::from(p.score >= phq_core::model::PHQ8_DEPRESSED_CUTOFF),
                score: Phq8::new(p.score).expect("planned scores are in range"),
            })
            .collect();
        if split == Split::Test && rows.is_empty() {
            continue;
        }
        save_labels(root.join(split.file_name()), &rows)?;
    }
    plans.par_iter().try_for_each(|p| write_session(spec, p, root))
}

fn write_session(spec: &SynthSpec, plan: &Plan, root: &Path) -> Result<()> {
    let dir = root.join("sessions").join(&plan.id);
    create_dir(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let severity = plan.score as f64 / 24.0;
    let turns = transcript(spec, plan.score, &mut rng)?;
    save_transcript(dir.join(format!("{}_TRANSCRIPT.csv", plan.id)), &turns)?;
    let duration = turns.last().map_or(1.0, |t| t.stop) + 1.0;
    if spec.audio {
        let audio = audio(spec, &turns, duration, severity, &mut rng);
        save_wav(dir.join(format!("{}_AUDIO.wav", plan.id)), &audio)?;
    }
    if spec.landmarks {
        let seq = landmarks(spec, duration, severity, &mut rng)?;
        save_landmarks(dir.join(format!("{}_CLNF_features3D.txt", plan.id)), &seq)?;
    }
    Ok(())
}

const QUESTIONS: [&str; 11] = [
    "how are you doing today",
    "where are you from originally",
    "what do you do to relax",
    "how easy is it for you to get a good night's sleep",
    "when was the last time you felt really happy",
    "what are you most proud of in your life",
    "how do you get along with your family",
    "what did you study at school",
    "tell me about your friends",
    "what advice would you give to yourself ten years ago",
    "how have you been feeling lately",
];

const PDI_QUESTIONS: [&str; 3] = [
    "have you ever been diagnosed with ptsd",
    "have you been diagnosed with depression",
    "have you ever served in the military",
];

const NEUTRAL: [&str; 24] = [
    "i", "think", "it", "was", "pretty", "good", "my", "work", "family", "friends", "like", "to",
    "go", "out", "and", "the", "weekend", "really", "school", "city", "time", "people", "okay", "things",
];

const NEGATIVE: [&str; 10] = [
    "tired", "alone", "hopeless", "sad", "worthless", "exhausted", "nothing", "anxious", "empty", "stuck",
];

const YES: [&str; 3] = ["yes i have", "yeah", "yes <laughter> a while ago"];
const NO: [&str; 3] = ["no", "no i haven't", "nope never"];
const UNSURE: &str = "hmm i'm not sure";

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

fn answer(score: u8, rng: &mut ChaCha8Rng) -> String {
    let s = score as f64 / 24.0;
    let mut words = Vec::new();
    if rng.gen_bool(0.03 + 0.12 * s) {
        words.push("<sigh>".to_string());
    }
    let n = rng.gen_range(3..=12);
    for _ in 0..n {
        if rng.gen_bool(0.05 + 0.1 * s) {
            words.push(["um", "uh", "hmm"][rng.gen_range(0..3)].to_string());
        }
        let pool: &[&str] = if rng.gen_bool(0.4 * s) { &NEGATIVE } else { &NEUTRAL };
        words.push(pool[rng.gen_range(0..pool.len())].to_string());
    }
    if rng.gen_bool(0.25 - 0.2 * s) {
        words.push("<laughter>".to_string());
    }
    words.join(" ")
}

fn pdi_answer(p_yes: f64, rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.05) {
        return UNSURE.to_string();
    }
    let pool = if rng.gen_bool(p_yes) { &YES } else { &NO };
    pool[rng.gen_range(0..pool.len())].to_string()
}

fn transcript(spec: &SynthSpec, score: u8, rng: &mut ChaCha8Rng) -> Result<Vec<TurnRecord>> {
    let depressed = score >= phq_core::model::PHQ8_DEPRESSED_CUTOFF;
    let mut prompts: Vec<(String, Option<f64>)> = QUESTIONS.iter().map(|q| (q.to_string(), None)).collect();
    prompts.shuffle(rng);
    let p_yes = [
        if depressed { 0.4 } else { 0.1 },
        if depressed { spec.dep_yes_depressed } else { spec.dep_yes_other },
        0.2,
    ];
    for (q, p) in PDI_QUESTIONS.iter().zip(p_yes) {
        let at = rng.gen_range(1..=prompts.len());
        prompts.insert(at, (q.to_string(), Some(p)));
    }
    prompts.insert(0, ("hi i'm ellie thanks for coming in today".into(), Some(-1.0)));
    prompts.push(("okay i think i have asked everything i need to thanks for sharing".into(), Some(-1.0)));

    let median_gap = spec.response_base + spec.response_slope * score as f64;
    let mut turns = Vec::new();
    let mut t = 0.5;
    let push = |turns: &mut Vec<TurnRecord>, t: &mut f64, speaker: Speaker, text: &str, per_token: f64| -> Result<()> {
        let n = text.split_whitespace().count() as f64;
        let start = round_ms(*t);
        let stop = round_ms(*t + 0.3 + per_token * n);
        turns.push(TurnRecord::new(start, stop, speaker, text)?);
        *t = stop;
        Ok(())
    };
    let last = prompts.len() - 1;
    for (i, (question, pdi)) in prompts.into_iter().enumerate() {
        push(&mut turns, &mut t, Speaker::Agent, &question, 0.3)?;
        if i == last {
            break;
        }
        let z = normal(rng);
        t += (median_gap * (spec.response_sigma * z).exp()).max(0.05);
        let reply = match pdi {
            Some(p) if p >= 0.0 => pdi_answer(p, rng),
            _ => answer(score, rng),
        };
        push(&mut turns, &mut t, Speaker::Participant, &reply, 0.35)?;
        if pdi.is_none() && rng.gen_bool(0.3) {
            t += rng.gen_range(0.3..1.5);
            push(&mut turns, &mut t, Speaker::Participant, &answer(score, rng), 0.35)?;
        }
        t += rng.gen_range(0.5..1.0);
    }
    Ok(turns)
}

fn audio(spec: &SynthSpec, turns: &[TurnRecord], duration: f64, severity: f64, rng: &mut ChaCha8Rng) -> AudioSignal<f64> {
    let sr = spec.sample_rate as f64;
    let n = (duration * sr).ceil() as usize;
    let mut samples: Vec<f64> = (0..n)
        .map(|_| 0.002 * normal(rng))
        .collect();
    let f0_base = rng.gen_range(95.0..210.0);
    let vibrato = 0.08 * (1.0 - 0.6 * severity);
    let loudness = 0.3 * (1.0 - 0.3 * severity);
    for turn in turns {
        let (base, depth, amp) = match turn.speaker {
            Speaker::Participant => (f0_base, vibrato, loudness),
            Speaker::Agent => (215.0, 0.03, 0.05),
        };
        let lo = (turn.start * sr) as usize;
        let hi = ((turn.stop * sr) as usize).min(n);
        let rate = rng.gen_range(0.5..1.0);
        let offset = rng.gen_range(0.0..TAU);
        let fade = (0.02 * sr) as usize;
        let mut phase = 0.0;
        for i in lo..hi {
            let time = i as f64 / sr;
            let f0 = base * (1.0 + depth * (TAU * rate * time + offset).sin());
            phase += TAU * f0 / sr;
            let tone: f64 = (1..=5).map(|k| (k as f64 * phase).sin() / k as f64).sum();
            let syllables = 0.6 + 0.4 * (TAU * 3.0 * time).sin();
            let edge = ((i - lo).min(hi - 1 - i) as f64 / fade as f64).min(1.0);
            samples[i] += amp * syllables * edge * tone / 2.3;
        }
    }
    AudioSignal::new(samples, spec.sample_rate)
}

/// Deterministic 68-point template: jaw, brows, nose, eyes and mouth, in mm.
fn face_template() -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(LANDMARK_COUNT);
    for i in 0..17 {
        let a = std::f64::consts::PI * (i as f64 / 16.0);
        pts.push([-70.0 * a.cos(), 10.0 - 75.0 * a.sin(), 20.0 * a.sin() - 30.0]);
    }
    for side in [-1.0, 1.0] {
        for i in 0..5 {
            let u = i as f64 / 4.0;
            pts.push([side * (15.0 + 40.0 * u), 45.0 + 6.0 * (1.0 - (2.0 * u - 1.0).powi(2)), -5.0]);
        }
    }
    for i in 0..4 {
        pts.push([0.0, 30.0 - 10.0 * i as f64, 5.0 + 8.0 * i as f64]);
    }
    for i in 0..5 {
        pts.push([-12.0 + 6.0 * i as f64, -12.0 + (i as f64 - 2.0).abs(), 28.0]);
    }
    for side in [-1.0, 1.0] {
        for i in 0..6 {
            let a = TAU * i as f64 / 6.0;
            pts.push([side * 35.0 + 12.0 * a.cos(), 30.0 + 5.0 * a.sin(), 0.0]);
        }
    }
    for i in 0..12 {
        let a = TAU * i as f64 / 12.0;
        pts.push([25.0 * a.cos(), -40.0 + 10.0 * a.sin(), 20.0]);
    }
    for i in 0..8 {
        let a = TAU * i as f64 / 8.0;
        pts.push([15.0 * a.cos(), -40.0 + 4.0 * a.sin(), 22.0]);
    }
    debug_assert_eq!(pts.len(), LANDMARK_COUNT);
    pts
}

struct Mode {
    freqs: [f64; 2],
    phases: [f64; 2],
    amp: f64,
}

impl Mode {
    fn new(amp: f64, rng: &mut ChaCha8Rng) -> Self {
        Mode {
            freqs: [rng.gen_range(0.02..0.2), rng.gen_range(0.02..0.2)],
            phases: [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)],
            amp,
        }
    }

    fn at(&self, t: f64) -> f64 {
        self.amp * 0.5 * ((TAU * self.freqs[0] * t + self.phases[0]).sin() + (TAU * self.freqs[1] * t + self.phases[1]).sin())
    }
}

fn round_cmm(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn landmarks(spec: &SynthSpec, duration: f64, severity: f64, rng: &mut ChaCha8Rng) -> Result<LandmarkSequence<f64>> {
    let template = face_template();
    let shape: Vec<[f64; 3]> = template
        .iter()
        .map(|p| {
            let mut q = *p;
            for c in q.iter_mut() {
                *c += 1.5 * normal(rng);
            }
            q
        })
        .collect();
    let expressive = 1.0 - 0.5 * severity;
    let yaw = Mode::new(0.25 * expressive, rng);
    let pitch = Mode::new(0.15 * expressive, rng);
    let mouth = Mode::new(6.0 * expressive, rng);
    let brows = Mode::new(4.0 * expressive, rng);
    let smile = Mode::new(5.0 * expressive, rng);
    let drift = [Mode::new(20.0, rng), Mode::new(20.0, rng), Mode::new(30.0, rng)];

    let n = (duration * spec.landmark_fps).floor() as usize + 1;
    let mut failed_until = -1.0;
    let mut next_check = 0.0;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / spec.landmark_fps;
        while next_check <= t {
            if next_check >= failed_until && rng.gen_bool(spec.failure_rate) {
                failed_until = next_check + rng.gen_range(1.0..8.0);
            }
            next_check += 1.0;
        }
        let timestamp = round_ms(t);
        if t < failed_until {
            frames.push(LandmarkFrame {
                timestamp,
                confidence: 0.0,
                success: false,
                points: vec![[0.0; 3]; LANDMARK_COUNT],
            });
            continue;
        }
        let (sy, cy) = yaw.at(t).sin_cos();
        let (sp, cp) = pitch.at(t).sin_cos();
        let (m, b, s) = (mouth.at(t), brows.at(t), smile.at(t));
        let shift = [drift[0].at(t), drift[1].at(t), 600.0 + drift[2].at(t)];
        let points = shape
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut q = *p;
                match k {
                    6..=10 | 57..=59 | 65..=67 => q[1] -= m.max(0.0),
                    17..=26 => q[1] += b,
                    48 | 54 | 60 | 64 => {
                        q[0] *= 1.0 + s / 40.0;
                        q[1] += s.abs() * 0.5;
                    }
                    _ => {}
                }
                let x = cy * q[0] + sy * q[2];
                let z = -sy * q[0] + cy * q[2];
                let y = cp * q[1] - sp * z;
                let z = sp * q[1] + cp * z;
                let mut out = [x + shift[0], y + shift[1], z + shift[2]];
                for c in out.iter_mut() {
                    *c = round_cmm(*c + 0.05 * normal(rng));
                }
                out
            })
            .collect();
        frames.push(LandmarkFrame {
            timestamp,
            confidence: (rng.gen_range(0.9..1.0f64) * 1000.0).round() / 1000.0,
            success: true,
            points,
        });
    }
    Ok(LandmarkSequence::new(frames)?)
}
