//! Clock-record synthesis: a noise floor plus a mean offset plus a sum of
//! effect contributions, optionally compared against an independent
//! reference, with timing mismatch and measurement noise injected into the
//! measured copies of the variables.
//!
//! Every channel draws from its own seeded stream, so identical scenarios
//! reproduce bit-identical records and removing an effect leaves the other
//! channels untouched. Preset scenarios reproduce the numerical
//! experiments the estimator is validated against, rescalable for desk
//! runs.

use crate::asynchrony::{apply_delay, apply_integral_mean, integral_center_offset, AsynchronySpec};
use crate::error::{Error, Result};
use crate::noise::{generate, NoiseKind, NoiseSpec};
use crate::series::TimeSeries;
use crate::util::splitmix64;

/// How an effect couples its variable into the frequency record.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// Contribution `k * v`.
    Linear { k: f64 },
    /// Contribution `a * (mean + v)^2`; for small fluctuations the
    /// linearized coefficient is `2 a mean`.
    Quadratic { a: f64, mean: f64 },
}

impl Response {
    /// The (linearized) sensitivity coefficient.
    pub fn coefficient(&self) -> f64 {
        match *self {
            Response::Linear { k } => k,
            Response::Quadratic { a, mean } => 2.0 * a * mean,
        }
    }
}

/// One systematic effect: its variable generator, how it couples into the
/// clock, and what corrupts the measured copy of the variable.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectSpec {
    pub name: String,
    pub response: Response,
    /// Generator of the underlying variable realization.
    pub niv: NoiseSpec,
    /// Timing mismatch between the driving copy and the measured copy.
    pub asynchrony: Option<AsynchronySpec>,
    /// Independent noise added to the measured copy only.
    pub measurement_noise: Option<NoiseSpec>,
}

impl EffectSpec {
    pub fn linear(name: impl Into<String>, k: f64, niv: NoiseSpec) -> Self {
        EffectSpec {
            name: name.into(),
            response: Response::Linear { k },
            niv,
            asynchrony: None,
            measurement_noise: None,
        }
    }

    pub fn with_asynchrony(mut self, spec: AsynchronySpec) -> Self {
        self.asynchrony = Some(spec);
        self
    }

    pub fn with_measurement_noise(mut self, spec: NoiseSpec) -> Self {
        self.measurement_noise = Some(spec);
        self
    }

    /// True (linearized) coefficient of this effect.
    pub fn k(&self) -> f64 {
        self.response.coefficient()
    }
}

/// The short-term noise floor of the clock.
#[derive(Debug, Clone, PartialEq)]
pub enum FloorSpec {
    Noise(NoiseSpec),
    /// White floor with deviation `1 / (Q * SNR)` at the base period, from
    /// the quality factor and signal-to-noise ratio of the interrogation.
    QuantumLimited { q: f64, snr: f64, seed: u64 },
}

impl FloorSpec {
    fn to_noise_spec(&self) -> Result<NoiseSpec> {
        match self {
            FloorSpec::Noise(spec) => Ok(spec.clone()),
            FloorSpec::QuantumLimited { q, snr, seed } => {
                if q.is_nan() || snr.is_nan() || *q <= 0.0 || *snr <= 0.0 {
                    return Err(Error::Domain(format!(
                        "Q and SNR must be positive, got Q = {q}, SNR = {snr}"
                    )));
                }
                NoiseSpec::new(NoiseKind::White, 1.0 / (q * snr), *seed)
            }
        }
    }
}

/// Full recipe for a synthetic clock record.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockSpec {
    /// Mean fractional frequency offset.
    pub y_bar: f64,
    pub noise_floor: Option<FloorSpec>,
    pub effects: Vec<EffectSpec>,
    /// Independent reference the clock is compared against; its noise is
    /// subtracted from the output record.
    pub reference: Option<NoiseSpec>,
}

/// Expected truth for test assertions, carried alongside a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedEffect {
    pub name: String,
    pub k: f64,
    pub delay_steps: i64,
    pub integral_steps: usize,
    pub kind: NoiseKind,
}

/// A runnable scenario: clock recipe, record length, master seed, base
/// period, and optional expected truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub clock: ClockSpec,
    pub n: usize,
    pub seed: u64,
    pub tau0: f64,
    pub expected: Option<Vec<ExpectedEffect>>,
    /// Free-text caveats recorded into output metadata.
    pub notes: Vec<String>,
}

/// Injected parameters of one effect, with the exact contribution that was
/// added into the output record.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectTruth {
    pub name: String,
    pub k: f64,
    pub delay_steps: i64,
    pub integral_steps: usize,
    pub niv_kind: NoiseKind,
    pub niv_level: f64,
    pub niv_seed: u64,
    pub measurement_noise_level: Option<f64>,
    pub contribution: Vec<f64>,
}

/// Everything injected into a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub scenario_name: String,
    pub master_seed: u64,
    pub n: usize,
    pub tau0: f64,
    pub y_bar: f64,
    pub effects: Vec<EffectTruth>,
}

/// Output of a simulation: the comparison record, the measured variable
/// records in effect order, and the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub y_com: TimeSeries,
    pub measured: Vec<(String, TimeSeries)>,
    pub truth: TruthRecord,
}

fn checked_seed(seeds: &mut Vec<u64>, seed: u64, what: &str) -> Result<()> {
    if seeds.contains(&seed) {
        return Err(Error::Domain(format!(
            "duplicate channel seed {seed} ({what}); streams must be independent"
        )));
    }
    seeds.push(seed);
    Ok(())
}

/// Synthesizes a scenario.
///
/// The output record is built as `y_bar + floor - reference`, then effect
/// contributions are added in effect order; the measured copy of each
/// variable is the raw realization (plus measurement noise), while the
/// driving copy has the effect's timing mismatch applied, so the mismatch
/// is recoverable from the outputs.
pub fn simulate(scenario: &Scenario) -> Result<SimOutput> {
    let n = scenario.n;
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "scenario length",
            need: 2,
            have: n,
        });
    }
    if scenario.tau0.is_nan() || scenario.tau0 <= 0.0 {
        return Err(Error::Domain(format!(
            "tau0 must be positive, got {}",
            scenario.tau0
        )));
    }

    // Validate channel seeds before generating anything.
    let mut seeds = Vec::new();
    if let Some(floor) = &scenario.clock.noise_floor {
        checked_seed(&mut seeds, floor.to_noise_spec()?.seed, "noise floor")?;
    }
    if let Some(r) = &scenario.clock.reference {
        checked_seed(&mut seeds, r.seed, "reference")?;
    }
    for e in &scenario.clock.effects {
        checked_seed(&mut seeds, e.niv.seed, &format!("variable of {}", e.name))?;
        if let Some(mn) = &e.measurement_noise {
            checked_seed(
                &mut seeds,
                mn.seed,
                &format!("measurement noise of {}", e.name),
            )?;
        }
    }

    // Base record: mean offset plus floor minus reference.
    let mut y = vec![scenario.clock.y_bar; n];
    if let Some(floor) = &scenario.clock.noise_floor {
        let f = generate(&floor.to_noise_spec()?, n)?;
        for (o, v) in y.iter_mut().zip(f.values()) {
            *o += v;
        }
    }
    if let Some(r) = &scenario.clock.reference {
        let f = generate(r, n)?;
        for (o, v) in y.iter_mut().zip(f.values()) {
            *o -= v;
        }
    }

    let mut measured = Vec::with_capacity(scenario.clock.effects.len());
    let mut truths = Vec::with_capacity(scenario.clock.effects.len());
    for effect in &scenario.clock.effects {
        let (d, i) = match &effect.asynchrony {
            Some(a) => (a.delay_steps(), a.integral_steps()),
            None => (0, 1),
        };
        let half = integral_center_offset(i) as i64;
        // Symmetric padding covers the window extent on both sides for
        // either delay sign, with slack.
        let pad = (half + d.unsigned_abs() as i64) as usize;
        let pad_left = pad;
        let padded = generate(&effect.niv, pad_left + n + pad)?;

        // Driving copy: the library transforms guarantee the same window
        // convention the compensation search uses. Output sample t of the
        // transformed record is centered on padded index
        // t + max(d, 0) + half, and the contribution at record index j is
        // centered on padded index pad_left + j + d.
        let (shifted, _) = apply_delay(&padded, d)?;
        let transformed = apply_integral_mean(&shifted, i)?;
        let t0 = (pad_left as i64 + d.min(0) - half) as usize;
        debug_assert!(t0 + n <= transformed.len());
        let driving = &transformed.values()[t0..t0 + n];

        let contribution: Vec<f64> = match effect.response {
            Response::Linear { k } => driving.iter().map(|&v| k * v).collect(),
            Response::Quadratic { a, mean } => driving
                .iter()
                .map(|&v| {
                    let t = mean + v;
                    a * t * t
                })
                .collect(),
        };
        for (o, c) in y.iter_mut().zip(&contribution) {
            *o += c;
        }

        let mut meas: Vec<f64> = padded.values()[pad_left..pad_left + n].to_vec();
        if let Some(mn) = &effect.measurement_noise {
            let extra = generate(mn, n)?;
            for (o, v) in meas.iter_mut().zip(extra.values()) {
                *o += v;
            }
        }
        measured.push((effect.name.clone(), TimeSeries::new(meas, scenario.tau0)?));
        truths.push(EffectTruth {
            name: effect.name.clone(),
            k: effect.k(),
            delay_steps: d,
            integral_steps: i,
            niv_kind: effect.niv.kind,
            niv_level: effect.niv.level,
            niv_seed: effect.niv.seed,
            measurement_noise_level: effect.measurement_noise.as_ref().map(|m| m.level),
            contribution,
        });
    }

    Ok(SimOutput {
        y_com: TimeSeries::new(y, scenario.tau0)?,
        measured,
        truth: TruthRecord {
            scenario_name: scenario.name.clone(),
            master_seed: scenario.seed,
            n,
            tau0: scenario.tau0,
            y_bar: scenario.clock.y_bar,
            effects: truths,
        },
    })
}

/// Derives a channel seed from the master seed; channels are numbered so
/// that dropping an effect does not renumber the others.
fn channel_seed(master: u64, channel: u64) -> u64 {
    splitmix64(master.wrapping_add(channel.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

const CH_FLOOR: u64 = 1;
const CH_REFERENCE: u64 = 2;
const CH_EFFECT_BASE: u64 = 16;

/// Known preset names.
pub const PRESET_NAMES: [&str; 10] = [
    "fig3_affs",
    "fig3_osc",
    "fig4_wfn",
    "fig4_ffn",
    "fig4_rwn",
    "fig5_delay",
    "fig5_integral",
    "fig5_both",
    "table1",
    "zeeman_demo",
];

/// Builds a preset scenario at the default master seed.
pub fn preset(name: &str, scale: f64) -> Result<Scenario> {
    preset_seeded(name, scale, 1)
}

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(64)
}

/// Builds a preset scenario; `scale` in (0, 1] rescales the record length
/// for desk runs, and all channel seeds derive from the master seed.
pub fn preset_seeded(name: &str, scale: f64, master: u64) -> Result<Scenario> {
    if scale.is_nan() || scale <= 0.0 || scale > 1.0 {
        return Err(Error::Domain(format!(
            "scale must be in (0, 1], got {scale}"
        )));
    }
    let floor_seed = channel_seed(master, CH_FLOOR);
    let ref_seed = channel_seed(master, CH_REFERENCE);
    let niv_seed = channel_seed(master, CH_EFFECT_BASE);

    // Single-noise scenarios: floor and variable share the noise kind,
    // the effect holds 5% of the total variance at every tau
    // (level ratio sqrt(19) with k = 1).
    let single_noise = |kind: NoiseKind| -> Result<Scenario> {
        let x_level = 1e-13;
        let niv = NoiseSpec::new(kind, x_level, niv_seed)?;
        let floor = NoiseSpec::new(kind, x_level * 19f64.sqrt(), floor_seed)?;
        Ok(Scenario {
            name: name.to_string(),
            clock: ClockSpec {
                y_bar: 1e-13,
                noise_floor: Some(FloorSpec::Noise(floor)),
                effects: vec![EffectSpec::linear("x", 1.0, niv)],
                reference: None,
            },
            n: scaled(2_000_000, scale),
            seed: master,
            tau0: 1.0,
            expected: Some(vec![ExpectedEffect {
                name: "x".into(),
                k: 1.0,
                delay_steps: 0,
                integral_steps: 1,
                kind,
            }]),
            notes: vec![],
        })
    };

    // Comparison-like scenarios: clock record against a variable holding
    // 1% of the total variance at the base period, k = 0.11. An optional
    // reference stream mixes a second noise kind into the output record.
    let comparison = |x_kind: NoiseKind,
                      floor_kind: NoiseKind,
                      reference_kind: Option<NoiseKind>,
                      asynchrony: Option<AsynchronySpec>,
                      notes: Vec<String>|
     -> Result<Scenario> {
        let k = 0.11;
        let x_level = 1e-13;
        let effect_level = k * x_level;
        // The floor (and the reference, when present) split the remaining
        // 99% of the base-period variance evenly.
        let other = effect_level * 99f64.sqrt();
        let (floor_level, reference) = match reference_kind {
            None => (other, None),
            Some(kind) => {
                let each = other / std::f64::consts::SQRT_2;
                (each, Some(NoiseSpec::new(kind, each, ref_seed)?))
            }
        };
        let floor = NoiseSpec::new(floor_kind, floor_level, floor_seed)?;
        let niv = NoiseSpec::new(x_kind, x_level, niv_seed)?;
        let mut effect = EffectSpec::linear("x", k, niv);
        let (d, i) = match &asynchrony {
            Some(a) => (a.delay_steps(), a.integral_steps()),
            None => (0, 1),
        };
        if let Some(a) = asynchrony {
            effect = effect.with_asynchrony(a);
        }
        Ok(Scenario {
            name: name.to_string(),
            clock: ClockSpec {
                y_bar: 1e-13,
                noise_floor: Some(FloorSpec::Noise(floor)),
                effects: vec![effect],
                reference,
            },
            n: scaled(650_000, scale),
            seed: master,
            tau0: 1.0,
            expected: Some(vec![ExpectedEffect {
                name: "x".into(),
                k,
                delay_steps: d,
                integral_steps: i,
                kind: x_kind,
            }]),
            notes,
        })
    };

    match name {
        "fig4_wfn" | "table1" => single_noise(NoiseKind::White),
        "fig4_ffn" => single_noise(NoiseKind::Flicker),
        "fig4_rwn" => single_noise(NoiseKind::RandomWalk),
        "fig3_affs" => comparison(NoiseKind::White, NoiseKind::White, None, None, vec![]),
        "fig3_osc" => comparison(
            NoiseKind::RandomWalk,
            NoiseKind::Flicker,
            Some(NoiseKind::RandomWalk),
            None,
            vec![
                "synthetic flicker+random-walk mixture standing in for recorded \
                 oscillator comparison data; slopes match, samples do not"
                    .into(),
            ],
        ),
        "fig5_delay" => comparison(
            NoiseKind::White,
            NoiseKind::White,
            None,
            Some(AsynchronySpec::delay(10)),
            vec![],
        ),
        "fig5_integral" => comparison(
            NoiseKind::White,
            NoiseKind::White,
            None,
            Some(AsynchronySpec::integral(10)?),
            vec![],
        ),
        "fig5_both" => comparison(
            NoiseKind::White,
            NoiseKind::White,
            None,
            Some(AsynchronySpec::both(6, 8)?),
            vec![],
        ),
        "zeeman_demo" => {
            // Second-order sensitivity to a solenoid current, read out as
            // a voltage across a sampling resistor: contribution
            // a (mean + v)^2, linearized coefficient 2 a mean.
            let a = 3.235e-14;
            let i_bar = 1.0;
            let k = 2.0 * a * i_bar;
            let x_level = 1e-3; // fluctuation-to-mean ratio 1e-3
            let niv = NoiseSpec::new(NoiseKind::White, x_level, niv_seed)?;
            Ok(Scenario {
                name: name.to_string(),
                clock: ClockSpec {
                    y_bar: 1e-13,
                    noise_floor: Some(FloorSpec::QuantumLimited {
                        q: 1e10,
                        snr: 3.546e5,
                        seed: floor_seed,
                    }),
                    effects: vec![EffectSpec {
                        name: "zeeman".into(),
                        response: Response::Quadratic { a, mean: i_bar },
                        niv,
                        asynchrony: None,
                        measurement_noise: None,
                    }],
                    reference: Some(NoiseSpec::new(NoiseKind::White, 1e-16, ref_seed)?),
                },
                n: scaled(650_000, scale),
                seed: master,
                tau0: 1.0,
                expected: Some(vec![ExpectedEffect {
                    name: "zeeman".into(),
                    k,
                    delay_steps: 0,
                    integral_steps: 1,
                    kind: NoiseKind::White,
                }]),
                notes: vec![],
            })
        }
        _ => Err(Error::UnknownPreset {
            name: name.to_string(),
            valid: PRESET_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{k_of_tau, Style};

    fn white_spec(level: f64, seed: u64) -> NoiseSpec {
        NoiseSpec::new(NoiseKind::White, level, seed).unwrap()
    }

    fn bare_scenario(effects: Vec<EffectSpec>, n: usize) -> Scenario {
        Scenario {
            name: "test".into(),
            clock: ClockSpec {
                y_bar: 0.0,
                noise_floor: Some(FloorSpec::Noise(white_spec(1.0, 101))),
                effects,
                reference: None,
            },
            n,
            seed: 0,
            tau0: 1.0,
            expected: None,
            notes: vec![],
        }
    }

    #[test]
    fn no_effects_yields_exactly_the_floor() {
        let sc = bare_scenario(vec![], 500);
        let out = simulate(&sc).unwrap();
        let floor = generate(&white_spec(1.0, 101), 500).unwrap();
        assert_eq!(out.y_com.values(), floor.values());
        assert!(out.measured.is_empty());
    }

    #[test]
    fn noiseless_effect_is_exact() {
        let mut sc = bare_scenario(vec![EffectSpec::linear("x", 3.0, white_spec(1.0, 7))], 2000);
        sc.clock.noise_floor = None;
        let out = simulate(&sc).unwrap();
        let x = &out.measured[0].1;
        for (yv, xv) in out.y_com.values().iter().zip(x.values()) {
            assert_eq!(*yv, 3.0 * xv);
        }
        for m in [1usize, 2, 5, 10] {
            for style in [Style::Normal, Style::Overlap] {
                let k = k_of_tau(&out.y_com, x, m, style).unwrap();
                assert!((k - 3.0).abs() < 1e-12, "m={m} {style:?}: {k}");
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let sc = preset_seeded("fig3_affs", 0.01, 99).unwrap();
        let a = simulate(&sc).unwrap();
        let b = simulate(&sc).unwrap();
        assert_eq!(a.y_com.values(), b.y_com.values());
        assert_eq!(a.measured[0].1.values(), b.measured[0].1.values());
    }

    #[test]
    fn superposition_of_contributions_is_exact() {
        let e1 = EffectSpec::linear("a", 0.5, white_spec(1.0, 11));
        let e2 = EffectSpec::linear("b", -1.25, white_spec(2.0, 12));
        let joint = simulate(&bare_scenario(vec![e1.clone(), e2.clone()], 800)).unwrap();
        let base = simulate(&bare_scenario(vec![], 800)).unwrap();
        // Folding the recorded contributions onto the base record in
        // effect order replays the exact additions of the joint run.
        let mut rebuilt: Vec<f64> = base.y_com.values().to_vec();
        for eff in &joint.truth.effects {
            for (o, c) in rebuilt.iter_mut().zip(&eff.contribution) {
                *o += c;
            }
        }
        assert_eq!(rebuilt, joint.y_com.values());
        // Channel independence: each effect's measured record is the same
        // whether or not the other effect exists.
        let solo = simulate(&bare_scenario(vec![e2], 800)).unwrap();
        assert_eq!(solo.measured[0].1.values(), joint.measured[1].1.values());
    }

    #[test]
    fn duplicate_seeds_rejected_before_generation() {
        let sc = bare_scenario(
            vec![
                EffectSpec::linear("a", 1.0, white_spec(1.0, 5)),
                EffectSpec::linear("b", 1.0, white_spec(1.0, 5)),
            ],
            100,
        );
        assert!(matches!(simulate(&sc), Err(Error::Domain(_))));
    }

    #[test]
    fn asynchrony_shifts_driving_not_measured() {
        let mut effect = EffectSpec::linear("x", 1.0, white_spec(1.0, 21));
        effect = effect.with_asynchrony(AsynchronySpec::delay(4));
        let mut sc = bare_scenario(vec![effect], 3000);
        sc.clock.noise_floor = None;
        let out = simulate(&sc).unwrap();
        let x = &out.measured[0].1;
        // y[j] = padded[pad + j + 4] = measured[j + 4] while in range.
        for j in 0..x.len() - 4 {
            assert_eq!(out.y_com.values()[j], x.values()[j + 4], "j = {j}");
        }
    }

    #[test]
    fn integral_asynchrony_is_centered() {
        let mut effect = EffectSpec::linear("x", 1.0, white_spec(1.0, 22));
        effect = effect.with_asynchrony(AsynchronySpec::integral(3).unwrap());
        let mut sc = bare_scenario(vec![effect], 1000);
        sc.clock.noise_floor = None;
        let out = simulate(&sc).unwrap();
        let x = out.measured[0].1.values();
        for j in 1..999 {
            let want = (x[j - 1] + x[j] + x[j + 1]) / 3.0;
            let got = out.y_com.values()[j];
            assert!((got - want).abs() < 1e-12, "j = {j}: {got} vs {want}");
        }
    }

    #[test]
    fn measurement_noise_is_on_measured_copy_only() {
        let effect = EffectSpec::linear("x", 2.0, white_spec(1.0, 31))
            .with_measurement_noise(white_spec(1.0, 32));
        let mut sc = bare_scenario(vec![effect], 1000);
        sc.clock.noise_floor = None;
        let out = simulate(&sc).unwrap();
        let clean = generate(&white_spec(1.0, 31), 1000).unwrap();
        for (yv, cv) in out.y_com.values().iter().zip(clean.values()) {
            assert_eq!(*yv, 2.0 * cv);
        }
        // Measured copy differs from the clean realization.
        assert!(out.measured[0]
            .1
            .values()
            .iter()
            .zip(clean.values())
            .any(|(m, c)| m != c));
    }

    #[test]
    fn quadratic_response_linearization_bound() {
        let a = 2.0;
        let mean = 5.0;
        let effect = EffectSpec {
            name: "q".into(),
            response: Response::Quadratic { a, mean },
            niv: white_spec(1e-3, 41),
            asynchrony: None,
            measurement_noise: None,
        };
        let mut sc = bare_scenario(vec![effect], 5000);
        sc.clock.noise_floor = None;
        let out = simulate(&sc).unwrap();
        let k = 2.0 * a * mean;
        let x = out.measured[0].1.values();
        let max_dev = x.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let offset = a * mean * mean;
        for (j, (&yv, &xv)) in out.y_com.values().iter().zip(x).enumerate() {
            let linear = offset + k * xv;
            assert!(
                (yv - linear).abs() <= a * max_dev * max_dev + 1e-12,
                "sample {j}"
            );
        }
    }

    #[test]
    fn presets_have_documented_parameters() {
        let sc = preset("fig4_wfn", 1.0).unwrap();
        assert_eq!(sc.n, 2_000_000);
        assert_eq!(sc.clock.effects.len(), 1);
        let e = &sc.clock.effects[0];
        assert_eq!(e.k(), 1.0);
        // Effect holds 5% of total variance: floor level is sqrt(19)
        // times the variable level.
        match &sc.clock.noise_floor {
            Some(FloorSpec::Noise(f)) => {
                assert!((f.level / e.niv.level - 19f64.sqrt()).abs() < 1e-12)
            }
            other => panic!("unexpected floor {other:?}"),
        }
        let sc = preset("fig4_wfn", 0.25).unwrap();
        assert_eq!(sc.n, 500_000);

        let sc = preset("fig5_delay", 1.0).unwrap();
        let exp = &sc.expected.as_ref().unwrap()[0];
        assert_eq!((exp.delay_steps, exp.integral_steps), (10, 1));
        let sc = preset("fig5_integral", 1.0).unwrap();
        let exp = &sc.expected.as_ref().unwrap()[0];
        assert_eq!((exp.delay_steps, exp.integral_steps), (0, 10));
        let sc = preset("fig5_both", 1.0).unwrap();
        let exp = &sc.expected.as_ref().unwrap()[0];
        assert_eq!((exp.delay_steps, exp.integral_steps), (6, 8));

        let sc = preset("zeeman_demo", 1.0).unwrap();
        let exp = &sc.expected.as_ref().unwrap()[0];
        assert!((exp.k - 6.47e-14).abs() < 1e-18);

        assert!(matches!(
            preset("fig9_nope", 1.0),
            Err(Error::UnknownPreset { .. })
        ));
        assert!(preset("fig4_wfn", 0.0).is_err());
        assert!(preset("fig4_wfn", 1.5).is_err());
    }

    #[test]
    fn preset_scenarios_differ_by_master_seed() {
        let a = simulate(&preset_seeded("fig3_affs", 0.01, 1).unwrap()).unwrap();
        let b = simulate(&preset_seeded("fig3_affs", 0.01, 2).unwrap()).unwrap();
        assert_ne!(a.y_com.values()[0], b.y_com.values()[0]);
    }

    #[test]
    fn zeeman_preset_exercises_reference_subtraction() {
        let sc = preset_seeded("zeeman_demo", 0.01, 3).unwrap();
        assert!(sc.clock.reference.is_some());
        let out = simulate(&sc).unwrap();
        assert_eq!(out.y_com.len(), sc.n);
    }
}
