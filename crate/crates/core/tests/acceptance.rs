//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always visible.
//! An optional argument selects criteria by number, e.g.
//! `cargo test --test acceptance -- 5`.

use icmodem::channel::{RandomTaps, RealizedScenario, Scenario, TapConfig, UserConfig};
use icmodem::codec::CodecConfig;
use icmodem::dsp::{db, energy, fft};
use icmodem::harness::score::truth_start;
use icmodem::harness::{run_grid, run_scenario, to_baseband, GridSpec};
use icmodem::ic::{regenerate, ReceiverConfig, RegenConfig};
use icmodem::rng::XorShift64Star;
use icmodem::rx::dcd::{dcd_complex, initial_step};
use icmodem::rx::detect::{segment_origin, sweep, PilotBank};
use icmodem::rx::estimate::{estimate_channel, EstimatorConfig};
use icmodem::rx::{EqMode, TurboConfig, TurboReceiver};
use icmodem::{Execution, ModemParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

/// One checked claim inside a criterion.
struct Check {
    pass: bool,
    /// Known to be unattainable; failing is expected, passing is reported.
    expected_fail: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check {
        pass,
        expected_fail: false,
        detail,
    }
}

fn params() -> ModemParams {
    ModemParams::default()
}

fn random_payload(g: &mut XorShift64Star) -> Vec<u8> {
    (0..CodecConfig::default().payload_bits).map(|_| (g.next() >> 63) as u8).collect()
}

fn user(id: u32, offset: f64, gain_db: f64, velocity: f64, taps: Option<RandomTaps>) -> UserConfig {
    UserConfig {
        id,
        packets_per_burst: 1,
        packet_period_s: 0.0,
        burst_offset_s: offset,
        gain_db,
        velocity_mps: velocity,
        propagation_delay_s: 0.0,
        taps: vec![],
        random_taps: taps,
    }
}

fn mild_taps() -> Option<RandomTaps> {
    Some(RandomTaps {
        count: 8,
        max_delay_s: 0.012,
        decay_s: 0.004,
    })
}

fn realize(sc: &Scenario) -> RealizedScenario {
    sc.realize(&params(), &CodecConfig::default()).expect("valid scenario")
}

fn receiver(mode: EqMode, i2: usize, i3: usize) -> ReceiverConfig {
    let mut cfg = ReceiverConfig::default();
    cfg.turbo.mode = mode;
    cfg.ic.packet_rounds = i2;
    cfg.ic.signal_rounds = i3;
    cfg
}

// 1. Loopback.

fn criterion_1() -> Vec<Check> {
    let t0 = Instant::now();
    let mut sc = Scenario {
        duration_s: 80.0,
        burst_period_s: 0.4,
        clock_skew: 0.0,
        master_seed: 1,
        noise_snr_db: None,
        impulse: None,
        users: vec![user(1, 0.1, 0.0, 0.0, None)],
    };
    sc.users[0].taps = vec![TapConfig {
        delay_s: 0.0,
        gain: 1.0,
        phase_deg: 0.0,
    }];
    let r = realize(&sc);
    let (_, s) = run_scenario(&r, &receiver(EqMode::IcRake, 1, 1)).expect("receiver runs");
    let secs = t0.elapsed().as_secs_f64();
    vec![
        check(s.total == 200, format!("{} packets", s.total)),
        check(s.lost() == 0 && s.undetected_errors == 0, format!("FER {:.4}", s.fer())),
        check(secs < 120.0, format!("{secs:.1} s")),
    ]
}

// 2. Channel estimator and DCD against direct solutions.

fn complex_gaussian(g: &mut XorShift64Star, sigma: f64) -> Complex64 {
    // Box-Muller keeps the oracle independent of the crate's noise generator.
    let u1 = g.unit().max(1e-300);
    let u2 = g.unit();
    let r = (-2.0 * u1.ln()).sqrt() * sigma / std::f64::consts::SQRT_2;
    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

fn criterion_2() -> Vec<Check> {
    let n = 1024;
    let len = 600;
    let lead = 212;
    let snr_db = 20.0;
    let mut exact = 0;
    let mut nmse_sum = 0.0;
    let trials = 100;
    for trial in 0..trials {
        let mut g = XorShift64Star::new(9000 + trial);
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        for v in &mut s[lead..lead + len] {
            let pv = if g.next() >> 63 == 0 { 1.0 } else { -1.0 };
            let dv = if g.next() >> 63 == 0 { 1.0 } else { -1.0 };
            *v = Complex64::new(pv, dv);
        }
        let mut delays: Vec<i64> = Vec::new();
        while delays.len() < 5 {
            let d = g.below(121) as i64 - 20;
            if delays.iter().all(|&e| (e - d).abs() >= 2) {
                delays.push(d);
            }
        }
        let amps: Vec<Complex64> = delays
            .iter()
            .map(|_| Complex64::from_polar(0.3 + 0.7 * g.unit(), 2.0 * std::f64::consts::PI * g.unit()))
            .collect();
        let mut truth = vec![Complex64::new(0.0, 0.0); n];
        for (&d, &a) in delays.iter().zip(&amps) {
            truth[d.rem_euclid(n as i64) as usize] = a;
        }
        let h_energy: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let sigma = (2.0 * h_energy / 10f64.powf(snr_db / 10.0)).sqrt();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for (&d, &a) in delays.iter().zip(&amps) {
                z[(i as i64 + d).rem_euclid(n as i64) as usize] += a * s[i];
            }
        }
        z.iter_mut().for_each(|v| *v += complex_gaussian(&mut g, sigma));
        let est = estimate_channel(&fft(&z), &fft(&s), None, &EstimatorConfig::default()).expect("estimate");
        let mut ranked: Vec<(usize, f64)> = est.support.iter().zip(&est.amps).map(|(&m, a)| (m, a.norm())).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut top: Vec<usize> = ranked.iter().take(5).map(|r| r.0).collect();
        let mut want: Vec<usize> = delays.iter().map(|d| d.rem_euclid(n as i64) as usize).collect();
        top.sort_unstable();
        want.sort_unstable();
        if top == want {
            exact += 1;
        }
        let h = est.impulse_response();
        let err: f64 = h.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum();
        nmse_sum += err / h_energy;
    }
    let nmse_db = db(nmse_sum / trials as f64);

    let mut worst = 0.0f64;
    for sys in 0..1000u64 {
        let mut g = XorShift64Star::new(50_000 + sys);
        let m = 1 + g.below(30) as usize;
        let a = DMatrix::from_fn(m, m, |_, _| Complex64::new(g.unit() - 0.5, g.unit() - 0.5));
        let gm = &a * a.adjoint() + DMatrix::identity(m, m) * Complex64::new(0.1 * m as f64, 0.0);
        let xi: Vec<Complex64> = (0..m).map(|_| Complex64::new(2.0 * g.unit() - 1.0, 2.0 * g.unit() - 1.0)).collect();
        let direct = gm.clone().lu().solve(&DVector::from_column_slice(&xi)).expect("non-singular");
        let flat: Vec<Complex64> = gm.transpose().as_slice().to_vec();
        let diag = (0..m).map(|i| gm[(i, i)].re).fold(f64::INFINITY, f64::min);
        let h0 = 2.0 * initial_step(&xi, diag);
        let (c, _) = dcd_complex(&flat, &xi, h0, 24, 1_000_000);
        let err: f64 = c.iter().zip(direct.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(err / direct.norm());
    }
    vec![
        check(exact >= 95, format!("exact support {exact}/{trials}")),
        check(nmse_db <= -20.0, format!("NMSE {nmse_db:.1} dB")),
        check(worst < 1e-3, format!("DCD worst rel. error {worst:.1e} over 1000 systems")),
    ]
}

// 3. Equalizer ordering.

fn ten_tap_channel() -> icmodem::channel::ChannelRealization {
    use icmodem::channel::{ChannelRealization, Tap};
    let delays_ms = [0.0, 0.4, 0.9, 1.7, 2.6, 3.8, 5.1, 6.9, 8.8, 11.0];
    let mut g = XorShift64Star::new(42);
    let mut taps: Vec<Tap> = delays_ms
        .iter()
        .map(|&d: &f64| {
            let ph = 2.0 * std::f64::consts::PI * g.unit();
            Tap::new(d * 1e-3, Complex64::from_polar((-d / 4.0).exp(), ph))
        })
        .collect();
    let e: f64 = taps.iter().map(|t| t.amplitude.norm_sqr()).sum();
    taps.iter_mut().for_each(|t| t.amplitude /= e.sqrt());
    ChannelRealization::with_velocity(taps, 0.0)
}

fn criterion_3() -> Vec<Check> {
    use icmodem::channel::{apply_channel, gaussian_noise, noise_variance};
    use icmodem::rx::demod::demodulate;
    use icmodem::tx::Transmitter;
    let p = params();
    let tx = Transmitter::new(p.clone(), CodecConfig::default()).expect("tx");
    let ch = ten_tap_channel();
    let packets = 200u64;
    let segments: Vec<(Vec<f64>, Vec<Complex64>)> = (0..packets)
        .map(|k| {
            let mut g = XorShift64Star::new(1000 + k);
            let frame = tx.build_frame(&random_payload(&mut g), 1).expect("frame");
            let y = apply_channel(&tx.modulate(&frame), &ch, &p).expect("channel");
            let pad = 2 * p.packet_lead() * p.decimation();
            let mut sig = vec![0.0; pad];
            sig.extend(&y);
            sig.extend(vec![0.0; pad + 4096]);
            let sigma = noise_variance(tx.reference_power(), 15.0, &p).sqrt();
            let noise = gaussian_noise(sig.len(), sigma, 7 + k);
            sig.iter_mut().zip(noise).for_each(|(s, v)| *s += v);
            (frame.data(), demodulate(&sig, &p).samples[..p.segment_len()].to_vec())
        })
        .collect();
    let mut ber = BTreeMap::new();
    for mode in EqMode::ALL {
        let rx = TurboReceiver::new(
            tx.clone(),
            TurboConfig {
                mode,
                iterations: 3,
                early_stop: false,
                ..TurboConfig::default()
            },
        );
        let mut errors = 0usize;
        let mut bits = 0usize;
        for (data, seg) in &segments {
            let out = rx.process(seg, 1, 1.0).expect("turbo");
            errors += out.symbols.iter().zip(data).filter(|(y, d)| (y.im > 0.0) != (**d > 0.0)).count();
            bits += data.len();
        }
        ber.insert(mode.to_string(), errors as f64 / bits as f64);
    }
    let (r, l, i) = (ber["rake"], ber["linear"], ber["ic-rake"]);
    let gap = |worse: f64, better: f64| (worse - better) / worse;
    let fer = collisions();
    let mut checks = vec![
        check(
            i < l && l < r && gap(l, i) >= 0.2 && gap(r, l) >= 0.2,
            format!("uncoded BER ic-rake {i:.4} < linear {l:.4} < rake {r:.4}"),
        ),
    ];
    for i2 in [1, 2] {
        let (fi, fl, fr) = (fer.all_fer(EqMode::IcRake, i2), fer.all_fer(EqMode::Linear, i2), fer.all_fer(EqMode::Rake, i2));
        checks.push(check(
            fi <= fl && fl <= fr,
            format!("collision FER at I2={i2}: ic-rake {fi:.3} <= linear {fl:.3} <= rake {fr:.3}"),
        ));
    }
    checks
}

// 4. Detection accuracy.

fn criterion_4() -> Vec<Check> {
    let p = params();
    let fc = p.carrier_hz;
    let mut total = 0usize;
    let mut good = 0usize;
    let mut detected = 0usize;
    let mut worst_t = 0.0f64;
    let mut worst_f = 0.0f64;
    for seed in 0..6u64 {
        let mut g = XorShift64Star::new(400 + seed);
        let mut users: Vec<UserConfig> = (1..=3)
            .map(|id| user(id, 0.15 + 0.4 * (id - 1) as f64, 0.0, 1.8 * g.unit() - 0.9, None))
            .collect();
        for u in &mut users {
            u.propagation_delay_s = 0.02 * g.unit();
        }
        let sc = Scenario {
            duration_s: 14.0,
            burst_period_s: 1.2,
            clock_skew: 0.0,
            master_seed: seed,
            noise_snr_db: Some(10.0),
            impulse: None,
            users,
        };
        let r = realize(&sc);
        let cfg = ReceiverConfig::default();
        let rb = to_baseband(&r, &p, &cfg).expect("demodulate");
        let bank = PilotBank::new(&cfg.users, &p).expect("pilots");
        let dets = sweep(&rb, &bank, &cfg.detector, &p, cfg.execution);
        for t in &r.transmissions {
            total += 1;
            let ts = truth_start(&r.ground_truth()[t.index], &p);
            let a1 = r.entries[t.entry].channel.a1;
            let near = dets
                .iter()
                .filter(|d| d.user == t.user && (d.start as f64 - ts).abs() <= p.n_symbols as f64)
                .min_by(|a, b| (a.start as f64 - ts).abs().total_cmp(&(b.start as f64 - ts).abs()));
            if let Some(d) = near {
                detected += 1;
                let terr = (d.start as f64 - ts).abs() / 2.0;
                let ferr = (d.a1_init - a1).abs() * fc;
                worst_t = worst_t.max(terr);
                worst_f = worst_f.max(ferr);
                if terr <= 1.0 && ferr <= p.doppler_step() / 2.0 {
                    good += 1;
                }
            }
        }
    }
    let rate = detected as f64 / total as f64;
    let accurate = good as f64 / total as f64;

    let r = realize(&Scenario::default_three_user(80.0, 11));
    let (out, _) = run_scenario(&r, &receiver(EqMode::IcRake, 1, 1)).expect("receiver runs");
    let segs = out.segments_per_round[0];
    let packets = r.transmissions.len();
    vec![
        check(rate >= 0.99, format!("detected {detected}/{total}")),
        check(
            accurate >= 0.99,
            format!("within 1 symbol and 5 Hz: {good}/{total} (worst {worst_t:.1} sym, {worst_f:.2} Hz)"),
        ),
        check(
            segs <= 2 * packets,
            format!("{segs} segments for {packets} packets on the default scenario"),
        ),
    ]
}

// 5. Packet-IC resolution of two-user collisions.

struct CollisionResults {
    /// (mode, I2) -> (weak received, weak total, all received, all total)
    cells: BTreeMap<(String, usize), (usize, usize, usize, usize)>,
}

impl CollisionResults {
    fn weak_fer(&self, mode: EqMode, i2: usize) -> f64 {
        let c = self.cells[&(mode.to_string(), i2)];
        1.0 - c.0 as f64 / c.1 as f64
    }

    fn all_fer(&self, mode: EqMode, i2: usize) -> f64 {
        let c = self.cells[&(mode.to_string(), i2)];
        1.0 - c.2 as f64 / c.3 as f64
    }

    fn weak_total(&self) -> usize {
        self.cells.values().next().map_or(0, |c| c.1)
    }
}

/// Strong user 1 and weak user 2 starting `shift_s` later, one pair per second.
fn collision_scenario(seed: u64, gap_db: f64, shift_s: f64, pairs: usize) -> Scenario {
    Scenario {
        duration_s: pairs as f64 + 0.1,
        burst_period_s: 1.0,
        clock_skew: 0.0,
        master_seed: seed,
        noise_snr_db: Some(30.0),
        impulse: None,
        users: vec![
            user(1, 0.3, 0.0, 0.1, mild_taps()),
            user(2, 0.3 + shift_s, -gap_db, -0.15, mild_taps()),
        ],
    }
}

fn collisions() -> &'static CollisionResults {
    static CELLS: OnceLock<CollisionResults> = OnceLock::new();
    CELLS.get_or_init(|| {
        let shift = 0.2 * params().packet_duration();
        let mut cells = BTreeMap::new();
        for seed in 0..10 {
            let r = realize(&collision_scenario(500 + seed, 6.0, shift, 10));
            for mode in EqMode::ALL {
                for i2 in [1, 2] {
                    let (_, s) = run_scenario(&r, &receiver(mode, i2, 1)).expect("receiver runs");
                    let w = s.per_user.iter().find(|u| u.user == 2).expect("weak user");
                    let c = cells.entry((mode.to_string(), i2)).or_insert((0, 0, 0, 0));
                    c.0 += w.received;
                    c.1 += w.total;
                    c.2 += s.received;
                    c.3 += s.total;
                }
            }
        }
        CollisionResults { cells }
    })
}

fn criterion_5() -> Vec<Check> {
    let c = collisions();
    let f1 = c.weak_fer(EqMode::IcRake, 1);
    let f2 = c.weak_fer(EqMode::IcRake, 2);
    vec![
        check(c.weak_total() == 100, format!("{} collisions", c.weak_total())),
        check(f1 >= 0.9, format!("weak FER {f1:.2} at I2=1")),
        check(f2 <= 0.05, format!("weak FER {f2:.2} at I2=2")),
    ]
}

// 6. Signal-IC detection recovery and grid monotonicity.

fn criterion_6() -> Vec<Check> {
    let p = params();
    let mut masked = 0usize;
    let mut recovered = 0usize;
    let mut trials = 0usize;
    for seed in 0..10u64 {
        let r = realize(&collision_scenario(600 + seed, 15.0, 0.5 * p.packet_duration(), 10));
        let cfg = ReceiverConfig::default();
        let rb = to_baseband(&r, &p, &cfg).expect("demodulate");
        let bank = PilotBank::new(&cfg.users, &p).expect("pilots");
        let dets = sweep(&rb, &bank, &cfg.detector, &p, cfg.execution);
        let truth = r.ground_truth();
        for t in truth.iter().filter(|t| t.user == 2) {
            trials += 1;
            let ts = truth_start(t, &p);
            if !dets.iter().any(|d| d.user == 2 && (d.start as f64 - ts).abs() <= p.n_symbols as f64) {
                masked += 1;
            }
        }
        let (_, s) = run_scenario(&r, &receiver(EqMode::IcRake, 1, 2)).expect("receiver runs");
        recovered += s.per_user.iter().find(|u| u.user == 2).map_or(0, |u| u.received);
    }

    let spec = GridSpec {
        i2_max: 3,
        i3_max: 3,
        modes: vec![EqMode::IcRake],
    };
    let mut monotone = true;
    let mut summary = Vec::new();
    for seed in 1..=3u64 {
        let r = realize(&Scenario::default_three_user(48.0, seed));
        let g = run_grid(&r, &ReceiverConfig::default(), &spec).expect("grid runs");
        let fer = |i2, i3| g.cell(EqMode::IcRake, i2, i3).expect("cell").score.fer();
        for i2 in 1..=3 {
            for i3 in 1..=3 {
                if (i2 < 3 && fer(i2 + 1, i3) > fer(i2, i3)) || (i3 < 3 && fer(i2, i3 + 1) > fer(i2, i3)) {
                    monotone = false;
                }
            }
        }
        summary.push(format!(
            "seed {seed}: {:.1}% -> {:.1}% -> {:.1}%",
            100.0 * fer(1, 1),
            100.0 * fer(2, 1),
            100.0 * fer(2, 2)
        ));
    }
    vec![
        check(masked * 10 >= trials * 9, format!("masked at I3=1 {masked}/{trials}")),
        check(recovered * 10 >= trials * 9, format!("decoded at I3=2 {recovered}/{trials}")),
        check(monotone, format!("grid monotone ({})", summary.join("; "))),
    ]
}

// 7. Scenario fidelity.

fn criterion_7() -> Vec<Check> {
    let p = params();
    let sc = Scenario::default_three_user(1200.0, 1);
    let r = realize(&sc);
    let u = r.utilization();
    let d = realize(&sc.doubled(0.2));
    let ud = d.utilization();
    vec![
        check((u - 0.11).abs() <= 0.005, format!("utilization {:.2}%", 100.0 * u)),
        check((ud - 0.23).abs() <= 0.01, format!("doubled {:.2}%", 100.0 * ud)),
        check(
            (sc.nominal_utilization(&p) - u).abs() < 1e-3,
            format!("nominal {:.2}%", 100.0 * sc.nominal_utilization(&p)),
        ),
        Check {
            pass: r.transmissions.len() == 2100,
            // Three bursts of three 0.1 s packets every 8 s give 1350 packets in
            // 20 min; 2100 packets would need 17.5 % utilization.
            expected_fail: true,
            detail: format!("{} packets in 20 min (2100 wanted)", r.transmissions.len()),
        },
    ]
}

// 8. Regeneration fidelity.

fn criterion_8() -> Vec<Check> {
    let p = params();
    let cfg = ReceiverConfig::default();
    let bank = PilotBank::new(&cfg.users, &p).expect("pilots");
    let mut residuals = Vec::new();
    let mut transmitted = 0;
    for seed in 0..4u64 {
        let mut g = XorShift64Star::new(800 + seed);
        let sc = Scenario {
            duration_s: 12.6,
            burst_period_s: 0.5,
            clock_skew: 0.0,
            master_seed: 800 + seed,
            noise_snr_db: Some(15.0),
            impulse: None,
            users: vec![user(1 + seed as u32 % 3, 0.1, 0.0, 1.2 * g.unit() - 0.6, mild_taps())],
        };
        let r = realize(&sc);
        transmitted += r.transmissions.len();
        let mut clean_sc = r.clone();
        clean_sc.noise_sigma = None;
        let rb = to_baseband(&r, &p, &cfg).expect("demodulate");
        let clean = to_baseband(&clean_sc, &p, &cfg).expect("demodulate");
        let turbo = TurboReceiver::new(r.tx.clone(), cfg.turbo.clone());
        for d in sweep(&rb, &bank, &cfg.detector, &p, Execution::Parallel) {
            let out = turbo.process(&d.segment, d.user, d.a1_init).expect("turbo");
            let correct = out.crc_ok
                && r.ground_truth().iter().any(|t| {
                    t.user == d.user && t.payload == out.payload && (truth_start(t, &p) - d.start as f64).abs() <= p.n_symbols as f64
                });
            if !correct {
                continue;
            }
            let regen = regenerate(&d.segment, &out.payload, d.user, d.start, out.a1, &r.tx, &RegenConfig::default())
                .expect("regeneration");
            let (target, _) = clean.extract(segment_origin(d.start, &p), p.segment_len());
            let err: Vec<Complex64> = target.iter().zip(&regen.r_hat).map(|(a, b)| a - b).collect();
            residuals.push(db(energy(&err) / energy(&target)));
        }
    }
    residuals.sort_by(f64::total_cmp);
    let median = residuals.get(residuals.len() / 2).copied().unwrap_or(f64::INFINITY);
    vec![
        check(transmitted == 100, format!("{transmitted} packets, {} decoded", residuals.len())),
        check(median < -15.0, format!("median residual {median:.1} dB")),
    ]
}

// 9. Determinism.

fn criterion_9() -> Vec<Check> {
    let r = realize(&Scenario::default_three_user(24.0, 9));
    let spec = GridSpec {
        i2_max: 2,
        i3_max: 2,
        modes: vec![EqMode::Rake, EqMode::IcRake],
    };
    let a = run_grid(&r, &ReceiverConfig::default(), &spec).expect("grid runs");
    let r2 = realize(&Scenario::default_three_user(24.0, 9));
    let b = run_grid(&r2, &ReceiverConfig::default(), &spec).expect("grid runs");
    let seq_cfg = ReceiverConfig {
        execution: Execution::Sequential,
        ..ReceiverConfig::default()
    };
    let c = run_grid(&r, &seq_cfg, &spec).expect("grid runs");
    vec![
        check(a.to_csv() == b.to_csv() && a.to_table() == b.to_table(), "repeated run identical".into()),
        check(a.to_csv() == c.to_csv(), "sequential matches parallel".into()),
    ]
}

type Criterion = (u32, &'static str, fn() -> Vec<Check>);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "loopback zero FER", criterion_1),
        (2, "channel estimator oracle", criterion_2),
        (3, "equalizer ordering", criterion_3),
        (4, "detection accuracy", criterion_4),
        (5, "packet-IC resolution", criterion_5),
        (6, "signal-IC recovery", criterion_6),
        (7, "scenario fidelity", criterion_7),
        (8, "regeneration fidelity", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in &criteria {
            println!("criterion_{id}: test  # {name}");
        }
        return;
    }
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let checks = run();
        let hard_fail = checks.iter().any(|c| !c.pass && !c.expected_fail);
        let xfail = checks.iter().any(|c| !c.pass && c.expected_fail);
        let xpass = checks.iter().any(|c| c.pass && c.expected_fail);
        let status = if hard_fail {
            "FAIL"
        } else if xfail {
            "FAIL (expected)"
        } else if xpass {
            "PASS (unexpected)"
        } else {
            "PASS"
        };
        if hard_fail || xpass {
            unexpected += 1;
        }
        let details: Vec<String> = checks
            .iter()
            .map(|c| format!("{}{}", if c.pass { "" } else { "[x] " }, c.detail))
            .collect();
        println!(
            "criterion {id} {name}: {status} [{:.0} s] {}",
            t0.elapsed().as_secs_f64(),
            details.join("; ")
        );
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
