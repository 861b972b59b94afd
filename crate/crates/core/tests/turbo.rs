use icmodem::channel::{apply_channel, ChannelRealization, Tap};
use icmodem::codec::CodecConfig;
use icmodem::rng::XorShift64Star;
use icmodem::rx::demod::demodulate;
use icmodem::rx::{EqMode, TurboConfig, TurboReceiver};
use icmodem::tx::Transmitter;
use icmodem::ModemParams;
use num_complex::Complex64;

fn payload(seed: u64) -> Vec<u8> {
    let mut g = XorShift64Star::new(seed);
    (0..176).map(|_| (g.next() >> 63) as u8).collect()
}

/// Baseband segment of one packet through `ch` with optional noise, packet centred.
fn segment(tx: &Transmitter, user: u32, pl: &[u8], ch: &ChannelRealization, snr_db: Option<f64>, seed: u64) -> Vec<Complex64> {
    let p = tx.params();
    let pkt = tx.modulate(&tx.build_frame(pl, user).unwrap());
    let y = apply_channel(&pkt, ch, p).unwrap();
    let pad = 2 * p.packet_lead() * p.decimation();
    let mut sig = vec![0.0; pad];
    let core = pad..pad + y.len();
    sig.extend(&y);
    sig.extend(vec![0.0; pad + 4096]);
    if let Some(snr) = snr_db {
        let ref_power = tx.reference_power();
        let sigma = icmodem::channel::noise_variance(ref_power, snr, p).sqrt();
        let n = icmodem::channel::gaussian_noise(sig.len(), sigma, seed);
        sig.iter_mut().zip(n).for_each(|(s, v)| *s += v);
    }
    let _ = core;
    demodulate(&sig, p).samples[..p.segment_len()].to_vec()
}

#[test]
fn clean_loopback_decodes_in_every_mode() {
    let p = ModemParams::default();
    let tx = Transmitter::new(p.clone(), CodecConfig::default()).unwrap();
    for mode in EqMode::ALL {
        let rx = TurboReceiver::new(
            tx.clone(),
            TurboConfig {
                mode,
                early_stop: false,
                iterations: 3,
                ..TurboConfig::default()
            },
        );
        for seed in 0..3 {
            let pl = payload(seed);
            let seg = segment(&tx, 2, &pl, &ChannelRealization::identity(), None, 0);
            let out = rx.process(&seg, 2, 1.0).unwrap();
            assert!(out.crc_ok, "{mode} seed {seed}: {:?}", out.diags);
            assert_eq!(out.payload, pl);
            assert!(out.snr_mrc_db > 20.0, "{:?}", out.diags);
        }
    }
}

#[test]
fn multipath_doppler_noise_decodes() {
    let p = ModemParams::default();
    let tx = Transmitter::new(p.clone(), CodecConfig::default()).unwrap();
    let rx = TurboReceiver::new(tx.clone(), TurboConfig::default());
    let taps = vec![
        Tap::new(0.0, Complex64::new(0.8, 0.1)),
        Tap::new(0.7e-3, Complex64::new(-0.3, 0.35)),
        Tap::new(2.9e-3, Complex64::new(0.1, -0.25)),
        Tap::new(9.1e-3, Complex64::new(0.15, 0.1)),
    ];
    let ch = ChannelRealization::with_velocity(taps, 0.4);
    let mut ok = 0;
    for seed in 0..10 {
        let pl = payload(100 + seed);
        let seg = segment(&tx, 1, &pl, &ch, Some(15.0), seed);
        // Coarse Doppler as the detector would report it (nearest 10 Hz bin).
        let out = rx.process(&seg, 1, 1.0 + 10.0 / 32_000.0).unwrap();
        if out.crc_ok && out.payload == pl {
            ok += 1;
        }
        println!("{:?}", out.diags.iter().map(|d| (d.snr_mrc_db as i32, d.crc_ok, d.a1)).collect::<Vec<_>>());
    }
    assert!(ok >= 9, "{ok}");
}
