//! Distributional checks on the hash, symbol generator and channel noise.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinal_core::channel::ChannelModel;
use spinal_core::codec::{compute_spines, generate_symbols, map_to_channel, Message};
use spinal_core::CodeParams;

/// Upper 1e-6 quantile of chi-square with `df` degrees of freedom
/// (Wilson-Hilferty).
fn chi2_critical(df: f64) -> f64 {
    let z = 4.753_424_308_822_899;
    let h = 2.0 / (9.0 * df);
    df * (1.0 - h + z * h.sqrt()).powi(3)
}

#[test]
fn symbols_are_uniform_over_the_grid() {
    let p = CodeParams::new(32, 4, 8, 32, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hist = [0u64; 256];
    let mut sum = 0.0;
    let spines = 20_000;
    let per = 50;
    for _ in 0..spines {
        for raw in generate_symbols(rng.random(), per, &p) {
            hist[raw as usize] += 1;
            sum += map_to_channel(raw, &p).unwrap();
        }
    }
    let total = (spines * per) as f64;
    let expected = total / 256.0;
    let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < chi2_critical(255.0), "chi2 {chi2}");
    let mean = sum / total;
    assert!((mean - 127.5).abs() < 0.5, "mean {mean}");
}

#[test]
fn every_symbol_position_is_uniform() {
    // bits at each position within a 64-bit word should be fair
    let p = CodeParams::new(8, 4, 1, 32, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ones = [0u64; 128];
    let draws = 20_000;
    for _ in 0..draws {
        for (j, raw) in generate_symbols(rng.random(), 128, &p).into_iter().enumerate() {
            ones[j] += raw as u64;
        }
    }
    let sd = (draws as f64 * 0.25).sqrt();
    for (j, &o) in ones.iter().enumerate() {
        let z = (o as f64 - draws as f64 / 2.0) / sd;
        assert!(z.abs() < 5.5, "position {j}: z = {z}");
    }
}

#[test]
fn awgn_noise_has_the_configured_moments() {
    let sigma2 = 37.5;
    let ch = ChannelModel::awgn(sigma2).unwrap().with_seed(99);
    let mut samples = Vec::new();
    for trial in 0..200u64 {
        for segment in 1..=10 {
            for pass in 1..=50 {
                samples.push(ch.transmit_symbol(trial, segment, pass, 100.0).unwrap() - 100.0);
            }
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 5.0 * (sigma2 / n).sqrt(), "mean {mean}");
    assert!((var - sigma2).abs() < 5.0 * sigma2 * (2.0 / n).sqrt(), "var {var}");
    let kurt = samples.iter().map(|z| (z - mean).powi(4)).sum::<f64>() / n / (var * var);
    assert!((kurt - 3.0).abs() < 0.1, "kurtosis {kurt}");
}

#[test]
fn bsc_flip_rate_matches_crossover() {
    let f = 0.07;
    let ch = ChannelModel::bsc(f).unwrap().with_seed(5);
    let mut flips = 0u64;
    let mut n = 0u64;
    for trial in 0..100u64 {
        for segment in 1..=20 {
            for pass in 1..=50 {
                let x = ((trial + segment as u64 + pass as u64) % 2) as f64;
                flips += (ch.transmit_symbol(trial, segment, pass, x).unwrap() != x) as u64;
                n += 1;
            }
        }
    }
    let rate = flips as f64 / n as f64;
    assert!((rate - f).abs() < 5.0 * (f * (1.0 - f) / n as f64).sqrt(), "rate {rate}");
}

#[test]
fn noise_is_a_function_of_the_symbol_index() {
    let ch = ChannelModel::awgn(4.0).unwrap().with_seed(3);
    let a = ch.transmit_symbol(7, 2, 5, 10.0).unwrap();
    assert_eq!(a, ch.transmit_symbol(7, 2, 5, 10.0).unwrap());
    assert_ne!(a, ch.transmit_symbol(7, 2, 6, 10.0).unwrap());
    assert_ne!(a, ch.transmit_symbol(8, 2, 5, 10.0).unwrap());
    assert_ne!(a, ch.with_seed(4).transmit_symbol(7, 2, 5, 10.0).unwrap());
}

#[test]
fn final_spines_rarely_collide() {
    let p = CodeParams::new(32, 4, 8, 32, 16).unwrap();
    let messages = 100_000u64;
    let mut seen = HashSet::new();
    let mut collisions = 0;
    for value in 0..messages {
        let msg = Message::from_value(value * 2_654_435_761 % (1 << 32), &p).unwrap();
        if !seen.insert(*compute_spines(&msg, &p).spines().last().unwrap()) {
            collisions += 1;
        }
    }
    // birthday estimate m^2 / 2^{v+1} is about 1.2
    let expected = (messages as f64).powi(2) / 2f64.powi(33);
    assert!((collisions as f64) < expected + 6.0 * expected.sqrt() + 3.0, "{collisions} collisions");
}
