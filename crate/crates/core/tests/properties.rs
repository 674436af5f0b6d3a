use proptest::prelude::*;

use spinal_core::bounds::{fer_bound_awgn_new, fer_bound_bsc_new, BoundConfig, DEFAULT_EPS};
use spinal_core::channel::ChannelModel;
use spinal_core::codec::{compute_spines, Message};
use spinal_core::schedule::{counts_after, Schedule, Scheme, TransmissionPlan};
use spinal_core::CodeParams;

fn params(k: usize, segments: usize, c: u32) -> CodeParams {
    CodeParams::new(k * segments, k, c, 32, 16).unwrap()
}

fn counts(segments: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..40, segments)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Single symbols can raise the bound (see below); pairs keep the parity
    // of every Hamming distance.
    #[test]
    fn bsc_bound_shrinks_with_more_symbol_pairs(
        segments in 1usize..8,
        k in 1usize..5,
        f in 0.0f64..0.2,
        base in counts(8),
        seg in 0usize..8,
    ) {
        let p = params(k, segments, 1);
        let ch = ChannelModel::bsc(f).unwrap();
        let base = base[..segments].to_vec();
        let mut more = base.clone();
        more[seg % segments] += 2;
        let a = fer_bound_bsc_new(&BoundConfig::new(p, ch, base, DEFAULT_EPS).unwrap()).unwrap().total;
        let b = fer_bound_bsc_new(&BoundConfig::new(p, ch, more, DEFAULT_EPS).unwrap()).unwrap().total;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a * (1.0 + 1e-12) + 1e-300, "{b} > {a}");
    }

    #[test]
    fn bsc_bound_grows_with_crossover(
        segments in 1usize..8,
        k in 1usize..5,
        f in 0.0f64..0.49,
        df in 0.0f64..0.01,
        base in counts(8),
    ) {
        let p = params(k, segments, 1);
        let base = base[..segments].to_vec();
        let bound = |f| {
            let cfg = BoundConfig::new(p, ChannelModel::bsc(f).unwrap(), base.clone(), DEFAULT_EPS).unwrap();
            fer_bound_bsc_new(&cfg).unwrap().total
        };
        prop_assert!(bound(f) <= bound(f + df) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn awgn_bound_shrinks_with_more_symbols(
        segments in 1usize..8,
        k in 1usize..5,
        c in 1u32..9,
        base in counts(8),
        seg in 0usize..8,
        sigma2 in 0.0f64..1.0,
    ) {
        let p = params(k, segments, c);
        // below 2^{2c} / (2 pi e (1 + eps)) the ball/cube ratio shrinks as symbols are added
        let limit = 4f64.powi(c as i32) / (2.0 * std::f64::consts::PI * std::f64::consts::E * (1.0 + DEFAULT_EPS));
        let ch = ChannelModel::awgn((0.01 + 0.94 * sigma2) * limit).unwrap();
        let base = base[..segments].to_vec();
        let mut more = base.clone();
        more[seg % segments] += 1;
        let a = fer_bound_awgn_new(&BoundConfig::new(p, ch, base, DEFAULT_EPS).unwrap()).unwrap().total;
        let b = fer_bound_awgn_new(&BoundConfig::new(p, ch, more, DEFAULT_EPS).unwrap()).unwrap().total;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a * (1.0 + 1e-12) + 1e-300, "{b} > {a}");
    }

    #[test]
    fn awgn_bound_grows_with_noise(
        segments in 1usize..8,
        c in 1u32..9,
        log_sigma2 in -2.0f64..5.0,
        scale in 1.0f64..3.0,
        base in counts(8),
    ) {
        let p = params(4, segments, c);
        let base = base[..segments].to_vec();
        let bound = |s2| {
            let cfg = BoundConfig::new(p, ChannelModel::awgn(s2).unwrap(), base.clone(), DEFAULT_EPS).unwrap();
            fer_bound_awgn_new(&cfg).unwrap().total
        };
        let sigma2 = 10f64.powf(log_sigma2);
        prop_assert!(bound(sigma2) <= bound(sigma2 * scale) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn bounds_stay_in_range(
        segments in 1usize..10,
        k in 1usize..7,
        c in 1u32..11,
        base in prop::collection::vec(1usize..2000, 10),
        log_sigma2 in -8.0f64..12.0,
        f in 0.0f64..0.5,
    ) {
        let p = params(k, segments, c);
        let base = base[..segments].to_vec();
        let a = BoundConfig::new(p, ChannelModel::awgn(10f64.powf(log_sigma2)).unwrap(), base.clone(), DEFAULT_EPS).unwrap();
        let b = BoundConfig::new(p, ChannelModel::bsc(f).unwrap(), base, DEFAULT_EPS).unwrap();
        for r in [fer_bound_awgn_new(&a).unwrap(), fer_bound_bsc_new(&b).unwrap()] {
            prop_assert!(r.total.is_finite() && (0.0..=1.0).contains(&r.total));
            prop_assert!(r.segment_errors.iter().all(|e| (0.0..=1.0).contains(e)));
        }
    }

    #[test]
    fn spines_depend_only_on_the_prefix(
        segments in 1usize..9,
        k in 1usize..9,
        seed in any::<u64>(),
        cut in 0usize..9,
    ) {
        let p = params(k, segments, 8);
        let cut = cut % (segments + 1);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let a = Message::random(&mut rng, &p);
        let mut tail = Message::random(&mut rng, &p).segments().to_vec();
        tail[..cut].copy_from_slice(&a.segments()[..cut]);
        let b = Message::from_segments(tail, &p).unwrap();
        let (sa, sb) = (compute_spines(&a, &p), compute_spines(&b, &p));
        prop_assert_eq!(&sa.spines()[..cut], &sb.spines()[..cut]);
    }

    #[test]
    fn emissions_grow_one_symbol_at_a_time(
        segments in 1usize..9,
        scheme_idx in 0usize..4,
        snr_db in 0.0f64..30.0,
        steps in 1usize..120,
    ) {
        let p = params(4, segments, 8);
        let ch = ChannelModel::awgn_snr_db(snr_db, &p).unwrap();
        let scheme = [Scheme::PassByPass, Scheme::UniformPuncturing, Scheme::IncrementalTail, Scheme::Improved][scheme_idx];
        let schedule = Schedule::for_scheme(scheme, &p, &ch).unwrap();
        let mut em = schedule.emissions(&p);
        let mut prev = vec![0usize; segments];
        for t in 1..=steps {
            let (seg, pass) = em.next().unwrap();
            prop_assert_eq!(pass, prev[seg - 1] + 1);
            prev[seg - 1] += 1;
            prop_assert_eq!(em.counts(), prev.as_slice());
            prop_assert_eq!(counts_after(&schedule, &p, t), prev.clone());
            // the first full pass always precedes any second symbol
            if t <= segments {
                prop_assert_eq!(pass, 1);
            }
            if em.in_tail_stage() && t > segments {
                prop_assert_eq!(seg, segments);
            }
        }
    }

    #[test]
    fn plan_text_round_trips(
        segments in 1usize..12,
        counts in prop::collection::vec(0usize..50, 12),
        f in 0.001f64..0.4,
    ) {
        let p = params(2, segments, 1);
        let ch = ChannelModel::bsc(f).unwrap();
        let order: Vec<usize> = (1..=segments).rev().collect();
        let plan = TransmissionPlan::new(counts[..segments].to_vec(), order, Scheme::Optimized).unwrap();
        let (header, back) = TransmissionPlan::from_text(&plan.to_text(&p, &ch)).unwrap();
        prop_assert_eq!(back, plan);
        prop_assert_eq!(header.channel, ch.to_string());
        prop_assert_eq!((header.n, header.k, header.c), (p.n(), p.k(), p.c()));
    }
}

/// Distance ties count as errors, so going from an even to an odd number of
/// symbols in a segment can make the Hamming union bound slightly worse.
#[test]
fn bsc_bound_is_not_monotone_in_single_symbols() {
    let p = params(3, 2, 1);
    let ch = ChannelModel::bsc(0.178).unwrap();
    let bound = |c: Vec<usize>| fer_bound_bsc_new(&BoundConfig::new(p, ch, c, DEFAULT_EPS).unwrap()).unwrap().total;
    let (a, b, c) = (bound(vec![1, 7]), bound(vec![2, 7]), bound(vec![3, 7]));
    assert!(b > a, "{b} <= {a}");
    assert!(c < a, "{c} >= {a}");
}
