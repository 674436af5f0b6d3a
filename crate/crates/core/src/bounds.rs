//! Frame-error-rate upper bounds for ML decoding of spinal codes.
//!
//! Four bounds are provided, all sharing the outer form
//! `P_e <= 1 - prod_i (1 - eps_i)` over the `n / k` segments:
//!
//! * [`fer_bound_awgn_original`]: Gallager-exponent kernel, uniform passes.
//! * [`fer_bound_bsc_original`]: random-coding-union kernel, uniform passes.
//! * [`fer_bound_awgn_new`]: ball-to-cube volume ratio, arbitrary per-segment counts.
//! * [`fer_bound_bsc_new`]: exact Hamming-distance union kernel, arbitrary counts.
//!
//! Everything is evaluated in the log domain until the final clamps, and the
//! outer product is formed as `exp(sum ln(1 - eps_i))`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelKind, ChannelModel};
use crate::quadrature::{self, Tolerance};
use crate::special::{ln_add_exp, ln_binomial, ln_binomial_pmf, ln_one_minus_exp, log2_gamma};
use crate::{CodeParams, Error, Result};

/// Default Chernoff slack on the correct codeword's noise energy.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Inputs of the per-segment bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub params: CodeParams,
    pub channel: ChannelModel,
    /// Symbols received per segment, `l_1 .. l_{n/k}`.
    pub counts: Vec<usize>,
    /// Chernoff slack (AWGN only).
    pub eps: f64,
}

impl BoundConfig {
    pub fn new(params: CodeParams, channel: ChannelModel, counts: Vec<usize>, eps: f64) -> Result<Self> {
        if counts.len() != params.segments() {
            return Err(Error::PlanMismatch {
                expected: params.segments(),
                actual: counts.len(),
            });
        }
        if counts.iter().any(|&l| l == 0) {
            return Err(Error::InvalidParams("every segment needs at least one symbol".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            params,
            channel,
            counts,
            eps,
        })
    }

    /// `L` passes for every segment.
    pub fn uniform(params: CodeParams, channel: ChannelModel, passes: usize, eps: f64) -> Result<Self> {
        Self::new(params, channel, vec![passes; params.segments()], eps)
    }

    /// `N_i = sum_{j >= i} l_j` for every segment.
    pub fn suffix_totals(&self) -> Vec<u64> {
        suffix_totals(&self.counts)
    }
}

pub(crate) fn suffix_totals(counts: &[usize]) -> Vec<u64> {
    let mut out = vec![0u64; counts.len()];
    let mut acc = 0u64;
    for (i, &l) in counts.iter().enumerate().rev() {
        acc += l as u64;
        out[i] = acc;
    }
    out
}

/// Per-segment error terms and the resulting frame-error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// `eps_i`, each clamped to `[0, 1]`.
    pub segment_errors: Vec<f64>,
    /// `1 - prod (1 - eps_i)`.
    pub total: f64,
    /// log2 of each segment's union term before any clamp to 1. Strictly
    /// informative even where `eps_i` saturates; the plan optimizer uses it
    /// to rank candidates whose clamped bounds tie.
    pub log2_union: Vec<f64>,
}

impl BoundResult {
    fn from_terms(terms: Vec<(f64, f64)>) -> Self {
        let (segment_errors, log2_union): (Vec<f64>, Vec<f64>) =
            terms.into_iter().map(|(e, u)| (e.clamp(0.0, 1.0), u)).unzip();
        let ln_survival: f64 = segment_errors.iter().map(|&e| (-e).ln_1p()).sum();
        let total = (-ln_survival.exp_m1()).clamp(0.0, 1.0);
        Self {
            segment_errors,
            total,
            log2_union,
        }
    }

    /// Sum of the unclamped per-segment log2 union terms.
    pub fn union_score(&self) -> f64 {
        self.log2_union.iter().sum()
    }
}

/// Which bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Gallager-exponent bound for AWGN (uniform passes).
    AwgnExponent,
    /// Random-coding-union bound for the BSC (uniform passes).
    BscExponent,
    /// Ball/cube bound for AWGN.
    AwgnBall,
    /// Hamming union bound for the BSC.
    BscUnion,
}

impl BoundKind {
    /// The channel this bound applies to.
    pub fn is_awgn(&self) -> bool {
        matches!(self, Self::AwgnExponent | Self::AwgnBall)
    }

    /// The exponent bound (`tight == false`) or the tighter per-segment
    /// bound matching `channel`.
    pub fn for_channel(channel: &ChannelModel, tight: bool) -> Self {
        match (channel.is_awgn(), tight) {
            (true, false) => Self::AwgnExponent,
            (true, true) => Self::AwgnBall,
            (false, false) => Self::BscExponent,
            (false, true) => Self::BscUnion,
        }
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "awgn-exponent" => Ok(Self::AwgnExponent),
            "bsc-exponent" => Ok(Self::BscExponent),
            "awgn-ball" => Ok(Self::AwgnBall),
            "bsc-union" => Ok(Self::BscUnion),
            other => Err(Error::Parse(format!("unknown bound '{other}'"))),
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::AwgnExponent => "awgn-exponent",
            Self::BscExponent => "bsc-exponent",
            Self::AwgnBall => "awgn-ball",
            Self::BscUnion => "bsc-union",
        };
        f.write_str(name)
    }
}

fn awgn_sigma2(ch: &ChannelModel) -> Result<f64> {
    match ch.kind {
        ChannelKind::Awgn { sigma2 } => Ok(sigma2),
        ChannelKind::Bsc { .. } => Err(Error::KindMismatch("bound needs an AWGN channel".into())),
    }
}

fn bsc_crossover(ch: &ChannelModel) -> Result<f64> {
    match ch.kind {
        ChannelKind::Bsc { f } => Ok(f),
        ChannelKind::Awgn { .. } => Err(Error::KindMismatch("bound needs a BSC".into())),
    }
}

/// Gallager's `E_0` at `rho = 1` for the uniform input distribution over the
/// grid `{0, .., 2^c - 1}` on an AWGN channel, in bits.
///
/// The integral over `y` is taken on `[-8 sigma, 2^c - 1 + 8 sigma]` by
/// adaptive Gauss-Kronrod with absolute/relative tolerances `1e-9 / 1e-6`.
pub fn gallager_e0(sigma2: f64, params: &CodeParams) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidChannel(format!("sigma2 must be positive, got {sigma2}")));
    }
    let levels = params.symbol_levels() as usize;
    let top = (levels - 1) as f64;
    let sigma = sigma2.sqrt();
    let weight = 1.0 / levels as f64;
    let reach = 40.0 * sigma;
    let norm = 1.0 / (2.0 * PI * sigma2).sqrt();
    let integrand = |y: f64| {
        let lo = (y - reach).ceil().max(0.0) as usize;
        let hi = (y + reach).floor().min(top);
        if hi < 0.0 || lo > hi as usize {
            return 0.0;
        }
        let inner: f64 = (lo..=hi as usize)
            .map(|x| {
                let d = y - x as f64;
                (-d * d / (4.0 * sigma2)).exp()
            })
            .sum::<f64>()
            * weight;
        inner * inner * norm
    };
    let a = -8.0 * sigma;
    let b = top + 8.0 * sigma;
    let panels = (((b - a) / sigma).ceil() as usize).clamp(8, 50_000);
    let integral = quadrature::integrate(integrand, a, b, panels, Tolerance::default())?;
    Ok((-integral.log2()).max(0.0))
}

/// Gallager-variant bound: `eps_i = 2^{-T_i (E_0 - log2(U_i) / T_i)}` with
/// `T_i = L (n/k - i + 1)` and `U_i = 2^{k (n/k - i + 1)}`.
pub fn fer_bound_awgn_original(params: &CodeParams, channel: &ChannelModel, passes: usize) -> Result<BoundResult> {
    let sigma2 = awgn_sigma2(channel)?;
    let e0 = gallager_e0(sigma2, params)?;
    Ok(awgn_original_from_e0(params, e0, passes))
}

/// [`fer_bound_awgn_original`] with a precomputed `E_0`.
pub fn awgn_original_from_e0(params: &CodeParams, e0: f64, passes: usize) -> BoundResult {
    let s = params.segments();
    let terms = (1..=s)
        .map(|i| {
            let depth = (s - i + 1) as f64;
            let t = passes as f64 * depth;
            let log2_u = params.k() as f64 * depth;
            let log2_union = log2_u - t * e0;
            (2f64.powf(log2_union.min(0.0)), log2_union)
        })
        .collect();
    BoundResult::from_terms(terms)
}

/// `sum_{a=0}^{N} P(Bin(N, f) = a) * min(1, M * P(Bin(N, 1/2) <= a))` with
/// `log2 M = log2_mult`. Returns the value and log2 of the unclamped
/// `M * E[P(Bin(N, 1/2) <= a)]`.
fn hamming_union_kernel(total: u64, f: f64, log2_mult: f64) -> (f64, f64) {
    let ln_mult = log2_mult * LN_2;
    let ln_half_pow = -(total as f64) * LN_2;
    let mut ln_cdf = f64::NEG_INFINITY;
    let mut value = 0.0;
    let mut ln_union = f64::NEG_INFINITY;
    for a in 0..=total {
        ln_cdf = ln_add_exp(ln_cdf, ln_binomial(total, a));
        let ln_pmf = ln_binomial_pmf(total, a, f);
        if ln_pmf == f64::NEG_INFINITY {
            continue;
        }
        let ln_r = ln_mult + ln_cdf + ln_half_pow;
        value += (ln_pmf + ln_r.min(0.0)).exp();
        ln_union = ln_add_exp(ln_union, ln_pmf + ln_r);
    }
    (value, ln_union / LN_2)
}

/// Random-coding-union bound with `T_i = L (n/k - i + 1)` and multiplier `U_i - 1`.
pub fn fer_bound_bsc_original(params: &CodeParams, channel: &ChannelModel, passes: usize) -> Result<BoundResult> {
    let f = bsc_crossover(channel)?;
    let s = params.segments();
    let terms = (1..=s)
        .map(|i| {
            let depth = s - i + 1;
            let t = (passes * depth) as u64;
            let log2_u = (params.k() * depth) as f64;
            // log2(U - 1) = log2 U + log2(1 - 2^-log2 U)
            let log2_mult = log2_u + ln_one_minus_exp(-log2_u * LN_2) / LN_2;
            hamming_union_kernel(t, f, log2_mult)
        })
        .collect();
    Ok(BoundResult::from_terms(terms))
}

/// `log2 R_i` where `R_i` is the ratio between the volume of an `N_i`-ball of
/// radius `sqrt((1 + eps) sigma2 N_i)` and the volume of the cube with side
/// `2^c`:
///
/// `log2 R_i = -log2 Gamma(1 + N_i / 2) + (N_i / 2) log2(pi (1 + eps) sigma2 N_i / 2^{2c})`.
pub fn ball_cube_log_ratio(ni: u64, sigma2: f64, eps: f64, c: u32) -> f64 {
    let half = ni as f64 / 2.0;
    let log2_base = PI.log2() + eps.ln_1p() / LN_2 + sigma2.log2() + (ni as f64).log2() - 2.0 * c as f64;
    half * log2_base - log2_gamma(1.0 + half)
}

/// log2 of the number of wrong messages that first diverge at segment `i`,
/// `(2^k - 1) 2^{n - ik}`.
fn log2_wrong_count(params: &CodeParams, i: usize) -> f64 {
    let k = params.k() as f64;
    (2f64.powf(k) - 1.0).log2() + (params.n() - i * params.k()) as f64
}

/// Ball/cube bound for AWGN:
/// `eps_i = min{1, (2^k - 1) 2^{n - ik} min(1, R_i)}`.
pub fn fer_bound_awgn_new(cfg: &BoundConfig) -> Result<BoundResult> {
    let sigma2 = awgn_sigma2(&cfg.channel)?;
    let params = &cfg.params;
    let terms = cfg
        .suffix_totals()
        .into_iter()
        .enumerate()
        .map(|(idx, ni)| {
            let log2_r = ball_cube_log_ratio(ni, sigma2, cfg.eps, params.c());
            let log2_count = log2_wrong_count(params, idx + 1);
            let clamped = log2_count + log2_r.min(0.0);
            (2f64.powf(clamped.min(0.0)), log2_count + log2_r)
        })
        .collect();
    Ok(BoundResult::from_terms(terms))
}

/// Hamming union bound for the BSC:
/// `eps_i = sum_a C(N_i, a) f^a (1-f)^{N_i - a} min(1, R_{i,a})` with
/// `R_{i,a} = (2^k - 1) 2^{n - ik} sum_{t <= a} C(N_i, t) 2^{-N_i}`.
pub fn fer_bound_bsc_new(cfg: &BoundConfig) -> Result<BoundResult> {
    let f = bsc_crossover(&cfg.channel)?;
    let params = &cfg.params;
    let terms = cfg
        .suffix_totals()
        .into_iter()
        .enumerate()
        .map(|(idx, ni)| hamming_union_kernel(ni, f, log2_wrong_count(params, idx + 1)))
        .collect();
    Ok(BoundResult::from_terms(terms))
}

/// The per-segment bound matching the channel kind.
pub fn fer_bound_new(cfg: &BoundConfig) -> Result<BoundResult> {
    if cfg.channel.is_awgn() {
        fer_bound_awgn_new(cfg)
    } else {
        fer_bound_bsc_new(cfg)
    }
}

/// Evaluates `kind` for `passes` uniform passes.
pub fn evaluate(kind: BoundKind, params: &CodeParams, channel: &ChannelModel, passes: usize, eps: f64) -> Result<BoundResult> {
    match kind {
        BoundKind::AwgnExponent => fer_bound_awgn_original(params, channel, passes),
        BoundKind::BscExponent => fer_bound_bsc_original(params, channel, passes),
        BoundKind::AwgnBall => fer_bound_awgn_new(&BoundConfig::uniform(*params, *channel, passes, eps)?),
        BoundKind::BscUnion => fer_bound_bsc_new(&BoundConfig::uniform(*params, *channel, passes, eps)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, k: usize, c: u32) -> CodeParams {
        CodeParams::new(n, k, c, 32, 16).unwrap()
    }

    /// Closed form of the `E_0` integral: the product of two Gaussians
    /// integrates to `sqrt(2 pi sigma2) exp(-(a - b)^2 / (8 sigma2))`.
    fn e0_closed_form(sigma2: f64, c: u32) -> f64 {
        let m = 1u64 << c;
        let w = 1.0 / m as f64;
        let mut total = 0.0;
        for a in 0..m {
            for b in 0..m {
                let d = a as f64 - b as f64;
                total += w * w * (-d * d / (8.0 * sigma2)).exp();
            }
        }
        -total.log2()
    }

    #[test]
    fn e0_matches_closed_form() {
        for &(c, sigma2) in &[(1u32, 1.0), (2, 0.3), (4, 5.0), (8, 1370.0), (8, 4.0), (8, 0.05)] {
            let got = gallager_e0(sigma2, &p(8, 2, c)).unwrap();
            let want = e0_closed_form(sigma2, c);
            assert!((got - want).abs() <= 1e-6 * want.max(1e-3), "c={c} s2={sigma2}: {got} vs {want}");
        }
    }

    #[test]
    fn e0_vanishes_for_huge_noise() {
        let e = gallager_e0(1e9, &p(8, 2, 1)).unwrap();
        assert!((0.0..1e-6).contains(&e), "{e}");
    }

    #[test]
    fn e0_decreases_with_noise() {
        let params = p(8, 2, 4);
        let values: Vec<f64> = [0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0]
            .iter()
            .map(|&s| gallager_e0(s, &params).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[0] > w[1]), "{values:?}");
    }

    #[test]
    fn original_awgn_saturates_when_e0_is_zero() {
        let r = awgn_original_from_e0(&p(8, 2, 8), 0.0, 8);
        assert!(r.log2_union.iter().all(|&u| u >= 0.0));
        assert_eq!(r.total, 1.0);
    }

    #[test]
    fn original_awgn_single_segment() {
        let params = p(4, 4, 8);
        let e0 = 0.9;
        let r = awgn_original_from_e0(&params, e0, 6);
        let want = 2f64.powf(-6.0 * (e0 - 4.0 / 6.0));
        assert!((r.total - want).abs() < 1e-15);
    }

    #[test]
    fn original_bsc_noiseless() {
        let params = p(8, 2, 1);
        let ch = ChannelModel::bsc(0.0).unwrap();
        let r = fer_bound_bsc_original(&params, &ch, 3).unwrap();
        for (idx, &e) in r.segment_errors.iter().enumerate() {
            let depth = 4 - idx;
            let t = 3 * depth as i32;
            let u = 2f64.powi(2 * depth as i32);
            let want = ((u - 1.0) * 2f64.powi(-t)).min(1.0);
            assert!((e - want).abs() < 1e-12 * want.max(1e-300), "segment {}", idx + 1);
        }
    }

    #[test]
    fn original_bsc_useless_channel() {
        let ch = ChannelModel::bsc(0.5).unwrap();
        let r = fer_bound_bsc_original(&p(8, 2, 1), &ch, 200).unwrap();
        assert!(r.total > 0.999, "{}", r.total);
    }

    #[test]
    fn ratio_fixed_point() {
        let c = 8;
        let eps = 1e-3;
        let sigma2 = 2f64.powi(2 * c as i32) / (PI * (1.0 + eps) * 2.0);
        assert!(ball_cube_log_ratio(2, sigma2, eps, c).abs() < 1e-12);
    }

    #[test]
    fn ratio_vanishes_with_noise() {
        assert!(ball_cube_log_ratio(8, 1e-300, 1e-3, 8) < -1000.0);
        assert_eq!(ball_cube_log_ratio(8, 0.0, 1e-3, 8), f64::NEG_INFINITY);
    }

    #[test]
    fn last_segment_multiplier() {
        let params = p(8, 2, 8);
        assert_eq!(log2_wrong_count(&params, 4), 3f64.log2());
        assert_eq!(log2_wrong_count(&params, 1), 3f64.log2() + 6.0);
    }

    #[test]
    fn new_awgn_saturates_for_huge_noise() {
        let params = p(8, 2, 8);
        let cfg = BoundConfig::uniform(params, ChannelModel::awgn(1e12).unwrap(), 8, DEFAULT_EPS).unwrap();
        let r = fer_bound_awgn_new(&cfg).unwrap();
        assert_eq!(r.total, 1.0);
        assert!(r.segment_errors.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn new_bsc_noiseless_closed_form() {
        let params = p(8, 2, 1);
        let cfg = BoundConfig::new(params, ChannelModel::bsc(0.0).unwrap(), vec![2, 3, 1, 4], DEFAULT_EPS).unwrap();
        let r = fer_bound_bsc_new(&cfg).unwrap();
        let totals = [10, 8, 5, 4];
        for i in 1..=4 {
            let want = (3.0 * 2f64.powi(8 - 2 * i as i32) * 2f64.powi(-totals[i - 1])).min(1.0);
            assert!((r.segment_errors[i - 1] - want).abs() < 1e-12 * want, "segment {i}");
        }
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let params = p(8, 2, 8);
        let bsc = ChannelModel::bsc(0.1).unwrap();
        let cfg = BoundConfig::uniform(params, bsc, 2, DEFAULT_EPS).unwrap();
        assert!(matches!(fer_bound_awgn_new(&cfg), Err(Error::KindMismatch(_))));
        assert!(matches!(fer_bound_awgn_original(&params, &bsc, 2), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn config_validation() {
        let params = p(8, 2, 8);
        let ch = ChannelModel::awgn(1.0).unwrap();
        assert!(BoundConfig::new(params, ch, vec![1, 1, 1], DEFAULT_EPS).is_err());
        assert!(BoundConfig::new(params, ch, vec![1, 0, 1, 1], DEFAULT_EPS).is_err());
        assert!(BoundConfig::new(params, ch, vec![1; 4], 0.0).is_err());
        assert_eq!(BoundConfig::new(params, ch, vec![1, 2, 3, 4], 0.1).unwrap().suffix_totals(), vec![10, 9, 7, 4]);
    }

    #[test]
    fn bound_kind_round_trip() {
        for kind in [BoundKind::AwgnExponent, BoundKind::BscExponent, BoundKind::AwgnBall, BoundKind::BscUnion] {
            assert_eq!(kind.to_string().parse::<BoundKind>().unwrap(), kind);
        }
        assert!("awgn-cube".parse::<BoundKind>().is_err());
    }
}
