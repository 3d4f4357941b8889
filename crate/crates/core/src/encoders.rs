//! Nonuniform encoders: integral samples, integrate-and-fire instants, level
//! crossings, instant generators for test scenarios, and additive sample noise.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, KernelKind};
use crate::operators::SampleSequence;
use crate::quad;
use crate::signal::{grid_size, Signal, DEFAULT_GRID_OVERSAMPLE};

/// Absolute tolerance of the per-interval quadrature.
pub const QUAD_TOL: f64 = 1e-12;
/// Time resolution of bisection searches.
pub const TIME_TOL: f64 = 1e-10;

/// How a signal is turned into samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncodingSpec {
    /// Integrate-and-fire: spike whenever `int (x + bias)` reaches `threshold`.
    IntegralUniformTrigger {
        threshold: f64,
        bias: f64,
        #[serde(default)]
        leak: f64,
    },
    /// Crossings of the levels `m * spacing + offset`.
    LevelCrossing {
        spacing: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Instants given explicitly; samples are integrals over consecutive intervals.
    InstantList {
        instants: Vec<f64>,
        #[serde(default)]
        leak: f64,
    },
}

impl EncodingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EncodingSpec::IntegralUniformTrigger { threshold, bias, leak } => {
                if !(*threshold > 0.0) {
                    return Err(invalid("threshold must be positive"));
                }
                if !bias.is_finite() || !(*leak >= 0.0) {
                    return Err(invalid("bias must be finite and leak non-negative"));
                }
            }
            EncodingSpec::LevelCrossing { spacing, offset } => {
                if !(*spacing > 0.0) || !offset.is_finite() {
                    return Err(invalid("level spacing must be positive"));
                }
            }
            EncodingSpec::InstantList { instants, leak } => {
                if instants.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("instants must be strictly increasing"));
                }
                if !(*leak >= 0.0) {
                    return Err(invalid("leak must be non-negative"));
                }
            }
        }
        Ok(())
    }
}

/// Result of encoding one signal: the kernel family and its samples.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub family: KernelFamily,
    pub samples: SampleSequence,
}

/// Runs `spec` on `x`. Level crossings produce ramp-family samples (level differences).
pub fn encode(x: &Signal, spec: &EncodingSpec) -> Result<Encoded> {
    spec.validate()?;
    let period = x.period();
    match spec {
        EncodingSpec::IntegralUniformTrigger { threshold, bias, leak } => {
            let instants = fire_instants(x, *threshold, *bias)?;
            let family = KernelFamily::new(leak_kind(*leak), instants, period)?;
            let samples = integral_samples(x, &family)?;
            Ok(Encoded { family, samples })
        }
        EncodingSpec::LevelCrossing { spacing, offset } => {
            let crossings = level_crossings(x, *spacing, *offset);
            let family = KernelFamily::new(KernelKind::Ramp, crossings.iter().map(|c| c.time).collect(), period)?;
            let samples = crossing_differences(&crossings, &family)?;
            Ok(Encoded { family, samples })
        }
        EncodingSpec::InstantList { instants, leak } => {
            let family = KernelFamily::new(leak_kind(*leak), instants.clone(), period)?;
            let samples = integral_samples(x, &family)?;
            Ok(Encoded { family, samples })
        }
    }
}

fn leak_kind(leak: f64) -> KernelKind {
    if leak > 0.0 {
        KernelKind::LeakyExp { alpha: leak }
    } else {
        KernelKind::Indicator
    }
}

/// `s_k = int g_k x` by adaptive quadrature, for indicator and leaky families.
pub fn integral_samples(x: &Signal, family: &KernelFamily) -> Result<SampleSequence> {
    if x.period() != family.period() {
        return Err(Error::PeriodMismatch { left: x.period(), right: family.period() });
    }
    let alpha = match family.kind() {
        KernelKind::Indicator => 0.0,
        KernelKind::LeakyExp { alpha } => alpha,
        other => return Err(invalid(format!("{other:?} kernels do not produce integral samples"))),
    };
    let values = family
        .intervals()
        .into_iter()
        .map(|(a, b)| quad::adaptive(|t| (-alpha * (t - a)).exp() * x.eval(t), a, b, QUAD_TOL))
        .collect();
    SampleSequence::new(values, family.weights())
}

fn dense_max_abs(x: &Signal) -> f64 {
    let n = grid_size(x.period(), DEFAULT_GRID_OVERSAMPLE);
    x.to_grid(n).samples().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Integrate-and-fire spike times over one period, starting with a spike at 0.
///
/// Consecutive instants satisfy `int_{t_{j-1}}^{t_j} (x + bias) = threshold`.
/// The returned list always contains `0` and stops before `period`.
pub fn fire_instants(x: &Signal, threshold: f64, bias: f64) -> Result<Vec<f64>> {
    if !(threshold > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let peak = dense_max_abs(x);
    if !(bias > peak) {
        return Err(invalid(format!("bias {bias} does not dominate max |x| = {peak}")));
    }
    let period = x.period();
    let step = period / grid_size(period, DEFAULT_GRID_OVERSAMPLE) as f64;
    let biased = |a: f64, b: f64| x.integral(a, b) + bias * (b - a);
    let mut out = vec![0.0];
    let mut prev = 0.0;
    loop {
        let mut hi = prev + step;
        while biased(prev, hi) < threshold {
            hi += step;
        }
        let mut lo = hi - step;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if biased(prev, mid) < threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        // a spike within tolerance of the period end is the wrap of the spike at 0
        if t >= period - 1e-9 {
            break;
        }
        out.push(t);
        prev = t;
    }
    Ok(out)
}

/// Integral samples implied by the spike train: `threshold - bias * dt` on every
/// full interval, and the exact integral on the wrap-around interval.
pub fn fire_samples(x: &Signal, family: &KernelFamily, threshold: f64, bias: f64) -> Result<SampleSequence> {
    let values = family
        .intervals()
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| if k == 0 { x.integral(a, b) } else { threshold - bias * (b - a) })
        .collect();
    SampleSequence::new(values, family.weights())
}

/// One level crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub level: f64,
}

/// All crossings of `x` with the levels `m * spacing + offset` over `[0, period)`.
///
/// A crossing requires a strict sign change of `x - level`; grazing contacts are
/// ignored. Values are reported exactly at the crossed level.
pub fn level_crossings(x: &Signal, spacing: f64, offset: f64) -> Vec<Crossing> {
    let period = x.period();
    let n = grid_size(period, DEFAULT_GRID_OVERSAMPLE);
    let h = period / n as f64;
    let grid = x.to_grid(n);
    let v = grid.samples();
    let mut out = Vec::new();
    for j in 0..n {
        let (a, b) = (v[j], v[(j + 1) % n]);
        // grid point exactly on a level: a crossing if the neighbours straddle it
        let before = v[(j + n - 1) % n];
        if (a - offset) % spacing == 0.0 && (before - a) * (b - a) < 0.0 {
            out.push(Crossing { time: j as f64 * h, level: a });
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m_lo = ((lo - offset) / spacing).floor() as i64;
        let m_hi = ((hi - offset) / spacing).ceil() as i64;
        for m in m_lo..=m_hi {
            let level = m as f64 * spacing + offset;
            let (fa, fb) = (a - level, b - level);
            if !(fa < 0.0 && fb > 0.0 || fa > 0.0 && fb < 0.0) {
                continue;
            }
            let (mut ta, mut tb) = (j as f64 * h, (j + 1) as f64 * h);
            let mut ga = fa;
            while tb - ta > TIME_TOL {
                let mid = 0.5 * (ta + tb);
                let gm = x.eval(mid) - level;
                if gm == 0.0 {
                    ta = mid;
                    tb = mid;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    ta = mid;
                    ga = gm;
                } else {
                    tb = mid;
                }
            }
            let mut t = 0.5 * (ta + tb);
            if t >= period - TIME_TOL {
                t = 0.0;
            }
            out.push(Crossing { time: t, level });
        }
    }
    out.sort_by(|p, q| p.time.total_cmp(&q.time));
    out.dedup_by(|p, q| (p.time - q.time).abs() <= TIME_TOL && p.level == q.level);
    out
}

/// Ramp-family samples `x(t_k) - x(t_{k-1})` read off the crossed levels.
pub fn crossing_differences(crossings: &[Crossing], family: &KernelFamily) -> Result<SampleSequence> {
    if crossings.len() != family.len() {
        return Err(crate::error::mismatch("crossing count differs from family size"));
    }
    let n = crossings.len();
    let values = (0..n).map(|k| crossings[k].level - crossings[(k + n - 1) % n].level).collect();
    SampleSequence::new(values, family.weights())
}

/// Level spacing whose crossing count per unit time is closest to `ratio`.
pub fn tune_level_spacing(x: &Signal, ratio: f64, offset: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(invalid("target ratio must be positive"));
    }
    let peak = dense_max_abs(x);
    if peak == 0.0 {
        return Err(invalid("a zero signal has no crossings"));
    }
    let rate = |l: f64| level_crossings(x, l, offset).len() as f64 / x.period();
    // crossing rate decreases with spacing; bisect in log scale
    let (mut lo, mut hi) = (peak * 1e-4, 4.0 * peak);
    let mut best = (f64::INFINITY, hi);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        let r = rate(mid);
        let miss = (r - ratio).abs();
        if miss < best.0 {
            best = (miss, mid);
        }
        if r > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

/// Instant-generation scenarios used by the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstantScenario {
    /// i.i.d. gaps uniform on `[lo, hi]`, starting at 0.
    UniformGap { lo: f64, hi: f64 },
    /// Clusters of `count` instants spaced `intra_gap`, anchored so the mean density is `ratio`.
    Clusters { intra_gap: f64, count: usize, ratio: f64 },
    /// Fixed instants.
    Listed { instants: Vec<f64> },
}

/// Generates sampling instants in `[0, period)`, deterministic per seed.
pub fn instant_generator(scenario: &InstantScenario, seed: u64, period: f64) -> Result<Vec<f64>> {
    if !(period > 0.0) {
        return Err(invalid("period must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = period - 1e-9;
    let out = match scenario {
        InstantScenario::UniformGap { lo, hi } => {
            if !(*lo >= 0.0 && hi > lo) {
                return Err(invalid("gap range must satisfy 0 <= lo < hi"));
            }
            let mut out = vec![0.0];
            let mut t = 0.0;
            loop {
                let mut gap = rng.random_range(*lo..*hi);
                while gap < 1e-9 {
                    gap = rng.random_range(*lo..*hi);
                }
                t += gap;
                if t >= limit {
                    break;
                }
                out.push(t);
            }
            out
        }
        InstantScenario::Clusters { intra_gap, count, ratio } => {
            if *count == 0 || !(*intra_gap > 0.0) || !(*ratio > 0.0) {
                return Err(invalid("clusters need a positive count, gap and ratio"));
            }
            let span = (*count - 1) as f64 * intra_gap;
            let mean = *count as f64 / ratio;
            let (glo, ghi) = (span + intra_gap, 2.0 * mean - span - intra_gap);
            if !(ghi > glo) {
                return Err(invalid(format!(
                    "density {ratio} is infeasible for clusters of {count} spaced {intra_gap}"
                )));
            }
            let mut out = Vec::new();
            let mut anchor = 0.0;
            'outer: loop {
                for j in 0..*count {
                    let t = anchor + j as f64 * intra_gap;
                    if t >= limit {
                        break 'outer;
                    }
                    out.push(t);
                }
                anchor += rng.random_range(glo..ghi);
            }
            out
        }
        InstantScenario::Listed { instants } => {
            if instants.is_empty() {
                return Err(Error::EmptyFamily);
            }
            if instants.windows(2).any(|w| w[1] <= w[0]) || instants[instants.len() - 1] - instants[0] >= period {
                return Err(invalid("listed instants must increase and span less than a period"));
            }
            instants.clone()
        }
    };
    Ok(out)
}

/// Adds i.i.d. Gaussian noise with variance `reference_power * 10^(-snr_db / 10)`.
pub fn add_noise(s: &SampleSequence, snr_db: f64, reference_power: f64, seed: u64) -> Result<SampleSequence> {
    if snr_db == f64::INFINITY {
        return Ok(s.clone());
    }
    if !(reference_power >= 0.0) || snr_db.is_nan() {
        return Err(invalid("noise needs a non-negative reference power and a real SNR"));
    }
    let sigma = (reference_power * 10f64.powf(-snr_db / 10.0)).sqrt();
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = s.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
    s.with_values(values)
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    k: usize,
    t_prev: f64,
    t_k: f64,
    s_k: f64,
    w_k: f64,
}

/// Writes `k, t_prev, t_k, s_k, w_k` rows.
pub fn write_samples_csv(path: &Path, family: &KernelFamily, samples: &SampleSequence) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for (k, (a, b)) in family.intervals().into_iter().enumerate() {
        let row = SampleRow { k, t_prev: a, t_k: b, s_k: samples.values()[k], w_k: samples.weights()[k] };
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads a file written by [`write_samples_csv`]; returns instants and samples.
pub fn read_samples_csv(path: &Path) -> Result<(Vec<f64>, SampleSequence)> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let (mut t, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for row in r.deserialize::<SampleRow>() {
        let row = row.map_err(csv_err)?;
        t.push(row.t_k);
        v.push(row.s_k);
        w.push(row.w_k);
    }
    Ok((t, SampleSequence::new(v, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SamplingOperator;
    use crate::signal::random_bandlimited;
    use num_complex::Complex64;

    fn sine(period: f64) -> Signal {
        Signal::new(period, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.5)]).unwrap()
    }

    #[test]
    fn constant_and_zero_inputs() {
        let fam = KernelFamily::new(KernelKind::Indicator, vec![0.0, 0.7, 2.0, 5.5], 9.0).unwrap();
        let s = integral_samples(&Signal::constant(9.0, 2.5), &fam).unwrap();
        for (k, (a, b)) in fam.intervals().into_iter().enumerate() {
            assert!((s.values()[k] - 2.5 * (b - a)).abs() < 1e-12);
        }
        assert!(integral_samples(&Signal::zero(9.0), &fam).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn integral_samples_agree_with_operator() {
        let x = random_bandlimited(63.0, 1.0, 4).unwrap();
        let inst = instant_generator(&InstantScenario::UniformGap { lo: 0.3, hi: 1.0 }, 2, 63.0).unwrap();
        for kind in [KernelKind::Indicator, KernelKind::LeakyExp { alpha: 0.8 }] {
            let fam = KernelFamily::new(kind, inst.clone(), 63.0).unwrap();
            let a = integral_samples(&x, &fam).unwrap();
            let b = SamplingOperator::new(fam).unwrap().apply(&x).unwrap();
            assert!(a.sub(&b).unwrap().values().iter().all(|d| d.abs() < 1e-9));
        }
    }

    #[test]
    fn firing_on_constant_input_is_uniform() {
        let t = fire_instants(&Signal::zero(8.0), 0.25, 1.0).unwrap();
        assert_eq!(t.len(), 32);
        for (j, tj) in t.iter().enumerate() {
            assert!((tj - 0.25 * j as f64).abs() < 1e-9);
        }
        assert!(fire_instants(&Signal::constant(8.0, 2.0), 0.25, 1.0).is_err());
    }

    #[test]
    fn firing_identity_and_threshold_scaling() {
        let x = random_bandlimited(31.0, 0.5, 6).unwrap();
        let (delta, bias) = (0.3, 3.0);
        let t = fire_instants(&x, delta, bias).unwrap();
        for w in t.windows(2) {
            let q = quad::adaptive(|s| x.eval(s) + bias, w[0], w[1], 1e-13);
            assert!((q - delta).abs() < 1e-8);
        }
        let t2 = fire_instants(&x, 2.0 * delta, bias).unwrap();
        assert!((t.len() as i64 - 2 * t2.len() as i64).abs() <= 2);
        let fam = KernelFamily::new(KernelKind::Indicator, t, 31.0).unwrap();
        let a = fire_samples(&x, &fam, delta, bias).unwrap();
        let b = integral_samples(&x, &fam).unwrap();
        assert!(a.sub(&b).unwrap().values().iter().all(|d| d.abs() < 1e-8));
    }

    #[test]
    fn sine_zero_crossings() {
        let c = level_crossings(&sine(10.0), 100.0, 0.0);
        assert_eq!(c.len(), 2);
        assert!(c[0].time.abs() < 1e-9 && (c[1].time - 5.0).abs() < 1e-9);
        assert!(c.iter().all(|p| p.level == 0.0));
        assert!(level_crossings(&Signal::zero(10.0), 0.5, 0.0).is_empty());
    }

    #[test]
    fn crossings_sit_on_their_levels() {
        let x = random_bandlimited(63.0, 1.0, 11).unwrap();
        let c = level_crossings(&x, 0.4, 0.1);
        assert!(c.len() > 10);
        for p in &c {
            assert!((x.eval(p.time) - p.level).abs() < 1e-8);
            let m = (p.level - 0.1) / 0.4;
            assert!((m - m.round()).abs() < 1e-12);
        }
        assert!(c.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn spacing_tuner_hits_target_ratio() {
        let x = random_bandlimited(63.0, 1.0, 3).unwrap();
        let l = tune_level_spacing(&x, 0.77, 0.0).unwrap();
        let r = level_crossings(&x, l, 0.0).len() as f64 / 63.0;
        assert!((r - 0.77).abs() <= 1.0 / 63.0 + 1e-12, "{r}");
    }

    fn ks_uniform(gaps: &mut [f64], lo: f64, hi: f64) -> f64 {
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len() as f64;
        gaps.iter()
            .enumerate()
            .map(|(i, g)| {
                let f = ((g - lo) / (hi - lo)).clamp(0.0, 1.0);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_gap_statistics() {
        for (lo, hi, ratio) in [(0.3, 1.0, 1.0 / 0.65), (0.0, 0.5, 4.0)] {
            let period = 10_000.0 * (lo + hi) / 2.0 * 1.05;
            let t = instant_generator(&InstantScenario::UniformGap { lo, hi }, 17, period).unwrap();
            let mut gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).take(10_000).collect();
            assert_eq!(gaps.len(), 10_000);
            let d = ks_uniform(&mut gaps, lo, hi);
            assert!(d < 1.628 / 100.0, "KS {d}");
            let measured = t.len() as f64 / period;
            assert!((measured - ratio).abs() < 0.02 * ratio);
        }
        let a = instant_generator(&InstantScenario::UniformGap { lo: 0.3, hi: 1.0 }, 5, 63.0).unwrap();
        let b = instant_generator(&InstantScenario::UniformGap { lo: 0.3, hi: 1.0 }, 5, 63.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clusters_layout() {
        let sc = InstantScenario::Clusters { intra_gap: 0.25, count: 3, ratio: 2.0 };
        let t = instant_generator(&sc, 8, 3000.0).unwrap();
        for chunk in t.chunks(3).filter(|c| c.len() == 3) {
            assert!((chunk[1] - chunk[0] - 0.25).abs() < 1e-12);
            assert!((chunk[2] - chunk[1] - 0.25).abs() < 1e-12);
        }
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        let density = t.len() as f64 / 3000.0;
        assert!((density - 2.0).abs() < 0.05, "{density}");
        let bad = InstantScenario::Clusters { intra_gap: 0.6, count: 3, ratio: 2.0 };
        assert!(instant_generator(&bad, 1, 63.0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let s = SampleSequence::zeros(vec![1.0; 10_000]).unwrap();
        assert_eq!(add_noise(&s, f64::INFINITY, 1.0, 3).unwrap(), s);
        let noisy = add_noise(&s, 20.0, 4.0, 3).unwrap();
        let var = noisy.values().iter().map(|v| v * v).sum::<f64>() / 10_000.0;
        assert!((var / 0.04 - 1.0).abs() < 0.05, "{var}");
        assert_eq!(noisy, add_noise(&s, 20.0, 4.0, 3).unwrap());
    }

    #[test]
    fn samples_csv_round_trip() {
        let x = random_bandlimited(15.0, 1.0, 1).unwrap();
        let fam = KernelFamily::new(KernelKind::Indicator, vec![0.0, 1.5, 4.0, 9.0], 15.0).unwrap();
        let s = integral_samples(&x, &fam).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_samples_csv(&p, &fam, &s).unwrap();
        let (t, back) = read_samples_csv(&p).unwrap();
        assert_eq!(t, fam.instants());
        assert_eq!(back, s);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("k,t_prev,t_k,s_k,w_k"));
    }

    #[test]
    fn encode_dispatch() {
        let x = random_bandlimited(21.0, 0.5, 2).unwrap();
        let e = encode(&x, &EncodingSpec::IntegralUniformTrigger { threshold: 0.5, bias: 2.0, leak: 0.0 }).unwrap();
        assert_eq!(e.family.len(), e.samples.len());
        let e = encode(&x, &EncodingSpec::LevelCrossing { spacing: 0.2, offset: 0.05 }).unwrap();
        assert_eq!(e.family.kind(), KernelKind::Ramp);
        let op = SamplingOperator::new(e.family.clone()).unwrap();
        let direct = op.apply(&x).unwrap();
        assert!(direct.sub(&e.samples).unwrap().values().iter().all(|d| d.abs() < 1e-8));
        assert!(encode(&x, &EncodingSpec::LevelCrossing { spacing: 0.0, offset: 0.0 }).is_err());
    }
}
