//! Time-multiplexed encoding: lattice site `(x, y)` arrives at
//! `t = x·Δt_x + y·Δt_y`, and each step transmits the photon with a fixed
//! probability.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::PlaneState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBinConfig {
    /// Delay per x step, seconds.
    pub dt_x: f64,
    /// Delay per y step, seconds.
    pub dt_y: f64,
    pub pulse_width: f64,
    /// Time between input pulses; the encoded chain must fit inside it.
    pub rep_period: f64,
    pub per_step_transmission: f64,
}

impl Default for TimeBinConfig {
    /// 90 ps pulses at 110 kHz, 1 ns and 100 ns delays, 50 % transmission.
    fn default() -> Self {
        Self { dt_x: 1e-9, dt_y: 100e-9, pulse_width: 90e-12, rep_period: 1.0 / 110e3, per_step_transmission: 0.5 }
    }
}

impl TimeBinConfig {
    pub fn new(dt_x: f64, dt_y: f64, pulse_width: f64, rep_period: f64, per_step_transmission: f64) -> Result<Self> {
        let cfg = Self { dt_x, dt_y, pulse_width, rep_period, per_step_transmission };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if ![self.dt_x, self.dt_y, self.pulse_width, self.rep_period, self.per_step_transmission]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("time-bin settings must be finite");
        }
        if !(self.dt_x > 0.0 && self.dt_y > self.dt_x) {
            return bad("need dt_y > dt_x > 0");
        }
        if !(self.pulse_width > 0.0 && self.pulse_width < self.dt_x) {
            return bad("need 0 < pulse_width < dt_x");
        }
        if !(self.rep_period > 0.0) {
            return bad("rep_period must be positive");
        }
        if !(self.per_step_transmission > 0.0 && self.per_step_transmission <= 1.0) {
            return bad("per_step_transmission must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn arrival_time(&self, x: i64, y: i64) -> f64 {
        x as f64 * self.dt_x + y as f64 * self.dt_y
    }

    /// Nearest lattice site to arrival time `t`, assuming `|x|` stays below
    /// `dt_y / (2 dt_x)`.
    pub fn site_of(&self, t: f64) -> (i64, i64) {
        let y = (t / self.dt_y).round();
        let x = ((t - y * self.dt_y) / self.dt_x).round();
        (x as i64, y as i64)
    }

    /// Detected fraction after `steps` steps.
    pub fn transmission(&self, steps: usize) -> f64 {
        self.per_step_transmission.powi(steps as i32)
    }
}

/// Coin of the y walk, resolved by a polarising detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoinLabel {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrivalBin {
    pub time: f64,
    pub coin: CoinLabel,
    pub probability: f64,
    pub site: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalHistogram {
    /// Sorted by arrival time, then coin.
    pub bins: Vec<ArrivalBin>,
    pub steps: usize,
    /// `per_step_transmission ^ steps`.
    pub transmission: f64,
}

impl ArrivalHistogram {
    pub fn detected_probability(&self) -> f64 {
        self.bins.iter().map(|b| b.probability).sum()
    }
}

/// Lattice probabilities `(P_H, P_V)` keyed by site.
pub type SiteProbabilities = BTreeMap<(i64, i64), [f64; 2]>;

fn check_collisions(cfg: &TimeBinConfig, rx: i64, ry: i64) -> Result<()> {
    let span = cfg.arrival_time(rx, ry) - cfg.arrival_time(-rx, -ry);
    if span >= cfg.rep_period {
        return Err(Error::AmbiguousBinning(format!(
            "pulse chain spans {span:e} s, longer than the repetition period {:e} s",
            cfg.rep_period
        )));
    }
    // Neighbouring rows are separated by at least dt_y − 2·rx·dt_x.
    let row_gap = cfg.dt_y - 2.0 * rx as f64 * cfg.dt_x;
    if ry == 0 || row_gap > cfg.pulse_width {
        return Ok(());
    }
    let mut times: Vec<(f64, i64, i64)> = Vec::new();
    for x in -rx..=rx {
        for y in -ry..=ry {
            times.push((cfg.arrival_time(x, y), x, y));
        }
    }
    times.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in times.windows(2) {
        if w[1].0 - w[0].0 < cfg.pulse_width {
            return Err(Error::AmbiguousBinning(format!(
                "sites ({}, {}) and ({}, {}) arrive within one pulse width",
                w[0].1, w[0].2, w[1].1, w[1].2
            )));
        }
    }
    Ok(())
}

/// Arrival-time histogram of a 2D state after `state.steps()` lossy steps.
/// Every site of the stored box gets one bin per coin value.
pub fn to_time_bins(state: &PlaneState, cfg: &TimeBinConfig) -> Result<ArrivalHistogram> {
    cfg.validate()?;
    let (rx, ry) = state.radii();
    check_collisions(cfg, rx, ry)?;
    let steps = state.steps();
    let transmission = cfg.transmission(steps);
    let mut bins = Vec::new();
    for p in state.distribution() {
        let y = p.y.unwrap_or(0);
        let time = cfg.arrival_time(p.x, y);
        for (coin, prob) in [(CoinLabel::H, p.p_h), (CoinLabel::V, p.p_v)] {
            bins.push(ArrivalBin { time, coin, probability: prob * transmission, site: (p.x, y) });
        }
    }
    bins.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.coin.cmp(&b.coin)));
    Ok(ArrivalHistogram { bins, steps, transmission })
}

/// Lattice probabilities recovered from arrival times, with the loss factor
/// divided out. Each bin's decoded site must agree with its label and no
/// site may be reported twice for the same coin.
pub fn from_time_bins(hist: &ArrivalHistogram, cfg: &TimeBinConfig) -> Result<SiteProbabilities> {
    cfg.validate()?;
    if !(hist.transmission > 0.0) {
        return Err(Error::InvalidArgument("histogram transmission must be positive".into()));
    }
    let mut out = SiteProbabilities::new();
    let mut seen = std::collections::BTreeSet::new();
    for bin in &hist.bins {
        let site = cfg.site_of(bin.time);
        let residual = (bin.time - cfg.arrival_time(site.0, site.1)).abs();
        if residual >= 0.5 * cfg.pulse_width || site != bin.site {
            return Err(Error::AmbiguousBinning(format!(
                "arrival time {:e} s does not decode to site {:?}",
                bin.time, bin.site
            )));
        }
        if !seen.insert((site, bin.coin)) {
            return Err(Error::AmbiguousBinning(format!("site {site:?} appears twice")));
        }
        let entry = out.entry(site).or_insert([0.0; 2]);
        entry[bin.coin as usize] = bin.probability / hist.transmission;
    }
    Ok(out)
}

/// Detector clicks from `shots` single photons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotCounts {
    /// Aligned with the histogram's bins.
    pub counts: Vec<u64>,
    /// Photons lost before detection.
    pub lost: u64,
    pub shots: u64,
    pub seed: u64,
}

/// Samples detection events from the histogram with a seeded generator; the
/// same seed gives the same counts.
pub fn sample_shots(hist: &ArrivalHistogram, shots: u64, seed: u64) -> ShotCounts {
    let mut cumulative = Vec::with_capacity(hist.bins.len());
    let mut acc = 0.0;
    for b in &hist.bins {
        acc += b.probability;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; hist.bins.len()];
    let mut lost = 0;
    for _ in 0..shots {
        let u: f64 = rng.random();
        match cumulative.partition_point(|&c| c <= u) {
            i if i < counts.len() => counts[i] += 1,
            _ => lost += 1,
        }
    }
    ShotCounts { counts, lost, shots, seed }
}
