use std::io::{BufRead, Write};

use rand::distributions::{Distribution, Uniform};

use super::{NetsimError, ShapingModel};
use crate::rng::{stream, stream_rng};

pub const TRACE_CSV_HEADER: &str = "t,capacity_kbps";

/// Capacity C_t of the bottleneck, one sample per 1 s step.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthTrace {
    samples: Vec<f64>,
    seed: u64,
    cap_min: f64,
    cap_max: f64,
    hold: usize,
}

impl BandwidthTrace {
    /// Wraps an explicit series. Bounds are taken from the samples.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self, NetsimError> {
        if samples.is_empty() {
            return Err(NetsimError::EmptyTrace);
        }
        if let Some(bad) = samples.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(NetsimError::InvalidBounds { cap_min: *bad, cap_max: *bad });
        }
        let cap_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let cap_max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { samples, seed: 0, cap_min, cap_max, hold: 1 })
    }

    pub fn constant(capacity: f64, length: usize) -> Result<Self, NetsimError> {
        Self::from_samples(vec![capacity; length])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.cap_min, self.cap_max)
    }

    pub fn hold(&self) -> usize {
        self.hold
    }
}

/// Piecewise-constant capacity: a uniform draw in `[cap_min, cap_max]` held
/// for `hold` steps, repeated until `length` samples exist.
pub fn generate_trace(
    seed: u64,
    length: usize,
    cap_min: f64,
    cap_max: f64,
    hold: usize,
) -> Result<BandwidthTrace, NetsimError> {
    if !(cap_min.is_finite() && cap_max.is_finite() && 0.0 <= cap_min && cap_min <= cap_max) {
        return Err(NetsimError::InvalidBounds { cap_min, cap_max });
    }
    if length == 0 {
        return Err(NetsimError::EmptyTrace);
    }
    if hold == 0 {
        return Err(NetsimError::ZeroHold);
    }
    let mut rng = stream_rng(seed, stream::TRACE);
    let dist = Uniform::new_inclusive(cap_min, cap_max);
    let mut samples = Vec::with_capacity(length);
    while samples.len() < length {
        let c = dist.sample(&mut rng);
        let n = hold.min(length - samples.len());
        samples.extend(std::iter::repeat_n(c, n));
    }
    Ok(BandwidthTrace { samples, seed, cap_min, cap_max, hold })
}

/// Throughput the link delivers with no shaping applied: `C_t·η − ε` per
/// step, from the probe noise stream of `noise_seed`.
pub fn unshaped_throughput(trace: &BandwidthTrace, model: &ShapingModel, noise_seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(noise_seed, stream::PROBE_NOISE);
    trace.samples().iter().map(|&c| model.probe(c, &mut rng)).collect()
}

pub fn write_trace_csv(w: &mut impl Write, trace: &BandwidthTrace) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for (t, c) in trace.samples().iter().enumerate() {
        writeln!(w, "{t},{c}")?;
    }
    Ok(())
}

pub fn read_trace_csv(r: impl BufRead) -> Result<BandwidthTrace, NetsimError> {
    let mut samples = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if i == 0 {
            if line.trim() != TRACE_CSV_HEADER {
                return Err(NetsimError::Csv { line: 1, message: format!("expected header '{TRACE_CSV_HEADER}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: &str| NetsimError::Csv { line: line_no, message: m.to_string() };
        let (t, c) = line.split_once(',').ok_or_else(|| err("expected two columns"))?;
        let t: usize = t.trim().parse().map_err(|_| err("bad step index"))?;
        if t != samples.len() {
            return Err(err("step indices must be consecutive from 0"));
        }
        samples.push(c.trim().parse::<f64>().map_err(|_| err("bad capacity"))?);
    }
    BandwidthTrace::from_samples(samples)
}
