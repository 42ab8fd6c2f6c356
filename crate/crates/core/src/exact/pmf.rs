use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Probability mass over `t = 0..=t_max` with explicit truncated tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    mass: Vec<f64>,
    tail: f64,
}

impl Pmf {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(mass: Vec<f64>, tail: f64) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidConfig("a pmf needs at least one entry".into()));
        }
        if let Some((t, v)) = mass.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            return Err(Error::OutOfRange(format!("negative or NaN mass {v} at t={t}")));
        }
        if tail.is_nan() || tail < 0.0 {
            return Err(Error::OutOfRange(format!("negative or NaN tail {tail}")));
        }
        let pmf = Pmf { mass, tail };
        let total = pmf.sum() + tail;
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::OutOfRange(format!("mass plus tail sums to {total}")));
        }
        Ok(pmf)
    }

    /// Builds a pmf whose tail is whatever the truncated mass leaves over.
    pub(crate) fn with_residual_tail(mass: Vec<f64>) -> Result<Self> {
        let s: f64 = mass.iter().sum();
        Self::new(mass, (1.0 - s).max(0.0))
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn at(&self, t: usize) -> f64 {
        self.mass.get(t).copied().unwrap_or(0.0)
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn t_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn cdf(&self, t: usize) -> f64 {
        self.mass.iter().take(t + 1).sum()
    }

    /// Mean with the tail mass placed at `t_max + 1`, a lower bound that is
    /// exact up to `O(tail)` for light tails.
    pub fn mean(&self) -> f64 {
        let body: f64 = self.mass.iter().enumerate().map(|(t, m)| t as f64 * m).sum();
        body + self.tail * (self.t_max() + 1) as f64
    }

    /// Variance under the same tail placement as [`Pmf::mean`].
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let body: f64 = self
            .mass
            .iter()
            .enumerate()
            .map(|(t, m)| (t as f64 - mean).powi(2) * m)
            .sum();
        body + self.tail * ((self.t_max() + 1) as f64 - mean).powi(2)
    }

    /// Total variation distance, treating each tail as one extra atom.
    pub fn total_variation(&self, other: &Pmf) -> f64 {
        let len = self.mass.len().max(other.mass.len());
        let body: f64 = (0..len).map(|t| (self.at(t) - other.at(t)).abs()).sum();
        0.5 * (body + (self.tail - other.tail).abs())
    }

    /// CSV form: `t,mass` header, one row per `t`, then `# tail=<value>`.
    /// Floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.mass.len() * 28 + 32);
        out.push_str("t,mass\n");
        for (t, m) in self.mass.iter().enumerate() {
            let _ = writeln!(out, "{t},{m:.16e}");
        }
        let _ = writeln!(out, "# tail={:.16e}", self.tail);
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("t,mass") {
            return Err(Error::Parse("missing `t,mass` header".into()));
        }
        let mut mass = Vec::new();
        let mut tail = None;
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# tail=") {
                tail = Some(parse_f64(rest)?);
                continue;
            }
            let (t, m) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
            let t: usize = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in {line:?}")))?;
            if t != mass.len() {
                return Err(Error::Parse(format!("expected t={}, found t={t}", mass.len())));
            }
            mass.push(parse_f64(m)?);
        }
        let tail = tail.ok_or_else(|| Error::Parse("missing `# tail=` line".into()))?;
        Pmf::new(mass, tail)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad float {s:?}")))
}
