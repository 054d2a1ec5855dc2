use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Magic bytes opening a binary trace file.
pub const TRACE_MAGIC: [u8; 4] = *b"FLTR";
/// Binary layout version written by this crate.
pub const TRACE_FORMAT_VERSION: u32 = 1;
/// Header length of the binary layout in bytes.
pub const TRACE_HEADER_LEN: usize = 32;

/// Generator seed and processing history of a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTag {
    pub seed: Option<u64>,
    pub lineage: Vec<String>,
}

/// A sampled photocurrent fluctuation record.
///
/// Samples are fluctuations about `mean_flux`, both in photons per sample; a
/// coherent beam has per-sample variance equal to `mean_flux`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    sample_rate: f64,
    mean_flux: f64,
    samples: Vec<f64>,
    pub seed_tag: SeedTag,
}

impl Trace {
    pub fn new(samples: Vec<f64>, sample_rate: f64, mean_flux: f64) -> Result<Self> {
        ensure(
            samples.len() >= 2 && samples.len().is_power_of_two(),
            "samples",
            || format!("length must be a power of two >= 2, got {}", samples.len()),
        )?;
        ensure(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample_rate",
            || format!("must be > 0, got {sample_rate}"),
        )?;
        ensure(
            mean_flux.is_finite() && mean_flux > 0.0,
            "mean_flux",
            || format!("must be > 0, got {mean_flux}"),
        )?;
        Ok(Trace {
            sample_rate,
            mean_flux,
            samples,
            seed_tag: SeedTag::default(),
        })
    }

    pub(crate) fn derived(
        &self,
        samples: Vec<f64>,
        mean_flux: f64,
        seed: Option<u64>,
        step: String,
    ) -> Trace {
        let mut seed_tag = self.seed_tag.clone();
        if seed.is_some() {
            seed_tag.seed = seed;
        }
        seed_tag.lineage.push(step);
        Trace {
            sample_rate: self.sample_rate,
            mean_flux,
            samples,
            seed_tag,
        }
    }

    pub fn with_seed(mut self, seed: u64, step: impl Into<String>) -> Self {
        self.seed_tag.seed = Some(seed);
        self.seed_tag.lineage.push(step.into());
        self
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn mean_flux(&self) -> f64 {
        self.mean_flux
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.len() as f64
    }

    /// Per-sample variance in units of this trace's shot noise.
    pub fn variance_snu(&self) -> f64 {
        self.variance() / self.mean_flux
    }

    pub fn check_compatible(&self, other: &Trace) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::IncompatibleTraces(format!(
                "lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::IncompatibleTraces(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        Ok(())
    }

    /// Photocurrent difference `self − other`. Its mean flux is the total of
    /// both beams, which is the shot-noise level of the difference.
    pub fn difference(&self, other: &Trace) -> Result<Trace> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        let mut out = self.derived(
            samples,
            self.mean_flux + other.mean_flux,
            None,
            "difference".into(),
        );
        out.seed_tag
            .lineage
            .extend(other.seed_tag.lineage.iter().map(|s| format!("minus:{s}")));
        Ok(out)
    }

    /// Circular shift by `k` samples (positive delays the record).
    pub fn shifted(&self, k: isize) -> Trace {
        let n = self.len() as isize;
        let samples = (0..n)
            .map(|i| self.samples[((i - k).rem_euclid(n)) as usize])
            .collect();
        self.derived(samples, self.mean_flux, None, format!("shift({k})"))
    }

    /// CSV with header `sample_index,flux_photons`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        writeln!(w, "sample_index,flux_photons")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{v:e}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, sample_rate: f64, mean_flux: f64) -> Result<Trace> {
        let origin = Path::new("<csv>");
        let reader = BufReader::new(input);
        let mut samples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if !line.starts_with("sample_index") {
                    return Err(format_error(origin, "missing header row"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let value = line.split(',').nth(1).ok_or_else(|| {
                format_error(origin, format!("line {}: expected two columns", lineno + 1))
            })?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|e| format_error(origin, format!("line {}: {e}", lineno + 1)))?;
            samples.push(v);
        }
        Trace::new(samples, sample_rate, mean_flux)
    }

    /// Little-endian binary layout: magic `FLTR`, version `u32`, sample rate
    /// `f64`, mean flux `f64`, count `u64`, then `count` samples as `f64`.
    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        w.write_all(&TRACE_MAGIC)?;
        w.write_all(&TRACE_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        w.write_all(&self.mean_flux.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in &self.samples {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Trace> {
        let origin = Path::new("<binary>");
        let mut header = [0u8; TRACE_HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|_| format_error(origin, "truncated header"))?;
        if header[0..4] != TRACE_MAGIC {
            return Err(format_error(origin, "bad magic"));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != TRACE_FORMAT_VERSION {
            return Err(format_error(
                origin,
                format!("unsupported version {version}"),
            ));
        }
        let sample_rate = f64::from_le_bytes(header[8..16].try_into().unwrap());
        let mean_flux = f64::from_le_bytes(header[16..24].try_into().unwrap());
        let count = u64::from_le_bytes(header[24..32].try_into().unwrap());
        let count = usize::try_from(count).map_err(|_| format_error(origin, "count overflows"))?;
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        if body.len() != count * 8 {
            return Err(format_error(
                origin,
                format!("expected {} payload bytes, found {}", count * 8, body.len()),
            ));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Trace::new(samples, sample_rate, mean_flux)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        self.write_binary(File::create(path)?)
    }

    pub fn load_binary(path: &Path) -> Result<Trace> {
        Trace::read_binary(File::open(path)?).map_err(|e| relabel(e, path))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    pub fn load_csv(path: &Path, sample_rate: f64, mean_flux: f64) -> Result<Trace> {
        Trace::read_csv(File::open(path)?, sample_rate, mean_flux).map_err(|e| relabel(e, path))
    }
}

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Format { reason, .. } => format_error(path, reason),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Trace {
        Trace::new((0..n).map(|i| i as f64 * 0.25 - 3.0).collect(), 2.5e9, 1e4).unwrap()
    }

    #[test]
    fn rejects_invalid_construction() {
        assert!(Trace::new(vec![0.0; 3], 1.0, 1.0).is_err());
        assert!(Trace::new(vec![0.0; 4], 0.0, 1.0).is_err());
        assert!(Trace::new(vec![0.0; 4], 1.0, 0.0).is_err());
        assert!(Trace::new(vec![0.0; 4], 1.0, 1.0).is_ok());
    }

    #[test]
    fn binary_header_layout() {
        let t = ramp(8);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), TRACE_HEADER_LEN + 8 * 8);
        assert_eq!(&buf[0..4], b"FLTR");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 2.5e9);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1e4);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), -3.0);
    }

    #[test]
    fn binary_rejects_corruption() {
        let mut buf = Vec::new();
        ramp(4).write_binary(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            Trace::read_binary(&bad[..]),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            Trace::read_binary(&buf[..buf.len() - 1]),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            Trace::read_binary(&buf[..10]),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        ramp(4).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("sample_index,flux_photons"));
        assert_eq!(lines.next(), Some("0,-3e0"));
        assert!(Trace::read_csv("0,1\n".as_bytes(), 1.0, 1.0).is_err());
    }

    #[test]
    fn difference_sums_mean_flux() {
        let a = ramp(8);
        let b = a.shifted(1);
        let d = a.difference(&b).unwrap();
        assert_eq!(d.mean_flux(), 2e4);
        assert_eq!(d.samples()[1], 0.25);
        assert!(a.difference(&ramp(16)).is_err());
    }
}
