//! The capacity random walk `B_{k+1} = max(B_k + U(−r, r), 0)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Lowest capacity the walk may reach. At zero only the empty solution fits.
pub const CAPACITY_FLOOR: f64 = 0.0;

/// A replayable sequence of `ν` capacity changes applied every `t` evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicSchedule {
    initial_capacity: f64,
    magnitudes: Vec<f64>,
    capacities: Vec<f64>,
    r: f64,
    t: u64,
    eta: f64,
    seed: u64,
    clamped: usize,
}

impl DynamicSchedule {
    /// Draws `nu` magnitudes uniformly from `[−r, r]`; the band half-width `η` defaults to `r`.
    pub fn build(b0: f64, r: f64, t: u64, nu: usize, seed: u64) -> Result<Self> {
        validate(b0, r, t, nu)?;
        let mut rng = rng::stream(seed, Stream::Schedule);
        let magnitudes = (0..nu).map(|_| rng.random_range(-r..=r)).collect();
        Self::from_magnitudes(b0, r, t, r, seed, magnitudes)
    }

    /// Builds a schedule from given magnitudes, e.g. ones read back from a file.
    pub fn from_magnitudes(
        b0: f64,
        r: f64,
        t: u64,
        eta: f64,
        seed: u64,
        magnitudes: Vec<f64>,
    ) -> Result<Self> {
        validate(b0, r, t, magnitudes.len())?;
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!(
                "eta must be non-negative, got {eta}"
            )));
        }
        if let Some(m) = magnitudes.iter().find(|m| !(m.abs() <= r)) {
            return Err(Error::invalid(format!("magnitude {m} exceeds r = {r}")));
        }
        let mut capacities = Vec::with_capacity(magnitudes.len() + 1);
        capacities.push(b0);
        let mut clamped = 0;
        let mut b = b0;
        for (k, &m) in magnitudes.iter().enumerate() {
            let next = b + m;
            if next < CAPACITY_FLOOR {
                log::debug!(
                    "capacity change {} clamped: {next} -> {CAPACITY_FLOOR}",
                    k + 1
                );
                clamped += 1;
                b = CAPACITY_FLOOR;
            } else {
                b = next;
            }
            capacities.push(b);
        }
        Ok(DynamicSchedule {
            initial_capacity: b0,
            magnitudes,
            capacities,
            r,
            t,
            eta,
            seed,
            clamped,
        })
    }

    pub fn initial_capacity(&self) -> f64 {
        self.initial_capacity
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// `B_0` followed by the capacity after each change; length `ν + 1`.
    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of changes `ν`.
    pub fn nu(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// How many changes were cut off at the floor.
    pub fn clamp_events(&self) -> usize {
        self.clamped
    }

    pub fn capacity_at_change(&self, k: usize) -> Result<f64> {
        self.capacities
            .get(k)
            .copied()
            .ok_or_else(|| Error::invalid(format!("change index {k} outside 0..={}", self.nu())))
    }

    /// Same dynamics with a different epoch length.
    pub fn with_epoch_length(&self, t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("t must be at least 1"));
        }
        Ok(DynamicSchedule { t, ..self.clone() })
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!(
                "eta must be non-negative, got {eta}"
            )));
        }
        Ok(DynamicSchedule {
            eta,
            ..self.clone()
        })
    }

    /// Header `B0 r t nu eta seed`, then one magnitude per line. Floats are written
    /// in shortest round-trip form, so reading the text back reproduces the schedule exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            self.initial_capacity,
            self.r,
            self.t,
            self.nu(),
            self.eta,
            self.seed
        );
        for m in &self.magnitudes {
            let _ = writeln!(out, "{m}");
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hno, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(
                hno,
                format!(
                    "header needs `B0 r t nu eta seed`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let float = |s: &str, name: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(hno, format!("bad {name}: {s:?}")))
        };
        let b0 = float(fields[0], "B0")?;
        let r = float(fields[1], "r")?;
        let t: u64 = fields[2]
            .parse()
            .map_err(|_| err(hno, format!("bad t: {:?}", fields[2])))?;
        let nu: usize = fields[3]
            .parse()
            .map_err(|_| err(hno, format!("bad nu: {:?}", fields[3])))?;
        let eta = float(fields[4], "eta")?;
        let seed: u64 = fields[5]
            .parse()
            .map_err(|_| err(hno, format!("bad seed: {:?}", fields[5])))?;

        let mut magnitudes = Vec::with_capacity(nu);
        let mut last = hno;
        for (no, line) in lines {
            last = no;
            if magnitudes.len() == nu {
                return Err(err(no, format!("more than {nu} magnitude lines")));
            }
            let m: f64 = line
                .parse()
                .map_err(|_| err(no, format!("bad magnitude {line:?}")))?;
            if !(m.abs() <= r) {
                return Err(err(no, format!("magnitude {m} exceeds r = {r}")));
            }
            magnitudes.push(m);
        }
        if magnitudes.len() != nu {
            return Err(err(
                last,
                format!(
                    "header declares {nu} changes but {} follow",
                    magnitudes.len()
                ),
            ));
        }
        DynamicSchedule::from_magnitudes(b0, r, t, eta, seed, magnitudes)
            .map_err(|e| err(hno, e.to_string()))
    }
}

fn validate(b0: f64, r: f64, t: u64, nu: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("r must be positive, got {r}")));
    }
    if t == 0 {
        return Err(Error::invalid("t must be at least 1"));
    }
    if nu == 0 {
        return Err(Error::invalid("nu must be at least 1"));
    }
    if !(b0 >= CAPACITY_FLOOR && b0.is_finite()) {
        return Err(Error::invalid(format!("B0 must be non-negative, got {b0}")));
    }
    Ok(())
}

pub fn build_schedule(b0: f64, r: f64, t: u64, nu: usize, seed: u64) -> Result<DynamicSchedule> {
    DynamicSchedule::build(b0, r, t, nu, seed)
}

pub fn load_schedule(path: impl AsRef<Path>) -> Result<DynamicSchedule> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DynamicSchedule::from_text(&text, &path.display().to_string())
}

pub fn save_schedule(s: &DynamicSchedule, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, s.to_text()).map_err(|e| Error::io(path, e))
}
