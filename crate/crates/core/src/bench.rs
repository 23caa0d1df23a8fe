//! Timing harness comparing the reduced-dual constructions with the
//! pseudo-inverse baseline.
//!
//! One test generates a random frame `X` (standard normal entries), its
//! canonical dual `Y` and two random duals `Z1`, `Z2`, erases the first `k`
//! indices, and times:
//!
//! | column | construction                          |
//! |--------|---------------------------------------|
//! | t1     | iterative, from `Y`                   |
//! | t2     | Gram solve, from `Y`                  |
//! | t3     | SVD pseudo-inverse of the reduced frame |
//! | t4_zi  | iterative, from `Zi`                  |
//! | t5_zi  | Gram solve, from `Zi`                 |
//!
//! The timed region covers the construction only. Each `e` column is
//! `||V X_{E^c}^H - I||_2` for the matching construction.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::erasure::{construct, mrc_check, ErasureSet, Method};
use crate::error::{Error, Result};
use crate::frame::{
    canonical_dual, duality_error, pinv_adjoint, random_dual, DualPair, Frame, Tolerances,
};
use crate::linalg::max_column_rel_diff;
use crate::scalar::Scalar;

pub const CSV_HEADER: [&str; 22] = [
    "test_id", "N", "r", "k", "seed", "reps", "threads", "t1", "t2", "t3", "t4_z1", "t5_z1",
    "t4_z2", "t5_z2", "e1", "e2", "e3", "e4_z1", "e5_z1", "e4_z2", "e5_z2", "status",
];

/// Frame regenerations allowed before giving up on the MRC.
pub const MRC_ATTEMPTS: usize = 10;

/// Canonical constructions must match the pseudo-inverse dual this closely.
pub const CANONICAL_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    pub r: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions", alias = "reps")]
    pub repetitions: usize,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default = "default_spread")]
    pub spread: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_repetitions() -> usize {
    5
}

fn default_warmup() -> usize {
    1
}

fn default_spread() -> f64 {
    1.0
}

impl BenchConfig {
    pub fn new(n: usize, r: usize, k: usize, seed: u64) -> Self {
        Self {
            id: None,
            n,
            r,
            k,
            seed,
            repetitions: default_repetitions(),
            warmup: default_warmup(),
            spread: default_spread(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r > self.n {
            return Err(Error::Config(format!(
                "need 1 <= r <= N, got r = {}, N = {}",
                self.r, self.n
            )));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::BadK {
                n: self.n,
                k: self.k,
            });
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::Config(format!(
                "spread must be finite and nonnegative, got {}",
                self.spread
            )));
        }
        Ok(())
    }
}

/// Accepts either one config object or a list of them.
pub fn parse_configs(json: &str) -> Result<Vec<BenchConfig>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<BenchConfig>),
        One(BenchConfig),
    }
    let parsed: OneOrMany = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    Ok(match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(c) => vec![c],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    IterativeCanonical,
    GramCanonical,
    Pinv,
    IterativeZ1,
    GramZ1,
    IterativeZ2,
    GramZ2,
}

impl Slot {
    pub const ALL: [Slot; 7] = [
        Slot::IterativeCanonical,
        Slot::GramCanonical,
        Slot::Pinv,
        Slot::IterativeZ1,
        Slot::GramZ1,
        Slot::IterativeZ2,
        Slot::GramZ2,
    ];

    /// Column suffix without the `t`/`e` prefix.
    pub fn column(self) -> &'static str {
        match self {
            Slot::IterativeCanonical => "1",
            Slot::GramCanonical => "2",
            Slot::Pinv => "3",
            Slot::IterativeZ1 => "4_z1",
            Slot::GramZ1 => "5_z1",
            Slot::IterativeZ2 => "4_z2",
            Slot::GramZ2 => "5_z2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotResult {
    pub slot: Slot,
    /// Median wall-clock seconds over the timed repetitions.
    pub seconds: Option<f64>,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub config: BenchConfig,
    pub threads: usize,
    /// Frame generations used to find one satisfying the MRC.
    pub attempts: usize,
    pub slots: Vec<SlotResult>,
    /// Largest columnwise relative difference between the canonical
    /// constructions (t1, t2) and the pseudo-inverse dual.
    pub canonical_vs_pinv: Option<f64>,
}

impl BenchRecord {
    pub fn slot(&self, slot: Slot) -> &SlotResult {
        self.slots
            .iter()
            .find(|s| s.slot == slot)
            .expect("every slot is recorded")
    }

    pub fn status(&self) -> String {
        let mut flags: Vec<String> = self
            .slots
            .iter()
            .filter_map(|s| {
                s.failure
                    .as_ref()
                    .map(|f| format!("t{}={f}", s.slot.column()))
            })
            .collect();
        if self
            .canonical_vs_pinv
            .is_some_and(|d| !(d <= CANONICAL_AGREEMENT))
        {
            flags.push("canonical_mismatch".into());
        }
        if flags.is_empty() {
            "ok".into()
        } else {
            flags.join(";")
        }
    }

    /// A message when t1 or t2 is not below the pseudo-inverse time t3.
    pub fn pinv_ordering_warning(&self) -> Option<String> {
        let t3 = self.slot(Slot::Pinv).seconds?;
        let slow: Vec<String> = [Slot::IterativeCanonical, Slot::GramCanonical]
            .into_iter()
            .filter_map(|s| {
                let t = self.slot(s).seconds?;
                (t >= t3).then(|| format!("t{} = {t:.3e}s", s.column()))
            })
            .collect();
        (!slow.is_empty()).then(|| format!("{} not below t3 = {t3:.3e}s", slow.join(", ")))
    }

    fn csv_row(&self, test_id: &str) -> Vec<String> {
        let mut row = vec![
            test_id.to_string(),
            self.config.n.to_string(),
            self.config.r.to_string(),
            self.config.k.to_string(),
            self.config.seed.to_string(),
            self.config.repetitions.to_string(),
            self.threads.to_string(),
        ];
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:e}"));
        row.extend(Slot::ALL.iter().map(|&s| cell(self.slot(s).seconds)));
        row.extend(Slot::ALL.iter().map(|&s| cell(self.slot(s).error)));
        row.push(self.status());
        row
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Runs `f` `warmup` times untimed, then `reps` times timed. The first
/// failure aborts the measurement.
fn measure<T: Scalar>(
    warmup: usize,
    reps: usize,
    mut f: impl FnMut() -> Result<DMatrix<T>>,
) -> (Option<f64>, Result<DMatrix<T>>) {
    for _ in 0..warmup {
        if let Err(e) = f() {
            return (None, Err(e));
        }
    }
    let mut samples = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let start = Instant::now();
        let out = f();
        samples.push(start.elapsed().as_secs_f64());
        match out {
            Ok(v) => last = Some(v),
            Err(e) => return (None, Err(e)),
        }
    }
    (
        Some(median(&mut samples)),
        Ok(last.expect("at least one repetition")),
    )
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One benchmark test. Erases the first `k` indices; regenerates the frame
/// up to [`MRC_ATTEMPTS`] times until they satisfy the MRC.
pub fn run_test<T: Scalar>(config: &BenchConfig) -> Result<BenchRecord> {
    config.validate()?;
    let tol = &config.tolerances;
    let erasure = ErasureSet::new(config.n, (0..config.k).collect())?;

    let mut found = None;
    for attempt in 0..MRC_ATTEMPTS {
        let frame = match Frame::<T>::random(
            config.r,
            config.n,
            derive_seed(config.seed, attempt as u64),
            tol.rank,
        ) {
            Ok(f) => f,
            Err(Error::NotAFrame { .. }) => continue,
            Err(e) => return Err(e),
        };
        if mrc_check(&frame, &erasure, tol.rank)? {
            found = Some((frame, attempt + 1));
            break;
        }
    }
    let (frame, attempts) = found.ok_or(Error::MrcRetryExhausted {
        attempts: MRC_ATTEMPTS,
    })?;

    let canonical = canonical_dual(&frame, tol)?;
    let z1 = random_dual(
        &canonical,
        derive_seed(config.seed, 1001),
        config.spread,
        tol,
    );
    let z2 = random_dual(
        &canonical,
        derive_seed(config.seed, 1002),
        config.spread,
        tol,
    );
    let reduced = frame.select(erasure.complement());

    let (w, reps) = (config.warmup, config.repetitions);
    let run = |pair: &DualPair<T>, method: Method| {
        measure(w, reps, || {
            construct(pair, &erasure, method, tol).map(|c| c.vectors)
        })
    };
    let failed = |err: &Error| (None, Err(err.clone()));

    let mut outputs: Vec<(Slot, (Option<f64>, Result<DMatrix<T>>))> = vec![
        (Slot::IterativeCanonical, run(&canonical, Method::Iterative)),
        (Slot::GramCanonical, run(&canonical, Method::GramSolve)),
        (Slot::Pinv, measure(w, reps, || Ok(pinv_adjoint(&reduced)))),
    ];
    for (z, slots) in [
        (&z1, [Slot::IterativeZ1, Slot::GramZ1]),
        (&z2, [Slot::IterativeZ2, Slot::GramZ2]),
    ] {
        match z {
            Ok(pair) => {
                outputs.push((slots[0], run(pair, Method::Iterative)));
                outputs.push((slots[1], run(pair, Method::GramSolve)));
            }
            Err(err) => {
                outputs.push((slots[0], failed(err)));
                outputs.push((slots[1], failed(err)));
            }
        }
    }

    let canonical_vs_pinv = match (&outputs[0].1 .1, &outputs[1].1 .1, &outputs[2].1 .1) {
        (Ok(a), Ok(b), Ok(p)) => Some(max_column_rel_diff(a, p).max(max_column_rel_diff(b, p))),
        _ => None,
    };

    let slots = outputs
        .into_iter()
        .map(|(slot, (seconds, out))| match out {
            Ok(v) => Ok(SlotResult {
                slot,
                seconds,
                error: Some(duality_error(&frame, &v, erasure.complement())?),
                failure: None,
            }),
            Err(e) => Ok(SlotResult {
                slot,
                seconds: None,
                error: None,
                failure: Some(e.kind().to_string()),
            }),
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BenchRecord {
        config: config.clone(),
        threads: 1,
        attempts,
        slots,
        canonical_vs_pinv,
    })
}

/// Runs every config and writes one CSV row each. A config that cannot run
/// at all still gets a row: `NA` cells and the error kind as status.
pub fn write_suite<T: Scalar, W: Write>(
    configs: &[BenchConfig],
    out: W,
) -> Result<Vec<Result<BenchRecord>>> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    let mut results = Vec::with_capacity(configs.len());
    for (i, config) in configs.iter().enumerate() {
        let test_id = config.id.clone().unwrap_or_else(|| (i + 1).to_string());
        let result = run_test::<T>(config);
        match &result {
            Ok(record) => writer.write_record(record.csv_row(&test_id))?,
            Err(err) => writer.write_record(failed_row(&test_id, config, err))?,
        }
        writer.flush()?;
        results.push(result);
    }
    writer.flush()?;
    Ok(results)
}

pub fn run_suite<T: Scalar>(
    configs: &[BenchConfig],
    path: &Path,
) -> Result<Vec<Result<BenchRecord>>> {
    let file = std::fs::File::create(path)?;
    write_suite::<T, _>(configs, file)
}

fn failed_row(test_id: &str, config: &BenchConfig, err: &Error) -> Vec<String> {
    let mut row = vec![
        test_id.to_string(),
        config.n.to_string(),
        config.r.to_string(),
        config.k.to_string(),
        config.seed.to_string(),
        config.repetitions.to_string(),
        "1".to_string(),
    ];
    row.extend(std::iter::repeat_n("NA".to_string(), 14));
    row.push(err.kind().to_string());
    row
}

/// Human-readable one-line summary, for stderr.
pub fn summarize(record: &BenchRecord) -> String {
    let mut s = format!(
        "N={} r={} k={}:",
        record.config.n, record.config.r, record.config.k
    );
    for slot in &record.slots {
        let _ = match (slot.seconds, slot.error) {
            (Some(t), Some(e)) => write!(s, " t{}={t:.3e}s/e={e:.2e}", slot.slot.column()),
            _ => write!(s, " t{}=NA", slot.slot.column()),
        };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> BenchConfig {
        BenchConfig {
            repetitions: 2,
            warmup: 0,
            ..BenchConfig::new(30, 20, 3, seed)
        }
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_test_records_every_slot() {
        let record = run_test::<f64>(&small(4)).unwrap();
        assert_eq!(record.slots.len(), 7);
        assert_eq!(record.status(), "ok");
        for s in [Slot::IterativeCanonical, Slot::GramCanonical, Slot::Pinv] {
            assert!(record.slot(s).error.unwrap() <= 1e-10);
        }
        assert!(record.canonical_vs_pinv.unwrap() <= CANONICAL_AGREEMENT);
        assert_eq!(record.csv_row("1").len(), CSV_HEADER.len());
    }

    #[test]
    fn basis_exhausts_mrc_retries() {
        let config = BenchConfig {
            repetitions: 1,
            warmup: 0,
            ..BenchConfig::new(5, 5, 1, 0)
        };
        assert_eq!(
            run_test::<f64>(&config),
            Err(Error::MrcRetryExhausted {
                attempts: MRC_ATTEMPTS
            })
        );
    }

    #[test]
    fn config_validation() {
        assert!(BenchConfig::new(10, 11, 1, 0).validate().is_err());
        assert!(BenchConfig::new(10, 5, 10, 0).validate().is_err());
        assert!(BenchConfig::new(10, 5, 0, 0).validate().is_err());
        assert!(BenchConfig {
            repetitions: 0,
            ..BenchConfig::new(10, 5, 1, 0)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn configs_parse_from_json() {
        let one = parse_configs(r#"{"N": 10, "r": 5, "k": 2}"#).unwrap();
        assert_eq!(one, vec![BenchConfig::new(10, 5, 2, 0)]);
        let many = parse_configs(
            r#"[{"n": 10, "r": 5, "k": 2, "seed": 3, "reps": 2}, {"N": 8, "r": 4, "k": 1}]"#,
        )
        .unwrap();
        assert_eq!(many.len(), 2);
        assert_eq!(many[0].repetitions, 2);
        assert!(parse_configs(r#"{"N": 10, "r": 5}"#).is_err());
        assert!(parse_configs(r#"{"N": 10, "r": 5, "k": 1, "bogus": 1}"#).is_err());
    }

    #[test]
    fn suite_csv_shape() {
        let mut buf = Vec::new();
        write_suite::<f64, _>(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim_end(),
            CSV_HEADER.join(",")
        );

        let mut buf = Vec::new();
        let configs = [
            small(1),
            small(2),
            BenchConfig {
                repetitions: 1,
                warmup: 0,
                ..BenchConfig::new(4, 4, 1, 0)
            },
        ];
        write_suite::<f64, _>(&configs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(",MrcRetryExhausted"));
        assert_eq!(lines[3].matches("NA").count(), 14);
    }
}
