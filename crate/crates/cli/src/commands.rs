use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use frame_erasure::bench::{self, BenchConfig};
use frame_erasure::channel::{random_signal, transmit_batch};
use frame_erasure::erasure::reduced_dual;
use frame_erasure::io::{parse_vector, read_frm1, read_header, write_frm1, write_reduced, Sidecar};
use frame_erasure::linalg::numerical_rank;
use frame_erasure::{
    canonical_dual, duality_error, equivalence_check, random_dual, transmit, Complex64, DualPair,
    ErasureSet, Field, Frame, Scalar, Tolerances, TransmissionReport, TransmissionStatus,
};

use serde_json::json;

use crate::{Cli, Command, DualKind, Failure, GlobalOpts, ReduceMethodArg};

type CmdResult = Result<u8, Failure>;

pub fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    validate_globals(g)?;
    match cli.command {
        Command::Gen {
            n,
            r,
            out,
            dual,
            spread,
            dual_out,
        } => {
            if r == 0 || n < r {
                return Err(Failure::usage(format!(
                    "need N >= r >= 1, got N = {n}, r = {r}"
                )));
            }
            if !(spread >= 0.0 && spread.is_finite()) {
                return Err(Failure::usage(format!(
                    "--spread must be finite and nonnegative, got {spread}"
                )));
            }
            let dual_out = dual_out.unwrap_or_else(|| out.with_extension("dual.frm"));
            let job = GenJob {
                n,
                r,
                out: &out,
                dual,
                spread,
                dual_out: &dual_out,
            };
            match requested_field(g) {
                Field::Real => gen::<f64>(g, job),
                Field::Complex => gen::<Complex64>(g, job),
            }
        }
        Command::Info { frame } => match file_field(g, &[&frame])? {
            Field::Real => info::<f64>(g, &frame),
            Field::Complex => info::<Complex64>(g, &frame),
        },
        Command::Verify { frame, dual } => match file_field(g, &[&frame, &dual])? {
            Field::Real => verify::<f64>(g, &frame, &dual),
            Field::Complex => verify::<Complex64>(g, &frame, &dual),
        },
        Command::Reduce {
            frame,
            dual,
            erase,
            method,
            out,
            tol_equal,
        } => {
            let job = ReduceJob {
                erase: &erase,
                method,
                out: out.as_deref(),
                tol_equal,
            };
            match file_field(g, &[&frame, &dual])? {
                Field::Real => reduce::<f64>(g, &frame, &dual, job),
                Field::Complex => reduce::<Complex64>(g, &frame, &dual, job),
            }
        }
        Command::Transmit {
            frame,
            dual,
            erase,
            signal,
            random_signal,
            method,
            batch,
            k,
        } => {
            let job = match (batch, k, erase) {
                (Some(trials), Some(k), None) => TransmitJob::Batch { trials, k },
                (None, None, Some(erase)) => {
                    let source = match (signal, random_signal) {
                        (Some(path), false) => SignalSource::File(path),
                        (None, true) => SignalSource::Random,
                        _ => {
                            return Err(Failure::usage(
                                "give exactly one of --signal PATH or --random-signal",
                            ))
                        }
                    };
                    TransmitJob::Single { erase, source }
                }
                _ => return Err(Failure::usage("give either --erase, or --batch with --k")),
            };
            match file_field(g, &[&frame, &dual])? {
                Field::Real => transmit_cmd::<f64>(g, &frame, &dual, method.into(), job),
                Field::Complex => transmit_cmd::<Complex64>(g, &frame, &dual, method.into(), job),
            }
        }
        Command::Bench {
            config,
            n,
            r,
            k,
            reps,
            warmup,
            spread,
            out,
        } => {
            let configs = match (config, n, r, k) {
                (Some(path), None, None, None) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
                    bench::parse_configs(&text)?
                }
                (None, Some(n), Some(r), Some(k)) => vec![BenchConfig {
                    repetitions: reps,
                    warmup,
                    spread,
                    tolerances: g.tolerances(),
                    ..BenchConfig::new(n, r, k, g.seed)
                }],
                _ => {
                    return Err(Failure::usage(
                        "give either --config PATH or all of --n, --r, --k",
                    ))
                }
            };
            for c in &configs {
                c.validate()?;
            }
            match requested_field(g) {
                Field::Real => bench_cmd::<f64>(&configs, out.as_deref()),
                Field::Complex => bench_cmd::<Complex64>(&configs, out.as_deref()),
            }
        }
    }
}

fn validate_globals(g: &GlobalOpts) -> Result<(), Failure> {
    if g.threads == 0 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    if g.threads > 1 {
        return Err(Failure::usage(
            "this build runs single-threaded kernels only; --threads must be 1",
        ));
    }
    for (name, v) in [
        ("--tol-rank", g.tol_rank),
        ("--tol-dual", g.tol_dual),
        ("--tol-denom", g.tol_denom),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Failure::usage(format!(
                "{name} must be finite and nonnegative, got {v}"
            )));
        }
    }
    Ok(())
}

fn requested_field(g: &GlobalOpts) -> Field {
    g.field.map_or(Field::Real, Field::from)
}

/// Complex if any input file is complex or complex was requested.
fn file_field(g: &GlobalOpts, paths: &[&Path]) -> Result<Field, Failure> {
    let mut any_complex = false;
    for path in paths {
        let header =
            read_header(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        any_complex |= header.field == Field::Complex;
    }
    match g.field.map(Field::from) {
        Some(Field::Real) if any_complex => Err(Failure::io(
            "complex input files cannot be processed with --field real",
        )),
        Some(Field::Complex) => Ok(Field::Complex),
        _ => Ok(if any_complex {
            Field::Complex
        } else {
            Field::Real
        }),
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{value}").map_err(|e| Failure::io(e.to_string()))
}

fn load_matrix<T: Scalar>(path: &Path) -> Result<frame_erasure::nalgebra::DMatrix<T>, Failure> {
    read_frm1(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn load_pair<T: Scalar>(
    tol: &Tolerances,
    frame: &Path,
    dual: &Path,
) -> Result<DualPair<T>, Failure> {
    let x = Frame::new(load_matrix::<T>(frame)?, tol.rank)
        .map_err(|e| Failure::io(format!("{}: {e}", frame.display())))?;
    let z = load_matrix::<T>(dual)?;
    DualPair::new(x, z, tol).map_err(|e| Failure::io(format!("{}: {e}", dual.display())))
}

struct GenJob<'a> {
    n: usize,
    r: usize,
    out: &'a Path,
    dual: Option<DualKind>,
    spread: f64,
    dual_out: &'a Path,
}

fn gen<T: Scalar>(g: &GlobalOpts, job: GenJob<'_>) -> CmdResult {
    let tol = g.tolerances();
    let frame = Frame::<T>::random(job.r, job.n, g.seed, tol.rank)?;
    write_frm1(job.out, frame.elements())?;
    let mut summary = json!({
        "field": T::FIELD,
        "r": job.r,
        "N": job.n,
        "frame": job.out,
    });
    if let Some(kind) = job.dual {
        let canonical = canonical_dual(&frame, &tol)?;
        let pair = match kind {
            DualKind::Canonical => canonical,
            DualKind::Random => random_dual(&canonical, g.seed ^ 0xd0a1_5eed, job.spread, &tol)?,
        };
        write_frm1(job.dual_out, pair.dual())?;
        summary["dual"] = json!(job.dual_out);
        summary["canonical"] = json!(pair.is_canonical());
        summary["duality_residual"] = json!(pair.duality_residual());
    }
    print_json(&summary)?;
    Ok(0)
}

fn info<T: Scalar>(g: &GlobalOpts, path: &Path) -> CmdResult {
    let m = load_matrix::<T>(path)?;
    let rank = numerical_rank(&m, g.tol_rank);
    let mut out = json!({
        "field": T::FIELD,
        "r": m.nrows(),
        "N": m.ncols(),
        "rank": rank,
    });
    match Frame::new(m, g.tol_rank) {
        Ok(frame) => {
            let bounds = frame.bounds();
            out["is_frame"] = json!(true);
            out["lower_bound"] = json!(bounds.lower);
            out["upper_bound"] = json!(bounds.upper);
        }
        Err(e) => {
            out["is_frame"] = json!(false);
            out["reason"] = json!(e.to_string());
        }
    }
    print_json(&out)?;
    Ok(0)
}

fn verify<T: Scalar>(g: &GlobalOpts, frame: &Path, dual: &Path) -> CmdResult {
    let x = Frame::new(load_matrix::<T>(frame)?, g.tol_rank)
        .map_err(|e| Failure::io(format!("{}: {e}", frame.display())))?;
    let z = load_matrix::<T>(dual)?;
    let all: Vec<usize> = (0..x.count()).collect();
    let err =
        duality_error(&x, &z, &all).map_err(|e| Failure::io(format!("{}: {e}", dual.display())))?;
    print_json(&json!({
        "duality_error": err,
        "tolerance": g.tol_dual,
        "is_dual": err <= g.tol_dual,
    }))?;
    Ok(0)
}

struct ReduceJob<'a> {
    erase: &'a str,
    method: ReduceMethodArg,
    out: Option<&'a Path>,
    tol_equal: f64,
}

fn reduce<T: Scalar>(g: &GlobalOpts, frame: &Path, dual: &Path, job: ReduceJob<'_>) -> CmdResult {
    let tol = g.tolerances();
    let pair = load_pair::<T>(&tol, frame, dual)?;
    let erasure = ErasureSet::parse_one_based(pair.frame().count(), job.erase)?;
    let method = match job.method {
        ReduceMethodArg::Iter => crate::MethodArg::Iter,
        ReduceMethodArg::Gram => crate::MethodArg::Gram,
        ReduceMethodArg::Op => crate::MethodArg::Op,
        ReduceMethodArg::All => return reduce_all(&pair, &erasure, &tol, job),
    };
    let reduced = reduced_dual(&pair, &erasure, method.into(), &tol)?;
    let out = job.out.ok_or_else(|| Failure::usage("--out is required"))?;
    write_reduced(out, &reduced)?;
    print_json(
        &serde_json::to_value(Sidecar::from_reduced(&reduced)).expect("sidecar serializes"),
    )?;
    Ok(0)
}

fn reduce_all<T: Scalar>(
    pair: &DualPair<T>,
    erasure: &ErasureSet,
    tol: &Tolerances,
    job: ReduceJob<'_>,
) -> CmdResult {
    let report = equivalence_check(pair, erasure, job.tol_equal, tol)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    if let Some(out) = job.out {
        fs::write(out, format!("{value:#}\n"))
            .map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    }
    print_json(&value)?;
    if !report.mrc_ok {
        return Err(frame_erasure::Error::MrcViolated.into());
    }
    if let Some(anomaly) = &report.anomaly {
        eprintln!("warning: {anomaly}");
    }
    if report.outcomes.iter().any(|o| o.succeeded) {
        Ok(0)
    } else {
        let reasons: Vec<String> = report
            .outcomes
            .iter()
            .filter_map(|o| o.error.clone())
            .collect();
        Err(Failure {
            code: 5,
            message: reasons.join("; "),
        })
    }
}

enum SignalSource {
    File(PathBuf),
    Random,
}

enum TransmitJob {
    Single { erase: String, source: SignalSource },
    Batch { trials: usize, k: usize },
}

fn transmit_cmd<T: Scalar>(
    g: &GlobalOpts,
    frame: &Path,
    dual: &Path,
    method: frame_erasure::Method,
    job: TransmitJob,
) -> CmdResult {
    let tol = g.tolerances();
    let pair = load_pair::<T>(&tol, frame, dual)?;
    match job {
        TransmitJob::Single { erase, source } => {
            let erasure = ErasureSet::parse_one_based(pair.frame().count(), &erase)?;
            let h = match source {
                SignalSource::Random => random_signal::<T>(pair.frame().dim(), g.seed),
                SignalSource::File(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
                    let h = parse_vector::<T>(&text)
                        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
                    if h.len() != pair.frame().dim() {
                        return Err(Failure::io(format!(
                            "{}: signal has {} entries, frame dimension is {}",
                            path.display(),
                            h.len(),
                            pair.frame().dim()
                        )));
                    }
                    h
                }
            };
            let report = transmit(&pair, &erasure, &h, method, &tol)?;
            print_json(&serde_json::to_value(&report).expect("report serializes"))?;
            Ok(exit_code(&report))
        }
        TransmitJob::Batch { trials, k } => {
            let reports = transmit_batch(&pair, k, trials, g.seed, method, &tol)?;
            let mut stdout = io::stdout().lock();
            for report in &reports {
                let line = serde_json::to_string(report).expect("report serializes");
                writeln!(stdout, "{line}").map_err(|e| Failure::io(e.to_string()))?;
            }
            Ok(reports.iter().map(exit_code).find(|&c| c != 0).unwrap_or(0))
        }
    }
}

fn exit_code(report: &TransmissionReport) -> u8 {
    match report.status {
        TransmissionStatus::Recovered => 0,
        TransmissionStatus::MrcViolated => 4,
        TransmissionStatus::ConstructionFailed { .. } => 5,
    }
}

fn bench_cmd<T: Scalar>(configs: &[BenchConfig], out: Option<&Path>) -> CmdResult {
    let results = match out {
        Some(path) => bench::run_suite::<T>(configs, path)?,
        None => bench::write_suite::<T, _>(configs, io::stdout().lock())?,
    };
    for result in &results {
        match result {
            Ok(record) => {
                eprintln!("{}", bench::summarize(record));
                if let Some(w) = record.pinv_ordering_warning() {
                    eprintln!("warning: {w}");
                }
            }
            Err(e) => eprintln!("warning: test skipped: {e}"),
        }
    }
    Ok(0)
}
