//! Plain-text artifact formats: tab-separated edge lists in, and matrices,
//! samples, reports, traces, and prediction grids out. All floating-point
//! values are written with 17 significant digits so files reload
//! losslessly and independently of locale.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use countnet_core::{
    CountMatrix, EvalReport, Hyperparams, HoldoutScheme, LatentState, PriorKind, Sample,
};

use crate::error::{CliError, Result, StageContext};

/// 17 significant digits: exact round-trip for every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

// ---------------------------------------------------------------------------
// input edge lists

/// Input file layouts accepted by `load_counts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `node_a<TAB>node_b<TAB>count` with free-form string labels.
    EdgeList,
    /// Same layout, but declares ordered pair data; refuses `--symmetric`.
    PairCounts,
}

/// Parses a tab-separated count file. String labels map to dense indices
/// in order of first appearance, duplicate pairs accumulate, and the mask
/// is exactly the keyed cells.
pub fn load_counts(
    path: &Path,
    format: InputFormat,
    symmetric: bool,
) -> Result<(CountMatrix, Vec<String>)> {
    if format == InputFormat::PairCounts && symmetric {
        return Err(CliError::stage(
            "ingest",
            "pair_counts input is ordered; --symmetric does not apply",
        ));
    }
    let text = std::fs::read_to_string(path).at_stage("ingest")?;
    let mut labels: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut intern = |name: &str, labels: &mut Vec<String>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            labels.push(name.to_string());
            labels.len() - 1
        })
    };
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let parse_err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, got {}",
                fields.len()
            )));
        }
        let count = match fields[2].parse::<i64>() {
            Ok(c) if c < 0 => return Err(parse_err(format!("negative count {c}"))),
            Ok(c) => c as f64,
            Err(_) => {
                return Err(parse_err(format!(
                    "count '{}' is not a nonnegative integer",
                    fields[2]
                )))
            }
        };
        let a = intern(fields[0], &mut labels);
        let b = intern(fields[1], &mut labels);
        entries.push((a, b, count));
    }
    if entries.is_empty() {
        return Err(CliError::stage("ingest", format!("{}: empty file", path.display())));
    }
    let mut matrix = CountMatrix::new(labels.len(), symmetric);
    for (a, b, count) in entries {
        matrix.observe(a, b, count).at_stage("ingest")?;
    }
    Ok((matrix, labels))
}

// ---------------------------------------------------------------------------
// count-matrix artifacts

pub fn write_matrix(
    path: &Path,
    matrix: &CountMatrix,
    labels: &[String],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("countnet-matrix v1\n");
    let _ = writeln!(out, "nodes\t{}", matrix.n_nodes());
    let _ = writeln!(out, "symmetric\t{}", matrix.is_symmetric());
    for (idx, label) in labels.iter().enumerate() {
        let _ = writeln!(out, "label\t{idx}\t{label}");
    }
    for ((i, j), count) in matrix.observed() {
        let _ = writeln!(out, "cell\t{i}\t{j}\t{}", fmt_f64(count));
    }
    std::fs::write(path, out).at_stage("persist")
}

pub fn read_matrix(path: &Path) -> Result<(CountMatrix, Vec<String>)> {
    let text = std::fs::read_to_string(path).at_stage("ingest")?;
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line: line + 1,
        message,
    };
    match lines.next() {
        Some((_, "countnet-matrix v1")) => {}
        other => {
            return Err(parse_err(
                0,
                format!("expected 'countnet-matrix v1', got {other:?}"),
            ))
        }
    }
    let mut n_nodes: Option<usize> = None;
    let mut symmetric: Option<bool> = None;
    let mut labels: Vec<String> = Vec::new();
    let mut matrix: Option<CountMatrix> = None;
    for (line_no, raw) in lines {
        let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
        match fields.as_slice() {
            ["nodes", n] => {
                n_nodes = Some(n.parse().map_err(|_| {
                    parse_err(line_no, format!("bad node count '{n}'"))
                })?)
            }
            ["symmetric", s] => {
                symmetric = Some(s.parse().map_err(|_| {
                    parse_err(line_no, format!("bad symmetric flag '{s}'"))
                })?)
            }
            ["label", idx, text] => {
                let idx: usize = idx
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad label index '{idx}'")))?;
                if idx != labels.len() {
                    return Err(parse_err(line_no, "label indices out of order".into()));
                }
                labels.push((*text).to_string());
            }
            ["cell", i, j, count] => {
                let m = match matrix.as_mut() {
                    Some(m) => m,
                    None => {
                        let (Some(n), Some(sym)) = (n_nodes, symmetric) else {
                            return Err(parse_err(
                                line_no,
                                "cell before nodes/symmetric header".into(),
                            ));
                        };
                        matrix = Some(CountMatrix::new(n, sym));
                        matrix.as_mut().unwrap()
                    }
                };
                let i: usize = i
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad row '{i}'")))?;
                let j: usize = j
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad column '{j}'")))?;
                let count = parse_f64(count)
                    .ok_or_else(|| parse_err(line_no, format!("bad count '{count}'")))?;
                m.observe(i, j, count).at_stage("ingest")?;
            }
            _ => return Err(parse_err(line_no, format!("unrecognized line '{raw}'"))),
        }
    }
    let matrix = match matrix {
        Some(m) => m,
        None => {
            let (Some(n), Some(sym)) = (n_nodes, symmetric) else {
                return Err(CliError::stage("ingest", "matrix file missing header"));
            };
            CountMatrix::new(n, sym)
        }
    };
    Ok((matrix, labels))
}

// ---------------------------------------------------------------------------
// run metadata shared by samples files and reports

/// Everything needed to reinterpret a samples file on its own.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub model: PriorKind,
    pub n_nodes: usize,
    pub symmetric: bool,
    pub hyper: Hyperparams,
    pub k_seen: usize,
    pub seed: u64,
    pub holdout: Option<HoldoutScheme>,
    pub train_fraction: Option<f64>,
    pub fingerprint: String,
}

pub fn model_name(kind: PriorKind) -> &'static str {
    match kind {
        PriorKind::Crp => "crp",
        PriorKind::Gaussian => "gaussian",
    }
}

pub fn scheme_name(scheme: Option<HoldoutScheme>) -> &'static str {
    match scheme {
        Some(HoldoutScheme::Interactions) => "interactions",
        Some(HoldoutScheme::NodePairs) => "pairs",
        None => "none",
    }
}

fn parse_scheme(s: &str) -> Option<Option<HoldoutScheme>> {
    match s {
        "interactions" => Some(Some(HoldoutScheme::Interactions)),
        "pairs" => Some(Some(HoldoutScheme::NodePairs)),
        "none" => Some(None),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// samples

pub fn write_samples(path: &Path, meta: &RunMeta, samples: &[Sample]) -> Result<()> {
    let mut out = String::new();
    out.push_str("countnet-samples v1\n");
    let _ = writeln!(out, "model\t{}", model_name(meta.model));
    let _ = writeln!(out, "n_nodes\t{}", meta.n_nodes);
    let _ = writeln!(out, "symmetric\t{}", meta.symmetric);
    let _ = writeln!(out, "alpha_crp\t{}", fmt_f64(meta.hyper.alpha_crp));
    let _ = writeln!(out, "sigma_z_sq\t{}", fmt_f64(meta.hyper.sigma_z_sq));
    let _ = writeln!(out, "sigma_w_sq\t{}", fmt_f64(meta.hyper.sigma_w_sq));
    let _ = writeln!(out, "alpha_dcm\t{}", fmt_f64(meta.hyper.alpha_dcm));
    let _ = writeln!(out, "mc_samples\t{}", meta.hyper.mc_new_class_samples);
    let _ = writeln!(out, "d_gaussian\t{}", meta.hyper.d_gaussian);
    let _ = writeln!(out, "k_seen\t{}", meta.k_seen);
    let _ = writeln!(out, "seed\t{}", meta.seed);
    let _ = writeln!(out, "holdout\t{}", scheme_name(meta.holdout));
    let _ = writeln!(
        out,
        "train_fraction\t{}",
        meta.train_fraction.map_or_else(|| "-".to_string(), fmt_f64)
    );
    let _ = writeln!(out, "fingerprint\t{}", meta.fingerprint);
    let _ = writeln!(out, "n_samples\t{}", samples.len());
    for (idx, sample) in samples.iter().enumerate() {
        // wall-clock cost deliberately lives in the trace file only, so
        // equal-seed runs serialize identically
        let assign = match sample.state.assignments() {
            Some(a) => a
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            None => "-".to_string(),
        };
        let w = sample
            .state
            .w()
            .iter()
            .map(|&v| fmt_f64(v))
            .collect::<Vec<_>>()
            .join(",");
        let z = match sample.state.prior_kind() {
            PriorKind::Crp => "-".to_string(),
            PriorKind::Gaussian => {
                let z_view = sample.state.z();
                let mut parts = Vec::with_capacity(z_view.len());
                for node in 0..sample.state.n_nodes() {
                    for comp in 0..sample.state.d() {
                        parts.push(fmt_f64(z_view[[comp, node]]));
                    }
                }
                parts.join(",")
            }
        };
        let _ = writeln!(
            out,
            "sample\t{idx}\t{}\t{}\t{}\t{assign}\t{w}\t{z}",
            sample.dims,
            fmt_f64(sample.train_log_lik),
            fmt_f64(sample.log_posterior),
        );
    }
    std::fs::write(path, out).at_stage("persist")
}

pub fn read_samples(path: &Path) -> Result<(RunMeta, Vec<Sample>)> {
    let text = std::fs::read_to_string(path).at_stage("ingest")?;
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line: line + 1,
        message,
    };
    match lines.next() {
        Some((_, "countnet-samples v1")) => {}
        other => {
            return Err(parse_err(
                0,
                format!("expected 'countnet-samples v1', got {other:?}"),
            ))
        }
    }
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut samples = Vec::new();
    let mut meta: Option<RunMeta> = None;
    for (line_no, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix("sample\t") {
            let meta = match &meta {
                Some(m) => m,
                None => {
                    meta = Some(build_meta(&header, path, line_no)?);
                    meta.as_ref().unwrap()
                }
            };
            samples.push(parse_sample_line(rest, meta, path, line_no)?);
        } else {
            let mut parts = line.splitn(2, '\t');
            let key = parts.next().unwrap_or_default();
            let value = parts
                .next()
                .ok_or_else(|| parse_err(line_no, format!("bad header line '{line}'")))?;
            header.insert(key.to_string(), value.to_string());
        }
    }
    let meta = match meta {
        Some(m) => m,
        None => build_meta(&header, path, 0)?,
    };
    Ok((meta, samples))
}

fn build_meta(
    header: &BTreeMap<String, String>,
    path: &Path,
    line: usize,
) -> Result<RunMeta> {
    let get = |key: &str| -> Result<&String> {
        header.get(key).ok_or_else(|| CliError::Parse {
            path: path.to_path_buf(),
            line: line + 1,
            message: format!("missing header field '{key}'"),
        })
    };
    let bad = |key: &str, val: &str| CliError::Parse {
        path: path.to_path_buf(),
        line: line + 1,
        message: format!("bad value '{val}' for '{key}'"),
    };
    let model = match get("model")?.as_str() {
        "crp" => PriorKind::Crp,
        "gaussian" => PriorKind::Gaussian,
        other => return Err(bad("model", other)),
    };
    let parse_usize = |key: &str| -> Result<usize> {
        let v = get(key)?;
        v.parse().map_err(|_| bad(key, v))
    };
    let parse_float = |key: &str| -> Result<f64> {
        let v = get(key)?;
        parse_f64(v).ok_or_else(|| bad(key, v))
    };
    let holdout_raw = get("holdout")?;
    let holdout = parse_scheme(holdout_raw).ok_or_else(|| bad("holdout", holdout_raw))?;
    let fraction_raw = get("train_fraction")?;
    let train_fraction = if fraction_raw == "-" {
        None
    } else {
        Some(parse_f64(fraction_raw).ok_or_else(|| bad("train_fraction", fraction_raw))?)
    };
    let seed_raw = get("seed")?;
    Ok(RunMeta {
        model,
        n_nodes: parse_usize("n_nodes")?,
        symmetric: {
            let v = get("symmetric")?;
            v.parse().map_err(|_| bad("symmetric", v))?
        },
        hyper: Hyperparams {
            alpha_crp: parse_float("alpha_crp")?,
            sigma_z_sq: parse_float("sigma_z_sq")?,
            sigma_w_sq: parse_float("sigma_w_sq")?,
            alpha_dcm: parse_float("alpha_dcm")?,
            d_gaussian: parse_usize("d_gaussian")?,
            mc_new_class_samples: parse_usize("mc_samples")?,
        },
        k_seen: parse_usize("k_seen")?,
        seed: seed_raw.parse().map_err(|_| bad("seed", seed_raw))?,
        holdout,
        train_fraction,
        fingerprint: get("fingerprint")?.clone(),
    })
}

fn parse_sample_line(
    rest: &str,
    meta: &RunMeta,
    path: &Path,
    line_no: usize,
) -> Result<Sample> {
    let err = |message: String| CliError::Parse {
        path: path.to_path_buf(),
        line: line_no + 1,
        message,
    };
    let fields: Vec<&str> = rest.split('\t').collect();
    if fields.len() != 7 {
        return Err(err(format!(
            "expected 7 sample fields, got {}",
            fields.len()
        )));
    }
    let dims: usize = fields[1]
        .parse()
        .map_err(|_| err(format!("bad dims '{}'", fields[1])))?;
    let train_log_lik =
        parse_f64(fields[2]).ok_or_else(|| err(format!("bad train_ll '{}'", fields[2])))?;
    let log_posterior =
        parse_f64(fields[3]).ok_or_else(|| err(format!("bad log_post '{}'", fields[3])))?;
    let parse_floats = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| parse_f64(v).ok_or_else(|| err(format!("bad float '{v}'"))))
            .collect()
    };
    let w_flat = parse_floats(fields[5])?;
    if w_flat.len() != dims * dims {
        return Err(err(format!(
            "weight matrix length {} does not match dims {dims}",
            w_flat.len()
        )));
    }
    let w = Array2::from_shape_vec((dims, dims), w_flat).expect("length checked above");
    let state = if fields[4] == "-" {
        // Gaussian: z stored column-major
        let z_flat = parse_floats(fields[6])?;
        if z_flat.len() != dims * meta.n_nodes {
            return Err(err("representation matrix has wrong length".into()));
        }
        let mut z = Array2::zeros((dims, meta.n_nodes));
        let mut it = z_flat.iter();
        for node in 0..meta.n_nodes {
            for comp in 0..dims {
                z[[comp, node]] = *it.next().unwrap();
            }
        }
        LatentState::gaussian(z, w).map_err(|e| err(e.to_string()))?
    } else {
        let assignments: Vec<usize> = fields[4]
            .split(',')
            .map(|v| v.parse().map_err(|_| err(format!("bad class '{v}'"))))
            .collect::<Result<_>>()?;
        if assignments.len() != meta.n_nodes {
            return Err(err("assignment vector has wrong length".into()));
        }
        LatentState::crp(assignments, w).map_err(|e| err(e.to_string()))?
    };
    Ok(Sample {
        state,
        train_log_lik,
        log_posterior,
        seconds_elapsed: 0.0,
        dims,
    })
}

// ---------------------------------------------------------------------------
// reports

/// The on-disk evaluation/report document.
#[derive(Debug, Clone)]
pub struct ReportDoc {
    pub meta: RunMeta,
    pub n_samples: usize,
    pub train_ll_mean: f64,
    pub mean_dims: f64,
    pub sec_per_sample: f64,
    /// Populated only for runs with a holdout.
    pub eval: Option<EvalReport>,
}

pub fn write_report(path: &Path, doc: &ReportDoc) -> Result<()> {
    let mut out = String::new();
    out.push_str("countnet-report v1\n");
    let _ = writeln!(out, "model\t{}", model_name(doc.meta.model));
    let _ = writeln!(out, "holdout\t{}", scheme_name(doc.meta.holdout));
    let _ = writeln!(
        out,
        "train_fraction\t{}",
        doc.meta
            .train_fraction
            .map_or_else(|| "-".to_string(), fmt_f64)
    );
    let _ = writeln!(out, "seed\t{}", doc.meta.seed);
    let _ = writeln!(out, "fingerprint\t{}", doc.meta.fingerprint);
    let _ = writeln!(out, "n_samples\t{}", doc.n_samples);
    let _ = writeln!(out, "train_ll_mean\t{}", fmt_f64(doc.train_ll_mean));
    let _ = writeln!(out, "mean_dims\t{}", fmt_f64(doc.mean_dims));
    let _ = writeln!(out, "sec_per_sample\t{}", fmt_f64(doc.sec_per_sample));
    if let Some(eval) = &doc.eval {
        let _ = writeln!(out, "kendall_tau\t{}", fmt_f64(eval.kendall_tau));
        let _ = writeln!(out, "tau_p_value\t{}", fmt_f64(eval.tau_p_value));
        let _ = writeln!(out, "dcor\t{}", fmt_f64(eval.dcor));
        let _ = writeln!(out, "test_log_lik\t{}", fmt_f64(eval.test_log_lik));
    }
    std::fs::write(path, out).at_stage("persist")
}

pub fn read_report(path: &Path) -> Result<ReportDoc> {
    let text = std::fs::read_to_string(path).at_stage("ingest")?;
    let mut lines = text.lines();
    if lines.next() != Some("countnet-report v1") {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected 'countnet-report v1'".into(),
        });
    }
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for raw in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let key = parts.next().unwrap_or_default().to_string();
        let value = parts.next().unwrap_or_default().to_string();
        fields.insert(key, value);
    }
    let missing = |key: &str| CliError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("missing report field '{key}'"),
    };
    let get = |key: &str| fields.get(key).ok_or_else(|| missing(key));
    let getf = |key: &str| -> Result<f64> {
        parse_f64(get(key)?).ok_or_else(|| missing(key))
    };
    let model = match get("model")?.as_str() {
        "crp" => PriorKind::Crp,
        "gaussian" => PriorKind::Gaussian,
        other => {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("bad model '{other}'"),
            })
        }
    };
    let holdout = parse_scheme(get("holdout")?).ok_or_else(|| missing("holdout"))?;
    let train_fraction = match get("train_fraction")?.as_str() {
        "-" => None,
        v => Some(parse_f64(v).ok_or_else(|| missing("train_fraction"))?),
    };
    let eval = if holdout.is_some() {
        Some(EvalReport {
            kendall_tau: getf("kendall_tau")?,
            tau_p_value: getf("tau_p_value")?,
            dcor: getf("dcor")?,
            test_log_lik: getf("test_log_lik")?,
            sec_per_sample: getf("sec_per_sample")?,
            mean_dims: getf("mean_dims")?,
        })
    } else {
        None
    };
    Ok(ReportDoc {
        meta: RunMeta {
            model,
            n_nodes: 0,
            symmetric: false,
            hyper: Hyperparams::default(),
            k_seen: 1,
            seed: get("seed")?.parse().unwrap_or(0),
            holdout,
            train_fraction,
            fingerprint: get("fingerprint")?.clone(),
        },
        n_samples: get("n_samples")?.parse().unwrap_or(0),
        train_ll_mean: getf("train_ll_mean")?,
        mean_dims: getf("mean_dims")?,
        sec_per_sample: getf("sec_per_sample")?,
        eval,
    })
}

// ---------------------------------------------------------------------------
// traces and prediction grids

pub struct TraceRow {
    pub sample_index: usize,
    pub train_ll: f64,
    pub test_ll: Option<f64>,
    pub dims: usize,
    pub seconds: f64,
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str("countnet-trace v1\n");
    out.push_str("sample_index\ttrain_ll\ttest_ll\tdims\tseconds\n");
    for row in rows {
        let test = row.test_ll.map_or_else(|| "-".to_string(), fmt_f64);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            row.sample_index,
            fmt_f64(row.train_ll),
            test,
            row.dims,
            fmt_f64(row.seconds),
        );
    }
    std::fs::write(path, out).at_stage("persist")
}

/// Reads back per-sample wall-clock seconds (for re-evaluation).
pub fn read_trace_seconds(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).at_stage("ingest")?;
    let mut seconds = Vec::new();
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if fields.len() == 5 {
            if let Some(v) = parse_f64(fields[4]) {
                seconds.push(v);
            }
        }
    }
    Ok(seconds)
}

/// Writes the dense n-by-n predictive probability grid; row `i`, column
/// `j` holds the probability of the `(i, j)` interaction.
pub fn write_predicted(path: &Path, n_nodes: usize, grid: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str("countnet-predicted v1\n");
    let _ = writeln!(out, "nodes\t{n_nodes}");
    for i in 0..n_nodes {
        let row: Vec<String> = (0..n_nodes)
            .map(|j| fmt_f64(grid[i * n_nodes + j]))
            .collect();
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    std::fs::write(path, out).at_stage("persist")
}

// ---------------------------------------------------------------------------
// fingerprints

/// FNV-1a over the canonical text of the data plus the split parameters;
/// `compare` refuses reports whose fingerprints differ.
pub fn split_fingerprint(
    data: &CountMatrix,
    scheme: Option<HoldoutScheme>,
    fraction: Option<f64>,
    seed: u64,
) -> String {
    let mut canonical = String::new();
    let _ = write!(
        canonical,
        "scheme={};fraction={};seed={seed};nodes={};symmetric={};",
        scheme_name(scheme),
        fraction.map_or_else(|| "-".to_string(), fmt_f64),
        data.n_nodes(),
        data.is_symmetric(),
    );
    for ((i, j), count) in data.observed() {
        let _ = write!(canonical, "{i},{j},{};", fmt_f64(count));
    }
    format!("{:016x}", fnv1a64(canonical.as_bytes()))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
