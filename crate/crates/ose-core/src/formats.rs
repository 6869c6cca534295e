//! Plain-text interchange formats.
//!
//! * `OSE1 <m> <n> <s>` header, then one line per nonempty column:
//!   `<col> <k> <row_1> <val_1> ... <row_k> <val_k>`.
//! * `OSE1D <m> <n>` header, then one line of row-major values per row.
//! * `OSEINST <n> <d> <r>` header, then `C: <d*r indices>` and
//!   `S: <d*r signs as +-1>`.
//!
//! Reals are written with 17 significant digits so parsing reproduces the
//! exact f64. Parsers skip blank lines and `#` comments.

use crate::adversary::{CollisionCertificate, TraceRecord, TraceStep};
use crate::embedcheck::FailureEstimate;
use crate::error::{Error, Result};
use crate::hardinstances::HardInstance;
use crate::sparsemat::{DenseMatrix, SketchMatrix};
use std::fmt::Write as _;

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_token<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| Error::Parse(format!("bad {what}: {tok:?}")))
}

pub fn encode_sketch(pi: &SketchMatrix) -> String {
    let mut out = format!("OSE1 {} {} {}\n", pi.rows(), pi.cols(), pi.max_col_nnz());
    for c in 0..pi.cols() {
        let col = pi.column(c);
        if col.is_empty() {
            continue;
        }
        let _ = write!(out, "{} {}", c, col.len());
        for &(r, v) in col {
            let _ = write!(out, " {} {}", r, fmt_real(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_sketch(text: &str) -> Result<SketchMatrix> {
    let mut lines = data_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty OSE1 input".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "OSE1" {
        return Err(Error::Parse(format!("bad OSE1 header: {header:?}")));
    }
    let m: usize = parse_token(toks[1], "row count")?;
    let n: usize = parse_token(toks[2], "column count")?;
    let s: usize = parse_token(toks[3], "column sparsity")?;
    let mut columns: Vec<Option<Vec<(usize, f64)>>> = vec![None; n];
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::Parse(format!("short column line: {line:?}")));
        }
        let c: usize = parse_token(toks[0], "column index")?;
        if c >= n {
            return Err(Error::Parse(format!("column index {c} out of range")));
        }
        if columns[c].is_some() {
            return Err(Error::Parse(format!("duplicate column {c}")));
        }
        let k: usize = parse_token(toks[1], "entry count")?;
        if toks.len() != 2 + 2 * k {
            return Err(Error::Parse(format!(
                "column {c}: expected {k} entries, line has {} tokens",
                toks.len()
            )));
        }
        let mut entries = Vec::with_capacity(k);
        for pair in toks[2..].chunks_exact(2) {
            let r: usize = parse_token(pair[0], "row index")?;
            let v: f64 = parse_token(pair[1], "value")?;
            entries.push((r, v));
        }
        columns[c] = Some(entries);
    }
    SketchMatrix::new(m, n, s, columns.into_iter().map(Option::unwrap_or_default).collect())
}

pub fn encode_dense(a: &DenseMatrix) -> String {
    let mut out = format!("OSE1D {} {}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        let row: Vec<String> = a.row(r).iter().map(|&v| fmt_real(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_dense(text: &str) -> Result<DenseMatrix> {
    let mut lines = data_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty OSE1D input".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "OSE1D" {
        return Err(Error::Parse(format!("bad OSE1D header: {header:?}")));
    }
    let m: usize = parse_token(toks[1], "row count")?;
    let n: usize = parse_token(toks[2], "column count")?;
    let mut entries = Vec::with_capacity(m * n);
    for line in lines {
        for tok in line.split_whitespace() {
            entries.push(parse_token::<f64>(tok, "value")?);
        }
    }
    DenseMatrix::new(m, n, entries)
}

pub fn encode_instance(inst: &HardInstance) -> String {
    let mut out = format!("OSEINST {} {} {}\n", inst.n(), inst.d(), inst.r());
    let sel: Vec<String> = inst.selectors().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "C: {}", sel.join(" "));
    let sgn: Vec<String> = inst.signs().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "S: {}", sgn.join(" "));
    out
}

pub fn parse_instance(text: &str) -> Result<HardInstance> {
    let mut lines = data_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty OSEINST input".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "OSEINST" {
        return Err(Error::Parse(format!("bad OSEINST header: {header:?}")));
    }
    let n: usize = parse_token(toks[1], "ambient dimension")?;
    let d: usize = parse_token(toks[2], "subspace dimension")?;
    let r: usize = parse_token(toks[3], "block size")?;
    let mut selectors = None;
    let mut signs = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("C:") {
            let v: Result<Vec<usize>> = rest
                .split_whitespace()
                .map(|t| parse_token(t, "selector"))
                .collect();
            selectors = Some(v?);
        } else if let Some(rest) = line.strip_prefix("S:") {
            let v: Result<Vec<i8>> = rest
                .split_whitespace()
                .map(|t| parse_token::<i8>(t.trim_start_matches('+'), "sign"))
                .collect();
            signs = Some(v?);
        } else {
            return Err(Error::Parse(format!("unexpected line: {line:?}")));
        }
    }
    let selectors = selectors.ok_or_else(|| Error::Parse("missing C: line".into()))?;
    let signs = signs.ok_or_else(|| Error::Parse("missing S: line".into()))?;
    HardInstance::new(n, d, r, selectors, signs)
}

pub const ESTIMATE_CSV_HEADER: &str =
    "m,n,d,r_or_family,eps,trials,failures,p_hat,wilson_low,wilson_high,seed";

pub fn estimate_csv_row(
    m: usize,
    n: usize,
    d: usize,
    r_or_family: &str,
    eps: f64,
    est: &FailureEstimate,
    seed: u64,
) -> String {
    format!(
        "{m},{n},{d},{r_or_family},{eps},{trials},{failures},{p_hat},{lo},{hi},{seed}",
        trials = est.trials,
        failures = est.failures,
        p_hat = est.p_hat,
        lo = est.wilson_low,
        hi = est.wilson_high,
    )
}

/// Key: value record for a collision certificate.
pub fn certificate_text(cert: &CollisionCertificate, trace_len: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "col_p: {}", cert.col_p);
    let _ = writeln!(out, "col_q: {}", cert.col_q);
    let _ = writeln!(out, "theta: {}", fmt_real(cert.theta));
    let rows: Vec<String> = cert.shared_heavy_rows.iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "shared_heavy_rows: {}", rows.join(" "));
    let _ = writeln!(out, "inner_product: {}", fmt_real(cert.inner_product));
    let _ = writeln!(out, "p_prime: {}", cert.p_prime);
    let _ = writeln!(out, "q_prime: {}", cert.q_prime);
    let _ = writeln!(out, "blocks_equal: {}", cert.blocks_equal);
    let _ = writeln!(out, "witness_dim: {}", cert.witness.dim());
    let w: Vec<String> = cert
        .witness
        .entries()
        .iter()
        .map(|&(i, v)| format!("{}:{}", i, fmt_real(v)))
        .collect();
    let _ = writeln!(out, "witness: {}", w.join(" "));
    match cert.anticonc_prob {
        Some(p) => {
            let _ = writeln!(out, "anticonc_prob: {p}");
        }
        None => {
            let _ = writeln!(out, "anticonc_prob: none");
        }
    }
    match cert.anticonc_method {
        Some(m) => {
            let _ = writeln!(out, "anticonc_method: {m}");
        }
        None => {
            let _ = writeln!(out, "anticonc_method: none");
        }
    }
    let _ = writeln!(out, "trace_len: {trace_len}");
    out
}

/// One line per pair-finder event.
pub fn trace_lines(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        let _ = write!(
            out,
            "k={} j={} scan={} G={}->{} S={}->{} ",
            rec.k,
            rec.j,
            u8::from(rec.during_scan),
            rec.g_before,
            rec.g_after,
            rec.s_before,
            rec.s_after
        );
        match &rec.step {
            TraceStep::Pair { s_a, s_b, col_a, col_b } => {
                let _ = writeln!(out, "event=pair s_a={s_a} s_b={s_b} col_a={col_a} col_b={col_b}");
            }
            TraceStep::RowMarked { row } => {
                let _ = writeln!(out, "event=row_marked row={row}");
            }
            TraceStep::Skip => {
                let _ = writeln!(out, "event=skip");
            }
            TraceStep::NoPartner { col } => {
                let _ = writeln!(out, "event=no_partner col={col}");
            }
        }
    }
    out
}
