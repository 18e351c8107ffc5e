//! CSV import/export for datasets, chains, and result tables.
//!
//! Every file this module writes starts with a comment of the form
//! `# seed=.. M=.. m=.. version=..` so results stay traceable to the run
//! that produced them. Floats are written with Rust's shortest-roundtrip
//! formatting, which keeps reruns byte-identical and reads lossless.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::chain::Chain;
use crate::diagnostics::PosteriorSummary;
use crate::error::{Error, Result};
use crate::im::{ImDataset, ImRecord};
use crate::zip::ZipDataset;

/// Run metadata stamped into every output file.
#[derive(Debug, Clone, Copy)]
pub struct CsvMeta {
    pub seed: u64,
    pub total: usize,
    pub burn_in: usize,
}

impl CsvMeta {
    pub fn from_chain(chain: &Chain) -> Self {
        CsvMeta {
            seed: chain.seed(),
            total: chain.total(),
            burn_in: chain.burn_in(),
        }
    }

    fn comment(&self) -> String {
        format!(
            "# seed={} M={} m={} version={}\n",
            self.seed,
            self.total,
            self.burn_in,
            env!("CARGO_PKG_VERSION")
        )
    }
}

/// Writes through a temporary file in the target directory so readers never
/// observe a half-written table.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

struct RowReader<'a> {
    lines: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> RowReader<'a> {
    fn new(text: &'a str) -> Self {
        RowReader {
            lines: text.lines(),
            lineno: 0,
        }
    }

    /// Next non-comment, non-empty line.
    fn next_row(&mut self) -> Option<(usize, &'a str)> {
        loop {
            self.lineno += 1;
            let line = self.lines.next()?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((self.lineno, trimmed));
        }
    }

    fn expect_header(&mut self, expected: &str) -> Result<()> {
        match self.next_row() {
            Some((_, line)) if line.replace(' ', "") == expected => Ok(()),
            Some((lineno, line)) => Err(Error::Parse {
                line: lineno,
                msg: format!("expected header {expected:?}, found {line:?}"),
            }),
            None => Err(Error::Parse {
                line: self.lineno,
                msg: format!("missing header {expected:?}"),
            }),
        }
    }
}

fn parse_fields(lineno: usize, line: &str, n: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != n {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {n} fields, got {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad number {f:?}"),
            })
        })
        .collect()
}

pub fn write_zip_dataset(path: &Path, data: &ZipDataset, meta: &CsvMeta) -> Result<()> {
    let mut out = meta.comment();
    out.push_str("x,y\n");
    for (x, y) in data.x().iter().zip(data.y()) {
        let _ = writeln!(out, "{x},{y}");
    }
    atomic_write(path, &out)
}

pub fn read_zip_dataset(path: &Path) -> Result<ZipDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut rd = RowReader::new(&text);
    rd.expect_header("x,y")?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    while let Some((lineno, line)) = rd.next_row() {
        let v = parse_fields(lineno, line, 2)?;
        xs.push(v[0]);
        ys.push(v[1]);
    }
    ZipDataset::new(xs, ys)
}

const IM_HEADER: &str = "Ed,Eq,Id,Iq,Ud,Uq,omega,y_Ed,y_Eq,y_omega,y_Id,y_Iq";

pub fn write_im_dataset(path: &Path, data: &ImDataset, meta: &CsvMeta) -> Result<()> {
    let mut out = meta.comment();
    out.push_str(IM_HEADER);
    out.push('\n');
    for r in data.records() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.ed, r.eq, r.id, r.iq, r.ud, r.uq, r.omega, r.y_ed, r.y_eq, r.y_omega, r.y_id, r.y_iq
        );
    }
    atomic_write(path, &out)
}

pub fn read_im_dataset(path: &Path) -> Result<ImDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut rd = RowReader::new(&text);
    rd.expect_header(IM_HEADER)?;
    let mut records = Vec::new();
    while let Some((lineno, line)) = rd.next_row() {
        let v = parse_fields(lineno, line, 12)?;
        records.push(ImRecord {
            ed: v[0],
            eq: v[1],
            id: v[2],
            iq: v[3],
            ud: v[4],
            uq: v[5],
            omega: v[6],
            y_ed: v[7],
            y_eq: v[8],
            y_omega: v[9],
            y_id: v[10],
            y_iq: v[11],
        });
    }
    ImDataset::new(records)
}

/// Writes every iteration of the chain (burn-in included) with one column
/// per parameter.
pub fn write_chain(path: &Path, chain: &Chain) -> Result<()> {
    let mut out = CsvMeta::from_chain(chain).comment();
    out.push_str(&chain.param_names().join(","));
    out.push('\n');
    for i in 0..chain.total() {
        let row = chain.row(i);
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    atomic_write(path, &out)
}

/// Writes one `param,mean,std,ci_lo,ci_hi` row per named summary.
pub fn write_summaries(
    path: &Path,
    rows: &[(String, PosteriorSummary)],
    meta: &CsvMeta,
) -> Result<()> {
    let mut out = meta.comment();
    out.push_str("param,mean,std,ci_lo,ci_hi\n");
    for (name, s) in rows {
        let _ = writeln!(out, "{name},{},{},{},{}", s.mean, s.std, s.ci_lo, s.ci_hi);
    }
    atomic_write(path, &out)
}

/// Writes one `bin_lo,bin_hi,count` row per histogram bin.
pub fn write_histogram(path: &Path, summary: &PosteriorSummary, meta: &CsvMeta) -> Result<()> {
    let mut out = meta.comment();
    out.push_str("bin_lo,bin_hi,count\n");
    let h = &summary.histogram;
    for (i, &c) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{c}", h.edges[i], h.edges[i + 1]);
    }
    atomic_write(path, &out)
}

/// One row of a benchmark table: a method's estimate of one quantity, with
/// the truth and signed relative error when the truth is known.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: String,
    pub param: String,
    pub estimate: f64,
    pub truth: Option<f64>,
    pub error_pct: Option<f64>,
}

impl BenchRow {
    pub fn new(method: &str, param: &str, estimate: f64, truth: Option<f64>) -> Self {
        let error_pct = truth.and_then(|t| {
            (t != 0.0).then(|| 100.0 * (estimate - t) / t.abs())
        });
        BenchRow {
            method: method.into(),
            param: param.into(),
            estimate,
            truth,
            error_pct,
        }
    }
}

pub fn write_bench(path: &Path, rows: &[BenchRow], meta: &CsvMeta) -> Result<()> {
    let mut out = meta.comment();
    out.push_str("method,param,estimate,truth,error_pct\n");
    for r in rows {
        let truth = r.truth.map_or_else(String::new, |t| t.to_string());
        let err = r.error_pct.map_or_else(String::new, |e| e.to_string());
        let _ = writeln!(out, "{},{},{},{truth},{err}", r.method, r.param, r.estimate);
    }
    atomic_write(path, &out)
}
