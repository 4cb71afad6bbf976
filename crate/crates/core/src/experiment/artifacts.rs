//! CSV series, JSON verdicts and the run manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{DiagnosticsRow, MonitorVerdict, PairDiffRow};
use crate::error::{Error, Result};

pub const SERIES_HEADER: &str = "# critical-ns series v1";
pub const PAIR_HEADER: &str = "# critical-ns pair-diff v1";

pub const SERIES_COLUMNS: [&str; 18] = [
    "t",
    "step",
    "x_minus1",
    "x0",
    "x1",
    "int_x1",
    "theorem_lhs",
    "grad_linf",
    "int_grad_linf",
    "omega_x0",
    "int_omega_x0",
    "h1",
    "h2",
    "h3",
    "energy_l2",
    "div_residual",
    "dtv_x_minus1",
    "nonlinear_max",
];

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// 17 significant digits, exact on re-parse.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::new();
    out.push_str(SERIES_HEADER);
    out.push('\n');
    out.push_str(&SERIES_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let vals = [
            r.x_minus1,
            r.x0,
            r.x1,
            r.int_x1,
            r.theorem_lhs,
            r.grad_linf,
            r.int_grad_linf,
            r.omega_x0,
            r.int_omega_x0,
            r.h1,
            r.h2,
            r.h3,
            r.energy_l2,
            r.div_residual,
            r.dtv_x_minus1,
            r.nonlinear_max,
        ];
        let _ = write!(out, "{},{}", num(r.t), r.step);
        for v in vals {
            out.push(',');
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    out
}

fn data_lines<'a>(text: &'a str, header: &str, columns: &[&str]) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => return Err(Error::Csv(format!("expected header `{header}`, found `{h}`"))),
        None => return Err(Error::Csv("empty file".into())),
    }
    let names = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if names != columns.join(",") {
        return Err(Error::Csv(format!("unexpected column line `{names}`")));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Csv(format!(
                "line {}: {} fields, expected {}",
                i + 1,
                fields.len(),
                columns.len()
            )));
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn parse_f(line: usize, col: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Csv(format!("line {line}: column `{col}` is not a number: `{s}`")))
}

/// Parses a series CSV and checks the row invariants: increasing time and
/// nondecreasing accumulated columns.
pub fn parse_series_csv(text: &str) -> Result<Vec<DiagnosticsRow>> {
    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    for (line, f) in data_lines(text, SERIES_HEADER, &SERIES_COLUMNS)? {
        let mut v = [0.0f64; 18];
        for (c, slot) in v.iter_mut().enumerate() {
            if c != 1 {
                *slot = parse_f(line, SERIES_COLUMNS[c], f[c])?;
            }
        }
        let step: u64 = f[1]
            .parse()
            .map_err(|_| Error::Csv(format!("line {line}: bad step `{}`", f[1])))?;
        let row = DiagnosticsRow {
            t: v[0],
            step,
            x_minus1: v[2],
            x0: v[3],
            x1: v[4],
            int_x1: v[5],
            theorem_lhs: v[6],
            grad_linf: v[7],
            int_grad_linf: v[8],
            omega_x0: v[9],
            int_omega_x0: v[10],
            h1: v[11],
            h2: v[12],
            h3: v[13],
            energy_l2: v[14],
            div_residual: v[15],
            dtv_x_minus1: v[16],
            nonlinear_max: v[17],
        };
        if let Some(p) = rows.last() {
            if !(row.t > p.t) || row.step <= p.step {
                return Err(Error::Csv(format!("line {line}: time or step does not increase")));
            }
            if row.int_x1 < p.int_x1 || row.int_omega_x0 < p.int_omega_x0 {
                return Err(Error::Csv(format!("line {line}: accumulated column decreases")));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn pair_csv(rows: &[PairDiffRow]) -> String {
    let mut out = format!("{PAIR_HEADER}\nt,diff_x_minus1,diff_x1,int_diff_x1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(r.t),
            num(r.diff_x_minus1),
            num(r.diff_x1),
            num(r.int_diff_x1)
        );
    }
    out
}

/// Plain table with a header comment, a column line and numeric rows.
pub fn table_csv(header: &str, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("{header}\n{}\n", columns.join(","));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn verdicts_json(verdicts: &[MonitorVerdict]) -> Result<String> {
    Ok(serde_json::to_string_pretty(verdicts)? + "\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub name: String,
    pub holds: bool,
    pub applicable: bool,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub config: std::collections::BTreeMap<String, String>,
    pub verdicts: Vec<VerdictSummary>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects what a run writes so the manifest can list every file.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        let entry = FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        };
        match self.files.iter_mut().find(|f| f.path == name) {
            Some(f) => *f = entry,
            None => self.files.push(entry),
        }
        Ok(path)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `manifest.json`; it lists every earlier file but not itself.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.files = self.files.clone();
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write("manifest.json", text.as_bytes())?;
        Ok(manifest)
    }
}

/// Recomputes each listed checksum; returns the names that do not match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let m: RunManifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
    let mut bad = Vec::new();
    for f in &m.files {
        match std::fs::read(dir.join(&f.path)) {
            Ok(b) if sha256_hex(&b) == f.sha256 && b.len() as u64 == f.bytes => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}

pub fn summarize(verdicts: &[MonitorVerdict]) -> Vec<VerdictSummary> {
    verdicts
        .iter()
        .map(|v| VerdictSummary {
            name: v.name.clone(),
            holds: v.holds,
            applicable: v.applicable,
            worst_margin: v.worst_margin,
        })
        .collect()
}
