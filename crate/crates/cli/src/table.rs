//! Versioned CSV tables and atomic file output.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const SCHEMA_LINE: &str = "# varprop-csv v1";

pub const BENCH_HEADER: [&str; 6] = ["method", "dim", "t_norm", "l2_mean", "l2_std", "n"];
pub const GRAPHENE_HEADER: [&str; 4] = ["p2", "delta_std", "delta_var", "convention"];
pub const HUBBARD_HEADER: [&str; 7] = ["t_over_u", "level_index", "e_exact", "e_std", "e_var", "err_std", "err_var"];
pub const HUBBARD_AGGREGATE_HEADER: [&str; 10] = [
    "t_over_u",
    "first_half_std",
    "first_half_var",
    "upper_half_std",
    "upper_half_var",
    "n_levels",
    "min_weight",
    "flagged",
    "c1_im",
    "c2_re",
];

/// Schema line, `# key = value` metadata comments, header, rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "{SCHEMA_LINE}")?;
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(SCHEMA_LINE) {
            bail!("missing `{SCHEMA_LINE}` schema line");
        }
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in lines {
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { meta, header, rows })
    }

    pub fn has_header(&self, header: &[&str]) -> bool {
        self.header.iter().map(String::as_str).eq(header.iter().copied())
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).with_context(|| format!("CSV lacks column `{name}`"))
    }

    pub fn f64_at(&self, row: usize, col: usize) -> Result<f64> {
        let v = &self.rows[row][col];
        v.parse().with_context(|| format!("row {}: `{v}` is not a number", row + 1))
    }
}

/// Shortest round-trip representation, so files are byte-stable.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Fails early if `path` cannot be an output file.
pub fn check_output_path(path: &Path) -> Result<()> {
    if path.is_dir() {
        bail!("output path {} is a directory", path.display());
    }
    let parent = parent_dir(path);
    if !parent.is_dir() {
        bail!("output directory {} does not exist", parent.display());
    }
    Ok(())
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder
        .tempfile_in(parent_dir(path))
        .with_context(|| format!("creating temporary file for {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
