//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! that parsing a file returns the exact values that were written.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hypsorb::eigen::EigenSample;
use hypsorb::series::TimeSeries;
use serde::Serialize;

pub const PROBE_PREFIX: &str = "N_at_";

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// The columns of a series file: `t_star`, `sigma` and one density per probe.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub probes: Vec<f64>,
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `values[j][p]`
    pub values: Vec<Vec<f64>>,
}

impl From<&TimeSeries> for SeriesTable {
    fn from(s: &TimeSeries) -> Self {
        SeriesTable {
            probes: s.probes.clone(),
            times: s.times.clone(),
            sigma: s.sigma.clone(),
            values: s.probe_values.clone(),
        }
    }
}

impl SeriesTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t_star".to_string(), "sigma".to_string()];
        h.extend(self.probes.iter().map(|z| format!("{PROBE_PREFIX}{z}")));
        h
    }
}

fn write_comment(out: &mut impl Write, comment: &str) -> std::io::Result<()> {
    for line in comment.lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Writes `comment` as `#` lines, then the table.
pub fn write_series(out: impl Write, table: &SeriesTable, comment: &str) -> Result<()> {
    if table.times.windows(2).any(|w| w[1] <= w[0]) {
        bail!("series times are not strictly increasing");
    }
    let mut out = BufWriter::new(out);
    write_comment(&mut out, comment)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.header())?;
    for (j, t) in table.times.iter().enumerate() {
        let mut record = vec![format_float(*t), format_float(table.sigma[j])];
        record.extend(table.values[j].iter().map(|v| format_float(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
}

fn parse_field(field: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .with_context(|| format!("row {row}: `{field}` is not a number"))
}

pub fn read_series(input: impl Read) -> Result<SeriesTable> {
    let mut r = csv_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "t_star" || &header[1] != "sigma" {
        bail!(
            "expected header `t_star,sigma,...`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    let probes = header
        .iter()
        .skip(2)
        .map(|h| {
            h.strip_prefix(PROBE_PREFIX)
                .with_context(|| format!("unexpected column `{h}`"))?
                .parse::<f64>()
                .with_context(|| format!("bad probe position in `{h}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = SeriesTable {
        probes,
        times: Vec::new(),
        sigma: Vec::new(),
        values: Vec::new(),
    };
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let nums = record
            .iter()
            .map(|f| parse_field(f, row + 1))
            .collect::<Result<Vec<_>>>()?;
        table.times.push(nums[0]);
        table.sigma.push(nums[1]);
        table.values.push(nums[2..].to_vec());
    }
    Ok(table)
}

pub fn write_eigen_samples(out: impl Write, samples: &[EigenSample], comment: &str) -> Result<()> {
    let mut out = BufWriter::new(out);
    write_comment(&mut out, comment)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "f1", "f2", "re_e", "im_e"])?;
    for s in samples {
        w.write_record([s.alpha, s.f1, s.f2, s.re_e, s.im_e].map(format_float))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column `z,value` profile, skipping `#` lines and a header.
pub fn read_profile(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut z = Vec::new();
    let mut v = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("{}:{}: expected two columns", path.display(), i + 1);
        };
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                z.push(a);
                v.push(b);
            }
            _ if z.is_empty() => continue,
            _ => bail!("{}:{}: not a number", path.display(), i + 1),
        }
    }
    Ok((z, v))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// `dir/name.ext`, creating `dir` when needed.
pub fn artifact(dir: &Path, name: &str, ext: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(format!("{name}.{ext}")))
}
