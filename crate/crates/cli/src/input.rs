//! Reading configurations from the command line and from CSV files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use antisym::Configuration;

/// `"1,1"` or `"0.5, -0.25"` into coordinates.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>().with_context(|| format!("`{v}` in point `{s}` is not a number"))
        })
        .collect()
}

/// One configuration per row, `n * d` coordinates in particle order. A
/// first row that does not parse as numbers is taken as a header.
pub fn read_configurations(path: &Path, n: usize, d: usize) -> Result<Vec<Configuration>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let coords = match parsed {
            Ok(c) => c,
            Err(_) if line == 0 => continue,
            Err(e) => bail!("{} row {}: {e}", path.display(), line + 1),
        };
        if coords.len() != n * d {
            bail!(
                "{} row {}: {} values, expected n*d = {}",
                path.display(),
                line + 1,
                coords.len(),
                n * d
            );
        }
        if let Some(v) = coords.iter().find(|v| !v.is_finite()) {
            bail!("{} row {}: non-finite value {v}", path.display(), line + 1);
        }
        out.push(Configuration::new(n, d, coords)?);
    }
    Ok(out)
}
