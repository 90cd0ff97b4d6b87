//! Delimited-text data files and flat-section config files.
//!
//! Data files are plain CSV with a header row; `#`-prefixed lines carry
//! `key = value` metadata (the base period rides in `# tau0 = <seconds>`).
//! Numbers serialize with the shortest representation that parses back to
//! the same value, so round trips are lossless. Files are written to a
//! temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{BudgetEntry, KCurve, KCurvePoint, OmitReason, Style, Variant};
use crate::noise::NoiseKind;
use crate::series::TimeSeries;
use crate::sim::TruthRecord;

/// Named columns of equal length plus the base period and free metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<(String, Vec<f64>)>,
    pub tau0: f64,
    pub metadata: Vec<(String, String)>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| {
                Error::Usage(format!(
                    "no column `{name}`; available: {}",
                    self.columns
                        .iter()
                        .map(|(n, _)| n.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    /// A column as a time series at the dataset's base period.
    pub fn series(&self, name: &str) -> Result<TimeSeries> {
        TimeSeries::new(self.column(name)?.to_vec(), self.tau0)
    }
}

fn parse_meta_line(line: &str) -> Option<(String, String)> {
    let body = line.strip_prefix('#')?.trim();
    let (k, v) = body.split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

fn parse_number(path: &str, line_no: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        path: path.into(),
        line: line_no,
        msg: format!("{what}: not a number: `{field}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.into(),
            line: line_no,
            msg: format!("{what}: non-finite value `{field}` rejected"),
        });
    }
    Ok(v)
}

/// Reads a CSV data file. The base period comes from a `# tau0 = ...`
/// metadata line unless overridden.
pub fn read_csv(path: &Path, tau0_override: Option<f64>) -> Result<Dataset> {
    let pstr = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    let mut metadata = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(kv) = parse_meta_line(line) {
                metadata.push(kv);
            }
            continue;
        }
        match &header {
            None => {
                let names: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
                if names.iter().any(|n| n.is_empty()) {
                    return Err(Error::Parse {
                        path: pstr,
                        line: line_no,
                        msg: "empty column name in header".into(),
                    });
                }
                columns = vec![Vec::new(); names.len()];
                header = Some(names);
            }
            Some(names) => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != names.len() {
                    return Err(Error::Parse {
                        path: pstr,
                        line: line_no,
                        msg: format!(
                            "ragged row: {} fields, header has {}",
                            fields.len(),
                            names.len()
                        ),
                    });
                }
                for (col, field) in fields.iter().enumerate() {
                    let v = parse_number(&pstr, line_no, field, &format!("column `{}`", names[col]))?;
                    columns[col].push(v);
                }
            }
        }
    }
    let names = header.ok_or_else(|| Error::Parse {
        path: pstr.clone(),
        line: text.lines().count() + 1,
        msg: "no header row".into(),
    })?;
    let tau0 = match tau0_override {
        Some(t) => t,
        None => {
            let raw = metadata
                .iter()
                .find(|(k, _)| k == "tau0")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse {
                    path: pstr.clone(),
                    line: 1,
                    msg: "missing `# tau0 = <seconds>` metadata and no override".into(),
                })?;
            parse_number(&pstr, 1, &raw, "tau0")?
        }
    };
    if tau0.is_nan() || tau0 <= 0.0 {
        return Err(Error::Parse {
            path: pstr,
            line: 1,
            msg: format!("tau0 must be positive, got {tau0}"),
        });
    }
    Ok(Dataset {
        columns: names.into_iter().zip(columns).collect(),
        tau0,
        metadata,
    })
}

/// Atomically writes `content` to `path` (temp file + rename).
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let pstr = path.display().to_string();
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, content).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(&pstr, e))?;
    Ok(())
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Domain(format!(
            "refusing to serialize non-finite {name}: {v}"
        )));
    }
    Ok(())
}

/// Writes named columns with metadata; `tau0` rides in the metadata block.
pub fn write_csv(
    path: &Path,
    columns: &[(&str, &[f64])],
    tau0: f64,
    metadata: &[(String, String)],
) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::Domain("no columns to write".into()));
    }
    let rows = columns[0].1.len();
    if columns.iter().any(|(_, v)| v.len() != rows) {
        return Err(Error::ShapeMismatch("columns differ in length".into()));
    }
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# tau0 = {tau0}");
    let _ = writeln!(
        out,
        "{}",
        columns.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",")
    );
    for r in 0..rows {
        for (c, (name, v)) in columns.iter().enumerate() {
            require_finite(name, v[r])?;
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", v[r]);
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Writes a sensitivity curve: metadata comments, omitted points as
/// comment lines with reason codes, then
/// `m,tau,k,sigma_k,edf,style,variant` rows in full precision.
pub fn write_curve(curve: &KCurve, path: &Path, metadata: &[(String, String)]) -> Result<()> {
    if curve.points.is_empty() {
        return Err(Error::Domain("refusing to write an empty curve".into()));
    }
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# y = {}", curve.provenance.0);
    let _ = writeln!(out, "# x = {}", curve.provenance.1);
    for (m, reason) in &curve.omitted {
        let _ = writeln!(out, "# omitted m={m} reason={}", reason.code());
    }
    let _ = writeln!(out, "m,tau,k,sigma_k,edf,style,variant");
    for p in &curve.points {
        for (name, v) in [
            ("tau", p.tau),
            ("k", p.k),
            ("sigma_k", p.sigma_k),
            ("edf", p.edf),
        ] {
            require_finite(name, v)?;
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.m, p.tau, p.k, p.sigma_k, p.edf, curve.style, curve.variant
        );
    }
    write_atomic(path, &out)
}

/// Reads a curve file written by [`write_curve`].
pub fn read_curve(path: &Path) -> Result<KCurve> {
    let pstr = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    let mut points = Vec::new();
    let mut omitted = Vec::new();
    let mut style: Option<Style> = None;
    let mut variant: Option<Variant> = None;
    let mut y_name = "y".to_string();
    let mut x_name = "x".to_string();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let body = rest.trim();
            if let Some(om) = body.strip_prefix("omitted ") {
                let mut m = None;
                let mut reason = None;
                for tok in om.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("m=") {
                        m = v.parse::<usize>().ok();
                    }
                    if let Some(v) = tok.strip_prefix("reason=") {
                        reason = OmitReason::from_code(v);
                    }
                }
                match (m, reason) {
                    (Some(m), Some(r)) => omitted.push((m, r)),
                    _ => {
                        return Err(Error::Parse {
                            path: pstr,
                            line: line_no,
                            msg: format!("bad omitted line: `{line}`"),
                        })
                    }
                }
            } else if let Some((k, v)) = parse_meta_line(line) {
                if k == "y" {
                    y_name = v;
                } else if k == "x" {
                    x_name = v;
                }
            }
            continue;
        }
        if !seen_header {
            if line != "m,tau,k,sigma_k,edf,style,variant" {
                return Err(Error::Parse {
                    path: pstr,
                    line: line_no,
                    msg: format!("unexpected curve header `{line}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                path: pstr,
                line: line_no,
                msg: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let m: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            path: pstr.clone(),
            line: line_no,
            msg: format!("bad m: `{}`", fields[0]),
        })?;
        let tau = parse_number(&pstr, line_no, fields[1], "tau")?;
        let k = parse_number(&pstr, line_no, fields[2], "k")?;
        let sigma_k = parse_number(&pstr, line_no, fields[3], "sigma_k")?;
        let edf = parse_number(&pstr, line_no, fields[4], "edf")?;
        let row_style = Style::from_token(fields[5].trim()).ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: line_no,
            msg: format!("bad style `{}`", fields[5]),
        })?;
        let row_variant = Variant::from_token(fields[6].trim()).ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: line_no,
            msg: format!("bad variant `{}`", fields[6]),
        })?;
        if *style.get_or_insert(row_style) != row_style
            || *variant.get_or_insert(row_variant) != row_variant
        {
            return Err(Error::Parse {
                path: pstr,
                line: line_no,
                msg: "style/variant differ between rows".into(),
            });
        }
        points.push(KCurvePoint {
            m,
            tau,
            k,
            sigma_k,
            edf,
        });
    }
    let (style, variant) = match (style, variant) {
        (Some(s), Some(v)) => (s, v),
        _ => {
            return Err(Error::Parse {
                path: pstr,
                line: text.lines().count() + 1,
                msg: "curve file has no data rows".into(),
            })
        }
    };
    KCurve::new(points, style, variant, (y_name, x_name), omitted)
}

/// A `[section]` of `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str, path: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 0,
            msg: format!("section [{}] missing key `{key}`", self.name),
        })
    }
}

/// Parses a flat-section config file: `[section]` headers, `key = value`
/// lines, `#` comments.
pub fn read_sections(path: &Path) -> Result<Vec<Section>> {
    let pstr = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push(Section {
                name: name.trim().to_string(),
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: idx + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = sections.last_mut().ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: idx + 1,
            msg: "key before any [section]".into(),
        })?;
        section
            .entries
            .push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(sections)
}

/// Reads a budget config: one `[entry]` section per effect with `name`,
/// `k`, and either `sigma_x` or the pair `sigma_x_a` / `sigma_x_b`.
pub fn read_budget(path: &Path) -> Result<Vec<BudgetEntry>> {
    let pstr = path.display().to_string();
    let mut entries = Vec::new();
    for section in read_sections(path)? {
        if section.name != "entry" {
            continue;
        }
        let name = section.require("name", &pstr)?.to_string();
        let k = parse_number(&pstr, 0, section.require("k", &pstr)?, "k")?;
        let entry = match section.get("sigma_x") {
            Some(s) => BudgetEntry::new(name, k, parse_number(&pstr, 0, s, "sigma_x")?)?,
            None => {
                let a = parse_number(&pstr, 0, section.require("sigma_x_a", &pstr)?, "sigma_x_a")?;
                let b = parse_number(&pstr, 0, section.require("sigma_x_b", &pstr)?, "sigma_x_b")?;
                BudgetEntry::from_parts(name, k, a, b)?
            }
        };
        entries.push(entry);
    }
    Ok(entries)
}

/// Serializes the injected truth of a simulation run (scalars only).
pub fn write_truth(truth: &TruthRecord, path: &Path, metadata: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "name = {}", truth.scenario_name);
    let _ = writeln!(out, "seed = {}", truth.master_seed);
    let _ = writeln!(out, "n = {}", truth.n);
    let _ = writeln!(out, "tau0 = {}", truth.tau0);
    let _ = writeln!(out, "y_bar = {}", truth.y_bar);
    for e in &truth.effects {
        let _ = writeln!(out, "\n[effect]");
        let _ = writeln!(out, "name = {}", e.name);
        let _ = writeln!(out, "k = {}", e.k);
        let _ = writeln!(out, "kind = {}", e.niv_kind);
        let _ = writeln!(out, "level = {}", e.niv_level);
        let _ = writeln!(out, "seed = {}", e.niv_seed);
        let _ = writeln!(out, "delay = {}", e.delay_steps);
        let _ = writeln!(out, "integral = {}", e.integral_steps);
        if let Some(l) = e.measurement_noise_level {
            let _ = writeln!(out, "measurement_noise_level = {l}");
        }
    }
    write_atomic(path, &out)
}

/// Scalar truth parsed back from a truth file.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthSummary {
    pub scenario_name: String,
    pub seed: u64,
    pub n: usize,
    pub tau0: f64,
    pub effects: Vec<(String, f64, i64, usize, Option<NoiseKind>)>,
}

/// Reads the scalar truth back; effects are
/// `(name, k, delay, integral, kind)`.
pub fn read_truth(path: &Path) -> Result<TruthSummary> {
    let pstr = path.display().to_string();
    let sections = read_sections(path)?;
    let scenario = sections
        .iter()
        .find(|s| s.name == "scenario")
        .ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: 0,
            msg: "missing [scenario] section".into(),
        })?;
    let mut effects = Vec::new();
    for s in sections.iter().filter(|s| s.name == "effect") {
        effects.push((
            s.require("name", &pstr)?.to_string(),
            parse_number(&pstr, 0, s.require("k", &pstr)?, "k")?,
            s.require("delay", &pstr)?
                .parse::<i64>()
                .map_err(|_| Error::Parse {
                    path: pstr.clone(),
                    line: 0,
                    msg: "bad delay".into(),
                })?,
            s.require("integral", &pstr)?
                .parse::<usize>()
                .map_err(|_| Error::Parse {
                    path: pstr.clone(),
                    line: 0,
                    msg: "bad integral".into(),
                })?,
            s.get("kind").and_then(NoiseKind::from_token),
        ));
    }
    Ok(TruthSummary {
        scenario_name: scenario.require("name", &pstr)?.to_string(),
        seed: scenario
            .require("seed", &pstr)?
            .parse()
            .map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: 0,
                msg: "bad seed".into(),
            })?,
        n: scenario
            .require("n", &pstr)?
            .parse()
            .map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: 0,
                msg: "bad n".into(),
            })?,
        tau0: parse_number(&pstr, 0, scenario.require("tau0", &pstr)?, "tau0")?,
        effects,
    })
}
