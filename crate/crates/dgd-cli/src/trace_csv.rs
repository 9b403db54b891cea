//! Trace CSV format. One row per iteration, `# key=value` metadata lines
//! before the header, every float serialized with full round-trip precision
//! so `parse(to_csv(x)) == x` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

pub const HEADER: &str = "t,dist,cost_gap,grad_sq,dev_sq,E_t,e_t,bound";
const COLUMNS: usize = 8;

/// One iteration. The last three columns are empty when the quantity is
/// undefined at that t (log metrics past a zero, bound not applicable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub t: usize,
    pub dist: f64,
    pub cost_gap: f64,
    pub grad_sq: f64,
    pub dev_sq: f64,
    pub log_dist: Option<f64>,
    pub log_gap: Option<f64>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTrace {
    /// Ordered key=value pairs, serialized as `# key=value` lines.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<CsvRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl CsvTrace {
    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        debug_assert!(!value.contains('\n'));
        self.metadata.push((key.to_string(), value));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.dist,
                r.cost_gap,
                r.grad_sq,
                r.dev_sq,
                cell(r.log_dist),
                cell(r.log_gap),
                cell(r.bound)
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, msg: String| CliError::Data(format!("line {line}: {msg}"));
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if !saw_header {
                if let Some(rest) = line.strip_prefix("# ") {
                    let (k, v) = rest
                        .split_once('=')
                        .ok_or_else(|| bad(n, "metadata line without '='".into()))?;
                    metadata.push((k.to_string(), v.to_string()));
                    continue;
                }
                if line != HEADER {
                    return Err(bad(n, format!("expected header '{HEADER}', got '{line}'")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != COLUMNS {
                return Err(bad(n, format!("expected {COLUMNS} columns, got {}", fields.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| bad(n, format!("bad number '{s}'")))
            };
            let opt = |s: &str| -> Result<Option<f64>, CliError> {
                if s.is_empty() { Ok(None) } else { num(s).map(Some) }
            };
            rows.push(CsvRow {
                t: fields[0].parse().map_err(|_| bad(n, format!("bad index '{}'", fields[0])))?,
                dist: num(fields[1])?,
                cost_gap: num(fields[2])?,
                grad_sq: num(fields[3])?,
                dev_sq: num(fields[4])?,
                log_dist: opt(fields[5])?,
                log_gap: opt(fields[6])?,
                bound: opt(fields[7])?,
            });
        }
        if !saw_header {
            return Err(CliError::Data("missing header row".into()));
        }
        Ok(CsvTrace { metadata, rows })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv()).map_err(|e| CliError::Io(path.to_path_buf(), e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsvTrace {
        let mut t = CsvTrace::default();
        t.push_meta("problem", "ridge_ls");
        t.push_meta("eta_spec", "0.6/(L*tau)");
        t.push_meta("eta", 0.1 + 0.2);
        t.rows = vec![
            CsvRow {
                t: 0,
                dist: 1.0 / 3.0,
                cost_gap: 5e-324,
                grad_sq: f64::MAX,
                dev_sq: -0.0,
                log_dist: Some(0.0),
                log_gap: None,
                bound: Some(1.2345678901234567),
            },
            CsvRow {
                t: 1,
                dist: 1e-300,
                cost_gap: 0.1,
                grad_sq: 2.5e-17,
                dev_sq: 0.0,
                log_dist: None,
                log_gap: Some(-700.5),
                bound: None,
            },
        ];
        t
    }

    #[test]
    fn round_trips_exactly() {
        let t = sample();
        let back = CsvTrace::parse(&t.to_csv()).unwrap();
        assert_eq!(t, back);
        // serialization is stable too
        assert_eq!(t.to_csv(), back.to_csv());
    }

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let t = sample();
        t.save(&path).unwrap();
        assert_eq!(CsvTrace::load(&path).unwrap(), t);
    }

    #[test]
    fn metadata_value_may_contain_equals() {
        let mut t = CsvTrace::default();
        t.push_meta("minimizer", "grad_norm<=1e-10");
        t.push_meta("eta_spec", "L=measured");
        let back = CsvTrace::parse(&t.to_csv()).unwrap();
        assert_eq!(back.meta("minimizer"), Some("grad_norm<=1e-10"));
        assert_eq!(back.meta("eta_spec"), Some("L=measured"));
    }

    #[test]
    fn header_is_required_and_fixed() {
        assert!(CsvTrace::parse("").is_err());
        assert!(CsvTrace::parse("t,dist\n").is_err());
        assert!(CsvTrace::parse(HEADER).unwrap().rows.is_empty());
    }

    #[test]
    fn rejects_malformed_rows() {
        let text = format!("{HEADER}\n0,1,2,3\n");
        assert!(CsvTrace::parse(&text).is_err());
        let text = format!("{HEADER}\n0,1,2,3,4,x,,\n");
        assert!(CsvTrace::parse(&text).is_err());
        let text = format!("{HEADER}\n-1,1,2,3,4,,,\n");
        assert!(CsvTrace::parse(&text).is_err());
        let text = format!("{HEADER}\n0,1,2,3,4,,,\n");
        let ok = CsvTrace::parse(&text).unwrap();
        assert_eq!(ok.rows.len(), 1);
        assert_eq!(ok.rows[0].log_dist, None);
    }
}
