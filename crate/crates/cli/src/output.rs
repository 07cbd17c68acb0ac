//! CSV and JSON emission with reproducibility headers.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

/// Metadata written at the top of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    /// Scaling law with its numeric exponent.
    pub mu_law: String,
}

impl Meta {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: Option<u64>, mu_exponent: f64, timestamp: bool) -> Self {
        let canonical = serde_json::to_vec(config).expect("config serializes");
        let config_sha256 = hex::encode(Sha256::digest(&canonical));
        let timestamp_unix = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Meta {
            command: command.to_string(),
            config_sha256,
            seed,
            timestamp_unix,
            mu_law: format!("mu = k^{{(N-2)/(N-2-frakm)}} = k^{}", fmt_f64(mu_exponent)),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = format!("# ringbubble {}\n# config_sha256: {}\n", self.command, self.config_sha256);
        match self.seed {
            Some(seed) => s.push_str(&format!("# seed: {seed}\n")),
            None => s.push_str("# seed: none\n"),
        }
        if let Some(t) = self.timestamp_unix {
            s.push_str(&format!("# timestamp_unix: {t}\n"));
        }
        s.push_str(&format!("# {}\n", self.mu_law));
        s
    }
}

/// 17 significant digits; `nan`/`inf` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON with every float in `{:.16e}` form.
struct SciFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a Meta,
    result: &'a T,
}

/// `{"meta": ..., "result": ...}` followed by a newline.
pub fn to_json<T: Serialize>(meta: &Meta, result: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter { inner: PrettyFormatter::new() });
    Envelope { meta, result }.serialize(&mut ser).expect("in-memory JSON cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A table with a fixed header row.
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    footer: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new(), footer: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// A trailing `# key: value` line.
    pub fn footer(&mut self, line: String) {
        self.footer.push(line);
    }

    pub fn to_csv(&self, meta: &Meta) -> String {
        let mut s = meta.csv_header();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        for f in &self.footer {
            s.push_str("# ");
            s.push_str(f);
            s.push('\n');
        }
        s
    }

    /// Rows as objects keyed by column name.
    pub fn to_json_value(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), serde_json::to_value(v).expect("cells serialize")))
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": rows, "footer": self.footer })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(ts: bool) -> Meta {
        Meta::new("test", &serde_json::json!({"a": 1}), Some(7), 3.0, ts)
    }

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        let j = to_json(&meta(false), &serde_json::json!({"x": 0.1, "y": f64::NAN, "n": 3}));
        assert!(j.contains("\"x\": 1.0000000000000001e-1"));
        assert!(j.contains("\"y\": null"));
        assert!(j.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(back["result"]["x"], 0.1);
    }

    #[test]
    fn csv_header_and_timestamp_switch() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec![6usize.into(), 0.5.into()]);
        t.footer("slope: 1".into());
        let with = t.to_csv(&meta(true));
        let without = t.to_csv(&meta(false));
        assert!(with.contains("# timestamp_unix:"));
        assert!(!without.contains("timestamp"));
        assert!(without.contains("# seed: 7\n"));
        assert!(without.contains("k,v\n6,5.0000000000000000e-1\n# slope: 1\n"));
        assert!(without.contains("k^3.0000000000000000e0"));
    }

    #[test]
    fn hash_depends_on_config_only() {
        let a = Meta::new("x", &serde_json::json!({"a": 1}), None, 3.0, false);
        let b = Meta::new("y", &serde_json::json!({"a": 1}), Some(1), 3.0, false);
        let c = Meta::new("x", &serde_json::json!({"a": 2}), None, 3.0, false);
        assert_eq!(a.config_sha256, b.config_sha256);
        assert_ne!(a.config_sha256, c.config_sha256);
        assert_eq!(a.config_sha256.len(), 64);
    }
}
