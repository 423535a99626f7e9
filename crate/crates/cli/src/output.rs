use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// `printf("%.15g")`.
pub fn fmt_g(v: f64) -> String {
    fmt_sig(v, 15)
}

pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    // Round once in scientific form so the exponent accounts for carries.
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Key/value pairs echoed as `# key=value` lines, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Meta(Vec<(String, String)>);

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut m = Meta::default();
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_g(value));
    }

    fn to_json(&self) -> serde_json::Map<String, serde_json::Value> {
        self.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect()
    }
}

/// A CSV body with `#` header and footer lines.
pub struct Table {
    meta: Meta,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    footer: Vec<(String, String)>,
}

impl Table {
    pub fn new(meta: Meta, columns: &[&'static str]) -> Self {
        Table { meta, columns: columns.to_vec(), rows: Vec::new(), footer: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn footer(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(concat!("# hsearch ", env!("CARGO_PKG_VERSION"), "\n"));
        for (k, v) in &self.meta.0 {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for (k, v) in &self.footer {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}

pub fn render_json<T: Serialize>(meta: &Meta, result: &T) -> Result<String, CliError> {
    let doc = serde_json::json!({
        "config": meta.to_json(),
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
