//! JSON and CSV emission.

use std::io::Write;

use bkl_core::field::AmbientField;
use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A float as a JSON number with 17 significant digits.
pub fn num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
pub struct Cx {
    pub re: Box<RawValue>,
    pub im: Box<RawValue>,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx {
            re: num(z.re),
            im: num(z.im),
        }
    }
}

#[derive(Serialize)]
pub struct FieldInfo {
    pub p: u64,
    pub e: u32,
    #[serde(rename = "N")]
    pub n: u32,
    /// Coefficients of the modulus over F_p, low to high.
    pub modulus: Vec<u64>,
    pub generator: Vec<u64>,
}

impl From<&AmbientField> for FieldInfo {
    fn from(f: &AmbientField) -> Self {
        let d = f.descriptor();
        FieldInfo {
            p: d.p,
            e: d.e,
            n: d.n,
            modulus: d.modulus,
            generator: d.generator,
        }
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, r: Vec<String>) {
        self.rows.push(r);
    }
}

pub struct Emit {
    format: Format,
}

impl Emit {
    pub fn new(format: Format) -> Self {
        Emit { format }
    }

    pub fn send<T: Serialize>(&self, doc: &T, table: &Table) {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match self.format {
            Format::Json => {
                let text = serde_json::to_string_pretty(doc).expect("serializable document");
                writeln!(out, "{text}").expect("stdout");
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&table.header).expect("stdout");
                for r in &table.rows {
                    w.write_record(r).expect("stdout");
                }
                w.flush().expect("stdout");
            }
        }
        out.flush().expect("stdout");
    }
}
