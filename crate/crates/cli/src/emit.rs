//! JSON and CSV emission.

use crate::config::Config;
use serde_json::{Map, Value};
use std::fmt::Write;

/// A command's result: a JSON body, an optional table, and whether its checks passed.
pub struct Report {
    pub body: Value,
    pub table: Option<Table>,
    pub pass: bool,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

/// Shortest round-trip form; exponent notation away from `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (x.abs() >= 1e-4 && x.abs() < 1e15) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => fmt_f64(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(s) => s.clone(),
                    Cell::B(b) => b.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// The body's fields plus `pass`, `config` and `config_hash`.
pub fn json_document(report: &Report, cfg: &Config) -> String {
    let mut map = match &report.body {
        Value::Object(m) => m.clone(),
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other.clone());
            m
        }
    };
    map.insert("pass".into(), Value::Bool(report.pass));
    map.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    map.insert("config_hash".into(), Value::String(cfg.hash()));
    serde_json::to_string(&Value::Object(map)).expect("report serializes")
}

/// Header row and data, preceded by `#` lines carrying the config.
pub fn csv_document(report: &Report, cfg: &Config) -> Option<String> {
    let table = report.table.as_ref()?;
    let mut out = String::new();
    let echoed = serde_json::to_value(cfg).expect("config serializes");
    writeln!(out, "# config: {echoed}").unwrap();
    writeln!(out, "# config_hash: {}", cfg.hash()).unwrap();
    out.push_str(&table.render());
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn any_finite_float_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-8, 2.5e20, -3.0000000000000004, 0.2999999999999998, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-8), "1e-8");
    }

    #[test]
    fn csv_has_config_then_header() {
        let r = Report {
            body: Value::Null,
            table: Some(Table { header: vec!["t", "abs"], rows: vec![vec![Cell::F(1.0), Cell::F(0.5)]] }),
            pass: true,
        };
        let s = csv_document(&r, &Config::default()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# config: "));
        assert_eq!(lines[2], "t,abs");
        assert_eq!(lines[3], "1,0.5");
    }
}
