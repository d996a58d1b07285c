//! CSV and JSON rendering of run output.

use std::fmt::Write as _;

use crate::config::Format;
use crate::run::Output;

pub const CSV_HEADER: &str = "sweep_var,series,re,im,abs2,order,method";

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line per row, floats in round-trip scientific notation.
pub fn to_csv(output: &Output) -> String {
    if let Some(c) = &output.cloak {
        return c.geometry.to_csv();
    }
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &output.rows {
        let order = r.order.map(|o| o.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{},{}",
            r.sweep_var,
            quote(&r.series),
            r.re,
            r.im,
            r.abs2,
            order,
            r.method
        );
    }
    s
}

pub fn to_json(output: &Output) -> String {
    let mut value = serde_json::to_value(output).expect("output is serializable");
    if let (Some(c), Some(obj)) = (&output.cloak, value.as_object_mut()) {
        obj.insert("header".into(), c.geometry.header_json());
    }
    serde_json::to_string_pretty(&value).expect("output is serializable")
}

pub fn render(output: &Output, format: Format) -> String {
    match format {
        Format::Csv => to_csv(output),
        Format::Json => to_json(output),
    }
}
