//! JSON and CSV rendering with every float written to 17 significant digits.
use std::io::{self, Write};

use pencilscope_core::branches::BranchFamily;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// `{:.16e}`, i.e. 17 significant digits; non-finite values have no JSON form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports serialize");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn csv_header(n: usize) -> String {
    let mut h = String::from("lambda");
    for j in 0..n {
        h.push_str(&format!(",branch_{j}"));
    }
    h
}

/// One row per grid point, branch columns in matched order.
pub fn write_branch_csv<W: Write>(fam: &BranchFamily, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", csv_header(fam.n_branches()))?;
    for (i, &x) in fam.grid.iter().enumerate() {
        let mut line = fmt_f64(x);
        for b in &fam.values {
            line.push(',');
            line.push_str(&fmt_f64(b[i]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
