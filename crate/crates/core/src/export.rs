//! CSV and JSON writers. Every float is printed with 17 significant digits.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Write};

use crate::magic::{FidelityMap, SuccessCurve};

/// `x` with 17 significant digits, or `nan` / `inf` / `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `t_q,t_p,r0,rx,ry,rz`; undefined outcomes get `nan` components.
pub fn write_bloch_csv<W: Write>(mut w: W, map: &FidelityMap) -> io::Result<()> {
    writeln!(w, "t_q,t_p,r0,rx,ry,rz")?;
    for p in &map.points {
        let c = p.bloch.map(|b| b.components()).unwrap_or([f64::NAN; 4]);
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(p.t.tq),
            fmt_f64(p.t.tp),
            fmt_f64(c[0]),
            fmt_f64(c[1]),
            fmt_f64(c[2]),
            fmt_f64(c[3])
        )?;
    }
    Ok(())
}

/// `t_q,t_p,F,nearest_index`; undefined outcomes get `nan` and `-1`.
pub fn write_fidelity_csv<W: Write>(mut w: W, map: &FidelityMap) -> io::Result<()> {
    writeln!(w, "t_q,t_p,F,nearest_index")?;
    for p in &map.points {
        let index = p.nearest.map(|i| i as i64).unwrap_or(-1);
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.t.tq),
            fmt_f64(p.t.tp),
            fmt_f64(p.fidelity.unwrap_or(f64::NAN)),
            index
        )?;
    }
    Ok(())
}

/// `f,P`
pub fn write_success_csv<W: Write>(mut w: W, curve: &SuccessCurve) -> io::Result<()> {
    writeln!(w, "f,P")?;
    for (f, p) in curve.fidelity_grid.iter().zip(&curve.probability) {
        writeln!(w, "{},{}", fmt_f64(*f), fmt_f64(*p))?;
    }
    Ok(())
}

/// Pretty JSON formatter that prints floats with 17 significant digits.
#[derive(Debug, Default)]
pub struct PreciseFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Pretty-printed JSON with 17-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
