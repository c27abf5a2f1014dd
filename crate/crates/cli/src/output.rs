//! Deterministic JSON: fixed key order, floats with 17 significant digits.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SCHEMA: u32 = 1;
pub const OUT_DIR_ENV: &str = "TORIND_OUT_DIR";

/// Pretty printer that writes every float as `d.dddddddddddddddde±x`.
/// Non-finite floats never reach it: serde_json turns them into `null`.
pub struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Default for FixedFloats<'_> {
    fn default() -> Self {
        FixedFloats(PrettyFormatter::with_indent(b"  "))
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats::default());
    value
        .serialize(&mut ser)
        .expect("result documents contain only serializable data");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Relative paths land in `$TORIND_OUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf, String> {
    let path = resolve(path);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        #[derive(Serialize)]
        struct Doc {
            x: f64,
            y: f64,
            n: i64,
            z: f64,
            v: Vec<f64>,
        }
        let s = to_json(&Doc {
            x: 0.1,
            y: -0.75,
            n: 3,
            z: f64::NAN,
            v: vec![1.0],
        });
        assert!(s.contains(r#""x": 1.0000000000000001e-1"#), "{s}");
        assert!(s.contains(r#""y": -7.5000000000000000e-1"#), "{s}");
        assert!(s.contains(r#""n": 3"#));
        assert!(s.contains(r#""z": null"#));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["v"][0].as_f64(), Some(1.0));
    }
}
