//! Named fields and maps accepted wherever an expression pair is.
//!
//! Fields: `constant(a,b)`, `radial`, `rotation`, `example((f, g), a, b)`,
//! `theorem-pushforward(p,q)`. Maps: `identity`, `phi(p,q)`. Anything else
//! is parsed as a pair of expressions in `x`, `y`.

use crate::error::{Error, Result};
use crate::field::{example_field, Diffeo2, PlaneVectorField};
use crate::uniformization::{phi_diffeo, theorem_field};

/// Splits `name(args)` into the name and its top-level comma-separated args.
fn call(source: &str) -> Option<(&str, Vec<&str>)> {
    let s = source.trim();
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return None;
    }
    let inner = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return None;
        }
    }
    args.push(inner[start..].trim());
    Some((name, args))
}

fn real(arg: &str, what: &str) -> Result<f64> {
    let v: f64 = arg
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{what}: `{arg}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{what}: `{arg}` is not finite")));
    }
    Ok(v)
}

fn integer(arg: &str, what: &str) -> Result<i64> {
    arg.parse()
        .map_err(|_| Error::InvalidParameter(format!("{what}: `{arg}` is not an integer")))
}

fn arity(name: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{name} takes {n} arguments, got {}",
            args.len()
        )));
    }
    Ok(())
}

pub fn field_from_spec(source: &str) -> Result<PlaneVectorField> {
    match source.trim() {
        "radial" => return Ok(PlaneVectorField::radial()),
        "rotation" => return Ok(PlaneVectorField::rotation()),
        _ => {}
    }
    if let Some((name, args)) = call(source) {
        match name {
            "constant" => {
                arity(name, &args, 2)?;
                let (a, b) = (real(args[0], name)?, real(args[1], name)?);
                if a == 0.0 && b == 0.0 {
                    return Err(Error::InvalidParameter("constant(0,0) is the zero field".into()));
                }
                return Ok(PlaneVectorField::constant(a, b));
            }
            "example" => {
                arity(name, &args, 3)?;
                let psi = map_from_spec(args[0])?;
                let (a, b) = (real(args[1], name)?, real(args[2], name)?);
                return example_field(&psi, a, b);
            }
            "theorem-pushforward" => {
                arity(name, &args, 2)?;
                return theorem_field(integer(args[0], name)?, integer(args[1], name)?);
            }
            _ => {}
        }
    }
    PlaneVectorField::parse(source)
}

pub fn map_from_spec(source: &str) -> Result<Diffeo2> {
    if source.trim() == "identity" {
        return Ok(Diffeo2::identity());
    }
    if let Some(("phi", args)) = call(source) {
        arity("phi", &args, 2)?;
        return phi_diffeo(integer(args[0], "phi")?, integer(args[1], "phi")?);
    }
    Diffeo2::parse(source)
}
