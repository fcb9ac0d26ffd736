//! Loading of JSON inputs. Every file argument also accepts inline JSON.

use serde::de::DeserializeOwned;
use serde_json::Value;
use thetalab::json::{complex_from_value, matrix_from_value, vector_from_value};
use thetalab::siegel::{validate_siegel, SiegelPoint, ThetaCharacteristic};
use thetalab::soliton::GridPoint;
use thetalab::{CVector, Complex64};

use crate::CliError;

fn is_inline(arg: &str) -> bool {
    let t = arg.trim_start();
    t.starts_with('[') || t.starts_with('{') || t.parse::<f64>().is_ok()
}

pub fn value(arg: &str) -> Result<Value, CliError> {
    let text = if is_inline(arg) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{arg}: invalid JSON: {e}")))
}

pub fn parse<T: DeserializeOwned>(arg: &str) -> Result<T, CliError> {
    serde_json::from_value(value(arg)?).map_err(|e| CliError::Usage(format!("{arg}: {e}")))
}

pub fn vector(arg: &str) -> Result<CVector, CliError> {
    vector_from_value(&value(arg)?).map_err(|e| CliError::Usage(format!("{arg}: {e}")))
}

pub fn vectors(arg: &str) -> Result<Vec<CVector>, CliError> {
    match value(arg)? {
        Value::Array(items) => items
            .iter()
            .map(|v| vector_from_value(v).map_err(|e| CliError::Usage(format!("{arg}: {e}"))))
            .collect(),
        _ => Err(CliError::Usage(format!("{arg}: expected a list of vectors"))),
    }
}

/// Reads a matrix and validates it as a period matrix. Shape errors are usage
/// errors; a matrix that is read but not in Siegel space is a numerical one.
pub fn omega(arg: &str) -> Result<SiegelPoint, CliError> {
    let m = matrix_from_value(&value(arg)?).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?;
    Ok(validate_siegel(&m)?)
}

/// `re` or `re,im`.
pub fn complex(arg: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: '{s}'")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => complex_from_value(&value(arg)?).map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// `a,b` for genus one, or `[a…],[b…]`.
pub fn characteristic(arg: &str, g: usize) -> Result<ThetaCharacteristic, CliError> {
    let v: Value = serde_json::from_str(&format!("[{arg}]"))
        .map_err(|_| CliError::Usage(format!("characteristic '{arg}' is not of the form a,b")))?;
    let (a, b): (Vec<f64>, Vec<f64>) = match serde_json::from_value::<(f64, f64)>(v.clone()) {
        Ok((a, b)) => (vec![a], vec![b]),
        Err(_) => serde_json::from_value(v).map_err(|_| CliError::Usage(format!("characteristic '{arg}' is not of the form a,b")))?,
    };
    if a.len() != g || b.len() != g {
        return Err(CliError::Usage(format!("characteristic has length {} and {}, genus is {g}", a.len(), b.len())));
    }
    Ok(ThetaCharacteristic::new(a, b)?)
}

/// `dir.json:order`, the direction possibly inline.
pub fn derivative(arg: &str) -> Result<(CVector, usize), CliError> {
    let (dir, order) = arg
        .rsplit_once(':')
        .ok_or_else(|| CliError::Usage(format!("derivative '{arg}' is not of the form direction:order")))?;
    let order = order.parse().map_err(|_| CliError::Usage(format!("bad derivative order '{order}'")))?;
    Ok((vector(dir)?, order))
}

/// `x,y,t` with missing trailing coordinates set to zero.
pub fn point(arg: &str) -> Result<GridPoint, CliError> {
    let mut c = [0.0; 3];
    let parts: Vec<&str> = arg.split(',').collect();
    if parts.len() > 3 {
        return Err(CliError::Usage(format!("point '{arg}' has more than three coordinates")));
    }
    for (slot, s) in c.iter_mut().zip(parts) {
        *slot = s.trim().parse().map_err(|_| CliError::Usage(format!("bad coordinate in '{arg}'")))?;
    }
    Ok(GridPoint { x: c[0], y: c[1], t: c[2] })
}

/// A grid given as `x=0:1:20,t=0:1:20` (start:stop:count, stop excluded) or as
/// a JSON list of `{x, y, t}` points. Axes not named stay at zero.
pub fn grid(arg: &str) -> Result<Vec<GridPoint>, CliError> {
    if arg.contains('=') {
        let mut axes = [vec![0.0], vec![0.0], vec![0.0]];
        for part in arg.split(',') {
            let (name, range) = part
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("grid axis '{part}' is not name=start:stop:count")))?;
            let idx = match name.trim() {
                "x" => 0,
                "y" => 1,
                "t" => 2,
                other => return Err(CliError::Usage(format!("unknown grid axis '{other}'"))),
            };
            let r: Vec<&str> = range.split(':').collect();
            let [start, stop, count] = r.as_slice() else {
                return Err(CliError::Usage(format!("grid axis '{part}' is not name=start:stop:count")));
            };
            let bad = || CliError::Usage(format!("bad number in grid axis '{part}'"));
            let (start, stop): (f64, f64) = (start.parse().map_err(|_| bad())?, stop.parse().map_err(|_| bad())?);
            let count: usize = count.parse().map_err(|_| bad())?;
            if count == 0 {
                return Err(CliError::Usage(format!("grid axis '{part}' has no points")));
            }
            axes[idx] = (0..count).map(|i| start + (stop - start) * i as f64 / count as f64).collect();
        }
        let mut pts = Vec::new();
        for &t in &axes[2] {
            for &y in &axes[1] {
                for &x in &axes[0] {
                    pts.push(GridPoint { x, y, t });
                }
            }
        }
        Ok(pts)
    } else {
        parse(arg)
    }
}
