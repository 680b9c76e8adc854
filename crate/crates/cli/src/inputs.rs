//! Parsing of function specs, regions and coordinates given on the command
//! line.

use std::path::Path;

use num_complex::Complex64;
use potts_gks::io::parse_function;
use potts_gks::verifier::Coordinate;
use potts_gks::{make_family, Error, FamilyKind, PottsModel, Region, Result, SpinFunction};

/// Accepts inline JSON, a path to a JSON function file, or a shorthand:
/// `A`, `familyA`, `B`, `familyB`, `C:v0,v1,...`, `delta:i`,
/// `table:v0,v1,...` (entries real or complex like `0.5-1i`).
///
/// Shorthands take `q` from the argument; JSON carries its own.
pub fn function(spec: &str, q: Option<usize>) -> Result<SpinFunction> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return check_q(parse_function(spec)?, q);
    }
    if let Some((head, tail)) = spec.split_once(':') {
        let q = need_q(q, spec)?;
        return match head {
            "C" | "familyC" => make_family(FamilyKind::C, q, Some(&reals(tail)?)),
            "delta" => {
                let i: usize = tail.trim().parse().map_err(|_| Error::Parse(format!("bad state in {spec:?}")))?;
                if i >= q {
                    return Err(Error::Parse(format!("state {i} out of range for q = {q}")));
                }
                Ok(SpinFunction::indicator(q, i))
            }
            "table" => {
                let values = tail
                    .split(',')
                    .map(|s| s.trim().parse::<Complex64>().map_err(|_| Error::Parse(format!("bad table entry {s:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != q {
                    return Err(Error::FunctionLength { expected: q, got: values.len() });
                }
                if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("function table entry".into()));
                }
                Ok(SpinFunction::new(values))
            }
            _ if Path::new(spec).exists() => from_file(spec, Some(q)),
            _ => Err(Error::Parse(format!("unknown function spec {spec:?}"))),
        };
    }
    match spec.parse::<FamilyKind>() {
        Ok(kind @ (FamilyKind::A | FamilyKind::B)) => make_family(kind, need_q(q, spec)?, None),
        Ok(FamilyKind::C) => Err(Error::BadFamilyC(format!("{spec:?} needs values, as in C:1,0.5,0"))),
        Err(_) => from_file(spec, q),
    }
}

fn from_file(path: &str, q: Option<usize>) -> Result<SpinFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("function spec {path:?} is neither a shorthand nor a readable file: {e}")))?;
    check_q(parse_function(&text)?, q)
}

fn check_q(f: SpinFunction, q: Option<usize>) -> Result<SpinFunction> {
    match q {
        Some(q) if q != f.q() => Err(Error::FunctionLength { expected: q, got: f.q() }),
        _ => Ok(f),
    }
}

fn need_q(q: Option<usize>, spec: &str) -> Result<usize> {
    q.ok_or_else(|| Error::Parse(format!("{spec:?} needs q (pass --q or --model)")))
}

fn reals(list: &str) -> Result<Vec<f64>> {
    list.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")))).collect()
}

/// Comma-separated vertex names; an empty string is the empty region.
pub fn region(model: &PottsModel, list: &str) -> Result<Region> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Region::from_names(model, &names)
}

/// `J:<edge index>` or `h:<vertex name>`.
pub fn coordinate(model: &PottsModel, spec: &str) -> Result<Coordinate> {
    let bad = || Error::Parse(format!("bad coordinate {spec:?}; expected J:<edge index> or h:<vertex>"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "J" => {
            let e: usize = rest.trim().parse().map_err(|_| bad())?;
            if e >= model.num_edges() {
                return Err(Error::BadEdge(format!("no edge with index {e}")));
            }
            Ok(Coordinate::Coupling(e))
        }
        "h" => Ok(Coordinate::Field(model.vertex_index(rest.trim())?)),
        _ => Err(bad()),
    }
}
