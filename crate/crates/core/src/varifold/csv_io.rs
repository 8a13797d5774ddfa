//! Atom CSV: header `x1,…,xd,v1,…,vd,mass`, values with 17 significant digits.

use super::{Atom, OrientedVarifold};
use crate::{Error, Result, Vector};

pub(super) fn header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    h.extend((1..=d).map(|i| format!("v{i}")));
    h.push("mass".into());
    h
}

pub(super) fn write<const D: usize, W: std::io::Write>(v: &OrientedVarifold<D>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(D)).map_err(csv_err)?;
    for a in v.atoms() {
        let row = a
            .x
            .iter()
            .chain(a.v.iter())
            .chain(std::iter::once(&a.mass))
            .map(|x| format!("{x:.16e}"));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(super) fn read<const D: usize, R: std::io::Read>(reader: R) -> Result<Vec<Atom<D>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let expected = header(D);
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if found != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), found.join(",")),
        });
    }
    let mut atoms = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 * D + 1 {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", 2 * D + 1, record.len()) });
        }
        let mut values = [0.0; 7];
        for (k, field) in record.iter().enumerate() {
            values[k] = field
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("field {} is not a number: `{field}`", k + 1) })?;
        }
        let x = Vector::<D>::from_fn(|i, _| values[i]);
        let v = Vector::<D>::from_fn(|i, _| values[D + i]);
        let atom = Atom::new(x, v, values[2 * D])
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        atoms.push(atom);
    }
    Ok(atoms)
}

/// Ambient dimension declared by an atom CSV header.
pub fn csv_dimension(text: &str) -> Result<usize> {
    let first = text.lines().next().unwrap_or("");
    let fields = first.split(',').count();
    match fields {
        5 | 7 => {
            let d = (fields - 1) / 2;
            if first.split(',').map(str::trim).eq(header(d).iter().map(String::as_str)) {
                Ok(d)
            } else {
                Err(Error::Parse { line: 1, message: format!("unrecognized header `{first}`") })
            }
        }
        _ => Err(Error::Parse { line: 1, message: format!("unrecognized header `{first}`") }),
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse { line, message: e.to_string() }
}
