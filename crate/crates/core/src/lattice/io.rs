//! Versioned text serialization of a lattice.
//!
//! The file embeds the input code and build parameters followed by the layer,
//! junction and qubit tables and both check matrices as sparse rows. Loading
//! rebuilds the lattice and requires the stored tables to match exactly.

use std::fmt::Write as _;

use super::{build_layer_code, Axis, DefectColor, LatticeError, LayerKind, LayerLattice, Plane};
use crate::code::{format_code, parse_code};
use crate::gf2::SparseMatrix;

const MAGIC: &str = "layercode-lattice 1";

fn kind_name(k: LayerKind) -> &'static str {
    k.name()
}

fn plane_name(p: Plane) -> &'static str {
    match p {
        Plane::Xz => "xz",
        Plane::Xy => "xy",
        Plane::Yz => "yz",
    }
}

fn color_name(c: DefectColor) -> &'static str {
    match c {
        DefectColor::Blue => "blue",
        DefectColor::Red => "red",
        DefectColor::Green => "green",
    }
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::Y => "y",
        Axis::Z => "z",
    }
}

fn write_rows(out: &mut String, name: &str, m: &SparseMatrix) {
    let _ = writeln!(out, "{name} {} {}", m.nrows(), m.ncols());
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn write_lattice(lat: &LayerLattice) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "scale {}", lat.params.surface_scale);
    let _ = writeln!(out, "extended {}", u8::from(lat.params.extended));
    let _ = writeln!(out, "code");
    out.push_str(&format_code(&lat.code));
    let _ = writeln!(out, "endcode");
    let _ = writeln!(out, "layers {}", lat.layers.len());
    for l in &lat.layers {
        let s = &l.spec;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            kind_name(s.kind),
            s.index,
            plane_name(s.plane),
            s.offset,
            s.u_range.0,
            s.u_range.1,
            s.v_range.0,
            s.v_range.1
        );
    }
    let _ = writeln!(out, "defects {}", lat.defects.len());
    for d in &lat.defects {
        let parts: Vec<String> = d.participants.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            color_name(d.color),
            axis_name(d.axis),
            d.position[0],
            d.position[1],
            d.span.0,
            d.span.1,
            parts.join(",")
        );
    }
    let _ = writeln!(out, "qubits {}", lat.num_qubits());
    for q in 0..lat.num_qubits() {
        let c = lat.qubit_coord(q);
        let _ = writeln!(out, "{} {} {} {}", lat.qubit_layer[q], c[0], c[1], c[2]);
    }
    write_rows(&mut out, "hx", lat.hx());
    write_rows(&mut out, "hz", lat.hz());
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> LatticeError {
    LatticeError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_lattice(text: &str) -> Result<LayerLattice, LatticeError> {
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    if lines.first() != Some(&MAGIC) {
        return Err(parse_err(1, format!("expected header `{MAGIC}`")));
    }
    let field = |idx: usize, key: &str| -> Result<usize, LatticeError> {
        let line = lines
            .get(idx)
            .ok_or_else(|| parse_err(idx + 1, "unexpected end of file"))?;
        line.strip_prefix(key)
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| parse_err(idx + 1, format!("expected `{key} <number>`")))
    };
    let scale = field(1, "scale")?;
    let extended = match field(2, "extended")? {
        0 => false,
        1 => true,
        _ => return Err(parse_err(3, "extended must be 0 or 1")),
    };
    if lines.get(3) != Some(&"code") {
        return Err(parse_err(4, "expected `code`"));
    }
    let end = lines
        .iter()
        .position(|l| *l == "endcode")
        .ok_or_else(|| parse_err(lines.len(), "missing `endcode`"))?;
    let code = parse_code(&lines[4..end].join("\n")).map_err(|e| parse_err(5, e.to_string()))?;
    let lat = build_layer_code(&code, scale, extended)?;
    let expected = write_lattice(&lat);
    for (i, (a, b)) in expected.lines().zip(lines.iter()).enumerate() {
        if a != *b {
            return Err(LatticeError::Mismatch(format!(
                "line {} differs from the rebuilt lattice",
                i + 1
            )));
        }
    }
    let stored = lines.iter().rev().skip_while(|l| l.is_empty()).count();
    if stored != expected.lines().count() {
        return Err(LatticeError::Mismatch(format!(
            "file has {stored} lines, rebuilt lattice has {}",
            expected.lines().count()
        )));
    }
    Ok(lat)
}
