//! Canonical text form of map expressions.
//!
//! ```text
//! expr    := '(' head item* ')'
//! item    := expr | number
//! number  := decimal integer | float written with 17 significant digits
//! ```
//!
//! Heads and their arguments:
//!
//! | head | arguments |
//! |------|-----------|
//! | `identity` | `n` |
//! | `affine` | `(matrix n a11 a12 …) (vector b1 …)` |
//! | `radial` | sphere |
//! | `psi` | disk |
//! | `translated` | disk |
//! | `translated-list` | disk+ |
//! | `product` | expr expr |
//! | `spiral` | spiral profile |
//! | `pl` | plmap |
//! | `compose` | expr+ (rightmost applied first) |
//! | `inverse` | expr |
//! | sphere: `orthogonal` | `(matrix …)` |
//! | sphere: `latitude` | `beta (vector …)` |
//! | sphere: `conjugated` | `(matrix …) sphere` |
//! | sphere: `sphere-compose` | sphere+ |
//! | disk: `twist` | `i j n profile` |
//! | disk: `pl-disk` | plmap |
//! | disk: `disk-identity` | `n` |
//! | disk: `disk-compose` | disk+ |
//! | disk: `disk-inverse` | disk |
//! | `profile` | `(knot r value slope)+` |
//! | spiral: `constant` | `(matrix …)` |
//! | spiral: `log-spiral` | `c i j n` |
//! | spiral: `cutoff` | `b i j n profile` |
//! | `plmap` | `n lo hi resolution fixed (images y…)` |
//!
//! Vertex images in `images` are listed vertex by vertex in lattice order
//! (first axis fastest). Whitespace is free; `;` starts a line comment.

use std::fmt::Write;

use super::disk::{make_twist_disk_map, DiskKind, DiskMap};
use super::expr::{
    disk_replication, product_map, radial_extension, spiral_map, translated_replication, MapExpr,
    MapNode, Replicas,
};
use super::profile::{AngleProfile, Knot};
use super::sphere::{make_latitude_sphere_map, SphereKind, SphereMap};
use super::spiral::{SpiralKind, SpiralProfile};
use crate::error::{GeomError, Result};
use crate::linalg::{MatrixN, VectorN};
use crate::pl::{fmt17, kuhn_triangulation, PLMap};

/// Serialises a map expression to its canonical text.
pub fn to_text(m: &MapExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, m);
    out
}

/// Parses canonical text; any whitespace layout is accepted.
pub fn from_text(s: &str) -> Result<MapExpr> {
    let tokens = tokenize(s)?;
    let mut pos = 0;
    let sexp = parse_sexp(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(GeomError::Parse("trailing input after expression".into()));
    }
    build_expr(&sexp)
}

fn num(out: &mut String, v: f64) {
    out.push(' ');
    out.push_str(&fmt17(v));
}

fn int(out: &mut String, v: usize) {
    let _ = write!(out, " {v}");
}

fn write_matrix(out: &mut String, m: &MatrixN) {
    out.push_str(" (matrix");
    int(out, m.dim());
    for &v in m.entries() {
        num(out, v);
    }
    out.push(')');
}

fn write_vector(out: &mut String, v: &[f64]) {
    out.push_str(" (vector");
    for &c in v {
        num(out, c);
    }
    out.push(')');
}

fn write_profile(out: &mut String, p: &AngleProfile) {
    out.push_str(" (profile");
    for k in p.knots() {
        out.push_str(" (knot");
        num(out, k.r);
        num(out, k.value);
        num(out, k.slope);
        out.push(')');
    }
    out.push(')');
}

fn write_plmap(out: &mut String, f: &PLMap) {
    let tri = f.triangulation();
    let (lo, hi) = tri.bounds();
    out.push_str(" (plmap");
    int(out, tri.dim());
    num(out, lo);
    num(out, hi);
    int(out, tri.resolution());
    int(out, f.boundary_fixed() as usize);
    out.push_str(" (images");
    for v in 0..tri.vertex_count() {
        for &c in f.vertex_image(v) {
            num(out, c);
        }
    }
    out.push_str("))");
}

fn write_sphere(out: &mut String, s: &SphereMap) {
    match s.kind() {
        SphereKind::Orthogonal(m) => {
            out.push_str(" (orthogonal");
            write_matrix(out, m);
        }
        SphereKind::Latitude { beta, axis } => {
            out.push_str(" (latitude");
            num(out, *beta);
            write_vector(out, axis);
        }
        SphereKind::Conjugated { rotation, inner } => {
            out.push_str(" (conjugated");
            write_matrix(out, rotation);
            write_sphere(out, inner);
        }
        SphereKind::Composed(maps) => {
            out.push_str(" (sphere-compose");
            for m in maps {
                write_sphere(out, m);
            }
        }
    }
    out.push(')');
}

fn write_disk(out: &mut String, g: &DiskMap) {
    match g.kind() {
        DiskKind::Twist { profile, plane } => {
            out.push_str(" (twist");
            int(out, plane.0);
            int(out, plane.1);
            int(out, g.dim());
            write_profile(out, profile);
        }
        DiskKind::Pl { map, .. } => {
            out.push_str(" (pl-disk");
            write_plmap(out, map);
        }
        DiskKind::Composed(maps) if maps.is_empty() => {
            out.push_str(" (disk-identity");
            int(out, g.dim());
        }
        DiskKind::Composed(maps) => {
            out.push_str(" (disk-compose");
            for m in maps {
                write_disk(out, m);
            }
        }
        DiskKind::Inverse(inner) => {
            out.push_str(" (disk-inverse");
            write_disk(out, inner);
        }
    }
    out.push(')');
}

fn write_spiral(out: &mut String, p: &SpiralProfile) {
    match p.kind() {
        SpiralKind::Constant(a) => {
            out.push_str(" (constant");
            write_matrix(out, a);
        }
        SpiralKind::LogSpiral { c, plane } => {
            out.push_str(" (log-spiral");
            num(out, *c);
            int(out, plane.0);
            int(out, plane.1);
            int(out, p.dim());
        }
        SpiralKind::Cutoff { profile, b, plane } => {
            out.push_str(" (cutoff");
            num(out, *b);
            int(out, plane.0);
            int(out, plane.1);
            int(out, p.dim());
            write_profile(out, profile);
        }
    }
    out.push(')');
}

fn write_expr(out: &mut String, m: &MapExpr) {
    let start = out.len();
    match m.node() {
        MapNode::Identity => {
            out.push_str(" (identity");
            int(out, m.dim());
        }
        MapNode::Affine { matrix, offset, .. } => {
            out.push_str(" (affine");
            write_matrix(out, matrix);
            write_vector(out, offset);
        }
        MapNode::RadialExt(phi) => {
            out.push_str(" (radial");
            write_sphere(out, phi);
        }
        MapNode::Psi(g) => {
            out.push_str(" (psi");
            write_disk(out, g);
        }
        MapNode::Translated(Replicas::Uniform(g)) => {
            out.push_str(" (translated");
            write_disk(out, g);
        }
        MapNode::Translated(Replicas::List(gs)) => {
            out.push_str(" (translated-list");
            for g in gs {
                write_disk(out, g);
            }
        }
        MapNode::Product(f, g) => {
            out.push_str(" (product");
            write_expr(out, f);
            write_expr(out, g);
        }
        MapNode::Spiral(p) => {
            out.push_str(" (spiral");
            write_spiral(out, p);
        }
        MapNode::Pl(f) => {
            out.push_str(" (pl");
            write_plmap(out, f);
        }
        MapNode::Compose(maps) => {
            out.push_str(" (compose");
            for c in maps {
                write_expr(out, c);
            }
        }
        MapNode::Inverse(inner) => {
            out.push_str(" (inverse");
            write_expr(out, inner);
        }
    }
    out.push(')');
    if start == 0 {
        out.remove(0);
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut atom = String::new();
    let flush = |atom: &mut String, out: &mut Vec<Token>| {
        if !atom.is_empty() {
            out.push(Token::Atom(std::mem::take(atom)));
        }
    };
    for line in s.lines() {
        let line = line.split(';').next().unwrap_or("");
        for ch in line.chars() {
            match ch {
                '(' => {
                    flush(&mut atom, &mut out);
                    out.push(Token::Open);
                }
                ')' => {
                    flush(&mut atom, &mut out);
                    out.push(Token::Close);
                }
                c if c.is_whitespace() => flush(&mut atom, &mut out),
                c => atom.push(c),
            }
        }
        flush(&mut atom, &mut out);
    }
    if out.is_empty() {
        return Err(GeomError::Parse("empty input".into()));
    }
    Ok(out)
}

#[derive(Debug)]
enum Sexp {
    Atom(String),
    List(String, Vec<Sexp>),
}

fn parse_sexp(tokens: &[Token], pos: &mut usize) -> Result<Sexp> {
    match tokens.get(*pos) {
        Some(Token::Atom(a)) => {
            *pos += 1;
            Ok(Sexp::Atom(a.clone()))
        }
        Some(Token::Open) => {
            *pos += 1;
            let head = match tokens.get(*pos) {
                Some(Token::Atom(h)) => h.clone(),
                _ => {
                    return Err(GeomError::Parse(
                        "expected a constructor name after '('".into(),
                    ))
                }
            };
            *pos += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(Token::Close) => {
                        *pos += 1;
                        return Ok(Sexp::List(head, items));
                    }
                    Some(_) => items.push(parse_sexp(tokens, pos)?),
                    None => return Err(GeomError::Parse(format!("unclosed '({head}'"))),
                }
            }
        }
        Some(Token::Close) => Err(GeomError::Parse("unexpected ')'".into())),
        None => Err(GeomError::Parse("unexpected end of input".into())),
    }
}

fn list<'a>(s: &'a Sexp, expected: Option<&str>) -> Result<(&'a str, &'a [Sexp])> {
    match s {
        Sexp::List(h, items) => {
            if let Some(e) = expected {
                if h != e {
                    return Err(GeomError::Parse(format!("expected '({e}', found '({h}'")));
                }
            }
            Ok((h.as_str(), items.as_slice()))
        }
        Sexp::Atom(a) => Err(GeomError::Parse(format!("expected a list, found '{a}'"))),
    }
}

fn arity(head: &str, items: &[Sexp], n: usize) -> Result<()> {
    if items.len() == n {
        Ok(())
    } else {
        Err(GeomError::Parse(format!(
            "'{head}' takes {n} arguments, got {}",
            items.len()
        )))
    }
}

fn atom_f64(s: &Sexp) -> Result<f64> {
    match s {
        Sexp::Atom(a) => a
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GeomError::Parse(format!("bad number '{a}'"))),
        Sexp::List(h, _) => Err(GeomError::Parse(format!("expected a number, found '({h}'"))),
    }
}

fn atom_usize(s: &Sexp) -> Result<usize> {
    match s {
        Sexp::Atom(a) => a
            .parse::<usize>()
            .map_err(|_| GeomError::Parse(format!("bad integer '{a}'"))),
        Sexp::List(h, _) => Err(GeomError::Parse(format!(
            "expected an integer, found '({h}'"
        ))),
    }
}

fn numbers(items: &[Sexp]) -> Result<Vec<f64>> {
    items.iter().map(atom_f64).collect()
}

fn build_matrix(s: &Sexp) -> Result<MatrixN> {
    let (_, items) = list(s, Some("matrix"))?;
    let n = atom_usize(
        items
            .first()
            .ok_or_else(|| GeomError::Parse("empty matrix".into()))?,
    )?;
    MatrixN::new(n, numbers(&items[1..])?)
}

fn build_vector(s: &Sexp) -> Result<VectorN> {
    let (_, items) = list(s, Some("vector"))?;
    VectorN::new(numbers(items)?)
}

fn build_profile(s: &Sexp) -> Result<AngleProfile> {
    let (_, items) = list(s, Some("profile"))?;
    let knots = items
        .iter()
        .map(|k| {
            let (h, a) = list(k, Some("knot"))?;
            arity(h, a, 3)?;
            Ok(Knot {
                r: atom_f64(&a[0])?,
                value: atom_f64(&a[1])?,
                slope: atom_f64(&a[2])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AngleProfile::new(knots)
}

fn build_plmap(s: &Sexp) -> Result<PLMap> {
    let (h, items) = list(s, Some("plmap"))?;
    arity(h, items, 6)?;
    let n = atom_usize(&items[0])?;
    let tri = kuhn_triangulation(
        n,
        atom_f64(&items[1])?,
        atom_f64(&items[2])?,
        atom_usize(&items[3])?,
    )?;
    let fixed = match atom_usize(&items[4])? {
        0 => false,
        1 => true,
        v => {
            return Err(GeomError::Parse(format!(
                "boundary flag must be 0 or 1, got {v}"
            )))
        }
    };
    let (_, flat) = list(&items[5], Some("images"))?;
    let flat = numbers(flat)?;
    if flat.len() != tri.vertex_count() * n {
        return Err(GeomError::Parse(format!(
            "expected {} image coordinates, got {}",
            tri.vertex_count() * n,
            flat.len()
        )));
    }
    let images = flat.chunks(n).map(<[f64]>::to_vec).collect();
    PLMap::new(tri, images, fixed)
}

fn build_sphere(s: &Sexp) -> Result<SphereMap> {
    let (h, items) = list(s, None)?;
    match h {
        "orthogonal" => {
            arity(h, items, 1)?;
            SphereMap::orthogonal(build_matrix(&items[0])?)
        }
        "latitude" => {
            arity(h, items, 2)?;
            make_latitude_sphere_map(atom_f64(&items[0])?, build_vector(&items[1])?)
        }
        "conjugated" => {
            arity(h, items, 2)?;
            SphereMap::conjugated(build_matrix(&items[0])?, build_sphere(&items[1])?)
        }
        "sphere-compose" => {
            SphereMap::composed(items.iter().map(build_sphere).collect::<Result<_>>()?)
        }
        other => Err(GeomError::Parse(format!("unknown sphere map '{other}'"))),
    }
}

fn build_disk(s: &Sexp) -> Result<DiskMap> {
    let (h, items) = list(s, None)?;
    match h {
        "twist" => {
            arity(h, items, 4)?;
            make_twist_disk_map(
                build_profile(&items[3])?,
                atom_usize(&items[0])?,
                atom_usize(&items[1])?,
                atom_usize(&items[2])?,
            )
        }
        "pl-disk" => {
            arity(h, items, 1)?;
            DiskMap::from_pl(build_plmap(&items[0])?)
        }
        "disk-identity" => {
            arity(h, items, 1)?;
            Ok(DiskMap::identity(atom_usize(&items[0])?))
        }
        "disk-compose" => DiskMap::composed(items.iter().map(build_disk).collect::<Result<_>>()?),
        "disk-inverse" => {
            arity(h, items, 1)?;
            Ok(build_disk(&items[0])?.inverse())
        }
        other => Err(GeomError::Parse(format!("unknown disk map '{other}'"))),
    }
}

fn build_spiral(s: &Sexp) -> Result<SpiralProfile> {
    let (h, items) = list(s, None)?;
    match h {
        "constant" => {
            arity(h, items, 1)?;
            SpiralProfile::constant(build_matrix(&items[0])?)
        }
        "log-spiral" => {
            arity(h, items, 4)?;
            SpiralProfile::log_spiral(
                atom_f64(&items[0])?,
                atom_usize(&items[1])?,
                atom_usize(&items[2])?,
                atom_usize(&items[3])?,
            )
        }
        "cutoff" => {
            arity(h, items, 5)?;
            SpiralProfile::cutoff(
                build_profile(&items[4])?,
                atom_f64(&items[0])?,
                atom_usize(&items[1])?,
                atom_usize(&items[2])?,
                atom_usize(&items[3])?,
            )
        }
        other => Err(GeomError::Parse(format!(
            "unknown spiral profile '{other}'"
        ))),
    }
}

fn build_expr(s: &Sexp) -> Result<MapExpr> {
    let (h, items) = list(s, None)?;
    match h {
        "identity" => {
            arity(h, items, 1)?;
            Ok(MapExpr::identity(atom_usize(&items[0])?))
        }
        "affine" => {
            arity(h, items, 2)?;
            MapExpr::affine(build_matrix(&items[0])?, build_vector(&items[1])?)
        }
        "radial" => {
            arity(h, items, 1)?;
            Ok(radial_extension(build_sphere(&items[0])?))
        }
        "psi" => {
            arity(h, items, 1)?;
            Ok(disk_replication(build_disk(&items[0])?))
        }
        "translated" => {
            arity(h, items, 1)?;
            translated_replication(Replicas::Uniform(build_disk(&items[0])?))
        }
        "translated-list" => translated_replication(Replicas::List(
            items.iter().map(build_disk).collect::<Result<_>>()?,
        )),
        "product" => {
            arity(h, items, 2)?;
            Ok(product_map(build_expr(&items[0])?, build_expr(&items[1])?))
        }
        "spiral" => {
            arity(h, items, 1)?;
            Ok(spiral_map(build_spiral(&items[0])?))
        }
        "pl" => {
            arity(h, items, 1)?;
            MapExpr::pl(build_plmap(&items[0])?)
        }
        "compose" => MapExpr::compose_all(items.iter().map(build_expr).collect::<Result<_>>()?),
        "inverse" => {
            arity(h, items, 1)?;
            Ok(build_expr(&items[0])?.inverse())
        }
        other => Err(GeomError::Parse(format!(
            "unknown map constructor '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation_matrix;
    use crate::pl::pl_twist_example;

    fn samples() -> Vec<MapExpr> {
        let twist = make_twist_disk_map(AngleProfile::bump(0.1 + 1.0 / 3.0), 0, 1, 2).unwrap();
        let lat = make_latitude_sphere_map(0.3, VectorN::basis(3, 2)).unwrap();
        let rot = rotation_matrix(0, 2, 0.7, 3).unwrap();
        vec![
            MapExpr::identity(4),
            MapExpr::affine(
                MatrixN::from_rows(&[vec![1.0, 0.1], vec![-0.2, 3.0]]).unwrap(),
                VectorN::new(vec![std::f64::consts::PI, -1e-300]).unwrap(),
            )
            .unwrap(),
            radial_extension(SphereMap::conjugated(rot.clone(), lat.clone()).unwrap()),
            radial_extension(
                SphereMap::composed(vec![lat, SphereMap::orthogonal(rot).unwrap()]).unwrap(),
            ),
            disk_replication(twist.clone()),
            translated_replication(Replicas::Uniform(twist.inverse())).unwrap(),
            translated_replication(Replicas::List(vec![twist.clone(), DiskMap::identity(2)]))
                .unwrap(),
            product_map(disk_replication(twist.clone()), MapExpr::identity(1)),
            spiral_map(SpiralProfile::log_spiral(0.25, 0, 1, 2).unwrap()),
            spiral_map(SpiralProfile::cutoff(AngleProfile::bump(2.0), 3.5, 0, 1, 2).unwrap()),
            MapExpr::pl(pl_twist_example(2, 3, 0.4).unwrap()).unwrap(),
            disk_replication(DiskMap::from_pl(pl_twist_example(2, 4, 0.3).unwrap()).unwrap()),
            MapExpr::compose_all(vec![
                disk_replication(twist.clone()),
                MapExpr::identity(2).inverse(),
            ])
            .unwrap(),
            disk_replication(DiskMap::composed(vec![twist.clone(), twist]).unwrap()).inverse(),
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        for m in samples() {
            let text = to_text(&m);
            let back = from_text(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
            assert_eq!(back, m, "{text}");
            assert_eq!(to_text(&back), text);
        }
    }

    #[test]
    fn layout_insensitive() {
        let src = "; a twist\n(psi\n  (twist 0 1 2 (profile (knot 0 1 0) (knot 1 0 0))))\n";
        let m = from_text(src).unwrap();
        assert_eq!(from_text(&to_text(&m)).unwrap(), m);
        assert!(to_text(&m).starts_with("(psi (twist 0 1 2 (profile (knot 0.0000000000000000e0"));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "(identity",
            "(identity 2))",
            "(frobnicate 2)",
            "(identity x)",
            "(psi (twist 0 1 2))",
        ] {
            assert!(matches!(from_text(bad), Err(GeomError::Parse(_))), "{bad}");
        }
    }
}
