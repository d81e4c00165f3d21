//! Deterministic serialization: 12 significant digits for JSON and CSV,
//! 1e-6 fixed precision for SVG, and atomic file replacement.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use drumshape_core::features::{Corner, Facet};
use drumshape_core::{ConvexPolygon, Vec2};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal of [`round12`], so equal inputs always print identically.
/// Very small and very large magnitudes use exponent notation.
pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Round every number in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(payload: &T) -> Result<Value> {
    Ok(round_json(serde_json::to_value(payload)?))
}

/// Write through a temporary file in the same directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV

/// `x,y` per line. Blank lines, `#` comments and a non-numeric header are skipped.
pub fn parse_points(text: &str, source: &str) -> Result<Vec<Vec2>> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |reason: &str| CliError::Csv { path: source.to_string(), line: i + 1, reason: reason.into() };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(fail("expected two fields `x,y`"));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => points.push(Vec2::new(x, y)),
            _ if points.is_empty() && fields[0].parse::<f64>().is_err() && fields[1].parse::<f64>().is_err() => {}
            _ => return Err(fail("fields must be finite numbers")),
        }
    }
    Ok(points)
}

pub fn read_polygon(path: &Path) -> Result<ConvexPolygon> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let points = parse_points(&text, &path.display().to_string())?;
    Ok(ConvexPolygon::new(points)?)
}

pub fn polygon_csv(p: &ConvexPolygon) -> String {
    let mut s = String::from("x,y\n");
    for v in p.vertices() {
        let _ = writeln!(s, "{},{}", fmt12(v.x), fmt12(v.y));
    }
    s
}

/// Rows of numbers under a header.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt12(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// SVG

#[derive(Clone, Debug, Default)]
pub struct Overlays<'a> {
    pub facets: &'a [Facet],
    pub corners: &'a [Corner],
    /// Drawn dashed, rescaled to the area of the shape and moved to its centroid.
    pub wulff: Option<&'a ConvexPolygon>,
}

fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

fn pt(v: Vec2) -> String {
    format!("{},{}", fmt6(v.x), fmt6(-v.y))
}

fn points_attr(p: &ConvexPolygon) -> String {
    p.vertices().iter().map(|&v| pt(v)).collect::<Vec<_>>().join(" ")
}

/// Homothetic copy of `w` with the area and centroid of `p`.
pub fn wulff_like(w: &ConvexPolygon, p: &ConvexPolygon) -> ConvexPolygon {
    let t = (p.area() / w.area()).sqrt();
    let scaled = w.translate(-w.centroid()).scale(t);
    scaled.translate(p.centroid())
}

/// Shape outline, then Wulff outline, facets and corners, in that order.
pub fn svg(p: &ConvexPolygon, overlays: &Overlays) -> String {
    let wulff = overlays.wulff.map(|w| wulff_like(w, p));
    let (mut lo, mut hi) = p.bounding_box();
    if let Some(w) = &wulff {
        let (a, b) = w.bounding_box();
        lo = Vec2::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Vec2::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let margin = 0.05 * (hi - lo).x.max((hi - lo).y);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = fmt6(0.004 * w.max(h));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
        fmt6(lo.x - margin),
        fmt6(-hi.y - margin),
        fmt6(w),
        fmt6(h),
        (600.0 * h / w).round() as i64
    );
    let _ = writeln!(
        s,
        r##"<polygon class="shape" points="{}" fill="#dde6f0" stroke="#1f3b5c" stroke-width="{stroke}"/>"##,
        points_attr(p)
    );
    if let Some(wp) = &wulff {
        let _ = writeln!(
            s,
            r##"<polygon class="wulff" points="{}" fill="none" stroke="#7a7a7a" stroke-width="{stroke}" stroke-dasharray="{} {}"/>"##,
            points_attr(wp),
            fmt6(0.02 * w.max(h)),
            fmt6(0.01 * w.max(h))
        );
    }
    let thick = fmt6(0.012 * w.max(h));
    for f in overlays.facets {
        let _ = writeln!(
            s,
            r##"<line class="facet" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-width="{thick}"/>"##,
            fmt6(f.start.x),
            fmt6(-f.start.y),
            fmt6(f.end.x),
            fmt6(-f.end.y)
        );
    }
    let r = fmt6(0.015 * w.max(h));
    for c in overlays.corners {
        let _ = writeln!(
            s,
            r##"<circle class="corner" cx="{}" cy="{}" r="{r}" fill="#27ae60"/>"##,
            fmt6(c.point.x),
            fmt6(-c.point.y)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0), "2");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(1.193547770841e-6), "1.19354777084e-6");
        assert_eq!(fmt12(19.739208802178716), "19.7392088022");
        assert_eq!(round12(round12(std::f64::consts::PI)), round12(std::f64::consts::PI));
    }

    #[test]
    fn json_rounding_reaches_nested_numbers() {
        let v = serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 1e-20 / 3.0}});
        let r = round_json(v);
        assert_eq!(r.to_string(), r#"{"a":[0.3,3],"b":{"c":3.33333333333e-21}}"#);
    }

    #[test]
    fn csv_round_trip() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 2.0).unwrap();
        let text = polygon_csv(&sq);
        let back = ConvexPolygon::new(parse_points(&text, "mem").unwrap()).unwrap();
        assert_eq!(back.vertices(), sq.vertices());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = parse_points("0,0\n1,0\n1;1\n", "shape.csv").unwrap_err();
        assert_eq!(err.to_string(), "shape.csv: line 3: expected two fields `x,y`");
        assert!(parse_points("0,0\nnan,1\n", "s").is_err());
        assert!(parse_points("x,y\n0,0\n", "s").is_ok());
    }

    #[test]
    fn small_negatives_print_as_zero() {
        assert_eq!(fmt6(-1e-9), "0.000000");
        assert_eq!(fmt6(-0.5), "-0.500000");
    }
}
