//! Short textual set descriptions, e.g. `ball:0,1`, `seg:-1,1`, `box:0,1,0,1`,
//! `hull:0,1,1i`, `union:ball:-1,0.3|ball:1,0.3`.
//!
//! Coordinates of a point in `C^n` are separated by `;` (`ball:0;0,1` is the
//! unit ball of `C^2`). A description starting with `{` is read as JSON.

use super::{CompactSet, GeometryError};
use crate::point::Point;
use num_complex::Complex64;

pub fn parse_short(text: &str) -> Result<CompactSet, GeometryError> {
    let text = text.trim();
    let err = || GeometryError::Parse(text.to_string());
    if text.starts_with('{') {
        let set: CompactSet = serde_json::from_str(text).map_err(|_| err())?;
        set.validate()?;
        return Ok(set);
    }
    let (kind, body) = text.split_once(':').ok_or_else(err)?;
    let set = match kind {
        "union" => CompactSet::Union {
            parts: body
                .split('|')
                .map(parse_short)
                .collect::<Result<_, _>>()?,
        },
        "ball" | "disk" => {
            let (c, r) = body.rsplit_once(',').ok_or_else(err)?;
            CompactSet::Ball {
                center: parse_point(c).ok_or_else(err)?,
                radius: r.trim().parse().map_err(|_| err())?,
            }
        }
        "seg" | "segment" => {
            let pts = parse_points(body).ok_or_else(err)?;
            if pts.len() != 2 {
                return Err(err());
            }
            CompactSet::Segment {
                a: pts[0].clone(),
                b: pts[1].clone(),
            }
        }
        "hull" => CompactSet::ConvexHull {
            points: parse_points(body).ok_or_else(err)?,
        },
        "box" => {
            let v: Vec<f64> = body
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| err())?;
            if v.len() % 2 != 0 {
                return Err(err());
            }
            CompactSet::Box {
                bounds: v.chunks(2).map(|c| [c[0], c[1]]).collect(),
            }
        }
        _ => return Err(err()),
    };
    set.validate()?;
    Ok(set)
}

fn parse_points(body: &str) -> Option<Vec<Point>> {
    body.split(',').map(parse_point).collect()
}

/// A point of `C^n` written as `;`-separated complex numbers.
pub fn parse_point(text: &str) -> Option<Point> {
    text.split(';')
        .map(parse_complex)
        .collect::<Option<Vec<_>>>()
        .map(Point)
}

/// Parses `2`, `-1.5`, `3i`, `-i`, `0.5+0.2i`, `1e-3-2i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    let Some(head) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = head.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (head[..k].parse().ok()?, &head[k..]),
        None => (0.0, head),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(re, im))
}

/// Short form when one exists, JSON otherwise.
pub fn to_short(set: &CompactSet) -> String {
    fn pt(p: &Point) -> String {
        p.0.iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{}", z.re)
                } else {
                    format!("{}{:+}i", z.re, z.im)
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    }
    match set {
        CompactSet::Ball { center, radius } => format!("ball:{},{}", pt(center), radius),
        CompactSet::Segment { a, b } => format!("seg:{},{}", pt(a), pt(b)),
        CompactSet::ConvexHull { points } => format!(
            "hull:{}",
            points.iter().map(pt).collect::<Vec<_>>().join(",")
        ),
        CompactSet::Box { bounds } => format!(
            "box:{}",
            bounds
                .iter()
                .map(|[a, b]| format!("{a},{b}"))
                .collect::<Vec<_>>()
                .join(",")
        ),
        CompactSet::Union { parts } if parts.iter().all(|p| !matches!(p, CompactSet::Union { .. }) && !to_short(p).starts_with('{')) => {
            format!(
                "union:{}",
                parts.iter().map(to_short).collect::<Vec<_>>().join("|")
            )
        }
        other => serde_json::to_string(other).expect("sets serialize"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2"), Some(Complex64::new(2.0, 0.0)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("3i"), Some(Complex64::new(0.0, 3.0)));
        assert_eq!(parse_complex("0.5+0.2i"), Some(Complex64::new(0.5, 0.2)));
        assert_eq!(parse_complex("1e-3-2i"), Some(Complex64::new(1e-3, -2.0)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn short_forms_round_trip() {
        for s in [
            "ball:0,1",
            "seg:-1,1",
            "box:0,1,0,1",
            "hull:0,1,0+1i",
            "union:ball:-1,0.3|ball:1,0.3",
            "ball:0;0,1",
        ] {
            let set = parse_short(s).unwrap();
            assert_eq!(parse_short(&to_short(&set)).unwrap(), set, "{s}");
        }
    }

    #[test]
    fn json_form_accepted() {
        let set = CompactSet::disk(0.0, 0.0, 1.0).restrict(Point::c1(1.0, 0.0), 0.5);
        let text = to_short(&set);
        assert!(text.starts_with('{'));
        assert_eq!(parse_short(&text).unwrap(), set);
    }

    #[test]
    fn bad_descriptions_rejected() {
        assert!(parse_short("ball:0,-1").is_err());
        assert!(parse_short("blob:1").is_err());
        assert!(parse_short("seg:1").is_err());
    }
}
