//! Whitespace-separated `x y z` text, one point per line.
//!
//! Blank lines and `#` comment lines are skipped. Extra columns beyond the
//! third are ignored so that `x y z intensity` exports parse unchanged.

use nalgebra::Point3;

use crate::{Error, Result};

pub fn parse(bytes: &[u8]) -> Result<Vec<Point3<f64>>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(format!("byte {}", e.valid_up_to()), "not valid UTF-8"))?;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut coords = [0.0f64; 3];
        for (slot, coord) in coords.iter_mut().enumerate() {
            let token = tokens.next().ok_or_else(|| {
                Error::parse(
                    format!("line {}", idx + 1),
                    format!("expected 3 coordinates, found {slot}"),
                )
            })?;
            *coord = token.parse::<f64>().map_err(|_| {
                Error::parse(
                    format!("line {}", idx + 1),
                    format!("'{token}' is not a number"),
                )
            })?;
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    Ok(points)
}

pub fn write(cloud: &crate::cloud::PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * 24);
    for p in &cloud.points {
        out.extend_from_slice(format!("{} {} {}\n", p.x, p.y, p.z).as_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_extra_columns() {
        let pts = parse(b"# header\n1 2 3 0.5\n\n4 5 6\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1], Point3::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn short_line_reports_its_number() {
        match parse(b"1 2 3\n4 5\n") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
