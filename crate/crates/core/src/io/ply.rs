//! PLY 1.0 reader/writer for vertex clouds.
//!
//! Reads `format ascii 1.0` and `format binary_little_endian 1.0` files
//! whose `vertex` element carries scalar `float` or `double` x/y/z
//! properties. Big-endian files are rejected. Elements preceding the
//! vertex element are skipped (in binary only when they have a fixed
//! per-item size); everything after the vertex data is ignored.

use nalgebra::Point3;

use super::Colormap;
use crate::cloud::{PointCloud, ScoredCloud};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn from_name(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, kind: Scalar },
    List { name: String },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
    header_lines: usize,
}

/// Returns the declared format if the bytes start with a PLY header.
pub fn sniff(bytes: &[u8]) -> Option<PlyFormat> {
    if !bytes.starts_with(b"ply\n") && !bytes.starts_with(b"ply\r\n") {
        return None;
    }
    let head = &bytes[..bytes.len().min(512)];
    let text = String::from_utf8_lossy(head);
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix("format ") {
            return match rest.split_whitespace().next() {
                Some("ascii") => Some(PlyFormat::Ascii),
                Some("binary_little_endian") => Some(PlyFormat::BinaryLe),
                _ => Some(PlyFormat::BinaryLe), // still a PLY; parse() reports the real error
            };
        }
    }
    Some(PlyFormat::Ascii)
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_magic = false;

    loop {
        let rest = &bytes[pos..];
        let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| {
            Error::parse(format!("line {}", line_no + 1), "header truncated before end_header")
        })?;
        let raw = &rest[..nl];
        pos += nl + 1;
        line_no += 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| Error::parse(format!("line {line_no}"), "header is not valid UTF-8"))?
            .trim_end_matches('\r');

        if line_no == 1 {
            if line != "ply" {
                return Err(Error::parse("line 1", "missing 'ply' magic"));
            }
            saw_magic = true;
            continue;
        }

        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                format = Some(match kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLe,
                    "binary_big_endian" => {
                        return Err(Error::UnsupportedFormat(
                            "big-endian PLY is not supported; re-export as \
                             binary_little_endian or ascii"
                                .into(),
                        ))
                    }
                    other => {
                        return Err(Error::parse(
                            format!("line {line_no}"),
                            format!("unknown PLY format '{other}'"),
                        ))
                    }
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::parse(format!("line {line_no}"), "element without name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| {
                        Error::parse(format!("line {line_no}"), "element without a valid count")
                    })?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| {
                    Error::parse(format!("line {line_no}"), "property before any element")
                })?;
                let kind = tokens
                    .next()
                    .ok_or_else(|| Error::parse(format!("line {line_no}"), "property without type"))?;
                if kind == "list" {
                    let _count_type = tokens.next();
                    let _item_type = tokens.next();
                    let name = tokens.next().ok_or_else(|| {
                        Error::parse(format!("line {line_no}"), "list property without name")
                    })?;
                    element.properties.push(Property::List { name: name.to_string() });
                } else {
                    let scalar = Scalar::from_name(kind).ok_or_else(|| {
                        Error::parse(
                            format!("line {line_no}"),
                            format!("unknown property type '{kind}'"),
                        )
                    })?;
                    let name = tokens.next().ok_or_else(|| {
                        Error::parse(format!("line {line_no}"), "property without name")
                    })?;
                    element.properties.push(Property::Scalar {
                        name: name.to_string(),
                        kind: scalar,
                    });
                }
            }
            Some("end_header") => {
                let format = format.ok_or_else(|| {
                    Error::parse(format!("line {line_no}"), "end_header before format line")
                })?;
                return Ok(Header {
                    format,
                    elements,
                    body_offset: pos,
                    header_lines: line_no,
                });
            }
            Some(other) => {
                return Err(Error::parse(
                    format!("line {line_no}"),
                    format!("unexpected header keyword '{other}'"),
                ));
            }
        }
        if !saw_magic {
            return Err(Error::parse("line 1", "missing 'ply' magic"));
        }
    }
}

/// Index of the x/y/z properties within the vertex element, with types.
struct VertexLayout {
    element_index: usize,
    xyz: [(usize, Scalar); 3],
}

fn vertex_layout(header: &Header) -> Result<VertexLayout> {
    let (element_index, element) = header
        .elements
        .iter()
        .enumerate()
        .find(|(_, e)| e.name == "vertex")
        .ok_or_else(|| Error::UnsupportedFormat("PLY has no 'vertex' element".into()))?;
    let mut xyz = [None, None, None];
    for (i, prop) in element.properties.iter().enumerate() {
        if let Property::Scalar { name, kind } = prop {
            let slot = match name.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => continue,
            };
            if !matches!(kind, Scalar::F32 | Scalar::F64) {
                return Err(Error::UnsupportedFormat(format!(
                    "vertex property '{name}' must be float or double, found {kind:?}"
                )));
            }
            xyz[slot] = Some((i, *kind));
        }
    }
    match xyz {
        [Some(x), Some(y), Some(z)] => Ok(VertexLayout {
            element_index,
            xyz: [x, y, z],
        }),
        _ => Err(Error::UnsupportedFormat(
            "vertex element lacks scalar x, y, z properties".into(),
        )),
    }
}

pub fn parse(bytes: &[u8], expected: PlyFormat) -> Result<Vec<Point3<f64>>> {
    let header = parse_header(bytes)?;
    if header.format != expected {
        return Err(Error::parse(
            "header",
            format!(
                "declared format {:?} does not match requested {:?}",
                header.format, expected
            ),
        ));
    }
    let layout = vertex_layout(&header)?;
    match header.format {
        PlyFormat::Ascii => parse_ascii_body(bytes, &header, &layout),
        PlyFormat::BinaryLe => parse_binary_body(bytes, &header, &layout),
    }
}

fn parse_ascii_body(bytes: &[u8], header: &Header, layout: &VertexLayout) -> Result<Vec<Point3<f64>>> {
    let body = &bytes[header.body_offset..];
    let mut lines = body.split(|&b| b == b'\n');
    let mut line_no = header.header_lines;

    let mut next_line = |line_no: &mut usize| -> Result<&[u8]> {
        loop {
            let raw = lines.next().ok_or_else(|| {
                Error::parse(format!("line {}", *line_no + 1), "unexpected end of file")
            })?;
            *line_no += 1;
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            if !raw.is_empty() {
                return Ok(raw);
            }
        }
    };

    let mut points = Vec::new();
    for (ei, element) in header.elements.iter().enumerate() {
        if ei != layout.element_index {
            for _ in 0..element.count {
                next_line(&mut line_no)?;
            }
            continue;
        }
        points.reserve(element.count);
        for _ in 0..element.count {
            let raw = next_line(&mut line_no)?;
            let line = std::str::from_utf8(raw).map_err(|_| {
                Error::parse(format!("line {line_no}"), "vertex line is not valid UTF-8")
            })?;
            let mut coords = [0.0f64; 3];
            let mut tokens = line.split_whitespace();
            let mut found = 0;
            for (pi, prop) in element.properties.iter().enumerate() {
                match prop {
                    Property::Scalar { name, .. } => {
                        let token = tokens.next().ok_or_else(|| {
                            Error::parse(
                                format!("line {line_no}"),
                                format!("missing value for property '{name}'"),
                            )
                        })?;
                        if let Some(slot) =
                            layout.xyz.iter().position(|&(idx, _)| idx == pi)
                        {
                            coords[slot] = token.parse::<f64>().map_err(|_| {
                                Error::parse(
                                    format!("line {line_no}"),
                                    format!("'{token}' is not a number"),
                                )
                            })?;
                            found += 1;
                        }
                    }
                    Property::List { name } => {
                        let n: usize = tokens
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| {
                                Error::parse(
                                    format!("line {line_no}"),
                                    format!("bad list count for '{name}'"),
                                )
                            })?;
                        for _ in 0..n {
                            tokens.next().ok_or_else(|| {
                                Error::parse(
                                    format!("line {line_no}"),
                                    format!("truncated list '{name}'"),
                                )
                            })?;
                        }
                    }
                }
            }
            debug_assert_eq!(found, 3);
            points.push(Point3::new(coords[0], coords[1], coords[2]));
        }
        break; // everything after the vertex element is irrelevant
    }
    Ok(points)
}

fn parse_binary_body(
    bytes: &[u8],
    header: &Header,
    layout: &VertexLayout,
) -> Result<Vec<Point3<f64>>> {
    let mut offset = header.body_offset;
    for (ei, element) in header.elements.iter().enumerate() {
        let mut stride = 0usize;
        for prop in &element.properties {
            match prop {
                Property::Scalar { kind, .. } => stride += kind.size(),
                Property::List { name } => {
                    return Err(Error::UnsupportedFormat(format!(
                        "binary element '{}' has variable-length list property '{name}'; \
                         cannot locate vertex data",
                        element.name
                    )));
                }
            }
        }
        if ei != layout.element_index {
            offset = offset
                .checked_add(stride.saturating_mul(element.count))
                .filter(|&end| end <= bytes.len())
                .ok_or_else(|| {
                    Error::parse(
                        format!("byte {offset}"),
                        format!("file ends inside element '{}'", element.name),
                    )
                })?;
            continue;
        }

        // Byte offset of each xyz property within one vertex record.
        let mut prop_offsets = [0usize; 3];
        {
            let mut acc = 0usize;
            for (pi, prop) in element.properties.iter().enumerate() {
                if let Property::Scalar { kind, .. } = prop {
                    for (slot, &(idx, _)) in layout.xyz.iter().enumerate() {
                        if idx == pi {
                            prop_offsets[slot] = acc;
                        }
                    }
                    acc += kind.size();
                }
            }
        }

        let need = stride
            .checked_mul(element.count)
            .and_then(|n| n.checked_add(offset))
            .ok_or_else(|| Error::parse(format!("byte {offset}"), "vertex data size overflows"))?;
        if need > bytes.len() {
            return Err(Error::parse(
                format!("byte {}", bytes.len()),
                format!(
                    "vertex data truncated: need {} bytes, file has {}",
                    need,
                    bytes.len()
                ),
            ));
        }

        let mut points = Vec::with_capacity(element.count);
        for v in 0..element.count {
            let base = offset + v * stride;
            let mut coords = [0.0f64; 3];
            for slot in 0..3 {
                let (_, kind) = layout.xyz[slot];
                let at = base + prop_offsets[slot];
                coords[slot] = match kind {
                    Scalar::F32 => {
                        f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as f64
                    }
                    Scalar::F64 => f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()),
                    _ => unreachable!("vertex_layout admits only float/double"),
                };
            }
            points.push(Point3::new(coords[0], coords[1], coords[2]));
        }
        return Ok(points);
    }
    unreachable!("vertex_layout guarantees the vertex element exists")
}

pub fn write_cloud(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + cloud.len() * 24);
    let format_line = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLe => "binary_little_endian",
    };
    out.extend_from_slice(
        format!(
            "ply\nformat {format_line} 1.0\nelement vertex {}\n\
             property double x\nproperty double y\nproperty double z\nend_header\n",
            cloud.len()
        )
        .as_bytes(),
    );
    for p in &cloud.points {
        match format {
            PlyFormat::Ascii => {
                out.extend_from_slice(format!("{} {} {}\n", p.x, p.y, p.z).as_bytes());
            }
            PlyFormat::BinaryLe => {
                out.extend_from_slice(&p.x.to_le_bytes());
                out.extend_from_slice(&p.y.to_le_bytes());
                out.extend_from_slice(&p.z.to_le_bytes());
            }
        }
    }
    out
}

pub fn write_scored(cloud: &ScoredCloud, format: PlyFormat, colormap: Colormap) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + cloud.len() * 40);
    let format_line = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLe => "binary_little_endian",
    };
    out.extend_from_slice(
        format!(
            "ply\nformat {format_line} 1.0\nelement vertex {}\n\
             property double x\nproperty double y\nproperty double z\n\
             property uchar red\nproperty uchar green\nproperty uchar blue\n\
             property float graspability\nend_header\n",
            cloud.len()
        )
        .as_bytes(),
    );
    for (p, &score) in cloud.points.iter().zip(&cloud.scores) {
        let (r, g, b) = colormap.map(score);
        match format {
            PlyFormat::Ascii => {
                // `{}` on floats prints the shortest digits that round-trip.
                out.extend_from_slice(
                    format!("{} {} {} {r} {g} {b} {score}\n", p.x, p.y, p.z).as_bytes(),
                );
            }
            PlyFormat::BinaryLe => {
                out.extend_from_slice(&p.x.to_le_bytes());
                out.extend_from_slice(&p.y.to_le_bytes());
                out.extend_from_slice(&p.z.to_le_bytes());
                out.extend_from_slice(&[r, g, b]);
                out.extend_from_slice(&score.to_le_bytes());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extra_properties_are_ignored() {
        let text = b"ply\nformat ascii 1.0\ncomment exported\nelement vertex 3\n\
                     property float x\nproperty float nx\nproperty float y\n\
                     property float z\nproperty uchar red\nend_header\n\
                     1 9 2 3 255\n4 9 5 6 255\n7 9 8 9 0\n";
        let pts = parse(text, PlyFormat::Ascii).unwrap();
        assert_eq!(pts[0], Point3::new(1.0, 2.0, 3.0));
        assert_eq!(pts[2], Point3::new(7.0, 8.0, 9.0));
    }

    #[test]
    fn elements_before_vertex_are_skipped() {
        let text = b"ply\nformat ascii 1.0\nelement camera 1\nproperty float fov\n\
                     element vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
                     end_header\n1.57\n0 0 1\n0 1 0\n1 0 0\n";
        let pts = parse(text, PlyFormat::Ascii).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], Point3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn double_precision_vertices_parse() {
        let mut file = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\n\
                         property double x\nproperty double y\nproperty double z\nend_header\n"
            .to_vec();
        for v in [0.1f64, 0.2, 0.3] {
            file.extend_from_slice(&v.to_le_bytes());
        }
        let pts = parse(&file, PlyFormat::BinaryLe).unwrap();
        assert_eq!(pts[0].x.to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn truncated_binary_body_reports_offset() {
        let mut file = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n\
                         property float x\nproperty float y\nproperty float z\nend_header\n"
            .to_vec();
        file.extend_from_slice(&1.0f32.to_le_bytes());
        let err = parse(&file, PlyFormat::BinaryLe).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
    }

    #[test]
    fn integer_xyz_is_unsupported() {
        let text = b"ply\nformat ascii 1.0\nelement vertex 3\nproperty int x\n\
                     property int y\nproperty int z\nend_header\n1 2 3\n4 5 6\n7 8 9\n";
        assert!(matches!(
            parse(text, PlyFormat::Ascii),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn malformed_vertex_line_reports_line_number() {
        let text = b"ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n\
                     property float y\nproperty float z\nend_header\n0 0 0\n1 oops 0\n0 1 0\n";
        match parse(text, PlyFormat::Ascii) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 9"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
