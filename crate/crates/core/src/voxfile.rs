//! Raw binary dump of voxel occupancy, for debug artifacts, fixtures and
//! user-supplied masks of arbitrary shape.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "VXG1"
//! 4       4     u32 dims.x
//! 8       4     u32 dims.y
//! 12      4     u32 dims.z
//! 16      8     f64 voxel size, millimeters
//! 24      24    f64 ×3 origin (meters); zero for masks
//! 48      1     kind: 0 = shell terrain, 1 = filled terrain, 2 = mask
//! 49      —     packed u64 words, x fastest (64 voxels per word, LSB
//!               first), rows ordered y then z; ceil(x/64)·y·z words
//! ```
//!
//! Loads validate the exact byte count, reject stray bits beyond `dims.x`
//! in any row, and (for masks) require odd lateral dims so the pivot is
//! the top-center voxel.

use nalgebra::Point3;

use crate::bitgrid::BitGrid3;
use crate::mask::GripperMask;
use crate::terrain::{FillMode, TerrainArray};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"VXG1";
const HEADER_LEN: usize = 49;

const KIND_SHELL: u8 = 0;
const KIND_FILLED: u8 = 1;
const KIND_MASK: u8 = 2;

fn write_common(
    out: &mut Vec<u8>,
    dims: (usize, usize, usize),
    c_mm: f64,
    origin: Point3<f64>,
    kind: u8,
    words: &[u64],
) {
    out.extend_from_slice(MAGIC);
    for d in [dims.0, dims.1, dims.2] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&c_mm.to_le_bytes());
    for v in [origin.x, origin.y, origin.z] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(kind);
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
}

pub fn write_terrain(terrain: &TerrainArray) -> Vec<u8> {
    let kind = match terrain.mode() {
        FillMode::Shell => KIND_SHELL,
        FillMode::Filled => KIND_FILLED,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + terrain.occupancy().words().len() * 8);
    write_common(
        &mut out,
        terrain.dims(),
        terrain.c_mm(),
        terrain.origin(),
        kind,
        terrain.occupancy().words(),
    );
    out
}

pub fn write_mask(mask: &GripperMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + mask.occupancy().words().len() * 8);
    write_common(
        &mut out,
        mask.dims(),
        mask.c_mm(),
        Point3::origin(),
        KIND_MASK,
        mask.occupancy().words(),
    );
    out
}

struct Parsed {
    grid: BitGrid3,
    c_mm: f64,
    origin: Point3<f64>,
    kind: u8,
}

fn parse(bytes: &[u8]) -> Result<Parsed> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::UnsupportedFormat(
            "not a voxel dump (bad magic, expected \"VXG1\")".into(),
        ));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse(
            format!("byte {}", bytes.len()),
            format!("truncated header, {HEADER_LEN} bytes required"),
        ));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let dims = (
        u32_at(4) as usize,
        u32_at(8) as usize,
        u32_at(12) as usize,
    );
    let c_mm = f64_at(16);
    let origin = Point3::new(f64_at(24), f64_at(32), f64_at(40));
    let kind = bytes[48];
    if kind > KIND_MASK {
        return Err(Error::parse("byte 48", format!("unknown kind {kind}")));
    }
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::parse("byte 4", format!("zero dimension in {dims:?}")));
    }

    let row_words = dims.0.div_ceil(64) as u128;
    let expected_words = row_words * dims.1 as u128 * dims.2 as u128;
    let expected_len = HEADER_LEN as u128 + expected_words * 8;
    if bytes.len() as u128 != expected_len {
        return Err(Error::parse(
            format!("byte {}", bytes.len().min(HEADER_LEN)),
            format!(
                "body length mismatch: dims {dims:?} need {expected_len} bytes total, got {}",
                bytes.len()
            ),
        ));
    }
    let words: Vec<u64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = BitGrid3::from_words(dims, words)?;
    Ok(Parsed {
        grid,
        c_mm,
        origin,
        kind,
    })
}

pub fn read_terrain(bytes: &[u8]) -> Result<TerrainArray> {
    let p = parse(bytes)?;
    let mode = match p.kind {
        KIND_SHELL => FillMode::Shell,
        KIND_FILLED => FillMode::Filled,
        _ => {
            return Err(Error::parse(
                "byte 48",
                "file holds a gripper mask, not a terrain array",
            ))
        }
    };
    TerrainArray::from_occupancy(p.grid, p.c_mm, p.origin, mode)
}

pub fn read_mask(bytes: &[u8]) -> Result<GripperMask> {
    let p = parse(bytes)?;
    if p.kind != KIND_MASK {
        return Err(Error::parse(
            "byte 48",
            "file holds a terrain array, not a gripper mask",
        ));
    }
    GripperMask::from_occupancy(p.grid, p.c_mm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{create_gripper_mask, GripperParams};
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::Rng as _;
    use rand_chacha::ChaCha8Rng;

    fn sample_terrain(mode: FillMode) -> TerrainArray {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = BitGrid3::new((70, 9, 5));
        for z in 0..5 {
            for y in 0..9 {
                for x in 0..70 {
                    if rng.gen_bool(0.3) {
                        g.set(x, y, z, true);
                    }
                }
            }
        }
        TerrainArray::from_occupancy(g, 2.5, Point3::new(-0.1, 0.2, -0.05), mode).unwrap()
    }

    #[test]
    fn terrain_roundtrip_is_exact() {
        for mode in [FillMode::Shell, FillMode::Filled] {
            let t = sample_terrain(mode);
            let bytes = write_terrain(&t);
            let back = read_terrain(&bytes).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn mask_roundtrip_preserves_pivot() {
        let mask = create_gripper_mask(
            &GripperParams {
                palm_diameter: 30.0,
                finger_length: 25.0,
                finger_angle_range: (0.0, 25.0),
                spine_clearance: 3.0,
            },
            5.0,
        )
        .unwrap();
        let bytes = write_mask(&mask);
        let back = read_mask(&bytes).unwrap();
        assert_eq!(back, mask);
        assert_eq!(back.pivot(), mask.pivot());
    }

    #[test]
    fn kind_bytes_are_checked() {
        let t = sample_terrain(FillMode::Shell);
        let bytes = write_terrain(&t);
        assert!(matches!(read_mask(&bytes), Err(Error::Parse { .. })));

        let mask = create_gripper_mask(
            &GripperParams {
                palm_diameter: 30.0,
                finger_length: 20.0,
                finger_angle_range: (0.0, 20.0),
                spine_clearance: 0.0,
            },
            10.0,
        )
        .unwrap();
        let bytes = write_mask(&mask);
        assert!(matches!(read_terrain(&bytes), Err(Error::Parse { .. })));
    }

    #[test]
    fn corrupt_files_are_rejected_not_panicking() {
        let t = sample_terrain(FillMode::Filled);
        let good = write_terrain(&t);

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            read_terrain(&bad_magic),
            Err(Error::UnsupportedFormat(_))
        ));

        let truncated = &good[..good.len() - 3];
        assert!(read_terrain(truncated).is_err());

        let mut bad_kind = good.clone();
        bad_kind[48] = 9;
        assert!(read_terrain(&bad_kind).is_err());

        let mut huge_dims = good.clone();
        huge_dims[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(read_terrain(&huge_dims).is_err());
    }

    proptest! {
        #[test]
        fn reader_total_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = read_terrain(&bytes);
            let _ = read_mask(&bytes);
        }

        #[test]
        fn reader_total_on_magic_prefixed_bytes(tail in proptest::collection::vec(any::<u8>(), 0..256)) {
            let mut bytes = MAGIC.to_vec();
            bytes.extend(tail);
            let _ = read_terrain(&bytes);
            let _ = read_mask(&bytes);
        }
    }
}
