//! Score-to-color maps for PLY output.

/// Maps a score in `[0, 1]` to 8-bit RGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    /// Perceptually uniform dark-violet → green → yellow ramp,
    /// a piecewise-linear approximation with nine anchors.
    ViridisLike,
    /// Black at 0, white at 1.
    Grayscale,
}

// Anchors at t = 0, 1/8, ..., 1.
const VIRIDIS_ANCHORS: [(u8, u8, u8); 9] = [
    (68, 1, 84),
    (71, 44, 122),
    (59, 81, 139),
    (44, 113, 142),
    (33, 144, 141),
    (39, 173, 129),
    (92, 200, 99),
    (170, 220, 50),
    (253, 231, 37),
];

impl Colormap {
    pub fn map(self, score: f32) -> (u8, u8, u8) {
        let t = score.clamp(0.0, 1.0);
        match self {
            Colormap::Grayscale => {
                let v = (t * 255.0).round() as u8;
                (v, v, v)
            }
            Colormap::ViridisLike => {
                let scaled = t * (VIRIDIS_ANCHORS.len() - 1) as f32;
                let i = (scaled.floor() as usize).min(VIRIDIS_ANCHORS.len() - 2);
                let frac = scaled - i as f32;
                let (r0, g0, b0) = VIRIDIS_ANCHORS[i];
                let (r1, g1, b1) = VIRIDIS_ANCHORS[i + 1];
                let lerp = |a: u8, b: u8| (a as f32 + (b as f32 - a as f32) * frac).round() as u8;
                (lerp(r0, r1), lerp(g0, g1), lerp(b0, b1))
            }
        }
    }
}
