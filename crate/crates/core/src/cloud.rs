//! Point cloud containers.
//!
//! Coordinates are stored as `f64` meters regardless of the on-disk width;
//! `float` PLY inputs are widened on read so that plane fitting and
//! triangulation do not accumulate `f32` rounding error.

use nalgebra::Point3;

/// An ordered collection of 3D points in meters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self { points }
    }

    pub fn from_coords(coords: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        Self {
            points: coords
                .into_iter()
                .map(|(x, y, z)| Point3::new(x, y, z))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Centroid of all points. `None` for an empty cloud.
    pub fn centroid(&self) -> Option<Point3<f64>> {
        if self.points.is_empty() {
            return None;
        }
        let mut sum = nalgebra::Vector3::zeros();
        for p in &self.points {
            sum += p.coords;
        }
        Some(Point3::from(sum / self.points.len() as f64))
    }
}

/// A point cloud with a graspability score per point.
///
/// Scores are kept as `f32`; they are ratios of voxel counts and exact at
/// that width. `points.len() == scores.len()` always holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredCloud {
    pub points: Vec<Point3<f64>>,
    pub scores: Vec<f32>,
}

impl ScoredCloud {
    /// Builds a scored cloud, checking the length and range invariants.
    pub fn new(points: Vec<Point3<f64>>, scores: Vec<f32>) -> crate::Result<Self> {
        if points.len() != scores.len() {
            return Err(crate::Error::InvalidParameter(format!(
                "scored cloud has {} points but {} scores",
                points.len(),
                scores.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(crate::Error::InvalidParameter(format!(
                "score {s} outside [0, 1]"
            )));
        }
        Ok(Self { points, scores })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_of_triangle() {
        let cloud = PointCloud::from_coords([(0.0, 0.0, 0.0), (3.0, 0.0, 0.0), (0.0, 3.0, 0.0)]);
        let c = cloud.centroid().unwrap();
        assert_eq!(c, Point3::new(1.0, 1.0, 0.0));
    }

    #[test]
    fn scored_cloud_rejects_mismatched_lengths() {
        let r = ScoredCloud::new(vec![Point3::origin()], vec![]);
        assert!(matches!(r, Err(crate::Error::InvalidParameter(_))));
    }

    #[test]
    fn scored_cloud_rejects_out_of_range_scores() {
        let r = ScoredCloud::new(vec![Point3::origin()], vec![1.5]);
        assert!(matches!(r, Err(crate::Error::InvalidParameter(_))));
        let r = ScoredCloud::new(vec![Point3::origin()], vec![f32::NAN]);
        assert!(matches!(r, Err(crate::Error::InvalidParameter(_))));
    }
}
