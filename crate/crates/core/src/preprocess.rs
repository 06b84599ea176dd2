//! Cloud preprocessing: regression-plane frame and occlusion compensation.
//!
//! The raw cloud is rotated into the frame of its total-least-squares
//! plane (z up, centroid at the origin), then resampled onto a regular
//! grid by linear interpolation over a 2D Delaunay triangulation of the
//! projected points. Occluded patches inside the convex hull get filled;
//! cells outside the hull stay invalid.

use nalgebra::{Matrix3, Point3, Vector3};
use spade::{
    DelaunayTriangulation, HasPosition, Point2 as SpadePoint, PositionInTriangulation,
    Triangulation,
};

use crate::cloud::PointCloud;
use crate::{Error, Result};

/// Total-least-squares plane `n · p = d` with `‖n‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionPlane {
    pub normal: Vector3<f64>,
    pub d: f64,
    pub centroid: Point3<f64>,
}

impl RegressionPlane {
    /// Signed distance; positive on the side the normal points to.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.d
    }
}

/// Rigid transform `p' = R p + t` into the regression-plane frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl FrameTransform {
    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_inverse(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.transpose() * (p.coords - self.translation))
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud::new(cloud.points.iter().map(|p| self.apply(p)).collect())
    }
}

/// Regular 2D grid of interpolated surface heights in the plane frame.
///
/// Cell `(ix, iy)` is sampled at its center,
/// `(x0 + (ix + 0.5) * pitch, y0 + (iy + 0.5) * pitch)`. Cells whose
/// center falls outside the convex hull of the projected input are
/// invalid and carry no height.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightGrid {
    nx: usize,
    ny: usize,
    pitch: f64,
    origin: (f64, f64),
    heights: Vec<f64>, // NaN where invalid; `valid` is authoritative
    valid: Vec<bool>,
}

impl HeightGrid {
    /// Builds a grid by sampling `f` at every cell center. `None` marks
    /// the cell invalid. Used by tests and the synthetic-scene oracle.
    pub fn from_fn(
        origin: (f64, f64),
        pitch: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> Option<f64>,
    ) -> Self {
        assert!(pitch > 0.0 && nx > 0 && ny > 0);
        let mut heights = vec![f64::NAN; nx * ny];
        let mut valid = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let (x, y) = Self::center_at(origin, pitch, ix, iy);
                if let Some(z) = f(x, y) {
                    heights[iy * nx + ix] = z;
                    valid[iy * nx + ix] = true;
                }
            }
        }
        HeightGrid {
            nx,
            ny,
            pitch,
            origin,
            heights,
            valid,
        }
    }

    fn center_at(origin: (f64, f64), pitch: f64, ix: usize, iy: usize) -> (f64, f64) {
        (
            origin.0 + (ix as f64 + 0.5) * pitch,
            origin.1 + (iy as f64 + 0.5) * pitch,
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        Self::center_at(self.origin, self.pitch, ix, iy)
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        if self.valid[iy * self.nx + ix] {
            Some(self.heights[iy * self.nx + ix])
        } else {
            None
        }
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Min and max height over valid cells.
    pub fn height_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for (h, &v) in self.heights.iter().zip(&self.valid) {
            if v {
                range = Some(match range {
                    None => (*h, *h),
                    Some((lo, hi)) => (lo.min(*h), hi.max(*h)),
                });
            }
        }
        range
    }
}

/// Fits the orthogonal-regression plane (minimal sum of squared
/// point-to-plane distances) through the cloud.
///
/// The normal points away from the bulk of the terrain: the sign is
/// chosen so that at most half the points lie strictly on the positive
/// side, ties broken toward +z of the input frame.
pub fn fit_regression_plane(cloud: &PointCloud) -> Result<RegressionPlane> {
    if cloud.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "plane fit needs at least 3 points, got {}",
            cloud.len()
        )));
    }
    let centroid = cloud.centroid().expect("non-empty cloud");
    let mut cov = Matrix3::zeros();
    for p in &cloud.points {
        let r = p - centroid;
        cov += r * r.transpose();
    }
    cov /= cloud.len() as f64;

    let eigen = cov.symmetric_eigen();
    // Sort eigenpairs ascending by eigenvalue.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let lambda_min = eigen.eigenvalues[order[0]].max(0.0);
    let lambda_mid = eigen.eigenvalues[order[1]];
    let lambda_max = eigen.eigenvalues[order[2]];
    if lambda_max <= 0.0 || lambda_mid <= lambda_max * 1e-12 {
        return Err(Error::DegenerateGeometry(
            "points are collinear or coincident; no unique plane".into(),
        ));
    }
    let _ = lambda_min;
    let mut normal: Vector3<f64> = eigen.eigenvectors.column(order[0]).into();
    normal.normalize_mut();

    // Orient: majority of points at non-positive signed distance.
    let d0 = normal.dot(&centroid.coords);
    let mut above = 0usize;
    let mut below = 0usize;
    for p in &cloud.points {
        let s = normal.dot(&p.coords) - d0;
        if s > 0.0 {
            above += 1;
        } else if s < 0.0 {
            below += 1;
        }
    }
    let flip = if above != below {
        above > below
    } else {
        // Tie: point toward +z of the input frame, further ties resolved
        // lexicographically so the result is deterministic.
        if normal.z != 0.0 {
            normal.z < 0.0
        } else if normal.y != 0.0 {
            normal.y < 0.0
        } else {
            normal.x < 0.0
        }
    };
    if flip {
        normal = -normal;
    }

    Ok(RegressionPlane {
        normal,
        d: normal.dot(&centroid.coords),
        centroid,
    })
}

/// Builds the rotation+translation that maps the fitted plane's normal to
/// +z and the cloud centroid to the origin.
///
/// The in-plane x axis is the normalized projection of the input x axis
/// onto the plane (the input y axis when the normal is parallel to x),
/// which makes the frame deterministic.
pub fn make_frame_transform(plane: &RegressionPlane) -> FrameTransform {
    let z_axis = plane.normal;
    let project = |v: Vector3<f64>| v - z_axis * z_axis.dot(&v);
    let mut x_axis = project(Vector3::x());
    if x_axis.norm() < 1e-9 {
        x_axis = project(Vector3::y());
    }
    x_axis.normalize_mut();
    let y_axis = z_axis.cross(&x_axis);
    let rotation = Matrix3::from_rows(&[x_axis.transpose(), y_axis.transpose(), z_axis.transpose()]);
    FrameTransform {
        rotation,
        translation: -(rotation * plane.centroid.coords),
    }
}

struct GridVertex {
    pos: SpadePoint<f64>,
    z: f64,
}

impl HasPosition for GridVertex {
    type Scalar = f64;
    fn position(&self) -> SpadePoint<f64> {
        self.pos
    }
}

/// Transforms the cloud into the plane frame and resamples it onto a grid
/// of the given pitch by barycentric-linear interpolation over the 2D
/// Delaunay triangulation of the projected points.
///
/// Points that project onto an identical (x, y) location keep the first
/// occurrence (deterministic tie-breaking by input index); distinct
/// projections inside one grid cell all enter the triangulation.
pub fn interpolate_occlusions(
    cloud: &PointCloud,
    transform: &FrameTransform,
    pitch: f64,
) -> Result<HeightGrid> {
    if !(pitch > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid pitch must be positive, got {pitch}"
        )));
    }
    let transformed: Vec<Point3<f64>> = cloud.points.iter().map(|p| transform.apply(p)).collect();

    let mut seen = std::collections::HashSet::with_capacity(transformed.len());
    let mut vertices = Vec::with_capacity(transformed.len());
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &transformed {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            vertices.push(GridVertex {
                pos: SpadePoint::new(p.x, p.y),
                z: p.z,
            });
        }
    }
    if vertices.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "only {} distinct projected points; triangulation needs 3",
            vertices.len()
        )));
    }

    let triangulation: DelaunayTriangulation<GridVertex> =
        DelaunayTriangulation::bulk_load_stable(vertices).map_err(|e| {
            Error::InvalidParameter(format!("coordinates unusable for triangulation: {e}"))
        })?;
    if triangulation.num_inner_faces() == 0 {
        return Err(Error::DegenerateGeometry(
            "projected points are collinear; no triangulation".into(),
        ));
    }

    let nx = (((max_x - min_x) / pitch).ceil() as usize).max(1);
    let ny = (((max_y - min_y) / pitch).ceil() as usize).max(1);
    let origin = (min_x, min_y);

    let mut heights = vec![f64::NAN; nx * ny];
    let mut valid = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let (x, y) = HeightGrid::center_at(origin, pitch, ix, iy);
            if let Some(z) = interpolate_at(&triangulation, x, y) {
                heights[iy * nx + ix] = z;
                valid[iy * nx + ix] = true;
            }
        }
    }

    Ok(HeightGrid {
        nx,
        ny,
        pitch,
        origin,
        heights,
        valid,
    })
}

fn interpolate_at(tri: &DelaunayTriangulation<GridVertex>, x: f64, y: f64) -> Option<f64> {
    let query = SpadePoint::new(x, y);
    match tri.locate(query) {
        PositionInTriangulation::OnVertex(v) => Some(tri.vertex(v).data().z),
        PositionInTriangulation::OnEdge(e) => {
            let edge = tri.directed_edge(e);
            let [a, b] = edge.vertices();
            let (pa, pb) = (a.data(), b.data());
            let (ax, ay) = (pa.pos.x, pa.pos.y);
            let (bx, by) = (pb.pos.x, pb.pos.y);
            let len2 = (bx - ax).powi(2) + (by - ay).powi(2);
            if len2 == 0.0 {
                return Some(pa.z);
            }
            let t = ((x - ax) * (bx - ax) + (y - ay) * (by - ay)) / len2;
            Some(pa.z + (pb.z - pa.z) * t.clamp(0.0, 1.0))
        }
        PositionInTriangulation::OnFace(f) => {
            let face = tri.face(f);
            let [va, vb, vc] = face.vertices();
            let (a, b, c) = (va.data(), vb.data(), vc.data());
            let area = cross2(
                b.pos.x - a.pos.x,
                b.pos.y - a.pos.y,
                c.pos.x - a.pos.x,
                c.pos.y - a.pos.y,
            );
            if area == 0.0 {
                return Some(a.z);
            }
            let wa = cross2(b.pos.x - x, b.pos.y - y, c.pos.x - x, c.pos.y - y) / area;
            let wb = cross2(c.pos.x - x, c.pos.y - y, a.pos.x - x, a.pos.y - y) / area;
            let wc = 1.0 - wa - wb;
            Some(wa * a.z + wb * b.z + wc * c.z)
        }
        PositionInTriangulation::OutsideOfConvexHull(_) | PositionInTriangulation::NoTriangulation => {
            None
        }
    }
}

#[inline]
fn cross2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Point3;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn grid_cloud(f: impl Fn(f64, f64) -> f64) -> PointCloud {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                let (x, y) = (i as f64 * 0.05, j as f64 * 0.05);
                pts.push(Point3::new(x, y, f(x, y)));
            }
        }
        PointCloud::new(pts)
    }

    #[test]
    fn flat_plane_recovers_unit_z() {
        let plane = fit_regression_plane(&grid_cloud(|_, _| 0.0)).unwrap();
        assert_eq!(plane.normal, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(plane.d, 0.0);
    }

    #[test]
    fn inclined_plane_z_equals_x() {
        let plane = fit_regression_plane(&grid_cloud(|x, _| x)).unwrap();
        let expected = Vector3::new(-1.0, 0.0, 1.0) / 2.0f64.sqrt();
        assert_relative_eq!(plane.normal, expected, epsilon = 1e-12);
        assert!(plane.d.abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let cloud = PointCloud::from_coords((0..10).map(|i| (i as f64, 2.0 * i as f64, 0.0)));
        assert!(matches!(
            fit_regression_plane(&cloud),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    /// Independent oracle: the plane normal is the right-singular vector
    /// of the smallest singular value of the centered data matrix.
    fn svd_plane_normal(cloud: &PointCloud) -> Vector3<f64> {
        let centroid = cloud.centroid().unwrap();
        let mut m = nalgebra::DMatrix::zeros(cloud.len(), 3);
        for (i, p) in cloud.points.iter().enumerate() {
            let r = p - centroid;
            m[(i, 0)] = r.x;
            m[(i, 1)] = r.y;
            m[(i, 2)] = r.z;
        }
        let svd = m.svd(false, true);
        let v_t = svd.v_t.unwrap();
        let idx = (0..3)
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap();
        Vector3::new(v_t[(idx, 0)], v_t[(idx, 1)], v_t[(idx, 2)]).normalize()
    }

    #[test]
    fn noisy_plane_matches_svd_oracle_and_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            let noise: f64 = rng.gen_range(-0.002..0.002);
            pts.push(Point3::new(x, y, 2.0 * x + 3.0 * y + 1.0 + noise));
        }
        let cloud = PointCloud::new(pts);
        let plane = fit_regression_plane(&cloud).unwrap();

        // Truth: z = 2x + 3y + 1  ⇒  normal ∝ (-2, -3, 1).
        let truth = Vector3::new(-2.0, -3.0, 1.0).normalize();
        let aligned = plane.normal.dot(&truth).abs();
        assert!(
            (1.0 - aligned) < 1e-2,
            "normal {:?} deviates from truth",
            plane.normal
        );

        let oracle = svd_plane_normal(&cloud);
        assert!(
            (plane.normal.dot(&oracle).abs() - 1.0).abs() < 1e-9,
            "eigen fit and SVD oracle disagree"
        );
    }

    #[test]
    fn transform_identity_for_flat_plane() {
        let cloud = grid_cloud(|_, _| 0.0);
        let plane = fit_regression_plane(&cloud).unwrap();
        let t = make_frame_transform(&plane);
        assert_relative_eq!(t.rotation, Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(
            t.translation,
            -plane.centroid.coords,
            epsilon = 1e-12
        );
    }

    #[test]
    fn transform_flips_downward_normal() {
        let plane = RegressionPlane {
            normal: Vector3::new(0.0, 0.0, -1.0),
            d: 0.0,
            centroid: Point3::origin(),
        };
        let t = make_frame_transform(&plane);
        let mapped = t.rotation * plane.normal;
        assert_relative_eq!(mapped, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
        assert_relative_eq!(t.rotation.determinant(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn transform_aligns_random_plane_and_preserves_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = Vec::new();
        for _ in 0..500 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            let noise: f64 = rng.gen_range(-0.01..0.01);
            pts.push(Point3::new(x, y, -0.7 * x + 0.2 * y + noise));
        }
        let cloud = PointCloud::new(pts);
        let plane = fit_regression_plane(&cloud).unwrap();
        let t = make_frame_transform(&plane);

        let mapped_normal = t.rotation * plane.normal;
        assert_relative_eq!(mapped_normal, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-9);

        // Independent residual: mean squared orthogonal distance.
        let residual: f64 = cloud
            .points
            .iter()
            .map(|p| plane.signed_distance(p).powi(2))
            .sum::<f64>()
            / cloud.len() as f64;
        let transformed = t.apply_cloud(&cloud);
        let mean_z: f64 =
            transformed.points.iter().map(|p| p.z).sum::<f64>() / transformed.len() as f64;
        let z_var: f64 = transformed
            .points
            .iter()
            .map(|p| (p.z - mean_z).powi(2))
            .sum::<f64>()
            / transformed.len() as f64;
        assert_relative_eq!(z_var, residual, epsilon = 1e-9);
    }

    #[test]
    fn transform_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plane = RegressionPlane {
            normal: Vector3::new(0.3, -0.4, 0.866).normalize(),
            d: 0.25,
            centroid: Point3::new(0.1, 0.2, 0.3),
        };
        let t = make_frame_transform(&plane);
        for _ in 0..200 {
            let a = Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let b = Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let before = (a - b).norm();
            let after = (t.apply(&a) - t.apply(&b)).norm();
            assert!((before - after).abs() < 1e-9);
        }
    }

    /// Perturbing the fitted normal by small rotations about 26 lattice
    /// axes never lowers the orthogonal residual.
    #[test]
    fn plane_fit_is_a_local_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        for _ in 0..300 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            pts.push(Point3::new(x, y, 0.5 * x - 0.3 * y + rng.gen_range(-0.05..0.05)));
        }
        let cloud = PointCloud::new(pts);
        let plane = fit_regression_plane(&cloud).unwrap();

        let residual_for = |n: &Vector3<f64>| -> f64 {
            let d = n.dot(&plane.centroid.coords);
            cloud
                .points
                .iter()
                .map(|p| (n.dot(&p.coords) - d).powi(2))
                .sum()
        };
        let base = residual_for(&plane.normal);

        for dx in -1i32..=1 {
            for dy in -1i32..=1 {
                for dz in -1i32..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let axis = Vector3::new(dx as f64, dy as f64, dz as f64).normalize();
                    let rot = nalgebra::Rotation3::from_axis_angle(
                        &nalgebra::Unit::new_normalize(axis),
                        1e-3,
                    );
                    let perturbed = rot * plane.normal;
                    assert!(
                        residual_for(&perturbed) >= base - 1e-12,
                        "perturbation about {axis:?} lowered the residual"
                    );
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_constant_over_annulus_hole() {
        // Ring of points at z = 0.5 with an empty disc in the middle.
        let mut pts = Vec::new();
        for ring in 0..8 {
            let r = 0.5 + 0.08 * ring as f64;
            for k in 0..64 {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                pts.push(Point3::new(r * a.cos(), r * a.sin(), 0.5));
            }
        }
        let cloud = PointCloud::new(pts);
        let plane = RegressionPlane {
            normal: Vector3::z(),
            d: 0.5,
            centroid: Point3::new(0.0, 0.0, 0.5),
        };
        let t = make_frame_transform(&plane);
        let grid = interpolate_occlusions(&cloud, &t, 0.05).unwrap();
        let mut checked = 0;
        let (nx, ny) = grid.dims();
        for iy in 0..ny {
            for ix in 0..nx {
                if let Some(z) = grid.get(ix, iy) {
                    // Heights are relative to the centroid after the transform.
                    assert!((z - 0.0).abs() < 1e-12, "cell ({ix},{iy}) has z = {z}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "too few valid cells: {checked}");
    }

    #[test]
    fn interpolation_exact_on_affine_surface() {
        // Sparse scattered samples of z = 2x + 3y, identity transform.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut pts = Vec::new();
        for _ in 0..60 {
            let x: f64 = rng.gen_range(0.0..1.0);
            let y: f64 = rng.gen_range(0.0..1.0);
            pts.push(Point3::new(x, y, 2.0 * x + 3.0 * y));
        }
        let cloud = PointCloud::new(pts);
        let identity = FrameTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        };
        let grid = interpolate_occlusions(&cloud, &identity, 0.02).unwrap();
        let (nx, ny) = grid.dims();
        let mut checked = 0;
        for iy in 0..ny {
            for ix in 0..nx {
                if let Some(z) = grid.get(ix, iy) {
                    let (x, y) = grid.cell_center(ix, iy);
                    assert!(
                        (z - (2.0 * x + 3.0 * y)).abs() < 1e-12,
                        "cell ({ix},{iy}): {z} vs {}",
                        2.0 * x + 3.0 * y
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 200);
    }

    #[test]
    fn grid_nodes_coinciding_with_vertices_are_exact() {
        // Input points placed exactly on cell centers of an affine surface.
        let pitch = 0.1;
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let x = (i as f64 + 0.5) * pitch;
                let y = (j as f64 + 0.5) * pitch;
                pts.push(Point3::new(x, y, 1.5 * x - 0.5 * y));
            }
        }
        let cloud = PointCloud::new(pts.clone());
        let identity = FrameTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        };
        let grid = interpolate_occlusions(&cloud, &identity, pitch).unwrap();
        for p in &pts {
            let ix = ((p.x - grid.origin().0) / pitch - 0.5).round() as usize;
            let iy = ((p.y - grid.origin().1) / pitch - 0.5).round() as usize;
            if ix < grid.dims().0 && iy < grid.dims().1 {
                let (cx, cy) = grid.cell_center(ix, iy);
                if (cx - p.x).abs() < 1e-12 && (cy - p.y).abs() < 1e-12 {
                    let z = grid.get(ix, iy).expect("vertex node must be valid");
                    assert_eq!(z, p.z, "node ({ix},{iy}) not exact");
                }
            }
        }
    }

    #[test]
    fn collinear_projection_is_degenerate() {
        let cloud = PointCloud::from_coords((0..20).map(|i| (i as f64 * 0.1, 0.0, (i % 5) as f64)));
        let identity = FrameTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        };
        assert!(matches!(
            interpolate_occlusions(&cloud, &identity, 0.05),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn wedge_occlusion_bounded_by_hole_sagitta() {
        // Hemisphere r = 0.5 m sampled on rings, minus a 90° azimuth wedge.
        let r = 0.5;
        let rings = 100;
        let ring_spacing = r / rings as f64;
        let mut pts = Vec::new();
        for ring in 0..rings {
            let rho = r * ring as f64 / rings as f64;
            let n = (8 + ring * 8).max(8);
            for k in 0..n {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                if (0.0..std::f64::consts::FRAC_PI_2).contains(&a) && rho > 0.02 {
                    continue; // occluded wedge
                }
                let z = (r * r - rho * rho).sqrt();
                pts.push(Point3::new(rho * a.cos(), rho * a.sin(), z));
            }
        }
        let cloud = PointCloud::new(pts);
        let identity = FrameTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        };
        let grid = interpolate_occlusions(&cloud, &identity, 0.02).unwrap();

        let (nx, ny) = grid.dims();
        for iy in 0..ny {
            for ix in 0..nx {
                let Some(z) = grid.get(ix, iy) else { continue };
                let (x, y) = grid.cell_center(ix, iy);
                let rho = (x * x + y * y).sqrt();
                if rho >= r {
                    continue;
                }
                let truth = (r * r - rho * rho).sqrt();
                let angle = y.atan2(x);
                let in_wedge = (0.0..std::f64::consts::FRAC_PI_2).contains(&angle);
                // Linear interpolation of a convex surface never overshoots.
                assert!(z <= truth + 1e-9, "overshoot at ({x:.3},{y:.3})");
                if in_wedge && rho <= 0.6 * r {
                    // Chord across the wedge through this node spans radius
                    // rho * sqrt(2) on both boundary rays (up to one ring of
                    // sampling slack); its sagitta at the node bounds how far
                    // interpolation can undercut.
                    let chord_rho = (rho * std::f64::consts::SQRT_2 + ring_spacing).min(r);
                    let chord_z = (r * r - chord_rho * chord_rho).sqrt();
                    let sagitta = truth - chord_z;
                    assert!(
                        truth - z <= sagitta * 1.05 + 1e-6,
                        "undercut {} exceeds sagitta {} at rho {:.3}",
                        truth - z,
                        sagitta,
                        rho
                    );
                }
            }
        }
    }
}
