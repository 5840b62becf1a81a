//! Intersection-over-union for yaw-rotated boxes, in the ground plane (BEV)
//! and in 3D (BEV footprint times vertical overlap).

use super::BoundingBox3D;
use nalgebra::Vector2;

/// Footprint corners of the box on the ground plane, counter-clockwise.
fn footprint(b: &BoundingBox3D) -> [Vector2<f64>; 4] {
    let yaw = b.yaw();
    let (s, c) = yaw.sin_cos();
    let (hl, hw) = (b.dimensions.length * 0.5, b.dimensions.width * 0.5);
    let center = Vector2::new(b.center.x, b.center.y);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .map(|(x, y)| center + Vector2::new(c * x - s * y, s * x + c * y))
}

fn polygon_area(poly: &[Vector2<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    acc.abs() * 0.5
}

/// Sutherland-Hodgman clip of `subject` against convex `clip` (CCW).
fn clip_polygon(subject: &[Vector2<f64>], clip: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut output: Vec<Vector2<f64>> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let edge = b - a;
        let inside = |p: &Vector2<f64>| edge.x * (p.y - a.y) - edge.y * (p.x - a.x) >= 0.0;
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let cur_in = inside(&cur);
            let prev_in = inside(&prev);
            if cur_in != prev_in {
                // Edge crossing: intersect segment prev->cur with the clip line.
                let d = cur - prev;
                let denom = edge.x * d.y - edge.y * d.x;
                if denom.abs() > 1e-15 {
                    let t = (edge.x * (a.y - prev.y) - edge.y * (a.x - prev.x)) / denom;
                    output.push(prev + d * t.clamp(0.0, 1.0));
                }
            }
            if cur_in {
                output.push(cur);
            }
        }
    }
    output
}

/// Orders the pair deterministically so clipping (which is not bit-exactly
/// commutative) yields the identical result for `(a, b)` and `(b, a)`.
fn ordered<'a>(a: &'a BoundingBox3D, b: &'a BoundingBox3D) -> (&'a BoundingBox3D, &'a BoundingBox3D) {
    let key = |x: &BoundingBox3D| {
        (
            x.center.x,
            x.center.y,
            x.dimensions.length,
            x.dimensions.width,
            x.yaw(),
        )
    };
    if key(a) <= key(b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn bev_intersection_area(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let (a, b) = ordered(a, b);
    let pa = footprint(a);
    let pb = footprint(b);
    polygon_area(&clip_polygon(&pa, &pb))
}

/// BEV IoU of the yaw-rotated ground-plane rectangles.
pub fn iou_bev(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let inter = bev_intersection_area(a, b);
    let area_a = a.dimensions.length * a.dimensions.width;
    let area_b = b.dimensions.length * b.dimensions.width;
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// 3D IoU: BEV intersection times vertical overlap over the volume union.
pub fn iou_3d(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let inter_bev = bev_intersection_area(a, b);
    let za = (a.center.z - a.dimensions.height * 0.5, a.center.z + a.dimensions.height * 0.5);
    let zb = (b.center.z - b.dimensions.height * 0.5, b.center.z + b.dimensions.height * 0.5);
    let overlap = (za.1.min(zb.1) - za.0.max(zb.0)).max(0.0);
    let inter = inter_bev * overlap;
    let union = a.dimensions.volume() + b.dimensions.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, WORLD};
    use crate::scene::Dimensions;
    use nalgebra::Vector3;

    fn boxat(x: f64, y: f64, dims: (f64, f64, f64), yaw: f64) -> BoundingBox3D {
        BoundingBox3D::new(
            Vector3::new(x, y, dims.0 * 0.5),
            Dimensions::new(dims.0, dims.1, dims.2),
            Rotation::from_yaw(yaw),
            WORLD,
        )
    }

    #[test]
    fn identical_boxes_have_iou_one() {
        let b = boxat(3.0, -1.0, (1.5, 1.8, 4.0), 0.7);
        assert!((iou_bev(&b, &b) - 1.0).abs() < 1e-12);
        assert!((iou_3d(&b, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_boxes_have_iou_zero() {
        let a = boxat(0.0, 0.0, (2.0, 4.0, 4.0), 0.0);
        let b = boxat(100.0, 0.0, (2.0, 4.0, 4.0), 0.0);
        assert_eq!(iou_bev(&a, &b), 0.0);
        assert_eq!(iou_3d(&a, &b), 0.0);
    }

    #[test]
    fn unit_squares_offset_half() {
        // Two axis-aligned unit squares offset by 0.5 in x: overlap 0.5,
        // union 1.5, IoU 1/3.
        let a = boxat(0.0, 0.0, (1.0, 1.0, 1.0), 0.0);
        let b = boxat(0.5, 0.0, (1.0, 1.0, 1.0), 0.0);
        assert!((iou_bev(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let a = boxat(1.0, 2.0, (1.5, 1.8, 4.0), 0.3);
        let b = boxat(2.0, 2.5, (1.4, 2.0, 4.5), -0.4);
        assert_eq!(iou_bev(&a, &b), iou_bev(&b, &a));
        assert_eq!(iou_3d(&a, &b), iou_3d(&b, &a));
    }

    #[test]
    fn iou3d_bounded_by_bev() {
        let a = boxat(1.0, 2.0, (1.5, 1.8, 4.0), 0.3);
        let mut b = boxat(1.5, 2.2, (1.5, 2.0, 4.5), -0.2);
        b.center.z += 0.4;
        assert!(iou_3d(&a, &b) <= iou_bev(&a, &b) + 1e-12);
    }

    #[test]
    fn rotated_overlap_known_value() {
        // A 2x2 square and the same square rotated 45 degrees share the
        // octagon intersection of area 8*(sqrt(2)-1).
        let a = boxat(0.0, 0.0, (1.0, 2.0, 2.0), 0.0);
        let b = boxat(0.0, 0.0, (1.0, 2.0, 2.0), std::f64::consts::FRAC_PI_4);
        let inter = 8.0 * (2f64.sqrt() - 1.0);
        let expected = inter / (8.0 - inter);
        assert!((iou_bev(&a, &b) - expected).abs() < 1e-10);
    }

    #[test]
    fn invariant_under_common_rigid_transform() {
        let a = boxat(1.0, 2.0, (1.5, 1.8, 4.0), 0.3);
        let b = boxat(2.0, 2.5, (1.4, 2.0, 4.5), -0.4);
        let before = iou_bev(&a, &b);
        let t = crate::geometry::Transform::new(
            Rotation::from_yaw(1.2),
            Vector3::new(7.0, -3.0, 0.0),
            WORLD,
            WORLD,
        );
        let after = iou_bev(&a.transformed(&t), &b.transformed(&t));
        assert!((before - after).abs() < 1e-9);
    }
}
