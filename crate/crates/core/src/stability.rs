//! Support-polygon check: is the centre of gravity inside the convex hull
//! of the planted feet?

pub type Point = [f64; 2];

/// Boundary tolerance, meters.
const EPS: f64 = 1e-12;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, collinear
/// points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    if len == 0.0 {
        return (p[0] - a[0]).hypot(p[1] - a[1]) <= EPS;
    }
    if cross(a, b, p).abs() / len > EPS {
        return false;
    }
    let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    dot >= -EPS * len && dot <= len * len + EPS * len
}

/// True iff `cog` lies inside or on the boundary of the hull of
/// `stance_feet`. An empty foot set supports nothing.
pub fn stability_check(stance_feet: &[Point], cog: Point) -> bool {
    let hull = convex_hull(stance_feet);
    match hull.len() {
        0 => false,
        1 => on_segment(cog, hull[0], hull[0]),
        2 => on_segment(cog, hull[0], hull[1]),
        n => (0..n).all(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            cross(a, b, cog) >= -EPS * len
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pentagon_contains_centroid() {
        let feet: Vec<Point> = (0..5)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
                [a.cos(), a.sin()]
            })
            .collect();
        assert!(stability_check(&feet, [0.0, 0.0]));
    }

    #[test]
    fn far_point_outside() {
        assert!(!stability_check(
            &[[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]],
            [10.0, 10.0]
        ));
    }

    #[test]
    fn boundary_counts_as_inside() {
        assert!(stability_check(&[[0.0, 0.0], [1.0, 0.0]], [0.5, 0.0]));
        assert!(!stability_check(&[[0.0, 0.0], [1.0, 0.0]], [1.5, 0.0]));
        assert!(stability_check(
            &[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]],
            [1.0, 1.0]
        ));
        assert!(stability_check(&[[0.3, 0.2]], [0.3, 0.2]));
        assert!(!stability_check(&[[0.3, 0.2]], [0.0, 0.0]));
        assert!(!stability_check(&[], [0.0, 0.0]));
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let hull = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, 0.2]]);
        assert_eq!(hull, vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]]);
    }

    proptest! {
        // A convex combination of the feet is always supported.
        #[test]
        fn convex_combinations_inside(
            feet in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..7),
            weights in prop::collection::vec(0.01f64..1.0, 7),
        ) {
            let pts: Vec<Point> = feet.iter().map(|&(x, y)| [x, y]).collect();
            let total: f64 = weights[..pts.len()].iter().sum();
            let mut c = [0.0, 0.0];
            for (p, w) in pts.iter().zip(&weights) {
                c[0] += p[0] * w / total;
                c[1] += p[1] * w / total;
            }
            prop_assert!(stability_check(&pts, c));
        }
    }
}
