use std::collections::HashMap;

use super::Vec3;

/// Uniform cell hash over a fixed point set for radius queries.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
    points: Vec<Vec3>,
}

impl SpatialGrid {
    /// `cell` should be at least the largest query radius.
    pub fn new(points: Vec<Vec3>, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        Self { cell, cells, points }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    /// Indices of points with `|p - center| <= radius`, ascending.
    pub fn within(&self, center: &Vec3, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        if !center.iter().all(|v| v.is_finite()) {
            return;
        }
        let reach = (radius / self.cell).ceil() as i64;
        let k = Self::key(center, self.cell);
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(ids) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        out.extend(
                            ids.iter().map(|&i| i as usize).filter(|&i| (self.points[i] - center).norm() <= radius),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, StreamKey};
    use rand::Rng;

    #[test]
    fn matches_linear_scan() {
        let mut rng = StreamKey::new(3).rng(Domain::Audit, 1, 0, 0);
        let pts: Vec<Vec3> = (0..500)
            .map(|_| {
                Vec3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-5.0..5.0))
            })
            .collect();
        let grid = SpatialGrid::new(pts.clone(), 4.0);
        let mut out = Vec::new();
        for _ in 0..50 {
            let c = Vec3::new(rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0), 0.0);
            for r in [1.0, 4.0, 9.5] {
                grid.within(&c, r, &mut out);
                let brute: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - c).norm() <= r).collect();
                assert_eq!(out, brute);
            }
        }
    }
}
