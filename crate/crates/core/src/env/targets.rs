use serde::{Deserialize, Serialize};

use super::config::EnvConfig;

/// Heights of the three target levels, meters.
pub const TARGET_LEVELS: [f64; 3] = [0.5, 1.025, 1.55];
pub const NUM_TARGETS: usize = 24;

/// Horizontal cell signs, counter-clockwise starting from north.
const QUADRANTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (1.0, 1.0),
    (0.0, 1.0),
    (-1.0, 1.0),
    (-1.0, 0.0),
    (-1.0, -1.0),
    (0.0, -1.0),
    (1.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub location: [f64; 3],
    /// Heading that faces the target from the run start position.
    pub orientation: f64,
    /// Index into the 24-cell grid, `level * 8 + quadrant`.
    pub index: usize,
}

impl TargetSpec {
    pub fn level(&self) -> usize {
        self.index / 8
    }

    pub fn quadrant(&self) -> usize {
        self.index % 8
    }

    /// Heading an observer at `p` must face to look at the target.
    pub fn heading_from(&self, p: [f64; 3]) -> f64 {
        (self.location[1] - p[1]).atan2(self.location[0] - p[0])
    }
}

/// The 24 target locations: eight edge cells of a 3x3 horizontal grid on
/// each of three levels, ordered by (level, quadrant).
pub fn target_grid(config: &EnvConfig) -> Vec<TargetSpec> {
    let o = config.target_offset;
    let mut out = Vec::with_capacity(NUM_TARGETS);
    for (level, &z) in TARGET_LEVELS.iter().enumerate() {
        for (q, &(sx, sy)) in QUADRANTS.iter().enumerate() {
            let mut t = TargetSpec {
                location: [sx * o, sy * o, z],
                orientation: 0.0,
                index: level * 8 + q,
            };
            t.orientation = t.heading_from(config.start_position);
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn grid_layout() {
        let grid = target_grid(&EnvConfig::default());
        assert_eq!(grid.len(), 24);
        for (lvl, &z) in TARGET_LEVELS.iter().enumerate() {
            assert_eq!(grid.iter().filter(|t| t.location[2] == z).count(), 8);
            let signs: HashSet<(i32, i32)> = grid
                .iter()
                .filter(|t| t.level() == lvl)
                .map(|t| (t.location[0].signum_i(), t.location[1].signum_i()))
                .collect();
            assert_eq!(signs.len(), 8);
            assert!(!signs.contains(&(0, 0)));
        }
        for (i, t) in grid.iter().enumerate() {
            assert_eq!(t.index, i);
        }
        assert!(grid.iter().any(|t| t.location == [0.95, -0.95, 0.5]));
    }

    #[test]
    fn orientation_faces_target() {
        let grid = target_grid(&EnvConfig::default());
        assert_eq!(grid[0].orientation, 0.0);
        assert!((grid[2].orientation - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    trait SignumI {
        fn signum_i(self) -> i32;
    }
    impl SignumI for f64 {
        fn signum_i(self) -> i32 {
            if self > 0.0 {
                1
            } else if self < 0.0 {
                -1
            } else {
                0
            }
        }
    }
}
