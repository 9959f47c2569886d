use crate::error::{Error, Result};
use crate::scalar::{Real, Sc};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Closed-centerline race track. A point is on-track while its distance
/// to the centerline polyline is below `half_width`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Track {
    /// Closed polyline (the last point connects back to the first), meters.
    pub centerline: Vec<[f64; 2]>,
    pub half_width: f64,
}

impl Track {
    pub fn validate(&self) -> Result<()> {
        if self.centerline.len() < 3 {
            return Err(Error::config(
                "track centerline needs at least 3 points to close a loop",
            ));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::config("track half_width must be positive"));
        }
        if self
            .centerline
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::config("track centerline contains non-finite points"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Track> {
        let text = std::fs::read_to_string(path)?;
        let track: Track = serde_json::from_str(&text)
            .map_err(|e| Error::format(format!("track file {}: {e}", path.display())))?;
        track.validate()?;
        Ok(track)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).unwrap())?;
        Ok(())
    }

    /// Stadium-shaped centerline (two straights joined by half circles)
    /// centered in the [0, 62.5] x [0, 50] state box: straight half-length
    /// 12 m, corner radius 14 m, half-width 5 m.
    pub fn default_oval() -> Track {
        let cx = 31.25;
        let cy = 25.0;
        let straight = 12.0;
        let radius = 14.0;
        let mut pts = Vec::new();
        let arc_pts = 24;
        // bottom straight, left to right
        for i in 0..=8 {
            let x = cx - straight + 2.0 * straight * (i as f64) / 8.0;
            pts.push([x, cy - radius]);
        }
        // right half circle, bottom to top
        for i in 1..arc_pts {
            let a = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (i as f64) / (arc_pts as f64);
            pts.push([cx + straight + radius * a.cos(), cy + radius * a.sin()]);
        }
        // top straight, right to left
        for i in 0..=8 {
            let x = cx + straight - 2.0 * straight * (i as f64) / 8.0;
            pts.push([x, cy + radius]);
        }
        // left half circle, top to bottom
        for i in 1..arc_pts {
            let a = std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (i as f64) / (arc_pts as f64);
            pts.push([cx - straight + radius * a.cos(), cy + radius * a.sin()]);
        }
        Track {
            centerline: pts,
            half_width: 5.0,
        }
    }

    /// Distance from (px, py) to the closed centerline, generic so dual
    /// numbers extract the exact gradient.
    pub fn centerline_distance<T: Real, S: Sc<T>>(&self, px: S, py: S) -> S {
        let n = self.centerline.len();
        let mut best = S::kc(f64::INFINITY);
        for i in 0..n {
            let a = self.centerline[i];
            let b = self.centerline[(i + 1) % n];
            let d2 = segment_distance_sq(px, py, a, b);
            best = best.min(d2);
        }
        best.sqrt()
    }

    /// Nearest centerline point and forward tangent direction, used by the
    /// scripted track follower.
    pub fn nearest_with_tangent(&self, px: f64, py: f64) -> ([f64; 2], [f64; 2]) {
        let n = self.centerline.len();
        let mut best = f64::INFINITY;
        let mut point = self.centerline[0];
        let mut tangent = [1.0, 0.0];
        for i in 0..n {
            let a = self.centerline[i];
            let b = self.centerline[(i + 1) % n];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((px - a[0]) * dx + (py - a[1]) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let cand = [a[0] + t * dx, a[1] + t * dy];
            let d2 = (px - cand[0]).powi(2) + (py - cand[1]).powi(2);
            if d2 < best {
                best = d2;
                point = cand;
                let len = len2.sqrt().max(1e-12);
                tangent = [dx / len, dy / len];
            }
        }
        (point, tangent)
    }

    /// A point safely inside the track band (start of the bottom straight).
    pub fn interior_point(&self) -> [f64; 2] {
        self.centerline[0]
    }
}

fn segment_distance_sq<T: Real, S: Sc<T>>(px: S, py: S, a: [f64; 2], b: [f64; 2]) -> S {
    let ax = S::kc(a[0]);
    let ay = S::kc(a[1]);
    let dx = S::kc(b[0] - a[0]);
    let dy = S::kc(b[1] - a[1]);
    let seg_len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
    let rx = px - ax;
    let ry = py - ay;
    let t = if seg_len2 > 0.0 {
        (rx * dx + ry * dy) / S::kc(seg_len2)
    } else {
        S::kc(0.0)
    };
    let t = t.max(S::kc(0.0)).min(S::kc(1.0));
    let cx = ax + t * dx;
    let cy = ay + t * dy;
    let ex = px - cx;
    let ey = py - cy;
    ex * ex + ey * ey
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_oval_fits_state_box() {
        let t = Track::default_oval();
        t.validate().unwrap();
        for p in &t.centerline {
            assert!(p[0] - t.half_width >= 0.0 && p[0] + t.half_width <= 62.5);
            assert!(p[1] - t.half_width >= 0.0 && p[1] + t.half_width <= 50.0);
        }
    }

    #[test]
    fn centerline_distance_simple_square() {
        let t = Track {
            centerline: vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]],
            half_width: 1.0,
        };
        // (5, 1) is 1 m from the bottom edge
        let d: f64 = t.centerline_distance(5.0f64, 1.0f64);
        assert!((d - 1.0).abs() < 1e-12);
        // on a vertex
        let d0: f64 = t.centerline_distance(0.0f64, 0.0f64);
        assert!(d0.abs() < 1e-12);
    }

    #[test]
    fn too_short_centerline_rejected() {
        let t = Track {
            centerline: vec![[0.0, 0.0], [1.0, 0.0]],
            half_width: 1.0,
        };
        assert!(t.validate().is_err());
    }
}
