//! Extremal geometry of a sampled potential: the largest Euclidean ball of
//! low potential inside a box, and the one-sided accumulation lengths used
//! for one-dimensional landscape bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::potential::PotentialField;
use crate::scales::y_n;

#[derive(Debug, Clone, Serialize)]
pub struct ClearBallResult {
    pub radius: u64,
    /// Lexicographically smallest center attaining `radius`.
    pub center: LatticePoint,
    pub threshold: f64,
}

/// Offsets `o` with `(r-1)² <= |o|² < r²`, i.e. the sites gained when an
/// open ball grows from radius `r - 1` to `r`.
fn shells(d: usize, max_r: u64) -> Vec<Vec<Vec<i64>>> {
    let reach = max_r as i64 - 1;
    let mut out = vec![Vec::new(); max_r as usize + 1];
    if max_r == 0 {
        return out;
    }
    let mut off = vec![-reach; d];
    loop {
        let s: i64 = off.iter().map(|o| o * o).sum();
        // smallest integer radius r with s < r²
        let r = ((s as f64).sqrt().floor() as i64 + 1) as u64;
        if r <= max_r {
            out[r as usize].push(off.clone());
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if off[axis] < reach {
                off[axis] += 1;
                break;
            }
            off[axis] = -reach;
        }
    }
}

/// Largest integer `r` and first center `x` (lexicographic) such that every
/// lattice point of the open ball `B(x, r)` lies in the box and carries a
/// potential value at most `threshold`.
pub fn largest_clear_ball(v: &PotentialField, threshold: f64) -> Result<ClearBallResult> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    let dom = v.domain();
    let n = dom.box_radius().ok_or(Error::NotABox)? as i64;
    let d = dom.dim();
    let side = 2 * n + 1;
    let vals = v.values();
    let shells = shells(d, n as u64 + 1);
    // box sites are stored lexicographically, so the index is a base-(2n+1) number
    let index_of = |c: &[i64]| -> usize {
        c.iter().fold(0i64, |acc, &x| acc * side + (x + n)) as usize
    };
    let mut best: Option<(u64, usize)> = None;
    let mut coords = vec![0i64; d];
    for (ci, center) in dom.points().iter().enumerate() {
        let c = center.coords();
        let fit = c.iter().map(|x| n - x.abs()).min().unwrap_or(0) + 1;
        if let Some((br, _)) = best {
            if fit as u64 <= br {
                continue;
            }
        }
        let mut r = 0u64;
        'grow: for rr in 1..=fit as u64 {
            for off in &shells[rr as usize] {
                for k in 0..d {
                    coords[k] = c[k] + off[k];
                }
                if vals[index_of(&coords)] > threshold {
                    break 'grow;
                }
            }
            r = rr;
        }
        if r >= 1 && best.is_none_or(|(br, _)| r > br) {
            best = Some((r, ci));
        }
    }
    let (radius, ci) = best.ok_or(Error::NoBall)?;
    Ok(ClearBallResult {
        radius,
        center: dom.point(ci).clone(),
        threshold,
    })
}

/// One-sided accumulation lengths at a site; `None` means the sum never
/// exceeded `1/δ` inside the available window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZResult {
    pub z_plus: Option<u64>,
    pub z_minus: Option<u64>,
    pub delta: f64,
}

/// Smallest `m` with `Σ_{j=1}^m (m+1-j) V(x ± j) > 1/δ`, scanning stored
/// sites from index `start` in direction `dir` while they stay consecutive.
fn scan(v: &PotentialField, start: usize, forward: bool, inv_delta: f64) -> Option<u64> {
    let dom = v.domain();
    let vals = v.values();
    let mut prefix = 0.0; // Σ_{j<=m} V(x ± j)
    let mut weighted = 0.0; // Σ_{j<=m} (m+1-j) V(x ± j)
    let mut i = start;
    let mut m = 0u64;
    loop {
        let next = if forward {
            if !dom.consecutive_1d(i) {
                return None;
            }
            i + 1
        } else {
            if i == 0 || !dom.consecutive_1d(i - 1) {
                return None;
            }
            i - 1
        };
        i = next;
        m += 1;
        prefix += vals[i];
        weighted += prefix;
        if weighted > inv_delta {
            return Some(m);
        }
    }
}

pub fn z_delta(v: &PotentialField, x: i64, delta: f64) -> Result<ZResult> {
    if v.domain().dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: v.domain().dim(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let i = v
        .domain()
        .index_of(&LatticePoint::from(x))
        .ok_or_else(|| Error::PointNotInDomain(vec![x]))?;
    let inv = 1.0 / delta;
    Ok(ZResult {
        z_plus: scan(v, i, true, inv),
        z_minus: scan(v, i, false, inv),
        delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxZRecord {
    pub max_sum: u64,
    pub argmax_x: i64,
    /// `max_sum / (2 y_n)`; absent for fields not sampled from a classifiable law.
    pub y_ratio: Option<f64>,
    /// Sites where either side was not reached.
    pub excluded: usize,
}

/// Maximum of `Z⁺ + Z⁻` over the sites of a one-dimensional box where both
/// sides are reached.
pub fn max_z_sum(v: &PotentialField, delta: f64) -> Result<MaxZRecord> {
    let dom = v.domain();
    if dom.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dom.dim(),
        });
    }
    let n = dom.box_radius().ok_or(Error::NotABox)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let inv = 1.0 / delta;
    let mut best: Option<(u64, i64)> = None;
    let mut excluded = 0;
    for i in 0..dom.len() {
        match (scan(v, i, true, inv), scan(v, i, false, inv)) {
            (Some(a), Some(b)) => {
                if best.is_none_or(|(s, _)| a + b > s) {
                    best = Some((a + b, dom.point(i).coords()[0]));
                }
            }
            _ => excluded += 1,
        }
    }
    let (max_sum, argmax_x) = best.ok_or(Error::NoReachedSites { excluded })?;
    let y_ratio = match v.spec() {
        Some(spec) if n >= 2 => y_n(spec, n as u64, 1)
            .ok()
            .map(|y| max_sum as f64 / (2.0 * y)),
        _ => None,
    };
    Ok(MaxZRecord {
        max_sum,
        argmax_x,
        y_ratio,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_box, make_interval};
    use std::sync::Arc;

    fn field(n: usize, d: usize, vals: Vec<f64>) -> PotentialField {
        PotentialField::from_values(Arc::new(make_box(n, d).unwrap()), vals).unwrap()
    }

    #[test]
    fn ball_examples() {
        let v = field(2, 1, vec![1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = largest_clear_ball(&v, 0.0).unwrap();
        assert_eq!(r.radius, 2);
        assert_eq!(r.center, LatticePoint::from(0));

        let v = field(1, 1, vec![1.0; 3]);
        assert!(matches!(largest_clear_ball(&v, 0.0), Err(Error::NoBall)));

        // zero field: containment alone binds, radius n + 1 at the origin
        for (n, d) in [(3, 1), (3, 2), (2, 3)] {
            let size = (2 * n + 1usize).pow(d as u32);
            let v = field(n, d, vec![0.0; size]);
            let r = largest_clear_ball(&v, 0.0).unwrap();
            assert_eq!(r.radius, n as u64 + 1);
            assert_eq!(r.center, LatticePoint::origin(d).unwrap());
        }

        let not_box = PotentialField::zero(Arc::new(make_interval(0, 4).unwrap()));
        assert!(matches!(largest_clear_ball(&not_box, 0.0), Err(Error::NotABox)));
    }

    #[test]
    fn shells_partition_balls() {
        let sh = shells(2, 4);
        let total: usize = sh.iter().map(|s| s.len()).sum();
        // points with |o| < 4 in Z^2
        let brute = (-3..=3i64)
            .flat_map(|x| (-3..=3i64).map(move |y| x * x + y * y))
            .filter(|&s| s < 16)
            .count();
        assert_eq!(total, brute);
        assert_eq!(sh[1], vec![vec![0, 0]]);
    }

    #[test]
    fn z_examples() {
        // V ≡ 1, δ = 1
        let v = field(10, 1, vec![1.0; 21]);
        let z = z_delta(&v, 0, 1.0).unwrap();
        assert_eq!(z.z_plus, Some(2));
        assert_eq!(z.z_minus, Some(2));

        let v0 = field(10, 1, vec![0.0; 21]);
        let z = z_delta(&v0, 3, 0.5).unwrap();
        assert_eq!((z.z_plus, z.z_minus), (None, None));

        let mut vals = vec![0.0; 21];
        vals[11] = 10.0; // site x = 1
        let v = field(10, 1, vals);
        assert_eq!(z_delta(&v, 0, 1.0).unwrap().z_plus, Some(1));
        assert!(z_delta(&v, 11, 1.0).is_err());
    }

    #[test]
    fn z_sides_are_independent() {
        let mut vals: Vec<f64> = (0..41).map(|k| ((k * 7) % 5) as f64 * 0.3).collect();
        let v = field(20, 1, vals.clone());
        let before = z_delta(&v, 0, 0.2).unwrap();
        // perturb the left side only
        for x in vals.iter_mut().take(20) {
            *x += 3.0;
        }
        let v2 = field(20, 1, vals);
        let after = z_delta(&v2, 0, 0.2).unwrap();
        assert_eq!(before.z_plus, after.z_plus);
        assert_ne!(before.z_minus, after.z_minus);
    }

    #[test]
    fn max_z_examples() {
        let v = field(10, 1, vec![1.0; 21]);
        let r = max_z_sum(&v, 1.0).unwrap();
        assert_eq!(r.max_sum, 4);
        assert_eq!(r.argmax_x, -8);
        assert_eq!(r.excluded, 4);
        assert!(r.y_ratio.is_none());

        let single = field(0, 1, vec![1.0]);
        assert!(matches!(
            max_z_sum(&single, 1.0),
            Err(Error::NoReachedSites { excluded: 1 })
        ));
    }
}
