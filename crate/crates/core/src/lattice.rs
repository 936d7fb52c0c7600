//! Finite subsets of `Z^d`: boxes, intervals, Euclidean balls, neighbor
//! structure and boundaries.
//!
//! Every [`Domain`] keeps its sites in lexicographic order. Vectors indexed
//! by site (potentials, landscapes, Green columns) use that order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A site of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(LatticePoint(coords))
    }

    pub fn origin(d: usize) -> Result<Self> {
        Self::new(vec![0; d])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The point shifted by `step` along `axis`.
    pub fn shifted(&self, axis: usize, step: i64) -> LatticePoint {
        let mut c = self.0.clone();
        c[axis] += step;
        LatticePoint(c)
    }

    /// All `2d` nearest neighbors, in lexicographic order.
    pub fn lattice_neighbors(&self) -> Vec<LatticePoint> {
        let mut out: Vec<LatticePoint> = (0..self.dim())
            .flat_map(|axis| [self.shifted(axis, -1), self.shifted(axis, 1)])
            .collect();
        out.sort();
        out
    }

    pub fn squared_distance(&self, other: &LatticePoint) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl From<i64> for LatticePoint {
    fn from(x: i64) -> Self {
        LatticePoint(vec![x])
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An ordered pair `(inner, outer)` of nearest neighbors with `inner` in a
/// domain and `outer` outside it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgePair {
    pub inner: LatticePoint,
    pub outer: LatticePoint,
}

/// A nonempty finite subset of `Z^d`, stored in lexicographic order.
///
/// Construction precomputes the in-domain adjacency so operator assembly
/// does not repeat hash lookups.
#[derive(Clone)]
pub struct Domain {
    dim: usize,
    points: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    nbr_offsets: Vec<usize>,
    nbr_targets: Vec<usize>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Eq for Domain {}

impl Domain {
    /// Builds a domain from distinct points of a common dimension. The points
    /// are sorted lexicographically.
    pub fn new(dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if points.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0].0.clone()));
        }
        Ok(Self::from_sorted_unchecked(dim, points))
    }

    fn from_sorted_unchecked(dim: usize, points: Vec<LatticePoint>) -> Self {
        let index: HashMap<LatticePoint, usize> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let mut nbr_offsets = Vec::with_capacity(points.len() + 1);
        let mut nbr_targets = Vec::with_capacity(points.len() * 2 * dim);
        nbr_offsets.push(0);
        for p in &points {
            for q in p.lattice_neighbors() {
                if let Some(&j) = index.get(&q) {
                    nbr_targets.push(j);
                }
            }
            nbr_offsets.push(nbr_targets.len());
        }
        Domain {
            dim,
            points,
            index,
            nbr_offsets,
            nbr_targets,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; domains are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    /// Stored indices of the in-domain nearest neighbors of site `i`.
    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.nbr_targets[self.nbr_offsets[i]..self.nbr_offsets[i + 1]]
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.dim == other.dim && self.points.iter().all(|p| other.contains(p))
    }

    /// Returns `Some(n)` when the domain is exactly `[-n, n]^d ∩ Z^d`.
    pub fn box_radius(&self) -> Option<usize> {
        let first = self.points.first()?;
        let n = -first.0[0];
        if n < 0 {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let expected = side.checked_pow(self.dim as u32)?;
        let lo_ok = first.0.iter().all(|&c| c == -n);
        let hi_ok = self.points.last()?.0.iter().all(|&c| c == n);
        let all_inside = self.points.iter().all(|p| p.0.iter().all(|c| c.abs() <= n));
        (lo_ok && hi_ok && all_inside && self.points.len() == expected).then_some(n as usize)
    }

    /// For `d = 1`: whether sites `i` and `i + 1` are adjacent integers.
    pub fn consecutive_1d(&self, i: usize) -> bool {
        self.dim == 1 && i + 1 < self.len() && self.points[i + 1].0[0] - self.points[i].0[0] == 1
    }
}

/// `[-n, n]^d ∩ Z^d` in lexicographic order.
pub fn make_box(n: usize, d: usize) -> Result<Domain> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let n = n as i64;
    let side = 2 * n + 1;
    let total = (side as usize)
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument("box too large".into()))?;
    let mut points = Vec::with_capacity(total);
    let mut cur = vec![-n; d];
    // odometer with the last axis fastest gives lexicographic order
    loop {
        points.push(LatticePoint(cur.clone()));
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(Domain::from_sorted_unchecked(d, points));
            }
            axis -= 1;
            if cur[axis] < n {
                cur[axis] += 1;
                break;
            }
            cur[axis] = -n;
        }
    }
}

/// `[a, b] ∩ Z` as a one-dimensional domain.
pub fn make_interval(a: i64, b: i64) -> Result<Domain> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    let points = (a..=b).map(LatticePoint::from).collect();
    Ok(Domain::from_sorted_unchecked(1, points))
}

/// Lattice points at Euclidean distance strictly less than `r` from `center`,
/// optionally intersected with `clip`.
///
/// Fails with [`Error::EmptyDomain`] when clipping removes every point.
pub fn make_ball(center: &LatticePoint, r: f64, clip: Option<&Domain>) -> Result<Domain> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
    }
    let d = center.dim();
    if let Some(c) = clip {
        if c.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                got: d,
            });
        }
    }
    let reach = r.ceil() as i64 - 1;
    let r2 = r * r;
    let mut points = Vec::new();
    let mut off = vec![-reach; d];
    'outer: loop {
        let s: i64 = off.iter().map(|o| o * o).sum();
        if (s as f64) < r2 {
            let p = LatticePoint(center.0.iter().zip(&off).map(|(c, o)| c + o).collect());
            if clip.is_none_or(|c| c.contains(&p)) {
                points.push(p);
            }
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            if off[axis] < reach {
                off[axis] += 1;
                break;
            }
            off[axis] = -reach;
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyDomain);
    }
    // offsets were enumerated lexicographically, so points already are
    Ok(Domain::from_sorted_unchecked(d, points))
}

/// In-domain nearest neighbors of `x`, lexicographically ordered.
pub fn neighbors(dom: &Domain, x: &LatticePoint) -> Result<Vec<LatticePoint>> {
    let i = dom
        .index_of(x)
        .ok_or_else(|| Error::PointNotInDomain(x.0.clone()))?;
    Ok(dom
        .neighbor_indices(i)
        .iter()
        .map(|&j| dom.point(j).clone())
        .collect())
}

/// All pairs `(i, j)` with `i ∈ sub`, `j ∉ sub`, `|i - j| = 1`, sorted by `(i, j)`.
pub fn boundary_edges(sub: &Domain, ambient_dim: usize) -> Result<Vec<EdgePair>> {
    if ambient_dim != sub.dim() {
        return Err(Error::DimensionMismatch {
            expected: ambient_dim,
            got: sub.dim(),
        });
    }
    let mut edges = Vec::new();
    for p in sub.points() {
        for q in p.lattice_neighbors() {
            if !sub.contains(&q) {
                edges.push(EdgePair {
                    inner: p.clone(),
                    outer: q,
                });
            }
        }
    }
    // sub is sorted and neighbors are sorted per point
    Ok(edges)
}

/// Sites outside `sub` adjacent to some site of `sub`.
pub fn outer_boundary(sub: &Domain) -> Domain {
    let set: BTreeSet<LatticePoint> = sub
        .points()
        .iter()
        .flat_map(|p| p.lattice_neighbors())
        .filter(|q| !sub.contains(q))
        .collect();
    Domain::from_sorted_unchecked(sub.dim(), set.into_iter().collect())
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    d: usize,
    points: Vec<Vec<i64>>,
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainRepr {
            d: self.dim,
            points: self.points.iter().map(|p| p.0.clone()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = DomainRepr::deserialize(de)?;
        let points = repr.points.into_iter().map(LatticePoint).collect();
        Domain::new(repr.d, points).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts1(xs: &[i64]) -> Vec<LatticePoint> {
        xs.iter().map(|&x| LatticePoint::from(x)).collect()
    }

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    #[test]
    fn boxes() {
        let b = make_box(0, 1).unwrap();
        assert_eq!(b.points(), pts1(&[0]).as_slice());
        let b = make_box(2, 1).unwrap();
        assert_eq!(b.points(), pts1(&[-2, -1, 0, 1, 2]).as_slice());
        let b = make_box(1, 2).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.point(0), &p(&[-1, -1]));
        assert_eq!(b.point(1), &p(&[-1, 0]));
        assert_eq!(b.point(8), &p(&[1, 1]));
        assert_eq!(b.box_radius(), Some(1));
        assert_eq!(make_box(3, 0), Err(Error::ZeroDimension));
    }

    #[test]
    fn balls() {
        let o1 = LatticePoint::origin(1).unwrap();
        assert_eq!(make_ball(&o1, 1.0, None).unwrap().points(), pts1(&[0]).as_slice());
        assert_eq!(
            make_ball(&o1, 2.0, None).unwrap().points(),
            pts1(&[-1, 0, 1]).as_slice()
        );
        let o2 = LatticePoint::origin(2).unwrap();
        let b = make_ball(&o2, 1.5, None).unwrap();
        // |(1,1)| = √2 < 1.5, so the diagonal neighbors are inside
        assert_eq!(b.len(), 9);
        // brute force enumeration over [-2, 2]^2
        let mut brute = Vec::new();
        for x in -2..=2i64 {
            for y in -2..=2i64 {
                if ((x * x + y * y) as f64).sqrt() < 1.5 {
                    brute.push(p(&[x, y]));
                }
            }
        }
        assert_eq!(b.points(), brute.as_slice());
        assert!(make_ball(&o1, 0.0, None).is_err());
    }

    #[test]
    fn ball_clipping() {
        let clip = make_interval(2, 10).unwrap();
        let o = LatticePoint::from(0);
        assert_eq!(make_ball(&o, 2.0, Some(&clip)), Err(Error::EmptyDomain));
        let b = make_ball(&o, 4.0, Some(&clip)).unwrap();
        assert_eq!(b.points(), pts1(&[2, 3]).as_slice());
    }

    #[test]
    fn intervals() {
        assert_eq!(make_interval(1, 1).unwrap().points(), pts1(&[1]).as_slice());
        assert_eq!(make_interval(1, 3).unwrap().points(), pts1(&[1, 2, 3]).as_slice());
        assert_eq!(make_interval(-2, 2).unwrap(), make_box(2, 1).unwrap());
        assert_eq!(make_interval(3, 1), Err(Error::InvalidInterval { a: 3, b: 1 }));
    }

    #[test]
    fn neighbor_lists() {
        let b = make_box(2, 1).unwrap();
        assert_eq!(neighbors(&b, &0.into()).unwrap(), pts1(&[-1, 1]));
        assert_eq!(neighbors(&b, &2.into()).unwrap(), pts1(&[1]));
        let b2 = make_box(1, 2).unwrap();
        assert_eq!(
            neighbors(&b2, &p(&[1, 1])).unwrap(),
            vec![p(&[0, 1]), p(&[1, 0])]
        );
        assert!(matches!(
            neighbors(&b, &5.into()),
            Err(Error::PointNotInDomain(_))
        ));
    }

    #[test]
    fn boundaries() {
        let single = make_interval(0, 0).unwrap();
        let e = boundary_edges(&single, 1).unwrap();
        assert_eq!(
            e,
            vec![
                EdgePair { inner: 0.into(), outer: (-1).into() },
                EdgePair { inner: 0.into(), outer: 1.into() },
            ]
        );
        let seg = make_interval(1, 3).unwrap();
        let e = boundary_edges(&seg, 1).unwrap();
        assert_eq!(
            e,
            vec![
                EdgePair { inner: 1.into(), outer: 0.into() },
                EdgePair { inner: 3.into(), outer: 4.into() },
            ]
        );
        let b2 = make_box(1, 2).unwrap();
        assert_eq!(boundary_edges(&b2, 2).unwrap().len(), 12);
        assert!(boundary_edges(&b2, 3).is_err());

        assert_eq!(outer_boundary(&single).points(), pts1(&[-1, 1]).as_slice());
        assert_eq!(outer_boundary(&seg).points(), pts1(&[0, 4]).as_slice());
        let ob = outer_boundary(&b2);
        let mut brute = Vec::new();
        for x in -2..=2i64 {
            for y in -2..=2i64 {
                let outside = x.abs() == 2 || y.abs() == 2;
                let adjacent = x.abs().min(y.abs()) <= 1 && x.abs().max(y.abs()) == 2;
                if outside && adjacent {
                    brute.push(p(&[x, y]));
                }
            }
        }
        assert_eq!(ob.points(), brute.as_slice());
        assert_eq!(ob.len(), 12);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Domain::new(1, vec![]), Err(Error::EmptyDomain));
        assert!(matches!(
            Domain::new(1, pts1(&[1, 1])),
            Err(Error::DuplicatePoint(_))
        ));
        assert!(matches!(
            Domain::new(2, pts1(&[1])),
            Err(Error::DimensionMismatch { .. })
        ));
        let d = Domain::new(1, pts1(&[3, -1, 2])).unwrap();
        assert_eq!(d.points(), pts1(&[-1, 2, 3]).as_slice());
        assert!(d.consecutive_1d(1));
        assert!(!d.consecutive_1d(0));
        assert_eq!(d.box_radius(), None);
    }

    #[test]
    fn json_shape() {
        let b = make_box(1, 2).unwrap();
        let s = serde_json::to_string(&make_interval(0, 1).unwrap()).unwrap();
        assert_eq!(s, r#"{"d":1,"points":[[0],[1]]}"#);
        let back: Domain = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<Domain>(r#"{"d":1,"points":[]}"#).is_err());
    }
}
