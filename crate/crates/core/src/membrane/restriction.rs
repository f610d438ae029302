//! Sub-regions of the parameter square and tag maps for two-domain integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed rectangle `[x0, x1] × [y0, y1]` in the parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Rect {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        let ok = |(a, b): (f64, f64)| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a < b;
        if !ok(x) || !ok(y) {
            return Err(Error::InvalidInput(format!("bad rectangle {x:?} × {y:?}")));
        }
        Ok(Rect { x, y })
    }

    pub fn whole() -> Self {
        Rect { x: (0.0, 1.0), y: (0.0, 1.0) }
    }

    pub fn contains(&self, t1: f64, t2: f64) -> bool {
        self.x.0 <= t1 && t1 <= self.x.1 && self.y.0 <= t2 && t2 <= self.y.1
    }

    fn overlap_area(&self, o: &Rect) -> f64 {
        let w = (self.x.1.min(o.x.1) - self.x.0.max(o.x.0)).max(0.0);
        let h = (self.y.1.min(o.y.1) - self.y.0.max(o.y.0)).max(0.0);
        w * h
    }

    fn area(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0)
    }
}

/// A union of rectangles with disjoint interiors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub rects: Vec<Rect>,
}

impl Region {
    pub fn new(rects: Vec<Rect>) -> Result<Self> {
        let r = Region { rects };
        if r.rects.is_empty() {
            return Err(Error::InvalidInput("empty region".into()));
        }
        if r.self_overlap() > 0.0 {
            return Err(Error::InvalidInput("overlapping rectangles".into()));
        }
        Ok(r)
    }

    pub fn whole() -> Self {
        Region { rects: vec![Rect::whole()] }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        Ok(Region { rects: vec![Rect::new(x, y)?] })
    }

    pub fn contains(&self, t1: f64, t2: f64) -> bool {
        self.rects.iter().any(|r| r.contains(t1, t2))
    }

    pub fn area(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }

    fn self_overlap(&self) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.rects.iter().enumerate() {
            for b in &self.rects[i + 1..] {
                s += a.overlap_area(b);
            }
        }
        s
    }

    fn overlap(&self, o: &Region) -> f64 {
        self.rects.iter().flat_map(|a| o.rects.iter().map(move |b| a.overlap_area(b))).sum()
    }

    /// Whether every rectangle spans the full `t2` range.
    pub fn is_x_only(&self) -> bool {
        self.rects.iter().all(|r| r.y == (0.0, 1.0))
    }

    pub fn is_whole(&self) -> bool {
        (self.area() - 1.0).abs() < 1e-15
    }
}

/// Regions `A_1, …` and the tag map `s: {1..m} → {1, 2}` sending form `j` to the region
/// its argument is restricted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRestriction {
    pub regions: Vec<Region>,
    /// `tags[j] ∈ 1..=regions.len()`.
    pub tags: Vec<u8>,
}

impl DomainRestriction {
    pub fn whole(m: usize) -> Self {
        DomainRestriction { regions: vec![Region::whole()], tags: vec![1; m] }
    }

    pub fn single(region: Region, m: usize) -> Self {
        DomainRestriction { regions: vec![region], tags: vec![1; m] }
    }

    /// Two regions with disjoint interiors.
    pub fn two_domains(a1: Region, a2: Region, tags: Vec<u8>) -> Result<Self> {
        if a1.overlap(&a2) > 1e-15 {
            return Err(Error::InvalidInput("domains overlap".into()));
        }
        if tags.iter().any(|&t| t != 1 && t != 2) {
            return Err(Error::InvalidInput("tags must be 1 or 2".into()));
        }
        Ok(DomainRestriction { regions: vec![a1, a2], tags })
    }

    /// `[0, a] × [0, 1]` and `[a, 1] × [0, 1]`, split by the leaf `t1 = a`.
    pub fn split_x(a: f64, tags: Vec<u8>) -> Result<Self> {
        Self::two_domains(Region::rect((0.0, a), (0.0, 1.0))?, Region::rect((a, 1.0), (0.0, 1.0))?, tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn region_of(&self, j: usize) -> &Region {
        &self.regions[self.tags[j] as usize - 1]
    }

    pub fn contains(&self, j: usize, t1: f64, t2: f64) -> bool {
        self.region_of(j).contains(t1, t2)
    }

    pub fn is_x_only(&self) -> bool {
        self.regions.iter().all(Region::is_x_only)
    }

    pub fn is_trivial(&self) -> bool {
        self.tags.iter().all(|&t| self.regions[t as usize - 1].is_whole())
    }

    /// Rectangle edges in `t1` and `t2`, used as quadrature breakpoints.
    pub fn edges(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in self.regions.iter().flat_map(|g| g.rects.iter()) {
            xs.extend([r.x.0, r.x.1]);
            ys.extend([r.y.0, r.y.1]);
        }
        (xs, ys)
    }

    /// Stable key for caching.
    pub fn key(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }

    /// All `2^m` tag maps over the same two regions.
    pub fn all_tag_maps(a1: &Region, a2: &Region, m: usize) -> Result<Vec<Self>> {
        (0..1usize << m)
            .map(|bits| {
                let tags = (0..m).map(|j| if bits >> j & 1 == 1 { 2 } else { 1 }).collect();
                Self::two_domains(a1.clone(), a2.clone(), tags)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(Rect::new((0.5, 0.2), (0.0, 1.0)).is_err());
        let a = Region::rect((0.0, 0.5), (0.0, 1.0)).unwrap();
        let b = Region::rect((0.4, 1.0), (0.0, 1.0)).unwrap();
        assert!(DomainRestriction::two_domains(a.clone(), b, vec![1, 2]).is_err());
        let r = DomainRestriction::split_x(0.3, vec![1, 2, 2]).unwrap();
        assert!(r.is_x_only() && !r.is_trivial());
        assert!(r.contains(0, 0.1, 0.9) && !r.contains(1, 0.1, 0.9));
        assert!(DomainRestriction::whole(3).is_trivial());
        assert_eq!(DomainRestriction::all_tag_maps(&a, &Region::rect((0.5, 1.0), (0.0, 1.0)).unwrap(), 3).unwrap().len(), 8);
        let corner = Region::new(vec![Rect::new((0.0, 0.5), (0.0, 0.5)).unwrap(), Rect::new((0.5, 1.0), (0.5, 1.0)).unwrap()]).unwrap();
        assert!(!corner.is_x_only());
        assert!((corner.area() - 0.5).abs() < 1e-15);
    }
}
