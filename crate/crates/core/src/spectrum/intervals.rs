use std::cmp::Ordering;
use std::ops::{Add, Sub};

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

/// Endpoint arithmetic needed by [`IntervalSet`]. Implemented for `f64`
/// and exact types such as `Ratio<i64>`.
pub trait Endpoint: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Zero {}

impl<T: Copy + PartialOrd + Add<Output = T> + Sub<Output = T> + Zero> Endpoint for T {}

/// An interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Endpoint> Interval<T> {
    pub fn closed(lo: T, hi: T) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn point(x: T) -> Self {
        Self::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.partial_cmp(&self.hi) {
            Some(Ordering::Less) => false,
            Some(Ordering::Equal) => !(self.lo_closed && self.hi_closed),
            _ => true,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed { self.lo <= x } else { self.lo < x };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// Lower bounds: a closed bound at `x` comes before an open one.
fn cmp_lower<T: Endpoint>(a: (T, bool), b: (T, bool)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(b.1.cmp(&a.1))
}

/// Upper bounds: an open bound at `x` comes before a closed one.
fn cmp_upper<T: Endpoint>(a: (T, bool), b: (T, bool)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// A finite union of disjoint intervals in canonical form: sorted, nonempty
/// pieces, with overlapping or touching pieces merged.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    parts: Vec<Interval<T>>,
}

impl<T: Endpoint> Default for IntervalSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Endpoint> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    /// Union of closed intervals `[l, u]`; fails if some `l ≤ u` is false.
    pub fn from_closed(pairs: &[(T, T)]) -> Result<Self> {
        if pairs.iter().any(|(l, u)| !(l <= u)) {
            return Err(invalid("interval", "every pair needs l ≤ u"));
        }
        Ok(Self::from_parts(pairs.iter().map(|&(l, u)| Interval::closed(l, u)).collect()))
    }

    /// Degenerate intervals at each point.
    pub fn from_points(points: &[T]) -> Self {
        Self::from_parts(points.iter().map(|&x| Interval::point(x)).collect())
    }

    /// Canonicalizes an arbitrary list; empty pieces are dropped.
    pub fn from_parts(mut parts: Vec<Interval<T>>) -> Self {
        parts.retain(|p| !p.is_empty());
        parts.sort_by(|a, b| cmp_lower((a.lo, a.lo_closed), (b.lo, b.lo_closed)));
        let mut out: Vec<Interval<T>> = Vec::with_capacity(parts.len());
        for p in parts {
            if let Some(last) = out.last_mut() {
                let joins = match p.lo.partial_cmp(&last.hi) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => p.lo_closed || last.hi_closed,
                    _ => false,
                };
                if joins {
                    if cmp_upper((p.hi, p.hi_closed), (last.hi, last.hi_closed)) == Ordering::Greater {
                        last.hi = p.hi;
                        last.hi_closed = p.hi_closed;
                    }
                    continue;
                }
            }
            out.push(p);
        }
        IntervalSet { parts: out }
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    /// Number of connected components.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> T {
        self.parts.iter().fold(T::zero(), |m, p| m + p.length())
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        Self::from_parts(parts)
    }

    /// Union of many sets, independent of their order.
    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a Self>) -> Self
    where
        T: 'a,
    {
        Self::from_parts(sets.into_iter().flat_map(|s| s.parts.iter().copied()).collect())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let (p, q) = (a[i], b[j]);
            let lo = if cmp_lower((p.lo, p.lo_closed), (q.lo, q.lo_closed)) == Ordering::Less { q } else { p };
            let p_first = cmp_upper((p.hi, p.hi_closed), (q.hi, q.hi_closed)) == Ordering::Less;
            let hi = if p_first { p } else { q };
            let piece = Interval {
                lo: lo.lo,
                lo_closed: lo.lo_closed,
                hi: hi.hi,
                hi_closed: hi.hi_closed,
            };
            if !piece.is_empty() {
                out.push(piece);
            }
            if p_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { parts: out }
    }

    /// Points of `window` not in `self`.
    pub fn complement_in(&self, window: &Interval<T>) -> Self {
        let mut out = Vec::new();
        let (mut lo, mut lo_closed) = (window.lo, window.lo_closed);
        for p in &self.parts {
            out.push(Interval {
                lo,
                lo_closed,
                hi: p.lo,
                hi_closed: !p.lo_closed,
            });
            lo = p.hi;
            lo_closed = !p.hi_closed;
        }
        out.push(Interval {
            lo,
            lo_closed,
            hi: window.hi,
            hi_closed: window.hi_closed,
        });
        Self::from_parts(out).intersect(&Self::from_parts(vec![*window]))
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &Self) -> Self {
        match (self.parts.first(), self.parts.last()) {
            (Some(f), Some(l)) => {
                let hull = Interval {
                    lo: f.lo,
                    lo_closed: f.lo_closed,
                    hi: l.hi,
                    hi_closed: l.hi_closed,
                };
                self.intersect(&other.complement_in(&hull))
            }
            _ => Self::empty(),
        }
    }

    /// Closure of the open `ρ`-neighbourhood: each piece becomes
    /// `[l − ρ, u + ρ]`.
    pub fn fatten(&self, rho: T) -> Self {
        Self::from_parts(self.parts.iter().map(|p| Interval::closed(p.lo - rho, p.hi + rho)).collect())
    }

    pub fn contains(&self, x: T) -> bool {
        let i = self.parts.partition_point(|p| p.hi < x);
        self.parts.get(i).is_some_and(|p| p.contains(x))
    }

    /// `dist(x, self)`, or `None` for the empty set.
    pub fn point_dist(&self, x: T) -> Option<T> {
        if self.contains(x) {
            return Some(T::zero());
        }
        let i = self.parts.partition_point(|p| p.hi < x);
        let right = self.parts.get(i).map(|p| p.lo - x);
        let left = i.checked_sub(1).map(|k| x - self.parts[k].hi);
        match (left, right) {
            (Some(l), Some(r)) => Some(if l < r { l } else { r }),
            (l, r) => l.or(r),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Wire<T> {
    Closed(T, T),
    Typed(T, T, bool, bool),
}

/// Serialized as an array of `[l, u]` pairs; pieces with an open end carry
/// two trailing flags `[l, u, lo_closed, hi_closed]`.
impl<T: Endpoint + Serialize> Serialize for IntervalSet<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire: Vec<Wire<T>> = self
            .parts
            .iter()
            .map(|p| {
                if p.is_closed() {
                    Wire::Closed(p.lo, p.hi)
                } else {
                    Wire::Typed(p.lo, p.hi, p.lo_closed, p.hi_closed)
                }
            })
            .collect();
        wire.serialize(s)
    }
}

impl<'de, T: Endpoint + Deserialize<'de>> Deserialize<'de> for IntervalSet<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = Vec::<Wire<T>>::deserialize(d)?;
        let parts: Vec<Interval<T>> = wire
            .into_iter()
            .map(|w| match w {
                Wire::Closed(lo, hi) => Interval::closed(lo, hi),
                Wire::Typed(lo, hi, lo_closed, hi_closed) => Interval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                },
            })
            .collect();
        if parts.iter().any(|p| !(p.lo <= p.hi)) {
            return Err(serde::de::Error::custom("interval with l > u"));
        }
        Ok(Self::from_parts(parts))
    }
}
