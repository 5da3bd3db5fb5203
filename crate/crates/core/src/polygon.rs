//! The k-gon inequality and explicit convex realizations.
//!
//! A list of `k >= 3` positive lengths is the side list of a (convex) polygon
//! exactly when every length is strictly less than half of the total. At most
//! one side can break that rule, so a failing list always has a single
//! "violator", which [`max_violator`] reports.
//!
//! Lengths are generic over [`Length`]. Integer lengths (`u64`) and exact
//! rationals are compared without rounding; `f64` lengths are compared as
//! given, with no epsilon.

use std::f64::consts::{PI, TAU};
use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A side length usable by the polygon predicate.
pub trait Length: Clone + PartialOrd + Debug {
    /// Sum type, wide enough that doubling a single length cannot overflow it.
    type Total: PartialOrd;

    /// `true` for exact types (integers, rationals).
    const EXACT: bool;

    fn is_positive(&self) -> bool;
    fn total(lengths: &[Self]) -> Self::Total;
    fn doubled(&self) -> Self::Total;
    fn as_f64(&self) -> f64;
}

impl Length for u64 {
    type Total = u128;
    const EXACT: bool = true;

    fn is_positive(&self) -> bool {
        *self > 0
    }

    fn total(lengths: &[Self]) -> u128 {
        lengths.iter().map(|&x| x as u128).sum()
    }

    fn doubled(&self) -> u128 {
        2 * (*self as u128)
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }
}

impl Length for f64 {
    type Total = f64;
    const EXACT: bool = false;

    fn is_positive(&self) -> bool {
        self.is_finite() && *self > 0.0
    }

    fn total(lengths: &[Self]) -> f64 {
        lengths.iter().sum()
    }

    // Multiplying by two is exact in binary floating point.
    fn doubled(&self) -> f64 {
        2.0 * self
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Length for BigRational {
    type Total = BigRational;
    const EXACT: bool = true;

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn total(lengths: &[Self]) -> BigRational {
        lengths.iter().fold(BigRational::zero(), |acc, x| acc + x)
    }

    fn doubled(&self) -> BigRational {
        self * BigRational::from_integer(BigInt::from(2))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Index of the first length with `2x >= total`, without validating the
/// input. Zero-length pieces are allowed here; they never violate on their
/// own. Used in hot loops after the caller has established the shape of the
/// data.
pub fn violator<L: Length>(lengths: &[L]) -> Option<usize> {
    let total = L::total(lengths);
    lengths.iter().position(|x| x.doubled() >= total)
}

fn validate<L: Length>(lengths: &[L]) -> Result<()> {
    if lengths.len() < 3 {
        return Err(Error::inventory(format!(
            "need at least 3 lengths, got {}",
            lengths.len()
        )));
    }
    if let Some(i) = lengths.iter().position(|x| !x.is_positive()) {
        return Err(Error::inventory(format!(
            "length {} ({:?}) is not strictly positive",
            i + 1,
            lengths[i]
        )));
    }
    Ok(())
}

/// Whether `lengths` are the sides of some convex polygon. Equality
/// `x = total / 2` is the flat, degenerate case and counts as `false`.
pub fn is_polygonal<L: Length>(lengths: &[L]) -> Result<bool> {
    Ok(max_violator(lengths)?.is_none())
}

/// Zero-based index of the unique side with `x >= total / 2`, if any.
pub fn max_violator<L: Length>(lengths: &[L]) -> Result<Option<usize>> {
    validate(lengths)?;
    Ok(violator(lengths))
}

/// A validated, ordered list of at least three positive lengths.
///
/// The length type fixes the comparison mode: `Inventory<u64>` is the exact
/// brick mode, `Inventory<f64>` the real stick mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Inventory<L = u64> {
    lengths: Vec<L>,
}

impl<L: Length> Inventory<L> {
    pub fn new(lengths: Vec<L>) -> Result<Self> {
        validate(&lengths)?;
        Ok(Inventory { lengths })
    }

    pub fn lengths(&self) -> &[L] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn total(&self) -> L::Total {
        L::total(&self.lengths)
    }

    pub fn is_exact(&self) -> bool {
        L::EXACT
    }

    pub fn is_polygonal(&self) -> bool {
        self.max_violator().is_none()
    }

    pub fn max_violator(&self) -> Option<usize> {
        violator(&self.lengths)
    }

    pub fn into_inner(self) -> Vec<L> {
        self.lengths
    }
}

impl<L: Length> TryFrom<Vec<L>> for Inventory<L> {
    type Error = Error;

    fn try_from(lengths: Vec<L>) -> Result<Self> {
        Inventory::new(lengths)
    }
}

/// Open interval `(lo, hi)` of diagonal lengths `d` for which `{a, b, d}` is
/// a triangle and `rest ∪ {d}` is a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: PartialOrd> DiagonalInterval<T> {
    pub fn is_nonempty(&self) -> bool {
        self.lo < self.hi
    }

    pub fn contains(&self, d: &T) -> bool {
        self.lo < *d && *d < self.hi
    }
}

/// Interval of admissible diagonals when splitting a polygon into the
/// triangle `{a, b, d}` and the polygon `rest ∪ {d}`.
///
/// The split is taken as given; no sorting happens here. The interval is
/// nonempty exactly when `{a, b} ∪ rest` is polygonal.
pub fn diagonal_interval<T>(a: T, b: T, rest: &[T]) -> Result<DiagonalInterval<T>>
where
    T: Length + Zero + Add<Output = T> + Sub<Output = T>,
{
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::inventory("diagonal endpoints must be positive"));
    }
    if rest.len() < 2 {
        return Err(Error::inventory(format!(
            "the remaining side list needs at least 2 lengths, got {}",
            rest.len()
        )));
    }
    if rest.iter().any(|x| !x.is_positive()) {
        return Err(Error::inventory("remaining side lengths must be positive"));
    }

    let rest_total = rest.iter().cloned().fold(T::zero(), |acc, x| acc + x);
    let rest_max = rest
        .iter()
        .cloned()
        .fold(T::zero(), |m, x| if x > m { x } else { m });
    let others = rest_total.clone() - rest_max.clone();

    // Subtractions are arranged so unsigned lengths never go negative.
    let triangle_lo = if a >= b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    };
    let rest_lo = if rest_max > others {
        rest_max - others
    } else {
        T::zero()
    };
    let lo = if rest_lo > triangle_lo {
        rest_lo
    } else {
        triangle_lo
    };

    let triangle_hi = a + b;
    let hi = if rest_total < triangle_hi {
        rest_total
    } else {
        triangle_hi
    };

    Ok(DiagonalInterval { lo, hi })
}

/// Convex polygon given by its vertices in counter-clockwise order. Vertex
/// `i` starts side `i`; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRealization {
    pub vertices: Vec<[f64; 2]>,
    /// Radius of the circle through every vertex, centered at the origin.
    pub circumradius: f64,
}

impl PolygonRealization {
    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let [x0, y0] = self.vertices[i];
                let [x1, y1] = self.vertices[(i + 1) % n];
                (x1 - x0).hypot(y1 - y0)
            })
            .collect()
    }

    /// Largest `|realized - wanted| / wanted` over all sides.
    pub fn max_relative_side_error(&self, wanted: &[f64]) -> f64 {
        assert_eq!(wanted.len(), self.vertices.len());
        self.side_lengths()
            .iter()
            .zip(wanted)
            .map(|(got, want)| ((got - want) / want).abs())
            .fold(0.0, f64::max)
    }

    /// Cross products of consecutive edge vectors, one per vertex.
    pub fn turn_cross_products(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let [ax, ay] = self.vertices[i];
                let [bx, by] = self.vertices[(i + 1) % n];
                let [cx, cy] = self.vertices[(i + 2) % n];
                (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            })
            .collect()
    }

    /// All turns strictly share one sign.
    pub fn is_strictly_convex(&self) -> bool {
        let turns = self.turn_cross_products();
        turns.iter().all(|&c| c > 0.0) || turns.iter().all(|&c| c < 0.0)
    }
}

const MAX_BISECTIONS: usize = 200;
const ANGLE_TOLERANCE: f64 = 1e-12;

fn central_angle(side: f64, radius: f64) -> f64 {
    2.0 * (side / (2.0 * radius)).min(1.0).asin()
}

/// Find `r` in `[lo, hi]` with `residual(r) == 0`, given `residual(lo) < 0`
/// and `residual(hi) > 0`. Stops once `|residual| < ANGLE_TOLERANCE` or after
/// `MAX_BISECTIONS` halvings.
fn bisect(mut lo: f64, mut hi: f64, residual: impl Fn(f64) -> f64) -> f64 {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < ANGLE_TOLERANCE || mid == lo || mid == hi {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Inscribe the inventory in a circle.
///
/// Every polygonal inventory has exactly one cyclic realization. The radius
/// solves `sum(central angles) = 2π` when the center lies inside the polygon;
/// otherwise the longest side's arc is taken the other way round and the
/// radius solves `sum(other angles) = angle(longest)`.
pub fn construct_polygon<L: Length>(inventory: &Inventory<L>) -> Result<PolygonRealization> {
    if let Some(violator) = inventory.max_violator() {
        return Err(Error::NotPolygonal { violator });
    }
    let sides: Vec<f64> = inventory.lengths().iter().map(Length::as_f64).collect();
    let k = sides.len();
    let (longest, &max_side) =
        sides.iter().enumerate().fold(
            (0, &sides[0]),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    let perimeter: f64 = sides.iter().sum();

    let r_min = 0.5 * max_side;
    let other_angles = |r: f64| -> f64 {
        sides
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != longest)
            .map(|(_, &s)| central_angle(s, r))
            .sum()
    };
    // With the longest side as a diameter, the other sides span either more
    // than a half-turn (center inside) or less (center outside).
    let slack = other_angles(r_min) - PI;

    let radius = if slack == 0.0 {
        r_min
    } else if slack > 0.0 {
        // Angles shrink with r; each is at most π·s/(2r), so the full turn is
        // missed once r > P/4.
        let missing_turn = |r: f64| TAU - other_angles(r) - central_angle(max_side, r);
        bisect(r_min, 0.5 * perimeter, missing_turn)
    } else {
        let balance = |r: f64| other_angles(r) - central_angle(max_side, r);
        let mut r_max = perimeter;
        while balance(r_max) <= 0.0 && r_max.is_finite() {
            r_max *= 2.0;
        }
        bisect(r_min, r_max, balance)
    };

    // Signed central angle per side; the longest side absorbs the closure
    // residual, where it costs the least relative error.
    let mut position = vec![0.0; k];
    let start = (longest + 1) % k;
    let mut theta = 0.0;
    for step in 0..k - 1 {
        let side = (start + step) % k;
        theta += central_angle(sides[side], radius);
        position[(side + 1) % k] = theta;
    }

    let vertices = position
        .iter()
        .map(|&t| [radius * t.cos(), radius * t.sin()])
        .collect();

    Ok(PolygonRealization {
        vertices,
        circumradius: radius,
    })
}
