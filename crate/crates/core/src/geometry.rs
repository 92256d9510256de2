//! Points in R^n, finite point sets, and the three distances used throughout
//! the crate: the point-to-set distance `d(x, A)`, the Hausdorff metric
//! `H(A, B)` and the cross-diameter `δ(A, B)`.
//!
//! All distances use the Euclidean norm. Finite sets are kept in canonical
//! form (lexicographic order, exact duplicates removed) so that set equality
//! is plain structural equality and tie-breaking is deterministic.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R^n with finite coordinates.
///
/// Negative zero is normalized to `+0.0` on construction so that exact
/// equality and the canonical ordering agree.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let mut coords = coords;
        for c in coords.iter_mut() {
            if !c.is_finite() {
                return Err(Error::NonFinite(*c));
            }
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Ok(Point(coords))
    }

    /// The origin of R^n.
    pub fn zeros(dim: usize) -> Result<Self> {
        Point::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Point) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.distance_unchecked(other))
    }

    pub(crate) fn distance_unchecked(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `s·self + v`, coordinatewise.
    pub fn scale_add(&self, s: f64, v: &Point) -> Result<Point> {
        check_dims(self.dim(), v.dim())?;
        Point::new(self.0.iter().zip(&v.0).map(|(a, b)| s * a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Result<Point> {
        Point::new(self.0.iter().map(|a| s * a).collect())
    }

    /// Lexicographic comparison; a total order on finite points.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A nonempty finite set of equal-dimension points in canonical form.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct FiniteSet(Vec<Point>);

impl FiniteSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        for p in &points {
            check_dims(dim, p.dim())?;
        }
        let mut points = points;
        points.sort_by(Point::lex_cmp);
        points.dedup();
        Ok(FiniteSet(points))
    }

    pub fn singleton(p: Point) -> Self {
        FiniteSet(vec![p])
    }

    /// Builds a set from raw coordinate rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        FiniteSet::new(rows.into_iter().map(Point::new).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.0.iter()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.0.binary_search_by(|p| p.lex_cmp(x)).is_ok()
    }
}

impl TryFrom<Vec<Point>> for FiniteSet {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        FiniteSet::new(points)
    }
}

impl From<FiniteSet> for Vec<Point> {
    fn from(s: FiniteSet) -> Vec<Point> {
        s.0
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.0).finish()
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::IncompatibleDimensions { left, right })
    }
}

/// `d(x, A) = min_{a∈A} ‖x − a‖`.
pub fn point_set_distance(x: &Point, set: &FiniteSet) -> Result<f64> {
    check_dims(x.dim(), set.dim())?;
    Ok(point_set_distance_unchecked(x, set))
}

pub(crate) fn point_set_distance_unchecked(x: &Point, set: &FiniteSet) -> f64 {
    set.iter().map(|a| x.distance_unchecked(a)).fold(f64::INFINITY, f64::min)
}

/// Largest distance from a point of `from` to the set `to`, with early exit:
/// once a point of `from` is closer to `to` than the running maximum, the rest
/// of its inner scan cannot change the result.
fn directed_hausdorff(from: &FiniteSet, to: &FiniteSet) -> f64 {
    let mut cmax = 0.0_f64;
    for a in from {
        let mut cmin = f64::INFINITY;
        for b in to {
            let d = a.distance_unchecked(b);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Hausdorff distance `H(A, B) = max(sup_a d(a, B), sup_b d(b, A))`.
pub fn hausdorff(a: &FiniteSet, b: &FiniteSet) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(hausdorff_unchecked(a, b))
}

pub(crate) fn hausdorff_unchecked(a: &FiniteSet, b: &FiniteSet) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// `δ(A, B) = max_{a∈A, b∈B} ‖a − b‖`. Note `δ(A, A)` is the diameter of `A`.
pub fn delta_distance(a: &FiniteSet, b: &FiniteSet) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.iter().flat_map(|p| b.iter().map(move |q| p.distance_unchecked(q))).fold(0.0, f64::max))
}

/// `{ s·a + v : a ∈ A }`, canonicalized.
pub fn affine_image(set: &FiniteSet, s: f64, v: &Point) -> Result<FiniteSet> {
    check_dims(set.dim(), v.dim())?;
    FiniteSet::new(set.iter().map(|a| a.scale_add(s, v)).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn set(rows: &[&[f64]]) -> FiniteSet {
        FiniteSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn point_rejects_bad_coordinates() {
        assert!(matches!(Point::new(vec![]), Err(Error::ZeroDimension)));
        assert!(matches!(Point::new(vec![f64::NAN]), Err(Error::NonFinite(_))));
        assert!(matches!(Point::new(vec![1.0, f64::INFINITY]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn negative_zero_is_normalized() {
        let a = p(&[-0.0]);
        assert!(a.coords()[0].is_sign_positive());
        assert_eq!(set(&[&[0.0], &[-0.0]]).len(), 1);
    }

    #[test]
    fn set_is_canonical() {
        let s = set(&[&[3.0, 1.0], &[1.0, 2.0], &[3.0, 1.0], &[1.0, -1.0]]);
        let rows: Vec<_> = s.iter().map(|q| q.coords().to_vec()).collect();
        assert_eq!(rows, vec![vec![1.0, -1.0], vec![1.0, 2.0], vec![3.0, 1.0]]);
        assert!(s.contains(&p(&[1.0, 2.0])));
        assert!(!s.contains(&p(&[2.0, 2.0])));
    }

    #[test]
    fn set_rejects_empty_and_mixed_dims() {
        assert!(matches!(FiniteSet::new(vec![]), Err(Error::EmptySet)));
        assert!(matches!(
            FiniteSet::new(vec![p(&[1.0]), p(&[1.0, 2.0])]),
            Err(Error::IncompatibleDimensions { .. })
        ));
    }

    #[test]
    fn point_set_distance_examples() {
        assert_eq!(point_set_distance(&p(&[0.0]), &set(&[&[1.0], &[5.0]])).unwrap(), 1.0);
        assert_eq!(point_set_distance(&p(&[3.0]), &set(&[&[3.0], &[7.0]])).unwrap(), 0.0);
        assert_eq!(point_set_distance(&p(&[0.0, 0.0]), &set(&[&[3.0, 4.0]])).unwrap(), 5.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = point_set_distance(&p(&[0.0]), &set(&[&[1.0, 1.0]])).unwrap_err();
        assert!(err.to_string().contains("incompatible dimensions"));
        assert!(hausdorff(&set(&[&[0.0]]), &set(&[&[0.0, 0.0]])).is_err());
        assert!(delta_distance(&set(&[&[0.0]]), &set(&[&[0.0, 0.0]])).is_err());
        assert!(affine_image(&set(&[&[0.0]]), 1.0, &p(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&set(&[&[0.0], &[2.0]]), &set(&[&[1.0]])).unwrap(), 1.0);
        let a = set(&[&[0.0, 1.0], &[4.0, -2.0], &[0.5, 0.5]]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&set(&[&[0.0, 0.0]]), &set(&[&[3.0, 4.0]])).unwrap(), 5.0);
    }

    #[test]
    fn delta_examples() {
        let a = set(&[&[0.0], &[2.0]]);
        assert_eq!(delta_distance(&a, &a).unwrap(), 2.0);
        assert_eq!(delta_distance(&set(&[&[0.0], &[1.0]]), &set(&[&[3.0]])).unwrap(), 3.0);
        assert_eq!(delta_distance(&set(&[&[0.0, 0.0]]), &set(&[&[3.0, 4.0]])).unwrap(), 5.0);
    }

    #[test]
    fn affine_image_examples() {
        let a = set(&[&[1.0], &[3.0]]);
        assert_eq!(affine_image(&a, 1.0, &p(&[0.0])).unwrap(), a);
        assert_eq!(affine_image(&a, 0.5, &p(&[2.0])).unwrap(), set(&[&[2.5], &[3.5]]));
        assert_eq!(affine_image(&set(&[&[1.0]]), -1.0, &p(&[0.0])).unwrap(), set(&[&[-1.0]]));
    }

    #[test]
    fn set_json_shape() {
        let s: FiniteSet = serde_json::from_str("[[1,2],[0,0]]").unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0.0,0.0],[1.0,2.0]]");
        assert!(serde_json::from_str::<FiniteSet>("[]").is_err());
        assert!(serde_json::from_str::<FiniteSet>("[[1],[1,2]]").is_err());
    }
}
