//! Finite counting measures and the distance `D1` between them.
//!
//! For measures with `n <= m` points, `D1` pads the smaller one with
//! `m - n` virtual copies of the augmentation point and returns the
//! minimum-cost assignment between the two m-point families:
//!
//! ```text
//! D1(mu1, mu2) = min_pi [ sum_i rho(x_i, y_pi(i)) + sum padded rho(s_alpha, y_pi(i)) ]
//! ```
//!
//! The padding is virtual: cost rows for padded slots are evaluated through
//! `rho(s_alpha, .)` and no point list ever contains the augmentation point.
//! On an interval the same value also falls out of two closed forms (sorted
//! coordinate differences and the area between step CDFs); both are exposed
//! and cross-checked against the assignment route in tests.

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::ground::{GroundSpace, Point};

/// A finite multiset of points of `S`; repetitions allowed, order ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountingMeasure {
    points: Vec<Point>,
}

impl CountingMeasure {
    pub fn new(points: Vec<Point>) -> Self {
        CountingMeasure { points }
    }

    /// The zero measure.
    pub fn zero() -> Self {
        CountingMeasure { points: Vec::new() }
    }

    pub fn from_scalars(xs: &[f64]) -> Self {
        CountingMeasure {
            points: xs.iter().map(|&x| Point::Scalar(x)).collect(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiset equality under bitwise coordinate comparison.
    pub fn multiset_eq(&self, other: &CountingMeasure) -> bool {
        self.multiset_cmp(other) == std::cmp::Ordering::Equal
    }

    /// Total order on multisets: by cardinality, then lexicographically on
    /// the sorted point lists. Gives `d1` a canonical argument order.
    fn multiset_cmp(&self, other: &CountingMeasure) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.points.len().cmp(&other.points.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.points.clone();
        let mut b = other.points.clone();
        a.sort_by(Point::total_cmp);
        b.sort_by(Point::total_cmp);
        for (x, y) in a.iter().zip(b.iter()) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Scalar coordinates sorted ascending; interval measures only.
    pub fn sorted_scalars(&self) -> Result<Vec<f64>> {
        let mut xs = self
            .points
            .iter()
            .map(Point::as_scalar)
            .collect::<Result<Vec<f64>>>()?;
        xs.sort_by(f64::total_cmp);
        Ok(xs)
    }

    fn validate_in(&self, space: &GroundSpace) -> Result<()> {
        for p in &self.points {
            if !space.contains(p) {
                return Err(Error::domain(format!("point {p:?} lies outside the ground space")));
            }
        }
        Ok(())
    }
}

/// `D1` by exact assignment on the padded cost matrix.
pub fn d1(space: &GroundSpace, mu1: &CountingMeasure, mu2: &CountingMeasure) -> Result<f64> {
    mu1.validate_in(space)?;
    mu2.validate_in(space)?;
    // Canonical argument order makes d1(a, b) and d1(b, a) run the same
    // matrix through the solver, so symmetry holds bit for bit.
    let (small, large) = if mu1.multiset_cmp(mu2) != std::cmp::Ordering::Greater {
        (mu1, mu2)
    } else {
        (mu2, mu1)
    };
    let n = small.cardinality();
    let m = large.cardinality();
    if m == 0 {
        return Ok(0.0);
    }
    if n == 0 {
        // Every point of the larger measure pairs with s_alpha; summed in
        // the same canonical order as the solver path.
        return Ok(assignment::canonical_sum(
            large
                .points()
                .iter()
                .map(|y| space.distance_to_alpha_unchecked(y)),
        ));
    }
    let mut cost = vec![vec![0.0f64; m]; m];
    for (j, y) in large.points().iter().enumerate() {
        let pad = space.distance_to_alpha_unchecked(y);
        for (i, row) in cost.iter_mut().enumerate() {
            row[j] = if i < n {
                space.distance_unchecked(&small.points()[i], y)
            } else {
                pad
            };
        }
    }
    let (_, total) = assignment::solve(&cost);
    Ok(total)
}

/// `D1` on an interval via the sorted-coordinates closed form.
///
/// Pads the smaller measure with copies of `T + alpha`, sorts both lists and
/// sums coordinate gaps; equal to [`d1`].
pub fn d1_sorted_1d(
    space: &GroundSpace,
    mu1: &CountingMeasure,
    mu2: &CountingMeasure,
) -> Result<f64> {
    let length = space.interval_length()?;
    mu1.validate_in(space)?;
    mu2.validate_in(space)?;
    let s_alpha = length + space.alpha();
    let a = mu1.sorted_scalars()?;
    let b = mu2.sorted_scalars()?;
    Ok(sorted_gap_sum(&a, &b, s_alpha))
}

pub(crate) fn sorted_gap_sum(a: &[f64], b: &[f64], s_alpha: f64) -> f64 {
    let m = a.len().max(b.len());
    let mut total = 0.0;
    for i in 0..m {
        // Padding with s_alpha >= every coordinate keeps both lists sorted.
        let x = a.get(i).copied().unwrap_or(s_alpha);
        let y = b.get(i).copied().unwrap_or(s_alpha);
        total += (x - y).abs();
    }
    total
}

/// Area between the step CDFs of the two padded measures on `[0, T + alpha]`.
///
/// With both measures padded to `m` points, `F(t) = mu([0, t]) / m`;
/// `D1 = m * area`. See [`d1_cdf_area`].
pub fn cdf_area(space: &GroundSpace, mu1: &CountingMeasure, mu2: &CountingMeasure) -> Result<f64> {
    let length = space.interval_length()?;
    mu1.validate_in(space)?;
    mu2.validate_in(space)?;
    let m = mu1.cardinality().max(mu2.cardinality());
    if m == 0 {
        return Ok(0.0);
    }
    let s_alpha = length + space.alpha();
    let pad = |mu: &CountingMeasure| -> Result<Vec<f64>> {
        let mut xs = mu.sorted_scalars()?;
        xs.resize(m, s_alpha);
        Ok(xs)
    };
    let a = pad(mu1)?;
    let b = pad(mu2)?;

    let mut cuts: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    cuts.push(0.0);
    cuts.push(s_alpha);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let count_le = |xs: &[f64], t: f64| xs.partition_point(|&x| x <= t) as f64;
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let fa = count_le(&a, lo) / m as f64;
        let fb = count_le(&b, lo) / m as f64;
        area += (fa - fb).abs() * (hi - lo);
    }
    Ok(area)
}

/// `D1` on an interval via the CDF-area closed form; equal to [`d1`].
pub fn d1_cdf_area(
    space: &GroundSpace,
    mu1: &CountingMeasure,
    mu2: &CountingMeasure,
) -> Result<f64> {
    let m = mu1.cardinality().max(mu2.cardinality());
    Ok(m as f64 * cdf_area(space, mu1, mu2)?)
}

/// The universal bound `(|mu1| v |mu2|) (diam(S) + alpha)`.
pub fn d1_upper_bound(space: &GroundSpace, mu1: &CountingMeasure, mu2: &CountingMeasure) -> f64 {
    let m = mu1.cardinality().max(mu2.cardinality());
    m as f64 * (space.diameter() + space.alpha())
}

/// Brute-force `D1` over all pairings; test oracle for small cardinalities.
pub fn d1_brute_force(
    space: &GroundSpace,
    mu1: &CountingMeasure,
    mu2: &CountingMeasure,
) -> Result<f64> {
    mu1.validate_in(space)?;
    mu2.validate_in(space)?;
    let (small, large) = if mu1.multiset_cmp(mu2) != std::cmp::Ordering::Greater {
        (mu1, mu2)
    } else {
        (mu2, mu1)
    };
    let n = small.cardinality();
    let m = large.cardinality();
    if m == 0 {
        return Ok(0.0);
    }
    let mut cost = vec![vec![0.0f64; m]; m];
    for (j, y) in large.points().iter().enumerate() {
        for (i, row) in cost.iter_mut().enumerate() {
            row[j] = if i < n {
                space.distance_unchecked(&small.points()[i], y)
            } else {
                space.distance_to_alpha_unchecked(y)
            };
        }
    }
    Ok(assignment::brute_force(&cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn golden_instance() -> (GroundSpace, CountingMeasure, CountingMeasure) {
        let space = GroundSpace::interval(8.0, 1.0).unwrap();
        let mu1 = CountingMeasure::from_scalars(&[0.5, 1.0, 3.8, 7.2]);
        let mu2 = CountingMeasure::from_scalars(&[0.7, 2.0, 2.0, 5.0, 6.0]);
        (space, mu1, mu2)
    }

    #[test]
    fn worked_interval_instance_is_8_2_every_way() {
        let (space, mu1, mu2) = golden_instance();
        assert!((d1(&space, &mu1, &mu2).unwrap() - 8.2).abs() < 1e-12);
        assert!((d1_sorted_1d(&space, &mu1, &mu2).unwrap() - 8.2).abs() < 1e-12);
        assert!((d1_cdf_area(&space, &mu1, &mu2).unwrap() - 8.2).abs() < 1e-12);
        assert!((cdf_area(&space, &mu1, &mu2).unwrap() - 1.64).abs() < 1e-12);
        assert_eq!(d1_upper_bound(&space, &mu1, &mu2), 45.0);
    }

    #[test]
    fn identity_and_symmetry() {
        let (space, mu1, mu2) = golden_instance();
        assert_eq!(d1(&space, &mu1, &mu1).unwrap(), 0.0);
        assert_eq!(d1_sorted_1d(&space, &mu2, &mu2).unwrap(), 0.0);
        let ab = d1(&space, &mu1, &mu2).unwrap();
        let ba = d1(&space, &mu2, &mu1).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn hand_checked_two_point_case() {
        // min(0.3 + 0.35, 0.9 + 0.95) = 0.65
        let space = GroundSpace::interval(1.0, 0.25).unwrap();
        let mu1 = CountingMeasure::from_scalars(&[0.0]);
        let mu2 = CountingMeasure::from_scalars(&[0.3, 0.9]);
        assert!((d1(&space, &mu1, &mu2).unwrap() - 0.65).abs() < 1e-12);
        assert!((d1_sorted_1d(&space, &mu1, &mu2).unwrap() - 0.65).abs() < 1e-12);
        assert!((d1_cdf_area(&space, &mu1, &mu2).unwrap() - 0.65).abs() < 1e-12);
    }

    #[test]
    fn zero_measure_cases() {
        let space = GroundSpace::interval(1.0, 0.25).unwrap();
        let zero = CountingMeasure::zero();
        let mu = CountingMeasure::from_scalars(&[0.3, 0.9]);
        assert_eq!(d1(&space, &zero, &zero).unwrap(), 0.0);
        // 0.25 + 0.7 + 0.25 + 0.1
        assert!((d1(&space, &zero, &mu).unwrap() - 1.3).abs() < 1e-12);
        assert_eq!(cdf_area(&space, &zero, &zero).unwrap(), 0.0);
        assert_eq!(d1_upper_bound(&space, &zero, &zero), 0.0);
        assert!((d1_upper_bound(&space, &zero, &mu) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_formula_direct() {
        let space = GroundSpace::interval(1.0, 0.25).unwrap();
        let a = CountingMeasure::from_scalars(&[0.1, 0.2]);
        let b = CountingMeasure::from_scalars(&[0.1, 0.2, 0.3]);
        assert!((d1_upper_bound(&space, &a, &b) - 3.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_points_outside_the_space() {
        let space = GroundSpace::interval(1.0, 0.25).unwrap();
        let bad = CountingMeasure::from_scalars(&[1.5]);
        let ok = CountingMeasure::from_scalars(&[0.5]);
        assert!(d1(&space, &bad, &ok).is_err());
        assert!(d1_sorted_1d(&space, &ok, &bad).is_err());
        assert!(cdf_area(&space, &bad, &bad).is_err());
    }

    #[test]
    fn sorted_path_requires_an_interval() {
        let space = GroundSpace::boxed(2, 1.0, 1.0).unwrap();
        let mu = CountingMeasure::new(vec![Point::Vector(vec![0.5, 0.5])]);
        assert!(matches!(
            d1_sorted_1d(&space, &mu, &mu),
            Err(Error::UnsupportedSpace(_))
        ));
        assert!(matches!(
            cdf_area(&space, &mu, &mu),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    fn random_measure(space: &GroundSpace, stream: &mut RngStream, max_card: u64) -> CountingMeasure {
        let k = stream.next_u64() % (max_card + 1);
        CountingMeasure::new((0..k).map(|_| space.sample_point(stream)).collect())
    }

    #[test]
    fn three_routes_agree_on_random_interval_pairs() {
        let space = GroundSpace::interval(3.0, 0.7).unwrap();
        let mut stream = RngStream::new(314, 0);
        for _ in 0..500 {
            let a = random_measure(&space, &mut stream, 12);
            let b = random_measure(&space, &mut stream, 12);
            let exact = d1(&space, &a, &b).unwrap();
            let sorted = d1_sorted_1d(&space, &a, &b).unwrap();
            let area = d1_cdf_area(&space, &a, &b).unwrap();
            assert!((exact - sorted).abs() < 1e-9, "{exact} vs {sorted}");
            assert!((exact - area).abs() < 1e-9, "{exact} vs {area}");
            assert!(exact <= d1_upper_bound(&space, &a, &b) + 1e-9);
        }
    }

    #[test]
    fn assignment_route_matches_brute_force() {
        let space = GroundSpace::interval(2.0, 0.5).unwrap();
        let mut stream = RngStream::new(2718, 0);
        for _ in 0..200 {
            let a = random_measure(&space, &mut stream, 7);
            let b = random_measure(&space, &mut stream, 7);
            let fast = d1(&space, &a, &b).unwrap();
            let slow = d1_brute_force(&space, &a, &b).unwrap();
            assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn cardinality_gap_floor() {
        // Each point matched to s_alpha costs at least alpha.
        let space = GroundSpace::interval(2.0, 0.5).unwrap();
        let mut stream = RngStream::new(55, 1);
        for _ in 0..500 {
            let a = random_measure(&space, &mut stream, 8);
            let b = random_measure(&space, &mut stream, 8);
            let gap = (a.cardinality() as f64 - b.cardinality() as f64).abs();
            let d = d1(&space, &a, &b).unwrap();
            assert!(d >= space.alpha() * gap - 1e-12);
        }
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let spaces = [
            GroundSpace::interval(2.0, 0.5).unwrap(),
            GroundSpace::finite_metric(
                vec![
                    vec![0.0, 1.0, 2.0],
                    vec![1.0, 0.0, 1.5],
                    vec![2.0, 1.5, 0.0],
                ],
                0.75,
                0,
            )
            .unwrap(),
        ];
        let mut stream = RngStream::new(161803, 0);
        for space in &spaces {
            for _ in 0..2000 {
                let a = random_measure(space, &mut stream, 6);
                let b = random_measure(space, &mut stream, 6);
                let c = random_measure(space, &mut stream, 6);
                let ab = d1(space, &a, &b).unwrap();
                let ba = d1(space, &b, &a).unwrap();
                let bc = d1(space, &b, &c).unwrap();
                let ac = d1(space, &a, &c).unwrap();
                assert_eq!(ab, ba);
                assert!(ac <= ab + bc + 1e-9, "triangle: {ac} > {ab} + {bc}");
                if !a.multiset_eq(&b) {
                    assert!(ab > 0.0, "positivity failed for distinct multisets");
                }
            }
        }
    }

    #[test]
    fn multiset_eq_ignores_order_and_respects_multiplicity() {
        let a = CountingMeasure::from_scalars(&[1.0, 2.0, 2.0]);
        let b = CountingMeasure::from_scalars(&[2.0, 1.0, 2.0]);
        let c = CountingMeasure::from_scalars(&[1.0, 1.0, 2.0]);
        assert!(a.multiset_eq(&b));
        assert!(!a.multiset_eq(&c));
    }
}
