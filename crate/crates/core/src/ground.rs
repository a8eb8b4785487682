//! The compact metric ground space `(S, ρ)` and its augmentation point.
//!
//! The augmentation point `s_α` sits outside `S` at distance
//! `ρ(s_α, x) = α + ρ(x, anchor)` from every `x ∈ S`, where the anchor is a
//! designated point of `S`. This realises `inf_x ρ(s_α, x) = α` (attained at
//! the anchor) and keeps the triangle inequality on `S ∪ {s_α}`. On an
//! interval `[0, T]` with anchor `T` it reduces to the usual choice
//! `s_α = T + α`, so `ρ(s_α, x) = T + α − x` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A point of the ground space.
///
/// `Scalar` for intervals, `Vector` for boxes, `Index` for finite metric
/// spaces given by a cost table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Scalar(f64),
    Vector(Vec<f64>),
    Index(usize),
}

impl Point {
    pub fn as_scalar(&self) -> Result<f64> {
        match self {
            Point::Scalar(x) => Ok(*x),
            other => Err(Error::domain(format!("expected scalar point, got {other:?}"))),
        }
    }

    pub fn as_index(&self) -> Result<usize> {
        match self {
            Point::Index(i) => Ok(*i),
            other => Err(Error::domain(format!("expected index point, got {other:?}"))),
        }
    }

    /// Total order for multiset comparisons; coordinates compared bitwise.
    pub(crate) fn total_cmp(&self, other: &Point) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Point::Scalar(a), Point::Scalar(b)) => a.total_cmp(b),
            (Point::Index(a), Point::Index(b)) => a.cmp(b),
            (Point::Vector(a), Point::Vector(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                a.len().cmp(&b.len())
            }
            // Mixed kinds never coexist in a validated measure; order by tag.
            (Point::Scalar(_), _) => Ordering::Less,
            (_, Point::Scalar(_)) => Ordering::Greater,
            (Point::Vector(_), _) => Ordering::Less,
            (_, Point::Vector(_)) => Ordering::Greater,
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Scalar(x)
    }
}

/// A location in the augmented space `S ∪ {s_α}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Site {
    /// The augmentation point `s_α`.
    Alpha,
    /// A point of `S`.
    In(Point),
}

/// Shape of the ground space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SpaceKind {
    /// `[0, T]` with the Euclidean metric.
    Interval { length: f64 },
    /// `[0, T]^d` with the Euclidean metric.
    Box { dim: usize, side: f64 },
    /// `n` points with a symmetric cost table.
    FiniteMetric { table: Vec<Vec<f64>> },
}

/// The compact metric space `(S, ρ)` together with `α` and the anchor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundSpace {
    kind: SpaceKind,
    alpha: f64,
    anchor: Point,
}

impl GroundSpace {
    /// Interval `[0, T]` with the default anchor `b = T`.
    pub fn interval(length: f64, alpha: f64) -> Result<Self> {
        Self::interval_with_anchor(length, alpha, length)
    }

    pub fn interval_with_anchor(length: f64, alpha: f64, anchor: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::domain(format!("interval length must be positive, got {length}")));
        }
        check_alpha(alpha)?;
        if !(0.0..=length).contains(&anchor) {
            return Err(Error::domain(format!("anchor {anchor} outside [0, {length}]")));
        }
        Ok(GroundSpace {
            kind: SpaceKind::Interval { length },
            alpha,
            anchor: Point::Scalar(anchor),
        })
    }

    /// Box `[0, T]^d` with the default anchor at the corner `(T, …, T)`.
    pub fn boxed(dim: usize, side: f64, alpha: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("box dimension must be at least 1"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::domain(format!("box side must be positive, got {side}")));
        }
        check_alpha(alpha)?;
        Ok(GroundSpace {
            kind: SpaceKind::Box { dim, side },
            alpha,
            anchor: Point::Vector(vec![side; dim]),
        })
    }

    /// Finite metric space from a symmetric cost table.
    pub fn finite_metric(table: Vec<Vec<f64>>, alpha: f64, anchor_index: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let n = table.len();
        if n == 0 {
            return Err(Error::domain("cost table must be non-empty"));
        }
        if anchor_index >= n {
            return Err(Error::domain(format!("anchor index {anchor_index} out of range 0..{n}")));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain(format!("cost table row {i} has length {}, expected {n}", row.len())));
            }
            if table[i][i] != 0.0 {
                return Err(Error::domain(format!("cost table diagonal entry ({i},{i}) must be 0")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::domain(format!("cost table entry ({i},{j}) = {v} invalid")));
                }
                if (v - table[j][i]).abs() > 1e-12 {
                    return Err(Error::domain(format!("cost table not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if table[i][j] > table[i][k] + table[k][j] + 1e-12 {
                        return Err(Error::domain(format!(
                            "cost table violates the triangle inequality at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(GroundSpace {
            kind: SpaceKind::FiniteMetric { table },
            alpha,
            anchor: Point::Index(anchor_index),
        })
    }

    /// Finite metric space with the table read from a CSV square matrix.
    pub fn finite_metric_from_csv(path: &Path, alpha: f64, anchor_index: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
        let mut table = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad cost entry {cell:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table.push(row);
        }
        Self::finite_metric(table, alpha, anchor_index)
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn is_interval(&self) -> bool {
        matches!(self.kind, SpaceKind::Interval { .. })
    }

    /// Length of the interval, if this is one.
    pub fn interval_length(&self) -> Result<f64> {
        match self.kind {
            SpaceKind::Interval { length } => Ok(length),
            _ => Err(Error::UnsupportedSpace("operation requires an interval ground space".into())),
        }
    }

    /// Lebesgue volume for interval and box spaces.
    pub fn volume(&self) -> Result<f64> {
        match self.kind {
            SpaceKind::Interval { length } => Ok(length),
            SpaceKind::Box { dim, side } => Ok(side.powi(dim as i32)),
            SpaceKind::FiniteMetric { .. } => {
                Err(Error::UnsupportedSpace("finite metric spaces carry no volume".into()))
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&self.kind, p) {
            (SpaceKind::Interval { length }, Point::Scalar(x)) => {
                x.is_finite() && (0.0..=*length).contains(x)
            }
            (SpaceKind::Box { dim, side }, Point::Vector(v)) => {
                v.len() == *dim && v.iter().all(|x| x.is_finite() && (0.0..=*side).contains(x))
            }
            (SpaceKind::FiniteMetric { table }, Point::Index(i)) => *i < table.len(),
            _ => false,
        }
    }

    fn check_contains(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!("point {p:?} lies outside the ground space")))
        }
    }

    /// The metric `ρ` on `S`.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_contains(x)?;
        self.check_contains(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (&self.kind, x, y) {
            (SpaceKind::Interval { .. }, Point::Scalar(a), Point::Scalar(b)) => (a - b).abs(),
            (SpaceKind::Box { .. }, Point::Vector(a), Point::Vector(b)) => a
                .iter()
                .zip(b.iter())
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt(),
            (SpaceKind::FiniteMetric { table }, Point::Index(i), Point::Index(j)) => table[*i][*j],
            _ => unreachable!("validated points always match the space kind"),
        }
    }

    /// `ρ(s_α, x) = α + ρ(x, anchor)`.
    pub fn distance_to_alpha(&self, x: &Point) -> Result<f64> {
        self.check_contains(x)?;
        Ok(self.distance_to_alpha_unchecked(x))
    }

    pub(crate) fn distance_to_alpha_unchecked(&self, x: &Point) -> f64 {
        self.alpha + self.distance_unchecked(x, &self.anchor)
    }

    /// The metric on the augmented space `S ∪ {s_α}`.
    pub fn site_distance(&self, a: &Site, b: &Site) -> Result<f64> {
        match (a, b) {
            (Site::Alpha, Site::Alpha) => Ok(0.0),
            (Site::Alpha, Site::In(p)) | (Site::In(p), Site::Alpha) => self.distance_to_alpha(p),
            (Site::In(p), Site::In(q)) => self.distance(p, q),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SpaceKind::Interval { length } => *length,
            SpaceKind::Box { dim, side } => side * (*dim as f64).sqrt(),
            SpaceKind::FiniteMetric { table } => table
                .iter()
                .flat_map(|row| row.iter().copied())
                .fold(0.0, f64::max),
        }
    }

    /// Number of closed balls of diameter `eps` needed to cover `S`.
    ///
    /// Interval: exactly `ceil(T/eps)`. Box: an axis-aligned grid count
    /// `ceil(T sqrt(d)/eps)^d`, an upper bound on the optimal covering.
    /// Finite metric: greedy cover, again an upper bound.
    pub fn covering_number(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("covering radius must be positive, got {eps}")));
        }
        match &self.kind {
            SpaceKind::Interval { length } => Ok((length / eps).ceil().max(1.0) as u64),
            SpaceKind::Box { dim, side } => {
                let per_axis = (side * (*dim as f64).sqrt() / eps).ceil().max(1.0);
                let count = per_axis.powi(*dim as i32);
                if count > u64::MAX as f64 {
                    return Err(Error::domain(format!(
                        "box covering number overflows u64 at eps = {eps}"
                    )));
                }
                Ok(count as u64)
            }
            SpaceKind::FiniteMetric { .. } => Ok(self.covering_centers(eps)?.len() as u64),
        }
    }

    /// Explicit ball centers realising `covering_number`.
    ///
    /// Intended for tests and small spaces; errors if the grid would exceed
    /// a million centers.
    pub fn covering_centers(&self, eps: f64) -> Result<Vec<Point>> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("covering radius must be positive, got {eps}")));
        }
        const CENTER_CAP: u64 = 1_000_000;
        match &self.kind {
            SpaceKind::Interval { length } => {
                let k = (length / eps).ceil().max(1.0) as u64;
                if k > CENTER_CAP {
                    return Err(Error::domain("covering grid too large to materialise"));
                }
                // Ball i covers [i*eps, (i+1)*eps]; center clamped into S.
                Ok((0..k)
                    .map(|i| Point::Scalar(((i as f64 + 0.5) * eps).min(*length)))
                    .collect())
            }
            SpaceKind::Box { dim, side } => {
                let per_axis = (side * (*dim as f64).sqrt() / eps).ceil().max(1.0) as u64;
                let total = per_axis.checked_pow(*dim as u32).unwrap_or(u64::MAX);
                if total > CENTER_CAP {
                    return Err(Error::domain("covering grid too large to materialise"));
                }
                let cell = side / per_axis as f64;
                let mut centers = Vec::with_capacity(total as usize);
                let mut idx = vec![0u64; *dim];
                loop {
                    centers.push(Point::Vector(
                        idx.iter().map(|&i| ((i as f64 + 0.5) * cell).min(*side)).collect(),
                    ));
                    let mut d = 0;
                    loop {
                        if d == *dim {
                            return Ok(centers);
                        }
                        idx[d] += 1;
                        if idx[d] < per_axis {
                            break;
                        }
                        idx[d] = 0;
                        d += 1;
                    }
                }
            }
            SpaceKind::FiniteMetric { table } => {
                let n = table.len();
                let mut covered = vec![false; n];
                let mut centers = Vec::new();
                for i in 0..n {
                    if covered[i] {
                        continue;
                    }
                    centers.push(Point::Index(i));
                    for j in 0..n {
                        if table[i][j] <= eps / 2.0 {
                            covered[j] = true;
                        }
                    }
                }
                Ok(centers)
            }
        }
    }

    /// One point drawn uniformly from `S`.
    pub fn sample_point(&self, stream: &mut RngStream) -> Point {
        match &self.kind {
            SpaceKind::Interval { length } => Point::Scalar(stream.uniform(0.0, *length)),
            SpaceKind::Box { dim, side } => {
                Point::Vector((0..*dim).map(|_| stream.uniform(0.0, *side)).collect())
            }
            SpaceKind::FiniteMetric { table } => {
                Point::Index((stream.next_u64() % table.len() as u64) as usize)
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")))
    }
}
