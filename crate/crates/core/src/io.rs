//! File formats: JSONL counting measures and dataset metadata sidecars.
//!
//! One measure per line, encoded as a JSON array of coordinates: scalars on
//! an interval, d-arrays on a box, integer indices on a finite metric space.
//! A line may instead be an object `{"points": [...], "weight": w}`; weights
//! must then appear on every line and sum to one.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ground::{GroundSpace, Point, SpaceKind};
use crate::law::EmpiricalLaw;
use crate::measure::CountingMeasure;
use crate::sampler::SamplerSpec;

/// Sidecar metadata written next to generated datasets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub spec: SamplerSpec,
    pub master_seed: u64,
    pub count: usize,
}

fn point_to_value(space: &GroundSpace, p: &Point) -> Result<Value> {
    match (space.kind(), p) {
        (SpaceKind::Interval { .. }, Point::Scalar(x)) => Ok(Value::from(*x)),
        (SpaceKind::Box { .. }, Point::Vector(v)) => Ok(Value::from(v.clone())),
        (SpaceKind::FiniteMetric { .. }, Point::Index(i)) => Ok(Value::from(*i)),
        _ => Err(Error::domain(format!("point {p:?} does not match the space kind"))),
    }
}

fn point_from_value(space: &GroundSpace, v: &Value) -> Result<Point> {
    let point = match (space.kind(), v) {
        (SpaceKind::Interval { .. }, Value::Number(x)) => Point::Scalar(
            x.as_f64()
                .ok_or_else(|| Error::Parse(format!("bad coordinate {x}")))?,
        ),
        (SpaceKind::FiniteMetric { .. }, Value::Number(x)) => Point::Index(
            x.as_u64()
                .ok_or_else(|| Error::Parse(format!("index {x} is not a non-negative integer")))?
                as usize,
        ),
        (SpaceKind::Box { .. }, Value::Array(xs)) => Point::Vector(
            xs.iter()
                .map(|c| {
                    c.as_f64()
                        .ok_or_else(|| Error::Parse(format!("bad coordinate {c}")))
                })
                .collect::<Result<Vec<f64>>>()?,
        ),
        _ => {
            return Err(Error::Parse(format!(
                "coordinate {v} does not match the space kind"
            )))
        }
    };
    if !space.contains(&point) {
        return Err(Error::domain(format!("point {point:?} lies outside the ground space")));
    }
    Ok(point)
}

fn measure_to_value(space: &GroundSpace, mu: &CountingMeasure) -> Result<Value> {
    Ok(Value::Array(
        mu.points()
            .iter()
            .map(|p| point_to_value(space, p))
            .collect::<Result<Vec<Value>>>()?,
    ))
}

fn measure_from_value(space: &GroundSpace, v: &Value) -> Result<CountingMeasure> {
    let Value::Array(items) = v else {
        return Err(Error::Parse(format!("expected a JSON array of coordinates, got {v}")));
    };
    Ok(CountingMeasure::new(
        items
            .iter()
            .map(|item| point_from_value(space, item))
            .collect::<Result<Vec<Point>>>()?,
    ))
}

/// Write measures as plain JSONL arrays.
pub fn write_measures_jsonl(
    out: &mut impl Write,
    space: &GroundSpace,
    measures: &[CountingMeasure],
) -> Result<()> {
    for mu in measures {
        serde_json::to_writer(&mut *out, &measure_to_value(space, mu)?)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read plain JSONL measures; weighted lines are rejected here.
pub fn read_measures_jsonl(
    input: &mut impl BufRead,
    space: &GroundSpace,
) -> Result<Vec<CountingMeasure>> {
    let mut measures = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)?;
        measures.push(measure_from_value(space, &value)?);
    }
    Ok(measures)
}

/// Write a law as JSONL; uniform laws produce plain arrays, anything else
/// gets an explicit weight per line.
pub fn write_law_jsonl(out: &mut impl Write, space: &GroundSpace, law: &EmpiricalLaw) -> Result<()> {
    if law.is_uniform() {
        return write_measures_jsonl(out, space, law.atoms());
    }
    for (mu, w) in law.atoms().iter().zip(law.weights()) {
        let line = serde_json::json!({
            "points": measure_to_value(space, mu)?,
            "weight": w,
        });
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a law from JSONL. Plain-array lines load as a uniform law; object
/// lines must all carry a weight.
pub fn read_law_jsonl(input: &mut impl BufRead, space: &GroundSpace) -> Result<EmpiricalLaw> {
    let mut atoms = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut saw_plain = false;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)?;
        match &value {
            Value::Object(map) => {
                let points = map
                    .get("points")
                    .ok_or_else(|| Error::Parse("weighted line lacks a \"points\" field".into()))?;
                let w = map
                    .get("weight")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Parse("weighted line lacks a numeric \"weight\"".into()))?;
                atoms.push(measure_from_value(space, points)?);
                weights.push(w);
            }
            _ => {
                saw_plain = true;
                atoms.push(measure_from_value(space, &value)?);
            }
        }
    }
    if weights.is_empty() {
        EmpiricalLaw::uniform(atoms)
    } else if saw_plain {
        Err(Error::Parse("cannot mix weighted and unweighted lines in one law".into()))
    } else {
        EmpiricalLaw::weighted(atoms, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::SamplerVariant;

    #[test]
    fn interval_round_trip() {
        let space = GroundSpace::interval(8.0, 1.0).unwrap();
        let measures = vec![
            CountingMeasure::from_scalars(&[0.5, 1.0, 3.8, 7.2]),
            CountingMeasure::zero(),
            CountingMeasure::from_scalars(&[2.0, 2.0]),
        ];
        let mut buf = Vec::new();
        write_measures_jsonl(&mut buf, &space, &measures).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(1).unwrap(), "[]");
        let back = read_measures_jsonl(&mut buf.as_slice(), &space).unwrap();
        assert_eq!(back, measures);
    }

    #[test]
    fn box_round_trip() {
        let space = GroundSpace::boxed(2, 1.0, 0.5).unwrap();
        let measures = vec![CountingMeasure::new(vec![
            Point::Vector(vec![0.25, 0.75]),
            Point::Vector(vec![1.0, 0.0]),
        ])];
        let mut buf = Vec::new();
        write_measures_jsonl(&mut buf, &space, &measures).unwrap();
        let back = read_measures_jsonl(&mut buf.as_slice(), &space).unwrap();
        assert_eq!(back, measures);
    }

    #[test]
    fn finite_metric_round_trip() {
        let space = GroundSpace::finite_metric(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            1.0,
            0,
        )
        .unwrap();
        let measures = vec![CountingMeasure::new(vec![Point::Index(0), Point::Index(1)])];
        let mut buf = Vec::new();
        write_measures_jsonl(&mut buf, &space, &measures).unwrap();
        let back = read_measures_jsonl(&mut buf.as_slice(), &space).unwrap();
        assert_eq!(back, measures);
    }

    #[test]
    fn weighted_law_round_trip() {
        let space = GroundSpace::interval(1.0, 1.0).unwrap();
        let law = EmpiricalLaw::weighted(
            vec![
                CountingMeasure::from_scalars(&[0.5]),
                CountingMeasure::zero(),
            ],
            vec![0.75, 0.25],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_law_jsonl(&mut buf, &space, &law).unwrap();
        let back = read_law_jsonl(&mut buf.as_slice(), &space).unwrap();
        assert_eq!(back.weights(), law.weights());
        assert_eq!(back.atoms(), law.atoms());
    }

    #[test]
    fn out_of_space_and_malformed_lines_fail() {
        let space = GroundSpace::interval(1.0, 1.0).unwrap();
        let mut bad = "[2.5]\n".as_bytes();
        assert!(read_measures_jsonl(&mut bad, &space).is_err());
        let mut garbage = "{not json\n".as_bytes();
        assert!(read_measures_jsonl(&mut garbage, &space).is_err());
        let mut mixed = "[0.5]\n{\"points\": [0.5], \"weight\": 1.0}\n".as_bytes();
        assert!(read_law_jsonl(&mut mixed, &space).is_err());
    }

    #[test]
    fn meta_sidecar_serialises() {
        let space = GroundSpace::interval(1.0, 1.0).unwrap();
        let spec = SamplerSpec::new(SamplerVariant::HomogeneousPoisson { rate: 2.0 }, space).unwrap();
        let meta = DatasetMeta { spec, master_seed: 42, count: 10 };
        let text = serde_json::to_string_pretty(&meta).unwrap();
        let back: DatasetMeta = serde_json::from_str(&text).unwrap();
        assert_eq!(back.master_seed, 42);
        assert_eq!(back.count, 10);
    }
}
