//! Machine-readable reports: membership JSON and trace CSV.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointmass::{FiltrationTrace, Verdict};

/// Serde adapter writing non-finite floats as `null` and reading `null`
/// back as `+∞`.
pub mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// One row of a membership table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub point: String,
    pub verdict: Verdict,
    #[serde(with = "nullable_f64")]
    pub estimate: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

impl MembershipReport {
    pub fn from_trace(point: String, trace: &FiltrationTrace) -> Self {
        Self {
            point,
            verdict: trace.verdict,
            estimate: trace.last_value().unwrap_or(f64::NAN),
            steps: trace.steps.len(),
            plateau_n: trace.plateau_n,
            breakdown_n: trace.breakdown_n,
            trace_file: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    n: usize,
    zeta: f64,
    verdict_so_far: String,
}

/// Writes `n,zeta,verdict_so_far`.
pub fn write_trace_csv<W: Write>(trace: &FiltrationTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &trace.steps {
        w.serialize(TraceRow { n: s.n, zeta: s.value, verdict_so_far: s.verdict_so_far.label().into() })
            .map_err(|e| Error::Parse { line: s.n, message: e.to_string() })?;
    }
    w.flush().map_err(|e| Error::Parse { line: 0, message: e.to_string() })
}

/// Reads back `(n, zeta, verdict label)` rows.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<(usize, f64, String)>> {
    csv::Reader::from_reader(input)
        .deserialize::<TraceRow>()
        .enumerate()
        .map(|(i, r)| {
            r.map(|r| (r.n, r.zeta, r.verdict_so_far))
                .map_err(|e| Error::Parse { line: i + 2, message: e.to_string() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MinKernel;
    use crate::point_config::{Point, PointConfiguration};
    use crate::pointmass::{membership_scan, ScanPolicy};

    #[test]
    fn report_round_trips() {
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        let c = PointConfiguration::from_reals(&xs, true).unwrap();
        let t = membership_scan(&MinKernel, &c, Point::Real(1.0), &ScanPolicy::default()).unwrap();
        let r = MembershipReport::from_trace("1".into(), &t);
        let back: MembershipReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,zeta,verdict_so_far\n"));
        let rows = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), t.steps.len());
        assert_eq!(rows[0].1, t.steps[0].value);
    }

    #[test]
    fn infinite_estimate_is_null() {
        let r = MembershipReport {
            point: "0".into(),
            verdict: Verdict::Inconclusive,
            estimate: f64::INFINITY,
            steps: 0,
            plateau_n: None,
            breakdown_n: None,
            trace_file: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"estimate\":null"));
        assert_eq!(serde_json::from_str::<MembershipReport>(&s).unwrap().estimate, f64::INFINITY);
    }
}
