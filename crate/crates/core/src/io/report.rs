//! Canonical JSON form of a [`CriteriaReport`]: sorted keys, two-space
//! indentation and every floating-point value printed with six decimals.

use serde_json::{json, Map, Value};

use crate::criteria::CriteriaReport;
use crate::error::{Error, Result};
use crate::geometry::Point;

fn point(p: Point) -> Value {
    json!({ "x": p.x, "y": p.y })
}

/// Report as a JSON value (keys sorted by `serde_json`'s default map).
pub fn report_value(report: &CriteriaReport) -> Value {
    let criteria: Vec<Value> = report
        .results
        .iter()
        .map(|r| {
            let evidence: Map<String, Value> = r
                .evidence
                .iter()
                .map(|&(k, v)| (k.to_string(), Value::from(v)))
                .collect();
            json!({
                "id": r.id,
                "name": r.name,
                "pass": r.pass,
                "indeterminate": r.indeterminate,
                "evidence": evidence,
                "explanation": r.explanation,
            })
        })
        .collect();
    let line = &report.crl_line;
    json!({
        "criteria": criteria,
        "total_score": report.total_score,
        "accepted": report.accepted,
        "crl_line": {
            "crown": point(line.crown),
            "rump": point(line.rump),
            "length_px": line.length_px,
            "angle_deg": line.angle_deg,
        },
        "warnings": report.warnings,
    })
}

pub fn write_report(report: &CriteriaReport) -> String {
    to_canonical(&report_value(report))
}

/// Re-emits any JSON payload in canonical form.
pub fn canonicalize(payload: &str) -> Result<String> {
    let value: Value = serde_json::from_str(payload).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    Ok(to_canonical(&value))
}

pub fn to_canonical(value: &Value) -> String {
    let mut out = String::new();
    emit(value, 0, &mut out);
    out.push('\n');
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn emit(value: &Value, level: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().expect("f64 number");
                out.push_str(&format!("{f:.6}"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(level + 1, out);
                emit(item, level + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                emit(&map[*key], level + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::assess;
    use crate::phantom::{generate_phantom, PhantomParams};

    fn favorable() -> crate::phantom::Phantom {
        generate_phantom(&PhantomParams::favorable(400, 300)).unwrap()
    }

    #[test]
    fn accepted_report_fields() {
        let p = favorable();
        let json = write_report(&assess(Some(&p.image), &p.mask, &Default::default()).unwrap());
        assert!(json.contains("\"accepted\": true"));
        assert!(json.contains("\"total_score\": 7"));
        assert!(json.starts_with("{\n  \"accepted\""));
    }

    #[test]
    fn indeterminate_caliper_is_marked() {
        let p = favorable();
        let report = assess(None, &p.mask, &Default::default()).unwrap();
        let value: Value = serde_json::from_str(&write_report(&report)).unwrap();
        let left = &value["criteria"][4];
        assert_eq!(left["id"], 5);
        assert_eq!(left["pass"], false);
        assert_eq!(left["indeterminate"], true);
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let p = favorable();
        let json = write_report(&assess(Some(&p.image), &p.mask, &Default::default()).unwrap());
        assert_eq!(canonicalize(&json).unwrap(), json);
    }

    #[test]
    fn floats_use_six_decimals() {
        let v = json!({"b": 0.5, "a": [1, 2.0, -0.25], "c": {}});
        assert_eq!(
            to_canonical(&v),
            "{\n  \"a\": [\n    1,\n    2.000000,\n    -0.250000\n  ],\n  \"b\": 0.500000,\n  \"c\": {}\n}\n"
        );
    }
}
