//! Bit-exact JSON documents for families.
//!
//! Every dyadic scalar is written as a `(numerator, log2 denominator)` pair.

use serde::{Deserialize, Serialize};

use super::baselines::IfsParams;
use super::family::{BoxFamily, FamilyKind, Rect, Segment, SegmentFamily};
use super::schedule::ScheduleParams;
use crate::error::{Error, Result};
use crate::kernel::Dyadic;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ParamsDoc {
    g: Option<Vec<f64>>,
    a: Vec<(i128, u32)>,
    m: Vec<u32>,
    c_sep: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FamilyDoc {
    schema_version: u32,
    kind: FamilyKind,
    level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<ParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ifs: Option<IfsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<[i128; 6]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boxes: Option<Vec<[i128; 8]>>,
}

/// Either kind of family, as read back from a document.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Segments(SegmentFamily),
    Boxes(BoxFamily),
}

fn pair(d: Dyadic) -> (i128, u32) {
    (d.mantissa(), d.exponent())
}

fn flat<const N: usize>(ds: [Dyadic; N]) -> Vec<i128> {
    ds.iter()
        .flat_map(|d| [d.mantissa(), d.exponent() as i128])
        .collect()
}

fn unflat(v: &[i128]) -> Result<Vec<Dyadic>> {
    v.chunks(2)
        .map(|c| {
            let e =
                u32::try_from(c[1]).map_err(|_| Error::config(format!("bad exponent {}", c[1])))?;
            let d = Dyadic::new(c[0], e)?;
            // canonical form is required for bit-exact round trips
            if pair(d) != (c[0], e) {
                return Err(Error::config(format!(
                    "non-canonical dyadic ({}, {e})",
                    c[0]
                )));
            }
            Ok(d)
        })
        .collect()
}

fn params_doc(p: &ScheduleParams) -> ParamsDoc {
    ParamsDoc {
        g: p.growth().map(<[f64]>::to_vec),
        a: p.increments().iter().copied().map(pair).collect(),
        m: p.scales().to_vec(),
        c_sep: p.c_sep(),
    }
}

fn params_from_doc(d: ParamsDoc) -> Result<ScheduleParams> {
    let a =
        d.a.iter()
            .map(|&(num, e)| Ok(Dyadic::new(num, e)?))
            .collect::<Result<Vec<_>>>()?;
    ScheduleParams::from_parts(d.g, a, d.m, d.c_sep)
}

pub fn segment_family_to_json(f: &SegmentFamily) -> Result<String> {
    let doc = FamilyDoc {
        schema_version: SCHEMA_VERSION,
        kind: FamilyKind::GraphConstruction,
        level: f.level(),
        params: Some(params_doc(f.params())),
        ifs: None,
        seed: None,
        segments: Some(
            f.segments()
                .iter()
                .map(|s| flat([s.x_lo, s.x_hi, s.y]).try_into().unwrap())
                .collect(),
        ),
        boxes: None,
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn box_family_to_json(f: &BoxFamily) -> Result<String> {
    let doc = FamilyDoc {
        schema_version: SCHEMA_VERSION,
        kind: f.kind(),
        level: f.level(),
        params: f.params().map(params_doc),
        ifs: f.ifs().cloned(),
        seed: f.seed(),
        segments: None,
        boxes: Some(
            f.boxes()
                .iter()
                .map(|b| flat([b.x_lo, b.x_hi, b.y_lo, b.y_hi]).try_into().unwrap())
                .collect(),
        ),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn family_from_json(text: &str) -> Result<Family> {
    let doc: FamilyDoc = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::config(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    let params = doc.params.map(params_from_doc).transpose()?;
    match (doc.segments, doc.boxes) {
        (Some(segs), None) => {
            let params = params.ok_or_else(|| Error::config("segment family without params"))?;
            if doc.level > params.levels() {
                return Err(Error::config("level beyond schedule"));
            }
            let segments = segs
                .iter()
                .map(|s| {
                    let d = unflat(s)?;
                    Ok(Segment {
                        x_lo: d[0],
                        x_hi: d[1],
                        y: d[2],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Family::Segments(SegmentFamily::from_parts(
                doc.level, params, segments,
            )))
        }
        (None, Some(boxes)) => {
            let boxes = boxes
                .iter()
                .map(|b| {
                    let d = unflat(b)?;
                    Ok(Rect {
                        x_lo: d[0],
                        x_hi: d[1],
                        y_lo: d[2],
                        y_hi: d[3],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Family::Boxes(BoxFamily::from_parts(
                doc.level, doc.kind, boxes, params, doc.ifs, doc.seed,
            )))
        }
        _ => Err(Error::config(
            "document needs exactly one of `segments` or `boxes`",
        )),
    }
}
