//! Versioned JSON model document holding every persisted entity kind.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "units": "mm",
//!   "entities": [
//!     { "id": "p1", "kind": "polyline", "data": { "vertices": [[0, 0], [1, 0], [2, 1]], "kind": "support", "topology": "open" } }
//!   ]
//! }
//! ```
//!
//! Entity kinds: `polyline`, `nurbs_curve`, `hermite_table`, `analytic_curve`, `quality_report`.
//! Floats are written in the shortest form that parses back to the same double
//! (at most 17 significant digits), so documents round-trip bit for bit.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytic::{AnalyticCurveSpec, HermiteTable};
use crate::error::{Error, Result};
use crate::fairing::Polyline;
use crate::nurbs::NurbsCurve;
use crate::quality::QualityReport;

pub const FORMAT_VERSION: u32 = 1;
/// Content type of the encoded document.
pub const MEDIA_TYPE: &str = "application/vnd.faircurve.model+json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Mm,
    Cm,
    #[default]
    Unitless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum EntityValue {
    Polyline(Polyline),
    NurbsCurve(NurbsCurve),
    HermiteTable(HermiteTable),
    AnalyticCurve(AnalyticCurveSpec),
    QualityReport(QualityReport),
}

impl EntityValue {
    pub fn kind(&self) -> &'static str {
        match self {
            EntityValue::Polyline(_) => "polyline",
            EntityValue::NurbsCurve(_) => "nurbs_curve",
            EntityValue::HermiteTable(_) => "hermite_table",
            EntityValue::AnalyticCurve(_) => "analytic_curve",
            EntityValue::QualityReport(_) => "quality_report",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EntityValue::Polyline(p) => p.validate(),
            EntityValue::NurbsCurve(c) => c.validate(),
            EntityValue::HermiteTable(t) => t.validate(),
            EntityValue::AnalyticCurve(s) => s.validate(),
            EntityValue::QualityReport(r) => check_report(r),
        }
    }
}

fn check_report(r: &QualityReport) -> Result<()> {
    let scalars = [r.variation, r.max_rate, r.bending_energy];
    let optional = [r.deviation_max, r.deviation_min, r.lcg_residual];
    let extrema = r.extrema.iter().flat_map(|e| [e.t, e.s, e.kappa]);
    if scalars.into_iter().chain(optional.into_iter().flatten()).chain(extrema).all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidInput("quality report holds non-finite values".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    #[serde(flatten)]
    pub value: EntityValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub units: Units,
    pub entities: Vec<Entity>,
}

impl Default for ModelDocument {
    fn default() -> Self {
        Self::new(Units::default())
    }
}

impl ModelDocument {
    pub fn new(units: Units) -> Self {
        Self { format_version: FORMAT_VERSION, units, entities: Vec::new() }
    }

    /// Appends an entity; the id must be new.
    pub fn push(&mut self, id: impl Into<String>, value: EntityValue) -> Result<()> {
        let id = id.into();
        if self.get(&id).is_some() {
            return Err(Error::Model { entity: id, message: "duplicate id".into() });
        }
        self.entities.push(Entity { id, value });
        Ok(())
    }

    /// Inserts or replaces, keeping the position of a replaced entity.
    pub fn upsert(&mut self, id: impl Into<String>, value: EntityValue) {
        let id = id.into();
        match self.entities.iter_mut().find(|e| e.id == id) {
            Some(e) => e.value = value,
            None => self.entities.push(Entity { id, value }),
        }
    }

    pub fn get(&self, id: &str) -> Option<&EntityValue> {
        self.entities.iter().find(|e| e.id == id).map(|e| &e.value)
    }

    fn expect(&self, id: &str) -> Result<&EntityValue> {
        self.get(id).ok_or_else(|| Error::Model { entity: id.into(), message: "no such entity".into() })
    }

    fn wrong_kind(id: &str, found: &EntityValue, want: &str) -> Error {
        Error::Model { entity: id.into(), message: format!("is a {}, expected {want}", found.kind()) }
    }

    pub fn polyline(&self, id: &str) -> Result<&Polyline> {
        match self.expect(id)? {
            EntityValue::Polyline(p) => Ok(p),
            other => Err(Self::wrong_kind(id, other, "polyline")),
        }
    }

    pub fn nurbs_curve(&self, id: &str) -> Result<&NurbsCurve> {
        match self.expect(id)? {
            EntityValue::NurbsCurve(c) => Ok(c),
            other => Err(Self::wrong_kind(id, other, "nurbs_curve")),
        }
    }

    pub fn hermite_table(&self, id: &str) -> Result<&HermiteTable> {
        match self.expect(id)? {
            EntityValue::HermiteTable(t) => Ok(t),
            other => Err(Self::wrong_kind(id, other, "hermite_table")),
        }
    }

    pub fn analytic_curve(&self, id: &str) -> Result<&AnalyticCurveSpec> {
        match self.expect(id)? {
            EntityValue::AnalyticCurve(s) => Ok(s),
            other => Err(Self::wrong_kind(id, other, "analytic_curve")),
        }
    }

    pub fn curves(&self) -> impl Iterator<Item = (&str, &NurbsCurve)> {
        self.entities.iter().filter_map(|e| match &e.value {
            EntityValue::NurbsCurve(c) => Some((e.id.as_str(), c)),
            _ => None,
        })
    }

    /// Version, id uniqueness and every entity's invariants.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for e in &self.entities {
            if e.id.is_empty() {
                return Err(Error::Model { entity: String::new(), message: "empty id".into() });
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Model { entity: e.id.clone(), message: "duplicate id".into() });
            }
            e.value.validate().map_err(|err| Error::Entity { entity: e.id.clone(), source: Box::new(err) })?;
        }
        Ok(())
    }
}

/// Pretty-printed JSON with a trailing newline. The document is validated first.
pub fn encode_model(doc: &ModelDocument) -> Result<String> {
    doc.validate()?;
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Error::ModelFormat(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Deserialize)]
struct RawDocument {
    format_version: Value,
    #[serde(default)]
    units: Units,
    #[serde(default)]
    entities: Vec<Value>,
}

pub fn decode_model(text: &str) -> Result<ModelDocument> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let version = raw.format_version.as_u64().filter(|&v| v == u64::from(FORMAT_VERSION));
    if version.is_none() {
        return Err(Error::ModelFormat(format!(
            "format_version {} is not supported (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let mut entities = Vec::with_capacity(raw.entities.len());
    for (i, v) in raw.entities.into_iter().enumerate() {
        let label = match v.get("id") {
            Some(Value::String(s)) => s.clone(),
            _ => format!("#{i}"),
        };
        let e: Entity =
            serde_json::from_value(v).map_err(|e| Error::Model { entity: label, message: e.to_string() })?;
        entities.push(e);
    }
    let doc = ModelDocument { format_version: FORMAT_VERSION, units: raw.units, entities };
    doc.validate()?;
    Ok(doc)
}
