//! Minimal ASCII DXF: a HEADER carrying `$INSUNITS` and one SPLINE entity per curve.
//!
//! SPLINE layout written: 70 flags (1 closed, 2 periodic, 4 rational, 8 planar),
//! 71 degree, 72 knot count, 73 control point count, 74 fit point count, then the
//! knots (40), the weights (41, only when some weight differs from 1) and the
//! control points (10/20/30). Numbers use the shortest text that parses back to the
//! same double.

use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use super::model::Units;
use super::{scratch_dir, write_atomic};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::nurbs::NurbsCurve;

pub const DEFAULT_DXF_NAME: &str = "r_out_dxf.dxf";

const FLAG_CLOSED: i64 = 1;
const FLAG_PERIODIC: i64 = 2;
const FLAG_RATIONAL: i64 = 4;
const FLAG_PLANAR: i64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DxfImport {
    pub curves: Vec<NurbsCurve>,
    /// From `$INSUNITS`; `None` when absent or not one of the supported units.
    pub units: Option<Units>,
    pub warnings: Vec<String>,
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("scale must be positive and finite, got {scale}")))
    }
}

fn pair(out: &mut String, code: i32, value: impl Display) {
    let _ = write!(out, "{code:>3}\n{value}\n");
}

fn insunits(units: Units) -> i32 {
    match units {
        Units::Unitless => 0,
        Units::Mm => 4,
        Units::Cm => 5,
    }
}

/// DXF text for `curves` with control points multiplied by `scale`.
pub fn write_dxf(curves: &[NurbsCurve], units: Units, scale: f64) -> Result<String> {
    check_scale(scale)?;
    let mut out = String::new();
    pair(&mut out, 0, "SECTION");
    pair(&mut out, 2, "HEADER");
    pair(&mut out, 9, "$ACADVER");
    pair(&mut out, 1, "AC1015");
    pair(&mut out, 9, "$INSUNITS");
    pair(&mut out, 70, insunits(units));
    pair(&mut out, 0, "ENDSEC");
    pair(&mut out, 0, "SECTION");
    pair(&mut out, 2, "ENTITIES");
    for curve in curves {
        curve.validate()?;
        let c = curve.scaled(scale);
        let rational = c.is_rational();
        let mut flags = FLAG_PLANAR;
        if c.is_periodic() {
            flags |= FLAG_CLOSED | FLAG_PERIODIC;
        }
        if rational {
            flags |= FLAG_RATIONAL;
        }
        pair(&mut out, 0, "SPLINE");
        pair(&mut out, 8, "0");
        pair(&mut out, 100, "AcDbEntity");
        pair(&mut out, 100, "AcDbSpline");
        pair(&mut out, 210, 0.0);
        pair(&mut out, 220, 0.0);
        pair(&mut out, 230, 1.0);
        pair(&mut out, 70, flags);
        pair(&mut out, 71, c.degree());
        pair(&mut out, 72, c.knots().len());
        pair(&mut out, 73, c.control_points().len());
        pair(&mut out, 74, 0);
        for k in c.knots() {
            pair(&mut out, 40, k);
        }
        if rational {
            for w in c.weights() {
                pair(&mut out, 41, w);
            }
        }
        for p in c.control_points() {
            pair(&mut out, 10, p.x);
            pair(&mut out, 20, p.y);
            pair(&mut out, 30, 0.0);
        }
    }
    pair(&mut out, 0, "ENDSEC");
    pair(&mut out, 0, "EOF");
    Ok(out)
}

/// Writes the DXF to `path`, or to `r_out_dxf.dxf` in the scratch directory. Returns the path written.
pub fn export_dxf(curves: &[NurbsCurve], path: Option<&Path>, units: Units, scale: f64) -> Result<PathBuf> {
    let text = write_dxf(curves, units, scale)?;
    let path = match path {
        Some(p) => p.to_path_buf(),
        None => scratch_dir().join(DEFAULT_DXF_NAME),
    };
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

pub fn import_dxf(path: &Path) -> Result<DxfImport> {
    let text = std::fs::read_to_string(path)?;
    read_dxf(&text)
}

struct Pair<'a> {
    code: i32,
    value: &'a str,
    /// Line of the group code, 1-based.
    line: usize,
}

fn pairs(text: &str) -> Result<Vec<Pair<'_>>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len() / 2);
    let mut i = 0;
    while i < lines.len() {
        let code_text = lines[i].trim();
        if code_text.is_empty() && i + 1 == lines.len() {
            break;
        }
        let code = code_text.parse::<i32>().map_err(|_| Error::DxfParse {
            line: i + 1,
            message: format!("expected an integer group code, found {code_text:?}"),
        })?;
        let value = lines
            .get(i + 1)
            .ok_or_else(|| Error::DxfParse { line: i + 1, message: format!("group code {code} has no value") })?;
        out.push(Pair { code, value: value.trim(), line: i + 1 });
        i += 2;
    }
    Ok(out)
}

fn real(p: &Pair) -> Result<f64> {
    match p.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::DxfParse {
            line: p.line + 1,
            message: format!("group {} expects a number, found {:?}", p.code, p.value),
        }),
    }
}

fn int(p: &Pair) -> Result<i64> {
    p.value.parse::<i64>().map_err(|_| Error::DxfParse {
        line: p.line + 1,
        message: format!("group {} expects an integer, found {:?}", p.code, p.value),
    })
}

fn count(p: &Pair) -> Result<usize> {
    usize::try_from(int(p)?)
        .map_err(|_| Error::DxfParse { line: p.line + 1, message: format!("group {} must be non-negative", p.code) })
}

#[derive(Default)]
struct SplineRecord {
    line: usize,
    flags: i64,
    degree: Option<usize>,
    knot_count: Option<usize>,
    control_count: Option<usize>,
    fit_count: usize,
    knots: Vec<f64>,
    weights: Vec<f64>,
    points: Vec<Vec2>,
    non_planar: bool,
}

impl SplineRecord {
    fn take(&mut self, p: &Pair) -> Result<()> {
        match p.code {
            70 => self.flags = int(p)?,
            71 => self.degree = Some(count(p)?),
            72 => self.knot_count = Some(count(p)?),
            73 => self.control_count = Some(count(p)?),
            74 => self.fit_count = count(p)?,
            40 => self.knots.push(real(p)?),
            41 => self.weights.push(real(p)?),
            10 => self.points.push(Vec2::new(real(p)?, f64::NAN)),
            20 => match self.points.last_mut() {
                Some(q) if q.y.is_nan() => q.y = real(p)?,
                _ => return Err(Error::DxfParse { line: p.line, message: "group 20 without a preceding 10".into() }),
            },
            30 => self.non_planar |= real(p)? != 0.0,
            _ => {}
        }
        Ok(())
    }

    fn finish(self, warnings: &mut Vec<String>) -> Result<Option<NurbsCurve>> {
        let line = self.line;
        let err = |message: String| Error::DxfParse { line, message };
        if self.points.is_empty() && self.fit_count > 0 {
            warnings.push(format!("line {line}: SPLINE defined by fit points only, skipped"));
            return Ok(None);
        }
        let degree = self.degree.ok_or_else(|| err("SPLINE has no degree (71)".into()))?;
        if let Some(q) = self.points.iter().position(|q| q.y.is_nan()) {
            return Err(err(format!("control point {q} has no y coordinate (20)")));
        }
        if let Some(k) = self.knot_count {
            if k != self.knots.len() {
                return Err(err(format!("knot count 72 = {k} but {} knots (40) present", self.knots.len())));
            }
        }
        let n = self.points.len();
        if let Some(c) = self.control_count {
            if c != n {
                return Err(err(format!("control point count 73 = {c} but {n} points (10/20) present")));
            }
        }
        let weights = if self.weights.is_empty() {
            if self.flags & FLAG_RATIONAL != 0 {
                return Err(err("rational SPLINE carries no weights (41)".into()));
            }
            vec![1.0; n]
        } else if self.weights.len() == n {
            self.weights
        } else {
            return Err(err(format!("{} weights (41) for {n} control points", self.weights.len())));
        };
        if self.non_planar {
            warnings.push(format!("line {line}: SPLINE has non-zero z coordinates, projected to the plane"));
        }
        let periodic = self.flags & FLAG_PERIODIC != 0;
        NurbsCurve::from_knots(degree, self.knots, self.points, weights, periodic)
            .map(Some)
            .map_err(|e| err(e.to_string()))
    }
}

enum Section {
    None,
    Header,
    Entities,
    Other,
}

/// Parses SPLINE entities from DXF text. Other entity types are skipped with a warning.
pub fn read_dxf(text: &str) -> Result<DxfImport> {
    let pairs = pairs(text)?;
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    let mut units = None;
    let mut section = Section::None;
    let mut spline: Option<SplineRecord> = None;
    let mut header_var: Option<&str> = None;
    let mut i = 0;
    while i < pairs.len() {
        let p = &pairs[i];
        i += 1;
        if p.code == 0 {
            if let Some(rec) = spline.take() {
                curves.extend(rec.finish(&mut warnings)?);
            }
            match (p.value, &section) {
                ("SECTION", _) => {
                    let name = pairs.get(i).filter(|q| q.code == 2).ok_or_else(|| Error::DxfParse {
                        line: p.line,
                        message: "SECTION without a name (2)".into(),
                    })?;
                    i += 1;
                    section = match name.value {
                        "HEADER" => Section::Header,
                        "ENTITIES" => Section::Entities,
                        _ => Section::Other,
                    };
                }
                ("ENDSEC", _) => section = Section::None,
                ("EOF", _) => break,
                ("SPLINE", Section::Entities) => spline = Some(SplineRecord { line: p.line, ..Default::default() }),
                (other, Section::Entities) => warnings.push(format!("line {}: {other} entity skipped", p.line)),
                _ => {}
            }
            continue;
        }
        match section {
            Section::Header => {
                if p.code == 9 {
                    header_var = Some(p.value);
                } else if header_var == Some("$INSUNITS") && p.code == 70 {
                    units = match int(p)? {
                        0 => Some(Units::Unitless),
                        4 => Some(Units::Mm),
                        5 => Some(Units::Cm),
                        other => {
                            warnings.push(format!("line {}: $INSUNITS = {other} is not supported", p.line));
                            None
                        }
                    };
                }
            }
            Section::Entities => {
                if let Some(rec) = spline.as_mut() {
                    rec.take(p)?;
                }
            }
            _ => {}
        }
    }
    if let Some(rec) = spline.take() {
        curves.extend(rec.finish(&mut warnings)?);
    }
    Ok(DxfImport { curves, units, warnings })
}
