//! JSON encodings of polynomials, windowed subspaces, layered subspaces and
//! Schur pairs. Scalars are strings (`"num/den"` over `Q`, residues over
//! `F_p`); output objects have sorted keys.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fredholm::WindowedSubspace;
use crate::local2d::{Local2DElement, Local2DVector, Window2D};
use crate::schur::{LayeredSubspace, SchurError, SchurPair};
use crate::series::{Field, LaurentPoly, LaurentVec, Scalar, SeriesError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub field: Field,
    pub coeffs: Vec<(i64, String)>,
}

impl From<&LaurentPoly> for PolyJson {
    fn from(p: &LaurentPoly) -> Self {
        PolyJson {
            field: p.field(),
            coeffs: p.coeffs().iter().map(|(e, c)| (*e, c.to_string())).collect(),
        }
    }
}

impl PolyJson {
    pub fn to_poly(&self) -> Result<LaurentPoly, JsonError> {
        let terms = self
            .coeffs
            .iter()
            .map(|(e, c)| Ok((*e, Scalar::parse(self.field, c)?)))
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(LaurentPoly::from_terms(self.field, terms)?)
    }
}

/// One component of an element of `K^{⊕r}`; `component` counts from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub terms: Vec<(i64, i64, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

impl ElementJson {
    pub fn from_element(x: &Local2DElement, component: Option<usize>) -> Self {
        ElementJson {
            terms: x
                .terms()
                .iter()
                .map(|((b, a), c)| (*a, *b, c.to_string()))
                .collect(),
            component,
        }
    }

    pub fn to_element(&self, field: Field) -> Result<Local2DElement, JsonError> {
        let terms = self
            .terms
            .iter()
            .map(|(a, b, c)| Ok(((*a, *b), Scalar::parse(field, c)?)))
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(Local2DElement::from_terms(field, terms).map_err(SchurError::from)?)
    }
}

fn vector_to_json(v: &Local2DVector) -> Vec<ElementJson> {
    let r = v.rank();
    v.components()
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero() || r == 1)
        .map(|(i, x)| ElementJson::from_element(x, (r > 1).then_some(i + 1)))
        .collect()
}

fn vector_from_json(parts: &[ElementJson], field: Field, r: usize) -> Result<Local2DVector, JsonError> {
    let mut comps = vec![Local2DElement::zero(field); r];
    for p in parts {
        let i = p.component.unwrap_or(1);
        if i == 0 || i > r {
            return Err(JsonError::Invalid(format!("component {i} outside 1..={r}")));
        }
        comps[i - 1] = comps[i - 1].add(&p.to_element(field)?).map_err(SchurError::from)?;
    }
    Ok(Local2DVector::from_components(field, comps).map_err(SchurError::from)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub r: usize,
    pub u_lo: i64,
    pub u_hi: i64,
    pub full_below: bool,
    #[serde(default)]
    pub m_u: i64,
    pub rows: Vec<Vec<PolyJson>>,
}

impl From<&WindowedSubspace> for SubspaceJson {
    fn from(w: &WindowedSubspace) -> Self {
        SubspaceJson {
            r: w.rank(),
            u_lo: w.u_lo(),
            u_hi: w.u_hi(),
            full_below: w.full_below(),
            m_u: w.margin(),
            rows: w
                .rows()
                .iter()
                .map(|v| v.components().iter().map(PolyJson::from).collect())
                .collect(),
        }
    }
}

impl SubspaceJson {
    pub fn to_subspace(&self, field: Field) -> Result<WindowedSubspace, JsonError> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            if row.len() != self.r {
                return Err(JsonError::Invalid(format!(
                    "row has {} components, expected {}",
                    row.len(),
                    self.r
                )));
            }
            let comps = row
                .iter()
                .map(|p| {
                    field.ensure_same(p.field)?;
                    p.to_poly()
                })
                .collect::<Result<Vec<_>, JsonError>>()?;
            rows.push(LaurentVec::from_components(field, &comps)?);
        }
        WindowedSubspace::from_parts(field, self.r, self.u_lo, self.u_hi, self.full_below, self.m_u, rows)
            .map_err(|e| JsonError::Schur(e.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    pub b: i64,
    pub space: SubspaceJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredJson {
    pub r: usize,
    pub levels: Vec<LevelJson>,
    pub generators: Vec<Vec<ElementJson>>,
}

impl From<&LayeredSubspace> for LayeredJson {
    fn from(l: &LayeredSubspace) -> Self {
        LayeredJson {
            r: l.rank(),
            levels: l
                .levels()
                .iter()
                .map(|(b, s)| LevelJson {
                    b: *b,
                    space: s.into(),
                })
                .collect(),
            generators: l.generators().iter().map(vector_to_json).collect(),
        }
    }
}

impl LayeredJson {
    pub fn to_layered(&self, field: Field, window: Window2D) -> Result<LayeredSubspace, JsonError> {
        let mut levels = BTreeMap::new();
        for lv in &self.levels {
            if levels.insert(lv.b, lv.space.to_subspace(field)?).is_some() {
                return Err(JsonError::Invalid(format!("level {} listed twice", lv.b)));
            }
        }
        let generators = self
            .generators
            .iter()
            .map(|g| vector_from_json(g, field, self.r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LayeredSubspace::new(field, self.r, window, levels, generators)?)
    }
}

fn default_field() -> Field {
    Field::Rational
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJson {
    #[serde(default = "default_field")]
    pub field: Field,
    pub window: Window2D,
    #[serde(rename = "A")]
    pub a: LayeredJson,
    #[serde(rename = "W")]
    pub w: LayeredJson,
}

impl From<&SchurPair> for PairJson {
    fn from(p: &SchurPair) -> Self {
        PairJson {
            field: p.field(),
            window: *p.window(),
            a: p.a().into(),
            w: p.w().into(),
        }
    }
}

impl PairJson {
    pub fn to_pair(&self) -> Result<SchurPair, JsonError> {
        self.window.validate().map_err(SchurError::from)?;
        let a = self.a.to_layered(self.field, self.window)?;
        let w = self.w.to_layered(self.field, self.window)?;
        Ok(SchurPair::new(a, w)?)
    }
}

/// Pretty JSON with object keys in sorted order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&v).expect("serializable")
}

pub fn pair_to_json(p: &SchurPair) -> String {
    to_sorted_json(&PairJson::from(p))
}

pub fn pair_from_json(s: &str) -> Result<SchurPair, JsonError> {
    let pj: PairJson = serde_json::from_str(s)?;
    pj.to_pair()
}
