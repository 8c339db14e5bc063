//! Vertex models on the honeycomb torus and their JSON file formats.

use serde::{Deserialize, Serialize};

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::lattice::{Color, FisherTorus, HoneyTorus, TriangleWeights};
use crate::signatures::VertexSignature;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexModel {
    lattice: HoneyTorus,
    signatures: Vec<VertexSignature>,
}

impl VertexModel {
    pub fn new(lattice: HoneyTorus, signatures: Vec<VertexSignature>) -> Result<Self> {
        if signatures.len() != lattice.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} signatures, got {}",
                lattice.vertex_count(),
                signatures.len()
            )));
        }
        for s in &signatures {
            s.validate()?;
        }
        Ok(VertexModel { lattice, signatures })
    }

    /// Same signature at every black vertex and at every white vertex.
    pub fn periodic(n: usize, black: VertexSignature, white: VertexSignature) -> Result<Self> {
        let lattice = HoneyTorus::new(n)?;
        let sigs = (0..lattice.vertex_count()).map(|v| if v % 2 == 0 { black } else { white }).collect();
        VertexModel::new(lattice, sigs)
    }

    pub fn lattice(&self) -> &HoneyTorus {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn signatures(&self) -> &[VertexSignature] {
        &self.signatures
    }

    pub fn signature(&self, v: usize) -> &VertexSignature {
        &self.signatures[v]
    }

    /// `(black, white)` when the model is 1x1-periodic.
    pub fn cell(&self) -> Option<(VertexSignature, VertexSignature)> {
        let (b, w) = (self.signatures[0], self.signatures[1]);
        self.signatures
            .iter()
            .enumerate()
            .all(|(v, s)| *s == if v % 2 == 0 { b } else { w })
            .then_some((b, w))
    }

    pub fn local_config(&self, v: usize, occupied: &[bool]) -> LocalConfig {
        let inc = self.lattice.incident(v);
        LocalConfig::from_index(
            (occupied[inc[0]] as usize) << 2 | (occupied[inc[1]] as usize) << 1 | occupied[inc[2]] as usize,
        )
    }

    /// Product of local weights of an edge configuration.
    pub fn weight(&self, occupied: &[bool]) -> f64 {
        (0..self.lattice.vertex_count())
            .map(|v| self.signatures[v].get(self.local_config(v, occupied)))
            .product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureFile {
    #[serde(default = "abc_binary")]
    pub order: String,
    pub w: [f64; 8],
}

fn abc_binary() -> String {
    "abc-binary".into()
}

impl SignatureFile {
    pub fn new(s: VertexSignature) -> Self {
        SignatureFile { order: abc_binary(), w: s.0 }
    }

    pub fn signature(&self) -> Result<VertexSignature> {
        if self.order != "abc-binary" {
            return Err(Error::InvalidInput(format!("unsupported signature order {:?}", self.order)));
        }
        let s = VertexSignature(self.w);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub i: usize,
    pub j: usize,
    pub color: Color,
    pub w: [f64; 8],
}

/// Model file: either a `black`/`white` pair repeated over the torus or an
/// explicit `vertices` list covering every vertex once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black: Option<SignatureFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub white: Option<SignatureFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<VertexEntry>>,
}

fn one() -> usize {
    1
}

impl ModelFile {
    pub fn periodic(n: usize, black: VertexSignature, white: VertexSignature) -> Self {
        ModelFile {
            n,
            black: Some(SignatureFile::new(black)),
            white: Some(SignatureFile::new(white)),
            vertices: None,
        }
    }

    /// Model on the n x n torus, with `n_override` replacing the file's period
    /// for periodic files.
    pub fn build(&self, n_override: Option<usize>) -> Result<VertexModel> {
        match (&self.black, &self.white, &self.vertices) {
            (Some(b), Some(w), None) => {
                VertexModel::periodic(n_override.unwrap_or(self.n), b.signature()?, w.signature()?)
            }
            (None, None, Some(list)) => {
                if n_override.is_some_and(|m| m != self.n) {
                    return Err(Error::InvalidInput("explicit vertex lists fix the period".into()));
                }
                let lattice = HoneyTorus::new(self.n)?;
                let mut sigs: Vec<Option<VertexSignature>> = vec![None; lattice.vertex_count()];
                for e in list {
                    if e.i >= self.n || e.j >= self.n {
                        return Err(Error::InvalidInput(format!("vertex ({}, {}) outside the torus", e.i, e.j)));
                    }
                    let v = match e.color {
                        Color::Black => lattice.black(e.i, e.j),
                        Color::White => lattice.white(e.i, e.j),
                    };
                    if sigs[v].replace(VertexSignature(e.w)).is_some() {
                        return Err(Error::InvalidInput(format!("vertex ({}, {}) listed twice", e.i, e.j)));
                    }
                }
                let sigs = sigs
                    .into_iter()
                    .enumerate()
                    .map(|(v, s)| s.ok_or_else(|| Error::InvalidInput(format!("vertex {v} missing"))))
                    .collect::<Result<Vec<_>>>()?;
                VertexModel::new(lattice, sigs)
            }
            _ => Err(Error::InvalidInput(
                "model file needs either black and white signatures or a vertices list".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleEntry {
    pub i: usize,
    pub j: usize,
    pub color: Color,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherFile {
    pub n: usize,
    pub triangles: Vec<TriangleEntry>,
}

impl FisherFile {
    pub fn from_torus(f: &FisherTorus) -> Self {
        let h = f.lattice();
        let triangles = f
            .weights()
            .iter()
            .enumerate()
            .map(|(v, t)| {
                let x = h.vertex(v);
                TriangleEntry { i: x.i, j: x.j, color: x.color, a: t.a, b: t.b, c: t.c, d: t.d }
            })
            .collect();
        FisherFile { n: f.n(), triangles }
    }

    pub fn build(&self) -> Result<FisherTorus> {
        let h = HoneyTorus::new(self.n)?;
        let mut w: Vec<Option<TriangleWeights>> = vec![None; h.vertex_count()];
        for t in &self.triangles {
            if t.i >= self.n || t.j >= self.n {
                return Err(Error::InvalidInput(format!("triangle ({}, {}) outside the torus", t.i, t.j)));
            }
            let v = h.vertex_index(crate::lattice::Vertex { i: t.i, j: t.j, color: t.color });
            if w[v].replace(TriangleWeights::new(t.a, t.b, t.c, t.d)).is_some() {
                return Err(Error::InvalidInput(format!("triangle ({}, {}) listed twice", t.i, t.j)));
            }
        }
        let w = w
            .into_iter()
            .enumerate()
            .map(|(v, t)| t.ok_or_else(|| Error::InvalidInput(format!("triangle {v} missing"))))
            .collect::<Result<Vec<_>>>()?;
        FisherTorus::new(h, w)
    }
}
