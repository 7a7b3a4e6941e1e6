//! JSON file formats for channels, graphs, compositions, distances, codes
//! and candidate bundles, plus JSON encodings of certificates.
//!
//! Complex entries are written as `[re, im]`; plain numbers are accepted as
//! real entries. Infinite distances and values are the string `"inf"`.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::channel::{
    from_classical, CQChannel, Code, Composition, ConditionalComposition, ConfusabilityGraph,
};
use crate::composite::{Candidate, ChannelFamily, DistanceFn};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityOperator, C64};
use crate::theta::{Certificate, Handle, HandleObjective};

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> C64 {
        match *self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Extended {
    Finite(f64),
    Token(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatesFile {
    dim: Option<usize>,
    states: Vec<Vec<Vec<Entry>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalFile {
    classical: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PureFile {
    pure: Vec<Vec<Entry>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ChannelFile {
    States(StatesFile),
    Classical(ClassicalFile),
    Pure(PureFile),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    #[serde(default)]
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompositionFile {
    p: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceFile {
    n: usize,
    d: Vec<Vec<Extended>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeFile {
    n: usize,
    words: Vec<Vec<usize>>,
    alphabet_size: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    channels: Vec<ChannelFile>,
    v: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    rho: f64,
    phat: Vec<f64>,
    v: Vec<Vec<f64>>,
    aux_channels: Vec<ChannelFile>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn build_channel(file: ChannelFile) -> Result<CQChannel> {
    match file {
        ChannelFile::Classical(c) => from_classical(&c.classical),
        ChannelFile::Pure(p) => {
            let vectors: Vec<Vec<C64>> = p
                .pure
                .iter()
                .map(|v| v.iter().map(Entry::value).collect())
                .collect();
            crate::channel::pure_state_channel(&vectors)
        }
        ChannelFile::States(s) => {
            let states = s
                .states
                .iter()
                .enumerate()
                .map(|(x, rows)| {
                    let d = s.dim.unwrap_or(rows.len());
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(Error::Parse(format!("state {x} is not a {d}×{d} matrix")));
                    }
                    DensityOperator::new(ComplexMatrix::from_fn(d, d, |i, j| rows[i][j].value()))
                })
                .collect::<Result<Vec<_>>>()?;
            CQChannel::new(states)
        }
    }
}

pub fn parse_channel(text: &str) -> Result<CQChannel> {
    build_channel(from_json(text, "channel file")?)
}

pub fn parse_graph(text: &str) -> Result<ConfusabilityGraph> {
    let g: GraphFile = from_json(text, "graph file")?;
    ConfusabilityGraph::from_edges(g.n, &g.edges)
}

pub fn parse_composition(text: &str) -> Result<Composition> {
    Composition::new(from_json::<CompositionFile>(text, "composition file")?.p)
}

fn extended(v: &Extended) -> Result<f64> {
    match v {
        Extended::Finite(x) => Ok(*x),
        Extended::Token(t) if t == "inf" => Ok(f64::INFINITY),
        Extended::Token(t) => Err(Error::Parse(format!(
            "unexpected token {t:?}, expected a number or \"inf\""
        ))),
    }
}

pub fn parse_distance(text: &str) -> Result<DistanceFn> {
    let f: DistanceFile = from_json(text, "distance file")?;
    if f.d.len() != f.n {
        return Err(Error::Parse(format!(
            "distance matrix has {} rows, expected {}",
            f.d.len(),
            f.n
        )));
    }
    let d =
        f.d.iter()
            .map(|row| row.iter().map(extended).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
    DistanceFn::new(d)
}

/// The alphabet defaults to one more than the largest symbol used.
pub fn parse_code(text: &str) -> Result<Code> {
    let f: CodeFile = from_json(text, "code file")?;
    if let Some((m, w)) = f.words.iter().enumerate().find(|(_, w)| w.len() != f.n) {
        return Err(Error::Parse(format!(
            "codeword {m} has length {}, expected {}",
            w.len(),
            f.n
        )));
    }
    let q = f
        .alphabet_size
        .unwrap_or_else(|| f.words.iter().flatten().max().map_or(1, |&s| s + 1));
    Code::new(q, f.words)
}

/// `{"channels": [channel, …], "v": [[V(x|a)…]…]}`: one channel and one
/// row of `V` per state `a`.
pub fn parse_family(text: &str) -> Result<(ChannelFamily, ConditionalComposition)> {
    let f: FamilyFile = from_json(text, "family file")?;
    let channels = f
        .channels
        .into_iter()
        .map(build_channel)
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ChannelFamily::new(channels)?,
        ConditionalComposition::from_rows(f.v)?,
    ))
}

pub fn parse_candidates(text: &str) -> Result<Vec<Candidate>> {
    let files: Vec<CandidateFile> = from_json(text, "candidate bundle")?;
    files
        .into_iter()
        .map(|c| {
            let aux = c
                .aux_channels
                .into_iter()
                .map(build_channel)
                .collect::<Result<Vec<_>>>()?;
            Ok(Candidate {
                rho: c.rho,
                phat: Composition::new(c.phat)?,
                v: ConditionalComposition::from_rows(c.v)?,
                aux: ChannelFamily::new(aux)?,
            })
        })
        .collect()
}

/// Finite numbers as JSON numbers, `±∞` as `"inf"` / `"-inf"`.
pub fn number(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

pub fn complex_vector(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn complex_matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn certificate_json(obj: &HandleObjective) -> Value {
    let handle = match &obj.handle {
        Handle::Vector(f) => json!({ "vector": complex_vector(f) }),
        Handle::State(f) => json!({ "state": complex_matrix(f.matrix()) }),
    };
    let representation = match &obj.certificate {
        Certificate::Vectors(r) => {
            json!({ "vectors": r.vectors().iter().map(|v| complex_vector(v)).collect::<Vec<_>>() })
        }
        Certificate::Projectors(r) => {
            json!({ "projectors": r.projectors().iter().map(|u| complex_matrix(u.matrix())).collect::<Vec<_>>() })
        }
    };
    json!({
        "value": number(obj.value),
        "per_vertex": obj.per_vertex.iter().map(|&v| number(v)).collect::<Vec<_>>(),
        "handle": handle,
        "representation": representation,
    })
}
