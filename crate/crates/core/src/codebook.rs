//! Quantization codebooks of unit vectors: random isotropic sets and
//! approximate Grassmannian line packings.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_unit_vector, Complex64, ComplexVector, Rng};

const UNIT_NORM_TOL: f64 = 1e-10;

pub const DEFAULT_GRASSMANNIAN_ITERATIONS: usize = 500;
const INITIAL_STEP: f64 = 0.05;
const STEP_DECAY: f64 = 0.99;
/// Exponent of the pairwise coherence potential; large values focus the
/// repulsion on the closest pairs.
const REPULSION_POWER: i32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookKind {
    Random,
    Grassmannian,
    /// Explicitly supplied codewords.
    Custom,
}

impl CodebookKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Random => "random",
            CodebookKind::Grassmannian => "grassmannian",
            CodebookKind::Custom => "custom",
        }
    }
}

impl FromStr for CodebookKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(CodebookKind::Random),
            "grassmannian" => Ok(CodebookKind::Grassmannian),
            "custom" => Ok(CodebookKind::Custom),
            other => Err(Error::config(format!("unknown codebook kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for CodebookKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-empty set of unit-norm codewords of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    dimension: usize,
    codewords: Vec<ComplexVector>,
    kind: CodebookKind,
}

impl Codebook {
    pub fn new(kind: CodebookKind, codewords: Vec<ComplexVector>) -> Result<Self> {
        let Some(first) = codewords.first() else {
            return Err(Error::config("a codebook needs at least one codeword"));
        };
        let dimension = first.len();
        if dimension == 0 {
            return Err(Error::config("codewords must have dimension at least 1"));
        }
        for (idx, c) in codewords.iter().enumerate() {
            if c.len() != dimension {
                return Err(Error::Shape(format!(
                    "codeword {idx} has length {} in a dimension-{dimension} codebook",
                    c.len()
                )));
            }
            if !c.is_finite() || (c.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::config(format!("codeword {idx} is not unit-norm")));
            }
        }
        Ok(Codebook {
            dimension,
            codewords,
            kind,
        })
    }

    /// `{e_1, …, e_dim}`.
    pub fn standard_basis(dim: usize) -> Self {
        let codewords = (0..dim).map(|i| ComplexVector::basis(dim, i)).collect();
        Codebook::new(CodebookKind::Custom, codewords).expect("basis vectors are unit-norm")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn codewords(&self) -> &[ComplexVector] {
        &self.codewords
    }

    pub fn codeword(&self, index: usize) -> &ComplexVector {
        &self.codewords[index]
    }

    /// `n_f = ⌈log₂ N_f⌉`.
    pub fn feedback_bits(&self) -> u32 {
        feedback_bits(self.size())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.dimension, self.size(), self.kind);
        for c in &self.codewords {
            let mut first = true;
            for z in c.iter() {
                for part in [z.re, z.im] {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    write!(out, "{part:.16e}").expect("writing to a string");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header `dim size kind`".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: header_line,
                message: format!("header must be `dim size kind`, got `{header}`"),
            });
        }
        let parse_count = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: header_line,
                message: format!("invalid {what} `{s}`"),
            })
        };
        let dim = parse_count(fields[0], "dimension")?;
        let size = parse_count(fields[1], "size")?;
        let kind: CodebookKind = fields[2].parse().map_err(|_| Error::Parse {
            line: header_line,
            message: format!("unknown codebook kind `{}`", fields[2]),
        })?;
        if dim == 0 || size == 0 {
            return Err(Error::config(format!(
                "codebook header declares dim={dim}, size={size}; both must be at least 1"
            )));
        }

        let mut codewords = Vec::with_capacity(size);
        for row in 0..size {
            let (line, content) = lines.next().ok_or_else(|| Error::Parse {
                line: header_line + row + 1,
                message: format!("missing codeword row {} of {size}", row + 1),
            })?;
            let values: Vec<f64> = content
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid number `{t}`"),
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != 2 * dim {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} values, got {}", 2 * dim, values.len()),
                });
            }
            codewords.push(
                values
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect::<ComplexVector>(),
            );
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                message: format!("more than the declared {size} codewords"),
            });
        }
        Codebook::new(kind, codewords)
    }
}

pub fn feedback_bits(size: usize) -> u32 {
    if size <= 1 {
        0
    } else {
        usize::BITS - (size - 1).leading_zeros()
    }
}

/// Codewords drawn i.i.d. uniformly on the unit sphere of `C^dim`.
pub fn random_codebook(rng: &mut Rng, dim: usize, size: usize) -> Codebook {
    assert!(dim >= 1 && size >= 1, "codebook needs dim >= 1 and size >= 1");
    let codewords = (0..size).map(|_| sample_unit_vector(rng, dim)).collect();
    Codebook::new(CodebookKind::Random, codewords).expect("sampled codewords are unit-norm")
}

/// Pairwise packing statistics in normalized chordal units
/// `(1 - |c_a^H c_b|²) / 2`, which lie in `[0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingQuality {
    pub min_pairwise_chordal_sq: f64,
    /// `min{1/2, (S-1)N_f / (2S(N_f-1))}`.
    pub bound_rankin: f64,
    /// Sphere-packing bound `2 N_f^{-1/(S-1)}`; zero for `S = 1`.
    pub bound_hamming: f64,
    /// Variance of all pairwise normalized chordal distances.
    pub pairwise_variance: f64,
}

impl PackingQuality {
    pub fn bound(&self) -> f64 {
        self.bound_rankin.min(self.bound_hamming)
    }
}

fn pairwise_distances(codewords: &[ComplexVector]) -> Vec<f64> {
    let n = codewords.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let coherence = codewords[a].dot(&codewords[b]).norm_sqr().min(1.0);
            out.push((1.0 - coherence) / 2.0);
        }
    }
    out
}

fn min_and_variance(distances: &[f64]) -> (f64, f64) {
    if distances.is_empty() {
        return (0.0, 0.0);
    }
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    (min, var)
}

pub fn packing_quality(cb: &Codebook) -> PackingQuality {
    let s = cb.dimension() as f64;
    let n = cb.size() as f64;
    let (min, variance) = min_and_variance(&pairwise_distances(cb.codewords()));
    let bound_rankin = if cb.size() < 2 {
        0.5
    } else {
        0.5f64.min((s - 1.0) * n / (2.0 * s * (n - 1.0)))
    };
    let bound_hamming = if cb.dimension() == 1 {
        0.0
    } else {
        2.0 * n.powf(-1.0 / (s - 1.0))
    };
    PackingQuality {
        min_pairwise_chordal_sq: if cb.size() < 2 { 0.5 } else { min },
        bound_rankin,
        bound_hamming,
        pairwise_variance: variance,
    }
}

/// Approximate Grassmannian packing by gradient repulsion on the sphere.
/// Equivalent to [`grassmannian_trace`] without the per-iteration history.
pub fn grassmannian_codebook(rng: &mut Rng, dim: usize, size: usize, iterations: usize) -> (Codebook, PackingQuality) {
    let (cb, _) = grassmannian_trace(rng, dim, size, iterations);
    let q = packing_quality(&cb);
    (cb, q)
}

/// Runs the refinement and records `(min distance, variance)` after every
/// iteration, starting with the random initial point.
///
/// A candidate step is kept only when it does not lower the minimum pairwise
/// distance and does not raise the variance of pairwise distances, so both
/// recorded sequences are monotone.
pub fn grassmannian_trace(rng: &mut Rng, dim: usize, size: usize, iterations: usize) -> (Codebook, Vec<(f64, f64)>) {
    assert!(size >= 2, "a packing needs at least two codewords");
    let mut current = random_codebook(rng, dim, size).codewords;
    let mut stats = min_and_variance(&pairwise_distances(&current));
    let mut history = Vec::with_capacity(iterations + 1);
    history.push(stats);
    let mut step = INITIAL_STEP;

    for _ in 0..iterations {
        let candidate = repulsion_step(&current, step);
        let next = min_and_variance(&pairwise_distances(&candidate));
        if next.0 >= stats.0 && next.1 <= stats.1 {
            current = candidate;
            stats = next;
        }
        history.push(stats);
        step *= STEP_DECAY;
    }
    let cb = Codebook::new(CodebookKind::Grassmannian, current).expect("renormalized codewords");
    (cb, history)
}

/// One descent step on `Σ_{a≠b} |c_a^H c_b|^{2p}` followed by renormalization.
fn repulsion_step(codewords: &[ComplexVector], step: f64) -> Vec<ComplexVector> {
    let max_coherence = pairwise_distances(codewords)
        .iter()
        .map(|d| 1.0 - 2.0 * d)
        .fold(f64::MIN_POSITIVE, f64::max);
    codewords
        .iter()
        .enumerate()
        .map(|(a, ca)| {
            let mut next = ca.clone();
            for (b, cb) in codewords.iter().enumerate() {
                if a == b {
                    continue;
                }
                let inner = cb.dot(ca);
                let weight = (inner.norm_sqr() / max_coherence).powi(REPULSION_POWER - 1);
                next.sub_scaled(inner * (step * weight), cb);
            }
            next.normalized().unwrap_or_else(|| ca.clone())
        })
        .collect()
}

pub fn save_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, cb.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Codebook::from_text(&text)
}
