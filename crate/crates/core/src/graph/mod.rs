//! Link-classified graphs, weighted adjacency assembly and box projection.

mod parse;
mod sparse;
pub mod synthetic;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

pub use parse::{parse_graph, parse_labels, parse_weights, serialize_graph, serialize_weights, ParseOptions};
pub use sparse::{CsrPattern, SparseMatrix};

use crate::error::{Error, Result};

/// Directed arc `(source, destination)`.
pub type Link = (usize, usize);

/// A graph whose candidate arcs are split into obligatory, prohibited and
/// facultative classes.
///
/// The order of `facultative` fixes the coordinate order of every
/// [`WeightVector`] used with this graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGraph {
    n: usize,
    obligatory: BTreeSet<Link>,
    prohibited: BTreeSet<Link>,
    facultative: Vec<Link>,
    targets: BTreeSet<usize>,
    labels: Option<Vec<String>>,
}

impl LinkGraph {
    /// Validates and builds a graph. Self links whose source is a controlled
    /// page (the source of some facultative arc) are rejected unless
    /// `allow_self_loops` is set.
    pub fn new(
        n: usize,
        obligatory: impl IntoIterator<Item = Link>,
        prohibited: impl IntoIterator<Item = Link>,
        facultative: impl IntoIterator<Item = Link>,
        targets: impl IntoIterator<Item = usize>,
        allow_self_loops: bool,
    ) -> Result<Self> {
        let check = |&(i, j): &Link| -> Result<()> {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            Ok(())
        };
        let obligatory: BTreeSet<Link> = obligatory.into_iter().collect();
        let prohibited: BTreeSet<Link> = prohibited.into_iter().collect();
        let mut facultative_seen = BTreeSet::new();
        let mut fac = Vec::new();
        for a in facultative {
            if facultative_seen.insert(a) {
                fac.push(a);
            }
        }
        for a in obligatory.iter().chain(&prohibited).chain(&fac) {
            check(a)?;
        }
        for a in &obligatory {
            if prohibited.contains(a) || facultative_seen.contains(a) {
                return Err(Error::ArcConflict(a.0, a.1));
            }
        }
        for a in &prohibited {
            if facultative_seen.contains(a) {
                return Err(Error::ArcConflict(a.0, a.1));
            }
        }
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        if let Some(&t) = targets.iter().find(|&&t| t >= n) {
            return Err(Error::IndexOutOfRange { index: t, n });
        }
        if !allow_self_loops {
            let controlled: BTreeSet<usize> = fac.iter().map(|a| a.0).collect();
            if let Some(a) = obligatory
                .iter()
                .chain(&fac)
                .find(|a| a.0 == a.1 && controlled.contains(&a.0))
            {
                return Err(Error::SelfLoop(a.0));
            }
        }
        Ok(Self {
            n,
            obligatory,
            prohibited,
            facultative: fac,
            targets,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn obligatory(&self) -> &BTreeSet<Link> {
        &self.obligatory
    }

    pub fn prohibited(&self) -> &BTreeSet<Link> {
        &self.prohibited
    }

    pub fn facultative(&self) -> &[Link] {
        &self.facultative
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Sources of facultative arcs, in increasing order.
    pub fn controlled_pages(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.facultative.iter().map(|a| a.0).collect();
        s.into_iter().collect()
    }

    /// Position of a facultative arc in the weight vector.
    pub fn facultative_index(&self) -> HashMap<Link, usize> {
        self.facultative.iter().enumerate().map(|(k, &a)| (a, k)).collect()
    }

    /// Precomputes the sparsity pattern shared by all `assemble` calls.
    pub fn assembler(&self) -> Assembler {
        let coords: Vec<Link> = self.obligatory.iter().chain(&self.facultative).copied().collect();
        // arcs were validated at construction
        let (pattern, slot) = CsrPattern::from_coords(self.n, &coords).expect("validated arcs");
        let mut base = vec![0.0; coords.len()];
        for &s in &slot[..self.obligatory.len()] {
            base[s] = 1.0;
        }
        Assembler {
            pattern: Arc::new(pattern),
            base,
            facultative_slots: slot[self.obligatory.len()..].to_vec(),
        }
    }
}

/// Fills facultative weights into a fixed sparsity pattern.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: Arc<CsrPattern>,
    base: Vec<f64>,
    facultative_slots: Vec<usize>,
}

impl Assembler {
    pub fn assemble(&self, x: &[f64]) -> SparseMatrix {
        assert_eq!(x.len(), self.facultative_slots.len(), "weight vector length");
        let mut values = self.base.clone();
        for (&s, &w) in self.facultative_slots.iter().zip(x) {
            values[s] = w;
        }
        SparseMatrix::new(self.pattern.clone(), values).expect("weights within the box")
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }
}

/// Weighted adjacency matrix: 1 on obligatory arcs, `x[k]` on the k-th
/// facultative arc. Zero-weight facultative arcs stay structural entries.
pub fn assemble(g: &LinkGraph, x: &WeightVector) -> SparseMatrix {
    g.assembler().assemble(x.as_slice())
}

/// Facultative weights, one per facultative arc, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Accepts `x` only if every entry already lies in the box.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!("weight {v} outside [0, 1]")));
        }
        Ok(Self(x))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        project_box(&vec![value; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Coordinatewise clamp onto `[0, 1]`. NaN maps to 0.
pub fn project_box(x: &[f64]) -> WeightVector {
    WeightVector(x.iter().map(|&v| if v >= 1.0 { 1.0 } else if v > 0.0 { v } else { 0.0 }).collect())
}
