//! Label forests and chain-rule propagation.
//!
//! A [`LabelTree`] is a forest: every label has at most one parent and
//! several labels may be roots. Models trained conditionally emit, for every
//! label `n`, an estimate of `P(n | every ancestor of n is positive)`.
//! [`LabelTree::propagate`] turns those conditionals into unconditional
//! probabilities by multiplying along the root path, e.g. for the chain
//! `A -> B -> C`, `p(C) = p(A) * p(B|A) * p(C|B)`.
//!
//! # Hierarchy file format
//!
//! UTF-8 CSV with the header `name,parent,index`, one record per label:
//!
//! ```text
//! name,parent,index
//! Lung Opacity,,3
//! Edema,Lung Opacity,5
//! ```
//!
//! Lines starting with `#` are comments. `parent` is empty for roots. `index` is the label's position in the
//! K-dimensional output vector; it may be left empty on every row, in which
//! case labels are numbered in file order. Mixing explicit and empty indices
//! is rejected.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Default 14-observation hierarchy in CheXpert column order.
pub const CHEXPERT_HIERARCHY: &str = include_str!("../configs/chexpert14_hierarchy.csv");

/// One record of a hierarchy description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub id: String,
    pub parent: Option<String>,
    pub index: Option<usize>,
}

impl NodeSpec {
    pub fn root(id: &str) -> Self {
        NodeSpec {
            id: id.to_string(),
            parent: None,
            index: None,
        }
    }

    pub fn child(id: &str, parent: &str) -> Self {
        NodeSpec {
            id: id.to_string(),
            parent: Some(parent.to_string()),
            index: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelNode {
    pub id: String,
    pub index: usize,
    pub parent: Option<String>,
}

/// Immutable label forest. Nodes are stored in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTree {
    nodes: Vec<LabelNode>,
    parent_index: Vec<Option<usize>>,
    // root first, parent last
    ancestor_index: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    by_id: HashMap<String, usize>,
}

impl LabelTree {
    /// Validates a hierarchy description and materializes the forest.
    pub fn build(specs: &[NodeSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Hierarchy("no labels".into()));
        }
        let explicit = specs.iter().filter(|s| s.index.is_some()).count();
        if explicit != 0 && explicit != specs.len() {
            return Err(Error::Hierarchy(
                "either every label has an index or none does".into(),
            ));
        }

        let k = specs.len();
        let mut slots: Vec<Option<&NodeSpec>> = vec![None; k];
        for (pos, spec) in specs.iter().enumerate() {
            if spec.id.is_empty() {
                return Err(Error::Hierarchy(format!("label at row {pos} has an empty name")));
            }
            let idx = spec.index.unwrap_or(pos);
            if idx >= k {
                return Err(Error::Hierarchy(format!(
                    "indices are not dense: `{}` has index {idx} but there are {k} labels",
                    spec.id
                )));
            }
            if let Some(other) = slots[idx] {
                return Err(Error::Hierarchy(format!(
                    "indices are not dense: `{}` and `{}` share index {idx}",
                    other.id, spec.id
                )));
            }
            slots[idx] = Some(spec);
        }
        let ordered: Vec<&NodeSpec> = slots.into_iter().map(|s| s.expect("dense")).collect();

        let mut by_id = HashMap::with_capacity(k);
        for (i, spec) in ordered.iter().enumerate() {
            if by_id.insert(spec.id.clone(), i).is_some() {
                return Err(Error::Hierarchy(format!("duplicate label `{}`", spec.id)));
            }
        }

        let mut parent_index = Vec::with_capacity(k);
        for spec in &ordered {
            let p = match &spec.parent {
                None => None,
                Some(p) => Some(*by_id.get(p).ok_or_else(|| {
                    Error::Hierarchy(format!("label `{}` names unknown parent `{p}`", spec.id))
                })?),
            };
            parent_index.push(p);
        }

        let mut ancestor_index = Vec::with_capacity(k);
        for start in 0..k {
            let mut path = Vec::new();
            let mut cur = parent_index[start];
            while let Some(p) = cur {
                if p == start || path.len() >= k {
                    return Err(Error::Hierarchy(format!(
                        "cycle through label `{}`",
                        ordered[start].id
                    )));
                }
                path.push(p);
                cur = parent_index[p];
            }
            path.reverse();
            ancestor_index.push(path);
        }

        let mut children = vec![Vec::new(); k];
        for (i, p) in parent_index.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }

        let nodes = ordered
            .iter()
            .enumerate()
            .map(|(index, s)| LabelNode {
                id: s.id.clone(),
                index,
                parent: s.parent.clone(),
            })
            .collect();

        Ok(LabelTree {
            nodes,
            parent_index,
            ancestor_index,
            children,
            by_id,
        })
    }

    /// A forest of `ids.len()` independent roots.
    pub fn flat<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        let specs: Vec<_> = ids.iter().map(|s| NodeSpec::root(s.as_ref())).collect();
        Self::build(&specs)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Hierarchy(e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Hierarchy(format!("missing `{name}` column")))
        };
        let (name_col, parent_col, index_col) = (col("name")?, col("parent")?, col("index")?);

        let mut specs = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Hierarchy(e.to_string()))?;
            let field = |c: usize| record.get(c).unwrap_or("");
            let parent = field(parent_col);
            let index = field(index_col);
            specs.push(NodeSpec {
                id: field(name_col).to_string(),
                parent: (!parent.is_empty()).then(|| parent.to_string()),
                index: if index.is_empty() {
                    None
                } else {
                    Some(index.parse().map_err(|_| {
                        Error::Hierarchy(format!("row {}: bad index `{index}`", row + 1))
                    })?)
                },
            });
        }
        Self::build(&specs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The shipped 14-label hierarchy.
    pub fn chexpert() -> Self {
        Self::parse(CHEXPERT_HIERARCHY).expect("shipped hierarchy is valid")
    }

    /// Serializes to the hierarchy file format with explicit indices.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "parent", "index"]).expect("in-memory");
        for n in &self.nodes {
            let index = n.index.to_string();
            w.write_record([n.id.as_str(), n.parent.as_deref().unwrap_or(""), &index])
                .expect("in-memory");
        }
        String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[LabelNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn id(&self, index: usize) -> &str {
        &self.nodes[index].id
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parent_index[index]
    }

    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.parent_index[i].is_none())
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.children[i].is_empty())
    }

    pub fn is_flat(&self) -> bool {
        self.parent_index.iter().all(Option::is_none)
    }

    /// Ancestor indices, root first and parent last.
    pub fn ancestor_indices(&self, index: usize) -> &[usize] {
        &self.ancestor_index[index]
    }

    /// Ancestor ids of `id`, root first and parent last.
    pub fn ancestors(&self, id: &str) -> Result<Vec<&str>> {
        let i = self.index_of(id)?;
        Ok(self.ancestor_index[i]
            .iter()
            .map(|&a| self.nodes[a].id.as_str())
            .collect())
    }

    /// Converts conditionals `P(n | ancestors positive)` into unconditional
    /// probabilities by multiplying along each root path.
    pub fn propagate(&self, cond: &[f64]) -> Result<Vec<f64>> {
        if cond.len() != self.len() {
            return Err(Error::Shape(format!(
                "expected {} conditionals, got {}",
                self.len(),
                cond.len()
            )));
        }
        if let Some((i, p)) = cond
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::Range(format!(
                "conditional for `{}` is {p}, outside [0, 1]",
                self.nodes[i].id
            )));
        }
        let mut out = vec![0.0; self.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            // left fold in root->leaf order so every node reuses the exact
            // product its parent produced
            *slot = self.ancestor_index[i]
                .iter()
                .fold(1.0, |acc, &a| acc * cond[a])
                * cond[i];
        }
        Ok(out)
    }
}
