//! Digraph persistence: a JSON document mirroring the in-memory model, and
//! DOT text for visualization.

use serde::{Deserialize, Serialize};

use super::{CutsetDigraph, RawEdge};
use crate::error::DigraphError;
use crate::model::JointId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigraphDoc {
    pub joints: Vec<String>,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub layer: u32,
    pub joints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub source: usize,
    pub target: usize,
    pub op: String,
    pub layer: u32,
    pub weight: f64,
}

impl CutsetDigraph {
    pub fn to_doc(&self) -> DigraphDoc {
        DigraphDoc {
            joints: self.joint_ids().iter().map(|j| j.0.clone()).collect(),
            nodes: self
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, n)| NodeDoc {
                    layer: n.layer,
                    joints: self
                        .node_joints(i as u32)
                        .into_iter()
                        .map(|j| j.0)
                        .collect(),
                })
                .collect(),
            edges: self
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    source: e.source as usize,
                    target: e.target as usize,
                    op: self.op_id(e).0.clone(),
                    layer: e.layer,
                    weight: e.weight,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &DigraphDoc) -> Result<Self, DigraphError> {
        let joint_ids: Vec<JointId> = doc.joints.iter().map(|j| JointId(j.clone())).collect();
        if joint_ids.is_empty() {
            return Err(DigraphError::MalformedDocument("no joints".into()));
        }
        let bit_of = |id: &str| -> Result<u16, DigraphError> {
            joint_ids
                .iter()
                .position(|j| j.0 == id)
                .map(|i| i as u16)
                .ok_or_else(|| DigraphError::UnknownJoint(id.to_owned()))
        };
        let mut node_masks = Vec::with_capacity(doc.nodes.len());
        for n in &doc.nodes {
            let mut mask = 0u64;
            for j in &n.joints {
                mask |= 1u64 << bit_of(j)?;
            }
            if mask.count_ones() != n.layer {
                return Err(DigraphError::MalformedDocument(format!(
                    "node layer {} does not match its {}-joint set",
                    n.layer,
                    mask.count_ones()
                )));
            }
            node_masks.push(mask);
        }
        let mut raw = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let source_mask = *node_masks.get(e.source).ok_or_else(|| {
                DigraphError::MalformedDocument(format!("edge source {} out of range", e.source))
            })?;
            let target_mask = *node_masks.get(e.target).ok_or_else(|| {
                DigraphError::MalformedDocument(format!("edge target {} out of range", e.target))
            })?;
            let op = bit_of(&e.op)?;
            if source_mask | (1u64 << op) != target_mask {
                return Err(DigraphError::MalformedDocument(format!(
                    "edge {} -> {} does not add exactly `{}`",
                    e.source, e.target, e.op
                )));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(DigraphError::MalformedDocument(format!(
                    "edge weight {} out of range",
                    e.weight
                )));
            }
            raw.push(RawEdge {
                source_mask,
                op,
                weight: e.weight,
            });
        }
        CutsetDigraph::assemble(joint_ids, &raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("digraph doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DigraphError> {
        let doc: DigraphDoc = serde_json::from_str(text)
            .map_err(|e| DigraphError::MalformedDocument(e.to_string()))?;
        CutsetDigraph::from_doc(&doc)
    }
}

/// DOT rendering: node labels are the sorted joint-id sets, edge labels the
/// operation id and weight with six decimals.
pub fn digraph_dot(d: &CutsetDigraph) -> String {
    let mut out = String::from("digraph cutsets {\n  rankdir=LR;\n");
    for (i, _) in d.nodes().iter().enumerate() {
        let joints: Vec<String> = d.node_joints(i as u32).into_iter().map(|j| j.0).collect();
        out.push_str(&format!("  n{i} [label=\"{{{}}}\"];\n", joints.join(",")));
    }
    for e in d.edges() {
        out.push_str(&format!(
            "  n{} -> n{} [label=\"{} {:.6}\"];\n",
            e.source,
            e.target,
            d.op_id(e),
            e.weight
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::generate::tests::triangle;
    use super::super::{generate_digraph, GenerateOptions, WeightConfig};
    use super::*;
    use crate::model::normalize_attributes;

    fn sample() -> CutsetDigraph {
        let g = triangle();
        let norm = normalize_attributes(&g);
        generate_digraph(
            &g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let d = sample();
        let json = d.to_json();
        let back = CutsetDigraph::from_json(&json).unwrap();
        assert_eq!(d, back);
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn corrupted_documents_are_rejected() {
        let d = sample();
        let mut doc = d.to_doc();
        doc.edges[0].weight = -1.0;
        assert!(matches!(
            CutsetDigraph::from_doc(&doc),
            Err(DigraphError::MalformedDocument(_))
        ));

        let mut doc = d.to_doc();
        doc.edges[0].op = "j2".into(); // no longer source ∪ {op} = target
        assert!(CutsetDigraph::from_doc(&doc).is_err());
    }

    #[test]
    fn dot_contains_every_node_and_edge() {
        let d = sample();
        let dot = digraph_dot(&d);
        assert_eq!(dot.matches(" -> ").count(), d.edges().len());
        assert!(dot.contains("label=\"{}\""), "start node renders empty set");
        assert!(dot.contains("label=\"{j1,j2,j3}\""));
        assert!(dot.contains("0.")); // six-decimal weights
    }
}
