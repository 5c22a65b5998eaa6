//! Assembly model: parts, joints, and the undirected part graph, plus
//! attribute normalization.
//!
//! The part graph is the input to every downstream stage. Parts and joints
//! are kept sorted by id so that two documents describing the same assembly
//! in different order produce identical in-memory graphs and identical
//! normalized attributes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Identifier of a part (node of the part graph).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartId(pub String);

/// Identifier of a joint (edge of the part graph).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointId(pub String);

impl PartId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl JointId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PartId {
    fn from(s: &str) -> Self {
        PartId(s.to_owned())
    }
}

impl From<&str> for JointId {
    fn from(s: &str) -> Self {
        JointId(s.to_owned())
    }
}

/// A component of the assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: PartId,
    pub name: String,
    pub mass_kg: f64,
    /// Handling complexity level; higher values indicate higher fragility.
    pub handling: i64,
}

/// A joining operation between two parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub id: JointId,
    pub part_a: PartId,
    pub part_b: PartId,
    /// Operation-time proxy, e.g. welding length in millimeters.
    pub time: f64,
    /// Tolerance strictness level; higher values are stricter.
    pub tolerance: i64,
    /// Joining technology label, e.g. "MAG".
    pub technology: String,
}

impl Joint {
    /// The endpoint of this joint that is not `part`, if `part` is an endpoint.
    pub fn other_part(&self, part: &PartId) -> Option<&PartId> {
        if &self.part_a == part {
            Some(&self.part_b)
        } else if &self.part_b == part {
            Some(&self.part_a)
        } else {
            None
        }
    }
}

/// Undirected graph of parts (nodes) and joints (edges).
///
/// Parts and joints are stored sorted by id; indices into those slices are
/// the canonical part/joint indices used by the digraph stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PartGraph {
    parts: Vec<Part>,
    joints: Vec<Joint>,
    part_index: BTreeMap<PartId, usize>,
    joint_index: BTreeMap<JointId, usize>,
}

/// On-disk schema of the assembly description document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyDoc {
    pub parts: Vec<Part>,
    pub joints: Vec<Joint>,
}

impl PartGraph {
    /// Build a graph from parts and joints, checking referential integrity.
    ///
    /// Value-range violations (non-positive times, negative masses, ...)
    /// are deliberately accepted here; [`validate_graph`] reports them as
    /// diagnostics. Connectivity is also not checked here so that
    /// diagnostics can be produced for disconnected graphs.
    pub fn new(mut parts: Vec<Part>, mut joints: Vec<Joint>) -> Result<Self, ModelError> {
        parts.sort_by(|a, b| a.id.cmp(&b.id));
        joints.sort_by(|a, b| a.id.cmp(&b.id));

        let mut part_index = BTreeMap::new();
        for (i, p) in parts.iter().enumerate() {
            if part_index.insert(p.id.clone(), i).is_some() {
                return Err(ModelError::DuplicatePartId(p.id.0.clone()));
            }
        }
        let mut joint_index = BTreeMap::new();
        for (i, j) in joints.iter().enumerate() {
            if joint_index.insert(j.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateJointId(j.id.0.clone()));
            }
            if j.part_a == j.part_b {
                return Err(ModelError::SelfJoint(j.id.0.clone()));
            }
            for p in [&j.part_a, &j.part_b] {
                if !part_index.contains_key(p) {
                    return Err(ModelError::DanglingPartRef {
                        joint: j.id.0.clone(),
                        part: p.0.clone(),
                    });
                }
            }
        }

        Ok(PartGraph {
            parts,
            joints,
            part_index,
            joint_index,
        })
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn part(&self, id: &PartId) -> Option<&Part> {
        self.part_index.get(id).map(|&i| &self.parts[i])
    }

    pub fn joint(&self, id: &JointId) -> Option<&Joint> {
        self.joint_index.get(id).map(|&i| &self.joints[i])
    }

    /// Canonical index of a part in `parts()`.
    pub fn part_idx(&self, id: &PartId) -> Option<usize> {
        self.part_index.get(id).copied()
    }

    /// Canonical index of a joint in `joints()`.
    pub fn joint_idx(&self, id: &JointId) -> Option<usize> {
        self.joint_index.get(id).copied()
    }

    /// Number of connected components when all joints are present.
    /// Isolated parts count as components.
    pub fn component_count(&self) -> usize {
        if self.parts.is_empty() {
            return 0;
        }
        let mut dsu = DisjointSet::new(self.parts.len());
        for j in &self.joints {
            dsu.union(self.part_index[&j.part_a], self.part_index[&j.part_b]);
        }
        dsu.component_count()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Serialize to the assembly description document format.
    pub fn to_document(&self) -> AssemblyDoc {
        AssemblyDoc {
            parts: self.parts.clone(),
            joints: self.joints.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("assembly doc serializes")
    }
}

/// Small union-find used for connectivity checks.
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    pub(crate) fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&i| self.find(i) == i).count()
    }
}

/// Parse an assembly description document and build a validated part graph.
///
/// Unlike [`PartGraph::new`], this also rejects disconnected graphs: a broken
/// input file is an error, while a programmatically assembled graph may be
/// inspected with [`validate_graph`] instead.
pub fn load_part_graph(document: &str) -> Result<PartGraph, ModelError> {
    let doc: AssemblyDoc =
        serde_json::from_str(document).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let graph = PartGraph::new(doc.parts, doc.joints)?;
    let components = graph.component_count();
    if components > 1 {
        return Err(ModelError::Disconnected { components });
    }
    Ok(graph)
}

/// One rule violation found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub subject: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    DisconnectedGraph,
    NonpositiveTime,
    InvalidTolerance,
    NegativeMass,
    InvalidHandling,
}

/// Check every part-graph invariant and return one diagnostic per violation.
/// An empty list means the graph is valid.
pub fn validate_graph(g: &PartGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let components = g.component_count();
    if components > 1 {
        out.push(Diagnostic {
            code: DiagnosticCode::DisconnectedGraph,
            subject: String::new(),
            detail: format!("graph has {components} connected components"),
        });
    }
    for p in g.parts() {
        if p.mass_kg < 0.0 || !p.mass_kg.is_finite() {
            out.push(Diagnostic {
                code: DiagnosticCode::NegativeMass,
                subject: p.id.0.clone(),
                detail: format!("mass {} kg", p.mass_kg),
            });
        }
        if p.handling < 1 {
            out.push(Diagnostic {
                code: DiagnosticCode::InvalidHandling,
                subject: p.id.0.clone(),
                detail: format!("handling level {}", p.handling),
            });
        }
    }
    for j in g.joints() {
        if j.time <= 0.0 || !j.time.is_finite() {
            out.push(Diagnostic {
                code: DiagnosticCode::NonpositiveTime,
                subject: j.id.0.clone(),
                detail: format!("time {}", j.time),
            });
        }
        if j.tolerance < 1 {
            out.push(Diagnostic {
                code: DiagnosticCode::InvalidTolerance,
                subject: j.id.0.clone(),
                detail: format!("tolerance {}", j.tolerance),
            });
        }
    }
    out
}

/// Min-max normalized attributes of an assembly, all values in [0, 1].
///
/// Technologies are mapped to equally spaced ordinal codes in [0, 1] by
/// lexicographic rank, which (combined with the per-layer division of the
/// edge weight) groups same-technology joints late in cheap layers. An
/// attribute that is constant across the assembly normalizes to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAttributes {
    tech: BTreeMap<JointId, f64>,
    tolerance: BTreeMap<JointId, f64>,
    time: BTreeMap<JointId, f64>,
    part_handling: BTreeMap<PartId, f64>,
    part_mass: BTreeMap<PartId, f64>,
    /// Per-joint fallback handling cost: the larger of the two endpoint
    /// parts' normalized handling. Used when both parts of a joint are new.
    joint_handling: BTreeMap<JointId, f64>,
}

impl NormalizedAttributes {
    pub fn tech(&self, j: &JointId) -> f64 {
        self.tech[j]
    }

    pub fn tolerance(&self, j: &JointId) -> f64 {
        self.tolerance[j]
    }

    pub fn time(&self, j: &JointId) -> f64 {
        self.time[j]
    }

    pub fn part_handling(&self, p: &PartId) -> f64 {
        self.part_handling[p]
    }

    pub fn part_mass(&self, p: &PartId) -> f64 {
        self.part_mass[p]
    }

    /// Fallback handling cost of a joint (max over its two parts).
    pub fn joint_handling(&self, j: &JointId) -> f64 {
        self.joint_handling[j]
    }

    /// Handling cost of executing `joint` when `inserted` is the part newly
    /// added to the subassembly. The moved part dominates fragility risk:
    /// with exactly one new part its handling is the cost; with both parts
    /// new (the first joint of a sequence) the larger value is used; with no
    /// new part (a cycle-closing joint) nothing is moved and the cost is 0.
    pub fn handling_for_insertion(&self, joint: &JointId, inserted: Insertion<'_>) -> f64 {
        match inserted {
            Insertion::One(p) => self.part_handling[p],
            Insertion::Both => self.joint_handling[joint],
            Insertion::None => 0.0,
        }
    }
}

/// Which endpoints of a joint are newly inserted by a digraph edge.
#[derive(Debug, Clone, Copy)]
pub enum Insertion<'a> {
    /// Exactly one endpoint is new.
    One(&'a PartId),
    /// Both endpoints are new (first joint on a path).
    Both,
    /// Neither endpoint is new (cycle-closing joint).
    None,
}

/// Min-max normalize a slice; a constant slice maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - lo) / span).collect()
}

/// Equally spaced ordinal codes in [0, 1] for categorical labels, ranked
/// lexicographically. A single distinct label maps to 0.
pub fn ordinal_codes<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, f64> {
    let distinct: BTreeSet<&str> = labels.into_iter().collect();
    let k = distinct.len();
    distinct
        .into_iter()
        .enumerate()
        .map(|(rank, label)| {
            let code = if k <= 1 {
                0.0
            } else {
                rank as f64 / (k - 1) as f64
            };
            (label.to_owned(), code)
        })
        .collect()
}

/// Min-max normalize every attribute of the assembly. Deterministic: the
/// result depends only on the set of parts and joints, not on input order.
pub fn normalize_attributes(g: &PartGraph) -> NormalizedAttributes {
    let tech_codes = ordinal_codes(g.joints().iter().map(|j| j.technology.as_str()));

    let tol_norm = min_max_normalize(
        &g.joints()
            .iter()
            .map(|j| j.tolerance as f64)
            .collect::<Vec<_>>(),
    );
    let time_norm = min_max_normalize(&g.joints().iter().map(|j| j.time).collect::<Vec<_>>());
    let hand_norm = min_max_normalize(
        &g.parts()
            .iter()
            .map(|p| p.handling as f64)
            .collect::<Vec<_>>(),
    );
    let mass_norm = min_max_normalize(&g.parts().iter().map(|p| p.mass_kg).collect::<Vec<_>>());

    let mut tech = BTreeMap::new();
    let mut tolerance = BTreeMap::new();
    let mut time = BTreeMap::new();
    for (i, j) in g.joints().iter().enumerate() {
        tech.insert(j.id.clone(), tech_codes[&j.technology]);
        tolerance.insert(j.id.clone(), tol_norm[i]);
        time.insert(j.id.clone(), time_norm[i]);
    }

    let mut part_handling = BTreeMap::new();
    let mut part_mass = BTreeMap::new();
    for (i, p) in g.parts().iter().enumerate() {
        part_handling.insert(p.id.clone(), hand_norm[i]);
        part_mass.insert(p.id.clone(), mass_norm[i]);
    }

    let joint_handling = g
        .joints()
        .iter()
        .map(|j| {
            let h = part_handling[&j.part_a].max(part_handling[&j.part_b]);
            (j.id.clone(), h)
        })
        .collect();

    NormalizedAttributes {
        tech,
        tolerance,
        time,
        part_handling,
        part_mass,
        joint_handling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn part(id: &str, mass: f64, handling: i64) -> Part {
        Part {
            id: id.into(),
            name: format!("part {id}"),
            mass_kg: mass,
            handling,
        }
    }

    pub(crate) fn joint(id: &str, a: &str, b: &str, time: f64, tol: i64, tech: &str) -> Joint {
        Joint {
            id: id.into(),
            part_a: a.into(),
            part_b: b.into(),
            time,
            tolerance: tol,
            technology: tech.to_owned(),
        }
    }

    fn triangle() -> PartGraph {
        PartGraph::new(
            vec![part("A", 1.0, 1), part("B", 2.0, 2), part("C", 3.0, 3)],
            vec![
                joint("jAB", "A", "B", 4.0, 1, "MAG"),
                joint("jBC", "B", "C", 5.0, 2, "MAG"),
                joint("jAC", "A", "C", 6.0, 3, "MAG2"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_loads_from_document() {
        let doc = triangle().to_json();
        let g = load_part_graph(&doc).unwrap();
        assert_eq!(g.parts().len(), 3);
        assert_eq!(g.joints().len(), 3);
    }

    #[test]
    fn assembly_one_shaped_fixture_loads() {
        // 14 parts, 13 joints, two technologies, star-shaped.
        let mut parts = vec![part("hub", 5.0, 1)];
        let mut joints = Vec::new();
        for i in 1..=13 {
            parts.push(part(&format!("p{i:02}"), i as f64, 1 + (i % 3)));
            let tech = if i <= 7 { "MAG" } else { "MAG2" };
            joints.push(joint(
                &format!("j{i:02}"),
                "hub",
                &format!("p{i:02}"),
                10.0 + i as f64,
                1 + (i % 5),
                tech,
            ));
        }
        let doc = serde_json::to_string(&AssemblyDoc { parts, joints }).unwrap();
        let g = load_part_graph(&doc).unwrap();
        assert_eq!(g.parts().len(), 14);
        assert_eq!(g.joints().len(), 13);
        assert!(validate_graph(&g).is_empty());
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let doc = serde_json::json!({
            "parts": [
                {"id": "A", "name": "a", "mass_kg": 1.0, "handling": 1},
                {"id": "B", "name": "b", "mass_kg": 1.0, "handling": 1}
            ],
            "joints": [
                {"id": "j1", "part_a": "A", "part_b": "X",
                 "time": 1.0, "tolerance": 1, "technology": "MAG"}
            ]
        });
        let err = load_part_graph(&doc.to_string()).unwrap_err();
        assert!(matches!(err, ModelError::DanglingPartRef { .. }), "{err}");
    }

    #[test]
    fn duplicate_and_malformed_are_distinct_errors() {
        let dup = AssemblyDoc {
            parts: vec![part("A", 1.0, 1), part("A", 2.0, 1), part("B", 1.0, 1)],
            joints: vec![joint("j", "A", "B", 1.0, 1, "MAG")],
        };
        let err = load_part_graph(&serde_json::to_string(&dup).unwrap()).unwrap_err();
        assert!(matches!(err, ModelError::DuplicatePartId(_)));

        let err = load_part_graph("{ not json").unwrap_err();
        assert!(matches!(err, ModelError::Malformed(_)));
    }

    #[test]
    fn disconnected_document_is_rejected_but_constructible() {
        let parts = vec![
            part("A", 1.0, 1),
            part("B", 1.0, 1),
            part("C", 1.0, 1),
            part("D", 1.0, 1),
        ];
        let joints = vec![
            joint("j1", "A", "B", 1.0, 1, "MAG"),
            joint("j2", "C", "D", 1.0, 1, "MAG"),
        ];
        let doc = serde_json::to_string(&AssemblyDoc {
            parts: parts.clone(),
            joints: joints.clone(),
        })
        .unwrap();
        assert!(matches!(
            load_part_graph(&doc),
            Err(ModelError::Disconnected { components: 2 })
        ));

        let g = PartGraph::new(parts, joints).unwrap();
        let diags = validate_graph(&g);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagnosticCode::DisconnectedGraph);
    }

    #[test]
    fn validate_reports_value_violations() {
        let g = PartGraph::new(
            vec![part("A", 1.0, 1), part("B", 1.0, 1)],
            vec![joint("j", "A", "B", 0.0, 0, "MAG")],
        )
        .unwrap();
        let codes: Vec<_> = validate_graph(&g).into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&DiagnosticCode::NonpositiveTime));
        assert!(codes.contains(&DiagnosticCode::InvalidTolerance));
        assert!(validate_graph(&triangle()).is_empty());
    }

    #[test]
    fn min_max_endpoints_and_constants() {
        assert_eq!(min_max_normalize(&[1.0, 10.0]), vec![0.0, 1.0]);
        assert_eq!(min_max_normalize(&[2.0, 2.0, 2.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn technology_codes_are_lexicographic() {
        let codes = ordinal_codes(["MAG2", "MAG"]);
        assert_eq!(codes["MAG"], 0.0);
        assert_eq!(codes["MAG2"], 1.0);
        let single = ordinal_codes(["TIG"]);
        assert_eq!(single["TIG"], 0.0);
    }

    #[test]
    fn normalization_is_idempotent() {
        let raw = [3.0, 9.0, 4.5, 7.25, 3.0];
        let once = min_max_normalize(&raw);
        let twice = min_max_normalize(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn input_order_does_not_matter() {
        let g1 = triangle();
        let g2 = PartGraph::new(
            vec![part("C", 3.0, 3), part("A", 1.0, 1), part("B", 2.0, 2)],
            vec![
                joint("jAC", "A", "C", 6.0, 3, "MAG2"),
                joint("jAB", "A", "B", 4.0, 1, "MAG"),
                joint("jBC", "B", "C", 5.0, 2, "MAG"),
            ],
        )
        .unwrap();
        assert_eq!(g1, g2);
        assert_eq!(normalize_attributes(&g1), normalize_attributes(&g2));
    }

    #[test]
    fn document_round_trip() {
        let g = triangle();
        let back = load_part_graph(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn handling_for_insertion_follows_the_moved_part() {
        let g = triangle();
        let norm = normalize_attributes(&g);
        let j: JointId = "jAB".into();
        let b: PartId = "B".into();
        assert_eq!(
            norm.handling_for_insertion(&j, Insertion::One(&b)),
            norm.part_handling(&b)
        );
        // first joint: larger of the two endpoints (A=0.0, B=0.5)
        assert_eq!(norm.handling_for_insertion(&j, Insertion::Both), 0.5);
        assert_eq!(norm.handling_for_insertion(&j, Insertion::None), 0.0);
    }
}
