//! JSON netlist:
//!
//! ```json
//! {
//!   "format": 1,
//!   "nu": 1,
//!   "vertices": [{"id": 1, "boundary": true}, {"id": 2}, {"id": 3, "boundary": true}],
//!   "edges": [
//!     {"tail": 1, "head": 2, "element": {"kind": "rl", "values": [1.0, 0.5]}},
//!     {"tail": 2, "head": 3, "p": [2.0, 1.0], "q": [1.0, 0.0]}
//!   ]
//! }
//! ```
//!
//! Vertex ids are `1..=n` in any order. Element values follow
//! [`ElementKind::value_names`].

use serde::{Deserialize, Serialize};

use super::{check_format, IoError, FORMAT_VERSION};
use crate::graph::{DirectedGraph, VertexPartition};
use crate::network::{CoefficientVector, Element, ElementKind, GeneralizedNetwork};
use crate::reduction::ReducedNetwork;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistDocument {
    pub format: u32,
    pub nu: usize,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: usize,
    #[serde(default)]
    pub boundary: bool,
    /// Vertex id in the network this one was reduced from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub tail: usize,
    pub head: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    pub kind: String,
    pub values: Vec<f64>,
}

impl NetlistDocument {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(IoError::from_json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes") + "\n"
    }

    /// Builds the network without validating it.
    pub fn to_network<T: Scalar>(&self) -> Result<GeneralizedNetwork<T>, IoError> {
        check_format(self.format)?;
        let n = self.vertices.len();
        if n == 0 {
            return Err(IoError::Schema("no vertices".into()));
        }
        let mut seen = vec![false; n + 1];
        for v in &self.vertices {
            if v.id == 0 || v.id > n {
                return Err(IoError::Schema(format!(
                    "vertex id {} outside 1..={n}",
                    v.id
                )));
            }
            if std::mem::replace(&mut seen[v.id], true) {
                return Err(IoError::Schema(format!("vertex id {} repeated", v.id)));
            }
        }
        let boundary = self.vertices.iter().filter(|v| v.boundary).map(|v| v.id);
        let partition = VertexPartition::from_boundary(n, boundary)
            .map_err(|e| IoError::Schema(e.to_string()))?;

        let mut endpoints = Vec::with_capacity(self.edges.len());
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for (k, e) in self.edges.iter().enumerate() {
            let edge = k + 1;
            for (name, v) in [("tail", e.tail), ("head", e.head)] {
                if v == 0 || v > n {
                    return Err(IoError::Schema(format!(
                        "edge {edge}: {name} {v} is not a vertex"
                    )));
                }
            }
            endpoints.push((e.tail, e.head));
            let (pk, qk) = self.coefficients::<T>(edge, e)?;
            p.push(pk);
            q.push(qk);
        }
        let graph = DirectedGraph::new(n, endpoints).map_err(|e| IoError::Schema(e.to_string()))?;
        Ok(GeneralizedNetwork::new(graph, partition, self.nu, p, q))
    }

    fn coefficients<T: Scalar>(
        &self,
        edge: usize,
        e: &EdgeEntry,
    ) -> Result<(CoefficientVector<T>, CoefficientVector<T>), IoError> {
        let len = self.nu + 1;
        let cast = |x: &[f64]| CoefficientVector::new(x.iter().map(|&v| T::lit(v)).collect());
        match (&e.p, &e.q, &e.element) {
            (Some(p), Some(q), None) => {
                for (name, v) in [("p", p), ("q", q)] {
                    if v.len() != len {
                        return Err(IoError::Schema(format!(
                            "edge {edge}: {name} has {} entries, expected nu + 1 = {len}",
                            v.len()
                        )));
                    }
                }
                Ok((cast(p), cast(q)))
            }
            (None, None, Some(el)) => {
                let kind: ElementKind = el
                    .kind
                    .parse()
                    .map_err(|source| IoError::Element { edge, source })?;
                let values: Vec<T> = el.values.iter().map(|&v| T::lit(v)).collect();
                Element::from_values(kind, &values)
                    .and_then(|x| x.coefficients(self.nu))
                    .map_err(|source| IoError::Element { edge, source })
            }
            (None, None, None) => Err(IoError::Schema(format!(
                "edge {edge}: needs either `p` and `q` or `element`"
            ))),
            (_, _, Some(_)) => Err(IoError::Schema(format!(
                "edge {edge}: `element` cannot be combined with `p`/`q`"
            ))),
            _ => Err(IoError::Schema(format!(
                "edge {edge}: `p` and `q` must both be given"
            ))),
        }
    }

    /// Explicit `p`/`q` arrays for every edge.
    pub fn from_network<T: Scalar>(net: &GeneralizedNetwork<T>) -> Self {
        let part = net.partition();
        let vec = |c: &CoefficientVector<T>| c.as_slice().iter().map(|x| x.as_f64()).collect();
        Self {
            format: FORMAT_VERSION,
            nu: net.nu(),
            vertices: (1..=part.vertex_count())
                .map(|id| VertexEntry {
                    id,
                    boundary: part.is_boundary(id),
                    source: None,
                })
                .collect(),
            edges: net
                .graph()
                .edges()
                .iter()
                .enumerate()
                .map(|(k, e)| EdgeEntry {
                    tail: e.tail,
                    head: e.head,
                    p: Some(vec(&net.p()[k])),
                    q: Some(vec(&net.q()[k])),
                    element: None,
                })
                .collect(),
        }
    }

    /// Reduced network with each vertex tagged by its source id.
    pub fn from_reduced<T: Scalar>(red: &ReducedNetwork<T>) -> Self {
        let mut doc = Self::from_network(red.network());
        for (v, &src) in doc.vertices.iter_mut().zip(red.boundary_ids()) {
            v.source = Some(src);
        }
        doc
    }
}

/// Parses and validates a netlist.
pub fn parse_netlist<T: Scalar>(text: &str) -> Result<GeneralizedNetwork<T>, IoError> {
    let net = NetlistDocument::from_json(text)?.to_network()?;
    let report = net.validate();
    if report.is_valid() {
        Ok(net)
    } else {
        Err(IoError::Invalid(report))
    }
}

pub fn serialize_netlist<T: Scalar>(net: &GeneralizedNetwork<T>) -> String {
    NetlistDocument::from_network(net).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ElementError;
    use crate::reduction::kron_reduce;

    const Y: &str = r#"{
        "format": 1, "nu": 0,
        "vertices": [{"id": 1, "boundary": true}, {"id": 2, "boundary": true},
                     {"id": 3, "boundary": true}, {"id": 4}],
        "edges": [
            {"tail": 1, "head": 4, "element": {"kind": "r", "values": [1.0]}},
            {"tail": 2, "head": 4, "element": {"kind": "r", "values": [1.0]}},
            {"tail": 3, "head": 4, "element": {"kind": "r", "values": [1.0]}}
        ]}"#;

    #[test]
    fn y_network_parses() {
        let net: GeneralizedNetwork<f64> = parse_netlist(Y).unwrap();
        assert_eq!(net.graph().vertex_count(), 4);
        assert_eq!(net.graph().edge_count(), 3);
        assert_eq!(net.nu(), 0);
        assert_eq!(net.partition().internal(), &[4]);
    }

    #[test]
    fn round_trip_is_field_for_field() {
        let net: GeneralizedNetwork<f64> = parse_netlist(Y).unwrap();
        let again: GeneralizedNetwork<f64> = parse_netlist(&serialize_netlist(&net)).unwrap();
        assert_eq!(again, net);
    }

    #[test]
    fn explicit_arrays_and_length_errors() {
        let text = r#"{"format":1,"nu":1,
            "vertices":[{"id":1,"boundary":true},{"id":2},{"id":3,"boundary":true}],
            "edges":[{"tail":1,"head":2,"p":[1,0],"q":[1,0]},
                     {"tail":2,"head":3,"p":[0,1],"q":[1,0]}]}"#;
        let net: GeneralizedNetwork<f64> = parse_netlist(text).unwrap();
        assert_eq!(net.p()[1].as_slice(), &[0.0, 1.0]);
        let bad = text.replace(r#""p":[0,1]"#, r#""p":[0,1,2]"#);
        match parse_netlist::<f64>(&bad) {
            Err(IoError::Schema(m)) => assert!(m.contains("edge 2") && m.contains("p has 3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let cases = [
            (
                r#"{"format":2,"nu":0,"vertices":[{"id":1}],"edges":[]}"#,
                "format",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[],"edges":[]}"#,
                "no vertices",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":2}],"edges":[]}"#,
                "outside",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":1}],"edges":[]}"#,
                "repeated",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":2}],
                   "edges":[{"tail":1,"head":5,"p":[1],"q":[1]}]}"#,
                "head 5",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":2}],
                   "edges":[{"tail":1,"head":2,"p":[1]}]}"#,
                "both",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":2}],
                   "edges":[{"tail":1,"head":2}]}"#,
                "either",
            ),
            (
                r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":2}],
                   "edges":[{"tail":1,"head":2,"p":[1],"q":[1],"element":{"kind":"r","values":[1]}}]}"#,
                "combined",
            ),
        ];
        for (text, needle) in cases {
            match parse_netlist::<f64>(text) {
                Err(IoError::Schema(m)) => assert!(m.contains(needle), "{m} lacks {needle}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn element_errors_name_the_edge() {
        let text = Y.replace(r#""values": [1.0]}}"#, r#""values": [-1.0]}}"#);
        assert!(matches!(
            parse_netlist::<f64>(&text),
            Err(IoError::Element {
                edge: 1,
                source: ElementError::NonPositiveValue { .. }
            })
        ));
        let text = Y.replacen(r#""kind": "r""#, r#""kind": "zz""#, 1);
        assert!(matches!(
            parse_netlist::<f64>(&text),
            Err(IoError::Element {
                edge: 1,
                source: ElementError::UnknownKind(_)
            })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_netlist::<f64>("{\n  \"format\": 1,\n  oops }") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_netlist::<f64>(r#"{"format":1,"nu":0,"vertices":[],"edges":[],"extra":1}"#),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn validation_failures_surface() {
        let text = r#"{"format":1,"nu":0,"vertices":[{"id":1,"boundary":true},{"id":2}],
                       "edges":[{"tail":1,"head":2,"p":[0],"q":[1]}]}"#;
        match parse_netlist::<f64>(text) {
            Err(IoError::Invalid(r)) => assert!(r.to_string().contains("short-circuit edge 1")),
            other => panic!("{other:?}"),
        }
        let doc = NetlistDocument::from_json(text).unwrap();
        assert!(doc.to_network::<f64>().is_ok());
    }

    #[test]
    fn reduced_document_records_sources() {
        let net: GeneralizedNetwork<f64> = parse_netlist(Y).unwrap();
        let red = kron_reduce(&net, 1e-9).unwrap();
        let doc = NetlistDocument::from_reduced(&red);
        assert_eq!(doc.edges.len(), 3);
        assert_eq!(
            doc.vertices.iter().map(|v| v.source).collect::<Vec<_>>(),
            vec![Some(1), Some(2), Some(3)]
        );
        let back: GeneralizedNetwork<f64> = parse_netlist(&doc.to_json()).unwrap();
        assert_eq!(&back, red.network());
    }
}
