//! Expansion of skeleton nodes into stitch courses and their wale bindings.

mod generate;
pub mod graph;
pub mod shaper;

use std::collections::BTreeMap;

use thiserror::Error;

pub use generate::{generate_node_courses, NodeCourses, Port};
pub use graph::{Course, CourseId, CourseKind, Side, Stitch, StitchFlags, StitchGraph, StitchId};
pub use shaper::{run_shaper, ShaperError, ShaperMapping};

use crate::skeleton::{InterfaceId, InterfaceState, ResolvedSkeleton, Role, Shaping};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("{node}: {message}")]
    Node { node: String, message: String },
    #[error("cannot join flat and tubular interfaces: {0} <-> {1}")]
    Circularity(String, String),
    #[error("interface {0}: {1}")]
    Binding(String, String),
}

/// The stitch graph plus, per node, its courses in knitting order.
#[derive(Debug, Clone, PartialEq)]
pub struct Shapes {
    pub graph: StitchGraph,
    pub node_courses: Vec<Vec<CourseId>>,
    pub ports: BTreeMap<InterfaceId, Port>,
}

/// Expands every node and binds connected interfaces across nodes.
pub fn merge_interfaces(skel: &ResolvedSkeleton) -> Result<Shapes, ShapeError> {
    let mut graph = StitchGraph::default();
    let mut node_courses = Vec::with_capacity(skel.nodes.len());
    let mut ports = BTreeMap::new();
    for node in &skel.nodes {
        let nc = generate_node_courses(&mut graph, skel, node)?;
        node_courses.push(nc.courses);
        ports.extend(nc.ports);
    }
    for (a, b) in skel.graph.connections() {
        let (out, inn) = match (skel.interface(a).role, skel.interface(b).role) {
            (Role::Out, Role::In) => (a, b),
            (Role::In, Role::Out) => (b, a),
            // flow conflicts are reported by validation
            _ => continue,
        };
        let (po, pi) = (&ports[&out], &ports[&inn]);
        if po.circular != pi.circular {
            return Err(ShapeError::Circularity(
                skel.interface_path(out),
                skel.interface_path(inn),
            ));
        }
        let (from, to, circular) = (po.stitches.clone(), pi.stitches.clone(), po.circular);
        generate::bind(&mut graph, &from, &to, circular, &Shaping::Uniform)
            .map_err(|e| ShapeError::Binding(skel.interface_path(out), e))?;
    }
    for (id, port) in &ports {
        let itf = skel.interface(*id);
        if itf.state != InterfaceState::Closed {
            let course = graph.stitch(port.stitches[0]).course;
            let c = &mut graph.courses[course as usize];
            if c.interface.is_none() {
                c.interface = Some(*id);
            }
            for s in &port.stitches {
                graph.stitches[*s as usize]
                    .flags
                    .insert(StitchFlags::INTERFACE);
            }
        }
    }
    graph.refresh_flags();
    Ok(Shapes {
        graph,
        node_courses,
        ports,
    })
}
