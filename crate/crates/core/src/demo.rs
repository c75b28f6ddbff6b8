//! Two six-node networks over the same opinions: one wires like-minded
//! nodes together, the other wires across the divide.

use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::metrics::{metrics_from_internal, MetricReport, MetricRoute};

pub const ECHO_OPINIONS: [f64; 6] = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
pub const ECHO_EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (3, 4), (4, 5)];
pub const BRIDGE_EDGES: [(usize, usize); 4] = [(0, 3), (1, 4), (2, 5), (0, 4)];

#[derive(Debug, Clone, Serialize)]
pub struct EchoScenario {
    pub name: &'static str,
    pub edges: Vec<(usize, usize)>,
    pub report: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EchoDemo {
    pub opinions: Vec<f64>,
    pub scenarios: Vec<EchoScenario>,
    /// The like-minded network is more polarized.
    pub echo_more_polarized: bool,
    /// The like-minded network disagrees less.
    pub echo_less_disagreement: bool,
}

pub fn echo_graphs() -> Result<(Graph, Graph)> {
    let unit = |edges: &[(usize, usize)]| Graph::new(6, edges.iter().map(|&(i, j)| (i, j, 1.0)));
    Ok((unit(&ECHO_EDGES)?, unit(&BRIDGE_EDGES)?))
}

pub fn echo_demo() -> Result<EchoDemo> {
    let (echo, bridge) = echo_graphs()?;
    let a = metrics_from_internal(&echo, &ECHO_OPINIONS, 1.0, MetricRoute::FromZ)?;
    let b = metrics_from_internal(&bridge, &ECHO_OPINIONS, 1.0, MetricRoute::FromZ)?;
    Ok(EchoDemo {
        opinions: ECHO_OPINIONS.to_vec(),
        echo_more_polarized: a.polarization > b.polarization,
        echo_less_disagreement: a.disagreement < b.disagreement,
        scenarios: vec![
            EchoScenario {
                name: "like_minded",
                edges: ECHO_EDGES.to_vec(),
                report: a,
            },
            EchoScenario {
                name: "cross_cutting",
                edges: BRIDGE_EDGES.to_vec(),
                report: b,
            },
        ],
    })
}
