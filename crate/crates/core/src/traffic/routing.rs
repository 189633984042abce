//! A* routing over the intersection road graph.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::sim::{Direction, Geometry, Movement, LANES_PER_ROAD};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Entry(Direction),
    Exit(Direction),
    Intersection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: NodeId,
    pub length: f64,
}

/// Directed road graph with banned `(from, via, to)` turns.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadGraph {
    nodes: Vec<Node>,
    adjacency: Vec<Vec<Edge>>,
    banned_turns: BTreeSet<(NodeId, NodeId, NodeId)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub length: f64,
}

impl RoadGraph {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            adjacency: Vec::new(),
            banned_turns: BTreeSet::new(),
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, x: f64, y: f64) -> NodeId {
        self.nodes.push(Node { kind, x, y });
        self.adjacency.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, length: f64) {
        assert!(length > 0.0, "edge lengths must be positive");
        self.adjacency[from].push(Edge { to, length });
    }

    pub fn ban_turn(&mut self, from: NodeId, via: NodeId, to: NodeId) {
        self.banned_turns.insert((from, via, to));
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self, node: NodeId) -> &[Edge] {
        &self.adjacency[node]
    }

    pub fn find(&self, kind: NodeKind) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.kind == kind)
    }

    /// Four entries, four exits and the intersection node. Each approach road
    /// runs to the middle of the box, so an entry-to-exit path is
    /// `road + box + road` long. U-turns are banned.
    pub fn four_way(geometry: &Geometry) -> Self {
        let mut g = Self::new();
        let half = geometry.road_length + geometry.box_width / 2.0;
        let center = g.add_node(NodeKind::Intersection, 0.0, 0.0);
        let offset = |d: Direction| match d {
            Direction::North => (0.0, half),
            Direction::South => (0.0, -half),
            Direction::West => (-half, 0.0),
            Direction::East => (half, 0.0),
        };
        let mut entries = [0; 4];
        let mut exits = [0; 4];
        for d in Direction::ALL {
            let (x, y) = offset(d);
            entries[d.index()] = g.add_node(NodeKind::Entry(d), x, y);
            exits[d.index()] = g.add_node(NodeKind::Exit(d), x, y);
        }
        for d in Direction::ALL {
            g.add_edge(entries[d.index()], center, half);
            g.add_edge(center, exits[d.index()], half);
            g.ban_turn(entries[d.index()], center, exits[d.index()]);
        }
        g
    }

    fn heuristic(&self, a: NodeId, b: NodeId) -> f64 {
        let (p, q) = (self.nodes[a], self.nodes[b]);
        libm::hypot(p.x - q.x, p.y - q.y)
    }

    /// Shortest path by A* with a straight-line heuristic. The search state
    /// is `(node, predecessor)` so banned turns are respected.
    pub fn shortest_path(&self, start: NodeId, goal: NodeId) -> Option<Path> {
        const NONE: NodeId = usize::MAX;
        let mut open = BinaryHeap::new();
        let mut best: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        let mut parent: BTreeMap<(NodeId, NodeId), (NodeId, NodeId)> = BTreeMap::new();
        best.insert((start, NONE), 0.0);
        open.push(Frontier {
            f: self.heuristic(start, goal),
            g: 0.0,
            state: (start, NONE),
        });
        while let Some(Frontier { g, state, .. }) = open.pop() {
            if g > best.get(&state).copied().unwrap_or(f64::INFINITY) {
                continue;
            }
            let (node, prev) = state;
            if node == goal {
                let mut nodes = vec![node];
                let mut s = state;
                while let Some(&p) = parent.get(&s) {
                    nodes.push(p.0);
                    s = p;
                }
                nodes.reverse();
                return Some(Path { nodes, length: g });
            }
            for edge in &self.adjacency[node] {
                if prev != NONE && self.banned_turns.contains(&(prev, node, edge.to)) {
                    continue;
                }
                let next = (edge.to, node);
                let cost = g + edge.length;
                if cost < best.get(&next).copied().unwrap_or(f64::INFINITY) {
                    best.insert(next, cost);
                    parent.insert(next, state);
                    open.push(Frontier {
                        f: cost + self.heuristic(edge.to, goal),
                        g: cost,
                        state: next,
                    });
                }
            }
        }
        None
    }
}

impl Default for RoadGraph {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug)]
struct Frontier {
    f: f64,
    g: f64,
    state: (NodeId, NodeId),
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Min-heap on f, then larger g first, then state for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.state.cmp(&self.state))
    }
}

/// Route from the `origin` entry to the `destination` exit.
pub fn plan_route(graph: &RoadGraph, origin: Direction, destination: Direction) -> Result<Path> {
    let unreachable = Error::Unreachable {
        from: origin,
        to: destination,
    };
    let start = graph
        .find(NodeKind::Entry(origin))
        .ok_or_else(|| unreachable.clone())?;
    let goal = graph
        .find(NodeKind::Exit(destination))
        .ok_or_else(|| unreachable.clone())?;
    graph.shortest_path(start, goal).ok_or(unreachable)
}

/// Incoming lane for a movement: left turns use lane 0, right turns lane 3,
/// through traffic the less occupied of lanes 1 and 2 (ties to lane 1).
pub fn assign_lane(movement: Movement, occupancy: &[usize; LANES_PER_ROAD]) -> usize {
    match movement {
        Movement::Left => 0,
        Movement::Right => 3,
        Movement::Through => {
            if occupancy[2] < occupancy[1] {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn north_to_south_goes_through_the_intersection() {
        let g = RoadGraph::four_way(&Geometry::default());
        let p = plan_route(&g, Direction::North, Direction::South).unwrap();
        let kinds: Vec<NodeKind> = p.nodes.iter().map(|&n| g.nodes()[n].kind).collect();
        assert_eq!(
            kinds,
            [
                NodeKind::Entry(Direction::North),
                NodeKind::Intersection,
                NodeKind::Exit(Direction::South)
            ]
        );
    }

    #[test]
    fn u_turns_are_unreachable() {
        let g = RoadGraph::four_way(&Geometry::default());
        for d in Direction::ALL {
            assert_eq!(
                plan_route(&g, d, d),
                Err(Error::Unreachable { from: d, to: d })
            );
        }
    }

    #[test]
    fn every_valid_pair_costs_road_box_road() {
        let g = RoadGraph::four_way(&Geometry::default());
        for o in Direction::ALL {
            for d in Direction::ALL.into_iter().filter(|&d| d != o) {
                let p = plan_route(&g, o, d).unwrap();
                assert_eq!(p.length, 750.0 + 30.0 + 750.0);
                assert_eq!(p.nodes.len(), 3);
            }
        }
    }

    #[test]
    fn astar_prefers_the_shorter_detour() {
        // a -> b -> d (10 + 10) versus a -> c -> d (1 + 30)
        let mut g = RoadGraph::new();
        let a = g.add_node(NodeKind::Intersection, 0.0, 0.0);
        let b = g.add_node(NodeKind::Intersection, 5.0, 5.0);
        let c = g.add_node(NodeKind::Intersection, 1.0, 0.0);
        let d = g.add_node(NodeKind::Intersection, 10.0, 0.0);
        g.add_edge(a, b, 10.0);
        g.add_edge(b, d, 10.0);
        g.add_edge(a, c, 1.0);
        g.add_edge(c, d, 30.0);
        let p = g.shortest_path(a, d).unwrap();
        assert_eq!(p.nodes, [a, b, d]);
        assert_eq!(p.length, 20.0);
        g.ban_turn(a, b, d);
        assert_eq!(g.shortest_path(a, d).unwrap().nodes, [a, c, d]);
    }

    #[test]
    fn lane_discipline() {
        assert_eq!(assign_lane(Movement::Left, &[0; 4]), 0);
        assert_eq!(assign_lane(Movement::Right, &[0; 4]), 3);
        assert_eq!(assign_lane(Movement::Through, &[0, 5, 3, 0]), 2);
        assert_eq!(assign_lane(Movement::Through, &[0, 3, 3, 0]), 1);
        assert_eq!(assign_lane(Movement::Through, &[0, 2, 3, 0]), 1);
    }
}
