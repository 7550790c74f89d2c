//! Network transforms: degree reduction by copy trees and in/out vertex
//! splitting, with the mapping of flows back to the original network.

use crate::error::{FlowError, Violation};
use crate::network::{verify_flow, FlowNetwork, ResidualState, VertexId};

/// Capacity standing in for "unbounded": larger than any feasible flow.
pub fn sentinel_capacity(net: &FlowNetwork) -> i64 {
    (net.n() as i64)
        .saturating_mul(net.max_capacity())
        .saturating_add(1)
}

/// A network whose in- and out-degrees are at most `d`, obtained by
/// replacing every high-degree vertex with a tree of copies.
///
/// Reduced arc `i` is the image of original arc `i` for `i < original.m()`;
/// the arcs after those are tree arcs of sentinel capacity. Each original
/// vertex keeps its id, and its first listed copy is itself.
#[derive(Debug, Clone)]
pub struct DegreeReduction {
    pub original: FlowNetwork,
    pub reduced: FlowNetwork,
    pub vertex_map: Vec<Vec<VertexId>>,
    pub d: usize,
    /// Copies made for the in-degree pass, 1 for unsplit vertices.
    pub k_in: Vec<usize>,
    /// Copies made for the out-degree pass, 1 for unsplit vertices.
    pub k_out: Vec<usize>,
}

impl DegreeReduction {
    pub fn is_identity(&self) -> bool {
        self.reduced.n() == self.original.n()
    }
}

/// Copies needed so a vertex of degree `deg` fits under bound `d` when each
/// copy also spends one degree on every tree arc it touches.
fn copies_needed(deg: usize, d: usize) -> usize {
    if deg <= d {
        1
    } else {
        (deg - 1).div_ceil(d - 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    Out,
}

struct Builder {
    n: usize,
    arcs: Vec<(usize, usize, i64)>,
    vertex_map: Vec<Vec<VertexId>>,
}

impl Builder {
    fn pass(&mut self, side: Side, d: usize, sentinel: i64, original_n: usize) -> Vec<usize> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (id, &(u, v, _)) in self.arcs.iter().enumerate() {
            match side {
                Side::In => incident[v].push(id),
                Side::Out => incident[u].push(id),
            }
        }
        let mut k_of = vec![1; original_n];
        for u in 0..original_n {
            let k = copies_needed(incident[u].len(), d);
            if k == 1 {
                continue;
            }
            k_of[u] = k;
            let mut copies = vec![u];
            for _ in 1..k {
                copies.push(self.n);
                self.vertex_map[u].push(VertexId(self.n));
                self.n += 1;
            }
            // heap-shaped tree; copy i hangs below copy (i - 1) / 2
            for i in 1..k {
                let (child, parent) = (copies[i], copies[(i - 1) / 2]);
                match side {
                    Side::In => self.arcs.push((child, parent, sentinel)),
                    Side::Out => self.arcs.push((parent, child, sentinel)),
                }
            }
            let budget = |i: usize| d - [2 * i + 1, 2 * i + 2].iter().filter(|&&c| c < k).count();
            let mut slot = 0;
            let mut used = 0;
            for &id in &incident[u] {
                while used == budget(slot) {
                    slot += 1;
                    used = 0;
                }
                match side {
                    Side::In => self.arcs[id].1 = copies[slot],
                    Side::Out => self.arcs[id].0 = copies[slot],
                }
                used += 1;
            }
        }
        k_of
    }
}

/// Splits every vertex whose in- or out-degree exceeds `d = ⌊m/n⌋ + 3`.
///
/// ```
/// use compactflow::{transform::to_bounded_degree, FlowNetwork};
///
/// // a center of in-degree 4 with d = 3
/// let net = FlowNetwork::from_arcs(5, 0, 4, &[(0, 4, 1), (1, 4, 1), (2, 4, 1), (3, 4, 1)])?;
/// let red = to_bounded_degree(&net);
/// assert_eq!(red.d, 3);
/// assert_eq!(red.k_in[4], 2);
/// assert!(red.reduced.max_in_degree() <= 3);
/// # Ok::<(), compactflow::FlowError>(())
/// ```
pub fn to_bounded_degree(net: &FlowNetwork) -> DegreeReduction {
    let d = net.degree_bound();
    let sentinel = sentinel_capacity(net);
    let mut b = Builder {
        n: net.n(),
        arcs: net
            .arcs()
            .iter()
            .map(|a| (a.tail.0, a.head.0, a.capacity))
            .collect(),
        vertex_map: (0..net.n()).map(|v| vec![VertexId(v)]).collect(),
    };
    let k_in = b.pass(Side::In, d, sentinel, net.n());
    let k_out = b.pass(Side::Out, d, sentinel, net.n());
    let reduced = FlowNetwork::from_arcs(b.n, net.source().0, net.sink().0, &b.arcs)
        .expect("copies and redistributed arcs stay in range");
    DegreeReduction {
        original: net.clone(),
        reduced,
        vertex_map: b.vertex_map,
        d,
        k_in,
        k_out,
    }
}

/// Reads a flow on the reduced network back onto the original arcs.
pub fn map_flow_back(
    red: &DegreeReduction,
    state: &ResidualState,
) -> Result<ResidualState, Violation> {
    verify_flow(&red.reduced, state)?;
    let m = red.original.m();
    let back = ResidualState::from_flows(&red.original, state.flow[..m].to_vec())
        .map_err(|_| Violation::Shape)?;
    verify_flow(&red.original, &back)?;
    Ok(back)
}

/// Result of [`split_in_out`]: each split vertex `u` keeps its id as `u_in`
/// and gets a fresh `u_out`, joined by a bridge arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InOutSplit {
    halves: Vec<Option<(VertexId, VertexId)>>,
    bridges: Vec<Option<usize>>,
}

impl InOutSplit {
    /// `(u_in, u_out)` for a split vertex.
    pub fn halves(&self, u: VertexId) -> Option<(VertexId, VertexId)> {
        self.halves.get(u.0).copied().flatten()
    }

    pub fn bridge_arc(&self, u: VertexId) -> Option<usize> {
        self.bridges.get(u.0).copied().flatten()
    }

    /// Removes the bridge of `u` from `net` by zeroing its capacity, which
    /// keeps every other arc id stable.
    pub fn delete_bridge(&self, net: &mut FlowNetwork, u: VertexId) -> Result<(), FlowError> {
        let arc = self
            .bridge_arc(u)
            .ok_or(FlowError::VertexOutOfRange {
                vertex: u.0,
                n: self.halves.len(),
            })?;
        net.set_capacity(arc, 0);
        Ok(())
    }
}

/// Splits each target into an in-half and an out-half. Original arc ids are
/// preserved; bridges are appended in target order.
pub fn split_in_out(
    net: &FlowNetwork,
    targets: &[VertexId],
) -> Result<(InOutSplit, FlowNetwork), FlowError> {
    let n = net.n();
    let mut halves = vec![None; n];
    let mut next = n;
    let mut order = Vec::new();
    for &u in targets {
        net.check(u)?;
        if net.is_terminal(u.0) {
            return Err(FlowError::TerminalSplit(u.0));
        }
        if halves[u.0].is_none() {
            halves[u.0] = Some((u, VertexId(next)));
            order.push(u.0);
            next += 1;
        }
    }
    let mut arcs: Vec<(usize, usize, i64)> = net
        .arcs()
        .iter()
        .map(|a| {
            let tail = halves[a.tail.0].map_or(a.tail.0, |(_, out)| out.0);
            (tail, a.head.0, a.capacity)
        })
        .collect();
    let sentinel = sentinel_capacity(net);
    let mut bridges = vec![None; n];
    for u in order {
        bridges[u] = Some(arcs.len());
        arcs.push((u, halves[u].unwrap().1 .0, sentinel));
    }
    let split = FlowNetwork::from_arcs(next, net.source().0, net.sink().0, &arcs)?;
    Ok((InOutSplit { halves, bridges }, split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::edmonds_karp;

    fn star() -> FlowNetwork {
        // s=0 feeds 1, 2, 3; 1 and 3 feed 2; 2 -> t=4
        FlowNetwork::from_arcs(
            5,
            0,
            4,
            &[(0, 2, 3), (1, 2, 4), (3, 2, 5), (0, 1, 4), (0, 3, 5), (2, 4, 9)],
        )
        .unwrap()
    }

    #[test]
    fn star_center_splits_into_two() {
        let hub = FlowNetwork::from_arcs(5, 0, 4, &[(0, 4, 2), (1, 4, 3), (2, 4, 4), (3, 4, 5)])
            .unwrap();
        assert_eq!(hub.degree_bound(), 3);
        let red = to_bounded_degree(&hub);
        assert_eq!(red.k_in[4], 2);
        assert_eq!(red.reduced.n(), 6);
        assert!(red.reduced.max_in_degree() <= 3);
        assert!(red.reduced.max_out_degree() <= 3);
        assert_eq!(edmonds_karp(&hub).0, edmonds_karp(&red.reduced).0);
    }

    #[test]
    fn bounded_network_is_unchanged() {
        let net = star();
        let red = to_bounded_degree(&net);
        assert!(red.is_identity());
        assert_eq!(red.reduced, net);
        assert!(red.vertex_map.iter().enumerate().all(|(v, c)| c == &vec![VertexId(v)]));
    }

    #[test]
    fn flow_maps_back_with_equal_value() {
        let hub = FlowNetwork::from_arcs(5, 0, 4, &[(0, 4, 2), (1, 4, 3), (2, 4, 4), (3, 4, 5)])
            .unwrap();
        let red = to_bounded_degree(&hub);
        let (value, state) = edmonds_karp(&red.reduced);
        let back = map_flow_back(&red, &state).unwrap();
        assert_eq!(verify_flow(&hub, &back), Ok(value));
        assert_eq!(&back.flow[..], &state.flow[..hub.m()]);

        let zero = map_flow_back(&red, &ResidualState::zero(&red.reduced)).unwrap();
        assert!(zero.flow.iter().all(|&f| f == 0));

        let ident = to_bounded_degree(&star());
        let (_, s) = edmonds_karp(&ident.reduced);
        assert_eq!(map_flow_back(&ident, &s).unwrap(), s);
    }

    #[test]
    fn map_back_rejects_infeasible() {
        let hub = FlowNetwork::from_arcs(5, 0, 4, &[(0, 4, 2), (1, 4, 3), (2, 4, 4), (3, 4, 5)])
            .unwrap();
        let red = to_bounded_degree(&hub);
        let mut flow = vec![0; red.reduced.m()];
        flow[0] = 3;
        let bad = ResidualState::from_flows(&red.reduced, flow).unwrap();
        assert!(map_flow_back(&red, &bad).is_err());
    }

    #[test]
    fn out_degree_pass_uses_out_tree() {
        // the source fans out to 7 sinks-side vertices
        let mut arcs = Vec::new();
        for v in 1..8 {
            arcs.push((0, v, 2));
            arcs.push((v, 8, 1));
        }
        let net = FlowNetwork::from_arcs(9, 0, 8, &arcs).unwrap();
        let red = to_bounded_degree(&net);
        assert!(red.k_out[0] > 1 && red.k_in[8] > 1);
        assert!(red.reduced.max_out_degree() <= red.d);
        assert!(red.reduced.max_in_degree() <= red.d);
        assert_eq!(edmonds_karp(&red.reduced).0, 7);
    }

    #[test]
    fn split_single_vertex() {
        let net = FlowNetwork::from_arcs(3, 0, 2, &[(0, 1, 4), (1, 2, 3)]).unwrap();
        let (split, g) = split_in_out(&net, &[VertexId(1)]).unwrap();
        let (vin, vout) = split.halves(VertexId(1)).unwrap();
        assert_eq!((vin, vout), (VertexId(1), VertexId(3)));
        let tails_heads: Vec<(usize, usize)> =
            g.arcs().iter().map(|a| (a.tail.0, a.head.0)).collect();
        assert_eq!(tails_heads, vec![(0, 1), (3, 2), (1, 3)]);
        assert_eq!(edmonds_karp(&g).0, 3);
    }

    #[test]
    fn empty_split_is_identity() {
        let net = star();
        let (_, g) = split_in_out(&net, &[]).unwrap();
        assert_eq!(g, net);
    }

    #[test]
    fn split_diamond_keeps_value_and_bridge_deletion_disconnects() {
        let net =
            FlowNetwork::from_arcs(4, 0, 3, &[(0, 1, 3), (0, 2, 3), (1, 3, 4), (2, 3, 4)]).unwrap();
        let (split, mut g) = split_in_out(&net, &[VertexId(1), VertexId(2)]).unwrap();
        assert_eq!(edmonds_karp(&g).0, 6);
        split.delete_bridge(&mut g, VertexId(1)).unwrap();
        assert_eq!(edmonds_karp(&g).0, 3);
    }

    #[test]
    fn split_rejects_terminals() {
        let net = star();
        assert_eq!(
            split_in_out(&net, &[VertexId(0)]).unwrap_err(),
            FlowError::TerminalSplit(0)
        );
    }
}
