//! Pants graphs of a genus-g surface, level-k admissible labellings (rank 2)
//! and the dimension ledger of the torus quotient over a trinion decomposition.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trivalent multigraph with loops: `2g − 2` vertices, `3g − 3` edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct TrinionGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    name: String,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    name: String,
}

impl TryFrom<GraphRepr> for TrinionGraph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Self> {
        let g = TrinionGraph::new(r.vertices, r.edges.iter().map(|e| (e[0], e[1])).collect())?;
        Ok(g.named(if r.name.is_empty() { "custom" } else { &r.name }))
    }
}

impl From<TrinionGraph> for GraphRepr {
    fn from(g: TrinionGraph) -> Self {
        GraphRepr { vertices: g.vertices, edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(), name: g.name }
    }
}

impl TrinionGraph {
    /// Validates trivalence (loops count twice), the count identity and connectivity.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices < 2 || !vertices.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("{vertices} vertices; need an even number ≥ 2")));
        }
        if 3 * vertices != 2 * edges.len() {
            return Err(Error::InvalidInput(format!("{} edges on {vertices} trivalent vertices", edges.len())));
        }
        let mut degree = vec![0usize; vertices];
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        if let Some(v) = degree.iter().position(|&d| d != 3) {
            return Err(Error::InvalidInput(format!("vertex {v} has degree {}", degree[v])));
        }
        let g = Self { vertices, edges, name: String::new() };
        if !g.is_connected() {
            return Err(Error::InvalidInput("pants graphs are connected".into()));
        }
        Ok(g)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn genus(&self) -> usize {
        self.edges.len() - self.vertices + 1
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Lexicographically least sorted edge list over all vertex relabellings.
    /// Factorial in the vertex count.
    pub fn canonical_form(&self) -> Vec<(usize, usize)> {
        (0..self.vertices)
            .permutations(self.vertices)
            .map(|perm| {
                let mut e: Vec<(usize, usize)> = self
                    .edges
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (perm[a], perm[b]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .expect("at least one permutation")
    }

    pub fn is_isomorphic(&self, other: &TrinionGraph) -> bool {
        self.vertices == other.vertices && self.edges.len() == other.edges.len() && self.canonical_form() == other.canonical_form()
    }

    /// Same graph with vertices renamed by `perm`.
    pub fn relabelled(&self, perm: &[usize]) -> Self {
        Self {
            vertices: self.vertices,
            edges: self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            name: self.name.clone(),
        }
    }

    /// Theta graph: two vertices joined by three edges.
    pub fn theta() -> Self {
        Self::new(2, vec![(0, 1), (0, 1), (0, 1)]).expect("valid").named("theta")
    }

    /// Dumbbell: two loops joined by a bridge.
    pub fn dumbbell() -> Self {
        Self::new(2, vec![(0, 0), (0, 1), (1, 1)]).expect("valid").named("dumbbell")
    }

    /// Ring of `g − 1` double edges joined cyclically; the theta graph for `g = 2`.
    pub fn necklace(g: usize) -> Self {
        assert!(g >= 2);
        let beads = g - 1;
        let mut edges = Vec::with_capacity(3 * beads);
        for i in 0..beads {
            let (a, b) = (2 * i, 2 * i + 1);
            edges.push((a, b));
            edges.push((a, b));
            edges.push((b, (2 * (i + 1)) % (2 * beads)));
        }
        Self::new(2 * beads, edges).expect("valid").named("necklace")
    }

    /// Spine of `g − 2` vertices with looped leaves: one leg at interior spine
    /// vertices, two at the ends (three at a single spine vertex). Needs `g ≥ 3`.
    pub fn caterpillar(g: usize) -> Self {
        assert!(g >= 3);
        let k = g - 2;
        let mut edges = Vec::new();
        let mut next = k;
        let mut leaf = |spine: usize, edges: &mut Vec<(usize, usize)>| {
            edges.push((spine, next));
            edges.push((next, next));
            next += 1;
        };
        for i in 0..k {
            if i + 1 < k {
                edges.push((i, i + 1));
            }
            let legs = match (i == 0, i + 1 == k) {
                (true, true) => 3,
                (true, false) | (false, true) => 2,
                _ => 1,
            };
            for _ in 0..legs {
                leaf(i, &mut edges);
            }
        }
        Self::new(2 * k + 2, edges).expect("valid").named("caterpillar")
    }
}

/// All connected trivalent multigraphs with loops on `v` vertices, up to isomorphism.
pub fn enumerate_cubic_multigraphs(v: usize) -> Vec<TrinionGraph> {
    fn rec(
        v: usize,
        remaining: &mut [usize],
        edges: &mut Vec<(usize, usize)>,
        found: &mut BTreeSet<Vec<(usize, usize)>>,
        out: &mut Vec<TrinionGraph>,
    ) {
        let Some(u) = remaining.iter().position(|&d| d > 0) else {
            if let Ok(g) = TrinionGraph::new(v, edges.clone()) {
                if found.insert(g.canonical_form()) {
                    out.push(g);
                }
            }
            return;
        };
        // Edges are generated in sorted order, so the next edge starts at the
        // least unsaturated vertex and is not smaller than the previous one.
        for w in u..v {
            let e = (u, w);
            if edges.last().is_some_and(|&last| e < last) {
                continue;
            }
            let need_ok = if w == u { remaining[u] >= 2 } else { remaining[w] >= 1 };
            if !need_ok {
                continue;
            }
            if w == u {
                remaining[u] -= 2;
            } else {
                remaining[u] -= 1;
                remaining[w] -= 1;
            }
            edges.push(e);
            rec(v, remaining, edges, found, out);
            edges.pop();
            if w == u {
                remaining[u] += 2;
            } else {
                remaining[u] += 1;
                remaining[w] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(v, &mut vec![3; v], &mut Vec::new(), &mut BTreeSet::new(), &mut out);
    for (i, g) in out.iter_mut().enumerate() {
        *g = g.clone().named(&format!("cubic-{v}-{i}"));
    }
    out
}

/// Pants graphs for genus `g`: every isomorphism class for `g ≤ 4`, and the
/// necklace and caterpillar families beyond. For `g = 2` these are the theta
/// graph and the dumbbell.
pub fn standard_graphs(g: usize) -> Result<Vec<TrinionGraph>> {
    if g < 2 {
        return Err(Error::InvalidInput(format!("genus {g} has no pants decomposition")));
    }
    Ok(match g {
        2 => vec![TrinionGraph::theta(), TrinionGraph::dumbbell()],
        3 | 4 => enumerate_cubic_multigraphs(2 * g - 2),
        _ => vec![TrinionGraph::necklace(g), TrinionGraph::caterpillar(g)],
    })
}

/// Rank-2 fusion rule at level `k` for the labels meeting at a vertex.
pub fn admissible(a: usize, b: usize, c: usize, k: usize) -> bool {
    (a + b + c).is_multiple_of(2) && a.abs_diff(b) <= c && c <= a + b && a + b + c <= 2 * k
}

struct Counter<'a> {
    graph: &'a TrinionGraph,
    k: usize,
    /// Vertices whose last incident edge (in order) is edge `i`.
    closes: Vec<Vec<usize>>,
    incident: Vec<[usize; 3]>,
}

impl<'a> Counter<'a> {
    fn new(graph: &'a TrinionGraph, k: usize) -> Self {
        let mut incident = vec![Vec::new(); graph.vertices];
        for (i, &(a, b)) in graph.edges.iter().enumerate() {
            incident[a].push(i);
            incident[b].push(i);
        }
        let mut closes = vec![Vec::new(); graph.edges.len()];
        let incident: Vec<[usize; 3]> = incident.into_iter().map(|v| [v[0], v[1], v[2]]).collect();
        for (v, inc) in incident.iter().enumerate() {
            closes[*inc.iter().max().unwrap()].push(v);
        }
        Self { graph, k, closes, incident }
    }

    fn rec(&self, labels: &mut Vec<usize>) -> u64 {
        let i = labels.len();
        if i == self.graph.edges.len() {
            return 1;
        }
        let mut total = 0;
        for a in 0..=self.k {
            labels.push(a);
            let ok = self.closes[i].iter().all(|&v| {
                let [x, y, z] = self.incident[v];
                admissible(labels[x], labels[y], labels[z], self.k)
            });
            if ok {
                total += self.rec(labels);
            }
            labels.pop();
        }
        total
    }
}

/// Number of labellings `e ↦ a_e ∈ {0,…,k}` admissible at every vertex
/// (a loop contributes its label twice). The first two edges are split across
/// the rayon pool.
pub fn count_lattice_points(graph: &TrinionGraph, k: usize) -> u64 {
    let counter = Counter::new(graph, k);
    let prefixes: Vec<Vec<usize>> = (0..=k).cartesian_product(0..=k).map(|(a, b)| vec![a, b]).collect();
    prefixes
        .into_par_iter()
        .map(|prefix| {
            let mut labels = Vec::with_capacity(graph.edges.len());
            for (i, a) in prefix.into_iter().enumerate() {
                labels.push(a);
                let ok = counter.closes[i].iter().all(|&v| {
                    let [x, y, z] = counter.incident[v];
                    admissible(labels[x], labels[y], labels[z], k)
                });
                if !ok {
                    return 0;
                }
            }
            counter.rec(&mut labels)
        })
        .sum()
}

/// `((k+2)/2)^{g−1} Σ_{j=1}^{k+1} sin(jπ/(k+2))^{2−2g}`, rounded.
pub fn verlinde_closed_form(g: usize, k: usize) -> u64 {
    let kk = (k + 2) as f64;
    let sum: f64 = (1..=k + 1).map(|j| (j as f64 * PI / kk).sin().powi(2 - 2 * g as i32)).sum();
    let value = (kk / 2.0).powi(g as i32 - 1) * sum;
    value.round() as u64
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphCount {
    pub graph: String,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerlindeReport {
    pub genus: usize,
    pub level: usize,
    pub count: u64,
    pub closed_form: u64,
    pub per_graph: Vec<GraphCount>,
    pub graph_independent: bool,
    pub agree: bool,
}

/// Counts on `graphs` (or every standard graph) against the closed form.
pub fn verlinde_crosscheck_on(g: usize, k: usize, graphs: &[TrinionGraph]) -> Result<VerlindeReport> {
    if let Some(bad) = graphs.iter().find(|x| x.genus() != g) {
        return Err(Error::InvalidInput(format!("graph {} has genus {}", bad.name(), bad.genus())));
    }
    let per_graph: Vec<GraphCount> =
        graphs.iter().map(|x| GraphCount { graph: x.name().to_string(), count: count_lattice_points(x, k) }).collect();
    let count = per_graph.first().map_or(0, |c| c.count);
    let graph_independent = per_graph.iter().all(|c| c.count == count);
    let closed_form = verlinde_closed_form(g, k);
    Ok(VerlindeReport {
        genus: g,
        level: k,
        count,
        closed_form,
        agree: graph_independent && count == closed_form,
        graph_independent,
        per_graph,
    })
}

pub fn verlinde_crosscheck(g: usize, k: usize) -> Result<VerlindeReport> {
    verlinde_crosscheck_on(g, k, &standard_graphs(g)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub label: &'static str,
    pub amount: i64,
}

/// Parameter count of the torus quotient of the trinion pieces.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionLedger {
    pub genus: usize,
    pub rank: usize,
    pub trinions: usize,
    pub punctures: usize,
    pub nodes: usize,
    pub torus_dim: usize,
    /// Contributions of a single trinion.
    pub per_trinion: Vec<LedgerEntry>,
    /// `−2·torus_dim` from the quotient by the node tori.
    pub reduction: i64,
    pub total: i64,
    pub target: i64,
    pub balanced: bool,
}

pub fn quotient_dimension_bookkeeping(g: usize, n: usize) -> Result<DimensionLedger> {
    if g < 2 || n < 2 {
        return Err(Error::InvalidInput("need g ≥ 2 and n ≥ 2".into()));
    }
    let (gi, ni) = (g as i64, n as i64);
    let su = ni * ni - 1;
    let per_trinion = vec![
        LedgerEntry { label: "boundary holonomies", amount: 3 * su },
        LedgerEntry { label: "relation", amount: -su },
        LedgerEntry { label: "boundary torus framings", amount: 3 * (ni - 1) },
        LedgerEntry { label: "conjugation", amount: -su },
    ];
    let trinions = 2 * g - 2;
    let torus_dim = (3 * g - 3) * (n - 1);
    let reduction = -2 * torus_dim as i64;
    let total = trinions as i64 * per_trinion.iter().map(|e| e.amount).sum::<i64>() + reduction;
    let target = (2 * gi - 2) * su;
    Ok(DimensionLedger {
        genus: g,
        rank: n,
        trinions,
        punctures: 6 * g - 6,
        nodes: 3 * g - 3,
        torus_dim,
        per_trinion,
        reduction,
        total,
        target,
        balanced: total == target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_two_graphs() {
        let gs = standard_graphs(2).unwrap();
        assert_eq!(gs.len(), 2);
        assert!(!gs[0].is_isomorphic(&gs[1]));
        assert_eq!(enumerate_cubic_multigraphs(2).len(), 2);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_cubic_multigraphs(4).len(), 5);
        assert_eq!(enumerate_cubic_multigraphs(6).len(), 17);
    }

    #[test]
    fn families_are_valid() {
        for g in 2..=7 {
            let n = TrinionGraph::necklace(g);
            assert_eq!((n.vertices(), n.edges().len(), n.genus()), (2 * g - 2, 3 * g - 3, g));
            if g >= 3 {
                let c = TrinionGraph::caterpillar(g);
                assert_eq!(c.genus(), g);
                if g <= 5 {
                    assert!(!c.is_isomorphic(&n));
                }
            }
        }
        assert!(TrinionGraph::necklace(2).is_isomorphic(&TrinionGraph::theta()));
    }

    #[test]
    fn small_counts() {
        let theta = TrinionGraph::theta();
        assert_eq!(count_lattice_points(&theta, 0), 1);
        assert_eq!(count_lattice_points(&theta, 1), 4);
        assert_eq!(count_lattice_points(&theta, 2), 10);
        assert_eq!(count_lattice_points(&TrinionGraph::dumbbell(), 2), 10);
        assert_eq!(verlinde_closed_form(2, 1), 4);
        assert_eq!(verlinde_closed_form(2, 2), 10);
    }

    #[test]
    fn crosscheck_genus_three() {
        for k in 0..=4 {
            let r = verlinde_crosscheck(3, k).unwrap();
            assert!(r.agree, "{r:?}");
        }
    }

    #[test]
    fn ledger() {
        let l = quotient_dimension_bookkeeping(2, 2).unwrap();
        assert_eq!((l.torus_dim, l.target, l.trinions), (3, 6, 2));
        assert!(l.balanced);
        let l = quotient_dimension_bookkeeping(3, 3).unwrap();
        assert_eq!((l.torus_dim, l.target), (12, 32));
        assert!(l.balanced);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(TrinionGraph::new(2, vec![(0, 1), (0, 1), (0, 0)]).is_err());
        assert!(TrinionGraph::new(4, vec![(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3)]).is_err());
        let json = r#"{"vertices": 2, "edges": [[0,1],[0,1],[0,1]]}"#;
        let g: TrinionGraph = serde_json::from_str(json).unwrap();
        assert!(g.is_isomorphic(&TrinionGraph::theta()));
    }
}
