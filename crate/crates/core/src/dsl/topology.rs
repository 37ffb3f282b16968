use std::fmt::Write as _;

use super::compile::CompiledNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDirection {
    SpeciesToReaction,
    ReactionToSpecies,
}

/// One (reaction, species) participation in the bipartite network graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub reaction: String,
    pub species: String,
    pub direction: EdgeDirection,
    /// -1 when the forward reaction consumes the species, +1 when it produces it.
    pub sign: i8,
    pub stoichiometry: u32,
    pub reversible: bool,
}

impl Edge {
    pub fn source(&self) -> &str {
        match self.direction {
            EdgeDirection::SpeciesToReaction => &self.species,
            EdgeDirection::ReactionToSpecies => &self.reaction,
        }
    }

    pub fn target(&self) -> &str {
        match self.direction {
            EdgeDirection::SpeciesToReaction => &self.reaction,
            EdgeDirection::ReactionToSpecies => &self.species,
        }
    }
}

/// Edge list in reaction declaration order, reactants before products.
pub fn export_topology(network: &CompiledNetwork) -> Vec<Edge> {
    let names: Vec<&str> = network.species_names().collect();
    let mut edges = Vec::new();
    for r in network.reactions() {
        let reversible = r.kb > 0.0;
        for &(s, n) in &r.reactants {
            edges.push(Edge {
                reaction: r.id.clone(),
                species: names[s].to_string(),
                direction: EdgeDirection::SpeciesToReaction,
                sign: -1,
                stoichiometry: n,
                reversible,
            });
        }
        for &(s, n) in &r.products {
            edges.push(Edge {
                reaction: r.id.clone(),
                species: names[s].to_string(),
                direction: EdgeDirection::ReactionToSpecies,
                sign: 1,
                stoichiometry: n,
                reversible,
            });
        }
    }
    edges
}

/// Tab-separated edge table (`source target sign stoichiometry reversible`),
/// readable by Cytoscape and most graph tools.
pub fn write_edge_list(edges: &[Edge]) -> String {
    let mut out = String::from("source\ttarget\tsign\tstoichiometry\treversible\n");
    for e in edges {
        let _ = writeln!(
            out,
            "{}\t{}\t{:+}\t{}\t{}",
            e.source(),
            e.target(),
            e.sign,
            e.stoichiometry,
            e.reversible
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{compile_network, parse_model};

    #[test]
    fn single_reaction_two_edges() {
        let m = parse_model("species A charge=0 formula=X\nspecies B charge=0 formula=X\nreaction r: A -> B kf=1 kb=0\n").unwrap();
        let edges = export_topology(&compile_network(&m));
        assert_eq!(edges.len(), 2);
        assert_eq!((edges[0].source(), edges[0].target()), ("A", "r"));
        assert_eq!((edges[1].source(), edges[1].target()), ("r", "B"));
        assert_eq!(
            write_edge_list(&edges),
            "source\ttarget\tsign\tstoichiometry\treversible\nA\tr\t-1\t1\tfalse\nr\tB\t+1\t1\tfalse\n"
        );
    }

    #[test]
    fn empty_network_has_no_edges() {
        let edges = export_topology(&compile_network(&Default::default()));
        assert!(edges.is_empty());
    }
}
