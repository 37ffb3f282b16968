//! Bipartite species/reaction graph of the reference model as an edge list.
use nutrinet::assets::load_reference_model;
use nutrinet::dsl::{compile_network, export_topology, write_edge_list};

fn main() {
    let net = compile_network(&load_reference_model().unwrap());
    let edges = export_topology(&net);
    print!("{}", write_edge_list(&edges));
    eprintln!("{} reactions, {} edges", net.reactions().len(), edges.len());

    let i = net.index_of("Ca2+").unwrap();
    eprintln!("Ca2+ superposes {} terms", net.terms(i).len());
}
