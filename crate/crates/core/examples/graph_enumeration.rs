// Parisi–Wu graphs of the two-point function at first order: tree
// tuples with their noise leaves partitioned into empty vertices.

use levy_spde::graphs::{
    decompose_components, enumerate_graphs, filter_connected, prune_odd, reassemble, set_partitions, simplify,
};

pub fn run_example() -> levy_spde::Result<()> {
    let bell: Vec<usize> = (0..=6).map(|n| set_partitions(n).len()).collect();
    println!("set partitions of 0..6 leaves: {bell:?}");

    let all = enumerate_graphs(1, 2, 3, true);
    let connected = filter_connected(all.clone());
    let even = prune_odd(connected.clone());
    println!("order 1, two roots, p = 3: {} graphs, {} connected, {} with even empty vertices", all.len(), connected.len(), even.len());
    for g in &even {
        let s = simplify(g)?;
        println!("  {g}  ->  {} vertices, {} edges", s.vertices.len(), s.edges.len());
    }

    let disconnected = all.iter().find(|g| !g.is_connected()).expect("a disconnected graph exists");
    let (classes, parts) = decompose_components(disconnected);
    let back = reassemble(&classes, &parts)?;
    println!("{disconnected} splits into {} components and reassembles exactly: {}", parts.len(), &back == disconnected);
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
