// Rooted trees of the perturbative recursion: the table by order, the
// multiplicities, and the cut/attach bijection.

use levy_spde::trees::{attach, cut, enumerate_trees, format_tree_records, RootedTree};

pub fn run_example() -> levy_spde::Result<()> {
    let p = 3;
    for j in 0..=2 {
        let trees = enumerate_trees(j, p);
        let weight: u64 = trees.iter().map(|(_, m)| m.0).sum();
        println!("order {j}: {} trees, total multiplicity {weight}", trees.len());
    }
    print!("{}", format_tree_records(&enumerate_trees(1, p)));

    let tree: RootedTree = "(N (N N F) F)".parse()?;
    let children = cut(&tree)?;
    let back = attach(children.clone(), p)?;
    println!("cut {tree} -> {children:?}; attach -> {back}");
    assert_eq!(back, tree);
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
