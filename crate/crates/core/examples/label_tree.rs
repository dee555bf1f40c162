//! Label hierarchies: loading, inspecting and chain-rule propagation.
//!
//!     cargo run --example label_tree

use hierlabel::{LabelTree, NodeSpec, Result};

fn main() -> Result<()> {
    let tree = LabelTree::chexpert();
    println!("{} labels, roots and their children:", tree.len());
    for root in tree.roots() {
        print_subtree(&tree, root, 1);
    }

    // A model emits P(label | every ancestor positive). Propagation turns
    // those into unconditional probabilities.
    let mut cond = vec![0.5; tree.len()];
    cond[tree.index_of("Lung Opacity")?] = 0.8;
    cond[tree.index_of("Consolidation")?] = 0.3;
    cond[tree.index_of("Pneumonia")?] = 0.6;
    let p = tree.propagate(&cond)?;
    for id in ["Lung Opacity", "Consolidation", "Pneumonia"] {
        let k = tree.index_of(id)?;
        println!("{id:<15} conditional {:.2}  unconditional {:.3}", cond[k], p[k]);
    }
    println!("ancestors of Pneumonia: {:?}", tree.ancestors("Pneumonia")?);

    // Custom hierarchies come from CSV (name,parent,index) or code.
    let text = "name,parent,index\nfinding,,0\nmass,finding,1\nnodule,finding,2\n";
    let small = LabelTree::parse(text)?;
    println!("parsed: leaves {:?}", small.leaves().map(|k| small.id(k)).collect::<Vec<_>>());

    let cyclic = LabelTree::build(&[NodeSpec::child("a", "b"), NodeSpec::child("b", "a")]);
    println!("cycle rejected: {}", cyclic.unwrap_err());
    Ok(())
}

fn print_subtree(tree: &LabelTree, node: usize, depth: usize) {
    println!("{}{} (index {node})", "  ".repeat(depth), tree.id(node));
    for &c in tree.children(node) {
        print_subtree(tree, c, depth + 1);
    }
}
