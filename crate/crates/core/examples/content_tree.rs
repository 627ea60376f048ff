//! Builds a small department/course/tutorial/lecture/slide tree, links a
//! tutorial into a second course and renders the tutorial handout.
//!
//! ```text
//! cargo run --example content_tree
//! ```

use tutorweb::content::{Attachment, AttachmentKind};
use tutorweb::{ContentTree, NodeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut tree = ContentTree::new();
    let dept = tree.add_node(None, NodeKind::Department, "Mathematics", "")?;
    let stats = tree.add_node(Some(&dept), NodeKind::Course, "Statistics 101", "")?;
    let calc = tree.add_node(Some(&dept), NodeKind::Course, "Calculus 101", "")?;
    let tut = tree.add_node(Some(&stats), NodeKind::Tutorial, "Probability", "")?;
    let lec = tree.add_node(Some(&tut), NodeKind::Lecture, "Discrete distributions", "")?;
    let slide = tree.add_node(Some(&lec), NodeKind::Slide, "Binomial", "P(X = k) = C(n, k) p^k (1 - p)^(n - k)")?;
    tree.attach(&slide, Attachment { kind: AttachmentKind::Example, body: "Ten coin flips, k = 3.".into() })?;
    tree.add_node(Some(&lec), NodeKind::Slide, "Poisson", "P(X = k) = e^(-l) l^k / k!")?;

    tree.link_tutorial(&tut, &calc)?;
    let courses: Vec<_> = tree.courses_of(&tut).into_iter().map(|c| tree.get(&c).unwrap().title.clone()).collect();
    println!("'Probability' is used in: {}", courses.join(", "));

    for (depth, node) in tree.traverse() {
        println!("{}{} {}", "  ".repeat(depth), node.kind.as_str(), node.title);
    }
    println!("violations: {}", tree.validate().len());
    println!("\n{}", tree.export_tutorial(&tut)?.render());
    Ok(())
}
