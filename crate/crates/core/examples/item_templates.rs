//! Fixed questions and a parameterized template in one lecture. The same
//! seed always renders the same instance.
//!
//! ```text
//! cargo run --example item_templates
//! ```

use std::collections::BTreeMap;

use tutorweb::item_bank::{presented_order, Answer, AnswerExpression, Item, ParamSpec, QuestionTemplate};
use tutorweb::{ContentTree, ItemBank, NodeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut tree = ContentTree::new();
    let d = tree.add_node(None, NodeKind::Department, "Mathematics", "")?;
    let c = tree.add_node(Some(&d), NodeKind::Course, "Arithmetic", "")?;
    let t = tree.add_node(Some(&c), NodeKind::Tutorial, "Sums", "")?;
    let lecture = tree.add_node(Some(&t), NodeKind::Lecture, "Adding", "")?;

    let mut bank = ItemBank::new();
    let fixed = bank.add_question(
        &tree,
        &lecture,
        "2 + 2 = ?",
        vec![Answer::new("4", true), Answer::new("3", false), Answer::new("5", false)],
        true,
    )?;
    let template = QuestionTemplate {
        id: "add-ab".into(),
        lecture: lecture.clone(),
        stem_template: "{a} + {b} = ?".into(),
        format: Default::default(),
        shuffle: true,
        parameter_specs: BTreeMap::from([
            ("a".into(), ParamSpec { min: 1.0, max: 9.0, step: 1.0 }),
            ("b".into(), ParamSpec { min: 10.0, max: 50.0, step: 10.0 }),
        ]),
        answer_expressions: vec![
            AnswerExpression { expression: "a + b".into(), correct: true },
            AnswerExpression { expression: "a * b".into(), correct: false },
            AnswerExpression { expression: "a - b".into(), correct: false },
        ],
    };
    bank.insert(&tree, Item::Template(template))?;

    for id in bank.lecture_items(&lecture) {
        for seed in [1u64, 2, 3, 1] {
            let q = bank.render(&id, seed)?;
            let shown: Vec<&str> = presented_order(&q, seed).iter().map(|&i| q.answers[i].text.as_str()).collect();
            println!("{id} seed {seed}: {:<10} [{}] correct: {}", q.stem, shown.join(" | "), q.answers[q.correct_index()].text);
        }
    }
    println!("fixed question id: {fixed}");
    Ok(())
}
