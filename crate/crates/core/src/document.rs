//! Content import/export document: the node tree as nested records plus the
//! lecture items.
//!
//! ```json
//! {
//!   "tree": [{"id": "...", "kind": "department", "title": "...", "body": "",
//!             "format": "plain", "attachments": [], "children": [...],
//!             "course_links": []}],
//!   "items": [{"id": "q1", "lecture": "...", "stem": "...", "format": "plain",
//!              "shuffle": true, "answers": [{"text": "...", "correct": true}]},
//!             {"id": "t1", "lecture": "...", "stem_template": "...",
//!              "parameter_specs": {...}, "answer_expressions": [...]}]
//! }
//! ```

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{Attachment, ContentError, ContentTree, NodeId, NodeKind, TextFormat};
use crate::item_bank::{Item, ItemBank, ItemError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub kind: NodeKind,
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub format: TextFormat,
    #[serde(default)]
    pub attachments: Vec<Attachment>,
    #[serde(default)]
    pub children: Vec<NodeRecord>,
    /// Extra courses a tutorial is linked into (beyond its parent).
    #[serde(default)]
    pub course_links: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContentDocument {
    #[serde(default)]
    pub tree: Vec<NodeRecord>,
    #[serde(default)]
    pub items: Vec<Item>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error("item {id}: {source}")]
    Item { id: String, source: ItemError },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn node_record(content: &ContentTree, id: &NodeId) -> NodeRecord {
    let node = content.get(id).expect("id from traversal");
    NodeRecord {
        id: node.id.clone(),
        kind: node.kind,
        title: node.title.clone(),
        body: node.body.clone(),
        format: node.format,
        attachments: node.attachments.clone(),
        children: content.children(Some(id)).into_iter().map(|c| node_record(content, &c.id)).collect(),
        course_links: if node.kind == NodeKind::Tutorial { content.extra_course_links(id) } else { Vec::new() },
    }
}

impl ContentDocument {
    pub fn tree_only(content: &ContentTree) -> Self {
        ContentDocument {
            tree: content.children(None).into_iter().map(|d| node_record(content, &d.id)).collect(),
            items: Vec::new(),
        }
    }

    pub fn export(content: &ContentTree, bank: &ItemBank) -> Self {
        ContentDocument { items: bank.items().cloned().collect(), ..Self::tree_only(content) }
    }

    /// Adds the document's nodes and items to `content` and `bank`. Nothing
    /// is changed unless the whole document applies cleanly.
    pub fn import_into(&self, content: &mut ContentTree, bank: &mut ItemBank) -> Result<ImportSummary, DocumentError> {
        let mut new_content = content.clone();
        let mut new_bank = bank.clone();
        let mut links = Vec::new();
        let mut nodes = 0;
        fn insert(
            tree: &mut ContentTree,
            parent: Option<&NodeId>,
            rec: &NodeRecord,
            links: &mut Vec<(NodeId, NodeId)>,
            count: &mut usize,
        ) -> Result<(), ContentError> {
            tree.insert_node(rec.id.clone(), parent, rec.kind, &rec.title, &rec.body, rec.format)?;
            *count += 1;
            for a in &rec.attachments {
                tree.attach(&rec.id, a.clone())?;
            }
            for c in &rec.course_links {
                links.push((rec.id.clone(), c.clone()));
            }
            for child in &rec.children {
                insert(tree, Some(&rec.id), child, links, count)?;
            }
            Ok(())
        }
        for root in &self.tree {
            insert(&mut new_content, None, root, &mut links, &mut nodes)?;
        }
        for (tutorial, course) in &links {
            new_content.link_tutorial(tutorial, course)?;
        }
        for item in &self.items {
            new_bank
                .insert(&new_content, item.clone())
                .map_err(|source| DocumentError::Item { id: item.id().to_string(), source })?;
        }
        *content = new_content;
        *bank = new_bank;
        Ok(ImportSummary { nodes, items: self.items.len(), links: links.len() })
    }

    pub fn load(path: &Path) -> Result<Self, DocumentError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    /// Writes atomically via a sibling temporary file.
    pub fn save(&self, path: &Path) -> Result<(), DocumentError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    pub nodes: usize,
    pub items: usize,
    pub links: usize,
}
