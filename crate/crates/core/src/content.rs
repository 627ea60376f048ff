//! Teaching-material tree.
//!
//! Departments hold courses, courses hold tutorials, tutorials hold lectures
//! and lectures hold slides. Containment is single-parent everywhere; a
//! tutorial may additionally be linked into any number of other courses.
//! Slides carry the actual material; every other level is a grouping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Department,
    Course,
    Tutorial,
    Lecture,
    Slide,
}

impl NodeKind {
    /// The kind a node of this kind must be contained in.
    pub fn parent_kind(self) -> Option<NodeKind> {
        match self {
            NodeKind::Department => None,
            NodeKind::Course => Some(NodeKind::Department),
            NodeKind::Tutorial => Some(NodeKind::Course),
            NodeKind::Lecture => Some(NodeKind::Tutorial),
            NodeKind::Slide => Some(NodeKind::Lecture),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Department => "department",
            NodeKind::Course => "course",
            NodeKind::Tutorial => "tutorial",
            NodeKind::Lecture => "lecture",
            NodeKind::Slide => "slide",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declared markup of a slide or question body. Stored, never interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextFormat {
    Latex,
    #[default]
    Plain,
    Structured,
    Html,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachmentKind {
    Example,
    Detail,
    Reference,
    Figure,
}

/// Additional material linked to a slide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub kind: AttachmentKind,
    /// Text, or a reference to an uploaded image payload for figures.
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub title: String,
    pub body: String,
    pub format: TextFormat,
    pub attachments: Vec<Attachment>,
    pub order_index: u32,
    pub parent: Option<NodeId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContentError {
    #[error("unknown parent node {0}")]
    UnknownParent(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("a {child} cannot be placed under {}", parent.map(|k| k.as_str()).unwrap_or("the root"))]
    InvalidKindPairing { parent: Option<NodeKind>, child: NodeKind },
    #[error("node {id} is a {actual}, expected a {expected}")]
    KindMismatch { id: NodeId, expected: NodeKind, actual: NodeKind },
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
}

/// A structural problem found by [`ContentTree::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub problem: String,
}

/// The content tree plus the tutorial-to-course link relation.
#[derive(Debug, Clone, Default)]
pub struct ContentTree {
    nodes: BTreeMap<NodeId, ContentNode>,
    children: BTreeMap<Option<NodeId>, Vec<NodeId>>,
    /// Extra courses a tutorial is linked into, beyond its containing course.
    course_links: BTreeMap<NodeId, BTreeSet<NodeId>>,
    next_id: u64,
}

impl ContentTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: &NodeId) -> Option<&ContentNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ContentNode> {
        self.nodes.values()
    }

    /// Adds a node with a generated id and returns that id.
    pub fn add_node(
        &mut self,
        parent: Option<&NodeId>,
        kind: NodeKind,
        title: &str,
        body: &str,
    ) -> Result<NodeId, ContentError> {
        let id = loop {
            self.next_id += 1;
            let candidate = NodeId(format!("{}-{}", kind.as_str(), self.next_id));
            if !self.nodes.contains_key(&candidate) {
                break candidate;
            }
        };
        self.insert_node(id.clone(), parent, kind, title, body, TextFormat::Plain)?;
        Ok(id)
    }

    /// Adds a node under a caller-chosen id (used by import).
    pub fn insert_node(
        &mut self,
        id: NodeId,
        parent: Option<&NodeId>,
        kind: NodeKind,
        title: &str,
        body: &str,
        format: TextFormat,
    ) -> Result<(), ContentError> {
        if self.nodes.contains_key(&id) {
            return Err(ContentError::DuplicateId(id));
        }
        let parent_kind = match parent {
            Some(p) => Some(self.nodes.get(p).ok_or_else(|| ContentError::UnknownParent(p.clone()))?.kind),
            None => None,
        };
        if kind.parent_kind() != parent_kind {
            return Err(ContentError::InvalidKindPairing { parent: parent_kind, child: kind });
        }
        let siblings = self.children.entry(parent.cloned()).or_default();
        let order_index =
            siblings.iter().filter_map(|s| self.nodes.get(s)).map(|n| n.order_index + 1).max().unwrap_or(0);
        siblings.push(id.clone());
        self.nodes.insert(
            id.clone(),
            ContentNode {
                id,
                kind,
                title: title.to_owned(),
                body: body.to_owned(),
                format,
                attachments: Vec::new(),
                order_index,
                parent: parent.cloned(),
            },
        );
        Ok(())
    }

    pub fn set_format(&mut self, id: &NodeId, format: TextFormat) -> Result<(), ContentError> {
        self.nodes.get_mut(id).ok_or_else(|| ContentError::UnknownNode(id.clone()))?.format = format;
        Ok(())
    }

    pub fn attach(&mut self, slide: &NodeId, attachment: Attachment) -> Result<(), ContentError> {
        let node = self.nodes.get_mut(slide).ok_or_else(|| ContentError::UnknownNode(slide.clone()))?;
        if node.kind != NodeKind::Slide {
            return Err(ContentError::KindMismatch { id: slide.clone(), expected: NodeKind::Slide, actual: node.kind });
        }
        node.attachments.push(attachment);
        Ok(())
    }

    fn expect_kind(&self, id: &NodeId, kind: NodeKind) -> Result<&ContentNode, ContentError> {
        let node = self.nodes.get(id).ok_or_else(|| ContentError::UnknownNode(id.clone()))?;
        if node.kind != kind {
            return Err(ContentError::KindMismatch { id: id.clone(), expected: kind, actual: node.kind });
        }
        Ok(node)
    }

    /// Links a tutorial into a course. Returns every course the tutorial
    /// now appears under. Linking into the containing course is a no-op.
    pub fn link_tutorial(&mut self, tutorial: &NodeId, course: &NodeId) -> Result<BTreeSet<NodeId>, ContentError> {
        let parent = self.expect_kind(tutorial, NodeKind::Tutorial)?.parent.clone();
        self.expect_kind(course, NodeKind::Course)?;
        if parent.as_ref() != Some(course) {
            self.course_links.entry(tutorial.clone()).or_default().insert(course.clone());
        }
        Ok(self.courses_of(tutorial))
    }

    /// All courses a tutorial appears under, containing course included.
    pub fn courses_of(&self, tutorial: &NodeId) -> BTreeSet<NodeId> {
        let mut out: BTreeSet<NodeId> = self.course_links.get(tutorial).cloned().unwrap_or_default();
        if let Some(p) = self.nodes.get(tutorial).and_then(|n| n.parent.clone()) {
            out.insert(p);
        }
        out
    }

    /// Extra (non-containing) course links of a tutorial.
    pub fn extra_course_links(&self, tutorial: &NodeId) -> Vec<NodeId> {
        self.course_links.get(tutorial).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }

    /// Contained children in `order_index` order. `None` lists departments.
    pub fn children(&self, parent: Option<&NodeId>) -> Vec<&ContentNode> {
        let mut out: Vec<&ContentNode> =
            self.children.get(&parent.cloned()).into_iter().flatten().filter_map(|id| self.nodes.get(id)).collect();
        out.sort_by_key(|n| n.order_index);
        out
    }

    /// Tutorials shown under a course: contained ones first (by order
    /// index), then linked ones by id.
    pub fn tutorials_in_course(&self, course: &NodeId) -> Vec<&ContentNode> {
        let mut out = self.children(Some(course));
        for (tutorial, courses) in &self.course_links {
            if courses.contains(course) {
                if let Some(n) = self.nodes.get(tutorial) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Depth-first walk following course links, yielding `(depth, node)`.
    /// A linked tutorial (and its subtree) is visited once per course.
    pub fn traverse(&self) -> Vec<(usize, &ContentNode)> {
        let mut out = Vec::new();
        for dept in self.children(None) {
            self.walk(dept, 0, &mut out);
        }
        out
    }

    fn walk<'a>(&'a self, node: &'a ContentNode, depth: usize, out: &mut Vec<(usize, &'a ContentNode)>) {
        out.push((depth, node));
        let kids = if node.kind == NodeKind::Course {
            self.tutorials_in_course(&node.id)
        } else {
            self.children(Some(&node.id))
        };
        for child in kids {
            self.walk(child, depth + 1, out);
        }
    }

    /// Structural check over the whole tree. Empty on any tree built via
    /// `add_node`/`link_tutorial`.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for node in self.nodes.values() {
            let parent_kind = node.parent.as_ref().and_then(|p| self.nodes.get(p)).map(|p| p.kind);
            if node.parent.is_some() && parent_kind.is_none() {
                out.push(Violation { node: node.id.clone(), problem: "dangling parent".into() });
            } else if node.kind.parent_kind() != parent_kind {
                out.push(Violation {
                    node: node.id.clone(),
                    problem: format!("{} under {:?}", node.kind, parent_kind),
                });
            }
            if !node.attachments.is_empty() && node.kind != NodeKind::Slide {
                out.push(Violation { node: node.id.clone(), problem: "attachments on a non-slide".into() });
            }
        }
        for siblings in self.children.values() {
            let mut seen = BTreeSet::new();
            for id in siblings {
                if let Some(n) = self.nodes.get(id) {
                    if !seen.insert(n.order_index) {
                        out.push(Violation {
                            node: id.clone(),
                            problem: format!("duplicate order index {}", n.order_index),
                        });
                    }
                }
            }
        }
        for (tutorial, courses) in &self.course_links {
            if self.nodes.get(tutorial).map(|n| n.kind) != Some(NodeKind::Tutorial) {
                out.push(Violation { node: tutorial.clone(), problem: "course link on a non-tutorial".into() });
            }
            for c in courses {
                if self.nodes.get(c).map(|n| n.kind) != Some(NodeKind::Course) {
                    out.push(Violation { node: tutorial.clone(), problem: format!("linked to non-course {c}") });
                }
            }
        }
        out
    }

    /// Lecture view: slides in order, body only, no attachments.
    pub fn export_lecture(&self, lecture: &NodeId) -> Result<LectureDocument, ContentError> {
        let node = self.expect_kind(lecture, NodeKind::Lecture)?;
        Ok(LectureDocument {
            id: node.id.clone(),
            title: node.title.clone(),
            slides: self
                .children(Some(lecture))
                .into_iter()
                .map(|s| SlideSection {
                    id: s.id.clone(),
                    title: s.title.clone(),
                    body: s.body.clone(),
                    format: s.format,
                    attachments: Vec::new(),
                })
                .collect(),
        })
    }

    /// Tutorial view: every lecture and slide, attachments included.
    pub fn export_tutorial(&self, tutorial: &NodeId) -> Result<Handout, ContentError> {
        let node = self.expect_kind(tutorial, NodeKind::Tutorial)?;
        let lectures = self
            .children(Some(tutorial))
            .into_iter()
            .map(|lec| LectureDocument {
                id: lec.id.clone(),
                title: lec.title.clone(),
                slides: self
                    .children(Some(&lec.id))
                    .into_iter()
                    .map(|s| SlideSection {
                        id: s.id.clone(),
                        title: s.title.clone(),
                        body: s.body.clone(),
                        format: s.format,
                        attachments: s.attachments.clone(),
                    })
                    .collect(),
            })
            .collect();
        Ok(Handout { id: node.id.clone(), title: node.title.clone(), lectures })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlideSection {
    pub id: NodeId,
    pub title: String,
    pub body: String,
    pub format: TextFormat,
    pub attachments: Vec<Attachment>,
}

/// The slide-deck view of a lecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LectureDocument {
    pub id: NodeId,
    pub title: String,
    pub slides: Vec<SlideSection>,
}

/// The handout view of a tutorial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Handout {
    pub id: NodeId,
    pub title: String,
    pub lectures: Vec<LectureDocument>,
}

impl Handout {
    pub fn slide_count(&self) -> usize {
        self.lectures.iter().map(|l| l.slides.len()).sum()
    }
}

fn render_slides(out: &mut String, slides: &[SlideSection], level: usize) {
    let hashes = "#".repeat(level);
    for slide in slides {
        let _ = writeln!(out, "\n{hashes} {}\n", slide.title);
        if !slide.body.is_empty() {
            let _ = writeln!(out, "{}", slide.body);
        }
        for a in &slide.attachments {
            let kind = match a.kind {
                AttachmentKind::Example => "Example",
                AttachmentKind::Detail => "Detail",
                AttachmentKind::Reference => "Reference",
                AttachmentKind::Figure => "Figure",
            };
            let _ = writeln!(out, "\n> {kind}: {}", a.body);
        }
    }
}

impl LectureDocument {
    /// Heading-structured text rendering.
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        render_slides(&mut out, &self.slides, 2);
        out
    }
}

impl Handout {
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for lec in &self.lectures {
            let _ = writeln!(out, "\n## {}", lec.title);
            render_slides(&mut out, &lec.slides, 3);
        }
        out
    }
}
