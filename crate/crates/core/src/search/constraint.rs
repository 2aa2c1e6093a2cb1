use alloc::rc::Rc;

use crate::graph::Vertex;
use crate::pibt::ConstraintSet;

/// Node of a per-configuration constraint tree.
///
/// The path to the root pins one distinct agent per level. The root has depth
/// zero and pins nobody.
#[derive(Debug)]
pub struct ConstraintNode {
    parent: Option<Rc<ConstraintNode>>,
    who: u32,
    at: Vertex,
    depth: u32,
}

impl ConstraintNode {
    pub fn root() -> Rc<Self> {
        Rc::new(ConstraintNode {
            parent: None,
            who: u32::MAX,
            at: Vertex(u32::MAX),
            depth: 0,
        })
    }

    pub fn child(parent: &Rc<Self>, who: usize, at: Vertex) -> Rc<Self> {
        debug_assert!(parent.ancestors().all(|(a, _)| a != who));
        Rc::new(ConstraintNode {
            parent: Some(parent.clone()),
            who: who as u32,
            at,
            depth: parent.depth + 1,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    /// `(agent, vertex)` pins from this node up to, not including, the root.
    pub fn ancestors(&self) -> impl Iterator<Item = (usize, Vertex)> + '_ {
        let mut cur = Some(self);
        core::iter::from_fn(move || {
            let node = cur?;
            node.parent.as_ref()?;
            cur = node.parent.as_deref();
            Some((node.who as usize, node.at))
        })
    }

    pub fn constraints(&self) -> ConstraintSet {
        let mut pins: alloc::vec::Vec<_> = self.ancestors().collect();
        pins.reverse();
        pins.into_iter().collect()
    }
}
