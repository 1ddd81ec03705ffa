use crate::graphs::{LazyGwTree, MultiGraph, TreeError};

/// A directed edge instance out of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: u32,
    pub target: u32,
    /// The arc running the other way along the same edge.
    pub reverse: u32,
}

/// What the engine needs from a contact structure.
///
/// Arc ids are dense below [`Network::arc_bound`]. Self-loops produce no arcs.
/// `prepare` is called when a vertex becomes infected, so a lazily built
/// structure can realize that vertex's neighbors first.
pub trait Network {
    fn vertex_count(&self) -> usize;
    fn arc_bound(&self) -> usize;
    fn prepare(&mut self, v: usize) -> Result<(), TreeError>;
    fn arcs(&self, v: usize, out: &mut Vec<Arc>);
    /// `(source, target)` of arc `a`.
    fn arc_ends(&self, a: u32) -> (usize, usize);
}

/// Arcs are half-edges; the reverse arc is the matched half-edge.
impl Network for &MultiGraph {
    fn vertex_count(&self) -> usize {
        MultiGraph::vertex_count(self)
    }

    fn arc_bound(&self) -> usize {
        self.half_edge_count()
    }

    fn prepare(&mut self, _v: usize) -> Result<(), TreeError> {
        Ok(())
    }

    #[inline]
    fn arcs(&self, v: usize, out: &mut Vec<Arc>) {
        out.clear();
        for h in self.half_edges(v) {
            let p = self.partner(h);
            let t = self.owner(p);
            if t as usize != v {
                out.push(Arc { id: h, target: t, reverse: p });
            }
        }
    }

    #[inline]
    fn arc_ends(&self, a: u32) -> (usize, usize) {
        (self.owner(a) as usize, self.owner(self.partner(a)) as usize)
    }
}

/// Vertex `c > 0` owns arc `2c` (to its parent) and arc `2c + 1` (from its
/// parent). Children of unexpanded vertices are not listed; the engine expands
/// a vertex before it can infect anything.
impl Network for LazyGwTree {
    fn vertex_count(&self) -> usize {
        self.len()
    }

    fn arc_bound(&self) -> usize {
        2 * self.len()
    }

    fn prepare(&mut self, v: usize) -> Result<(), TreeError> {
        self.expand(v).map(|_| ())
    }

    #[inline]
    fn arcs(&self, v: usize, out: &mut Vec<Arc>) {
        out.clear();
        if let Some(p) = self.parent(v) {
            let c = v as u32;
            out.push(Arc { id: 2 * c, target: p as u32, reverse: 2 * c + 1 });
        }
        if let Some(kids) = self.children(v) {
            for c in kids {
                let c = c as u32;
                out.push(Arc { id: 2 * c + 1, target: c, reverse: 2 * c });
            }
        }
    }

    #[inline]
    fn arc_ends(&self, a: u32) -> (usize, usize) {
        let c = (a / 2) as usize;
        let p = self.parent(c).expect("arcs belong to non-root vertices");
        if a.is_multiple_of(2) {
            (c, p)
        } else {
            (p, c)
        }
    }
}

impl<T: Network> Network for &mut T {
    fn vertex_count(&self) -> usize {
        (**self).vertex_count()
    }

    fn arc_bound(&self) -> usize {
        (**self).arc_bound()
    }

    fn prepare(&mut self, v: usize) -> Result<(), TreeError> {
        (**self).prepare(v)
    }

    fn arcs(&self, v: usize, out: &mut Vec<Arc>) {
        (**self).arcs(v, out)
    }

    fn arc_ends(&self, a: u32) -> (usize, usize) {
        (**self).arc_ends(a)
    }
}
