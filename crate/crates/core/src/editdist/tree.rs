//! Zhang–Shasha ordered tree edit distance, mapping backtrace and tree edits.

use super::{CostModel, Edit, EditScript, TreeEdit};
use crate::error::{Error, Result};
use crate::states::{Label, TreeState};

/// Post-order view of a tree: labels, leftmost leaf descendants and keyroots.
#[derive(Debug, Clone)]
pub struct PreparedTree<'a> {
    labels: Vec<&'a Label>,
    lml: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    keyroots: Vec<usize>,
}

impl<'a> PreparedTree<'a> {
    pub fn new(t: &'a TreeState) -> Self {
        fn walk<'a>(t: &'a TreeState, p: &mut PreparedTree<'a>) -> usize {
            let kids: Vec<usize> = t.children.iter().map(|c| walk(c, p)).collect();
            let idx = p.labels.len();
            let lml = kids.first().map_or(idx, |&k| p.lml[k]);
            p.labels.push(&t.label);
            p.lml.push(lml);
            p.parent.push(None);
            for &k in &kids {
                p.parent[k] = Some(idx);
            }
            p.children.push(kids);
            idx
        }
        let mut p = PreparedTree {
            labels: Vec::new(),
            lml: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            keyroots: Vec::new(),
        };
        walk(t, &mut p);
        let n = p.labels.len();
        let mut last = vec![None; n];
        for i in 0..n {
            last[p.lml[i]] = Some(i);
        }
        p.keyroots = last.into_iter().flatten().collect();
        p.keyroots.sort_unstable();
        p
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn root(&self) -> usize {
        self.labels.len() - 1
    }

    /// Root-relative paths of every node, indexed by post-order number.
    fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for i in (0..self.len()).rev() {
            for (k, &c) in self.children[i].iter().enumerate() {
                let mut p = out[i].clone();
                p.push(k + 1);
                out[c] = p;
            }
        }
        out
    }

    fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root()];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.children[i].iter().rev());
        }
        out
    }
}

fn best(first: f64, delete: f64, insert: f64) -> f64 {
    let mut v = first;
    if delete < v {
        v = delete;
    }
    if insert < v {
        v = insert;
    }
    v
}

struct Solver<'p, 'a> {
    a: &'p PreparedTree<'a>,
    b: &'p PreparedTree<'a>,
    c: &'p CostModel,
    del_a: Vec<f64>,
    ins_b: Vec<f64>,
    td: Vec<f64>,
}

impl<'p, 'a> Solver<'p, 'a> {
    fn new(a: &'p PreparedTree<'a>, b: &'p PreparedTree<'a>, c: &'p CostModel) -> Self {
        let del_a = a.labels.iter().map(|l| c.indel(l)).collect();
        let ins_b = b.labels.iter().map(|l| c.indel(l)).collect();
        let mut s = Solver {
            a,
            b,
            c,
            del_a,
            ins_b,
            td: vec![0.0; a.len() * b.len()],
        };
        for &i in &a.keyroots {
            for &j in &b.keyroots {
                s.forest(i, j);
            }
        }
        s
    }

    fn distance(&self) -> f64 {
        self.td[self.td.len() - 1]
    }

    /// Forest distance table for the subtrees rooted at `i` and `j`; records
    /// tree distances for the pairs it settles.
    fn forest(&mut self, i: usize, j: usize) -> (Vec<f64>, usize) {
        let (a, b) = (self.a, self.b);
        let nb = b.len();
        let (li, lj) = (a.lml[i], b.lml[j]);
        let rows = i - li + 2;
        let cols = j - lj + 2;
        let mut fd = vec![0.0; rows * cols];
        for r in 1..rows {
            fd[r * cols] = fd[(r - 1) * cols] + self.del_a[li + r - 1];
        }
        for k in 1..cols {
            fd[k] = fd[k - 1] + self.ins_b[lj + k - 1];
        }
        for r in 1..rows {
            let di = li + r - 1;
            for k in 1..cols {
                let dj = lj + k - 1;
                let del = fd[(r - 1) * cols + k] + self.del_a[di];
                let ins = fd[r * cols + k - 1] + self.ins_b[dj];
                if a.lml[di] == li && b.lml[dj] == lj {
                    let rel =
                        fd[(r - 1) * cols + k - 1] + self.c.relabel(a.labels[di], b.labels[dj]);
                    let v = best(rel, del, ins);
                    fd[r * cols + k] = v;
                    self.td[di * nb + dj] = v;
                } else {
                    let sub =
                        fd[(a.lml[di] - li) * cols + (b.lml[dj] - lj)] + self.td[di * nb + dj];
                    fd[r * cols + k] = best(sub, del, ins);
                }
            }
        }
        (fd, cols)
    }

    /// Optimal mapping as (x, y) post-order pairs. Ties prefer mapping a
    /// pair, then deleting, then inserting.
    fn mapping(&mut self) -> Vec<(usize, usize)> {
        let (a, b) = (self.a, self.b);
        let nb = b.len();
        let mut pairs = Vec::new();
        let mut stack = vec![(a.root(), b.root())];
        while let Some((i, j)) = stack.pop() {
            let (fd, cols) = self.forest(i, j);
            let (li, lj) = (a.lml[i], b.lml[j]);
            let (mut r, mut k) = (i - li + 1, j - lj + 1);
            while r > 0 || k > 0 {
                let v = fd[r * cols + k];
                if r > 0 && k > 0 {
                    let (di, dj) = (li + r - 1, lj + k - 1);
                    if a.lml[di] == li && b.lml[dj] == lj {
                        let rel = self.c.relabel(a.labels[di], b.labels[dj]);
                        if v == fd[(r - 1) * cols + k - 1] + rel {
                            pairs.push((di, dj));
                            r -= 1;
                            k -= 1;
                            continue;
                        }
                    } else {
                        let (r2, k2) = (a.lml[di] - li, b.lml[dj] - lj);
                        if v == fd[r2 * cols + k2] + self.td[di * nb + dj] {
                            stack.push((di, dj));
                            r = r2;
                            k = k2;
                            continue;
                        }
                    }
                }
                if r > 0 && v == fd[(r - 1) * cols + k] + self.del_a[li + r - 1] {
                    r -= 1;
                    continue;
                }
                debug_assert!(k > 0 && v == fd[r * cols + k - 1] + self.ins_b[lj + k - 1]);
                k -= 1;
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

pub(super) fn prepared_distance(a: &PreparedTree<'_>, b: &PreparedTree<'_>, c: &CostModel) -> f64 {
    Solver::new(a, b, c).distance()
}

pub fn tree_distance_value(x: &TreeState, y: &TreeState, c: &CostModel) -> f64 {
    prepared_distance(&PreparedTree::new(x), &PreparedTree::new(y), c)
}

/// Distance and an optimal node mapping, given as pairs of post-order node
/// numbers `(x, y)`.
pub fn tree_mapping(x: &TreeState, y: &TreeState, c: &CostModel) -> (f64, Vec<(usize, usize)>) {
    let (a, b) = (PreparedTree::new(x), PreparedTree::new(y));
    let mut s = Solver::new(&a, &b, c);
    let d = s.distance();
    (d, s.mapping())
}

struct Mapping {
    x_to_y: Vec<Option<usize>>,
    y_to_x: Vec<Option<usize>>,
}

impl Mapping {
    fn new(pairs: &[(usize, usize)], na: usize, nb: usize) -> Self {
        let mut m = Mapping {
            x_to_y: vec![None; na],
            y_to_x: vec![None; nb],
        };
        for &(i, j) in pairs {
            m.x_to_y[i] = Some(j);
            m.y_to_x[j] = Some(i);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeId {
    X(usize),
    Y(usize),
}

/// Working tree used while turning a mapping into a script.
#[derive(Debug, Clone)]
struct WNode {
    id: NodeId,
    label: Label,
    children: Vec<WNode>,
}

pub(crate) trait Node: Sized {
    fn kids(&mut self) -> &mut Vec<Self>;
}

impl Node for TreeState {
    fn kids(&mut self) -> &mut Vec<Self> {
        &mut self.children
    }
}

impl Node for WNode {
    fn kids(&mut self) -> &mut Vec<Self> {
        &mut self.children
    }
}

fn bad_path(path: &[usize]) -> Error {
    Error::Address(format!("no node at path {path:?}"))
}

fn node_at<'n, T: Node>(root: &'n mut T, path: &[usize]) -> Result<&'n mut T> {
    let mut cur = root;
    for &i in path {
        let kids = cur.kids();
        if i == 0 || i > kids.len() {
            return Err(bad_path(path));
        }
        cur = &mut kids[i - 1];
    }
    Ok(cur)
}

fn delete_at<T: Node>(root: &mut T, path: &[usize]) -> Result<()> {
    let Some((&last, parent)) = path.split_last() else {
        let kids = root.kids();
        if kids.len() != 1 {
            return Err(Error::Address(format!(
                "the root can only be deleted when it has exactly one child, it has {}",
                kids.len()
            )));
        }
        let child = kids.pop().expect("one child");
        *root = child;
        return Ok(());
    };
    let p = node_at(root, parent)?;
    let kids = p.kids();
    if last == 0 || last > kids.len() {
        return Err(bad_path(path));
    }
    let mut node = kids.remove(last - 1);
    let promoted = std::mem::take(node.kids());
    kids.splice(last - 1..last - 1, promoted);
    Ok(())
}

fn insert_at<T: Node>(
    root: &mut T,
    parent: Option<&[usize]>,
    (first, count): (usize, usize),
    make: impl FnOnce(Vec<T>) -> T,
) -> Result<()> {
    let Some(parent) = parent else {
        if (first, count) != (1, 1) {
            return Err(Error::Address(format!(
                "a new root adopts the old root, so its child span must be (1, 1), got ({first}, {count})"
            )));
        }
        let old = std::mem::replace(root, make(Vec::new()));
        root.kids().push(old);
        return Ok(());
    };
    let p = node_at(root, parent)?;
    let kids = p.kids();
    if first == 0 || first > kids.len() + 1 || count > kids.len() + 1 - first {
        return Err(Error::Address(format!(
            "child span ({first}, {count}) out of range for a node with {} children",
            kids.len()
        )));
    }
    let adopted: Vec<T> = kids.drain(first - 1..first - 1 + count).collect();
    kids.insert(first - 1, make(adopted));
    Ok(())
}

pub(super) fn apply(x: &TreeState, e: &TreeEdit) -> Result<TreeState> {
    let mut out = x.clone();
    match e {
        TreeEdit::Delete { path } => delete_at(&mut out, path)?,
        TreeEdit::Insert {
            path,
            label,
            child_span,
        } => insert_at(&mut out, path.as_deref(), *child_span, |children| {
            TreeState {
                label: label.clone(),
                children,
            }
        })?,
        TreeEdit::Relabel { path, label } => node_at(&mut out, path)?.label = label.clone(),
    }
    Ok(out)
}

pub(super) fn invert(e: &TreeEdit, x: &TreeState) -> Result<TreeEdit> {
    apply(x, e)?;
    Ok(match e {
        TreeEdit::Delete { path } => {
            let node = x.subtree(path).ok_or_else(|| bad_path(path))?;
            match path.split_last() {
                None => TreeEdit::Insert {
                    path: None,
                    label: node.label.clone(),
                    child_span: (1, 1),
                },
                Some((&last, parent)) => TreeEdit::Insert {
                    path: Some(parent.to_vec()),
                    label: node.label.clone(),
                    child_span: (last, node.children.len()),
                },
            }
        }
        TreeEdit::Insert { path: None, .. } => TreeEdit::Delete { path: Vec::new() },
        TreeEdit::Insert {
            path: Some(p),
            child_span: (first, _),
            ..
        } => {
            let mut path = p.clone();
            path.push(*first);
            TreeEdit::Delete { path }
        }
        TreeEdit::Relabel { path, .. } => TreeEdit::Relabel {
            path: path.clone(),
            label: x.subtree(path).ok_or_else(|| bad_path(path))?.label.clone(),
        },
    })
}

pub(super) fn cost(x: &TreeState, e: &TreeEdit, c: &CostModel) -> Result<f64> {
    apply(x, e)?;
    Ok(match e {
        TreeEdit::Delete { path } => c.indel(&x.subtree(path).ok_or_else(|| bad_path(path))?.label),
        TreeEdit::Insert { label, .. } => c.indel(label),
        TreeEdit::Relabel { path, label } => {
            c.relabel(&x.subtree(path).ok_or_else(|| bad_path(path))?.label, label)
        }
    })
}

fn path_of(root: &WNode, id: NodeId) -> Option<Vec<usize>> {
    if root.id == id {
        return Some(Vec::new());
    }
    for (k, c) in root.children.iter().enumerate() {
        if let Some(mut p) = path_of(c, id) {
            p.insert(0, k + 1);
            return Some(p);
        }
    }
    None
}

fn working_tree(t: &TreeState) -> WNode {
    fn walk(t: &TreeState, next: &mut usize) -> WNode {
        let children = t.children.iter().map(|c| walk(c, next)).collect();
        let id = NodeId::X(*next);
        *next += 1;
        WNode {
            id,
            label: t.label.clone(),
            children,
        }
    }
    walk(t, &mut 0)
}

fn strip(w: &WNode) -> TreeState {
    TreeState {
        label: w.label.clone(),
        children: w.children.iter().map(strip).collect(),
    }
}

/// Distance and a minimum-cost script from `x` to `y`.
///
/// The script deletes unmapped nodes of `x` (post-order), relabels mapped
/// nodes (pre-order) and inserts unmapped nodes of `y` (pre-order). When
/// neither root is mapped it starts by wrapping `x` in the root of `y`.
pub fn tree_distance(x: &TreeState, y: &TreeState, c: &CostModel) -> (f64, EditScript) {
    let (a, b) = (PreparedTree::new(x), PreparedTree::new(y));
    let mut s = Solver::new(&a, &b, c);
    let dist = s.distance();
    let m = Mapping::new(&s.mapping(), a.len(), b.len());

    let mut work = working_tree(x);
    let mut edits = Vec::new();
    let mut push = |work: &mut WNode, e: TreeEdit, id: Option<NodeId>| {
        match &e {
            TreeEdit::Delete { path } => delete_at(work, path),
            TreeEdit::Relabel { path, label } => {
                node_at(work, path).map(|n| n.label = label.clone())
            }
            TreeEdit::Insert {
                path,
                label,
                child_span,
            } => insert_at(work, path.as_deref(), *child_span, |children| WNode {
                id: id.expect("inserted nodes carry an id"),
                label: label.clone(),
                children,
            }),
        }
        .expect("script edits are addressed within the working tree");
        edits.push(Edit::Tree(e));
    };

    let wrapped = m.x_to_y[a.root()].is_none() && m.y_to_x[b.root()].is_none();
    if wrapped {
        let e = TreeEdit::Insert {
            path: None,
            label: b.labels[b.root()].clone(),
            child_span: (1, 1),
        };
        push(&mut work, e, Some(NodeId::Y(b.root())));
    }
    for i in 0..a.len() {
        if m.x_to_y[i].is_none() {
            let path = path_of(&work, NodeId::X(i)).expect("x node present");
            push(&mut work, TreeEdit::Delete { path }, None);
        }
    }
    for i in a.preorder() {
        if let Some(j) = m.x_to_y[i] {
            if a.labels[i] != b.labels[j] {
                let path = path_of(&work, NodeId::X(i)).expect("x node present");
                let e = TreeEdit::Relabel {
                    path,
                    label: b.labels[j].clone(),
                };
                push(&mut work, e, None);
            }
        }
    }
    for w in b.preorder() {
        if m.y_to_x[w].is_some() || (wrapped && w == b.root()) {
            continue;
        }
        let label = b.labels[w].clone();
        let Some(p) = b.parent[w] else {
            let e = TreeEdit::Insert {
                path: None,
                label,
                child_span: (1, 1),
            };
            push(&mut work, e, Some(NodeId::Y(w)));
            continue;
        };
        let pid = match m.y_to_x[p] {
            Some(i) => NodeId::X(i),
            None => NodeId::Y(p),
        };
        let ppath = path_of(&work, pid).expect("parent inserted before child");
        let parent = node_at(&mut work, &ppath).expect("parent present");
        let (mut left, mut inside) = (0, 0);
        for child in &parent.children {
            let v = match child.id {
                NodeId::X(i) => m.x_to_y[i].expect("unmapped nodes are deleted first"),
                NodeId::Y(j) => j,
            };
            if v < b.lml[w] {
                left += 1;
            } else if v < w {
                inside += 1;
            }
        }
        let e = TreeEdit::Insert {
            path: Some(ppath),
            label,
            child_span: (left + 1, inside),
        };
        push(&mut work, e, Some(NodeId::Y(w)));
    }
    debug_assert_eq!(&strip(&work), y);
    (
        dist,
        EditScript {
            edits,
            total_cost: dist,
        },
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Empty,
    Left,
    Inside,
    Right,
    Mixed,
}

/// Single edits on `x`, each addressed within `x`, that are consistent with
/// an optimal mapping to `y`: applying any one of them lowers the distance to
/// `y` by exactly its own cost.
pub(super) fn candidate_edits(x: &TreeState, y: &TreeState, c: &CostModel) -> Vec<Edit> {
    let (a, b) = (PreparedTree::new(x), PreparedTree::new(y));
    let mut s = Solver::new(&a, &b, c);
    let m = Mapping::new(&s.mapping(), a.len(), b.len());
    let paths = a.paths();
    let mut out = Vec::new();

    for (i, path) in paths.iter().enumerate() {
        if m.x_to_y[i].is_some() {
            continue;
        }
        if i == a.root() && a.children[i].len() != 1 {
            continue;
        }
        out.push(TreeEdit::Delete { path: path.clone() });
    }
    for i in a.preorder() {
        if let Some(j) = m.x_to_y[i] {
            if a.labels[i] != b.labels[j] {
                out.push(TreeEdit::Relabel {
                    path: paths[i].clone(),
                    label: b.labels[j].clone(),
                });
            }
        }
    }
    for w in b.preorder() {
        if m.y_to_x[w].is_some() {
            continue;
        }
        let label = b.labels[w].clone();
        let Some(p) = b.parent[w] else {
            out.push(TreeEdit::Insert {
                path: None,
                label,
                child_span: (1, 1),
            });
            continue;
        };
        let Some(q) = m.y_to_x[p] else { continue };
        let sides: Vec<Side> = a.children[q]
            .iter()
            .map(|&child| {
                let mut side = Side::Empty;
                for k in a.lml[child]..=child {
                    let Some(v) = m.x_to_y[k] else { continue };
                    let here = if v < b.lml[w] {
                        Side::Left
                    } else if v < w {
                        Side::Inside
                    } else {
                        Side::Right
                    };
                    side = match side {
                        Side::Empty => here,
                        s if s == here => s,
                        _ => Side::Mixed,
                    };
                }
                side
            })
            .collect();
        if sides.contains(&Side::Mixed) {
            continue;
        }
        let inside: Vec<usize> = (0..sides.len())
            .filter(|&k| sides[k] == Side::Inside)
            .collect();
        let span = match (inside.first(), inside.last()) {
            (Some(&lo), Some(&hi)) => {
                if sides[lo..=hi]
                    .iter()
                    .any(|s| !matches!(s, Side::Inside | Side::Empty))
                {
                    continue;
                }
                (lo + 1, hi - lo + 1)
            }
            _ => {
                let after = sides
                    .iter()
                    .rposition(|s| *s == Side::Left)
                    .map_or(0, |k| k + 1);
                (after + 1, 0)
            }
        };
        out.push(TreeEdit::Insert {
            path: Some(paths[q].clone()),
            label,
            child_span: span,
        });
    }
    out.into_iter().map(Edit::Tree).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::editdist::{apply_edit, edit_cost, invert_edit};
    use crate::states::{label, parse_tree, State};
    use proptest::prelude::*;

    fn t(s: &str) -> TreeState {
        parse_tree(s).unwrap()
    }

    fn d(x: &str, y: &str) -> f64 {
        tree_distance_value(&t(x), &t(y), &CostModel::unit())
    }

    #[test]
    fn basic_distances() {
        assert_eq!(d("a", "a"), 0.0);
        assert_eq!(d("a", "b"), 1.0);
        assert_eq!(d("a(b,c)", "a(b)"), 1.0);
        assert_eq!(d("a(b(c))", "a(c)"), 1.0);
        // classic Zhang–Shasha example
        assert_eq!(d("f(d(a,c(b)),e)", "f(c(d(a,b)),e)"), 2.0);
    }

    #[test]
    fn keyroots_of_small_tree() {
        let x = t("f(d(a,c(b)),e)");
        let p = PreparedTree::new(&x);
        // post-order: a b c d e f
        assert_eq!(p.lml, vec![0, 1, 1, 0, 4, 0]);
        assert_eq!(p.keyroots, vec![2, 4, 5]);
    }

    #[test]
    fn delete_promotes_children() {
        let x = State::tree("a(b(c))");
        let e = Edit::Tree(TreeEdit::Delete { path: vec![1] });
        assert_eq!(apply_edit(&x, &e).unwrap(), State::tree("a(c)"));
        let root = Edit::Tree(TreeEdit::Delete { path: vec![] });
        assert_eq!(apply_edit(&x, &root).unwrap(), State::tree("b(c)"));
        assert!(apply_edit(&State::tree("a(b,c)"), &root).is_err());
    }

    #[test]
    fn insert_adopts_children() {
        let x = State::tree("a(b,c,d)");
        let e = Edit::Tree(TreeEdit::Insert {
            path: Some(vec![]),
            label: label("x"),
            child_span: (2, 2),
        });
        assert_eq!(apply_edit(&x, &e).unwrap(), State::tree("a(b,x(c,d))"));
        let wrap = Edit::Tree(TreeEdit::Insert {
            path: None,
            label: label("r"),
            child_span: (1, 1),
        });
        assert_eq!(apply_edit(&x, &wrap).unwrap(), State::tree("r(a(b,c,d))"));
        let bad = Edit::Tree(TreeEdit::Insert {
            path: Some(vec![]),
            label: label("x"),
            child_span: (3, 2),
        });
        assert!(matches!(apply_edit(&x, &bad), Err(Error::Address(_))));
    }

    #[test]
    fn single_relabel_candidate() {
        let cands = candidate_edits(&t("a(b,c)"), &t("a(b,d)"), &CostModel::unit());
        assert_eq!(
            cands,
            vec![Edit::Tree(TreeEdit::Relabel {
                path: vec![2],
                label: label("d")
            })]
        );
        assert!(candidate_edits(&t("a(b)"), &t("a(b)"), &CostModel::unit()).is_empty());
    }

    #[test]
    fn roots_never_mapped_under_typed_costs() {
        let c = CostModel::typed(":");
        let x = t("p:a(q:b,q:c)");
        let y = t("r:a(q:b)");
        let (dist, script) = tree_distance(&x, &y, &c);
        assert_eq!(dist, 3.0);
        assert_eq!(script.apply(&State::Tree(x)).unwrap(), State::Tree(y));
    }

    fn arb_small_tree() -> impl Strategy<Value = TreeState> {
        let leaf = "[ab]".prop_map(|s| TreeState::leaf(label(&s)));
        leaf.prop_recursive(3, 8, 3, |inner| {
            ("[abc]", prop::collection::vec(inner, 0..3))
                .prop_map(|(l, c)| TreeState::node(label(&l), c))
        })
    }

    proptest! {
        #[test]
        fn script_replays_with_exact_cost(x in arb_small_tree(), y in arb_small_tree()) {
            let c = CostModel::unit();
            let (dist, script) = tree_distance(&x, &y, &c);
            prop_assert_eq!(dist, tree_distance_value(&y, &x, &c));
            let mut cur = State::Tree(x.clone());
            let mut total = 0.0;
            for e in &script.edits {
                total += edit_cost(&cur, e, &c).unwrap();
                cur = apply_edit(&cur, e).unwrap();
            }
            prop_assert_eq!(cur, State::Tree(y));
            prop_assert_eq!(total, dist);
        }

        #[test]
        fn candidates_lie_on_shortest_paths(x in arb_small_tree(), y in arb_small_tree()) {
            let c = CostModel::unit();
            let dist = tree_distance_value(&x, &y, &c);
            let sx = State::Tree(x.clone());
            let cands = candidate_edits(&x, &y, &c);
            prop_assert_eq!(cands.is_empty(), dist == 0.0);
            for e in cands {
                let next = apply_edit(&sx, &e).unwrap();
                let step = edit_cost(&sx, &e, &c).unwrap();
                let rest = tree_distance_value(next.as_tree().unwrap(), &y, &c);
                prop_assert_eq!(rest + step, dist, "{}", e);
            }
        }

        #[test]
        fn invert_round_trips(x in arb_small_tree(), pick in 0usize..64, kind in 0u8..3, first in 1usize..4, count in 0usize..3) {
            let paths = PreparedTree::new(&x).paths();
            let path = paths[pick % paths.len()].clone();
            let node = x.subtree(&path).unwrap();
            let e = match kind {
                0 => TreeEdit::Delete { path },
                1 => {
                    let first = first.min(node.children.len() + 1);
                    let count = count.min(node.children.len() + 1 - first);
                    TreeEdit::Insert { path: Some(path), label: label("z"), child_span: (first, count) }
                }
                _ => TreeEdit::Relabel { path, label: label("z") },
            };
            let sx = State::Tree(x);
            let e = Edit::Tree(e);
            if let Ok(next) = apply_edit(&sx, &e) {
                let inv = invert_edit(&e, &sx).unwrap();
                prop_assert_eq!(apply_edit(&next, &inv).unwrap(), sx);
            }
        }
    }
}
