//! Instantiates the module tree below the root, lays out state cells and
//! binds every callee to a concrete instance.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::ast::Span;
use crate::diag::{Diagnostic, Diagnostics};
use crate::tir::*;
use crate::types::Ty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub u32);

/// What an instance slot of a node holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Node(NodeId),
    Cell(CellId),
}

#[derive(Clone, Debug)]
pub struct Node {
    pub module: ModId,
    /// Dotted path from the root; empty for the root itself.
    pub path: String,
    pub parent: Option<NodeId>,
    /// Indexed like the module's instance list.
    pub slots: Vec<Slot>,
    /// Indexed like the module's callee list.
    pub callees: Vec<NodeId>,
    /// Cells of this subtree occupy `cells.0 .. cells.1`.
    pub cells: (u32, u32),
}

#[derive(Clone, Debug)]
pub enum CellKind {
    State { ty: Ty, init: TExpr },
    Array { key: Ty, value: Ty },
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub path: String,
    pub kind: CellKind,
    pub owner: NodeId,
}

impl Cell {
    /// Type of the value held (array cells hold snapshots).
    pub fn ty(&self) -> Ty {
        match &self.kind {
            CellKind::State { ty, .. } => ty.clone(),
            CellKind::Array { key, value } => {
                Ty::Array(std::rc::Rc::new(key.clone()), std::rc::Rc::new(value.clone()))
            }
        }
    }
}

/// Instance tree plus state layout. Cells are in depth-first preorder so any
/// subtree's cells form a contiguous range.
#[derive(Clone, Debug)]
pub struct InstanceTree {
    pub nodes: Vec<Node>,
    pub cells: Vec<Cell>,
}

/// Result of resolving a dotted name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolved {
    Instance(NodeId),
    Cell(CellId),
    Function(NodeId, FnId),
}

pub const ROOT: NodeId = NodeId(0);

impl InstanceTree {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0 as usize]
    }

    /// Follows a statically resolved route from `from`.
    pub fn walk(&self, from: NodeId, route: &[RouteSeg]) -> Slot {
        let mut cur = Slot::Node(from);
        for seg in route {
            let Slot::Node(n) = cur else {
                panic!("route descends through a primitive instance");
            };
            let node = self.node(n);
            cur = match seg {
                RouteSeg::Child(i) => node.slots[*i as usize],
                RouteSeg::Callee(i) => Slot::Node(node.callees[*i as usize]),
            };
        }
        cur
    }

    pub fn find_node(&self, path: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.path == path)
            .map(|i| NodeId(i as u32))
    }

    /// Resolves `dotted` as seen from the code of instance `from`: the first
    /// segment is looked up among local instances, then callees; only code
    /// running in the root may descend further.
    pub fn resolve_path(&self, tp: &TypedProgram, from: NodeId, dotted: &[&str]) -> Result<Resolved, String> {
        let deep = from == ROOT;
        let mut cur = Resolved::Instance(from);
        for (i, seg) in dotted.iter().enumerate() {
            let Resolved::Instance(n) = cur else {
                return Err(format!("`{}` cannot be reached through a primitive or function", seg));
            };
            let node = self.node(n);
            let m = tp.module(node.module);
            let last = i + 1 == dotted.len();
            if let Some(f) = tp.find_fn(node.module, seg).filter(|_| last && (i <= 1 || deep)) {
                cur = Resolved::Function(n, f);
                continue;
            }
            if i >= 1 && !deep {
                return Err(format!(
                    "`{}` is not a child or callee of `{}`",
                    dotted[..=i].join("."),
                    self.node(from).path
                ));
            }
            if let Some((idx, _)) = m.instance(seg) {
                cur = match node.slots[idx as usize] {
                    Slot::Node(c) => Resolved::Instance(c),
                    Slot::Cell(c) => Resolved::Cell(c),
                };
            } else if let Some((idx, _)) = m.callee(seg).filter(|_| i == 0) {
                cur = Resolved::Instance(node.callees[idx as usize]);
            } else {
                return Err(format!("`{}` is not a child or callee of module `{}`", seg, m.name));
            }
        }
        Ok(cur)
    }

    /// Indented text rendering, one path per line.
    pub fn dump(&self, tp: &TypedProgram) -> String {
        let mut out = String::new();
        self.dump_node(tp, ROOT, 0, &mut out);
        out
    }

    fn dump_node(&self, tp: &TypedProgram, id: NodeId, depth: usize, out: &mut String) {
        let node = self.node(id);
        let m = tp.module(node.module);
        let pad = "  ".repeat(depth);
        let name = if node.path.is_empty() { "<root>" } else { &node.path };
        let _ = writeln!(out, "{}{} : {}", pad, name, m.name);
        for (c, target) in m.callees.iter().zip(&node.callees) {
            let _ = writeln!(out, "{}  {}.{} -> {}", pad, node.path, c.name, self.node(*target).path);
        }
        for slot in &node.slots {
            match slot {
                Slot::Node(n) => self.dump_node(tp, *n, depth + 1, out),
                Slot::Cell(c) => {
                    let cell = self.cell(*c);
                    let kind = match &cell.kind {
                        CellKind::State { ty, .. } => format!("State<{}>", ty),
                        CellKind::Array { key, value } => format!("Array<{}, {}>", key, value),
                    };
                    let _ = writeln!(out, "{}  {} : {}", pad, cell.path, kind);
                }
            }
        }
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{}.{}", prefix, name)
    }
}

/// Builds the instance tree rooted at the program's root module.
pub fn elaborate(tp: &TypedProgram) -> Result<InstanceTree, Diagnostics> {
    let mut errors = Vec::new();
    let bindings = check_wirings(tp, &mut errors);
    let root = tp.module(tp.root);
    if let Some(c) = root.callees.first() {
        errors.push(Diagnostic::new(
            c.span,
            format!("unbound callee `{}`: the root module `{}` is never instantiated, so nothing can wire it", c.name, root.name),
        ));
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    let mut tree = InstanceTree {
        nodes: Vec::new(),
        cells: Vec::new(),
    };
    build(tp, &bindings, &mut tree, tp.root, String::new(), None);
    Ok(tree)
}

/// For each module: (child instance index, callee index) -> sibling instance index.
type Bindings = HashMap<ModId, HashMap<(u32, u32), u32>>;

fn check_wirings(tp: &TypedProgram, errors: &mut Vec<Diagnostic>) -> Bindings {
    let mut all = Bindings::new();
    for (mi, m) in tp.modules.iter().enumerate() {
        let mut map: HashMap<(u32, u32), u32> = HashMap::new();
        let mut spans: HashMap<(u32, u32), Span> = HashMap::new();
        let mut attempted: HashSet<(u32, u32)> = HashSet::new();
        for w in &m.wirings {
            let Some((ci, child)) = m.instance(&w.child.name) else {
                errors.push(Diagnostic::new(
                    w.child.span,
                    format!("wiring references nonexistent instance `{}`", w.child),
                ));
                continue;
            };
            let InstKind::Module(child_mod) = child.kind else {
                errors.push(Diagnostic::new(
                    w.child.span,
                    format!("`{}` is a primitive instance and has no callees", w.child),
                ));
                continue;
            };
            let cm = tp.module(child_mod);
            let Some((cal_i, callee)) = cm.callee(&w.callee.name) else {
                errors.push(Diagnostic::new(
                    w.callee.span,
                    format!("module `{}` has no callee `{}`", cm.name, w.callee),
                ));
                continue;
            };
            // a bad wiring is reported once, not again as unbound
            attempted.insert((ci, cal_i));
            if w.target.len() != 1 {
                errors.push(Diagnostic::new(
                    w.span,
                    "wiring targets must be instances of the wiring module (a single name)",
                ));
                continue;
            }
            let t = &w.target[0];
            let Some((ti, target)) = m.instance(&t.name) else {
                errors.push(Diagnostic::new(
                    t.span,
                    format!("wiring references nonexistent instance `{}`", t),
                ));
                continue;
            };
            match target.kind {
                InstKind::Module(tm) if tm == callee.module => {}
                InstKind::Module(tm) => {
                    errors.push(Diagnostic::new(
                        t.span,
                        format!(
                            "callee `{}.{}` expects module `{}`, but `{}` is a `{}`",
                            w.child,
                            w.callee,
                            tp.module(callee.module).name,
                            t,
                            tp.module(tm).name
                        ),
                    ));
                    continue;
                }
                _ => {
                    errors.push(Diagnostic::new(
                        t.span,
                        format!("callee `{}.{}` cannot be bound to primitive instance `{}`", w.child, w.callee, t),
                    ));
                    continue;
                }
            }
            if let Some(prev) = spans.get(&(ci, cal_i)) {
                errors.push(Diagnostic::new(
                    w.span,
                    format!("duplicate wiring for callee `{}.{}` (first wired at {})", w.child, w.callee, prev),
                ));
                continue;
            }
            spans.insert((ci, cal_i), w.span);
            map.insert((ci, cal_i), ti);
        }
        // Every callee of every module-typed child must be wired.
        for (ci, inst) in m.instances.iter().enumerate() {
            let InstKind::Module(child_mod) = inst.kind else { continue };
            for (cal_i, c) in tp.module(child_mod).callees.iter().enumerate() {
                if !attempted.contains(&(ci as u32, cal_i as u32)) {
                    errors.push(Diagnostic::new(
                        inst.span,
                        format!(
                            "unbound callee `{}.{}`: add `{}.{} -> <instance>;` to module `{}`",
                            inst.name, c.name, inst.name, c.name, m.name
                        ),
                    ));
                }
            }
        }
        all.insert(ModId(mi as u32), map);
    }
    all
}

fn build(
    tp: &TypedProgram,
    bindings: &Bindings,
    tree: &mut InstanceTree,
    module: ModId,
    path: String,
    parent: Option<NodeId>,
) -> NodeId {
    let id = NodeId(tree.nodes.len() as u32);
    let first_cell = tree.cells.len() as u32;
    tree.nodes.push(Node {
        module,
        path: path.clone(),
        parent,
        slots: Vec::new(),
        callees: Vec::new(),
        cells: (first_cell, first_cell),
    });
    let m = tp.module(module);
    let mut slots = Vec::new();
    for inst in &m.instances {
        let p = join(&path, &inst.name);
        slots.push(match &inst.kind {
            InstKind::Module(c) => Slot::Node(build(tp, bindings, tree, *c, p, Some(id))),
            InstKind::State { ty, init } => {
                tree.cells.push(Cell {
                    path: p,
                    kind: CellKind::State {
                        ty: ty.clone(),
                        init: init.clone(),
                    },
                    owner: id,
                });
                Slot::Cell(CellId(tree.cells.len() as u32 - 1))
            }
            InstKind::Array { key, value } => {
                tree.cells.push(Cell {
                    path: p,
                    kind: CellKind::Array {
                        key: key.clone(),
                        value: value.clone(),
                    },
                    owner: id,
                });
                Slot::Cell(CellId(tree.cells.len() as u32 - 1))
            }
        });
    }
    // Bind children's callees now that all siblings exist.
    let map = &bindings[&module];
    for (ci, slot) in slots.iter().enumerate() {
        let Slot::Node(child) = slot else { continue };
        let child_mod = tree.nodes[child.0 as usize].module;
        let n = tp.module(child_mod).callees.len();
        let mut targets = Vec::with_capacity(n);
        for cal_i in 0..n {
            let ti = map[&(ci as u32, cal_i as u32)];
            let Slot::Node(t) = slots[ti as usize] else {
                unreachable!("wiring checked")
            };
            targets.push(t);
        }
        tree.nodes[child.0 as usize].callees = targets;
    }
    let end = tree.cells.len() as u32;
    let node = &mut tree.nodes[id.0 as usize];
    node.slots = slots;
    node.cells = (first_cell, end);
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::typecheck::check_program;

    const TX1: &str = "
        module Region {
          instance START: State<BitInt(64)>(0);
          instance END: State<BitInt(64)>(0);
          instance ATTR: State<BitInt(64)>(0);
        }
        module DRAM {
          instance storage: Array<BitInt(31), BitInt(64)>;
          mut fn store(i: BitInt(31), v: BitInt(64)) { storage.write(i, v) }
        }
        module ASC {
          instance region0: Region;
          instance region1: Region;
          instance region2: Region;
          instance region3: Region;
          callee dram: DRAM;
        }
        module CPU {
          callee asc: ASC;
          instance is_secure: State<Bool>(true);
        }
        module MiniThunderX1 {
          instance cpu: CPU;
          instance asc: ASC;
          instance dram: DRAM;
          asc.dram -> dram;
          cpu.asc -> asc;
        }
        module Main { instance miniTX1: MiniThunderX1; }";

    fn tree(src: &str) -> Result<(TypedProgram, InstanceTree), Diagnostics> {
        let tp = check_program(&parse(src).unwrap())?;
        let t = elaborate(&tp)?;
        Ok((tp, t))
    }

    #[test]
    fn mini_tx1_paths_and_bindings() {
        let (tp, t) = tree(TX1).unwrap();
        let paths: Vec<&str> = t.nodes.iter().map(|n| n.path.as_str()).collect();
        for p in ["miniTX1.cpu", "miniTX1.asc", "miniTX1.asc.region0", "miniTX1.asc.region3", "miniTX1.dram"] {
            assert!(paths.contains(&p), "{}", p);
        }
        let asc = t.find_node("miniTX1.asc").unwrap();
        assert_eq!(t.node(t.node(asc).callees[0]).path, "miniTX1.dram");
        // 4 regions x 3 registers + storage + is_secure
        assert_eq!(t.cells.len(), 14);
        let flag = t.cells.iter().find(|c| c.path == "miniTX1.cpu.is_secure").unwrap();
        match &flag.kind {
            CellKind::State { ty, init } => {
                assert_eq!(*ty, Ty::Bool);
                assert!(matches!(init.kind, TExprKind::Bool(true)));
            }
            _ => panic!(),
        }
        let r = t.resolve_path(&tp, ROOT, &["miniTX1", "cpu", "is_secure"]).unwrap();
        assert!(matches!(r, Resolved::Cell(_)));
        let r = t.resolve_path(&tp, asc, &["dram", "store"]).unwrap();
        assert!(matches!(r, Resolved::Function(..)));
        assert!(t.resolve_path(&tp, asc, &["cpu"]).is_err());
    }

    #[test]
    fn subtree_cells_are_contiguous() {
        let (_, t) = tree(TX1).unwrap();
        for n in &t.nodes {
            for c in n.cells.0..n.cells.1 {
                assert!(t.cells[c as usize].path.starts_with(&n.path));
            }
            let inside = t.cells.iter().filter(|c| n.path.is_empty() || c.path.starts_with(&format!("{}.", n.path))).count();
            assert_eq!(inside as u32, n.cells.1 - n.cells.0, "{}", n.path);
        }
    }

    #[test]
    fn deterministic() {
        let (tp, a) = tree(TX1).unwrap();
        let (_, b) = tree(TX1).unwrap();
        assert_eq!(a.dump(&tp), b.dump(&tp));
    }

    #[test]
    fn unbound_callee() {
        let src = TX1.replace("cpu.asc -> asc;", "");
        let e = tree(&src).unwrap_err();
        assert!(e.0[0].message.contains("unbound callee `cpu.asc`"), "{}", e);
    }

    #[test]
    fn wiring_errors() {
        let e = tree(&TX1.replace("cpu.asc -> asc;", "cpu.asc -> dram;")).unwrap_err();
        assert!(e.0[0].message.contains("expects module `ASC`"), "{}", e);
        let e = tree(&TX1.replace("cpu.asc -> asc;", "cpu.asc -> asc; cpu.asc -> asc;")).unwrap_err();
        assert!(e.0[0].message.contains("duplicate wiring"), "{}", e);
        let e = tree(&TX1.replace("cpu.asc -> asc;", "cpu.asc -> gpu;")).unwrap_err();
        assert!(e.0[0].message.contains("nonexistent instance `gpu`"), "{}", e);
    }
}
