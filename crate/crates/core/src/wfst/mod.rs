//! Weighted finite-state transducers over the tropical semiring.
//!
//! Machines are plain arc lists with integer state ids. Only the
//! operations the segmenter needs are provided: union, plus-closure,
//! left-restriction by an input acceptor, and least-cost path.

mod cost;
mod ops;
mod shortest;
mod symbols;
mod text;

use std::collections::BTreeSet;
use std::sync::Arc;

pub use cost::Cost;
pub use ops::{closure_plus, left_restrict, union, union_all};
pub use shortest::best_path;
pub use symbols::{Label, SymbolTable, EPSILON, EPSILON_NAME};

use crate::error::{Error, Result};

pub type StateId = usize;

/// One arc leaving a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub ilabel: Label,
    pub olabel: Label,
    pub cost: Cost,
    pub next: StateId,
}

impl Transition {
    pub fn new(ilabel: Label, olabel: Label, cost: Cost, next: StateId) -> Self {
        Transition {
            ilabel,
            olabel,
            cost,
            next,
        }
    }

    pub fn epsilon(cost: Cost, next: StateId) -> Self {
        Transition::new(EPSILON, EPSILON, cost, next)
    }
}

#[derive(Clone, Debug, Default)]
struct State {
    final_cost: Option<Cost>,
    arcs: Vec<Transition>,
}

#[derive(Clone, Debug)]
pub struct Wfst {
    symbols: Arc<SymbolTable>,
    start: StateId,
    states: Vec<State>,
}

impl Wfst {
    /// A machine with a single, non-final start state.
    pub fn new(symbols: Arc<SymbolTable>) -> Wfst {
        Wfst {
            symbols,
            start: 0,
            states: vec![State::default()],
        }
    }

    /// Accepts exactly `labels` at cost zero.
    pub fn linear_acceptor(symbols: Arc<SymbolTable>, labels: &[Label]) -> Wfst {
        let mut m = Wfst::new(symbols);
        let mut cur = m.start;
        for &l in labels {
            let next = m.add_state();
            m.add_arc(cur, Transition::new(l, l, Cost::ZERO, next));
            cur = next;
        }
        m.set_final(cur, Cost::ZERO);
        m
    }

    pub fn symbols(&self) -> &Arc<SymbolTable> {
        &self.symbols
    }

    pub fn shares_symbols(&self, other: &Wfst) -> bool {
        Arc::ptr_eq(&self.symbols, &other.symbols)
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn set_start(&mut self, s: StateId) {
        assert!(s < self.states.len(), "start state {s} out of range");
        self.start = s;
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::default());
        self.states.len() - 1
    }

    /// Marks `s` final. The final cost must be finite.
    pub fn set_final(&mut self, s: StateId, cost: Cost) {
        assert!(cost.is_finite(), "final cost must be finite");
        self.states[s].final_cost = Some(cost);
    }

    pub fn add_arc(&mut self, from: StateId, arc: Transition) {
        assert!(
            from < self.states.len() && arc.next < self.states.len(),
            "arc endpoint out of range"
        );
        self.states[from].arcs.push(arc);
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, s: StateId) -> &[Transition] {
        &self.states[s].arcs
    }

    pub fn final_cost(&self, s: StateId) -> Option<Cost> {
        self.states[s].final_cost
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.states[s].final_cost.is_some()
    }

    pub fn finals(&self) -> impl Iterator<Item = (StateId, Cost)> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.final_cost.map(|c| (i, c)))
    }

    /// True when no final state is reachable from the start.
    pub fn is_empty(&self) -> bool {
        let seen = self.accessible();
        !self.finals().any(|(s, _)| seen[s])
    }

    /// Every arc has identical input and output labels and none is epsilon.
    pub fn is_epsilon_free_acceptor(&self) -> bool {
        self.states.iter().all(|s| {
            s.arcs
                .iter()
                .all(|a| a.ilabel == a.olabel && a.ilabel != EPSILON)
        })
    }

    /// The set of non-epsilon input labels.
    pub fn input_alphabet(&self) -> BTreeSet<Label> {
        self.states
            .iter()
            .flat_map(|s| s.arcs.iter().map(|a| a.ilabel))
            .filter(|&l| l != EPSILON)
            .collect()
    }

    /// Copies all states of `other` into `self`, returning the id offset.
    pub(crate) fn append(&mut self, other: &Wfst) -> StateId {
        let offset = self.states.len();
        self.states.extend(other.states.iter().map(|s| {
            State {
                final_cost: s.final_cost,
                arcs: s
                    .arcs
                    .iter()
                    .map(|a| Transition {
                        next: a.next + offset,
                        ..*a
                    })
                    .collect(),
            }
        }));
        offset
    }

    fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(s) = stack.pop() {
            for a in &self.states[s].arcs {
                if !seen[a.next] {
                    seen[a.next] = true;
                    stack.push(a.next);
                }
            }
        }
        seen
    }

    fn coaccessible(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (s, st) in self.states.iter().enumerate() {
            for a in &st.arcs {
                reverse[a.next].push(s);
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<StateId> = self.finals().map(|(s, _)| s).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &reverse[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Removes states that are not on some start-to-final path, keeping the
    /// relative order of the remaining states and arcs. An empty relation
    /// yields a single non-final start state.
    pub fn trim(&self) -> Wfst {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let keep: Vec<bool> = acc.iter().zip(&coacc).map(|(a, c)| *a && *c).collect();
        if !keep[self.start] {
            return Wfst::new(self.symbols.clone());
        }
        let mut remap = vec![usize::MAX; self.states.len()];
        let mut next_id = 0;
        for (s, k) in keep.iter().enumerate() {
            if *k {
                remap[s] = next_id;
                next_id += 1;
            }
        }
        let states = self
            .states
            .iter()
            .enumerate()
            .filter(|(s, _)| keep[*s])
            .map(|(_, st)| State {
                final_cost: st.final_cost,
                arcs: st
                    .arcs
                    .iter()
                    .filter(|a| keep[a.next])
                    .map(|a| Transition {
                        next: remap[a.next],
                        ..*a
                    })
                    .collect(),
            })
            .collect();
        Wfst {
            symbols: self.symbols.clone(),
            start: remap[self.start],
            states,
        }
    }

    /// States in topological order, or `None` if the machine has a cycle.
    pub fn topological_order(&self) -> Option<Vec<StateId>> {
        let n = self.states.len();
        let mut indegree = vec![0usize; n];
        for st in &self.states {
            for a in &st.arcs {
                indegree[a.next] += 1;
            }
        }
        let mut ready: Vec<StateId> = (0..n).rev().filter(|&s| indegree[s] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = ready.pop() {
            order.push(s);
            for a in self.states[s].arcs.iter().rev() {
                indegree[a.next] -= 1;
                if indegree[a.next] == 0 {
                    ready.push(a.next);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Every complete path of an acyclic machine, in depth-first arc order.
    /// Fails on cyclic machines or when more than `limit` paths exist.
    pub fn paths(&self, limit: usize) -> Result<Vec<Path>> {
        if !self.is_acyclic() {
            return Err(Error::Argument(
                "path enumeration requires an acyclic machine".into(),
            ));
        }
        let mut out = Vec::new();
        let mut stack: Vec<PathArc> = Vec::new();
        self.collect_paths(self.start, &mut stack, &mut out, limit)?;
        Ok(out)
    }

    fn collect_paths(
        &self,
        s: StateId,
        stack: &mut Vec<PathArc>,
        out: &mut Vec<Path>,
        limit: usize,
    ) -> Result<()> {
        if let Some(fc) = self.final_cost(s) {
            if out.len() == limit {
                return Err(Error::Argument(format!("more than {limit} paths")));
            }
            out.push(Path::new(stack.clone(), fc));
        }
        for (index, a) in self.arcs(s).iter().enumerate() {
            stack.push(PathArc {
                source: s,
                index,
                transition: *a,
            });
            self.collect_paths(a.next, stack, out, limit)?;
            stack.pop();
        }
        Ok(())
    }
}

/// One traversed arc: its source state, position in that state's arc list,
/// and the arc itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathArc {
    pub source: StateId,
    pub index: usize,
    pub transition: Transition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub arcs: Vec<PathArc>,
    pub final_cost: Cost,
    pub total_cost: Cost,
}

impl Path {
    pub fn new(arcs: Vec<PathArc>, final_cost: Cost) -> Path {
        let total_cost = arcs
            .iter()
            .map(|a| a.transition.cost)
            .chain(std::iter::once(final_cost))
            .sum();
        Path {
            arcs,
            final_cost,
            total_cost,
        }
    }

    pub fn input_labels(&self) -> Vec<Label> {
        self.arcs
            .iter()
            .map(|a| a.transition.ilabel)
            .filter(|&l| l != EPSILON)
            .collect()
    }

    pub fn output_labels(&self) -> Vec<Label> {
        self.arcs
            .iter()
            .map(|a| a.transition.olabel)
            .filter(|&l| l != EPSILON)
            .collect()
    }

    /// Output symbols joined by single spaces.
    pub fn output_string(&self, symbols: &SymbolTable) -> String {
        self.output_labels()
            .into_iter()
            .map(|l| symbols.name(l).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn input_string(&self, symbols: &SymbolTable) -> String {
        self.input_labels()
            .into_iter()
            .map(|l| symbols.name(l).unwrap_or_default())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(t: &SymbolTable, s: &str) -> Vec<Label> {
        s.chars().map(|c| t.intern_char(c)).collect()
    }

    #[test]
    fn linear_acceptor_shape() {
        let t = SymbolTable::new();
        let m = Wfst::linear_acceptor(t.clone(), &chars(&t, "日文"));
        assert_eq!(m.num_states(), 3);
        assert_eq!(m.num_arcs(), 2);
        assert!(m.is_epsilon_free_acceptor());
        assert!(m.is_final(2));
        let paths = m.paths(10).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].input_string(&t), "日文");
    }

    #[test]
    fn trim_drops_dead_states() {
        let t = SymbolTable::new();
        let a = t.intern("a");
        let mut m = Wfst::new(t);
        let live = m.add_state();
        let dead = m.add_state();
        m.add_arc(0, Transition::new(a, a, Cost::ZERO, dead));
        m.add_arc(0, Transition::new(a, a, Cost::new(1.0), live));
        m.set_final(live, Cost::ZERO);
        let trimmed = m.trim();
        assert_eq!(trimmed.num_states(), 2);
        assert_eq!(trimmed.num_arcs(), 1);
        assert_eq!(trimmed.arcs(0)[0].cost, Cost::new(1.0));
    }

    #[test]
    fn trim_of_empty_relation() {
        let t = SymbolTable::new();
        let a = t.intern("a");
        let mut m = Wfst::new(t);
        let s = m.add_state();
        m.add_arc(0, Transition::new(a, a, Cost::ZERO, s));
        assert!(m.is_empty());
        let trimmed = m.trim();
        assert_eq!(trimmed.num_states(), 1);
        assert!(trimmed.is_empty());
    }

    #[test]
    fn cycles_detected() {
        let t = SymbolTable::new();
        let a = t.intern("a");
        let mut m = Wfst::new(t);
        m.add_arc(0, Transition::new(a, a, Cost::ZERO, 0));
        m.set_final(0, Cost::ZERO);
        assert!(!m.is_acyclic());
        assert!(m.paths(10).is_err());
    }

    #[test]
    fn path_total_includes_final_cost() {
        let t = SymbolTable::new();
        let a = t.intern("a");
        let mut m = Wfst::new(t);
        let s = m.add_state();
        m.add_arc(0, Transition::new(a, a, Cost::new(1.5), s));
        m.set_final(s, Cost::new(0.25));
        let p = &m.paths(1).unwrap()[0];
        assert_eq!(p.total_cost, Cost::new(1.75));
    }
}
