use std::cmp::Ordering;

use super::{Cost, Path, PathArc, StateId, Wfst};
use crate::error::{Error, Result};

/// What a state does on its cheapest way out.
#[derive(Clone, Copy, Debug)]
enum Step {
    Stop,
    Arc(usize),
}

/// Least-cost path from the start to a final state.
///
/// On acyclic machines arc costs may be negative, and among equal-cost
/// paths the one with the lexicographically smallest sequence of arc
/// indices wins (stopping at a final state sorts before continuing).
/// Cyclic machines must have no negative cycle; there ties go to the path
/// with fewer arcs, then to the smaller arc index at each step.
pub fn best_path(m: &Wfst) -> Result<Path> {
    let plan = match m.topological_order() {
        Some(order) => acyclic_plan(m, &order),
        None => cyclic_plan(m)?,
    };
    let (dist, steps) = plan;
    if !dist[m.start()].is_finite() {
        return Err(Error::NoAnalysis("no path reaches a final state".into()));
    }

    let mut arcs = Vec::new();
    let mut s = m.start();
    loop {
        match steps[s] {
            Step::Stop => break,
            Step::Arc(index) => {
                let transition = m.arcs(s)[index];
                arcs.push(PathArc {
                    source: s,
                    index,
                    transition,
                });
                s = transition.next;
            }
        }
    }
    let final_cost = m
        .final_cost(s)
        .expect("best path must end in a final state");
    Ok(Path::new(arcs, final_cost))
}

fn acyclic_plan(m: &Wfst, order: &[StateId]) -> (Vec<Cost>, Vec<Step>) {
    let n = m.num_states();
    let mut dist = vec![Cost::INFINITY; n];
    let mut steps = vec![Step::Stop; n];
    for &s in order.iter().rev() {
        let mut best = m.final_cost(s).unwrap_or(Cost::INFINITY);
        let mut step = Step::Stop;
        for (i, a) in m.arcs(s).iter().enumerate() {
            if dist[a.next].is_infinite() {
                continue;
            }
            let c = a.cost + dist[a.next];
            // strict: earlier arcs (and stopping) win ties
            if c < best {
                best = c;
                step = Step::Arc(i);
            }
        }
        dist[s] = best;
        steps[s] = step;
    }
    (dist, steps)
}

fn cyclic_plan(m: &Wfst) -> Result<(Vec<Cost>, Vec<Step>)> {
    let n = m.num_states();
    let mut key: Vec<(Cost, usize)> = (0..n)
        .map(|s| (m.final_cost(s).unwrap_or(Cost::INFINITY), 0))
        .collect();

    let better = |a: (Cost, usize), b: (Cost, usize)| match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Equal => a.1 < b.1,
        Ordering::Greater => false,
    };

    let mut rounds = 0;
    loop {
        let mut changed = false;
        for s in 0..n {
            for a in m.arcs(s) {
                let (dc, dh) = key[a.next];
                if dc.is_infinite() {
                    continue;
                }
                let cand = (a.cost + dc, dh + 1);
                if better(cand, key[s]) {
                    key[s] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        rounds += 1;
        if rounds > n {
            return Err(Error::Validation(
                "best_path: machine has a negative-cost cycle".into(),
            ));
        }
    }

    let mut steps = vec![Step::Stop; n];
    for (s, step) in steps.iter_mut().enumerate() {
        if key[s].0.is_infinite() {
            continue;
        }
        let mut best = (m.final_cost(s).unwrap_or(Cost::INFINITY), 0usize);
        for (i, a) in m.arcs(s).iter().enumerate() {
            let (dc, dh) = key[a.next];
            if dc.is_infinite() {
                continue;
            }
            let cand = (a.cost + dc, dh + 1);
            if better(cand, best) {
                best = cand;
                *step = Step::Arc(i);
            }
        }
    }
    Ok((key.into_iter().map(|k| k.0).collect(), steps))
}
