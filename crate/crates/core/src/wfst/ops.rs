use std::collections::{HashMap, VecDeque};

use super::{Cost, StateId, Transition, Wfst, EPSILON};
use crate::error::{Error, Result};

/// Union of two machines sharing one symbol table.
pub fn union(a: &Wfst, b: &Wfst) -> Result<Wfst> {
    union_all(&[a, b])
}

/// Union of any number of machines: a fresh start state with a costless
/// epsilon arc into each part.
pub fn union_all(parts: &[&Wfst]) -> Result<Wfst> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Argument("union of zero machines".into()))?;
    if let Some(bad) = parts.iter().position(|p| !p.shares_symbols(first)) {
        return Err(Error::Config(format!(
            "machine {bad} of the union uses a different symbol table"
        )));
    }
    let mut out = Wfst::new(first.symbols().clone());
    for part in parts {
        let offset = out.append(part);
        out.add_arc(0, Transition::epsilon(Cost::ZERO, part.start() + offset));
    }
    Ok(out)
}

/// One-or-more repetitions: every final state gets an epsilon arc back to
/// the start carrying its final cost. The empty string is accepted only if
/// the input machine already accepted it.
pub fn closure_plus(a: &Wfst) -> Wfst {
    let mut out = a.clone();
    let finals: Vec<(StateId, Cost)> = a.finals().collect();
    for (f, cost) in finals {
        out.add_arc(f, Transition::epsilon(cost, a.start()));
    }
    out
}

/// Composition of `input` (an epsilon-free acceptor) with the input side of
/// `dict`, keeping the dictionary's output labels and costs. Epsilon-input
/// dictionary arcs advance the dictionary side only. The result is trimmed;
/// when no analysis exists it is an empty machine.
pub fn left_restrict(dict: &Wfst, input: &Wfst) -> Result<Wfst> {
    if !dict.shares_symbols(input) {
        return Err(Error::Config(
            "left_restrict: dictionary and input use different symbol tables".into(),
        ));
    }
    if !input.is_epsilon_free_acceptor() {
        return Err(Error::Argument(
            "left_restrict: input must be an epsilon-free acceptor".into(),
        ));
    }

    let mut out = Wfst::new(dict.symbols().clone());
    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
    let start = (dict.start(), input.start());
    ids.insert(start, out.start());
    queue.push_back(start);

    let mut state_for = |pair: (StateId, StateId),
                         out: &mut Wfst,
                         queue: &mut VecDeque<(StateId, StateId)>|
     -> StateId {
        *ids.entry(pair).or_insert_with(|| {
            queue.push_back(pair);
            out.add_state()
        })
    };

    while let Some((d, i)) = queue.pop_front() {
        let here = state_for((d, i), &mut out, &mut queue);
        if let (Some(df), Some(inf)) = (dict.final_cost(d), input.final_cost(i)) {
            out.set_final(here, df + inf);
        }
        for arc in dict.arcs(d) {
            if arc.ilabel == EPSILON {
                let next = state_for((arc.next, i), &mut out, &mut queue);
                out.add_arc(here, Transition { next, ..*arc });
                continue;
            }
            for iarc in input.arcs(i).iter().filter(|x| x.ilabel == arc.ilabel) {
                let next = state_for((arc.next, iarc.next), &mut out, &mut queue);
                out.add_arc(
                    here,
                    Transition {
                        cost: arc.cost + iarc.cost,
                        next,
                        ..*arc
                    },
                );
            }
        }
    }
    Ok(out.trim())
}
