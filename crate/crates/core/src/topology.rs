//! Relay indexing, slot schedules and interference graphs.
//!
//! Relays are numbered `1..=K` throughout the public API. Slot schedules
//! come in two layouts: the no-interference layout spans `NK` slots with the
//! transmitter silent in the last one, and the general layout spans `NK + 1`
//! slots so every transmitted slot is forwarded.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Largest relay count accepted by the exact Hamiltonian search.
pub const MAX_HAMILTONIAN_RELAYS: usize = 12;

/// Cyclic relay predecessor: `((k - 2) mod K) + 1`.
///
/// Relay `prev_relay(k)` is the one forwarding while relay `k` listens.
pub fn prev_relay(k: usize, relays: usize) -> Result<usize> {
    if relays == 0 || k == 0 || k > relays {
        return Err(Error::RelayOutOfRange { k, relays });
    }
    Ok((k + relays - 2) % relays + 1)
}

/// Cyclic successor, the inverse of [`prev_relay`].
pub fn next_relay(k: usize, relays: usize) -> Result<usize> {
    if relays == 0 || k == 0 || k > relays {
        return Err(Error::RelayOutOfRange { k, relays });
    }
    Ok(k % relays + 1)
}

/// The `(k)` / `(n)` index maps for a fixed relay count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelayIndexMap {
    relays: usize,
}

impl RelayIndexMap {
    pub fn new(relays: usize) -> Result<Self> {
        if relays == 0 {
            return Err(Error::InvalidParameter("relay count must be positive".into()));
        }
        Ok(Self { relays })
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn prev(&self, k: usize) -> Result<usize> {
        prev_relay(k, self.relays)
    }

    /// Sub-block holding the slot that precedes slot `(n, k)`:
    /// `n - floor(prev(k) / K)`, i.e. `n - 1` for `k = 1` and `n` otherwise.
    pub fn subblock_shift(&self, n: usize, k: usize) -> Result<usize> {
        let p = self.prev(k)?;
        let back = p / self.relays;
        n.checked_sub(back)
            .ok_or_else(|| Error::InvalidParameter(format!("slot ({n}, {k}) has no predecessor")))
    }
}

/// Which slot structure to lay out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layout {
    /// `NK` slots; the final slot `(N, K)` carries no new transmitter data.
    NoInterference,
    /// `NK + 1` slots; the transmitter uses slots `1..=NK`, relays forward in `2..=NK+1`.
    General,
}

/// Activity in a single slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRole {
    pub transmitter_active: bool,
    pub receiving: Option<usize>,
    pub forwarding: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub relays: usize,
    pub subblocks: usize,
    pub layout: Layout,
    pub slots: Vec<SlotRole>,
}

impl Schedule {
    pub fn slots_total(&self) -> usize {
        self.slots.len()
    }

    /// 1-based slot numbers in which relay `k` receives.
    pub fn receive_slots(&self, k: usize) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.receiving == Some(k))
            .map(|(t, _)| t + 1)
            .collect()
    }

    /// 1-based slot numbers in which relay `k` forwards.
    pub fn forward_slots(&self, k: usize) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.forwarding == Some(k))
            .map(|(t, _)| t + 1)
            .collect()
    }

    pub fn transmitter_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.transmitter_active).count()
    }
}

/// Lays out the slot-by-slot roles of the scheme.
///
/// Slot `(n, k)` has global number `(n - 1) K + k`. Relay `k` listens in slot
/// `(n, k)` and forwards what it heard in the following slot.
pub fn build_schedule(relays: usize, subblocks: usize, layout: Layout) -> Result<Schedule> {
    if relays == 0 {
        return Err(Error::InvalidParameter("relay count must be positive".into()));
    }
    if subblocks < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 sub-blocks (got {subblocks})"
        )));
    }
    let data_slots = relays * subblocks;
    let total = match layout {
        Layout::NoInterference => data_slots,
        Layout::General => data_slots + 1,
    };
    let receives = match layout {
        // the last slot (N, K) is excluded
        Layout::NoInterference => data_slots - 1,
        Layout::General => data_slots,
    };

    let mut slots = vec![
        SlotRole {
            transmitter_active: false,
            receiving: None,
            forwarding: None,
        };
        total
    ];
    for t in 0..receives {
        let k = t % relays + 1;
        slots[t].transmitter_active = true;
        slots[t].receiving = Some(k);
        slots[t + 1].forwarding = Some(k);
    }
    Ok(Schedule {
        relays,
        subblocks,
        layout,
        slots,
    })
}

/// Undirected interference relation between relays.
///
/// Stores the interfering pairs; the complement (non-interfering pairs) is
/// what the Hamiltonian relay ordering runs on.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterferenceGraph {
    relays: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl InterferenceGraph {
    /// Graph with no interfering pairs.
    pub fn empty(relays: usize) -> Self {
        Self {
            relays,
            edges: BTreeSet::new(),
        }
    }

    /// Every pair of relays interferes.
    pub fn complete(relays: usize) -> Self {
        let mut edges = BTreeSet::new();
        for a in 1..=relays {
            for b in a + 1..=relays {
                edges.insert((a, b));
            }
        }
        Self { relays, edges }
    }

    pub fn from_edges(relays: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > relays || b > relays {
                return Err(Error::MalformedGraph(format!(
                    "edge ({a}, {b}) references a relay outside 1..={relays}"
                )));
            }
            if a == b {
                return Err(Error::MalformedGraph(format!("self-loop on relay {a}")));
            }
            edges.insert((a.min(b), a.max(b)));
        }
        Ok(Self { relays, edges })
    }

    /// Builds the interference graph whose complement is the given
    /// non-interference edge list.
    pub fn from_non_interfering(relays: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let quiet = Self::from_edges(relays, pairs)?;
        let mut g = Self::complete(relays);
        g.edges.retain(|e| !quiet.edges.contains(e));
        Ok(g)
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn interferes(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn non_interfering(&self, a: usize, b: usize) -> bool {
        a != b && a >= 1 && b >= 1 && a <= self.relays && b <= self.relays && !self.interferes(a, b)
    }
}

/// Finds a cyclic ordering of all relays in which every consecutive pair
/// (including last-to-first) is non-interfering.
///
/// Exact backtracking; `Ok(None)` means no such cycle exists.
pub fn hamiltonian_relay_order(graph: &InterferenceGraph) -> Result<Option<Vec<usize>>> {
    let n = graph.relays();
    if n > MAX_HAMILTONIAN_RELAYS {
        return Err(Error::GraphTooLarge {
            relays: n,
            max: MAX_HAMILTONIAN_RELAYS,
        });
    }
    match n {
        0 => return Err(Error::MalformedGraph("graph has no relays".into())),
        1 => return Ok(Some(vec![1])),
        2 => {
            return Ok(graph.non_interfering(1, 2).then(|| vec![1, 2]));
        }
        _ => {}
    }

    let adj: Vec<Vec<usize>> = (1..=n)
        .map(|a| (1..=n).filter(|&b| graph.non_interfering(a, b)).collect())
        .collect();
    if adj.iter().any(|nbrs| nbrs.len() < 2) {
        return Ok(None);
    }

    let mut path = vec![1];
    let mut used = vec![false; n + 1];
    used[1] = true;
    if extend(&adj, graph, &mut path, &mut used) {
        Ok(Some(path))
    } else {
        Ok(None)
    }
}

fn extend(adj: &[Vec<usize>], graph: &InterferenceGraph, path: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let n = adj.len();
    let last = *path.last().expect("path starts non-empty");
    if path.len() == n {
        return graph.non_interfering(last, path[0]);
    }
    for &next in &adj[last - 1] {
        if used[next] {
            continue;
        }
        used[next] = true;
        path.push(next);
        if extend(adj, graph, path, used) {
            return true;
        }
        path.pop();
        used[next] = false;
    }
    false
}

/// Checks that `order` visits each relay once and that each cyclic neighbour
/// pair is non-interfering.
pub fn is_valid_relay_cycle(graph: &InterferenceGraph, order: &[usize]) -> bool {
    let n = graph.relays();
    if order.len() != n || n == 0 {
        return false;
    }
    let mut seen = vec![false; n + 1];
    for &v in order {
        if v == 0 || v > n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    if n == 1 {
        return true;
    }
    if n == 2 {
        return graph.non_interfering(order[0], order[1]);
    }
    (0..n).all(|i| graph.non_interfering(order[i], order[(i + 1) % n]))
}
