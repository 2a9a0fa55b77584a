use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::PonConfig;

/// Backlog reported by an always-backlogged ONU.
pub(crate) const SATURATED_BACKLOG: u64 = 1 << 40;

/// Allocation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Giant,
    GroupGiant,
}

/// Queued upstream packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub bytes: u64,
    /// Bytes not yet granted.
    pub remaining: u64,
    pub arrival_s: f64,
}

/// Per-ONU scheduling state.
#[derive(Debug, Clone)]
pub struct OnuState {
    pub onu_id: usize,
    /// 0 means ungrouped.
    pub group_id: u32,
    pub assured_rate_bps: f64,
    /// Always backlogged; the queue is not materialized.
    pub saturated: bool,
    queue: VecDeque<Packet>,
    backlog: u64,
    cycle_allowance: u64,
    /// Bytes granted since the last service-interval boundary.
    pub bytes_granted_cycle: u64,
}

impl OnuState {
    pub fn new(onu_id: usize, group_id: u32, assured_rate_bps: f64) -> Self {
        Self {
            onu_id,
            group_id,
            assured_rate_bps,
            saturated: false,
            queue: VecDeque::new(),
            backlog: 0,
            cycle_allowance: 0,
            bytes_granted_cycle: 0,
        }
    }

    pub fn saturated(onu_id: usize, group_id: u32, assured_rate_bps: f64) -> Self {
        Self { saturated: true, ..Self::new(onu_id, group_id, assured_rate_bps) }
    }

    /// Append a packet. Arrivals must be non-decreasing in time.
    pub fn enqueue(&mut self, bytes: u64, arrival_s: f64) {
        if let Some(last) = self.queue.back() {
            assert!(arrival_s >= last.arrival_s, "out-of-order arrival");
        }
        self.queue.push_back(Packet { bytes, remaining: bytes, arrival_s });
        self.backlog += bytes;
    }

    pub fn backlog(&self) -> u64 {
        if self.saturated {
            SATURATED_BACKLOG
        } else {
            self.backlog
        }
    }

    pub fn queue(&self) -> &VecDeque<Packet> {
        &self.queue
    }

    /// Assured bytes still available in the current cycle.
    pub fn cycle_allowance(&self) -> u64 {
        self.cycle_allowance
    }

    /// Remove `bytes` from the head of the queue, reporting each packet whose
    /// last byte left.
    pub(crate) fn dequeue(&mut self, mut bytes: u64, mut on_complete: impl FnMut(&Packet)) {
        if self.saturated {
            return;
        }
        assert!(bytes <= self.backlog, "grant exceeds backlog");
        self.backlog -= bytes;
        while bytes > 0 {
            let head = self.queue.front_mut().expect("backlog accounting");
            let take = bytes.min(head.remaining);
            head.remaining -= take;
            bytes -= take;
            if head.remaining == 0 {
                let done = self.queue.pop_front().expect("non-empty");
                on_complete(&done);
            }
        }
    }
}

/// One ONU's upstream allocation in one frame, excluding overhead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub onu_id: usize,
    pub bytes: u64,
    pub frame_index: u64,
}

/// Round-robin positions carried across frames and cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DbaPointers {
    /// Index the assured phase starts from.
    pub assured: usize,
    /// Index the best-effort phase starts from.
    pub best_effort: usize,
    /// Per group: member position the redistribution starts from.
    pub group: BTreeMap<u32, usize>,
}

/// Per-ONU assured allocation followed by round-robin best effort.
///
/// At a service-interval boundary each ONU's cycle allowance becomes
/// `min(backlog, assured bytes per interval)`. Every frame then runs:
///
/// 1. assured phase: starting at the assured pointer, each ONU in index order
///    is granted `min(allowance, backlog)` capped by the room left in the
///    frame. The pointer moves to the first ONU cut short by the cap, so it
///    leads the next frame.
/// 2. best-effort phase: starting at the best-effort pointer, each ONU takes
///    `min(ungranted backlog, room)`; the pointer moves past the last ONU
///    served.
///
/// The first grant to an ONU in a frame costs `per_grant_overhead_bytes`.
pub fn giant_allocate(
    onus: &mut [OnuState],
    pointers: &mut DbaPointers,
    config: &PonConfig,
    frame_index: u64,
) -> Vec<Grant> {
    allocate(onus, pointers, config, frame_index, false)
}

/// [`giant_allocate`] plus group sharing: at each boundary the assured bytes
/// a group's members leave unused are handed round-robin to members whose
/// backlog exceeds their own allowance, ahead of any best effort.
pub fn ggiant_allocate(
    onus: &mut [OnuState],
    pointers: &mut DbaPointers,
    config: &PonConfig,
    frame_index: u64,
) -> Vec<Grant> {
    allocate(onus, pointers, config, frame_index, true)
}

fn plan_cycle(onus: &mut [OnuState], config: &PonConfig) {
    for o in onus.iter_mut() {
        o.cycle_allowance = o.backlog().min(config.assured_bytes_per_si(o.assured_rate_bps));
        o.bytes_granted_cycle = 0;
    }
}

fn share_group_surplus(onus: &mut [OnuState], pointers: &mut DbaPointers, config: &PonConfig) {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, o) in onus.iter().enumerate() {
        if o.group_id != 0 {
            groups.entry(o.group_id).or_default().push(i);
        }
    }
    for (gid, members) in groups {
        let mut pool: u64 = members
            .iter()
            .map(|&i| config.assured_bytes_per_si(onus[i].assured_rate_bps) - onus[i].cycle_allowance)
            .sum();
        if pool == 0 {
            continue;
        }
        let n = members.len();
        let start = pointers.group.get(&gid).copied().unwrap_or(0) % n;
        let mut last = None;
        for step in 0..n {
            let pos = (start + step) % n;
            let o = &mut onus[members[pos]];
            let extra = (o.backlog() - o.cycle_allowance).min(pool);
            if extra > 0 {
                o.cycle_allowance += extra;
                pool -= extra;
                last = Some(pos);
            }
            if pool == 0 {
                break;
            }
        }
        if let Some(pos) = last {
            pointers.group.insert(gid, (pos + 1) % n);
        }
    }
}

/// Room for a grant to an ONU, charging overhead on its first grant.
fn room(budget: u64, already: u64, overhead: u64) -> u64 {
    if already > 0 {
        budget
    } else {
        budget.saturating_sub(overhead)
    }
}

fn allocate(
    onus: &mut [OnuState],
    pointers: &mut DbaPointers,
    config: &PonConfig,
    frame_index: u64,
    grouped: bool,
) -> Vec<Grant> {
    let n = onus.len();
    if n == 0 {
        return Vec::new();
    }
    if frame_index.is_multiple_of(config.service_interval_frames) {
        plan_cycle(onus, config);
        if grouped {
            share_group_surplus(onus, pointers, config);
        }
    }
    let capacity = config.frame_capacity_bytes();
    let overhead = config.per_grant_overhead_bytes;
    let mut budget = capacity;
    let mut granted = vec![0u64; n];

    let start = pointers.assured % n;
    let mut first_short = None;
    for step in 0..n {
        let k = (start + step) % n;
        let want = onus[k].cycle_allowance.min(onus[k].backlog());
        if want == 0 {
            continue;
        }
        let g = want.min(room(budget, granted[k], overhead));
        if g < want && first_short.is_none() {
            first_short = Some(k);
        }
        if g > 0 {
            budget -= g + if granted[k] == 0 { overhead } else { 0 };
            granted[k] += g;
            onus[k].cycle_allowance -= g;
        }
    }
    if let Some(k) = first_short {
        pointers.assured = k;
    }

    let start = pointers.best_effort % n;
    let mut last_served = None;
    for step in 0..n {
        let k = (start + step) % n;
        let want = onus[k].backlog() - granted[k];
        let g = want.min(room(budget, granted[k], overhead));
        if g > 0 {
            budget -= g + if granted[k] == 0 { overhead } else { 0 };
            granted[k] += g;
            last_served = Some(k);
        }
    }
    if let Some(k) = last_served {
        pointers.best_effort = (k + 1) % n;
    }

    let mut used = 0;
    let mut grants = Vec::new();
    for (o, &g) in onus.iter_mut().zip(&granted) {
        if g > 0 {
            used += g + overhead;
            o.bytes_granted_cycle += g;
            grants.push(Grant { onu_id: o.onu_id, bytes: g, frame_index });
        }
    }
    assert!(used <= capacity && used == capacity - budget, "frame capacity exceeded");
    grants
}
