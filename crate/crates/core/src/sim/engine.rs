use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use super::{ChainParams, ChainTopology, DephasingScope, NoiseMode, RunOutcome, Schedule, SimConfig, SimError};
use crate::model;
use crate::quantum::{self, BellState, Qubit, TwoQubitState, WernerParameter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    LinkReady(usize),
    SwapDone(usize),
}

#[derive(Debug)]
struct Event {
    time: f64,
    node: usize,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.node.cmp(&self.node))
            .then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LinkStatus {
    Idle,
    Running,
    Done,
}

#[derive(Debug, Clone, Copy)]
struct QubitClock {
    updated_at: f64,
    attempt_mark: f64,
}

#[derive(Debug)]
struct Pair {
    state: TwoQubitState,
    left_node: usize,
    right_node: usize,
    swaps: u32,
    left: QubitClock,
    right: QubitClock,
    available: bool,
}

#[derive(Debug, Default)]
struct Node {
    attempting_since: Option<f64>,
    attempt_time: f64,
    swapping: bool,
    left: Option<usize>,
    right: Option<usize>,
}

impl Node {
    fn idle(&self) -> bool {
        self.attempting_since.is_none() && !self.swapping
    }

    fn attempt_clock(&self, now: f64) -> f64 {
        self.attempt_time + self.attempting_since.map_or(0.0, |t0| now - t0)
    }
}

struct Engine<'a, R: Rng + ?Sized> {
    topology: &'a ChainTopology,
    params: &'a ChainParams,
    config: &'a SimConfig,
    rng: &'a mut R,
    nodes: Vec<Node>,
    links: Vec<LinkStatus>,
    pairs: Vec<Pair>,
    queue: BinaryHeap<Event>,
    seq: u64,
}

pub(super) fn run<R: Rng + ?Sized>(
    topology: &ChainTopology,
    params: &ChainParams,
    config: &SimConfig,
    rng: &mut R,
) -> Result<RunOutcome, SimError> {
    let n = topology.n_nodes();
    let mut engine = Engine {
        topology,
        params,
        config,
        rng,
        nodes: (0..n).map(|_| Node::default()).collect(),
        links: vec![LinkStatus::Idle; n - 1],
        pairs: Vec::new(),
        queue: BinaryHeap::new(),
        seq: 0,
    };
    engine.start_links(0.0)?;
    while let Some(event) = engine.queue.pop() {
        let now = event.time;
        match event.kind {
            Kind::LinkReady(k) => engine.finish_link(k, now)?,
            Kind::SwapDone(id) => {
                engine.nodes[event.node].swapping = false;
                engine.pairs[id].available = true;
            }
        }
        if let Some(outcome) = engine.delivered(now)? {
            return Ok(outcome);
        }
        engine.swap_ready_nodes(now)?;
        engine.start_links(now)?;
    }
    unreachable!("event queue drained before the end nodes were connected")
}

impl<R: Rng + ?Sized> Engine<'_, R> {
    fn push(&mut self, time: f64, node: usize, kind: Kind) {
        self.seq += 1;
        self.queue.push(Event {
            time,
            node,
            seq: self.seq,
            kind,
        });
    }

    fn full(&self) -> bool {
        self.config.noise_mode == NoiseMode::Full
    }

    fn can_start(&self, k: usize) -> bool {
        if self.links[k] != LinkStatus::Idle || !self.nodes[k].idle() || !self.nodes[k + 1].idle() {
            return false;
        }
        match self.config.schedule {
            Schedule::Greedy => true,
            Schedule::Sequential => k == 0 || self.links[k - 1] == LinkStatus::Done,
        }
    }

    fn start_links(&mut self, now: f64) -> Result<(), SimError> {
        for k in 0..self.links.len() {
            if !self.can_start(k) {
                continue;
            }
            let attempts = super::sample_attempt_count(self.params.links[k].p_suc, self.rng)?;
            self.links[k] = LinkStatus::Running;
            self.nodes[k].attempting_since = Some(now);
            self.nodes[k + 1].attempting_since = Some(now);
            let done = now + attempts as f64 * self.topology.links()[k].t_cycle;
            self.push(done, k, Kind::LinkReady(k));
        }
        Ok(())
    }

    fn finish_link(&mut self, k: usize, now: f64) -> Result<(), SimError> {
        for j in [k, k + 1] {
            let node = &mut self.nodes[j];
            if let Some(t0) = node.attempting_since.take() {
                node.attempt_time += now - t0;
            }
        }
        self.links[k] = LinkStatus::Done;
        let f_el = self.params.links[k].f_el;
        let state = match self.config.noise_mode {
            NoiseMode::Full => model::elementary_link_state(f_el)?,
            NoiseMode::Werner => TwoQubitState::werner(WernerParameter::from_fidelity(f_el)?.x())?,
        };
        let clock = |node: &Node| QubitClock {
            updated_at: now,
            attempt_mark: node.attempt_clock(now),
        };
        let id = self.pairs.len();
        self.pairs.push(Pair {
            state,
            left_node: k,
            right_node: k + 1,
            swaps: 0,
            left: clock(&self.nodes[k]),
            right: clock(&self.nodes[k + 1]),
            available: true,
        });
        self.nodes[k].right = Some(id);
        self.nodes[k + 1].left = Some(id);
        Ok(())
    }

    /// Applies the memory noise each qubit of `id` has picked up since it was
    /// last touched.
    fn catch_up(&mut self, id: usize, now: f64) -> Result<(), SimError> {
        if !self.full() {
            return Ok(());
        }
        let (t1, t2) = (self.params.t1, self.params.t2);
        for which in [Qubit::Left, Qubit::Right] {
            let pair = &self.pairs[id];
            let (node, clock) = match which {
                Qubit::Left => (pair.left_node, pair.left),
                Qubit::Right => (pair.right_node, pair.right),
            };
            let attempt_now = self.nodes[node].attempt_clock(now);
            let t_damp = now - clock.updated_at;
            let t_dephase = match self.config.dephasing_scope {
                DephasingScope::AttemptWindows => attempt_now - clock.attempt_mark,
                DephasingScope::Continuous => t_damp,
            };
            let pair = &mut self.pairs[id];
            if t_damp > 0.0 || t_dephase > 0.0 {
                pair.state = quantum::decohere_split(&pair.state, which, t_damp, t_dephase, t1, t2)?;
            }
            let fresh = QubitClock {
                updated_at: now,
                attempt_mark: attempt_now,
            };
            match which {
                Qubit::Left => pair.left = fresh,
                Qubit::Right => pair.right = fresh,
            }
        }
        Ok(())
    }

    fn swap_ready_nodes(&mut self, now: f64) -> Result<(), SimError> {
        for j in 1..self.nodes.len() - 1 {
            let node = &self.nodes[j];
            let (Some(l), Some(r)) = (node.left, node.right) else {
                continue;
            };
            if !node.idle() || !self.pairs[l].available || !self.pairs[r].available {
                continue;
            }
            self.swap(j, l, r, now)?;
        }
        Ok(())
    }

    fn swap(&mut self, j: usize, l: usize, r: usize, now: f64) -> Result<(), SimError> {
        self.catch_up(l, now)?;
        self.catch_up(r, now)?;
        let (mut left, mut right) = (self.pairs[l].state.clone(), self.pairs[r].state.clone());
        if self.full() {
            left = quantum::depolarize_qubit(&left, Qubit::Right, self.params.s_q)?;
            right = quantum::depolarize_qubit(&right, Qubit::Left, self.params.s_q)?;
        }
        let (a, d) = (self.pairs[l].left_node, self.pairs[r].right_node);
        let id = self.pairs.len();
        self.pairs.push(Pair {
            state: quantum::swap_bsm(&left, &right),
            left_node: a,
            right_node: d,
            swaps: self.pairs[l].swaps + self.pairs[r].swaps + 1,
            left: self.pairs[l].left,
            right: self.pairs[r].right,
            available: false,
        });
        self.nodes[a].right = Some(id);
        self.nodes[d].left = Some(id);
        let node = &mut self.nodes[j];
        node.left = None;
        node.right = None;
        node.swapping = true;
        self.push(now + self.topology.t_swap(), j, Kind::SwapDone(id));
        Ok(())
    }

    fn delivered(&mut self, now: f64) -> Result<Option<RunOutcome>, SimError> {
        let last = self.nodes.len() - 1;
        let Some(id) = self.nodes[0].right else { return Ok(None) };
        if self.pairs[id].right_node != last || !self.pairs[id].available {
            return Ok(None);
        }
        self.catch_up(id, now)?;
        let mut state = self.pairs[id].state.clone();
        if !self.full() {
            // Werner pairs compose multiplicatively under ideal swaps, so the
            // accumulated swap noise is applied once to the delivered pair.
            state = quantum::depolarize_pair(&state, werner_swap_factor(self.pairs[id].swaps, self.params.s_q))?;
        }
        Ok(Some(RunOutcome {
            fidelity: state.fidelity(BellState::PsiPlus),
            end_to_end_state: state,
            completion_time: now,
        }))
    }
}

/// Werner-parameter factor left by `n` noisy swaps: `s^n (2 + s^n) / 3`.
fn werner_swap_factor(n: u32, s_q: f64) -> f64 {
    let sn = s_q.powi(n as i32);
    (sn * (2.0 + sn) / 3.0).min(1.0)
}
