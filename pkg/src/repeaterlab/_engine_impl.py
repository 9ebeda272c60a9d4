"""Hot simulation core: event timeline, link-generation sessions and the
swap cascade for linear repeater chains.

This module is compiled to a C extension by Cython when available; the same
source runs unmodified as the pure-Python fallback.  Everything here is
single-threaded and deterministic: identical parameters and seed produce
byte-identical event sequences, traces and results.

Time is an integer number of picoseconds throughout.
"""

import heapq
import math
import random

from .errors import ConfigurationError, ProtocolFault, ResourceError, SimulationFault

PS_PER_S = 10**12
TIME_LIMIT = 2**63 - 1

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Event.state values
_PENDING = 0
_DISPATCHED = 1
_CANCELLED = 2


def splitmix64(x):
    """One round of the splitmix64 mixing function (64-bit)."""
    x = (x + _GOLDEN) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def fork_seed(base_seed, index):
    """Counter-based split of a base seed into an independent stream seed."""
    return splitmix64(splitmix64((base_seed & _MASK64) ^ ((index + 1) * _GOLDEN & _MASK64)))


def fork_rng(base_seed, index):
    """Independent RNG stream for node `index`, derived from the run seed.

    Streams only depend on (base_seed, index), so adding or removing
    instrumentation elsewhere never perturbs a node's draws.
    """
    return random.Random(fork_seed(base_seed, index))


def bsm_draw(rng, present_a, present_b, success_p):
    """Bell-state measurement outcome.

    Returns a Bell index (1 or 3, the two linear-optics distinguishable
    outcomes) on success, or -1 on failure.  Failure is certain unless both
    photons are present.
    """
    if not (present_a and present_b):
        return -1
    if rng.random() < success_p:
        return 1 if rng.random() < 0.5 else 3
    return -1


class Event:
    __slots__ = ("fire_at", "seq", "target", "payload", "state")

    def __init__(self, fire_at, seq, target, payload):
        self.fire_at = fire_at
        self.seq = seq
        self.target = target
        self.payload = payload
        self.state = _PENDING

    def __lt__(self, other):
        return (self.fire_at, self.seq) < (other.fire_at, other.seq)


class Timeline:
    """Deterministic discrete-event timeline.

    Events fire in (fire_at, seq) order where seq is the insertion counter,
    so ties break by scheduling order and never by node identity.  The run
    stops when the queue is empty or the next event lies past `horizon`.
    """

    def __init__(self, horizon):
        if horizon < 0 or horizon > TIME_LIMIT:
            raise ConfigurationError(f"horizon must be in [0, {TIME_LIMIT}], got {horizon}")
        self.now = 0
        self.horizon = horizon
        self._heap = []
        self._seq = 0
        self._handlers = {}
        self.scheduled = 0
        self.dispatched = 0
        self.cancelled = 0

    def register(self, target, handler):
        self._handlers[target] = handler

    def schedule(self, delay, target=None, payload=None):
        if delay < 0:
            raise ConfigurationError(f"cannot schedule in the past: delay={delay}")
        fire_at = self.now + delay
        if fire_at > TIME_LIMIT:
            raise ConfigurationError(f"timestamp overflow: {fire_at} > {TIME_LIMIT}")
        ev = Event(fire_at, self._seq, target, payload)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._heap, ev)
        return ev

    def cancel(self, ev):
        if ev.state != _PENDING:
            return False
        ev.state = _CANCELLED
        self.cancelled += 1
        return True

    def run(self):
        """Dispatch every pending event with fire_at <= horizon, in order.

        Returns the timestamp of the last dispatched event (0 if none).
        Handler exceptions abort the run as a SimulationFault.
        """
        heap = self._heap
        horizon = self.horizon
        last = 0
        while heap:
            ev = heap[0]
            if ev.state == _CANCELLED:
                heapq.heappop(heap)
                continue
            if ev.fire_at > horizon:
                break
            heapq.heappop(heap)
            self.now = ev.fire_at
            ev.state = _DISPATCHED
            self.dispatched += 1
            last = ev.fire_at
            payload = ev.payload
            try:
                if callable(payload):
                    payload()
                else:
                    self._handlers[ev.target](ev)
            except (ProtocolFault, ConfigurationError, ResourceError) as exc:
                raise SimulationFault(str(exc), self.now) from exc
        return last

    def pending(self):
        return sum(1 for ev in self._heap if ev.state == _PENDING)

    def stats(self):
        pending = self.pending()
        return {
            "scheduled": self.scheduled,
            "dispatched": self.dispatched,
            "cancelled": self.cancelled,
            "beyond_horizon": pending,
        }


class Memory:
    """Runtime state of one router's qubit memory bank."""

    __slots__ = ("slots_total", "emit_period", "_free", "_in_use", "next_emit")

    def __init__(self, slots, emit_period):
        self.slots_total = slots
        self.emit_period = emit_period
        self._free = list(range(slots - 1, -1, -1))
        self._in_use = set()
        self.next_emit = 0

    def reserve(self):
        if not self._free:
            raise ResourceError("no free memory slot")
        slot = self._free.pop()
        self._in_use.add(slot)
        return slot

    def release(self, slot):
        if slot not in self._in_use:
            raise ProtocolFault(f"releasing unreserved slot {slot}")
        self._in_use.remove(slot)
        self._free.append(slot)

    def emit(self, slot, t):
        """Record a photon emission from `slot` at time t; enforces the
        per-memory excitation period."""
        if slot not in self._in_use:
            raise ProtocolFault(f"emission from unreserved slot {slot}")
        if t < self.next_emit:
            raise ProtocolFault(f"emission at {t} violates spacing (next allowed {self.next_emit})")
        self.next_emit = t + self.emit_period
        return t

    def in_use_count(self):
        return len(self._in_use)


class Pair:
    """Entangled link between two memory slots, tracked as a Werner
    parameter renormalized lazily to the current time."""

    __slots__ = ("pid", "router_a", "slot_a", "router_b", "slot_b",
                 "w", "created_at", "last_touched", "tau_ps", "alive")

    def __init__(self, pid, router_a, slot_a, router_b, slot_b, w, created_at, tau_ps):
        self.pid = pid
        self.router_a = router_a
        self.slot_a = slot_a
        self.router_b = router_b
        self.slot_b = slot_b
        self.w = w
        self.created_at = created_at
        self.last_touched = created_at
        self.tau_ps = tau_ps
        self.alive = True

    def read(self, t):
        """Werner parameter at time t; applies decay since the last read."""
        if not self.alive:
            raise ProtocolFault(f"read of consumed pair {self.pid}")
        dt = t - self.last_touched
        if dt:
            self.w *= math.exp(-dt / self.tau_ps)
            self.last_touched = t
        return self.w


class ChainParams:
    """Flat numeric description of a router chain, precomputed once.

    Routers are indexed 0..n-1, elementary links (and their BSM nodes)
    0..n-2.  All delays are integer picoseconds.
    """

    __slots__ = ("n_routers", "n_links", "surv_l", "surv_r", "qd_l", "qd_r",
                 "cd_l", "cd_r", "gen_p", "swap_p", "w_init", "emit_period",
                 "slots", "tau_ps", "cum_cd", "retry_period", "round_trip",
                 "tau_pair", "hop_km", "total_km")

    def __init__(self, n_routers, surv_l, surv_r, qd_l, qd_r, cd_l, cd_r,
                 gen_p, swap_p, w_init, emit_period, slots, tau_ps,
                 hop_km, total_km):
        self.n_routers = n_routers
        self.n_links = n_routers - 1
        self.surv_l = surv_l
        self.surv_r = surv_r
        self.qd_l = qd_l
        self.qd_r = qd_r
        self.cd_l = cd_l
        self.cd_r = cd_r
        self.gen_p = gen_p
        self.swap_p = swap_p
        self.w_init = w_init
        self.emit_period = emit_period
        self.slots = slots
        self.tau_ps = tau_ps
        self.hop_km = hop_km
        self.total_km = total_km
        # classical delay from router 0 to router i (prefix over hops)
        cum = [0]
        for i in range(self.n_links):
            cum.append(cum[-1] + cd_l[i] + cd_r[i])
        self.cum_cd = cum
        self.round_trip = [max(qd_l[i], qd_r[i]) + max(cd_l[i], cd_r[i])
                           for i in range(self.n_links)]
        self.retry_period = [max(emit_period[i], emit_period[i + 1], self.round_trip[i])
                             for i in range(self.n_links)]
        self.tau_pair = [min(tau_ps[i], tau_ps[i + 1]) for i in range(self.n_links)]

    def classical_delay(self, i, j):
        """Classical message delay between routers i and j along the chain."""
        if i > j:
            i, j = j, i
        return self.cum_cd[j] - self.cum_cd[i]


class _LinkGen:
    """One Barrett-Kok style generation session on an elementary link.

    Each retry is a single composite Bernoulli attempt: both arms must
    deliver a photon and the BSM must herald success.  Retries are spaced by
    the link's retry period; after `budget` failed retries the session (and
    with it the whole end-to-end attempt) fails.
    """

    __slots__ = ("rt", "link", "budget", "slot_l", "slot_r", "emit_t", "ev", "sid")

    def __init__(self, rt, link, start, budget):
        self.rt = rt
        self.link = link
        self.budget = budget
        self.slot_l = rt.memories[link].reserve()
        self.slot_r = rt.memories[link + 1].reserve()
        self.sid = f"g{rt.session_counter}"
        rt.session_counter += 1
        self.emit_t = start
        self._emit()

    def _emit(self):
        rt = self.rt
        p = rt.params
        link = self.link
        mem_l = rt.memories[link]
        mem_r = rt.memories[link + 1]
        # adjacent links share routers, so a neighbour session may have
        # pushed the memory's next allowed excitation past our slot
        t = max(self.emit_t, mem_l.next_emit, mem_r.next_emit)
        self.emit_t = t
        mem_l.emit(self.slot_l, t)
        mem_r.emit(self.slot_r, t)
        if rt.trace is not None:
            rt.trace(t, "mn", f"r{link}", "EmitNow", self.sid)
            rt.trace(t, "mn", f"r{link + 1}", "EmitNow", self.sid)
        t_c = t + max(p.qd_l[link], p.qd_r[link])
        self.ev = rt.timeline.schedule(t_c - rt.timeline.now, f"bsm{link}", self._coincidence)

    def _coincidence(self):
        rt = self.rt
        p = rt.params
        link = self.link
        rng = rt.bsm_rng[link]
        present_a = rng.random() < p.surv_l[link]
        present_b = rng.random() < p.surv_r[link]
        bell = bsm_draw(rng, present_a, present_b, p.gen_p[link])
        t_c = rt.timeline.now
        done_delay = max(p.cd_l[link], p.cd_r[link])
        if rt.trace is not None:
            result = str(bell) if bell >= 0 else "failure"
            rt.trace(t_c, f"bsm{link}", f"r{link}", f"BsmResult({result})", self.sid)
            rt.trace(t_c, f"bsm{link}", f"r{link + 1}", f"BsmResult({result})", self.sid)
        if bell >= 0:
            self.ev = rt.timeline.schedule(done_delay, f"r{link}", self._complete)
            return
        self.budget -= 1
        if self.budget <= 0:
            # routers learn of the final failure one classical delay later
            self.ev = rt.timeline.schedule(done_delay, f"r{link}", self._exhausted)
            return
        self.emit_t += p.retry_period[link]
        self.ev = rt.timeline.schedule(self.emit_t - t_c, f"r{link}", self._emit)

    def _complete(self):
        rt = self.rt
        p = rt.params
        link = self.link
        t = rt.timeline.now
        elapsed = t - self.emit_t
        w = p.w_init[link] * math.exp(-elapsed / p.tau_pair[link])
        pair = Pair(rt.pair_counter, link, self.slot_l, link + 1, self.slot_r,
                    w, t, p.tau_pair[link])
        rt.pair_counter += 1
        rt.gen_created += 1
        rt.corrections_applied += 1
        rt.bsm_successes += 1
        if rt.trace is not None:
            rt.trace(t, f"r{link}", "mn", "CorrectionAck", self.sid)
        rt.live_pairs[pair.pid] = pair
        rt.on_link_pair(link, pair)

    def _exhausted(self):
        self.rt.on_link_exhausted(self.link)

    def abort(self):
        rt = self.rt
        rt.timeline.cancel(self.ev)
        rt.memories[self.link].release(self.slot_l)
        rt.memories[self.link + 1].release(self.slot_r)


class _MergeState:
    """Runtime state of one internal node of the swap plan."""

    __slots__ = ("children", "pairs", "parent", "side", "shared_router",
                 "bsm_label", "span_a", "span_b", "delta_out", "leaf_links", "ev")

    def __init__(self):
        self.children = [None, None]
        self.pairs = [None, None]
        self.parent = -1
        self.side = 0
        self.shared_router = -1
        self.bsm_label = -1
        self.span_a = -1
        self.span_b = -1
        self.delta_out = 0
        self.leaf_links = []
        self.ev = None


class ChainRuntime:
    """Network manager and protocol state for one chain, driving repeated
    end-to-end entanglement attempts on a shared timeline.

    `plan_fn(attempt_index)` supplies the swap plan (and odd-subclass label)
    for each attempt; plans are nested nodes with `left`, `right`,
    `shared_router` and `bsm_label` attributes, leaves are link indices.
    """

    def __init__(self, params, plan_fn, timeline, base_seed, *, retry_budget,
                 f_threshold, attempt_deadline, trace=None, validate=False):
        if retry_budget < 1:
            raise ConfigurationError(f"retry_budget must be >= 1, got {retry_budget}")
        self.params = params
        self.plan_fn = plan_fn
        self.timeline = timeline
        self.retry_budget = retry_budget
        self.f_threshold = f_threshold
        self.attempt_deadline = attempt_deadline
        self.trace = trace
        self.validate = validate
        n = params.n_routers
        self.bsm_rng = [fork_rng(base_seed, n + i) for i in range(params.n_links)]
        self.memories = [Memory(params.slots[i], params.emit_period[i]) for i in range(n)]
        self.session_counter = 0
        self.pair_counter = 0
        self.swap_counter = 0
        # conservation counters
        self.gen_created = 0
        self.swap_produced = 0
        self.swap_consumed = 0
        self.destroyed_by_failure = 0
        self.expired = 0
        self.corrections_applied = 0
        self.bsm_successes = 0
        self.conservation_violations = 0
        self.live_pairs = {}
        # per-attempt state
        self.sessions = {}
        self.nodes = []
        self.leaf_parent = {}
        self.deadline_ev = None
        self.attempt_index = -1
        self.attempt_start = 0
        self.attempt_subclass = ""
        self.records = []
        self.n_attempts = 0
        self._in_flight = False

    # -- attempt orchestration -------------------------------------------

    def run_attempts(self, n_attempts, start_index=0):
        """Run `n_attempts` serial end-to-end requests starting at request
        index `start_index`; returns one record per attempt:
        (outcome, reason, fidelity, start, end, subclass).

        Attempts that cannot complete before the timeline horizon are
        recorded as failures with reason "horizon".
        """
        self.n_attempts = start_index + n_attempts
        base = len(self.records)
        self._start_attempt(start_index)
        self.timeline.run()
        if self._in_flight:
            self._cleanup_attempt()
            self._record("failure", "horizon", None, self.timeline.now)
        while len(self.records) - base < n_attempts:
            self.records.append(("failure", "horizon", None, self.timeline.now,
                                 self.timeline.now, ""))
        return self.records[base:]

    def _start_attempt(self, index):
        self.attempt_index = index
        self._in_flight = True
        self.attempt_start = self.timeline.now
        plan, subclass = self.plan_fn(index)
        self.attempt_subclass = subclass
        self._build_nodes(plan)
        self.deadline_ev = self.timeline.schedule(self.attempt_deadline, "mn", self._deadline)
        for link in range(self.params.n_links):
            self.sessions[link] = _LinkGen(self, link, self.timeline.now, self.retry_budget)

    def _build_nodes(self, plan):
        self.nodes = []
        self.leaf_parent = {}
        if isinstance(plan, int):
            return

        def visit(node):
            st = _MergeState()
            idx = len(self.nodes)
            self.nodes.append(st)
            for side, child in enumerate((node.left, node.right)):
                if isinstance(child, int):
                    st.children[side] = ("leaf", child)
                    st.leaf_links.append(child)
                    self.leaf_parent[child] = (idx, side)
                else:
                    cidx = visit(child)
                    cst = self.nodes[cidx]
                    cst.parent = idx
                    cst.side = side
                    st.children[side] = ("node", cidx)
                    st.leaf_links.extend(cst.leaf_links)
            st.shared_router = node.shared_router
            st.bsm_label = node.bsm_label
            st.span_a = min(st.leaf_links)
            st.span_b = max(st.leaf_links) + 1
            p = self.params
            st.delta_out = max(p.classical_delay(st.shared_router, st.span_a),
                               p.classical_delay(st.shared_router, st.span_b))
            return idx

        visit(plan)

    def _deadline(self):
        self._cleanup_attempt()
        self._record("failure", "deadline", None, self.timeline.now)
        self._next_attempt()

    def on_link_exhausted(self, link):
        # the exhausted session still holds its slots; _cleanup_attempt
        # aborts it along with every other live session
        self._cleanup_attempt()
        self._record("failure", "generation", None, self.timeline.now)
        self._next_attempt()

    def on_link_pair(self, link, pair):
        del self.sessions[link]
        if link in self.leaf_parent:
            idx, side = self.leaf_parent[link]
            self._deliver(idx, side, pair)
        else:
            # two-router chain: the elementary pair is the end-to-end pair
            self._finish_root(pair, self.timeline.now)

    def _deliver(self, idx, side, pair):
        st = self.nodes[idx]
        st.pairs[side] = pair
        if st.pairs[0] is not None and st.pairs[1] is not None:
            self._execute_swap(idx)

    def _execute_swap(self, idx):
        st = self.nodes[idx]
        t = self.timeline.now
        left, right = st.pairs
        st.pairs = [None, None]
        rng = self.bsm_rng[st.bsm_label]
        bell = bsm_draw(rng, True, True, self.params.swap_p[st.bsm_label])
        sid = f"s{self.swap_counter}"
        self.swap_counter += 1
        if self.trace is not None:
            outcome = str(bell) if bell >= 0 else "failure"
            self.trace(t, f"r{st.shared_router}", f"r{st.span_a}", f"SwapResult({outcome})", sid)
            self.trace(t, f"r{st.shared_router}", f"r{st.span_b}", f"SwapResult({outcome})", sid)
        if bell >= 0:
            w = left.read(t) * right.read(t)
            self._consume(left)
            self._consume(right)
            self.swap_consumed += 2
            merged = Pair(self.pair_counter, st.span_a, left.slot_a if left.router_a == st.span_a else left.slot_b,
                          st.span_b, right.slot_b if right.router_b == st.span_b else right.slot_a,
                          w, t, min(left.tau_ps, right.tau_ps))
            self.pair_counter += 1
            # outer-endpoint slots stay reserved and now hold the merged pair;
            # the shared router's two slots were measured out
            self.memories[st.shared_router].release(
                left.slot_b if left.router_b == st.shared_router else left.slot_a)
            self.memories[st.shared_router].release(
                right.slot_a if right.router_a == st.shared_router else right.slot_b)
            self.swap_produced += 1
            self.live_pairs[merged.pid] = merged
            st.ev = self.timeline.schedule(st.delta_out, "mn",
                                           lambda st=st, merged=merged, sid=sid: self._swap_done(st, merged, sid))
        else:
            self._destroy(left)
            self._destroy(right)
            self.destroyed_by_failure += 2
            st.ev = self.timeline.schedule(st.delta_out, "mn",
                                           lambda st=st: self._regenerate(st))
        self._check_conservation()

    def _swap_done(self, st, merged, sid):
        t = self.timeline.now
        self.corrections_applied += 1
        self.bsm_successes += 1
        if self.trace is not None:
            self.trace(t, f"r{st.span_a}", "mn", "CorrectionAck", sid)
        st.ev = None
        if st.parent >= 0:
            self._deliver(st.parent, st.side, merged)
        else:
            self._finish_root(merged, t)

    def _regenerate(self, st):
        st.ev = None
        for link in st.leaf_links:
            self.sessions[link] = _LinkGen(self, link, self.timeline.now, self.retry_budget)

    def _finish_root(self, pair, t):
        f = (1.0 + 3.0 * pair.read(t)) / 4.0
        self._cleanup_attempt()
        if f >= self.f_threshold:
            self._record("success", "", f, t)
        else:
            self._record("failure", "low_fidelity", f, t)
        self._next_attempt()

    def _record(self, outcome, reason, f, t_end):
        self._in_flight = False
        self.records.append((outcome, reason, f, self.attempt_start, t_end,
                             self.attempt_subclass))

    def _next_attempt(self):
        if self.attempt_index + 1 < self.n_attempts and self.timeline.now < self.timeline.horizon:
            self._start_attempt(self.attempt_index + 1)

    # -- resource management ---------------------------------------------

    def _consume(self, pair):
        if not pair.alive:
            raise ProtocolFault(f"pair {pair.pid} consumed twice")
        pair.alive = False
        del self.live_pairs[pair.pid]

    def _destroy(self, pair):
        self._consume(pair)
        self.memories[pair.router_a].release(pair.slot_a)
        self.memories[pair.router_b].release(pair.slot_b)

    def _cleanup_attempt(self):
        if self.deadline_ev is not None:
            self.timeline.cancel(self.deadline_ev)
            self.deadline_ev = None
        for link in sorted(self.sessions):
            self.sessions[link].abort()
        self.sessions = {}
        for st in self.nodes:
            if st.ev is not None:
                self.timeline.cancel(st.ev)
                st.ev = None
        for pid in sorted(self.live_pairs):
            pair = self.live_pairs[pid]
            pair.alive = False
            self.memories[pair.router_a].release(pair.slot_a)
            self.memories[pair.router_b].release(pair.slot_b)
            self.expired += 1
        self.live_pairs = {}
        self.nodes = []
        self.leaf_parent = {}
        for mem in self.memories:
            if mem.in_use_count():
                self.conservation_violations += 1
                raise ProtocolFault("memory slot leaked at attempt end")
        self._check_conservation()

    def _check_conservation(self):
        expected = (self.gen_created + self.swap_produced - self.swap_consumed
                    - self.destroyed_by_failure - self.expired)
        if len(self.live_pairs) != expected:
            self.conservation_violations += 1
            raise ProtocolFault(
                f"pair conservation violated: live={len(self.live_pairs)} expected={expected}")

    def counters(self):
        return {
            "gen_created": self.gen_created,
            "swap_produced": self.swap_produced,
            "swap_consumed": self.swap_consumed,
            "destroyed_by_failure": self.destroyed_by_failure,
            "expired": self.expired,
            "corrections_applied": self.corrections_applied,
            "bsm_successes": self.bsm_successes,
            "conservation_violations": self.conservation_violations,
            "live_pairs": len(self.live_pairs),
        }
