"""Hierarchical beacon routing over dynamic connectivity graphs.

Every node is a beacon at some level and floods its presence each time step;
receivers within the cover radius of a level register as cluster members, so
that after every beaconing round each node belongs to exactly one cluster per
level. Forwarding locates a destination by probing known beacons level by
level upward, then descends the hierarchy until the destination's level-0
beacon hands the packet over. A load-balanced variant spreads member
identifiers from beacons onto chain termini chosen by identifier closeness.

Cost accounting is explicit: flood cost is transmissions times the flood
packet width, probe and membership cost is path hops times the respective
packet width, with concrete field widths derived from the node count and
level count.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import IO, NamedTuple, Optional, Union

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import DeliveryError, ParameterError, ProtocolInvariantError
from .graph import ConnectivityGraph, bfs_distances, diameter

__all__ = [
    "ForwardReceipt",
    "Membership",
    "ProbeRecord",
    "ProbeResult",
    "ProtocolEngine",
    "ProtocolParams",
    "RoundReport",
    "RoutingEntry",
    "flood",
    "probe",
    "ring_distance",
]

_MODES = ("plain", "load_balanced")
_CHUNK = 256  # beaconing processes the permutation in blocks of this many floods


def ring_distance(a: int, b: int, n: int) -> int:
    """Cyclic distance between identifiers on the ring [0, n)."""
    if n < 1:
        raise ParameterError(f"ring size must be positive, got {n}")
    return min((a - b) % n, (b - a) % n)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolParams:
    """Radii schedule and accounting constants.

    Level i covers 2**i hops and floods ceil(kappa * 3 * 2**i) hops
    (ceil(kappa * 5 * 2**i) in load-balanced mode, so sub-beacons also hear
    their parents). ``levels`` fixes the top level L; ``nu`` scales the
    refresh cadence; ``alpha_hat`` feeds the probe-overhead factor ``mu``.
    """

    kappa: float
    levels: int
    nu: int = 1
    alpha_hat: float = 9.0

    def __post_init__(self) -> None:
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ParameterError(f"kappa must be positive and finite, got {self.kappa}")
        if self.levels < 0:
            raise ParameterError(f"level count must be >= 0, got {self.levels}")
        if self.nu < 1:
            raise ParameterError(f"refresh cadence nu must be >= 1, got {self.nu}")
        if not self.alpha_hat > 1.0:
            raise ParameterError(f"alpha_hat must exceed 1, got {self.alpha_hat}")
        for i in range(self.levels + 1):
            if self.flood_radius(i) <= self.cover_radius(i):
                raise ParameterError(
                    f"flood radius {self.flood_radius(i)} must exceed cover radius "
                    f"{self.cover_radius(i)} at level {i}; increase kappa"
                )

    @classmethod
    def for_graph(
        cls,
        g: ConnectivityGraph,
        kappa: float,
        nu: int = 1,
        alpha_hat: float = 9.0,
        levels: Optional[int] = None,
    ) -> "ProtocolParams":
        """Level count from the current hop diameter unless overridden."""
        if levels is None:
            hops = diameter(g).hops
            levels = max(0, math.ceil(math.log2(max(hops, 1))))
        return cls(kappa=kappa, levels=levels, nu=nu, alpha_hat=alpha_hat)

    def cover_radius(self, level: int) -> int:
        return 2**level

    def flood_radius(self, level: int) -> int:
        return math.ceil(self.kappa * 3 * 2**level)

    def lb_flood_radius(self, level: int) -> int:
        return math.ceil(self.kappa * 5 * 2**level)

    @property
    def mu(self) -> float:
        """Probe-overhead factor (3*kappa^2) ** (2 * log2(alpha_hat))."""
        return (3.0 * self.kappa**2) ** (2.0 * math.log2(self.alpha_hat))

    # Packet field widths in bits: type 4, ids and hop counts ceil(log2 n),
    # level ceil(log2(L+1)), success flag 1.

    def id_bits(self, n: int) -> int:
        return math.ceil(math.log2(n)) if n > 1 else 0

    def level_bits(self) -> int:
        return math.ceil(math.log2(self.levels + 1)) if self.levels > 0 else 0

    def flood_packet_bits(self, n: int, lb: bool = False) -> int:
        bits = 4 + 2 * self.id_bits(n) + self.level_bits()
        return bits + self.id_bits(n) if lb else bits

    def membership_packet_bits(self, n: int) -> int:
        return 4 + 2 * self.id_bits(n) + self.level_bits()

    def probe_packet_bits(self, n: int) -> int:
        return 4 + 2 * self.id_bits(n) + 1


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoutingEntry:
    """A table row: who, how far, at which level, and through which neighbor."""

    node_id: int
    distance: int
    level: int
    next_hop: int
    parent: Optional[int] = None


class Membership(NamedTuple):
    beacon_id: int
    distance: int
    time: int


class ProbeRecord(NamedTuple):
    relay: int
    level: int
    success: bool
    broken: bool
    transmissions: int
    terminus: int


class ProbeResult(NamedTuple):
    success: bool
    broken: bool
    path: tuple[int, ...]
    transmissions: int
    found_level: int
    terminus: int


@dataclass(frozen=True)
class RoundReport:
    """Per-round tallies: who got elected where and what the control cost was."""

    gamma: int
    elected: dict[int, tuple[int, ...]]
    beacons: dict[int, tuple[int, ...]]
    control_packets: int
    control_bits: int
    flood_transmissions: int
    membership_packets: int
    membership_hops: int
    registration_hops: int


@dataclass(frozen=True)
class ForwardReceipt:
    """A delivered route plus the probe traffic spent finding it."""

    route: tuple[int, ...]
    route_hops: int
    probe_transmissions: int
    probes: tuple[ProbeRecord, ...]


class _NodeState:
    __slots__ = ("beacon_level", "memberships", "member_lists", "table", "temp", "lb_store")

    def __init__(self) -> None:
        self.beacon_level = 0
        self.memberships: dict[int, Membership] = {}
        self.member_lists: dict[int, set[int]] = {}
        # (origin, level) -> (distance, next_hop, time, parent)
        self.table: dict[tuple[int, int], tuple[int, int, int, Optional[int]]] = {}
        # origin -> (distance, next_hop); reverse state left behind by probes
        self.temp: dict[int, tuple[int, int]] = {}
        # (node, level) -> owning beacon chain; load-balanced mode only
        self.lb_store: dict[tuple[int, int], tuple[int, ...]] = {}


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class ProtocolEngine:
    """Protocol state for every node, advanced one beaconing round at a time.

    A round mutates global state in permutation order; forwarding reads the
    state built by the most recent round against the same graph.
    """

    def __init__(self, n: int, params: ProtocolParams, mode: str = "plain"):
        if n < 1:
            raise ParameterError(f"node count must be >= 1, got {n}")
        if mode not in _MODES:
            raise ParameterError(f"mode must be one of {_MODES}, got {mode!r}")
        self.n = n
        self.params = params
        self.mode = mode
        self._nodes = [_NodeState() for _ in range(n)]
        self._clear_time = [-1] * (params.levels + 1)
        self._lb_holders: dict[tuple[int, int], int] = {}

    # -- public state accessors ------------------------------------------

    def beacon_level(self, u: int) -> int:
        self._check_node(u)
        return self._nodes[u].beacon_level

    def membership(self, u: int, level: int) -> Optional[Membership]:
        self._check_node(u)
        self._check_level(level)
        return self._nodes[u].memberships.get(level)

    def member_list(self, u: int, level: int) -> frozenset[int]:
        self._check_node(u)
        self._check_level(level)
        return frozenset(self._nodes[u].member_lists.get(level, ()))

    def routing_entries(self, u: int) -> list[RoutingEntry]:
        self._check_node(u)
        entries = []
        for (origin, level), e in self._nodes[u].table.items():
            if e[2] >= self._clear_time[level]:
                entries.append(
                    RoutingEntry(
                        node_id=origin, distance=e[0], level=level, next_hop=e[1], parent=e[3]
                    )
                )
        entries.sort(key=lambda entry: (entry.node_id, entry.level))
        return entries

    def lb_store(self, u: int) -> dict[tuple[int, int], tuple[int, ...]]:
        self._check_node(u)
        return dict(self._nodes[u].lb_store)

    def lb_holder(self, u: int, level: int) -> int:
        self._check_node(u)
        self._check_level(level)
        try:
            return self._lb_holders[(u, level)]
        except KeyError:
            raise ParameterError(
                f"no stored identifier for node {u} at level {level}; "
                "run a load-balanced beaconing round first"
            ) from None

    def membership_load(self) -> np.ndarray:
        """Per-node count of stored membership records: member-list entries in
        plain mode, held identifiers in load-balanced mode."""
        if self.mode == "load_balanced":
            return np.array([len(st.lb_store) for st in self._nodes], dtype=np.int64)
        return np.array(
            [sum(len(m) for m in st.member_lists.values()) for st in self._nodes],
            dtype=np.int64,
        )

    def dump_state_csv(self, destination) -> None:
        """Write per-node beacon level, membership count, and live table size."""
        if hasattr(destination, "write"):
            self._write_state(destination)
        else:
            with open(destination, "w", encoding="utf-8") as fh:
                self._write_state(fh)

    def _write_state(self, fh: IO[str]) -> None:
        fh.write("node_id,beacon_level,membership_count,table_entries\n")
        for u in range(self.n):
            st = self._nodes[u]
            live = sum(
                1 for (_, level), e in st.table.items() if e[2] >= self._clear_time[level]
            )
            fh.write(f"{u},{st.beacon_level},{len(st.memberships)},{live}\n")

    # -- beaconing ---------------------------------------------------------

    def beaconing_round(self, g: ConnectivityGraph, t: int, seed: int = 0) -> RoundReport:
        """Run one beaconing round at time ``t`` on graph ``g``.

        Levels up to gamma are cleared and re-elected in a seeded random node
        order; every node floods at its own level, receivers register for the
        uncovered levels their distance permits, and hard invariants (full
        cover, separation of same-level electees) are re-checked before
        returning.
        """
        if g.n != self.n:
            raise ParameterError(f"graph has {g.n} nodes, engine has {self.n}")
        if t < 0:
            raise ParameterError(f"time step must be >= 0, got {t}")
        params = self.params
        levels = params.levels
        lb = self.mode == "load_balanced"
        radius_fn = params.lb_flood_radius if lb else params.flood_radius
        flood_bits = params.flood_packet_bits(self.n, lb=lb)
        member_bits = params.membership_packet_bits(self.n)

        qualifying = [j for j in range(levels + 1) if t % (params.nu << j) == 0]
        gamma = max(qualifying) if qualifying else -1

        for level in range(gamma + 1):
            self._clear_time[level] = t
        for st in self._nodes:
            st.temp.clear()
            for level in range(gamma + 1):
                st.memberships.pop(level, None)
                members = st.member_lists.get(level)
                if members:
                    members.clear()
            if gamma == levels:
                st.table.clear()

        rng = np.random.default_rng((seed, t))
        pi = [int(u) for u in rng.permutation(self.n)]
        elected: dict[int, list[int]] = {level: [] for level in range(levels + 1)}
        flood_tx = 0
        membership_packets = 0
        membership_hops = 0
        control_bits = 0

        for start in range(0, self.n, _CHUNK):
            chunk = pi[start : start + _CHUNK]
            rows = self._flood_rows(g, chunk, gamma, radius_fn)
            for u in chunk:
                st = self._nodes[u]
                if st.beacon_level <= gamma:
                    highest = -1
                    for level in range(levels, -1, -1):
                        if level not in st.memberships:
                            highest = level
                            break
                    if highest >= 0:
                        st.beacon_level = highest
                        elected[highest].append(u)
                    else:
                        st.beacon_level = 0
                beta = st.beacon_level
                for level in range(beta + 1):
                    if level not in st.memberships:
                        st.memberships[level] = Membership(u, 0, t)
                        st.member_lists.setdefault(level, set()).add(u)
                parent: Optional[int] = None
                if lb:
                    above = st.memberships.get(beta + 1)
                    parent = above.beacon_id if above is not None else None

                radius = radius_fn(beta)
                dist_row, pred_row = rows[u]
                reached = np.flatnonzero(dist_row <= radius)
                reached = reached[np.lexsort((reached, dist_row[reached]))]
                flood_tx_u = int(np.count_nonzero(dist_row <= radius - 1))
                flood_tx += flood_tx_u
                control_bits += flood_tx_u * flood_bits

                for v in reached[1:]:  # skip the origin itself (distance 0)
                    v = int(v)
                    d = int(dist_row[v])
                    self._post_entry(v, u, beta, d, int(pred_row[v]), t, parent)
                for v in reached[1:]:
                    v = int(v)
                    d = int(dist_row[v])
                    low = (d - 1).bit_length()
                    if low > beta:
                        break  # reached is distance-sorted; later nodes are even farther
                    vst = self._nodes[v]
                    join = [
                        level for level in range(low, beta + 1) if level not in vst.memberships
                    ]
                    if not join:
                        continue
                    path = []
                    node = v
                    while node != u:
                        node = int(pred_row[node])
                        path.append(node)
                    for level in join:
                        vst.memberships[level] = Membership(u, d, t)
                        st.member_lists.setdefault(level, set()).add(v)
                        membership_packets += 1
                        membership_hops += d
                        control_bits += d * member_bits
                        toward = v
                        for hops, w in enumerate(path, start=1):
                            self._post_entry(w, v, level, hops, toward, t, None)
                            toward = w

        self._assert_cover_complete(levels)
        self._assert_separation(g, elected)
        registration_hops = 0
        if lb:
            registration_hops = self._rebuild_lb_store(levels)
            control_bits += registration_hops * member_bits

        return RoundReport(
            gamma=gamma,
            elected={level: tuple(sorted(nodes)) for level, nodes in elected.items()},
            beacons=self._beacon_sets(levels),
            control_packets=flood_tx + membership_hops + registration_hops,
            control_bits=control_bits,
            flood_transmissions=flood_tx,
            membership_packets=membership_packets,
            membership_hops=membership_hops,
            registration_hops=registration_hops,
        )

    def _flood_rows(
        self, g: ConnectivityGraph, chunk: list[int], gamma: int, radius_fn
    ) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        """Limited-horizon distances and predecessors for each flood origin.

        Re-electing nodes end up at a level <= gamma, so gamma's radius is a
        valid horizon for them before their new level is known.
        """
        by_limit: dict[int, list[int]] = {}
        for u in chunk:
            beta = self._nodes[u].beacon_level
            limit = radius_fn(gamma if beta <= gamma else beta)
            by_limit.setdefault(limit, []).append(u)
        rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for limit, sources in by_limit.items():
            dist, pred = dijkstra(
                g.csr,
                unweighted=True,
                indices=np.asarray(sources, dtype=np.int64),
                limit=float(limit),
                return_predecessors=True,
            )
            for row, u in enumerate(sources):
                rows[u] = (dist[row], pred[row])
        return rows

    def _post_entry(
        self,
        node: int,
        origin: int,
        level: int,
        distance: int,
        next_hop: int,
        t: int,
        parent: Optional[int],
    ) -> None:
        # Same-step repeats only displace strictly worse hop counts; a fresher
        # step replaces unconditionally.
        table = self._nodes[node].table
        key = (origin, level)
        cur = table.get(key)
        if cur is not None and cur[2] >= t and cur[0] <= distance:
            return
        table[key] = (distance, next_hop, t, parent)

    def _beacon_sets(self, levels: int) -> dict[int, tuple[int, ...]]:
        sets: dict[int, list[int]] = {level: [] for level in range(levels + 1)}
        for u, st in enumerate(self._nodes):
            sets[st.beacon_level].append(u)
        return {level: tuple(nodes) for level, nodes in sets.items()}

    def _assert_cover_complete(self, levels: int) -> None:
        for u, st in enumerate(self._nodes):
            for level in range(levels + 1):
                if level not in st.memberships:
                    raise ProtocolInvariantError(
                        f"node {u} has no cluster membership at level {level} "
                        "after the beaconing round"
                    )

    def _assert_separation(self, g: ConnectivityGraph, elected: dict[int, list[int]]) -> None:
        for level, nodes in elected.items():
            if len(nodes) < 2:
                continue
            radius = 2**level
            idx = np.asarray(sorted(nodes), dtype=np.int64)
            dist = dijkstra(g.csr, unweighted=True, indices=idx, limit=float(radius))
            sub = dist[:, idx]
            np.fill_diagonal(sub, np.inf)
            if (sub <= radius).any():
                a, b = np.argwhere(sub <= radius)[0]
                raise ProtocolInvariantError(
                    f"beacons {idx[a]} and {idx[b]} were both elected at level {level} "
                    f"but are within {radius} hops of each other"
                )

    def _rebuild_lb_store(self, levels: int) -> int:
        """Re-register every identifier at its chain terminus; returns the
        total packet hops spent walking the chains."""
        for st in self._nodes:
            st.lb_store.clear()
        self._lb_holders.clear()
        hops = 0
        for u in range(self.n):
            for level in range(levels + 1):
                member = self._nodes[u].memberships[level]
                holder = member.beacon_id
                chain = [holder]
                for lam, nxt in self._chain_steps(holder, u):
                    leg = self._nodes[nxt].memberships[lam].distance
                    hops += leg
                    chain.append(nxt)
                    holder = nxt
                self._nodes[holder].lb_store[(u, level)] = tuple(chain)
                self._lb_holders[(u, level)] = holder
        return hops

    def _chain_steps(self, start: int, target: int):
        """Descend from beacon ``start`` toward the terminus responsible for
        ``target``: at each level pick the member sub-beacon whose identifier
        is ring-closest to the target's, ties to the lower id. Yields only the
        steps that move."""
        holder = start
        for lam in range(self._nodes[start].beacon_level, 0, -1):
            hst = self._nodes[holder]
            best = holder
            best_key = (ring_distance(target, holder, self.n), holder)
            for w in hst.member_lists.get(lam, ()):
                if w == holder or self._nodes[w].beacon_level < lam - 1:
                    continue
                key = (ring_distance(target, w, self.n), w)
                if key < best_key:
                    best, best_key = w, key
            if best != holder:
                yield lam, best
                holder = best

    # -- probing -----------------------------------------------------------

    def _best_entry(self, node: int, origin: int) -> Optional[tuple[int, int, int]]:
        """Live (distance, level, next_hop) for ``origin``. Fresher entries win
        outright (they describe the current graph; older ones may point at
        vanished edges), then shorter, then lower level; probe-installed
        reverse state is the last resort."""
        st = self._nodes[node]
        best = None
        best_key = None
        for level in range(self.params.levels + 1):
            e = st.table.get((origin, level))
            if e is None or e[2] < self._clear_time[level]:
                continue
            key = (-e[2], e[0], level)
            if best_key is None or key < best_key:
                best = (e[0], level, e[1])
                best_key = key
        if best is None:
            tmp = st.temp.get(origin)
            if tmp is not None:
                best = (tmp[0], -1, tmp[1])
        return best

    def _walk(
        self, g: ConnectivityGraph, source: int, relay: int, budget: Optional[int]
    ) -> tuple[bool, list[int]]:
        """Follow table next hops from ``source`` to ``relay``, leaving
        temporary reverse entries behind. Returns (arrived, path)."""
        path = [source]
        node = source
        hops = 0
        while node != relay:
            entry = self._best_entry(node, relay)
            if entry is None:
                return False, path
            nxt = entry[2]
            if nxt not in g.neighbors(node):
                return False, path
            if budget is not None and hops + 1 > budget:
                return False, path
            if hops + 1 > self.n:
                return False, path  # stale tables sent the packet in a circle
            prev = node
            node = nxt
            hops += 1
            path.append(node)
            self._nodes[node].temp[source] = (hops, prev)
        return True, path

    def _answer(self, relay: int, dest: int, max_level: int) -> tuple[bool, int]:
        if relay == dest:
            return True, 0
        st = self._nodes[relay]
        if self.mode == "load_balanced":
            found = [lvl for (node, lvl) in st.lb_store if node == dest and lvl <= max_level]
        else:
            # Any live table row for the destination answers: flood entries
            # from the destination's own beaconing and forward state installed
            # by its membership registrations both qualify.
            found = [
                lvl
                for lvl in range(max_level + 1)
                if (e := st.table.get((dest, lvl))) is not None
                and e[2] >= self._clear_time[lvl]
            ]
        if found:
            return True, min(found)
        return False, -1

    def _probe(
        self,
        g: ConnectivityGraph,
        source: int,
        relay: int,
        dest: int,
        max_level: int,
        budget: Optional[int] = None,
    ) -> ProbeResult:
        if relay == source:
            success, found = self._answer(relay, dest, max_level)
            return ProbeResult(success, False, (source,), 0, found, relay)
        if self._best_entry(source, relay) is None:
            raise ParameterError(f"node {source} holds no routing entry for relay {relay}")
        arrived, path = self._walk(g, source, relay, budget)
        if not arrived:
            return ProbeResult(False, True, tuple(path), 2 * (len(path) - 1), -1, relay)
        hops = len(path) - 1
        terminus = relay
        if self.mode == "load_balanced" and relay != dest:
            # The question travels on to the chain terminus, which answers in
            # the beacon's stead; the excursion costs transmissions only.
            chain_path = [relay]
            for lam, nxt in self._chain_steps(relay, dest):
                ok, leg = self._walk(g, chain_path[-1], nxt, self.params.flood_radius(lam))
                if not ok:
                    total = hops + (len(chain_path) - 1) + (len(leg) - 1)
                    return ProbeResult(False, True, tuple(path), 2 * total, -1, terminus)
                chain_path.extend(leg[1:])
                terminus = nxt
            hops += len(chain_path) - 1
        success, found = self._answer(terminus, dest, max_level)
        return ProbeResult(success, False, tuple(path), 2 * hops, found, terminus)

    # -- forwarding --------------------------------------------------------

    def forward(self, g: ConnectivityGraph, source: int, dest: int) -> ForwardReceipt:
        """Route from ``source`` to ``dest`` on the round's current graph.

        Probes known beacons level by level upward until one claims the
        destination, then descends the hierarchy; raises DeliveryError when
        the destination is unreachable and ProtocolInvariantError when the
        membership state breaks its own guarantees.
        """
        self._check_node(source)
        self._check_node(dest)
        if g.n != self.n:
            raise ParameterError(f"graph has {g.n} nodes, engine has {self.n}")
        if source == dest:
            return ForwardReceipt(route=(), route_hops=0, probe_transmissions=0, probes=())

        lb = self.mode == "load_balanced"
        radius_fn = self.params.lb_flood_radius if lb else self.params.flood_radius
        levels = self.params.levels
        probes: list[ProbeRecord] = []
        legs: list[tuple[int, ...]] = []
        holder: Optional[int] = None
        found_level = -1

        own = [
            lvl
            for lvl, members in self._nodes[source].member_lists.items()
            if dest in members
        ]
        if own:
            holder = source
            found_level = min(own)
            legs.append((source,))
        if holder is None:
            direct = self._best_entry(source, dest)
            if direct is not None:
                result = self._probe(
                    g, source, dest, dest, levels, budget=radius_fn(max(direct[1], 0))
                )
                probes.append(self._record(result, dest, levels))
                if result.success:
                    holder = dest
                    legs.append(result.path)
        if holder is None:
            for j in range(1, levels + 1):
                for relay in self._stage_candidates(source, j, radius_fn(j), skip=(source, dest)):
                    result = self._probe(g, source, relay, dest, j, budget=radius_fn(j))
                    probes.append(self._record(result, relay, j))
                    if result.success:
                        holder = relay
                        found_level = result.found_level
                        legs.append(result.path)
                        break
                if holder is not None:
                    break
        if holder is None:
            found = self._ring_search(g, source, dest, {source})
            if found is None:
                self._fail(g, source, dest, "no probed beacon knows the destination")
            holder, path, tx, found_level = found
            probes.append(
                ProbeRecord(
                    relay=holder,
                    level=found_level,
                    success=True,
                    broken=False,
                    transmissions=tx,
                    terminus=holder,
                )
            )
            legs.append(path)

        transmissions = sum(p.transmissions for p in probes)
        current = holder
        level = found_level
        visited = {source, holder}
        while current != dest:
            # Registration installed forward state from the holder toward its
            # member, so a direct hand-off is tried before descending levels.
            direct = self._best_entry(current, dest)
            if direct is not None:
                result = self._probe(
                    g, current, dest, dest, levels, budget=radius_fn(max(direct[1], 0))
                )
                probes.append(self._record(result, dest, max(direct[1], 0)))
                transmissions += result.transmissions
                if result.success:
                    legs.append(result.path)
                    break
            advanced = False
            if level >= 1:
                attempted: dict[int, bool] = {}
                for widen in (False, True):
                    reach = radius_fn(level if widen else level - 1)
                    for relay in self._stage_candidates(
                        current, level - 1, reach, skip=(current,)
                    ):
                        if attempted.get(relay, False):
                            continue  # a firm negative does not change when re-asked
                        result = self._probe(g, current, relay, dest, level - 1, budget=reach)
                        probes.append(self._record(result, relay, level - 1))
                        transmissions += result.transmissions
                        attempted[relay] = not result.broken
                        if result.success:
                            legs.append(result.path)
                            current = relay
                            level = result.found_level
                            advanced = True
                            break
                    if advanced:
                        break
            if advanced:
                continue
            # The held path for the destination has gone stale and no nearby
            # beacon has fresher state, so fall back to expanding scoped
            # floods.  Every holder left behind stays excluded, and the
            # destination itself answers once a ring covers it, so on a
            # connected graph the search always lands somewhere new.
            found = self._ring_search(g, current, dest, visited)
            if found is None:
                self._fail(
                    g, source, dest,
                    f"holder {current} heard no answer for the destination"
                    " at the widest flood radius",
                )
            relay, path, tx, relay_level = found
            probes.append(
                ProbeRecord(
                    relay=relay,
                    level=relay_level,
                    success=True,
                    broken=False,
                    transmissions=tx,
                    terminus=relay,
                )
            )
            transmissions += tx
            legs.append(path)
            visited.add(relay)
            current = relay
            level = relay_level

        route = _loop_erase(leg_node for leg in legs for leg_node in leg)
        self._check_route(g, route, source, dest)
        return ForwardReceipt(
            route=route,
            route_hops=len(route) - 1,
            probe_transmissions=transmissions,
            probes=tuple(probes),
        )

    def _stage_candidates(
        self, node: int, min_level: int, max_distance: int, skip: tuple[int, ...]
    ) -> list[int]:
        st = self._nodes[node]
        best: dict[int, int] = {}
        for (origin, level), e in st.table.items():
            if level < min_level or origin in skip:
                continue
            if e[2] < self._clear_time[level] or e[0] > max_distance:
                continue
            cur = best.get(origin)
            if cur is None or e[0] < cur:
                best[origin] = e[0]
        return [origin for origin, _ in sorted(best.items(), key=lambda kv: (kv[1], kv[0]))]

    def _ring_search(
        self, g: ConnectivityGraph, start: int, dest: int, excluded: set[int]
    ) -> Optional[tuple[int, tuple[int, ...], int, int]]:
        """Expanding scoped floods from ``start`` asking who holds a live
        entry for ``dest``; the destination itself always answers.  Nodes in
        ``excluded`` stay silent so the packet never returns to a spot it
        already left.  Returns (answerer, path, transmissions, entry level)
        for the nearest answerer, or None when even the widest flood radius
        hears nobody.  Cost is one broadcast per node inside every ring tried
        plus the answer walking back."""
        radius_fn = (
            self.params.lb_flood_radius
            if self.mode == "load_balanced"
            else self.params.flood_radius
        )
        max_radius = radius_fn(self.params.levels)
        parent = {start: -1}
        frontier = deque([start])
        ball_at: list[int] = [1]
        best: Optional[tuple[int, int]] = None
        depth = 0
        while frontier and depth < max_radius and best is None:
            depth += 1
            nxt: deque[int] = deque()
            for u in frontier:
                for v in map(int, g.neighbors(u)):
                    if v not in parent:
                        parent[v] = u
                        nxt.append(v)
                        if v not in excluded and self._answer(v, dest, self.params.levels)[0]:
                            best = (v, depth) if best is None else (min(best[0], v), depth)
            frontier = nxt
            ball_at.append(len(parent))
        if best is None:
            return None
        answerer, hit_depth = best
        ring = min(
            i for i in range(self.params.levels + 1) if radius_fn(i) >= hit_depth
        )
        # The successful ring floods all the way out even though the answer
        # comes from closer in, so its full ball is charged, as is each empty
        # ring before it.
        while frontier and depth < radius_fn(ring):
            depth += 1
            nxt = deque()
            for u in frontier:
                for v in map(int, g.neighbors(u)):
                    if v not in parent:
                        parent[v] = u
                        nxt.append(v)
            frontier = nxt
            ball_at.append(len(parent))
        transmissions = hit_depth + ball_at[min(radius_fn(ring), depth)]
        transmissions += sum(
            ball_at[min(radius_fn(i), depth)] for i in range(ring)
        )
        path = [answerer]
        while path[-1] != start:
            path.append(parent[path[-1]])
        path.reverse()
        found = self._answer(answerer, dest, self.params.levels)[1]
        return answerer, tuple(path), transmissions, max(found, 0)

    def _record(self, result: ProbeResult, relay: int, level: int) -> ProbeRecord:
        return ProbeRecord(
            relay=relay,
            level=level,
            success=result.success,
            broken=result.broken,
            transmissions=result.transmissions,
            terminus=result.terminus,
        )

    def _fail(self, g: ConnectivityGraph, source: int, dest: int, why: str) -> None:
        if math.isinf(bfs_distances(g, source)[dest]):
            raise DeliveryError(
                f"destination {dest} is unreachable from {source} on the current graph"
            )
        raise ProtocolInvariantError(
            f"forwarding {source} -> {dest} failed on a connected graph: {why}"
        )

    def _check_route(
        self, g: ConnectivityGraph, route: tuple[int, ...], source: int, dest: int
    ) -> None:
        if not route or route[0] != source or route[-1] != dest:
            raise ProtocolInvariantError(
                f"assembled route {route} does not join {source} and {dest}"
            )
        for a, b in zip(route, route[1:]):
            if b not in g.neighbors(a):
                raise ProtocolInvariantError(
                    f"assembled route {source} -> {dest} uses missing edge ({a}, {b})"
                )

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise ParameterError(f"node id {u} out of range [0, {self.n})")

    def _check_level(self, level: int) -> None:
        if not 0 <= level <= self.params.levels:
            raise ParameterError(
                f"level {level} out of range [0, {self.params.levels}]"
            )


def _loop_erase(sequence) -> tuple[int, ...]:
    route: list[int] = []
    index: dict[int, int] = {}
    for node in sequence:
        if node in index:
            for dropped in route[index[node] + 1 :]:
                del index[dropped]
            del route[index[node] + 1 :]
        else:
            index[node] = len(route)
            route.append(node)
    return tuple(route)


# ---------------------------------------------------------------------------
# Stand-alone primitives
# ---------------------------------------------------------------------------


def flood(
    engine: ProtocolEngine,
    g: ConnectivityGraph,
    origin: int,
    radius: int,
    level: int,
    t: int,
    parent: Optional[int] = None,
) -> int:
    """Flood ``origin``'s presence ``radius`` hops out, updating tables with
    shortest-path reverse entries; returns the transmission count (every node
    within radius-1 rebroadcasts once, the origin included)."""
    engine._check_node(origin)
    engine._check_level(level)
    if g.n != engine.n:
        raise ParameterError(f"graph has {g.n} nodes, engine has {engine.n}")
    if radius < 1:
        raise ParameterError(f"flood radius must be >= 1, got {radius}")
    dist, pred = dijkstra(
        g.csr,
        unweighted=True,
        indices=np.asarray([origin], dtype=np.int64),
        limit=float(radius),
        return_predecessors=True,
    )
    dist, pred = dist[0], pred[0]
    for v in np.flatnonzero(dist <= radius):
        v = int(v)
        if v == origin:
            continue
        engine._post_entry(v, origin, level, int(dist[v]), int(pred[v]), t, parent)
    return int(np.count_nonzero(dist <= radius - 1))


def probe(
    engine: ProtocolEngine,
    g: ConnectivityGraph,
    source: int,
    relay: int,
    dest: int,
    max_level: int,
    budget: Optional[int] = None,
) -> ProbeResult:
    """Send a probe from ``source`` along table next hops to ``relay`` asking
    whether it answers for ``dest`` at any level up to ``max_level``; the
    answer retraces the path, so transmissions count both directions."""
    engine._check_node(source)
    engine._check_node(relay)
    engine._check_node(dest)
    if g.n != engine.n:
        raise ParameterError(f"graph has {g.n} nodes, engine has {engine.n}")
    return engine._probe(g, source, relay, dest, max_level, budget=budget)
