"""Brute-force reference implementations used as independent test oracles."""

from __future__ import annotations

from burstnet.dynamics import FiringMode
from burstnet.netcore import SynapseKind


def support_oracle(modes, net):
    """Tonic ancestors of each bursting neuron by repeated set expansion."""
    active = {n for n, m in modes.items() if m is not FiringMode.SILENT}
    edges = [(s.pre, s.post) for s in net.synapses if s.kind is SynapseKind.DRIVING]
    out = {}
    for b, m in modes.items():
        if m is not FiringMode.BURSTING:
            continue
        anc = {b}
        while True:
            grown = anc | {p for p, q in edges if q in anc and p in active}
            if grown == anc:
                break
            anc = grown
        out[b] = frozenset(n for n in anc if modes.get(n) is FiringMode.TONIC)
    return out


def binds(a, b, support, net, theta_bind):
    if support[a] & support[b]:
        return True
    sa, sb = support[a] | {a}, support[b] | {b}
    for s in net.synapses:
        if s.kind is SynapseKind.RELAY and s.weight >= theta_bind:
            if (s.pre in sa and s.post in sb) or (s.pre in sb and s.post in sa):
                return True
    return False


def components_oracle(modes, net, theta_bind):
    """O(B^2) pairwise predicate, then breadth-first components."""
    support = support_oracle(modes, net)
    nodes = sorted(support)
    adj = {a: [b for b in nodes if b != a and binds(a, b, support, net, theta_bind)] for a in nodes}
    seen, comps = set(), []
    for start in nodes:
        if start in seen:
            continue
        comp, queue = {start}, [start]
        seen.add(start)
        while queue:
            x = queue.pop(0)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    queue.append(y)
        comps.append(frozenset(comp))
    return sorted(comps, key=min), support
