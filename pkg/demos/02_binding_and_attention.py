"""Two unrelated percepts become two ensembles in separate gamma slots; the larger wins attention."""

from burstnet import ClockParams, Stimulus, assign_modes, emit_spikes, forward_pass, strong_subgraph
from burstnet.binding import form_ensembles, phase_map, select_dominant
from burstnet.netcore import parse_network_spec, build_network

net = build_network(
    parse_network_spec(
        """
[regions]
v1 sensory 0
[neurons]
v1 9 E
[synapses]
0 6 0.6 driving
1 6 0.6 driving
2 7 0.6 driving
3 7 0.6 driving
4 8 0.6 driving
6 7 0.9 relay
"""
    )
)
active = forward_pass(net, Stimulus.pattern([0, 1, 2, 3, 4]))
modes = assign_modes(active, strong_subgraph(net, 0.5), net.apical_view())
ensembles = form_ensembles(modes, net)
for e in ensembles:
    print(f"ensemble {e.id}: members {sorted(e.members)} support {sorted(e.support)} {e.rate_hz:.1f} Hz slot {e.phase_slot}")
print("dominant:", select_dominant(ensembles).dominant)

spikes = emit_spikes(modes, phase_map(ensembles), ClockParams(), 0)
print("first gamma cycle:", [(s.t, s.neuron) for s in spikes if s.t < 25 and modes[s.neuron].value == "bursting"])
