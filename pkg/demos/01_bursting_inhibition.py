"""Only the top of an explained tree bursts."""

from burstnet import Stimulus, assign_modes, fixture_path, forward_pass, load_network, strong_subgraph

net = load_network(fixture_path("canonical_931.net"))
strong = strong_subgraph(net, 0.16)

# nine features switch on three parts; the object neuron (12) stays below threshold
active = forward_pass(net, Stimulus.pattern(range(9)))
modes = assign_modes(active, strong, net.apical_view())
for n in sorted(modes):
    print(f"neuron {n:2d}  {modes[n].value}")

# make the parts drive the object strongly: now the parts are explained too
trained = net.with_weights({net.synapse_index(m, 12): 0.9 for m in (9, 10, 11)})
modes = assign_modes(forward_pass(trained, Stimulus.pattern(range(9))), strong_subgraph(trained, 0.16))
print("after training, bursting:", sorted(n for n, m in modes.items() if m.value == "bursting"))
