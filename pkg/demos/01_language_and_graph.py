"""Walkthrough: the graph language and what the compiler derives from it.

A program is a handful of declarative statements: per-sensor/per-operator
requirements, the wiring between them, and optional mapping advice and
performance contracts. Run this to see a program go from text to an
analyzed dataflow graph.
"""

from amstack import dsl, graph as G

TEXT = """
# A toy inspection robot: one camera, one ranger, two processing stages.
require Ranger { frequency >= 40 Hz; message_size = 128 B }
require Camera { resolution = 640x480; frequency >= 20 Hz; message_size = 307200 B }
require Detect { frequency >= 20 Hz; message_size = 2 KB }
require Steer { frequency >= 40 Hz; message_size = 64 B }

node objects = Detect(Camera)
node cmd = Steer(objects, Ranger)

hint Detect on gpu
contract end_to_end { latency <= 120 ms }
"""

# parse + resolve: sources and operators are told apart by how names are
# used, not by syntax
program, diags = dsl.parse_text(TEXT)
resolved, rdiags = dsl.resolve(program)
for d in diags + rdiags:
    print(d.format_human())
print("sources:  ", [s.name for s in resolved.sources])
print("operators:", [o.name for o in resolved.operators])

# the canonical form round-trips: parse(pretty_print(p)) == p
print("\ncanonical form:\n" + dsl.pretty_print(resolved))

# lowering builds the DAG and checks reachability and acyclicity
graph, warnings = G.lower(resolved)
print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")

# every node fires at its required rate; a consumer outpacing its producer
# re-reads samples, which the rate analysis flags
rates = G.rate_analysis(graph)
for w in rates.warnings:
    print("rate:", w.message)

# bandwidth falls out of rate x message size, per edge and per stage cut
bw = G.aggregate_bandwidth(graph)
for (p, c, port), bps in bw.per_edge_bps.items():
    print(f"edge {graph.node(p).name} -> {graph.node(c).name}: {bps / 1e3:.1f} KB/s")
print("stage cuts (KB/s):", [round(x / 1e3, 1) for x in bw.stage_cut_bps])

# buffer capacities absorb rate mismatch plus one slot of phase slack
sized = G.buffer_sizing(graph)
for e in sized.edges:
    print(f"buffer {graph.node(e.producer).name} -> {graph.node(e.consumer).name}: {e.buffer_capacity} slots")
print(f"total buffer bytes: {G.total_buffer_bytes(sized)}")

print("\nDOT for visualization:\n" + G.graph_to_dot(graph))
