"""Walkthrough: static mapping and admission control on the vehicle pipeline.

The mapper is HEFT list scheduling over a modeled platform; admission
layers utilization, frequency, latency, variance, and energy checks on
top and refuses the program when the requirements cannot be met.
"""

from amstack import dsl, fixtures, graph as G, scheduler, substrate

program, _ = dsl.load_program(fixtures.path("av.amg"))
graph, _ = G.lower(program)
model = substrate.load_profiles(fixtures.path("av_substrate.json"))

# the platform: a 16-lane host CPU and a 2-lane discrete GPU
for d in model.devices:
    print(f"device {d.id}: {d.device_class} x{d.core_count} lanes, idle {d.idle_power_w} W")

# HEFT places every operator; require_map pins 2DPerception to the GPU
mapping = scheduler.heft_schedule(graph, model)
for nid, (dev, variant) in sorted(mapping.assignment.items()):
    print(f"  {graph.node(nid).name:17s} -> {dev} ({variant})")
print(f"one-wave makespan estimate: {mapping.makespan_estimate_ms:.3f} ms")
print(f"sustained utilization: { {d: round(u, 3) for d, u in mapping.utilization.items()} }")

# admission against the program's own contracts
report = scheduler.admit(graph, model, list(program.contracts))
print(f"\nverdict with the file's contracts: {report.verdict}")

# an impossible bound is refused with an explicit margin, not a crash
tight = [dsl.ContractStmt(scope="end_to_end", latency_bound_ms=10.0)]
refused = scheduler.admit(graph, model, tight)
print(f"verdict with latency <= 10 ms: {refused.verdict}")
for v in refused.violations:
    print(f"  {v.kind}: {v.detail} (margin {v.margin:.3f})")

# an end-to-end bound decomposes into per-stage budgets along the worst path
lat, var, path = scheduler.analytic_latency(graph, model, mapping.assignment)
print(f"\nworst path ({lat:.3f} ms): {' -> '.join(graph.node(i).name for i in path)}")
for sc in scheduler.decompose_contract(1000.0, path, graph, model, mapping.assignment):
    print(f"  budget {graph.node(sc.node_id).name:17s} {sc.latency_budget_ms:8.3f} ms")
