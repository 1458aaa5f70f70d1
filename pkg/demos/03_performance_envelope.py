"""Walkthrough: charting the achievable performance envelope.

Every (device, variant) assignment of the feature-matching pipeline is a
configuration with its own latency, throughput, variability, and energy
rate. The envelope is the Pareto frontier over those four axes: the
configurations you would actually choose between.
"""

from amstack import dsl, envelope, fixtures, graph as G, substrate

program, _ = dsl.load_program(fixtures.path("orb.amg"))
graph, _ = G.lower(program)
model = substrate.load_profiles(fixtures.path("orb_substrate.json"))

# 4 candidates per stage x 3 stages = 64 configurations: small enough to
# enumerate exhaustively (larger spaces fall back to seeded sampling)
points = envelope.enumerate_configs(graph, model)
print(f"evaluated {len(points)} configurations")

frontier = envelope.pareto_filter(points)
print(f"frontier: {len(frontier.points)} points, {frontier.dominated_count} dominated\n")
print(envelope.export_envelope(frontier, graph, "csv"))

# the spread shows why the envelope is a compromise: the fastest config is
# not the least variable or the cheapest
lats = [p.latency_ms for p in points]
energies = [p.energy_rate_w for p in points]
print(f"latency range over all configs: {min(lats):.1f} .. {max(lats):.1f} ms")
print(f"energy range over all configs: {min(energies):.2f} .. {max(energies):.2f} W")

# sampled enumeration is reproducible: same seed, same points
sampled = envelope.enumerate_configs(graph, model, limit=16, seed=42)
again = envelope.enumerate_configs(graph, model, limit=16, seed=42)
assert [p.metrics() for p in sampled] == [p.metrics() for p in again]
print(f"\nseeded sample of 16 configs is reproducible: frontier "
      f"{len(envelope.pareto_filter(sampled).points)} points")
