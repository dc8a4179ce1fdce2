"""A small seeded study: how often does the optimal equilibrium beat the
arbitrary one, across many dealt hands?"""

from nashtree import ExperimentConfig, report_to_json, run_experiment

config = ExperimentConfig(cards=3, hands=30, seed=0, miss_penalty="flat")
report = run_experiment(config)

print(f"hands solved: {report.hands}")
print(f"hands with more than one equilibrium payoff: "
      f"{report.multiple_equilibria_fraction()}")
for criterion in config.criteria:
    print(f"best beats arbitrary under {criterion:>6}: "
          f"{report.improvement_fraction(criterion)}")
print(f"hands where mixing beats every pure equilibrium on welfare: "
      f"{report.social_gap_fraction()}")

print("\nfirst per-hand record of the JSON report:")
print("\n".join(report_to_json(report).splitlines()[:24]))
