"""Two sweeps through the harness: connectivity around r_c, and the diameter
against the closed-form bound and the older reference curve."""

import rgghops as rh

rep = rh.threshold_sweep(rh.ExperimentConfig(
    "threshold-sweep", n_list=[5000],
    r_list=["0.6*rc", "0.8*rc", "0.9*rc", "rc", "1.1*rc", "1.3*rc", "1.6*rc", "2*rc"],
    trials=20, master_seed=3,
))
for point in rep["summary"]["cells"][0]["sweep"]:
    bar = "#" * int(40 * point["connected_frequency"])
    print(f"{point['r_token']:>7}  r={point['r']:.3f}  {point['connected_frequency']:.2f} {bar}")

# %% diameter
rep = rh.diameter_experiment(rh.ExperimentConfig(
    "diameter", n_list=[4000], r_list=["2*rc", "4*rc", "70sqrtlog"], trials=3, master_seed=4,
))
for row in rep["rows"]:
    print(f"r={row['r']:.2f}  diam in [{row['lower']}, {row['upper']}] ({row['mode']})  "
          f"bound={row['bound_value']:.2f} applicable={row['bound_applicable']}  "
          f"reference={row['prior_reference']:.2f}")
