"""Compare the lowest-cost and Q-learning adaptation strategies.

Trains the detection and severity models, runs the same attack stream over a
small workflow under both strategies, and prints composite rewards (pooled
min-max over price, time, mitigation, and value) per 25-run window so the
learner's improvement over its own early windows is visible.
"""

import numpy as np

from secflow.datagen import DatasetKind, generate, split
from secflow.detection import train_random_forest
from secflow.model import TenantConfig
from secflow.severity import fit_severity
from secflow.sim import (
    WorkflowClass,
    composite_rewards,
    generate_multicloud,
    generate_workflow_class,
    run_experiment,
)

MIX = {"normal": 0.5, "dos": 0.125, "probe": 0.125, "u2r": 0.125, "r2l": 0.125}
N_RUNS, WINDOW, RATE = 200, 25, 0.3


def main():
    detectors, datasets = {}, {}
    for i, kind in enumerate(DatasetKind):
        ds = generate(kind, 1500, MIX, seed=42 + i)
        datasets[kind] = ds
        train_ds, _ = split(ds, 0.8, seed=42)
        detectors[kind] = train_random_forest(train_ds, seed=42)
    severity = fit_severity(datasets, seed=42)

    workflow = generate_workflow_class(WorkflowClass.SMALL, seed=21)
    cloud = generate_multicloud(seed=22)

    experiments = {
        strategy: run_experiment(
            workflow, cloud, detectors, severity, TenantConfig(), N_RUNS,
            strategy, RATE, seed=33,
        )
        for strategy in ("lowest-cost", "adaptive")
    }
    pooled = composite_rewards(
        experiments["lowest-cost"].runs + experiments["adaptive"].runs
    )
    lc, ad = pooled[:N_RUNS], pooled[N_RUNS:]

    print(f"{N_RUNS} runs, attack rate {RATE}, composite reward per window:")
    print(f"{'window':>8} {'lowest-cost':>12} {'adaptive':>10}")
    for start in range(0, N_RUNS, WINDOW):
        print(f"{start // WINDOW:>8} {np.mean(lc[start:start + WINDOW]):>12.4f} "
              f"{np.mean(ad[start:start + WINDOW]):>10.4f}")
    print(f"\n{'overall':>8} {np.mean(lc):>12.4f} {np.mean(ad):>10.4f}")


if __name__ == "__main__":
    main()
