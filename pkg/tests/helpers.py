"""Panel builders shared by the tests."""

import numpy as np

from didcits import PanelDataset

def balanced_panel(rng, n_pre, n_post, units, noise_sd=1.0, start=1, covariates=0):
    """Random balanced panel with arbitrary cell means plus noise."""
    times = np.arange(start, start + n_pre + n_post)
    t0 = int(times[n_pre])
    cell = rng.normal(0, 5, size=(2, times.size))
    unit_id, group, time, y = [], [], [], []
    for g in (0, 1):
        for u in range(units):
            for j, t in enumerate(times):
                unit_id.append(f"{g}-{u}")
                group.append(g)
                time.append(t)
                y.append(cell[g, j] + rng.normal(0, noise_sd))
    covs = None
    if covariates:
        covs = {f"z{k}": rng.normal(size=len(y)) for k in range(covariates)}
        y = np.asarray(y) + sum(covs.values())
    return PanelDataset.from_arrays(unit_id, group, time, y, covs), t0


def panel_from_means(mean_fn, times, units=1, noise=None, rng=None):
    """Panel with outcome mean_fn(g, t) for every unit, optional noise."""
    unit_id, group, time, y = [], [], [], []
    for g in (0, 1):
        for u in range(units):
            for t in times:
                unit_id.append(f"{g}-{u}")
                group.append(g)
                time.append(t)
                v = mean_fn(g, t)
                if noise:
                    v += rng.normal(0, noise)
                y.append(v)
    return PanelDataset.from_arrays(unit_id, group, time, y)


def cell_gap(panel):
    """Treated minus comparison mean at each time, computed directly."""
    out = {}
    for t in np.unique(panel.time):
        a = panel.outcome[(panel.group == 1) & (panel.time == t)].mean()
        b = panel.outcome[(panel.group == 0) & (panel.time == t)].mean()
        out[t.item()] = a - b
    return out
