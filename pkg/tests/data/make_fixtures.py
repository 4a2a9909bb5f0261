"""Freeze oracle-computed fixtures for the test suite.

Run from the repository root:

    python tests/data/make_fixtures.py

Writes, next to this script:

* ``m3_runs.csv``        -- the six-run, three-component reference dataset
* ``m4_n24_block.csv``   -- full-factorial m=4 design with a two-level block
* ``m5_n40_block.csv``   -- 40-run m=5 design with a two-level block
* ``oracle_fixtures.json`` -- every frozen expected value, computed purely by
  ``tests/_oracle.py`` (the package is never imported here)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

import _oracle as oracle  # noqa: E402

M3_RUNS = [("A", "B", "C"), ("A", "C", "B"), ("B", "A", "C"),
           ("B", "C", "A"), ("C", "A", "B"), ("C", "B", "A")]
M3_RESPONSES = [26.7, 35.3, 32.4, 48.7, 35.9, 37.6]
M3_LABELS = {"A": 1, "B": 2, "C": 3}

WEIGHTED_MODELS = ["pwo", "tpwo:invh", "cp", "rs2"]  # nn is saturated at n=6
ALL_MODELS = WEIGHTED_MODELS + ["nn"]


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def m3_fixture():
    runs = [tuple(M3_LABELS[x] for x in r) for r in M3_RUNS]
    y = M3_RESPONSES
    perms = oracle.perms_lex(3)

    fits, predictions = {}, {}
    for model in ALL_MODELS:
        X = oracle.matrix(model, runs)
        f = oracle.fit(X, y)
        fits[model] = f
        ests, ses = [], []
        for perm in perms:
            row = oracle.ROW_BUILDERS[model](perm)
            est, var = oracle.predict(row, f)
            ests.append(est)
            ses.append(None if var is None else float(np.sqrt(max(var, 0.0))))
        predictions[model] = {
            "estimates": ests,
            "std_errors": ses if fits[model]["sigma2"] is not None else None,
            "ranks": oracle.ranks_largest_first(ests),
        }

    aics = [fits[m]["aic"] for m in WEIGHTED_MODELS]
    weights = oracle.akaike_weights(aics)

    est_rows = [predictions[m]["estimates"] for m in WEIGHTED_MODELS]
    var_rows = []
    for model in WEIGHTED_MODELS:
        f = fits[model]
        row = []
        for perm in perms:
            _, var = oracle.predict(oracle.ROW_BUILDERS[model](perm), f)
            row.append(var)
        var_rows.append(row)
    ma_est, ma_var = oracle.model_average(est_rows, var_rows, weights)

    rs2_best = perms[int(np.argmax(predictions["rs2"]["estimates"]))]

    grid_vals = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0]
    beta = fits["rs2"]["beta"]
    grid = []
    for p1 in grid_vals:
        for p2 in grid_vals:
            eta = float(
                np.dot([p1, p2, p1 * p1, p2 * p2, p1 * p2], beta))
            grid.append([p1, p2, eta])
    best_point = [2.0 * rs2_best.index(1) / 12.0 + 1.0 / 6.0,
                  2.0 * rs2_best.index(2) / 12.0 + 1.0 / 6.0]

    def fit_public(f):
        out = {k: f[k] for k in
               ("rss", "df_error", "n", "p", "sigma2", "rmse", "aic", "bic")}
        out["coefficients"] = list(map(float, f["beta"]))
        return out

    return {
        "runs": [" ".join(r) for r in M3_RUNS],
        "responses": y,
        "orders_lex": [" ".join("ABC"[c - 1] for c in perm) for perm in perms],
        "fits": {m: fit_public(fits[m]) for m in ALL_MODELS},
        "predictions": predictions,
        "akaike": {"models": WEIGHTED_MODELS, "weights": weights},
        "model_average": {
            "estimates": ma_est,
            "variances": ma_var,
            "std_errors": [float(np.sqrt(v)) for v in ma_var],
            "ranks": oracle.ranks_largest_first(ma_est),
            "mean_variance": float(np.mean(ma_var)),
        },
        "rs2_best_order": " ".join("ABC"[c - 1] for c in rs2_best),
        "surface": {"grid_values": grid_vals, "grid": grid,
                    "best_point": best_point},
    }


def design_fixture(m, n, seed_start, rank_targets):
    """Search deterministic seeds for a design meeting every rank target."""
    perms = oracle.perms_lex(m)
    for seed in range(seed_start, seed_start + 200):
        rng = np.random.default_rng(seed)
        if n == len(perms):
            runs = perms
            block = ["1" if b else "2" for b in rng.permutation(n) < n // 2]
        else:
            idx = sorted(rng.permutation(len(perms))[:n].tolist())
            runs = [perms[i] for i in idx]
            block = ["1"] * (n // 2) + ["2"] * (n - n // 2)
        bcol = oracle.block_columns(block)
        ok = True
        achieved = {}
        for model, with_block, target in rank_targets:
            X = oracle.matrix(model, runs)
            if with_block:
                X = np.hstack([X, bcol])
            achieved[(model, with_block)] = oracle.rank_of(X)
            ok = ok and achieved[(model, with_block)] == target
        if ok:
            y = np.round(rng.normal(50.0, 5.0, size=n), 3)
            rows = [list(runs[i]) + [block[i], y[i]] for i in range(n)]
            header = [f"pos_{j}" for j in range(1, m + 1)] + ["block", "y"]
            return seed, header, rows
    raise RuntimeError(f"no seed met the rank targets for m={m}, n={n}")


def main():
    fixtures = {"m3": m3_fixture()}

    m4_targets = [
        ("pwo", True, 8), ("tpwo:invh", True, 8), ("cp", True, 11),
        ("rs2", True, 10), ("nn", True, 13),
        ("rs3", True, 16), ("rs3s", True, 13),
        ("rs3", False, 15), ("rs3s", False, 12),
    ]
    seed4, header4, rows4 = design_fixture(4, 24, 0, m4_targets)
    write_csv(HERE / "m4_n24_block.csv", header4, rows4)

    m5_targets = [
        ("pwo", True, 12), ("tpwo:invh", True, 12), ("cp", True, 18),
        ("rs2", True, 15), ("nn", True, 21),
        ("rs3", True, 30), ("rs3s", True, 24),
        ("rs3", False, 29), ("rs3s", False, 23),
    ]
    seed5, header5, rows5 = design_fixture(5, 40, 0, m5_targets)
    write_csv(HERE / "m5_n40_block.csv", header5, rows5)

    fixtures["m4_design"] = {
        "csv": "m4_n24_block.csv", "seed": seed4, "n": 24,
        "df_with_block": {"pwo": 16, "tpwo:invh": 16, "cp": 13, "rs2": 14,
                          "nn": 11, "rs3": 8, "rs3s": 11},
    }
    fixtures["m5_design"] = {
        "csv": "m5_n40_block.csv", "seed": seed5, "n": 40,
        "df_with_block": {"pwo": 28, "tpwo:invh": 28, "cp": 22, "rs2": 25,
                          "nn": 19, "rs3": 10, "rs3s": 16},
        "df_without_block": {"rs3": 11, "rs3s": 17},
    }

    write_csv(HERE / "m3_runs.csv", ["pos_1", "pos_2", "pos_3", "y"],
              [list(r) + [y] for r, y in zip(M3_RUNS, M3_RESPONSES)])

    with open(HERE / "oracle_fixtures.json", "w", encoding="utf-8") as fh:
        json.dump(fixtures, fh, indent=1)
    print(f"m4 design seed: {seed4}; m5 design seed: {seed5}")
    print("akaike weights:", fixtures["m3"]["akaike"]["weights"])
    print("ma estimates:", fixtures["m3"]["model_average"]["estimates"])
    print("ma std errors:", fixtures["m3"]["model_average"]["std_errors"])
    print("rs2 best order:", fixtures["m3"]["rs2_best_order"])
    print("mean variance:", fixtures["m3"]["model_average"]["mean_variance"])


if __name__ == "__main__":
    main()
