"""Train the eight per-variable models briefly, roll them out and score them.

A deliberately small configuration so it finishes in about a minute; the
``desk`` CLI profile is the realistic small-scale setting.

Run: python3 demos/02_train_and_generate.py
"""
import numpy as np

from genpot.cps_sim import load_config, simulate
from genpot.evalsuite import evaluate
from genpot.generator import CompositeGenerator, generate_trajectory, init_models
from genpot.lstm import train_many
from genpot.timeseries import REPLICATED, fit_scaler, make_windows, normalize, split

ds = simulate(load_config(), duration=60.0, rate_hz=50.0, seed=0)
train_ds, val_ds = split(ds, 0.8)
scaler = fit_scaler(train_ds)

L, H = 50, 10
windows = make_windows(train_ds, L, H, stride=5, params=scaler)
models = init_models(np.random.default_rng(0), L, H, hidden=16)
print(f"training 8 models on {len(windows)} windows")
reports = train_many(models, windows, epochs=25, lr=1e-2, batch_size=32,
                     progress=lambda e, tr, va: e % 5 == 4 and print(f"  epoch {e + 1:3d} mean MSE {tr.mean():.5f}"))
for name, r in zip(REPLICATED, reports):
    print(f"  {name:>12} final/first MSE {r.train_mse[-1] / r.train_mse[0]:.3f}")

gen = CompositeGenerator(models, scaler, rate_hz=ds.rate_hz)
seed = normalize(val_ds.replicated()[:L], scaler)
segments = generate_trajectory(gen, seed, 30)
traj = np.concatenate([s.values for s in segments])
print(f"\ngenerated {len(traj)} rows ({len(traj) / gen.rate_hz:g} s); all within training range: "
      f"{bool(np.all((traj >= scaler.mins) & (traj <= scaler.maxs)))}")

table = evaluate(gen, val_ds, T=25, S=8, rng_seed=0)
print("\nmedian normalized RMSE by segment (first, last):")
for k, name in enumerate(REPLICATED):
    print(f"  {name:>12} {table.median[0, k]:.4f} -> {table.median[-1, k]:.4f}")
print(f"quantiles ordered: {table.ordered()}")
