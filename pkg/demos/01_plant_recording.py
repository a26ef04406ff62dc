"""Record the simulated aero plant and look at what the decoy will imitate.

Run: python3 demos/01_plant_recording.py
"""
import numpy as np

from genpot.cps_sim import load_config, lqr_gain, simulate
from genpot.timeseries import REPLICATED, fit_scaler, split

cfg = load_config()
K = lqr_gain(cfg.plant.A, cfg.plant.B, cfg.lqr.Q, cfg.lqr.R)
print(f"LQR gain {K.shape[0]} x {K.shape[1]}:")
print(np.array2string(K, precision=3, suppress_small=True))

# one full pass of the set-point schedule at the full-scale sample rate
ds = simulate(cfg, duration=20.0, rate_hz=500.0, seed=0)
print(f"\n{len(ds)} frames at {ds.rate_hz:g} Hz")

train, val = split(ds, 0.8)
scaler = fit_scaler(train)
print(f"train {len(train)} / validation {len(val)} frames\n")
print(f"{'variable':>12} {'min':>9} {'max':>9} {'std':>9}")
values = train.replicated()
for k, name in enumerate(REPLICATED):
    print(f"{name:>12} {scaler.mins[k]:9.4f} {scaler.maxs[k]:9.4f} {values[:, k].std():9.4f}")

# how well the controller tracks the last set-point of each schedule step
cols = {name: k for k, name in enumerate(REPLICATED)}
everything = ds.replicated()
for t in (4.9, 9.9, 14.9, 19.9):
    row = everything[int(t * ds.rate_hz)]
    print(f"t={t:5.1f}s  yaw {row[cols['Yaw']]:+.3f} -> {row[cols['TargetYaw']]:+.3f}   "
          f"pitch {row[cols['Pitch']]:+.3f} -> {row[cols['TargetPitch']]:+.3f}")
