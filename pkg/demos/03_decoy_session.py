"""Start the decoy and poke at it like an intruder would.

The models get a few seconds of training on a short recording, enough for
the served values to move.  Prints the intrusion log at the end.

Run: python3 demos/03_decoy_session.py
"""
import json
import time

import numpy as np

from genpot.cps_sim import load_config, simulate
from genpot.generator import CompositeGenerator, init_models
from genpot.lstm import train_many
from genpot.opcua.addrspace import OBJECTS
from genpot.opcua.client import Client, ClientError
from genpot.opcua.codec import NodeId
from genpot.opcua.messages import UserNameIdentityToken
from genpot.opcua.server import IntrusionLog
from genpot.runtime import Honeypot, RuntimeConfig
from genpot.timeseries import fit_scaler, make_windows

recording = simulate(load_config(), duration=20.0, rate_hz=500.0, seed=0)
scaler = fit_scaler(recording)
models = init_models(np.random.default_rng(1), 40, 20, 8)
train_many(models, make_windows(recording, 40, 20, 10, scaler), epochs=3, lr=1e-2)
gen = CompositeGenerator(models, scaler, rate_hz=500.0)
log = IntrusionLog(keep=True)
cfg = RuntimeConfig(host="127.0.0.1", port=0, intrusion_log=None)

with Honeypot(gen, cfg, log_sink=log) as pot:
    print(pot.status_line())
    host, port = pot.server.address

    # a curious visitor tries credentials first, then goes anonymous
    c = Client(host, port)
    c.hello()
    c.open_channel()
    c.create_session("scanner")
    try:
        c.activate_session(UserNameIdentityToken("username", "admin", b"admin", None))
    except ClientError as exc:
        print("username login:", exc)
    c.activate_session()

    for obj in c.browse(OBJECTS).references:
        children = c.browse_names(obj.node_id.node_id)
        print(f"{obj.browse_name.name}: {', '.join(children)}")

    pitch = NodeId(2, 2022)
    for _ in range(3):
        dv = c.read([pitch])[0]
        print(f"Beam/Pitch = {dv.value.value:+.4f}  (source ts {dv.source_timestamp})")
        time.sleep(0.01)

    print("write Fan0/Voltage ->", hex(c.write(NodeId(2, 2001), 24.0)))
    print("write Target/TargetPitch ->", hex(c.write(NodeId(2, 2032), 0.3)))
    c.disconnect()
    time.sleep(0.05)
    print(f"published {pot.stats.published} rows, median spacing {pot.stats.median_spacing() * 1e3:.2f} ms")

print("\nintrusion log (reads omitted):")
for rec in log.records:
    if rec["op"] != "read":
        print(json.dumps(rec))
