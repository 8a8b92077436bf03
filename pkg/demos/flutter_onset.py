"""Flutter onset, limit cycle and its suppression.

Run with ``python3 demos/flutter_onset.py`` (roughly a minute).

With the aerodynamic load switched on, the linearized beam has a mode with a
positive growth rate. The geometric stiffening of the large-deflection model
saturates that growth into a limit cycle, which the identified H-infinity
controller then removes.
"""

import numpy as np

from flutterbench import pipeline
from flutterbench.config import load_config
from flutterbench.fem import linearized_modes
from flutterbench.records import spectrum

cfg = load_config("flutter")
fem, aero = pipeline.build_plant(cfg)

wind_off = linearized_modes(fem, None)
wind_on = linearized_modes(fem, aero)
print("wind-off modes [Hz]:", np.round(wind_off.frequencies_hz[:3], 1))
print("wind-on  modes [Hz]:", np.round(wind_on.frequencies_hz[:3], 1))
print(f"largest growth rate {wind_on.max_growth_rate:.2f} 1/s (unstable: {wind_on.unstable})")

# The open-loop response to a small impulse settles onto a limit cycle.
ol = pipeline.simulate(cfg, None)
late = ol.t >= cfg.simulation.metric_start
spec = spectrum(ol.y[late], ol.dt, "hann")
print(f"limit cycle: {ol.metrics['peak'] * 1e3:.3f} mm at {spec.dominant():.1f} Hz")

# Identify on the fluttering plant, design, and close the loop.
ident = pipeline.identify(cfg)
result = pipeline.design(cfg, ident.model)
cl = pipeline.simulate(cfg, result.implemented)
print(f"ARX order {ident.model.n}, gamma {result.gamma:.3g}")
print(f"closed-loop late peak {cl.metrics['peak'] * 1e3:.5f} mm")
