"""Free decay versus a single echo on the built-in bath.

The bath has seven spins with flip-flop dynamics, so a single refocusing
pulse helps but cannot fully undo the dephasing: the coupling field moves
during the evolution. The script measures both 1/e times and their ratio,
and estimates the bath correlation time for context.
"""

import numpy as np

from spinbath import (
    RunSpec,
    compile_free,
    decay_time,
    default_model,
    hahn_decay_trace,
    propagate,
)
from spinbath.engine import model_tau_b

model = default_model()
print(f"bath: {model.n_bath} spins, dim {model.ops.dim}")

est = model_tau_b(model)
print(f"bath correlation time tau_B = {est.value:.1f} us")

fid_trace = propagate(RunSpec(model=model, timeline=compile_free(4.0, n_cycles=100)))
fid = decay_time(fid_trace)
print(f"free decay:  1/e time {fid.decay_time:7.1f} us")

echo_trace = hahn_decay_trace(model, np.linspace(5.0, 300.0, 60))
echo = decay_time(echo_trace)
print(f"single echo: 1/e time {echo.decay_time:7.1f} us")
print(f"echo gain: x{echo.decay_time / fid.decay_time:.2f}")

print()
print("  t_us     free      echo")
for t in (50.0, 100.0, 150.0, 200.0):
    f = np.interp(t, fid_trace.times, fid_trace.s)
    e = np.interp(t, echo_trace.times, echo_trace.s)
    print(f"{t:6.0f}   {f:7.4f}   {e:7.4f}")
