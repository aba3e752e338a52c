"""Window copying: store marked noise segments, then emit their sum.

Evaluation is linear. The SSM reads the signal channel, its final state is
decoded through the dual frame, and the decoded windows are compared with
the truth. The marker channel is generated but not consumed because the
evaluator already knows where the windows are.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from wavessm.errors import Infeasible, Overflow
from wavessm.models import CopyTaskInstance, Measure, TaskReport
from wavessm.safari import derive, dual_frame
from wavessm.ssm import bilinear_discretize, decode_state, run

log = logging.getLogger(__name__)

DEFAULT_T = 4000
DEFAULT_D = 25
MAX_ATTEMPTS = 10_000
SUMMARY_COLUMNS = (
    "family", "measure", "N", "W", "window_mse_mean", "window_mse_std",
    "target_mse_mean", "target_mse_std", "seeds", "divergent",
)


def gen_copy_task(T=DEFAULT_T, W=5, D=DEFAULT_D, seed=0):
    """White noise with W disjoint length-D windows and their elementwise sum."""
    if W < 0 or D < 1:
        raise ValueError("need W >= 0 and D >= 1")
    if W * D + W > T:
        raise Infeasible(f"{W} windows of length {D} do not fit in T={T}")
    rng = np.random.default_rng(seed)
    signal = rng.standard_normal(T)
    starts = []
    attempts = 0
    while len(starts) < W:
        if attempts == MAX_ATTEMPTS:
            raise Infeasible(f"placed {len(starts)} of {W} windows in {MAX_ATTEMPTS} attempts")
        attempts += 1
        # keep one free sample to either side, and off both sequence ends
        start = int(rng.integers(1, T - D))
        if all(start + D + 1 <= s or s + D + 1 <= start for s in starts):
            starts.append(start)
    starts.sort()
    markers = np.zeros(T)
    for s in starts:
        markers[s] = 1.0
        markers[s + D] = -1.0
    target = np.zeros(D)
    for s in starts:
        target += signal[s:s + D]
    return CopyTaskInstance(
        T=T,
        signal=signal,
        markers=markers,
        windows=tuple((s, D) for s in starts),
        target=target,
        seed=seed,
    )


def windowed_target(x, windows, D):
    out = np.zeros(D)
    for start, length in windows:
        out += x[start:start + length]
    return out


def _decoder(frame, measure, delta, T):
    if frame.L != T:
        raise ValueError(f"frame grid L={frame.L} must equal the sequence length T={T}")
    pair = derive(frame, measure)
    ssm = bilinear_discretize(pair, 1.0 / (T - 1) if delta is None else delta)
    return ssm, dual_frame(frame, weighted=True)


def eval_reconstruction(frame, measure, delta, instance, decoder=None):
    """Run the SSM on the signal, decode the final state, score the windows."""
    ssm, dual = decoder or _decoder(frame, measure, delta, instance.T)
    _, h = run(ssm, instance.signal)
    decoded = decode_state(h, frame, dual=dual)
    if instance.W == 0:
        window_mse = target_mse = 0.0
    else:
        mask = instance.window_mask()
        window_mse = float(np.mean((decoded[mask] - instance.signal[mask]) ** 2))
        estimate = windowed_target(decoded, instance.windows, instance.D)
        target_mse = float(np.mean((estimate - instance.target) ** 2))
    return TaskReport(
        family=frame.family,
        measure=measure.kind,
        N=frame.N,
        W=instance.W,
        window_mse=window_mse,
        target_mse=target_mse,
        seed=instance.seed,
    )


def compare_frames(frames, W_list, seeds, D=DEFAULT_D, delta=None, measure=None, workers=1):
    """Mean and spread per (frame, W) over seeds, in input order."""
    measure = measure or Measure.translated(1.0)
    if not frames:
        return []
    if not seeds:
        raise ValueError("need at least one seed")
    T = frames[0].L
    if any(f.L != T for f in frames):
        raise ValueError("frames must share one grid length")
    decoders = [_decoder(f, measure, delta, T) for f in frames]
    instances = {(W, seed): gen_copy_task(T, W, D, seed) for W in W_list for seed in seeds}
    cells = [(i, W, seed) for i in range(len(frames)) for W in W_list for seed in seeds]

    def evaluate(cell):
        i, W, seed = cell
        try:
            return eval_reconstruction(frames[i], measure, delta, instances[(W, seed)], decoders[i])
        except Overflow as exc:
            log.warning("%s W=%d seed=%d diverged: %s", frames[i].family, W, seed, exc)
            return TaskReport(frames[i].family, measure.kind, frames[i].N, W, float("nan"),
                              float("nan"), seed=seed, divergent=True)

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        reports = list(pool.map(evaluate, cells))

    rows = []
    per_cell = len(seeds)
    for k in range(0, len(reports), per_cell):
        group = reports[k:k + per_cell]
        ok = [r for r in group if not r.divergent]
        window = np.array([r.window_mse for r in ok])
        target = np.array([r.target_mse for r in ok])
        first = group[0]
        rows.append({
            "family": first.family,
            "measure": first.measure,
            "N": first.N,
            "W": first.W,
            "window_mse_mean": float(window.mean()) if ok else float("nan"),
            "window_mse_std": float(window.std()) if ok else float("nan"),
            "target_mse_mean": float(target.mean()) if ok else float("nan"),
            "target_mse_std": float(target.std()) if ok else float("nan"),
            "seeds": len(ok),
            "divergent": len(group) - len(ok),
        })
    return rows
