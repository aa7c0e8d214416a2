"""Monte Carlo codeword-error-rate simulation over quasi-static Rayleigh fading.

Reproducibility
---------------
Every random quantity of trial ``t`` at sweep point ``p`` comes from its own
substream: a PCG64 generator keyed by ``(seed, p, stream)`` and advanced by
``t * 2**32`` outputs. Trials are processed in fixed blocks, so results do not
depend on how blocks are spread over worker threads.

Uniforms are turned into standard normals with the Box-Muller transform
``sqrt(-2 ln u1) * (cos(2 pi u2), sin(2 pi u2))`` with ``u1 = 1 - U``,
``U`` uniform on [0, 1). Symbol indices are ``floor(M * U)``.

SNR convention
--------------
Codewords are scaled so that ``E||S||_F^2 = n_t * T``; the average signal
power per receive antenna per channel use is then ``n_t`` and
``SNR = n_t / N0``.
"""

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import decoders as dec
from .batch import decode_batch
from .codes import StbcCode, get_code
from .constellation import Constellation, from_name

__all__ = [
    "SimConfig",
    "ConfigurationError",
    "CerPoint",
    "Substream",
    "box_muller",
    "rng_streams",
    "energy_scale",
    "mean_codeword_energy",
    "wilson_interval",
    "run_cer_sweep",
    "to_csv",
    "parse_snr_range",
    "DECODERS",
    "SNR_DEFINITION",
]

BLOCK = 1000
STREAMS = {"symbols": 0, "channel": 1, "noise": 2}
DECODERS = ("fast", "exhaustive", "sd")
SNR_DEFINITION = "E||S||_F^2 = n_t*T after scaling; SNR = n_t / N0 per receive antenna"
CSV_HEADER = "snr_db,trials,errors,cer,ci_low,ci_high,avg_metric_computations"
_Z95 = 1.959963984540054


def box_muller(u: np.ndarray) -> np.ndarray:
    """Map an even number of uniforms on [0, 1) to as many standard normals."""
    u = np.asarray(u, dtype=float)
    rad = np.sqrt(-2.0 * np.log1p(-u[..., 0::2]))
    ang = 2.0 * np.pi * u[..., 1::2]
    out = np.empty(u.shape)
    out[..., 0::2] = rad * np.cos(ang)
    out[..., 1::2] = rad * np.sin(ang)
    return out


class ConfigurationError(ValueError):
    """Code, decoder and constellation do not fit together."""


class Substream:
    """Sequential draws from one trial's substream."""

    def __init__(self, gen: np.random.Generator):
        self._gen = gen

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def normals(self, n: int) -> np.ndarray:
        return box_muller(self._gen.random(2 * ((n + 1) // 2)))[:n]


class _StreamFactory:
    """Per-(seed, point, stream) base state; not shared between threads."""

    def __init__(self, seed: int, point: int, stream: str):
        ss = np.random.SeedSequence(seed, spawn_key=(point, STREAMS[stream]))
        self._bitgen = np.random.PCG64(ss)
        self._base = self._bitgen.state
        self._gen = np.random.Generator(self._bitgen)

    def trial(self, index: int) -> Substream:
        self._bitgen.state = self._base
        self._bitgen.advance(index << 32)
        return Substream(self._gen)


def rng_streams(seed: int, point_index: int, trial_index: int,
                stream: str = "noise") -> Substream:
    """Substream for one (seed, sweep point, trial, purpose) combination."""
    return _StreamFactory(seed, point_index, stream).trial(trial_index)


@dataclass(frozen=True)
class SimConfig:
    code_name: str
    decoder_name: str = "fast"
    constellation: str = "4"
    snr_db_list: tuple = (10.0,)
    trials_per_point: int = 10000
    seed: int = 0
    n_r: int = 2
    workers: int | None = None

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ConfigurationError("trials_per_point must be >= 1")
        if len(self.snr_db_list) == 0:
            raise ConfigurationError("snr_db_list is empty")
        if self.decoder_name not in DECODERS:
            raise ConfigurationError(f"decoder must be one of {DECODERS}")


@dataclass(frozen=True)
class CerPoint:
    snr_db: float
    trials: int
    errors: int
    cer: float
    wilson_ci_95: tuple
    avg_metric_computations: float
    seed: int = field(default=0)

    def to_dict(self) -> dict:
        return asdict(self)


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    low = 0.0 if errors == 0 else max(0.0, centre - half)
    high = 1.0 if errors == trials else min(1.0, centre + half)
    return low, high


def mean_codeword_energy(code: StbcCode, constellation: Constellation) -> float:
    """Exact ``E||S||_F^2`` for i.i.d. uniform symbols."""
    g = code.generator
    pts = constellation.points
    pairs = np.stack([pts.real, pts.imag], axis=1)
    mu = pairs.mean(axis=0)
    cov = pairs.T @ pairs / len(pts) - np.outer(mu, mu)
    mean_vec = np.tile(mu, code.k)
    gram = g.T @ g
    energy = mean_vec @ gram @ mean_vec
    for i in range(code.k):
        energy += np.trace(gram[2 * i:2 * i + 2, 2 * i:2 * i + 2] @ cov)
    return float(energy)


def energy_scale(code: StbcCode, constellation: Constellation) -> float:
    """Amplitude factor bringing ``E||S||_F^2`` to ``n_t * T``."""
    return math.sqrt(code.n_t * code.T / mean_codeword_energy(code, constellation))


def _noise_density(snr_db: float, n_t: int) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return n_t / 10.0 ** (snr_db / 10.0)


def _draw_block(cfg: SimConfig, code: StbcCode, constellation: Constellation,
                point: int, first: int, count: int):
    m = constellation.size
    n_r, n_t, T, k = cfg.n_r, code.n_t, code.T, code.k
    fs = _StreamFactory(cfg.seed, point, "symbols")
    fc = _StreamFactory(cfg.seed, point, "channel")
    fn = _StreamFactory(cfg.seed, point, "noise")
    idx = np.empty((count, k), dtype=int)
    uh = np.empty((count, 2 * n_r * n_t))
    un = np.empty((count, 2 * n_r * T))
    for j in range(count):
        t = first + j
        idx[j] = np.minimum((fs.trial(t).uniforms(k) * m).astype(int), m - 1)
        uh[j] = fc.trial(t).uniforms(uh.shape[1])
        un[j] = fn.trial(t).uniforms(un.shape[1])
    # same values as Substream.normals, transformed for the whole block at once
    g, nz = box_muller(uh), box_muller(un)
    hmat = ((g[:, 0::2] + 1j * g[:, 1::2]) / math.sqrt(2)).reshape(count, n_r, n_t)
    noise = ((nz[:, 0::2] + 1j * nz[:, 1::2]) / math.sqrt(2)).reshape(count, n_r, T)
    return idx, hmat, noise


_SD = {
    "proposed2x2": dec.decode_proposed_2x2,
    "proposed4x2": dec.decode_proposed_4x2,
    "golden": dec.decode_golden_fast,
}


def _run_block(cfg, code, constellation, scale, n0, point, first, count):
    idx, h, noise = _draw_block(cfg, code, constellation, point, first, count)
    x = constellation.points[idx]
    s = code.encode_batch(x) * scale
    y = h @ s + math.sqrt(n0) * noise
    h_eff = h * scale
    if cfg.decoder_name == "sd":
        if code.name not in _SD:
            raise ConfigurationError(f"no sphere-decoding path for {code.name}")
        x_hat = np.empty_like(x)
        comps = np.empty(count, dtype=np.int64)
        for j in range(count):
            r = _SD[code.name](y[j], h_eff[j], constellation)
            x_hat[j], comps[j] = r.x_hat, r.metric_computations
    else:
        x_hat, comps = decode_batch(code, constellation, y, h_eff, cfg.decoder_name)
    errors = int(np.sum(np.any(x_hat != x, axis=1)))
    return errors, int(comps.sum())


def default_workers() -> int:
    return max(1, int(os.environ.get("STBC_THREADS", "1")))


def run_cer_sweep(cfg: SimConfig, progress=None) -> list[CerPoint]:
    """Simulate codeword error rate at every SNR in ``cfg.snr_db_list``."""
    code = get_code(cfg.code_name)
    constellation = from_name(cfg.constellation)
    if cfg.decoder_name == "sd" and code.name not in _SD:
        raise ConfigurationError(f"no sphere-decoding path for {code.name}")
    if cfg.decoder_name == "fast" and code.name not in dec.CONDITIONAL_STRUCTURE:
        raise ConfigurationError(f"no fast decoder for {code.name}; use --decoder exhaustive")
    if code.name == "golden" and not constellation.is_square and cfg.decoder_name != "exhaustive":
        raise ConfigurationError("the Golden code has no fast decoder for non-square QAM")
    scale = energy_scale(code, constellation)
    workers = cfg.workers or default_workers()
    points = []
    for p, snr in enumerate(cfg.snr_db_list):
        n0 = _noise_density(float(snr), code.n_t)
        blocks = [(b, min(BLOCK, cfg.trials_per_point - b))
                  for b in range(0, cfg.trials_per_point, BLOCK)]

        def job(blk, p=p, n0=n0):
            return _run_block(cfg, code, constellation, scale, n0, p, blk[0], blk[1])

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, blocks))
        else:
            results = [job(b) for b in blocks]
        errors = sum(r[0] for r in results)
        comps = sum(r[1] for r in results)
        n = cfg.trials_per_point
        points.append(CerPoint(float(snr), n, errors, errors / n, wilson_interval(errors, n),
                               comps / n, cfg.seed))
        if progress is not None:
            progress(points[-1])
    return points


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    # six significant digits in fixed notation; exponent taken after rounding
    exp = int(f"{v:.5e}".split("e")[1]) if v != 0 else 0
    return f"{v:.{max(0, 5 - exp)}f}"


def to_csv(points: list[CerPoint]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for pt in points:
        lo, hi = pt.wilson_ci_95
        buf.write(",".join([_fmt(pt.snr_db), str(pt.trials), str(pt.errors), _fmt(pt.cer),
                            _fmt(lo), _fmt(hi), _fmt(pt.avg_metric_computations)]) + "\n")
    return buf.getvalue()


def parse_snr_range(text: str) -> tuple:
    """``"a:b:c"`` is start:step:stop inclusive; also accepts ``"a,b,c"`` or ``"inf"``."""
    text = text.strip()
    if ":" in text:
        start, step, stop = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(n))
    return tuple(float(v) for v in text.split(","))
